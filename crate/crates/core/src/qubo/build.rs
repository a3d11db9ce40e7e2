//! QUBO builders: quadratic embedding objective plus one of three ways to
//! force the auxiliary product variables to equal the products they stand
//! for (fixed penalty, inequality multipliers, equality multiplier).

use crate::alm::{AlmVariant, LagrangeState};
use crate::similarity::SimilarityMap;
use crate::{Error, Result};

use super::{BuilderParams, Qubo, VarIndexer};

/// Values of the three penalty components, their sum, and the product
/// residual for one `(x, y, z)` bit triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PenaltyValues {
    /// `z - xz`: positive when z is on without x.
    pub p1: i32,
    /// `z - yz`: positive when z is on without y.
    pub p2: i32,
    /// `z - xz - yz + xy`: positive when z disagrees with x·y otherwise.
    pub p3: i32,
    /// `p1 + p2 + p3`; zero exactly on consistent triples, otherwise ≥ 1.
    pub p: i32,
    /// Signed residual `z - x·y`.
    pub e: i32,
}

/// Evaluates the penalty components on one bit triple.
pub fn penalty_values(x: bool, y: bool, z: bool) -> PenaltyValues {
    let (x, y, z) = (x as i32, y as i32, z as i32);
    let p1 = z - x * z;
    let p2 = z - y * z;
    let p3 = z - x * z - y * z + x * y;
    PenaltyValues {
        p1,
        p2,
        p3,
        p: p1 + p2 + p3,
        e: z - x * y,
    }
}

/// Penalty weight that, with unit objective weights, exceeds the level at
/// which every optimum has consistent products.
pub fn default_penalty_mu(k: usize) -> f64 {
    let kf = k as f64;
    2.0 / kf + 1.0 / (kf * kf) + 0.5
}

/// Largest possible objective change from flipping one auxiliary variable:
/// any fixed penalty strictly above this forces consistent products at
/// every optimum.
pub fn sufficient_mu_bound(k: usize, alpha: f64, w_max: f64) -> f64 {
    let kf = k as f64;
    alpha * w_max * (2.0 / kf + 1.0 / (kf * kf))
}

fn check_shapes(sim: &SimilarityMap, idx: &VarIndexer) -> Result<()> {
    if idx.n() != sim.n() || idx.pairs().len() != sim.nonzero().len() {
        return Err(Error::ShapeMismatch(format!(
            "indexer built for {} nodes / {} pairs, similarity map has {} / {}",
            idx.n(),
            idx.pairs().len(),
            sim.n(),
            sim.nonzero().len()
        )));
    }
    Ok(())
}

/// Squared-residual objective over the scored pairs, expressed on the
/// auxiliary product variables.
///
/// For each pair with score `s` and weight `a = alpha·w`, each per-dimension
/// auxiliary variable gets `a·(1/k² - 2s/k)` linearly, distinct dimensions of
/// the same pair interact with `a·2/k²`, and `a·s²` joins the offset.
pub fn objective_terms(
    sim: &SimilarityMap,
    idx: &VarIndexer,
    params: &BuilderParams,
) -> Result<Qubo> {
    params.validate()?;
    check_shapes(sim, idx)?;
    let k = idx.k();
    let kf = k as f64;
    let mut q = Qubo::new(idx.num_vars());
    for (pos, (&(x, y), &s)) in sim.nonzero().iter().enumerate() {
        let a = params.alpha * params.weight(x, y);
        let lin = a * (1.0 / (kf * kf) - 2.0 * s / kf);
        let quad = a * 2.0 / (kf * kf);
        for i in 0..k {
            q.add_linear(idx.aux_var(pos, i), lin);
            for j in (i + 1)..k {
                q.add_quadratic(idx.aux_var(pos, i), idx.aux_var(pos, j), quad);
            }
        }
        q.add_offset(a * s * s);
    }
    Ok(q)
}

/// Unscaled penalty fragment for one pair position and dimension:
/// `3z - 2xz - 2yz + xy`, which is 0 on consistent triples and ≥ 1 otherwise.
pub fn penalty_terms(idx: &VarIndexer, pair_pos: usize, dim: usize) -> Qubo {
    let (x, y) = idx.pairs()[pair_pos];
    let xi = idx.embedding_var(x, dim);
    let yi = idx.embedding_var(y, dim);
    let z = idx.aux_var(pair_pos, dim);
    let mut q = Qubo::new(idx.num_vars());
    q.add_linear(z, 3.0);
    q.add_quadratic(xi, z, -2.0);
    q.add_quadratic(yi, z, -2.0);
    q.add_quadratic(xi, yi, 1.0);
    q
}

/// First-order terms pushing zero-pinned pairs toward orthogonal vectors:
/// `beta/k` on each same-dimension bit product of a zero pair.
pub fn zero_pair_terms(
    sim: &SimilarityMap,
    idx: &VarIndexer,
    params: &BuilderParams,
) -> Result<Qubo> {
    params.validate()?;
    check_shapes(sim, idx)?;
    let mut q = Qubo::new(idx.num_vars());
    let coeff = params.beta / idx.k() as f64;
    for &(x, y) in sim.zero_pairs() {
        for i in 0..idx.k() {
            q.add_quadratic(idx.embedding_var(x, i), idx.embedding_var(y, i), coeff);
        }
    }
    Ok(q)
}

/// Objective plus fixed penalty `mu` on every product-consistency fragment,
/// plus the zero-pair terms.
pub fn build_qubo_penalty(
    sim: &SimilarityMap,
    k: usize,
    params: &BuilderParams,
) -> Result<(Qubo, VarIndexer)> {
    params.validate()?;
    let idx = VarIndexer::from_similarity(sim, k)?;
    let mut q = objective_terms(sim, &idx, params)?;
    for pos in 0..idx.pairs().len() {
        for dim in 0..k {
            q.merge_scaled(&penalty_terms(&idx, pos, dim), params.mu);
        }
    }
    q.merge_scaled(&zero_pair_terms(sim, &idx, params)?, 1.0);
    Ok((q, idx))
}

fn check_state(
    sim: &SimilarityMap,
    k: usize,
    state: &LagrangeState,
    expected: AlmVariant,
) -> Result<()> {
    if state.variant() != expected {
        return Err(Error::ShapeMismatch(format!(
            "multiplier state is for the {} variant, builder expects {}",
            state.variant(),
            expected
        )));
    }
    if state.num_pairs() != sim.nonzero().len() || state.k() != k {
        return Err(Error::ShapeMismatch(format!(
            "multiplier state shaped for {} pairs / k = {}, instance has {} / {}",
            state.num_pairs(),
            state.k(),
            sim.nonzero().len(),
            k
        )));
    }
    Ok(())
}

/// Objective plus the augmented-Lagrangian terms for the three inequality
/// constraints `z ≤ x`, `z ≤ y`, `x + y - 1 ≤ z` per pair and dimension.
///
/// With multipliers `(λ1, λ2, λ3)` and penalty `μ` this contributes, per
/// triple: `(-λ1+λ3)x + (-λ2+λ3)y + (λ1+λ2-λ3+3μ/2)z + (μ/2)xy - μxz - μyz`
/// and `-λ3` to the offset.
pub fn build_qubo_alm(
    sim: &SimilarityMap,
    k: usize,
    state: &LagrangeState,
    params: &BuilderParams,
) -> Result<(Qubo, VarIndexer)> {
    params.validate()?;
    check_state(sim, k, state, AlmVariant::Alm)?;
    let idx = VarIndexer::from_similarity(sim, k)?;
    let mut q = objective_terms(sim, &idx, params)?;
    let mu = state.mu();
    for pos in 0..idx.pairs().len() {
        let (x, y) = idx.pairs()[pos];
        for dim in 0..k {
            let (l1, l2, l3) = state.lambda_alm(pos, dim);
            let xi = idx.embedding_var(x, dim);
            let yi = idx.embedding_var(y, dim);
            let z = idx.aux_var(pos, dim);
            q.add_linear(xi, -l1 + l3);
            q.add_linear(yi, -l2 + l3);
            q.add_linear(z, l1 + l2 - l3 + 1.5 * mu);
            q.add_quadratic(xi, yi, 0.5 * mu);
            q.add_quadratic(xi, z, -mu);
            q.add_quadratic(yi, z, -mu);
            q.add_offset(-l3);
        }
    }
    q.merge_scaled(&zero_pair_terms(sim, &idx, params)?, 1.0);
    Ok((q, idx))
}

/// Objective plus the augmented-Lagrangian terms for the equality constraint
/// `z = x·y` per pair and dimension.
///
/// With multiplier `λ` and penalty `μ` this contributes, per triple:
/// `(λ+3μ/2)z + (-λ+μ/2)xy - μxz - μyz`.
pub fn build_qubo_almq(
    sim: &SimilarityMap,
    k: usize,
    state: &LagrangeState,
    params: &BuilderParams,
) -> Result<(Qubo, VarIndexer)> {
    params.validate()?;
    check_state(sim, k, state, AlmVariant::Almq)?;
    let idx = VarIndexer::from_similarity(sim, k)?;
    let mut q = objective_terms(sim, &idx, params)?;
    let mu = state.mu();
    for pos in 0..idx.pairs().len() {
        let (x, y) = idx.pairs()[pos];
        for dim in 0..k {
            let lambda = state.lambda_almq(pos, dim);
            let xi = idx.embedding_var(x, dim);
            let yi = idx.embedding_var(y, dim);
            let z = idx.aux_var(pos, dim);
            q.add_linear(z, lambda + 1.5 * mu);
            q.add_quadratic(xi, yi, -lambda + 0.5 * mu);
            q.add_quadratic(xi, z, -mu);
            q.add_quadratic(yi, z, -mu);
        }
    }
    q.merge_scaled(&zero_pair_terms(sim, &idx, params)?, 1.0);
    Ok((q, idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alm::init_state;
    use crate::graph::Graph;
    use crate::similarity::{build_similarity, SimilarityKind};
    use std::collections::BTreeMap;

    fn single_edge_sim() -> SimilarityMap {
        // One edge on two nodes: the only scored pair has Jaccard 1.
        build_similarity(&Graph::new(2, [(0, 1)]).unwrap(), SimilarityKind::Jac)
    }

    fn path3_sim(kind: SimilarityKind) -> SimilarityMap {
        build_similarity(&Graph::new(3, [(0, 1), (1, 2)]).unwrap(), kind)
    }

    fn unit_params(mu: f64) -> BuilderParams {
        BuilderParams {
            mu,
            alpha: 1.0,
            beta: 1.0,
            weights: None,
        }
    }

    #[test]
    fn penalty_components_match_the_truth_table() {
        // (x, y, z) -> (p1, p2, p3, p, e) for all eight bit triples.
        let expected = [
            ((false, false, false), (0, 0, 0, 0, 0)),
            ((false, false, true), (1, 1, 1, 3, 1)),
            ((false, true, false), (0, 0, 0, 0, 0)),
            ((false, true, true), (1, 0, 0, 1, 1)),
            ((true, false, false), (0, 0, 0, 0, 0)),
            ((true, false, true), (0, 1, 0, 1, 1)),
            ((true, true, false), (0, 0, 1, 1, -1)),
            ((true, true, true), (0, 0, 0, 0, 0)),
        ];
        for ((x, y, z), (p1, p2, p3, p, e)) in expected {
            let v = penalty_values(x, y, z);
            assert_eq!(
                (v.p1, v.p2, v.p3, v.p, v.e),
                (p1, p2, p3, p, e),
                "triple ({x},{y},{z})"
            );
            if z == (x && y) {
                assert_eq!(v.p, 0);
            } else {
                assert!(v.p >= 1);
            }
        }
    }

    #[test]
    fn objective_for_one_pair_at_k1_reduces_to_a_shifted_linear_term() {
        let sim = single_edge_sim();
        let idx = VarIndexer::from_similarity(&sim, 1).unwrap();
        let q = objective_terms(&sim, &idx, &unit_params(0.0)).unwrap();
        // (z - 1)^2 = -z + 1 over binaries.
        assert_eq!(q.linear_coeff(idx.aux_var(0, 0)), -1.0);
        assert!(q.quadratic().is_empty());
        assert_eq!(q.offset(), 1.0);
        assert_eq!(q.energy(&[false, false, true]), 0.0);
    }

    #[test]
    fn objective_for_one_pair_at_k2_couples_the_dimensions() {
        let sim = single_edge_sim();
        let idx = VarIndexer::from_similarity(&sim, 2).unwrap();
        let q = objective_terms(&sim, &idx, &unit_params(0.0)).unwrap();
        let z0 = idx.aux_var(0, 0);
        let z1 = idx.aux_var(0, 1);
        assert_eq!(q.linear_coeff(z0), -0.75);
        assert_eq!(q.linear_coeff(z1), -0.75);
        assert_eq!(q.quad_coeff(z0, z1), 0.5);
        assert_eq!(q.offset(), 1.0);
        // Minimum sits at both products on: ((2/2) - 1)^2 = 0.
        let mut bits = vec![false; idx.num_vars()];
        bits[z0] = true;
        bits[z1] = true;
        assert_eq!(q.energy(&bits), 0.0);
    }

    #[test]
    fn empty_scored_set_builds_an_empty_objective() {
        let g = Graph::new(3, []).unwrap();
        let sim = build_similarity(&g, SimilarityKind::Jac);
        let idx = VarIndexer::from_similarity(&sim, 2).unwrap();
        let q = objective_terms(&sim, &idx, &unit_params(0.0)).unwrap();
        assert_eq!(q.stats().num_linear, 0);
        assert_eq!(q.stats().num_quadratic, 0);
        assert_eq!(q.offset(), 0.0);
    }

    #[test]
    fn penalty_fragment_encodes_the_component_sum() {
        let sim = single_edge_sim();
        let idx = VarIndexer::from_similarity(&sim, 1).unwrap();
        let q = penalty_terms(&idx, 0, 0);
        let (x, y, z) = (0, 1, 2);
        assert_eq!(q.linear_coeff(z), 3.0);
        assert_eq!(q.quad_coeff(x, z), -2.0);
        assert_eq!(q.quad_coeff(y, z), -2.0);
        assert_eq!(q.quad_coeff(x, y), 1.0);
        // Fragment energies agree with the direct component formulas.
        for mask in 0..8u8 {
            let bits = vec![mask & 1 != 0, mask & 2 != 0, mask & 4 != 0];
            let v = penalty_values(bits[0], bits[1], bits[2]);
            assert_eq!(q.energy(&bits), v.p as f64);
        }
    }

    #[test]
    fn penalty_build_for_a_single_edge_matches_hand_expansion() {
        let sim = single_edge_sim();
        let (q, idx) = build_qubo_penalty(&sim, 1, &unit_params(2.0)).unwrap();
        let (x, y, z) = (0, 1, idx.aux_var(0, 0));
        assert_eq!(q.linear_coeff(z), 5.0); // -1 + 3μ
        assert_eq!(q.quad_coeff(x, z), -4.0);
        assert_eq!(q.quad_coeff(y, z), -4.0);
        assert_eq!(q.quad_coeff(x, y), 2.0);
        assert_eq!(q.offset(), 1.0);
        assert_eq!(q.linear().len(), 1);
        assert_eq!(q.quadratic().len(), 3);
        // Global minimum: embedding bits on, product consistent, energy 0.
        let mut best = f64::INFINITY;
        let mut best_bits = 0u8;
        for mask in 0..8u8 {
            let bits = vec![mask & 1 != 0, mask & 2 != 0, mask & 4 != 0];
            let e = q.energy(&bits);
            if e < best {
                best = e;
                best_bits = mask;
            }
        }
        assert_eq!(best, 0.0);
        assert_eq!(best_bits, 0b111);
    }

    #[test]
    fn zero_penalty_build_equals_bare_objective() {
        let sim = path3_sim(SimilarityKind::Jac);
        let (q, idx) = build_qubo_penalty(&sim, 2, &unit_params(0.0)).unwrap();
        let objective = objective_terms(&sim, &idx, &unit_params(0.0)).unwrap();
        assert_eq!(q, objective);
    }

    #[test]
    fn zero_pair_terms_put_beta_over_k_on_matching_dimensions() {
        let sim = path3_sim(SimilarityKind::Adjcy);
        let idx = VarIndexer::from_similarity(&sim, 2).unwrap();
        let q = zero_pair_terms(&sim, &idx, &unit_params(0.0)).unwrap();
        // Zero pair (0, 2): bits 0/1 of node 0 against bits 4/5 of node 2.
        assert_eq!(q.quad_coeff(0, 4), 0.5);
        assert_eq!(q.quad_coeff(1, 5), 0.5);
        assert_eq!(q.quadratic().len(), 2);
        assert!(q.linear().is_empty());
        let mut none = unit_params(0.0);
        none.beta = 0.0;
        let empty = zero_pair_terms(&sim, &idx, &none).unwrap();
        assert_eq!(empty.stats().num_quadratic, 0);
    }

    #[test]
    fn stats_count_sparse_terms_for_the_path_instance() {
        let sim = path3_sim(SimilarityKind::Jac);
        let (q, idx) = build_qubo_penalty(&sim, 2, &unit_params(default_penalty_mu(2))).unwrap();
        assert_eq!(idx.num_vars(), 12);
        let stats = q.stats();
        assert_eq!(stats.num_vars, 12);
        // One linear term per auxiliary variable.
        assert_eq!(stats.num_linear, 6);
        // Per pair: 1 in-pair auxiliary coupling + 3 penalty products per dim.
        assert_eq!(stats.num_quadratic, 21);
    }

    #[test]
    fn alm_terms_at_zero_multipliers_halve_the_penalty() {
        let sim = path3_sim(SimilarityKind::Jac);
        let state = init_state(&sim, 1, AlmVariant::Alm, 1.0, 1.1).unwrap();
        let params = unit_params(0.0);
        let (q, idx) = build_qubo_alm(&sim, 1, &state, &params).unwrap();
        let (x, y) = idx.pairs()[0];
        let (xi, yi, z) = (
            idx.embedding_var(x, 0),
            idx.embedding_var(y, 0),
            idx.aux_var(0, 0),
        );
        let objective = objective_terms(&sim, &idx, &params).unwrap();
        assert_eq!(q.linear_coeff(z) - objective.linear_coeff(z), 1.5);
        assert_eq!(q.quad_coeff(xi, yi), 0.5);
        assert_eq!(q.quad_coeff(xi, z), -1.0);
        assert_eq!(q.quad_coeff(yi, z), -1.0);
        // Composed form: objective + (μ/2) · penalty fragments.
        let mut composed = objective.clone();
        for pos in 0..idx.pairs().len() {
            composed.merge_scaled(&penalty_terms(&idx, pos, 0), 0.5);
        }
        assert_eq!(q, composed);
    }

    #[test]
    fn alm_terms_carry_multiplier_coefficients() {
        // One pair, k = 1, λ1 = 1, λ2 = λ3 = 0, μ -> 0: only -x and +z remain.
        let sim = single_edge_sim();
        let mut state = init_state(&sim, 1, AlmVariant::Alm, 1.0, 2.0).unwrap();
        // Drive λ1 to 1 by updating on a sample violating z ≤ x: x=0, y=1, z=1.
        let idx = VarIndexer::from_similarity(&sim, 1).unwrap();
        state
            .update_multipliers(&[false, true, true], &idx)
            .unwrap();
        assert_eq!(state.lambda_alm(0, 0), (1.0, 0.0, 0.0));
        // μ has grown to 2 after the update.
        let (q, _) = build_qubo_alm(&sim, 1, &state, &unit_params(0.0)).unwrap();
        let mu = state.mu();
        assert_eq!(mu, 2.0);
        assert_eq!(q.linear_coeff(0), -1.0); // -λ1 + λ3
        assert_eq!(q.linear_coeff(1), 0.0); // -λ2 + λ3
        assert_eq!(q.linear_coeff(2), -1.0 + 1.0 + 1.5 * mu); // objective -1, then λ1 + 3μ/2
        assert_eq!(q.quad_coeff(0, 1), 0.5 * mu);
        assert_eq!(q.quad_coeff(0, 2), -mu);
        assert_eq!(q.quad_coeff(1, 2), -mu);
    }

    #[test]
    fn almq_terms_match_both_documented_substitutions() {
        let sim = single_edge_sim();
        let state = init_state(&sim, 1, AlmVariant::Almq, 1.0, 1.1).unwrap();
        let params = unit_params(0.0);
        let (q, idx) = build_qubo_almq(&sim, 1, &state, &params).unwrap();
        let z = idx.aux_var(0, 0);
        let objective = objective_terms(&sim, &idx, &params).unwrap();
        assert_eq!(q.linear_coeff(z) - objective.linear_coeff(z), 1.5);
        assert_eq!(q.quad_coeff(0, 1), 0.5);
        assert_eq!(q.quad_coeff(0, z), -1.0);
        assert_eq!(q.quad_coeff(1, z), -1.0);
    }

    #[test]
    fn builders_reject_mismatched_state_variants() {
        let sim = single_edge_sim();
        let alm = init_state(&sim, 1, AlmVariant::Alm, 1.0, 1.1).unwrap();
        let almq = init_state(&sim, 1, AlmVariant::Almq, 1.0, 1.1).unwrap();
        assert!(build_qubo_alm(&sim, 1, &almq, &unit_params(0.0)).is_err());
        assert!(build_qubo_almq(&sim, 1, &alm, &unit_params(0.0)).is_err());
        // Dimension mismatch between state and build request.
        assert!(build_qubo_alm(&sim, 2, &alm, &unit_params(0.0)).is_err());
    }

    #[test]
    fn builds_are_deterministic() {
        let sim = path3_sim(SimilarityKind::Jac0);
        let params = BuilderParams {
            mu: 1.25,
            alpha: 0.7,
            beta: 0.3,
            weights: Some(BTreeMap::from([((0, 1), 2.0)])),
        };
        let (a, _) = build_qubo_penalty(&sim, 3, &params).unwrap();
        let (b, _) = build_qubo_penalty(&sim, 3, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn default_mu_clears_the_sufficient_bound() {
        for k in 1..=5 {
            assert!(default_penalty_mu(k) > sufficient_mu_bound(k, 1.0, 1.0));
        }
        assert_eq!(sufficient_mu_bound(2, 1.0, 1.0), 1.25);
        assert_eq!(default_penalty_mu(1), 3.5);
    }
}
