//! Augmented-Lagrangian outer loop: multiplier state per product constraint,
//! dual updates from the latest sample, and the solve loop that alternates
//! instance builds with a sampler until the products come out consistent.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eval::{evaluate_sample, EmbeddingResult};
use crate::qubo::{build_qubo_alm, build_qubo_almq, BuilderParams, VarIndexer};
use crate::similarity::SimilarityMap;
use crate::solver::Sampler;
use crate::{Error, Result};

/// How the product constraints are expressed for the multiplier method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlmVariant {
    /// Three inequality multipliers per product: `z ≤ x`, `z ≤ y`,
    /// `x + y - 1 ≤ z`.
    #[serde(rename = "alm")]
    Alm,
    /// One signed equality multiplier per product: `z = x·y`.
    #[serde(rename = "almq")]
    Almq,
}

impl fmt::Display for AlmVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlmVariant::Alm => "alm",
            AlmVariant::Almq => "almq",
        })
    }
}

impl FromStr for AlmVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alm" => Ok(AlmVariant::Alm),
            "almq" => Ok(AlmVariant::Almq),
            other => Err(Error::InvalidParam(format!(
                "unknown multiplier variant `{other}` (expected alm or almq)"
            ))),
        }
    }
}

/// Signed constraint values of one `(x, y, z)` triple.
///
/// `c1 = z - x` and `c2 = z - y` (each ≤ 0 when satisfied),
/// `c3 = x + y - z - 1` (≤ 0 when satisfied), and the product residual
/// `e = z - x·y`. For binary triples, `e = 0` exactly when all three
/// inequalities hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintValues {
    pub c1: i32,
    pub c2: i32,
    pub c3: i32,
    pub e: i32,
}

/// Evaluates every product constraint on a full assignment, pair-major and
/// dimension-minor, matching the multiplier layout.
pub fn constraint_values(bits: &[bool], idx: &VarIndexer) -> Result<Vec<ConstraintValues>> {
    if bits.len() != idx.num_vars() {
        return Err(Error::SampleShape {
            expected: idx.num_vars(),
            got: bits.len(),
        });
    }
    let mut values = Vec::with_capacity(idx.pairs().len() * idx.k());
    for (pos, &(x, y)) in idx.pairs().iter().enumerate() {
        for dim in 0..idx.k() {
            let xb = bits[idx.embedding_var(x, dim)] as i32;
            let yb = bits[idx.embedding_var(y, dim)] as i32;
            let zb = bits[idx.aux_var(pos, dim)] as i32;
            values.push(ConstraintValues {
                c1: zb - xb,
                c2: zb - yb,
                c3: xb + yb - zb - 1,
                e: zb - xb * yb,
            });
        }
    }
    Ok(values)
}

/// Multipliers and penalty weight of the augmented-Lagrangian method.
///
/// The inequality variant keeps three multipliers per pair and dimension,
/// the equality variant one signed multiplier. All start at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeState {
    variant: AlmVariant,
    num_pairs: usize,
    k: usize,
    mu: f64,
    rho: f64,
    iteration: usize,
    lambdas: Vec<f64>,
}

/// Fresh multiplier state for one instance: all multipliers zero, penalty
/// weight `mu0`, growth factor `rho` applied after every update.
pub fn init_state(
    sim: &SimilarityMap,
    k: usize,
    variant: AlmVariant,
    mu0: f64,
    rho: f64,
) -> Result<LagrangeState> {
    if k == 0 {
        return Err(Error::InvalidParam(
            "embedding dimension must be >= 1".into(),
        ));
    }
    if !mu0.is_finite() || mu0 <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "initial penalty weight must be finite and positive, got {mu0}"
        )));
    }
    if !rho.is_finite() || rho <= 1.0 {
        return Err(Error::InvalidParam(format!(
            "penalty growth factor must be finite and > 1, got {rho}"
        )));
    }
    let num_pairs = sim.nonzero().len();
    let per_triple = match variant {
        AlmVariant::Alm => 3,
        AlmVariant::Almq => 1,
    };
    Ok(LagrangeState {
        variant,
        num_pairs,
        k,
        mu: mu0,
        rho,
        iteration: 0,
        lambdas: vec![0.0; num_pairs * k * per_triple],
    })
}

impl LagrangeState {
    pub fn variant(&self) -> AlmVariant {
        self.variant
    }

    pub fn num_pairs(&self) -> usize {
        self.num_pairs
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn num_multipliers(&self) -> usize {
        self.lambdas.len()
    }

    /// Inequality multipliers `(λ1, λ2, λ3)` of one pair and dimension.
    ///
    /// # Panics
    ///
    /// Panics when the state is for the equality variant or out of range.
    pub fn lambda_alm(&self, pair_pos: usize, dim: usize) -> (f64, f64, f64) {
        assert_eq!(
            self.variant,
            AlmVariant::Alm,
            "equality state has one multiplier"
        );
        let base = (pair_pos * self.k + dim) * 3;
        (
            self.lambdas[base],
            self.lambdas[base + 1],
            self.lambdas[base + 2],
        )
    }

    /// Equality multiplier `λ` of one pair and dimension.
    ///
    /// # Panics
    ///
    /// Panics when the state is for the inequality variant or out of range.
    pub fn lambda_almq(&self, pair_pos: usize, dim: usize) -> f64 {
        assert_eq!(
            self.variant,
            AlmVariant::Almq,
            "inequality state has three multipliers"
        );
        self.lambdas[pair_pos * self.k + dim]
    }

    fn check_indexer(&self, idx: &VarIndexer) -> Result<()> {
        if idx.pairs().len() != self.num_pairs || idx.k() != self.k {
            return Err(Error::ShapeMismatch(format!(
                "multiplier state shaped for {} pairs / k = {}, indexer has {} / {}",
                self.num_pairs,
                self.k,
                idx.pairs().len(),
                idx.k()
            )));
        }
        Ok(())
    }

    /// One dual step from a sampled assignment.
    ///
    /// Inequality multipliers move by `μ·max(0, c)`, the equality multiplier
    /// by `μ·e`, both at the current penalty weight; the weight then grows
    /// by the factor `rho` and the iteration counter advances.
    pub fn update_multipliers(&mut self, bits: &[bool], idx: &VarIndexer) -> Result<()> {
        self.check_indexer(idx)?;
        let values = constraint_values(bits, idx)?;
        match self.variant {
            AlmVariant::Alm => {
                for (t, v) in values.iter().enumerate() {
                    self.lambdas[t * 3] += self.mu * f64::max(0.0, v.c1 as f64);
                    self.lambdas[t * 3 + 1] += self.mu * f64::max(0.0, v.c2 as f64);
                    self.lambdas[t * 3 + 2] += self.mu * f64::max(0.0, v.c3 as f64);
                }
            }
            AlmVariant::Almq => {
                for (t, v) in values.iter().enumerate() {
                    self.lambdas[t] += self.mu * v.e as f64;
                }
            }
        }
        self.mu *= self.rho;
        self.iteration += 1;
        Ok(())
    }
}

/// Knobs of the multiplier solve loop.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmOptions {
    /// Initial penalty weight.
    pub mu0: f64,
    /// Penalty growth factor per iteration.
    pub rho: f64,
    /// Iteration budget; the loop stops early at the first consistent sample.
    pub max_iters: usize,
    /// Objective weights shared with the instance builders. The fixed
    /// penalty field is ignored here — the penalty weight lives in the
    /// multiplier state.
    pub params: BuilderParams,
}

impl Default for AlmOptions {
    fn default() -> Self {
        Self {
            mu0: 0.5,
            rho: 1.1,
            max_iters: 50,
            params: BuilderParams {
                mu: 0.0,
                alpha: 1.0,
                beta: 1.0,
                weights: None,
            },
        }
    }
}

/// One outer-loop step: the sampled minimum, how inconsistent it was, and
/// the penalty weight and embedding objective at that point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlmIteration {
    pub iteration: usize,
    /// Best sampled energy of the iteration's instance.
    pub energy: f64,
    /// Auxiliary variables disagreeing with their bit product.
    pub violations: usize,
    /// Penalty weight the instance was built with.
    pub mu: f64,
    /// Weighted embedding objective (scored residuals plus zero overlap).
    pub objective: f64,
}

/// Renders an iteration history as CSV with a header row.
pub fn history_csv(history: &[AlmIteration]) -> String {
    let mut out = String::from("iteration,energy,violations,mu,objective\n");
    for it in history {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            it.iteration, it.energy, it.violations, it.mu, it.objective
        ));
    }
    out
}

/// Runs the multiplier loop: build the instance for the current state,
/// sample it, stop at the first consistent best sample, otherwise update
/// the multipliers and repeat up to `max_iters` times.
///
/// Returns the final decoded result — consistent if any iteration produced
/// a consistent best sample, otherwise the last iterate flagged infeasible —
/// along with the per-iteration history.
pub fn alm_solve(
    sim: &SimilarityMap,
    k: usize,
    variant: AlmVariant,
    sampler: &dyn Sampler,
    opts: &AlmOptions,
) -> Result<(EmbeddingResult, Vec<AlmIteration>)> {
    if opts.max_iters == 0 {
        return Err(Error::InvalidParam("iteration budget must be >= 1".into()));
    }
    opts.params.validate()?;
    let mut state = init_state(sim, k, variant, opts.mu0, opts.rho)?;
    let mut history = Vec::with_capacity(opts.max_iters);
    let mut last = None;
    for _ in 0..opts.max_iters {
        let (q, idx) = match variant {
            AlmVariant::Alm => build_qubo_alm(sim, k, &state, &opts.params)?,
            AlmVariant::Almq => build_qubo_almq(sim, k, &state, &opts.params)?,
        };
        let set = sampler.sample(&q, &idx)?;
        let best = set
            .best()
            .ok_or_else(|| Error::Malformed("sampler returned no samples".into()))?;
        let result = evaluate_sample(&best.bits, &idx, sim, &opts.params)?;
        history.push(AlmIteration {
            iteration: state.iteration(),
            energy: best.energy,
            violations: result.violations,
            mu: state.mu(),
            objective: result.combined_objective(&opts.params),
        });
        if result.feasible {
            return Ok((result, history));
        }
        state.update_multipliers(&best.bits, &idx)?;
        last = Some(result);
    }
    Ok((last.expect("iteration budget is nonzero"), history))
}
