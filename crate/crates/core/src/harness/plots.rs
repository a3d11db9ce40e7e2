//! Turns a sweep CSV into plot-ready aggregates: per-cell means in
//! whitespace-separated long format plus a gnuplot script rendering them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{ExperimentRow, CSV_COLUMNS};
use crate::{Error, Result};

/// What [`emit_plots`] aggregated and wrote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotSummary {
    /// Data rows read from the CSV.
    pub rows: usize,
    /// Rows left out: failed rows and rows without metrics.
    pub skipped: usize,
    /// Distinct `(n, k, similarity, method)` cells aggregated.
    pub groups: usize,
    /// Files written, in writing order.
    pub files: Vec<PathBuf>,
}

/// Error metrics aggregated into `error_vs_n.dat`.
const ERROR_METRICS: [&str; 3] = ["mse_nonzero", "mse_all", "mae_all"];
/// Size statistics aggregated into `size_vs_n.dat`.
const SIZE_METRICS: [&str; 3] = ["num_vars", "num_linear", "num_quadratic"];

#[derive(Default)]
struct Accumulator {
    count: usize,
    sums: [f64; 6],
}

type GroupKey = (usize, usize, String, String);

/// Reads a sweep CSV, averages each metric per `(n, k, similarity, method)`
/// cell, and writes `error_vs_n.dat`, `size_vs_n.dat` and `plots.gp` into
/// `out_dir`. A CSV without usable rows still produces the files, so
/// downstream tooling always finds them.
pub fn emit_plots(csv_path: &Path, out_dir: &Path) -> Result<PlotSummary> {
    let mut reader = csv::Reader::from_path(csv_path)?;
    let headers: BTreeSet<String> = reader.headers()?.iter().map(str::to_owned).collect();
    for column in CSV_COLUMNS {
        if !headers.contains(column) {
            return Err(Error::MissingColumn(column.to_string()));
        }
    }
    let mut groups: BTreeMap<GroupKey, Accumulator> = BTreeMap::new();
    let mut rows = 0usize;
    let mut skipped = 0usize;
    for record in reader.deserialize() {
        let row: ExperimentRow = record?;
        rows += 1;
        let metrics = [
            row.mse_nonzero,
            row.mse_all,
            row.mae_all,
            row.num_vars.map(|v| v as f64),
            row.num_linear.map(|v| v as f64),
            row.num_quadratic.map(|v| v as f64),
        ];
        if !row.error.is_empty() || metrics.iter().any(Option::is_none) {
            skipped += 1;
            continue;
        }
        let acc = groups
            .entry((row.n, row.k, row.similarity.clone(), row.method.clone()))
            .or_default();
        acc.count += 1;
        for (sum, value) in acc.sums.iter_mut().zip(metrics) {
            *sum += value.expect("missing metrics were skipped");
        }
    }
    if groups.is_empty() {
        log::warn!(
            "{} has no usable rows; writing empty plot data",
            csv_path.display()
        );
    }
    fs::create_dir_all(out_dir)?;
    let error_path = out_dir.join("error_vs_n.dat");
    let size_path = out_dir.join("size_vs_n.dat");
    let script_path = out_dir.join("plots.gp");
    fs::write(&error_path, data_file(&groups, &ERROR_METRICS, 0))?;
    fs::write(&size_path, data_file(&groups, &SIZE_METRICS, 3))?;
    fs::write(&script_path, script(&groups))?;
    Ok(PlotSummary {
        rows,
        skipped,
        groups: groups.len(),
        files: vec![error_path, size_path, script_path],
    })
}

/// Long-format aggregate table: one row per cell and metric, curves
/// contiguous and ascending in the node count.
fn data_file(groups: &BTreeMap<GroupKey, Accumulator>, metrics: &[&str], offset: usize) -> String {
    let mut out = String::from("# n k similarity method metric mean count\n");
    let mut lines: BTreeMap<(usize, usize, String, String, usize), String> = BTreeMap::new();
    for ((n, k, sim, method), acc) in groups {
        for (m, metric) in metrics.iter().enumerate() {
            let mean = acc.sums[offset + m] / acc.count as f64;
            lines.insert(
                (m, *k, sim.clone(), method.clone(), *n),
                format!("{n} {k} {sim} {method} {metric} {mean} {}\n", acc.count),
            );
        }
    }
    for line in lines.values() {
        out.push_str(line);
    }
    out
}

fn script(groups: &BTreeMap<GroupKey, Accumulator>) -> String {
    let mut out = String::from(
        "# Renders the sweep aggregates; run from this directory:\n\
         #   gnuplot plots.gp\n",
    );
    if groups.is_empty() {
        out.push_str("print 'no data to plot'\n");
        return out;
    }
    let ks: BTreeSet<usize> = groups.keys().map(|(_, k, _, _)| *k).collect();
    let curves: BTreeSet<(String, String)> = groups
        .keys()
        .map(|(_, _, sim, method)| (sim.clone(), method.clone()))
        .collect();
    let columns = 2.min(ks.len());
    let rows = ks.len().div_ceil(columns);
    for (file, data, metric, ylabel) in [
        (
            "error_vs_n.png",
            "error_vs_n.dat",
            "mse_all",
            "mean squared error, all pairs",
        ),
        (
            "size_vs_n.png",
            "size_vs_n.dat",
            "num_quadratic",
            "mean quadratic terms",
        ),
    ] {
        writeln!(out, "\nset terminal pngcairo size 1200,{}", 420 * rows).unwrap();
        writeln!(out, "set output '{file}'").unwrap();
        writeln!(
            out,
            "set multiplot layout {rows},{columns} title '{metric} vs n'"
        )
        .unwrap();
        out.push_str("set xlabel 'nodes'\n");
        writeln!(out, "set ylabel '{ylabel}'").unwrap();
        out.push_str("set key outside right\n");
        for k in &ks {
            writeln!(out, "set title 'k = {k}'").unwrap();
            let clauses: Vec<String> = curves
                .iter()
                .map(|(sim, method)| {
                    format!(
                        "'{data}' using 1:((column(2) == {k} && strcol(3) eq '{sim}' && \
                         strcol(4) eq '{method}' && strcol(5) eq '{metric}') ? column(6) : 1/0) \
                         with linespoints title '{sim}/{method}'"
                    )
                })
                .collect();
            writeln!(out, "plot {}", clauses.join(", \\\n     ")).unwrap();
        }
        out.push_str("unset multiplot\n");
    }
    out
}
