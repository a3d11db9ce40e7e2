//! End-to-end checks of the installed binary: exit codes, file outputs, and
//! agreement between solver backends.

use std::path::Path;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use binembed::eval::Embedding;
use binembed::qubo::import_qubo;
use binembed::solver::{solve_exact, write_samples_file, QUBO_FILE_NAME, SAMPLES_FILE_NAME};

fn binembed(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binembed"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn embed_writes_an_embedding_and_prints_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let output = binembed(
        &[
            "embed",
            "--n",
            "8",
            "--k",
            "2",
            "--similarity",
            "adjcy",
            "--method",
            "penalty",
            "--solver",
            "sa",
            "--num-reads",
            "50",
            "--sweeps",
            "200",
            "--seed",
            "1",
            "--out",
            "embedding.json",
        ],
        dir.path(),
    );
    assert!(output.status.success(), "{output:?}");
    let line = stdout(&output);
    for key in ["feasible=", "mse_all=", "violations=", "iterations=1"] {
        assert!(line.contains(key), "missing {key} in {line}");
    }
    let written = std::fs::read_to_string(dir.path().join("embedding.json")).unwrap();
    let embedding = Embedding::from_json(&written).unwrap();
    assert_eq!(embedding.n(), 8);
    assert_eq!(embedding.k(), 2);
}

#[test]
fn multiplier_method_reports_its_iteration_count() {
    let dir = tempfile::tempdir().unwrap();
    let output = binembed(
        &[
            "embed",
            "--n",
            "5",
            "--avg-degree",
            "1.5",
            "--k",
            "1",
            "--similarity",
            "jac",
            "--method",
            "almq",
            "--solver",
            "exact",
            "--seed",
            "3",
        ],
        dir.path(),
    );
    assert!(output.status.success(), "{output:?}");
    let line = stdout(&output);
    assert!(line.contains("feasible=true"), "{line}");
    assert!(line.contains("method=almq"), "{line}");
}

#[test]
fn oversized_exact_solve_exits_with_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let build = binembed(
        &[
            "build",
            "--n",
            "10",
            "--k",
            "2",
            "--similarity",
            "jac",
            "--seed",
            "0",
            "--out",
            "big.qubo.json",
        ],
        dir.path(),
    );
    assert!(build.status.success(), "{build:?}");
    let solve = binembed(
        &["solve", "--in", "big.qubo.json", "--solver", "exact"],
        dir.path(),
    );
    assert_eq!(solve.status.code(), Some(2), "{solve:?}");
    let stderr = String::from_utf8_lossy(&solve.stderr).into_owned();
    assert!(
        stderr.contains("26"),
        "guard message names the limit: {stderr}"
    );
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = binembed(
        &["solve", "--in", "q.json", "--solver", "nonsense"],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(1), "{bad:?}");
    let missing = binembed(&["solve"], dir.path());
    assert_eq!(missing.status.code(), Some(1), "{missing:?}");
    let help = binembed(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0), "{help:?}");
    assert!(stdout(&help).contains("sweep"));
}

#[test]
fn external_solver_agrees_with_exact_through_the_exchange() {
    let dir = tempfile::tempdir().unwrap();
    let build = binembed(
        &[
            "build",
            "--n",
            "5",
            "--avg-degree",
            "1.6",
            "--k",
            "1",
            "--similarity",
            "jac",
            "--seed",
            "7",
            "--out",
            "q.json",
        ],
        dir.path(),
    );
    assert!(build.status.success(), "{build:?}");
    let exact = binembed(
        &["solve", "--in", "q.json", "--solver", "exact"],
        dir.path(),
    );
    assert!(exact.status.success(), "{exact:?}");
    let exact_best = stdout(&exact)
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("best_energy=").map(str::to_owned))
        .expect("best energy reported");

    let exchange = dir.path().join("exchange");
    std::fs::create_dir(&exchange).unwrap();
    let done = Arc::new(AtomicBool::new(false));
    let responder = std::thread::spawn({
        let exchange = exchange.clone();
        let done = Arc::clone(&done);
        move || {
            let qubo_path = exchange.join(QUBO_FILE_NAME);
            while !done.load(Ordering::Relaxed) {
                if qubo_path.exists() {
                    let content = std::fs::read(&qubo_path).unwrap();
                    let (q, _) = import_qubo(content.as_slice()).unwrap();
                    std::fs::remove_file(&qubo_path).unwrap();
                    let set = solve_exact(&q).unwrap();
                    write_samples_file(&set, q.num_vars(), &exchange.join(SAMPLES_FILE_NAME))
                        .unwrap();
                }
                std::thread::sleep(std::time::Duration::from_millis(2));
            }
        }
    });
    let external = binembed(
        &[
            "solve",
            "--in",
            "q.json",
            "--solver",
            "external",
            "--exchange-dir",
            exchange.to_str().unwrap(),
            "--out",
            "samples.json",
        ],
        dir.path(),
    );
    done.store(true, Ordering::Relaxed);
    responder.join().unwrap();
    assert!(external.status.success(), "{external:?}");
    let external_best = stdout(&external)
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("best_energy=").map(str::to_owned))
        .expect("best energy reported");
    assert_eq!(exact_best, external_best);
    assert!(dir.path().join("samples.json").exists());
}

#[test]
fn sweeps_are_reproducible_except_for_timings() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--n",
        "4,5",
        "--k",
        "1",
        "--similarity",
        "jac",
        "--method",
        "penalty",
        "--solver",
        "exact",
        "--graphs",
        "2",
        "--repeats",
        "1",
        "--avg-degree",
        "1.0",
        "--seed",
        "9",
    ];
    let scrubbed = |name: &str| -> Vec<String> {
        let content = std::fs::read_to_string(dir.path().join(name)).unwrap();
        content
            .lines()
            .map(|line| {
                let mut cells: Vec<&str> = line.split(',').collect();
                cells[16] = "-";
                cells.join(",")
            })
            .collect()
    };
    let first = binembed(&[&args[..], &["--out", "a.csv"][..]].concat(), dir.path());
    assert!(first.status.success(), "{first:?}");
    assert!(
        stdout(&first).contains("wrote 4 rows (0 failed)"),
        "{first:?}"
    );
    let second = binembed(&[&args[..], &["--out", "b.csv"][..]].concat(), dir.path());
    assert!(second.status.success(), "{second:?}");
    assert_eq!(scrubbed("a.csv"), scrubbed("b.csv"));
}

#[test]
fn graph_files_flow_from_gen_through_sim_and_plot_consumes_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let gen = binembed(
        &[
            "gen",
            "--n",
            "6",
            "--avg-degree",
            "2.0",
            "--seed",
            "4",
            "--format",
            "structured",
            "--out",
            "graph.json",
        ],
        dir.path(),
    );
    assert!(gen.status.success(), "{gen:?}");
    let sim = binembed(
        &[
            "sim",
            "--in",
            "graph.json",
            "--similarity",
            "jac0",
            "--out",
            "scores.json",
        ],
        dir.path(),
    );
    assert!(sim.status.success(), "{sim:?}");
    let scores = std::fs::read_to_string(dir.path().join("scores.json")).unwrap();
    binembed::SimilarityMap::from_json(&scores).unwrap();

    let sweep = binembed(
        &[
            "sweep",
            "--n",
            "4",
            "--k",
            "1",
            "--similarity",
            "jac",
            "--method",
            "penalty",
            "--solver",
            "exact",
            "--graphs",
            "1",
            "--repeats",
            "1",
            "--avg-degree",
            "1.0",
            "--out",
            "rows.csv",
        ],
        dir.path(),
    );
    assert!(sweep.status.success(), "{sweep:?}");
    let plot = binembed(
        &["plot", "--in", "rows.csv", "--out-dir", "plots"],
        dir.path(),
    );
    assert!(plot.status.success(), "{plot:?}");
    for file in ["error_vs_n.dat", "size_vs_n.dat", "plots.gp"] {
        assert!(
            dir.path().join("plots").join(file).exists(),
            "missing {file}"
        );
    }
}
