//! End-to-end checks of the `mtme` binary and CSV round-trips.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use mtme_cli::csv_io::{
    read_archive, read_log, read_tasks, write_archive, write_log, write_tasks, AggregateRow,
};
use mtme_core::engine::{run, BatchRecord, SequentialEvaluator};
use mtme_core::tasks::generate_uniform;
use mtme_core::{Method, RunConfig, SyntheticDomain};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mtme"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn csv_round_trips_are_exact() {
    let dir = tmp("roundtrip");
    let ts = generate_uniform(20, 3, 42);
    let tasks_path = dir.join("tasks.csv");
    write_tasks(&tasks_path, &ts).unwrap();
    let ts2 = read_tasks(&tasks_path).unwrap();
    for (a, b) in ts.iter().zip(ts2.iter()) {
        assert_eq!(a.params, b.params);
    }

    let dom = SyntheticDomain::new(5, 3, 7);
    let mut cfg = RunConfig::new(Method::Mtme, 20, 5, 3);
    cfg.eval_budget = 2_000;
    cfg.init_count = 20;
    let (archive, log) = run(&cfg, &ts, &dom, &SequentialEvaluator).unwrap();

    let archive_path = dir.join("archive.csv");
    write_archive(&archive_path, &archive, &ts).unwrap();
    let archive2 = read_archive(&archive_path, &ts).unwrap();
    assert_eq!(archive.filled_count(), archive2.filled_count());
    for (id, elite) in archive.iter_filled() {
        let other = archive2.slot(id).unwrap();
        assert_eq!(elite.genome, other.genome);
        assert_eq!(elite.fitness.to_bits(), other.fitness.to_bits());
    }

    let log_path = dir.join("log.csv");
    write_log(&log_path, &log.records).unwrap();
    let records2: Vec<BatchRecord> = read_log(&log_path).unwrap();
    assert_eq!(log.records, records2);
}

#[test]
fn run_subcommand_writes_all_files_and_is_reproducible() {
    let out1 = tmp("run1");
    let out2 = tmp("run2");
    for out in [&out1, &out2] {
        run_ok(bin().args([
            "run",
            "--domain",
            "synthetic",
            "--method",
            "mtme",
            "--tasks",
            "50",
            "--evals",
            "5000",
            "--seed",
            "3",
            "--out",
            out.to_str().unwrap(),
        ]));
    }
    for name in ["tasks.csv", "log.csv", "archive.csv"] {
        let a = fs::read(out1.join(name)).unwrap();
        let b = fs::read(out2.join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn parallel_workers_do_not_change_outputs() {
    let seq = tmp("workers-seq");
    let par = tmp("workers-par");
    for (out, workers) in [(&seq, "1"), (&par, "8")] {
        run_ok(bin().args([
            "run",
            "--domain",
            "synthetic",
            "--method",
            "mtme",
            "--tasks",
            "40",
            "--evals",
            "4000",
            "--seed",
            "5",
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]));
    }
    for name in ["tasks.csv", "log.csv", "archive.csv"] {
        assert_eq!(
            fs::read(seq.join(name)).unwrap(),
            fs::read(par.join(name)).unwrap(),
            "{name} differs with 8 workers"
        );
    }
}

#[test]
fn experiment_stats_and_exports_run_end_to_end() {
    let dir = tmp("experiment");
    let spec_path = dir.join("spec.txt");
    let out_dir = dir.join("out");
    fs::write(
        &spec_path,
        format!(
            "domain = synthetic\nmethods = mtme, random_sampling\nreplicates = 2\n\
             tasks = 30\ngenome_dim = 8\ntask_dim = 3\nevals = 3000\nseed_base = 11\n\
             out = {}\n",
            out_dir.display()
        ),
    )
    .unwrap();
    run_ok(bin().args(["experiment", spec_path.to_str().unwrap()]));

    // 2 methods x 2 replicates -> 4 run dirs plus shared files
    for name in ["mtme_r0", "mtme_r1", "random_sampling_r0", "random_sampling_r1"] {
        assert!(out_dir.join(name).join("log.csv").exists(), "{name}");
        assert!(out_dir.join(name).join("archive.csv").exists(), "{name}");
    }
    assert!(out_dir.join("tasks.csv").exists());
    assert!(out_dir.join("utests.csv").exists());
    let aggregate = fs::read(out_dir.join("aggregate.csv")).unwrap();
    let rows = mtme_cli::csv_io::read_aggregate(&out_dir.join("aggregate.csv")).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r: &AggregateRow| r.status == "ok"));

    // rerunning the same spec reproduces the aggregate byte for byte
    let out_dir2 = dir.join("out2");
    run_ok(bin().args([
        "experiment",
        spec_path.to_str().unwrap(),
        "--out",
        out_dir2.to_str().unwrap(),
    ]));
    assert_eq!(aggregate, fs::read(out_dir2.join("aggregate.csv")).unwrap());

    run_ok(bin().args(["stats", out_dir.to_str().unwrap()]));

    let run_dir = out_dir.join("mtme_r0");
    run_ok(bin().args(["export", "heatmap", run_dir.to_str().unwrap()]));
    assert!(run_dir.join("heatmap.csv").exists());
    // 3-D task space: CSV only
    assert!(!run_dir.join("heatmap.svg").exists());
    run_ok(bin().args(["export", "genome", run_dir.to_str().unwrap()]));
    assert!(run_dir.join("genomes.csv").exists());
    run_ok(bin().args([
        "export",
        "cross-eval",
        run_dir.to_str().unwrap(),
        "--domain",
        "synthetic",
        "--top-fraction",
        "0.1",
    ]));
    assert!(run_dir.join("cross_eval.csv").exists());
}

#[test]
fn bad_spec_fails_with_message() {
    let dir = tmp("badspec");
    let spec_path = dir.join("spec.txt");
    fs::write(&spec_path, "domain = arm\nmethods = simulated_annealing\n").unwrap();
    let out = bin()
        .args(["experiment", spec_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown method"));
}
