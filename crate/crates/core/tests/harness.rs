use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use raptor::harness::{
    preliminary_stage, run_experiment, write_outputs, Algorithm, ScenarioConfig,
};
use raptor::samplers::{
    AmPolicy, HalfSpace, ProposalKernel, ProposalPolicy, RaptPolicy, RunningMoments, COV_RIDGE,
};
use raptor::{CovMatrix, Error, GaussMixSpec, TargetModel};

fn small(preset: &str) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::preset(preset).unwrap();
    cfg.replications = 2;
    cfg.iterations = 400;
    cfg.burn_in = 200;
    cfg.chains = 3;
    cfg.oracle_size = cfg.oracle_size.min(500);
    cfg.reference_size = cfg.reference_size.min(20_000);
    cfg.prelim_iterations = cfg.prelim_iterations.min(300);
    cfg.dn_checkpoints = vec![100, 300];
    cfg.raster_res = 40;
    cfg.traces = true;
    cfg
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_raptor"))
}

#[test]
fn reruns_are_byte_identical() {
    for preset in ["gaussmix-d3s1", "banana5", "loh"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        write_outputs(&run_experiment(small(preset)).unwrap(), a.path()).unwrap();
        write_outputs(&run_experiment(small(preset)).unwrap(), b.path()).unwrap();
        let (fa, fb) = (read_dir(a.path()), read_dir(b.path()));
        assert!(
            fa.contains_key("summary.csv") && fa.contains_key("mixture_final.txt"),
            "{preset}: {:?}",
            fa.keys()
        );
        assert!(fa.keys().any(|k| k.starts_with("trace_")));
        assert!(fa.keys().any(|k| k.starts_with("raster_region")));
        assert_eq!(fa, fb, "{preset} outputs differ between reruns");
    }
}

#[test]
fn seed_changes_results_but_not_hash() {
    let a = run_experiment(small("gaussmix-d0s4")).unwrap();
    let mut cfg = small("gaussmix-d0s4");
    cfg.seed += 1;
    let b = run_experiment(cfg).unwrap();
    assert_eq!(a.hash, b.hash);
    let mean = |r: &raptor::harness::ExperimentResult| {
        r.aggregate(Algorithm::Raptor).unwrap().means.clone()
    };
    assert_ne!(mean(&a), mean(&b));
}

#[test]
fn summary_has_one_row_per_replicate_plus_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small("gaussmix-d3s1");
    let reps = cfg.replications;
    let algs = cfg.algorithms.len();
    write_outputs(&run_experiment(cfg).unwrap(), dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(
        &header[..7],
        &[
            "scenario",
            "algorithm",
            "replicate",
            "seed",
            "config_hash",
            "n",
            "ar"
        ]
    );
    assert_eq!(header.last(), Some(&"dn_hat"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), algs * (reps + 1));
    for r in &rows {
        assert_eq!(r.len(), header.len());
        let ar: f64 = r[6].parse().unwrap();
        assert!((0.0..=1.0).contains(&ar));
    }
}

#[test]
fn preliminary_stage_edge_cases() {
    let target = TargetModel::GaussMix(GaussMixSpec::new(0.5, 1.0, 1.0, 2).unwrap());
    let starts = vec![vec![0.0, 0.0]];
    assert!(matches!(
        preliminary_stage(&target, &starts, 0, 2, 1),
        Err(Error::Config { .. })
    ));
    let p = preliminary_stage(&target, &starts, 2000, 1, 1).unwrap();
    assert_eq!(p.mixture.k(), 1);
    assert_eq!(p.samples.len(), 2000);
    // one component reproduces the sample moments up to the ridge and n/(n-1)
    let c = p.mixture.component(0);
    for i in 0..2 {
        assert!((c.mean[i] - p.mean[i]).abs() < 1e-9);
        let rel = (c.cov.entries()[(i, i)] - p.cov[(i, i)]).abs() / p.cov[(i, i)];
        assert!(rel < 2e-3, "variance {i}: {rel}");
    }
    assert!(p.acceptance_rate > 0.1 && p.acceptance_rate < 0.9);
}

#[test]
fn rapt_whole_moments_equal_am_moments() {
    let eye = CovMatrix::identity(2);
    let mut rapt = ProposalPolicy::Rapt(RaptPolicy {
        boundary: HalfSpace::new(vec![1.0, 0.0], 0.0),
        regional: [RunningMoments::new(2), RunningMoments::new(2)],
        whole: RunningMoments::new(2),
        initial_regional: [eye.clone(), eye.clone()],
        initial_whole: eye.clone(),
        alpha: 0.2,
        eps: raptor::samplers::eps_d(2),
    });
    let mut am = ProposalPolicy::Am(AmPolicy::new(RunningMoments::new(2), eye.clone()));
    let v = [1.5, -0.5];
    for i in 0..200 {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        let x = [s * v[0] + 0.001 * i as f64, s * v[1]];
        rapt.observe(&x);
        am.observe(&x);
    }
    let ProposalPolicy::Rapt(r) = &rapt else {
        unreachable!()
    };
    assert_eq!(r.regional[0].count(), 100);
    assert_eq!(r.regional[1].count(), 100);
    let (ProposalKernel::Regional { whole, .. }, ProposalKernel::Gaussian { cov }) =
        (rapt.kernel(), am.kernel())
    else {
        unreachable!()
    };
    assert_eq!(whole.entries(), cov.entries());
}

#[test]
fn constant_stream_leaves_only_the_ridge() {
    let mut am = ProposalPolicy::Am(AmPolicy::new(
        RunningMoments::new(3),
        CovMatrix::identity(3).scaled(7.0),
    ));
    for _ in 0..50 {
        am.observe(&[2.0, -1.0, 0.5]);
    }
    let ProposalKernel::Gaussian { cov } = am.kernel() else {
        unreachable!()
    };
    let eps: f64 = raptor::samplers::eps_d(3);
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { eps * COV_RIDGE } else { 0.0 };
            assert!((cov.entries()[(i, j)] - want).abs() < 1e-18);
        }
    }
}

#[test]
fn cli_runs_a_small_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "run",
            "gaussmix-d3s1",
            "--algorithm",
            "raptor,am",
            "--replications",
            "1",
            "--iters",
            "300",
        ])
        .args(["--burnin", "100", "--chains", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("raptor") && stdout.contains("am"));
    assert!(dir.path().join("summary.csv").exists());
    assert!(dir.path().join("raster_whole.txt").exists());
}

#[test]
fn cli_reports_bad_input() {
    let out = bin().args(["run", "no-such-preset"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = bin()
        .args(["run", "banana5", "--alpha", "1.5"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));

    let out = bin()
        .args(["run", "banana5", "--algorithm", "mala"])
        .output()
        .unwrap();
    assert!(!out.status.success());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "preset = loh\nchains = many\n").unwrap();
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("chains"), "{err}");
}

#[test]
fn cli_writes_the_bundled_loh_data() {
    let out = bin().arg("gen-loh").output().unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        raptor::targets::BUNDLED_LOH_CSV
    );
}

#[test]
fn config_files_round_trip_through_the_parser() {
    for name in raptor::harness::PRESETS {
        let cfg = ScenarioConfig::preset(name).unwrap();
        let back = ScenarioConfig::parse(&cfg.render()).unwrap();
        assert_eq!(back.render(), cfg.render());
        assert_eq!(back.hash(), cfg.hash());
    }
    let err = ScenarioConfig::parse("chains = 3\n").unwrap_err();
    assert!(matches!(err, Error::Config { line: Some(1), .. }));
}
