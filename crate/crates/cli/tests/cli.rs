use std::fs;
use std::path::Path;
use std::process::Command;

use biharmonic_nf::output::{format_float, Cell, Table};
use biharmonic_nf::{execute, list_scenarios, run, validate, CliError, Scenario, ScenarioConfig};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_biharmonic-nf"));
    c.env_remove("BIHARMONIC_NF_OUT");
    c
}

fn parse(text: &str) -> ScenarioConfig {
    ScenarioConfig::from_toml(text).unwrap()
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("config.toml");
    fs::write(&p, text).unwrap();
    p
}

/// Small, fast settings for each scenario.
fn quick(name: &str) -> ScenarioConfig {
    let extra = match name {
        "conservation" | "gauge-equivalence" | "evolve" => "t_final = 0.02\n[spectral]\ncutoff = 8\n",
        "nf-identity" | "nf-error-decay" => "t_final = 0.02\n[integrator]\ndt = 1e-3\nstore_every = 2\n[normal_form]\nbox_N = 3\n",
        "flux-identity" | "diff-energy" => "t_final = 0.02\n[spectral]\ncutoff = 6\n[integrator]\ndt = 1e-3\nstore_every = 2\n",
        "phase-audit" => "[phase]\nrange = 6\n",
        "tree-census" => "[census]\nmax_J = 3\n",
        "symbol-audit" => "[symbol]\naudit_M = [1, 4]\naudit_k0 = [4, 5]\naudit_points = 500\n",
        "strichartz-sweep" => "seed = 0\n[strichartz]\ncutoffs = [4, 8]\nsamples = 3\n",
        _ => "",
    };
    parse(&format!("scenario = {name:?}\n{extra}"))
}

#[test]
fn scenario_list() {
    let names = list_scenarios();
    assert!(names.len() >= 10);
    for required in [
        "conservation",
        "gauge-equivalence",
        "phase-audit",
        "tree-census",
        "nf-identity",
        "nf-error-decay",
        "flux-identity",
        "symbol-audit",
        "strichartz-sweep",
        "diff-energy",
    ] {
        assert!(names.contains(&required), "{required}");
    }
    assert_eq!(names, list_scenarios());
    assert_eq!(names[0], "conservation");
    for s in Scenario::ALL {
        assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
    }
}

#[test]
fn validation_rules() {
    for name in list_scenarios() {
        let d = validate(&ScenarioConfig::for_scenario(name));
        assert!(d.errors.is_empty(), "{name}: {:?}", d.errors);
        assert!(!d.over_budget());
    }
    let big = parse("scenario = \"nf-identity\"\n[normal_form]\nJ = 4\nbox_N = 32\n");
    let d = validate(&big);
    assert!(d.errors.is_empty());
    assert_eq!(d.cost_estimate, Some(65f64.powi(8) * 192.0));
    assert!(matches!(d.into_result(), Err(CliError::Budget { .. })));

    let theta = parse("scenario = \"nf-identity\"\n[normal_form]\ntheta = 0.9\n");
    let errs = validate(&theta).errors;
    assert_eq!(errs.len(), 1);
    assert!(errs[0].contains("theta"), "{errs:?}");
    let k = parse("scenario = \"nf-error-decay\"\n[normal_form]\nK = -1.0\n");
    assert!(validate(&k).errors[0].contains("K must be positive"));

    let unseeded = parse("scenario = \"conservation\"\n[initial]\ndata = \"gaussian(1.0)\"\n");
    assert!(validate(&unseeded).errors.iter().any(|e| e.contains("seed")));
    let odd = parse("scenario = \"flux-identity\"\nt_final = 0.03\n[integrator]\ndt = 1e-2\nstore_every = 1\n");
    assert!(validate(&odd).errors.iter().any(|e| e.contains("Simpson")));
    let unknown = parse("scenario = \"teleport\"");
    assert!(matches!(validate(&unknown).into_result(), Err(CliError::Config(_))));
    let focusing = parse("scenario = \"nf-identity\"\n[equation]\nsign = -1\n");
    assert!(!validate(&focusing).errors.is_empty());
    assert!(ScenarioConfig::from_toml("scenario = \"conservation\"\nbogus = 1").is_err());
}

#[test]
fn conservation_on_a_single_mode() {
    let cfg = parse("scenario = \"conservation\"\nt_final = 0.5\n[initial]\ndata = \"single_mode(2, 0.7)\"\n[spectral]\ncutoff = 4\n");
    let rep = run(&cfg).unwrap();
    assert_eq!(rep.table.rows.len(), 51);
    let drift = rep.summary["max_relative_drift"].as_f64().unwrap();
    assert!(drift < 1e-12, "{drift:e}");
}

#[test]
fn identity_table() {
    let cfg = parse(
        "scenario = \"nf-identity\"\nt_final = 0.1\n[integrator]\ndt = 1e-4\nstore_every = 10\n[normal_form]\nJ = 1\nbox_N = 4\n",
    );
    let rep = run(&cfg).unwrap();
    assert_eq!(rep.table.header, vec!["n", "lhs", "rhs", "residual"]);
    assert_eq!(rep.table.rows.len(), 9);
    assert_eq!(rep.table.rows[0][0], Cell::I(-4));
    assert!(rep.summary["max_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn outputs_match_schema_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in list_scenarios() {
        let cfg = quick(name);
        let a = execute(&cfg, Some(&dir.path().join("a"))).unwrap();
        let b = execute(&cfg, Some(&dir.path().join("b"))).unwrap();
        let (ca, cb) = (fs::read(&a.csv).unwrap(), fs::read(&b.csv).unwrap());
        assert_eq!(ca, cb, "{name}");
        let text = String::from_utf8(ca).unwrap();
        let sc: Scenario = name.parse().unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, sc.csv_header().join(","), "{name}");
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert!(text.lines().count() > 1, "{name} wrote no rows");
        for line in text.lines() {
            assert_eq!(line.split(',').count(), sc.csv_header().len(), "{name}: {line}");
        }
        let report: serde_json::Value = serde_json::from_slice(&fs::read(&a.json).unwrap()).unwrap();
        assert_eq!(report["scenario"], name);
        assert_eq!(report["config"], cfg.to_json());
        assert_eq!(report["partial"], false);
    }
    let evolve = execute(&quick("evolve"), Some(dir.path())).unwrap();
    let traj: serde_json::Value = serde_json::from_slice(&fs::read(&evolve.attachments[0]).unwrap()).unwrap();
    assert!(biharmonic_core::Trajectory64::from_json(&traj).is_ok());
    for entry in fs::read_dir(dir.path().join("a")).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        assert!(!name.contains(".tmp-"), "leftover {name}");
    }
}

#[test]
fn float_format() {
    assert_eq!(format_float(0.1), "1.0000000000000001e-1");
    assert_eq!(format_float(-2.5), "-2.5000000000000000e0");
    assert_eq!(format_float(f64::NAN), "nan");
    assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
    for x in [0.1, 1.0 / 3.0, -7.25e-300, 6.02e23] {
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }
    let mut t = Table::new(&["a", "b"]);
    t.push(vec![Cell::I(3), Cell::S("x,y".into())]);
    assert_eq!(t.render(), "a,b\n3,\"x,y\"\n");
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let listed = String::from_utf8(out.stdout).unwrap();
    assert_eq!(listed.lines().count(), list_scenarios().len());
    assert!(listed.contains("nf-identity"));

    let cfg = write_config(dir.path(), "scenario = \"tree-census\"\n[census]\nmax_J = 3\n");
    let out = bin().args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0));

    let target = dir.path().join("out");
    let out = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&target).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.join("tree-census.csv").exists());
    assert!(target.join("tree-census.json").exists());

    let env_dir = dir.path().join("from-env");
    let out = bin().args(["run", "--config"]).arg(&cfg).env("BIHARMONIC_NF_OUT", &env_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env_dir.join("tree-census.csv").exists());

    let bad = write_config(dir.path(), "scenario = \"teleport\"\n");
    assert_eq!(bin().args(["run", "--config"]).arg(&bad).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["validate", "--config"]).arg(&bad).output().unwrap().status.code(), Some(1));
    let missing = dir.path().join("nope.toml");
    assert_eq!(bin().args(["run", "--config"]).arg(&missing).output().unwrap().status.code(), Some(1));

    let costly = write_config(dir.path(), "scenario = \"nf-identity\"\n[normal_form]\nJ = 4\nbox_N = 32\n");
    let out = bin().args(["validate", "--config"]).arg(&costly).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stdout).unwrap().contains("cost estimate"));
    assert_eq!(bin().args(["run", "--config"]).arg(&costly).output().unwrap().status.code(), Some(3));

    let blowup = write_config(
        dir.path(),
        "scenario = \"conservation\"\n[initial]\ndata = \"single_mode(1, 1e200)\"\n[spectral]\ncutoff = 2\n",
    );
    let out = bin().args(["run", "--config"]).arg(&blowup).arg("--out").arg(&target).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    let hurried = write_config(
        dir.path(),
        "scenario = \"strichartz-sweep\"\nseed = 0\n[strichartz]\ncutoffs = [4, 8, 16]\nsamples = 2\n[output]\nmax_seconds = 1e-9\n",
    );
    let out = bin().args(["run", "--config"]).arg(&hurried).arg("--out").arg(&target).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(target.join("strichartz-sweep.json")).unwrap()).unwrap();
    assert_eq!(report["partial"], true);
}
