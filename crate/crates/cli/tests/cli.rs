use std::fs;
use std::path::Path;
use std::process::Command;

use summability_cli::catalog::{example, list_builtins, EXAMPLES};
use summability_cli::config::{compile, parse};
use summability_cli::runner::{run_config, RunOptions};

fn summa(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_summa")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn catalog_contents() {
    let cat = list_builtins();
    let methods: Vec<_> = cat.methods.iter().map(|m| m.name).collect();
    for m in ["identity", "series_summation", "cesaro", "abel", "logarithmic"] {
        assert!(methods.contains(&m), "{m}");
    }
    let spaces: Vec<_> = cat.spaces.iter().map(|m| m.name).collect();
    assert_eq!(spaces, ["h2", "wiener", "disk_grid"]);
    assert!(cat.configs.len() >= 6);
    for ex in EXAMPLES {
        compile(&parse(ex.json).unwrap(), None).unwrap_or_else(|e| panic!("{}: {e}", ex.name));
    }
}

#[test]
fn cesaro_regularity_config() {
    let dir = tempfile::tempdir().unwrap();
    let ex = example("cesaro-regularity").unwrap();
    let opts = RunOptions {
        out: dir.path().to_path_buf(),
        plots: true,
        ..RunOptions::default()
    };
    let m = run_config(ex.name, ex.json, &opts).unwrap();
    assert_eq!(m.exit_code(), 0);
    let csv = fs::read_to_string(dir.path().join("cesaro.csv")).unwrap();
    assert!(csv.starts_with("experiment_id,module,grid_param,quantity,value_re,value_im,verdict\n"));
    for block in ["c1:verdict", "c2[n=0]:verdict", "c3:verdict"] {
        assert!(csv.contains(&format!(",{block},,,pass")), "{block}");
    }
    assert!(csv.contains(",overall,,,regular_evidence"));
    assert!(dir.path().join("cesaro.svg").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn cesaro_vs_abel_config() {
    let dir = tempfile::tempdir().unwrap();
    let ex = example("cesaro-vs-abel").unwrap();
    let opts = RunOptions {
        out: dir.path().to_path_buf(),
        ..RunOptions::default()
    };
    run_config(ex.name, ex.json, &opts).unwrap();
    let csv = fs::read_to_string(dir.path().join("cesaro-in-abel.csv")).unwrap();
    let row = csv.lines().find(|l| l.contains("partial_sums(grandi):consistency")).unwrap();
    assert!(row.ends_with(",transfers"), "{row}");
    let csv = fs::read_to_string(dir.path().join("abel-in-cesaro.csv")).unwrap();
    assert!(csv.lines().any(|l| l.contains(":consistency") && l.ends_with(",violates")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let empty = write(dir.path(), "empty.json", r#"{ "experiments": [] }"#);
    assert_eq!(summa(&["run", &empty, "--out", out]).0, 2);

    let unknown = write(dir.path(), "unknown.json", r#"{ "experiments": [], "extra": 1 }"#);
    assert_eq!(summa(&["run", &unknown, "--out", out]).0, 2);

    let bad_key = write(
        dir.path(),
        "bad_key.json",
        r#"{ "experiments": [ { "kind": "check_regularity", "id": "x", "method": "cesaro", "colour": 1 } ] }"#,
    );
    assert_eq!(summa(&["run", &bad_key, "--out", out]).0, 2);

    let bad_expr = write(
        dir.path(),
        "bad_expr.json",
        r#"{ "experiments": [ { "kind": "sum", "id": "x", "method": "cesaro", "depth": 4,
             "sources": [ { "sequence": { "terms": ["(-1)^q"] } } ] } ] }"#,
    );
    let (code, _, err) = summa(&["run", &bad_expr, "--out", out]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown variable `q`"), "{err}");

    assert_eq!(summa(&["run", "no-such-config", "--out", out]).0, 2);

    let runtime = write(
        dir.path(),
        "runtime.json",
        r#"{ "experiments": [ { "kind": "taylor", "id": "slow", "function": { "power": { "c": 1, "alpha": 0.8 } },
             "space": "wiener", "chains": [["abel_dilate"]], "depth": 4 } ] }"#,
    );
    let (code, stdout, _) = summa(&["run", &runtime, "--out", out]);
    assert_eq!(code, 3, "{stdout}");
    assert!(stdout.contains("failed"));

    let ok = write(
        dir.path(),
        "ok.json",
        r#"{ "experiments": [ { "kind": "sum", "id": "grandi", "method": "cesaro", "depth": 10,
             "sources": [ { "sequence": { "terms": ["(-1)^n"], "partial_sums": true } } ] } ] }"#,
    );
    let (code, stdout, _) = summa(&["run", &ok, "--out", out, "--threads", "1", "--tol", "1e-2", "--plots"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("1/1 converged"), "{stdout}");
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(Path::new(out).join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["threads"], 1);
    assert_eq!(manifest["tol_override"], 1e-2);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn list_command() {
    let (code, stdout, _) = summa(&["list"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("cesaro-regularity") && stdout.contains("disk_grid"));
    let (code, stdout, _) = summa(&["list", "--show", "cesaro-vs-abel"]);
    assert_eq!(code, 0);
    assert!(parse(&stdout).is_ok());
}

#[test]
fn custom_methods_from_expressions() {
    // Cesàro written out by hand agrees with the builtin.
    let text = r#"{ "experiments": [
        { "kind": "inclusion", "id": "hand-cesaro", "depth": 10, "tol": 5e-2,
          "a": { "matrix": { "row": "1/(m+1)", "support": "lower_triangular" } },
          "b": "cesaro",
          "sources": [ { "sequence": { "terms": ["(-1)^n", "0.5^n"], "partial_sums": true } } ] },
        { "kind": "check_regularity", "id": "hand-log", "r_depth": 16, "exhaust_depth": 6,
          "method": { "kernel": { "kernel": "-1/ln(1-r) / (1-t)", "e": "unit_interval", "f": "unit_interval",
                                  "measure": "lebesgue", "support": ["0", "r"], "substitution": "log_boundary" } } },
        { "kind": "taylor", "id": "poly", "function": { "polynomial": [1, [0, 2], -0.5] }, "space": { "disk_grid": 64 },
          "chains": [["abel_dilate"]], "depth": 24, "tol": 1e-3 }
    ] }"#;
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        out: dir.path().to_path_buf(),
        ..RunOptions::default()
    };
    let m = run_config("inline", text, &opts).unwrap();
    assert_eq!(m.exit_code(), 0, "{:?}", m.experiments);
    assert!(m.experiments[0].summary.as_deref().unwrap().starts_with("transfers 1"), "{:?}", m.experiments[0]);
    assert_eq!(m.experiments[1].summary.as_deref(), Some("regular_evidence"));
    assert!(m.experiments[2].summary.as_deref().unwrap().contains("converged to 0"), "{:?}", m.experiments[2]);
}
