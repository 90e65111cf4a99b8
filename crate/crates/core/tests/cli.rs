use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/small_percolation.toml")
}

fn frontlab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frontlab"))
        .arg("--config")
        .arg(config())
        .arg("--out")
        .arg(out)
        .args(["--threads", "2"])
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn single_stage_subcommands_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(&frontlab(out, &["gen-env"]));
    ok(&frontlab(out, &["label", "--delta", "0.05"]));
    ok(&frontlab(
        out,
        &["metric", "--method", "dijkstra8", "--mu", "2"],
    ));
    ok(&frontlab(
        out,
        &["evolve", "--eps", "0.25", "--t-final", "0.1"],
    ));
    ok(&frontlab(
        out,
        &["stationary", "--eps", "0.5", "--px", "0", "--py", "1"],
    ));
    let text = ok(&frontlab(out, &["effective-h", "--samples", "2"]));
    assert!(text.contains("H(e1)"));
    for f in [
        "environment.fhl1",
        "environment.csv",
        "components.csv",
        "components_delta.csv",
        "theta.csv",
        "travel_time.fhl1",
        "u_eps.fhl1",
        "u_eps_contour.csv",
        "w_eps.fhl1",
        "stationary.csv",
        "mbar.csv",
        "hbar_profile.csv",
        "wulff.csv",
        "hbar_grid.csv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
}

#[test]
fn converge_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let text = ok(&frontlab(out, &["converge"]));
    assert!(text.contains("weak_star"));
    assert!(text.contains("stationary_bound"));
    let summary = ok(&frontlab(out, &["report"]));
    assert!(!summary.trim().is_empty());
}

#[test]
fn bundled_names_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_frontlab"))
        .args(["--config", "checkerboard_trapping", "--out"])
        .arg(dir.path())
        .arg("gen-env")
        .output()
        .unwrap();
    ok(&o);
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let missing = Command::new(env!("CARGO_BIN_EXE_frontlab"))
        .arg("--out")
        .arg(dir.path())
        .arg("gen-env")
        .output()
        .unwrap();
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("--config"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[experiment]\nname = \"x\"\nsurprise = 1\n[medium]\nkind = \"checkerboard\"\nperiod = 1.0\ngrid_size = 32\ncell_h = 0.125\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_frontlab"))
        .arg("--config")
        .arg(&bad)
        .arg("gen-env")
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("surprise"));

    let eps = frontlab(dir.path(), &["evolve", "--eps", "1.5"]);
    assert!(!eps.status.success());
}
