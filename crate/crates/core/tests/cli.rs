use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn rts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rts"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rts_ok(args: &[&str]) -> Output {
    let out = rts(args);
    assert!(
        out.status.success(),
        "rts {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .next()
        .unwrap_or("")
        .to_string()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn run_writes_every_artifact() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("run");
    rts_ok(&[
        "--out",
        out.to_str().unwrap(),
        "run",
        "--set",
        "max_ticks=10",
        "--snapshot-ticks",
        "0,10",
    ]);
    assert_eq!(
        header(&out.join("ticks.csv")),
        "tick,expert_alive,follower_alive,maverick_alive,conservative_alive,progress,coverage"
    );
    assert_eq!(
        header(&out.join("agents.csv")),
        "id,kind,ica,final_wealth,departure_cause,departure_tick"
    );
    assert_eq!(
        header(&out.join("summary.csv")),
        "kind,count,mean_ica,gini,survivors_final"
    );
    // census row plus one row per tick
    let ticks = fs::read_to_string(out.join("ticks.csv")).unwrap();
    assert_eq!(ticks.lines().count(), 1 + 11);
    for tick in [0, 10] {
        let pgm = fs::read(out.join(format!("landscape_t{tick}.pgm"))).unwrap();
        assert!(pgm.starts_with(b"P5\n50 50\n255\n"));
        assert_eq!(pgm.len(), b"P5\n50 50\n255\n".len() + 2500);
    }
    let resolved: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("resolved-config.json")).unwrap()).unwrap();
    assert_eq!(resolved["schema"], 1);
    assert_eq!(resolved["max_ticks"], 10);
    let run: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("run.json")).unwrap()).unwrap();
    assert!(run["summary"]["progress"].as_f64().unwrap() > 0.0);
}

#[test]
fn resolved_config_round_trips() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    rts_ok(&[
        "--out",
        a.to_str().unwrap(),
        "--seed",
        "5",
        "run",
        "--set",
        "max_ticks=15",
    ]);
    let cfg = a.join("resolved-config.json");
    rts_ok(&[
        "--out",
        b.to_str().unwrap(),
        "run",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(read_dir_sorted(&a), read_dir_sorted(&b));
}

#[test]
fn sweep_output_does_not_depend_on_jobs() {
    let tmp = TempDir::new().unwrap();
    let spec = tmp.path().join("sweep.json");
    fs::write(
        &spec,
        r#"{
            "schema": 1,
            "name": "tiny",
            "base": { "max_ticks": 15 },
            "sweep_axes": [ { "path": "vision", "values": [1, 2] } ],
            "replications": 3,
            "base_seed": 11
        }"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for jobs in ["1", "3"] {
        let out = tmp.path().join(format!("jobs{jobs}"));
        rts_ok(&[
            "--out",
            out.to_str().unwrap(),
            "--jobs",
            jobs,
            "sweep",
            "--config",
            spec.to_str().unwrap(),
            "--per-run-json",
        ]);
        assert_eq!(fs::read_dir(out.join("runs")).unwrap().count(), 6);
        outputs.push(read_dir_sorted(&out));
    }
    assert_eq!(outputs[0], outputs[1]);
    let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
    for expected in [
        "aggregates.csv",
        "histograms.csv",
        "resolved-config.json",
        "rows.csv",
        "survival.csv",
        "sweep.json",
    ] {
        assert!(names.contains(&expected), "missing {expected} in {names:?}");
    }
}

#[test]
fn scenario_list_and_run() {
    let listed = rts_ok(&["scenario", "list"]);
    let text = String::from_utf8(listed.stdout).unwrap();
    for name in [
        "single-coverage",
        "single-ica",
        "mixed-vision",
        "mixed-metabolism",
        "mixed-kdr",
    ] {
        assert!(text.contains(name), "{name} not listed");
    }

    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("kdr");
    rts_ok(&[
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
        "scenario",
        "mixed-kdr",
        "--replications",
        "2",
        "--set",
        "base.max_ticks=10",
    ]);
    assert_eq!(
        header(&out.join("aggregates.csv")),
        "axis_name,axis_value,kind,mean_ica,sd_ica,gini_mean,coverage_mean,progress_mean,survivors_final_mean"
    );
    // 2 KDR values x 2 replications x 4 kinds
    let rows = fs::read_to_string(out.join("rows.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 16);
    assert!(!out.join("sweep.json").exists());
}

#[test]
fn render_writes_requested_ticks() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("img");
    rts_ok(&[
        "--out",
        out.to_str().unwrap(),
        "render",
        "--set",
        "max_ticks=20",
        "--ticks",
        "0,20",
    ]);
    let t0 = fs::read(out.join("landscape_t0.pgm")).unwrap();
    let t20 = fs::read(out.join("landscape_t20.pgm")).unwrap();
    assert_eq!(t0.len(), t20.len());
    assert_ne!(t0, t20, "extraction should darken the image");
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("x");
    let out = out.to_str().unwrap();

    let bad_value = rts(&["--out", out, "run", "--set", "kdr=1.5"]);
    assert_eq!(bad_value.status.code(), Some(2));

    let unknown_key = rts(&["--out", out, "run", "--set", "no_such_key=1"]);
    assert_eq!(unknown_key.status.code(), Some(2));

    let unknown_scenario = rts(&["--out", out, "scenario", "nope"]);
    assert_eq!(unknown_scenario.status.code(), Some(2));

    let bad_schema = tmp.path().join("bad.json");
    fs::write(&bad_schema, r#"{"schema": 99}"#).unwrap();
    let wrong_schema = rts(&[
        "--out",
        out,
        "run",
        "--config",
        bad_schema.to_str().unwrap(),
    ]);
    assert_eq!(wrong_schema.status.code(), Some(2));

    let missing = tmp.path().join("missing.json");
    let missing_file = rts(&["--out", out, "run", "--config", missing.to_str().unwrap()]);
    assert_eq!(missing_file.status.code(), Some(3));

    // output path blocked by a regular file
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, b"").unwrap();
    let blocked = blocker.join("sub");
    let unwritable = rts(&[
        "--out",
        blocked.to_str().unwrap(),
        "run",
        "--set",
        "max_ticks=1",
    ]);
    assert_eq!(unwritable.status.code(), Some(3));
}
