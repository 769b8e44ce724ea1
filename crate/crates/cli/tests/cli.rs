use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const CONFIG: &str = r#"
algorithm = "poet"
seed = 5
output_dir = "out"
checkpoint_every = 3

[level]
kind = "file"
path = "seed.txt"

[poet]
total_loops = 6
evolve_every = 2
transfer_every = 3
optimize_steps_per_loop = 1

[poet.es]
pop_size = 8

[poet.evolution]
parents_per_step = 1
children_per_parent = 3
max_population = 3
validator = { kind = "mc_range", mc_min = 0.1, mc_max = 0.9 }
"#;

const SEED_LEVEL: &str = "########\n#......#\n#.S..G.#\n#......#\n#......#\n#......#\n#......#\n########\n";

fn coevo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coevo")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_kind(o: &Output) -> String {
    assert!(!o.status.success());
    let v: Value = serde_json::from_slice(o.stderr.trim_ascii()).expect("structured error on stderr");
    v["error"]["kind"].as_str().unwrap().to_string()
}

fn setup(dir: &Path, config: &str) -> String {
    fs::write(dir.join("seed.txt"), SEED_LEVEL).unwrap();
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    cfg.to_str().unwrap().to_string()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn render_round_trips_a_level() {
    let dir = tempfile::tempdir().unwrap();
    let level = dir.path().join("l.txt");
    fs::write(&level, SEED_LEVEL).unwrap();
    assert_eq!(stdout(&coevo(&["render", "--level", p(&level)])), SEED_LEVEL);
}

#[test]
fn run_replay_and_friends() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), CONFIG);
    let out = dir.path().join("out");
    let run: Value = serde_json::from_str(&stdout(&coevo(&["run", "--config", &cfg]))).unwrap();
    assert_eq!(run["loops"], 6);
    let log = out.join("run.jsonl");
    assert!(out.join("checkpoints/ckpt-000003.json").exists());

    // Counts recomputed straight from the log lines.
    let (mut proposed, mut accepted) = (0, 0);
    for line in fs::read_to_string(&log).unwrap().lines() {
        let r: Value = serde_json::from_str(line).unwrap();
        if r["kind"] == "evolve" {
            proposed += r["payload"]["proposed"].as_u64().unwrap();
            accepted += r["payload"]["accepted"].as_u64().unwrap();
        }
    }
    let text = stdout(&coevo(&["replay", "--log", p(&log)]));
    assert!(text.contains(&format!("accepted/proposed {accepted}/{proposed}")), "{text}");
    assert!(text.contains("loops/core-hour"), "{text}");
    let summary: Value = serde_json::from_str(&stdout(&coevo(&["replay", "--log", p(&log), "--json"]))).unwrap();
    assert_eq!(summary["proposed"], proposed);
    assert_eq!(summary["accepted"], accepted);

    let csv = dir.path().join("rows.csv");
    stdout(&coevo(&["replay", "--log", p(&log), "--csv", p(&csv)]));
    let csv = fs::read_to_string(&csv).unwrap();
    assert!(csv.starts_with("loop,"));
    assert_eq!(csv.lines().count(), 7);

    let compare = stdout(&coevo(&["compare", "--log", p(&log), "--log", p(&log)]));
    assert!(compare.contains("acceptance rate"), "{compare}");

    let archive = stdout(&coevo(&["render", "--archive", p(&out.join("final.json"))]));
    assert!(archive.starts_with("pair "), "{archive}");
    assert!(archive.contains("G"));

    let level = dir.path().join("seed.txt");
    let eval = stdout(&coevo(&[
        "evaluate", "--agent", p(&out.join("final.json")), "--level", p(&level), "--episodes", "3", "--seed", "9",
    ]));
    assert_eq!(eval.lines().count(), 3);
    for line in eval.lines() {
        let r: Value = serde_json::from_str(line).unwrap();
        assert!(r["return"].as_f64().unwrap() >= 0.0);
    }
    let again = stdout(&coevo(&[
        "evaluate", "--agent", p(&out.join("final.json")), "--level", p(&level), "--episodes", "3", "--seed", "9",
    ]));
    assert_eq!(eval, again);

    let full = fs::read(&log).unwrap();
    let ckpt = out.join("checkpoints/ckpt-000003.json");
    stdout(&coevo(&["run", "--config", &cfg, "--resume", p(&ckpt), "--workers", "4"]));
    assert_eq!(fs::read(&log).unwrap(), full);
}

#[test]
fn unreachable_goal_scores_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), &CONFIG.replace("total_loops = 6", "total_loops = 1"));
    stdout(&coevo(&["run", "--config", &cfg]));
    let walled = dir.path().join("walled.txt");
    fs::write(&walled, "#######\n#S.#..#\n#..#.G#\n#..#..#\n#######\n").unwrap();
    let final_path = dir.path().join("out/final.json");
    let r: Value = serde_json::from_str(&stdout(&coevo(&["evaluate", "--agent", p(&final_path), "--level", p(&walled)]))).unwrap();
    assert_eq!(r["return"], 0.0);
    assert_eq!(r["solved"], false);
}

#[test]
fn invalid_inputs_exit_nonzero_with_structured_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), &format!("{CONFIG}\nbogus = 1\n"));
    assert_eq!(error_kind(&coevo(&["run", "--config", &cfg])), "config");

    assert_eq!(error_kind(&coevo(&["replay", "--log", p(&dir.path().join("missing.jsonl"))])), "io");

    let log = dir.path().join("future.jsonl");
    fs::write(
        &log,
        r#"{"seq":0,"loop":0,"kind":"run_start","payload":{"schema_version":99,"config_digest":"x","algorithm":"poet","seed":1}}"#,
    )
    .unwrap();
    assert_eq!(error_kind(&coevo(&["replay", "--log", p(&log)])), "schema");

    let bad_level = dir.path().join("bad.txt");
    fs::write(&bad_level, "####\n#S?#\n####\n").unwrap();
    assert_eq!(error_kind(&coevo(&["render", "--level", p(&bad_level)])), "level");

    let not_ckpt = dir.path().join("seed.txt");
    assert_eq!(
        error_kind(&coevo(&["evaluate", "--agent", p(&not_ckpt), "--level", p(&not_ckpt)])),
        "integrity"
    );
}
