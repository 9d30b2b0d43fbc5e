use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn equiboot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equiboot"))
        .args(args)
        .env("EQUIBOOT_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"
master_seed = 5
replications = 2
scenarios = ["discrete-a3", "zero-correlated-a10"]

[sim]
n = 4000
p = 5

[bootstrap]
m_per_cell = 60

[metrics]
mclor_nu = 500
"#;

#[test]
fn simulate_writes_one_row_per_scenario_and_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let first = equiboot(&["simulate", "--config", &cfg, "--out", out_s]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let csv = fs::read_to_string(out.join("table4.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "scenario,orig_eor,orig_lor,orig_mclor,equity_eor,equity_lor,equity_mclor,intadj");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("discrete-a3,"));
    assert_eq!(lines[1].split(',').nth(4), Some("0.0"));
    assert!(fs::read_to_string(out.join("table4.txt")).unwrap().contains("all entries"));

    let second = equiboot(&["simulate", "--config", &cfg, "--out", out_s]);
    assert!(second.status.success());
    assert_eq!(fs::read_to_string(out.join("table4.csv")).unwrap(), csv);

    let reseeded = equiboot(&["simulate", "--config", &cfg, "--out", out_s, "--seed", "6"]);
    assert!(reseeded.status.success());
    assert_ne!(fs::read_to_string(out.join("table4.csv")).unwrap(), csv);
}

#[test]
fn gen_then_pipeline_produces_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[sim]\nn = 6000\np = 6\n");
    let data = dir.path().join("data.csv");
    let gen = equiboot(&["gen", "--config", &cfg, "--scenario", "discrete-a3", "--out", data.to_str().unwrap()]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    let header = fs::read_to_string(&data).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "group,z1,z2,z3,z4,z5,z6,y");

    let out = dir.path().join("report");
    let run = equiboot(&["pipeline", "--data", data.to_str().unwrap(), "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    for regime in ["blind", "equity"] {
        let metrics = fs::read_to_string(out.join(format!("metrics_{regime}.csv"))).unwrap();
        // header + (3 groups + range) per model, two models
        assert_eq!(metrics.lines().count(), 1 + 2 * 4);
        let hist = fs::read_to_string(out.join(format!("histograms_{regime}.csv"))).unwrap();
        // two models x 3 groups x 2 labels x 20 bins
        assert_eq!(hist.lines().count(), 1 + 2 * 3 * 2 * 20);
        let model = fs::read_to_string(out.join(format!("models_{regime}.txt"))).unwrap();
        assert!(model.starts_with("intercept\t") && model.contains("threshold\t"));
        let lor = fs::read_to_string(out.join(format!("odds_lor_{regime}.csv"))).unwrap();
        assert_eq!(lor.lines().count(), 1 + 3 + 1);
    }
    let eor = fs::read_to_string(out.join("odds_eor_equity.csv")).unwrap();
    assert!(eor.trim_end().ends_with("mad_from_one,0.0"));
    assert!(fs::read_to_string(out.join("summary.txt")).unwrap().contains("range"));
}

#[test]
fn continuous_features_skip_naive_bayes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[sim]\nn = 5000\np = 3\n");
    let data = dir.path().join("data.csv");
    let d = data.to_str().unwrap();
    assert!(equiboot(&["gen", "--config", &cfg, "--scenario", "zero-uncorrelated-a3", "--out", d]).status.success());
    let out = dir.path().join("r");
    let run = equiboot(&["pipeline", "--data", d, "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(run.status.success());
    assert!(String::from_utf8_lossy(&run.stdout).contains("naive Bayes skipped"));
    let hist = fs::read_to_string(out.join("histograms_equity.csv")).unwrap();
    assert_eq!(hist.lines().count(), 1 + 3 * 2 * 20);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "replications = 0\n");
    assert_eq!(equiboot(&["simulate", "--config", &bad]).status.code(), Some(1));
    assert_eq!(equiboot(&["simulate", "--scenario", "nope"]).status.code(), Some(1));
    assert_eq!(equiboot(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(equiboot(&["--help"]).status.code(), Some(0));

    let good = write_config(dir.path(), "");
    let missing = dir.path().join("missing.csv");
    assert_eq!(
        equiboot(&["pipeline", "--data", missing.to_str().unwrap(), "--config", &good]).status.code(),
        Some(2)
    );
    let one_class = dir.path().join("one.csv");
    fs::write(&one_class, "group,z1,y\na,1,0\nb,0,0\na,0,0\nb,1,0\n").unwrap();
    let out = equiboot(&["pipeline", "--data", one_class.to_str().unwrap(), "--config", &good]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["table4.toml", "pipeline.toml"] {
        let cfg = equiboot_cli::ExperimentConfig::from_file(&root.join(name)).unwrap();
        assert_eq!(cfg.master_seed, 2021, "{name}");
    }
}
