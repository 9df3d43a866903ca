use clap::Parser;
use covert::cli::{run, Cli};

fn run_args(args: &[&str]) -> (i32, String) {
    let cli = Cli::try_parse_from(std::iter::once("covert").chain(args.iter().copied())).unwrap();
    let mut sink = Vec::new();
    let code = run(&cli, &mut sink).unwrap();
    (code, String::from_utf8(sink).unwrap())
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(table: &[Vec<String>], name: &str) -> usize {
    table[0]
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn figure2_in_bits_is_nats_over_ln2() {
    let dir = std::env::temp_dir().join(format!("covert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("exp.cfg");
    std::fs::write(&cfg, "# two grid points\nn_grid = 1000, 100000000\n").unwrap();
    let c = cfg.to_str().unwrap();
    let (_, nats) = run_args(&["figure2", "--config", c]);
    let (_, bits) = run_args(&["figure2", "--config", c, "--unit", "bits"]);
    let (a, b) = (rows(&nats), rows(&bits));
    assert_eq!(a.len(), 1 + 2 * 3);
    let i = column(&a, "first_order");
    for (ra, rb) in a[1..].iter().zip(&b[1..]) {
        let (x, y): (f64, f64) = (ra[i].parse().unwrap(), rb[i].parse().unwrap());
        assert!((x / std::f64::consts::LN_2 - y).abs() < 1e-9 * y.abs());
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn plan_rows_report_statuses_for_every_grid_point() {
    let (code, text) = run_args(&["plan"]);
    assert_eq!(code, 0);
    let t = rows(&text);
    let s = column(&t, "status");
    assert!(t.len() > 2);
    assert!(t[1..].iter().all(|r| !r[s].is_empty()));
}

#[test]
fn verification_writes_csv_and_json() {
    let dir = std::env::temp_dir().join(format!("covert-verify-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("moments.csv");
    let (code, _) = run_args(&["verify", "moments", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("suite,"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap())
            .unwrap();
    assert!(json["checks"].as_array().unwrap().len() > 10);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn montecarlo_is_reproducible_from_the_seed() {
    let dir = std::env::temp_dir().join(format!("covert-mc-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("mc.cfg");
    std::fs::write(
        &cfg,
        "n_grid = 64, 256\ntrials = 500\nmessages = 4\nkeys = 2\nell = 4\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let (_, a) = run_args(&["montecarlo", "--config", c, "--seed", "7"]);
    let (_, b) = run_args(&["montecarlo", "--config", c, "--seed", "7"]);
    assert_eq!(a, b);
    assert_eq!(rows(&a).len(), 3);
    std::fs::remove_dir_all(&dir).unwrap();
}
