use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn openbook(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_openbook"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_symmetric_spider() {
    let out = openbook(&["classify", "--measure", path(&data("sticky_spider.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "sticky");
    for m in v["m"].as_array().unwrap() {
        assert!((m.as_f64().unwrap() + 1.0 / 3.0).abs() < 1e-12);
    }
    assert_eq!(v["population_mean"]["location"], "spine");
}

#[test]
fn classify_dominant_leaf() {
    let out = openbook(&[
        "classify",
        "--measure",
        path(&data("nonsticky_spider.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "nonsticky");
    assert_eq!(v["leaf"], 1);
}

#[test]
fn two_leaves_is_a_config_error() {
    let out = openbook(&["classify", "--measure", path(&data("two_leaves.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("K ≥ 3 required"));
}

#[test]
fn missing_file_is_a_config_error() {
    let out = openbook(&["classify", "--measure", "/nonexistent/measure.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn three_equidistant_legs_average_to_the_center() {
    let out = openbook(&["mean", "--points", path(&data("spider_legs.csv"))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["barycenter"]["location"], "spine");
    assert_eq!(v["objective"].as_f64().unwrap(), 3.0);
}

#[test]
fn single_point_is_its_own_mean() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("one.csv");
    fs::write(&file, "leaf,x0,y1\n2,0.5,-1.25\n").unwrap();
    let v = json(&openbook(&["mean", "--points", path(&file)]));
    assert_eq!(v["barycenter"]["location"], "leaf");
    assert_eq!(v["barycenter"]["leaf"], 2);
    assert_eq!(v["barycenter"]["x0"], 0.5);
    assert_eq!(v["barycenter"]["y"][0], -1.25);
    assert_eq!(v["objective"], 0.0);
}

#[test]
fn bad_row_reports_its_number() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.csv");
    fs::write(&file, "leaf,x0\n1,1\n2,-3\n").unwrap();
    let out = openbook(&["mean", "--points", path(&file)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));
}

#[test]
fn sampled_points_round_trip_through_mean() {
    let dir = tempfile::tempdir().unwrap();
    let measure = data("sticky_halfnormal.json");
    let out = openbook(&[
        "sample",
        "--measure",
        path(&measure),
        "--n",
        "40",
        "--seed",
        "9",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let points = dir.path().join("points.csv");
    let text = fs::read_to_string(&points).unwrap();
    assert_eq!(text.lines().count(), 41);

    let file = fs::File::open(&points).unwrap();
    let sample = openbook::io::read_points_csv(file, Some(3)).unwrap();
    let expected = openbook::frechet::barycenter(&sample).unwrap();
    let v = json(&openbook(&[
        "mean",
        "--points",
        path(&points),
        "--leaves",
        "3",
    ]));
    assert_eq!(v["barycenter"], serde_json::to_value(&expected).unwrap());
}

#[test]
fn lln_config_file_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = openbook(&[
        "lln",
        "--config",
        path(&data("sticky_lln.json")),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["pass"], true);
    let csv = fs::read_to_string(dir.path().join("replicates.csv")).unwrap();
    assert!(csv.starts_with("replicate,checkpoint,location_class,x0,y1\n"));
    // 50 replicates at 3 checkpoints
    assert_eq!(csv.lines().count(), 1 + 150);
}

#[test]
fn mode_mismatch_between_config_and_subcommand() {
    let out = openbook(&["clt", "--config", path(&data("sticky_lln.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sticky_spider_clt_is_deterministic() {
    let run = |dir: &Path| {
        let out = openbook(&[
            "clt",
            "--measure",
            path(&data("sticky_spider.json")),
            "--n",
            "100",
            "--replicates",
            "20",
            "--seed",
            "5",
            "--out",
            path(dir),
        ]);
        assert_eq!(out.status.code(), Some(0));
        (
            fs::read(dir.join("replicates.csv")).unwrap(),
            fs::read(dir.join("summary.json")).unwrap(),
        )
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(a.path()), run(b.path()));
}

#[test]
fn partly_sticky_summary_has_leaf_fraction_test() {
    let out = openbook(&[
        "clt",
        "--measure",
        path(&data("partly_sticky.json")),
        "--n",
        "200",
        "--replicates",
        "200",
        "--seed",
        "11",
    ]);
    assert!(matches!(out.status.code(), Some(0) | Some(1)));
    let v = json(&out);
    let tests = v["report"]["tests"].as_array().unwrap();
    assert!(tests.iter().any(|t| t["name"] == "leaf_fraction"));
    assert_eq!(v["report"]["verdict"]["verdict"], "partly_sticky");
}

#[test]
fn worker_count_does_not_change_output() {
    let run = |workers: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = openbook(&[
            "clt",
            "--measure",
            path(&data("sticky_halfnormal.json")),
            "--n",
            "500",
            "--replicates",
            "64",
            "--seed",
            "13",
            "--workers",
            workers,
            "--out",
            path(dir.path()),
        ]);
        assert!(out.status.code().is_some_and(|c| c <= 1));
        fs::read(dir.path().join("replicates.csv")).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn statistical_failure_exits_one() {
    // two draws are far too few for the mean to have settled on the spine
    let out = openbook(&[
        "lln",
        "--measure",
        path(&data("sticky_halfnormal.json")),
        "--checkpoints",
        "1,2",
        "--replicates",
        "40",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}
