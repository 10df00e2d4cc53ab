use dmimo::experiments::{run_experiment, ExperimentConfig, ResultTable};

const LAMBDA: f64 = 0.15;

fn run(text: &str) -> ResultTable {
    run_experiment(&ExperimentConfig::from_toml_str(text).unwrap()).unwrap()
}

fn csv_bytes(t: &ResultTable) -> Vec<u8> {
    let mut out = Vec::new();
    t.write_csv(&mut out).unwrap();
    out
}

#[test]
fn rank_vs_r_within_bound_at_desk_scale() {
    let t = run("experiment = \"rank-vs-r\"\nseed = 3\nM = 800\nr_grid = [1, 3, 5, 7, 9, 11, 13, 15]\n");
    for row in &t.rows {
        let r = row[0].as_f64().unwrap();
        let rank = row[1].as_f64().unwrap();
        let cap = 1.1 * (4.0 * std::f64::consts::PI * r / LAMBDA).min(800.0);
        assert!(rank <= cap, "r = {r}: rank {rank} exceeds {cap:.1}");
    }
}

#[test]
fn segment_rank_tracks_two_length_over_lambda() {
    let t = run("experiment = \"segment-rank\"\nseed = 2\nM = 800\nlength_grid = [0.75, 1.5, 3.0, 4.5]\n");
    let ratio = t.column("rank_over_bound").unwrap();
    assert!(ratio.windows(2).all(|w| w[1] < w[0]), "{ratio:?}");
    assert!(*ratio.last().unwrap() <= 1.15, "{ratio:?}");
}

#[test]
fn mmse_mse_decreases_with_distance() {
    let t = run(
        "experiment = \"mse-vs-distance\"\nseed = 4\nM = 500\nr = 15\ntrials = 100\n\
         distance_grid = [0, 30, 60, 90, 120, 150, 180, 210, 240, 270, 300]\n",
    );
    let mmse: Vec<f64> = t
        .filter_text("method", "mmse")
        .iter()
        .map(|r| r[2].as_f64().unwrap())
        .collect();
    let violations = mmse.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(violations <= 1, "{mmse:?}");
    let ls: Vec<f64> = t
        .filter_text("method", "ls")
        .iter()
        .map(|r| r[2].as_f64().unwrap())
        .collect();
    assert!(mmse.iter().zip(&ls).all(|(m, l)| m < l));
}

#[test]
fn identical_bytes_for_same_seed_and_any_thread_count() {
    let text = "experiment = \"sumrate-vs-distance\"\nseed = 8\nM = 60\nr = 3\ntrials = 12\ndistance_grid = [10, 40]\n";
    let cfg = ExperimentConfig::from_toml_str(text).unwrap();
    let with_threads = |n: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| csv_bytes(&run_experiment(&cfg).unwrap()))
    };
    let one = with_threads(1);
    assert_eq!(one, with_threads(3));
    assert_eq!(one, with_threads(1));
}

#[test]
fn csv_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let t = run("experiment = \"sigma-sq\"\nseed = 1\nD_grid = [0, 10.5, 300]\n");
    t.save_csv(&path).unwrap();
    let back = ResultTable::load_csv(&path).unwrap();
    assert_eq!(back.columns, t.columns);
    assert_eq!(back.rows, t.rows);
    assert_eq!(back.metadata, t.metadata);
    assert_eq!(back.meta_value("seed"), Some("1"));
    assert_eq!(back.meta_value("r"), Some("15"));
}

#[test]
fn empty_table_writes_header_and_metadata() {
    let mut t = ResultTable::new(&["a", "b"]);
    t.meta("seed", 0);
    assert_eq!(String::from_utf8(csv_bytes(&t)).unwrap(), "# seed = 0\na,b\n");
}

#[test]
fn unwritable_path_reports_the_path() {
    let t = ResultTable::new(&["a"]);
    let err = t
        .save_csv(std::path::Path::new("/nonexistent-dir/out.csv"))
        .unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/out.csv"), "{err}");
}
