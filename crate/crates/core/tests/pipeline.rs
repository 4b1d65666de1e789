use std::fs;

use predictability::bounds::{auc_roc_upper, bounds_report, optimal_pr_curve, optimal_scores};
use predictability::dataset::{
    build_pattern_table, discretize, generate_synthetic, load_csv, Binning, ColumnSchema,
    FeatureLaw, Label, PatternTable,
};
use predictability::splits::{delta_lower_bound, expected_delta, split_random};
use predictability::Error;
use tempfile::TempDir;

const SMALL: &str = "\
income,region,owner,label
12.5,north,yes,approved
40.0,south,no,approved
40.0,south,no,denied
7.25,north,yes,denied
55.0,east,yes,approved
12.5,north,yes,approved
90.0,east,no,approved
3.0,south,no,denied
";

#[test]
fn csv_to_bounds() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("small.csv");
    fs::write(&path, SMALL).unwrap();

    let schema = [
        ColumnSchema::binned("income", Binning::Quantile(2)),
        ColumnSchema::categorical("region"),
        ColumnSchema::categorical("owner"),
    ];
    let ds = discretize(
        &load_csv(&path, "label", "approved", &schema).unwrap(),
        &schema,
    )
    .unwrap();
    assert_eq!(ds.len(), 8);
    assert_eq!(ds.n_plus(), 5);
    let table = ds.pattern_table().unwrap();
    assert_eq!(table.m(), 8);
    let report = bounds_report(&table).unwrap();
    assert!(report.ar_upper >= 0.5 && report.ar_upper <= 1.0);
    assert_eq!(report.ac_upper + report.min_hinge, 1.0);

    // a coarser projection can only lose
    let region = build_pattern_table(&ds, &["region"]).unwrap();
    assert!(auc_roc_upper(&region).unwrap() <= report.ar_upper);
}

#[test]
fn loader_errors_name_the_problem() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("small.csv");
    fs::write(&path, SMALL).unwrap();
    assert!(
        matches!(load_csv(&path, "target", "1", &[]), Err(Error::MissingColumn(c)) if c == "target")
    );
    assert!(matches!(
        load_csv(&path, "label", "maybe", &[]),
        Err(Error::UnknownLabel { .. })
    ));
    let holes = dir.path().join("holes.csv");
    fs::write(&holes, "a,label\n1,1\n,0\n2,\n").unwrap();
    assert!(
        matches!(load_csv(&holes, "label", "1", &[]), Err(Error::MissingValues { rows }) if rows == [2, 3])
    );
}

#[test]
fn pattern_table_files_round_trip() {
    let dir = TempDir::new().unwrap();
    let ds = generate_synthetic(FeatureLaw::Poisson { lambda: 2.0 }, 0.4, 500, 3).unwrap();
    let table = ds.pattern_table().unwrap();
    let csv = dir.path().join("t.csv");
    table.write_csv_path(&csv).unwrap();
    assert_eq!(PatternTable::read_csv_path(&csv).unwrap(), table);
    let json = table.to_json().unwrap();
    assert_eq!(PatternTable::from_json(&json).unwrap(), table);
    let report = bounds_report(&table).unwrap();
    let again = bounds_report(&PatternTable::from_json(&json).unwrap()).unwrap();
    assert_eq!(report, again);
}

#[test]
fn optimal_scores_and_pr_curve_agree() {
    let table = PatternTable::from_counts([("a", 9, 1), ("b", 3, 3), ("c", 1, 7), ("d", 0, 2)]);
    let scores = optimal_scores(&table).unwrap();
    let order: Vec<String> = scores.iter().map(|s| s.pattern.to_string()).collect();
    assert_eq!(order, ["a", "b", "c", "d"]);
    assert_eq!(scores[0].label(), Label::Positive);
    assert_eq!(scores[1].f_star, 0.0);
    assert_eq!(scores[3].label(), Label::Negative);
    let pr = optimal_pr_curve(&table).unwrap();
    assert_eq!(pr.points[0], (0.0, 0.9));
    assert_eq!(pr.points.len(), 27);
    assert_eq!(pr.area, bounds_report(&table).unwrap().ap_upper);
}

#[test]
fn random_split_of_synthetic_data() {
    let ds = generate_synthetic(
        FeatureLaw::PowerLaw {
            alpha: 1.8,
            support: 30,
        },
        0.5,
        2000,
        11,
    )
    .unwrap();
    let (train, test, split) = split_random(&ds, 0.7, 5).unwrap();
    assert_eq!(train.len() + test.len(), 2000);
    assert_eq!(split.parent(), ds.pattern_table().unwrap());
    let report = delta_lower_bound(&split);
    let expected = expected_delta(&ds.pattern_table().unwrap(), 0.7).unwrap();
    // labels are independent of the feature, so a realized split should sit near its mean
    assert!(
        (report.delta - expected).abs() < 0.05,
        "{} vs {expected}",
        report.delta
    );
}
