use std::path::PathBuf;
use std::process::{Command, Output};

use asw::io::{load, CohomologyReport, CoverReport};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn asw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asw"))
        .args(args)
        .output()
        .expect("spawn asw")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn curve_arg(name: &str) -> String {
    data(name).to_str().unwrap().to_string()
}

#[test]
fn h1_genus_two_level_three() {
    let o = asw(&["h1", "--curve", &curve_arg("genus_two.json"), "--n", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: CoverReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.rank, 1);
    assert_eq!(report.level, 3);
    assert!(report.certified);
    assert!(report.tower.is_none());
}

#[test]
fn h1_fermat_level_two() {
    let o = asw(&["h1", "--curve", &curve_arg("fermat_quartic.json"), "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let report: CoverReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.rank, 3);
}

#[test]
fn nilpotent_hasse_witt_gives_rank_zero() {
    let o = asw(&["cover", "--curve", &curve_arg("supersingular.json"), "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let report: CoverReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.rank, 0);
    assert!(report.basis.is_empty());
    assert_eq!(report.tower.as_deref(), Some(&[][..]));
}

#[test]
fn cover_genus_two_contains_second_universal_part() {
    let o = asw(&["cover", "--curve", &curve_arg("genus_two.json"), "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let report: CoverReport = serde_json::from_str(&stdout(&o)).unwrap();
    let tower = report.tower.unwrap();
    assert_eq!(tower.len(), 2);
    assert_eq!(tower[1].universal_integer, "-t_0^7 + t_0^5");
    assert!(tower[1].equation.starts_with("t_1^3 - t_1 = 2*t_0^7 + t_0^5 + "));
}

#[test]
fn cover_fermat_has_three_branches_of_two() {
    let o = asw(&["cover", "--curve", &curve_arg("fermat_quartic.json"), "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let report: CoverReport = serde_json::from_str(&stdout(&o)).unwrap();
    let tower = report.tower.unwrap();
    for b in 0..3 {
        let idx: Vec<usize> = tower.iter().filter(|e| e.branch == b).map(|e| e.index).collect();
        assert_eq!(idx, vec![0, 1]);
    }
}

#[test]
fn text_format_shows_tower() {
    let o = asw(&["cover", "--curve", &curve_arg("genus_two.json"), "--n", "2", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("rank 1, level 2, degree 9\n"));
    assert!(text.contains("t_1^3 - t_1 = -t_0^7 + t_0^5 + "));
}

#[test]
fn wrong_hasse_witt_exits_two() {
    let o = asw(&["h1", "--curve", &curve_arg("genus_two.json"), "--hw", "1,1;0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn io_and_parse_errors_exit_one() {
    assert_eq!(asw(&["h1", "--curve", "/nonexistent/curve.json"]).status.code(), Some(1));
    assert_eq!(asw(&["h1", "--curve", &curve_arg("genus_two.json"), "--n", "0"]).status.code(), Some(1));
    assert_eq!(asw(&["h1", "--curve", &curve_arg("genus_two.json"), "--hw", "1,x;0"]).status.code(), Some(1));
    assert_eq!(asw(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(asw(&["h1"]).status.code(), Some(1));
}

#[test]
fn hasse_witt_from_file_matches_inline() {
    let dir = tempfile::tempdir().unwrap();
    let hw = dir.path().join("hw.json");
    std::fs::write(&hw, "[[\"1\",\"0\"],[\"0\",\"0\"]]").unwrap();
    let a = asw(&["h1", "--curve", &curve_arg("genus_two.json"), "--n", "2", "--hw", hw.to_str().unwrap()]);
    let b = asw(&["h1", "--curve", &curve_arg("genus_two.json"), "--n", "2", "--hw", "1,0;0,0"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("out{k}.json"));
        let o = asw(&[
            "cover",
            "--curve",
            &curve_arg("genus_two.json"),
            "--n",
            "3",
            "--seed",
            "17",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
        outs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn report_round_trips_into_a_certified_basis() {
    let o = asw(&["h1", "--curve", &curve_arg("genus_two.json"), "--n", "3"]);
    let text = stdout(&o);
    let report: CoverReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);

    let loaded = load(&std::fs::read_to_string(data("genus_two.json")).unwrap(), None, Some(report.seed)).unwrap();
    let (reps, h) = report.decode(&loaded.curve).unwrap();
    assert_eq!(reps.len(), 1);
    assert_eq!(reps[0].len(), 3);
    for (r, hs) in reps.iter().zip(&h) {
        assert!(asw::cover::wp_certificate(loaded.curve.points(), r, hs).unwrap());
    }
}

#[test]
fn sheaf_trivial_and_sign_actions() {
    let o = asw(&["sheaf", "--curve", &curve_arg("genus_two.json"), "--n", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let report: CohomologyReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.group.order, 3);
    assert_eq!(report.h0, vec!["3"]);
    assert_eq!(report.h1, vec!["3"]);

    let dir = tempfile::tempdir().unwrap();
    let inv = dir.path().join("inv.json");
    std::fs::write(&inv, r#"{"automorphisms":[{"x":"x","y":"-y"}]}"#).unwrap();
    let o = asw(&["sheaf", "--sheaf", inv.to_str().unwrap(), "--curve", &curve_arg("genus_two.json")]);
    assert_eq!(o.status.code(), Some(0));
    let report: CohomologyReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.group.order, 6);
    assert!(report.h1.is_empty());

    let zero = dir.path().join("zero.json");
    std::fs::write(&zero, r#"{"module":{"orders":[],"actions":[]}}"#).unwrap();
    let o = asw(&["sheaf", "--sheaf", zero.to_str().unwrap(), "--curve", &curve_arg("genus_two.json")]);
    assert_eq!(o.status.code(), Some(0));
    let report: CohomologyReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report.h0.is_empty() && report.h1.is_empty() && report.crossed.is_empty());
}

#[test]
fn bad_automorphism_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"automorphisms":[{"x":"x + 1","y":"y"}]}"#).unwrap();
    let o = asw(&["sheaf", "--sheaf", bad.to_str().unwrap(), "--curve", &curve_arg("genus_two.json")]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn selftest_passes() {
    let o = asw(&["selftest"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("ok")).count(), 3);
}
