use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect()
}

fn persuade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_persuade")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn example3_is_violated_with_prior_mass_in_the_two_small_menus() {
    let out = persuade(&["check", path(&data("example3.json")), "--json"]);
    assert_eq!(out.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["outcome"], "violated");
    let menus = report["witness"]["menus"].as_array().unwrap();
    // Menus A2 = {a, b} and A3 = {b, c} are observations 1 and 2; both move mass to p = 1/2.
    for obs in [1, 2] {
        let menu = menus.iter().find(|m| m["observation"] == obs).expect("menu carries weight");
        let at_prior = menu["added"]
            .as_array()
            .unwrap()
            .iter()
            .any(|a| a["action"] == "b" && a["posterior"]["w1"] == "1/2" && a["posterior"]["w2"] == "1/2");
        assert!(at_prior, "observation {obs} puts mass on the prior");
    }
}

#[test]
fn example4_fails_only_under_transparent_motives() {
    assert_eq!(persuade(&["check", path(&data("example4.json"))]).status.code(), Some(0));
    assert_eq!(persuade(&["check", "--transparent-motives", path(&data("example4.json"))]).status.code(), Some(3));
}

#[test]
fn cover_of_example1() {
    let out = persuade(&["cover", path(&data("example1.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for line in ["a: w2 in [0, 1/5]", "b: w2 in [1/5, 3/5]", "c: w2 in [3/5, 4/5]", "d: w2 in [4/5, 1]"] {
        assert!(text.contains(line), "missing `{line}` in\n{text}");
    }
    let json = persuade(&["cover", "--json", path(&data("example1.json"))]);
    let listing: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(listing[0]["regions"]["b"], serde_json::json!([["2/5", "3/5"], ["4/5", "1/5"]]));
}

#[test]
fn certificates_replay_on_their_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &[&str]); 5] = [
        ("example1.json", &[]),
        ("example1_consistent.json", &[]),
        ("example3.json", &[]),
        ("example4.json", &["--transparent-motives"]),
        ("mean_interior_split.json", &["--posterior-mean"]),
    ];
    for (name, flags) in cases {
        let cert = dir.path().join(format!("{name}.cert"));
        let file = data(name);
        let mut args = vec!["check", path(&file), "--certificate", cert.to_str().unwrap()];
        args.extend_from_slice(flags);
        let checked = persuade(&args);
        assert!(matches!(checked.status.code(), Some(0 | 3)), "{name}");
        let replayed = persuade(&["replay", cert.to_str().unwrap(), "--dataset", path(&file)]);
        assert_eq!(replayed.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&replayed.stderr));
    }
}

#[test]
fn tampered_certificate_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    persuade(&["check", path(&data("example3.json")), "--certificate", cert.to_str().unwrap()]);
    let text = std::fs::read_to_string(&cert).unwrap().replacen("\"3/16\"", "\"1/4\"", 1);
    std::fs::write(&cert, text).unwrap();
    let out = persuade(&["replay", cert.to_str().unwrap(), "--dataset", path(&data("example3.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generated_data_round_trip_through_check() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &[&str], &[&str]); 4] = [
        ("example1_problem.json", &[], &[]),
        ("example6_problem.json", &[], &["--varying-priors"]),
        ("figure4a.json", &["--posterior-mean"], &["--posterior-mean"]),
        ("figure4b.json", &["--posterior-mean"], &["--posterior-mean"]),
    ];
    for (name, gen_flags, check_flags) in cases {
        let out_file = dir.path().join(name);
        let input = data(name);
        let mut args = vec!["gen", path(&input), "--output", out_file.to_str().unwrap()];
        args.extend_from_slice(gen_flags);
        assert_eq!(persuade(&args).status.code(), Some(0), "{name}");
        let mut check = vec!["check", out_file.to_str().unwrap()];
        check.extend_from_slice(check_flags);
        assert_eq!(persuade(&check).status.code(), Some(0), "{name}");
    }
    // Two priors in one file need the varying-priors test.
    let six = dir.path().join("example6_problem.json");
    assert_eq!(persuade(&["check", six.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn solve_reports_the_example1_optimum() {
    let out = persuade(&["solve", path(&data("example1_problem.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("value 4/5"), "{text}");
    assert!(text.contains("b at posterior (4/5, 1/5) with mass 1/2"), "{text}");
    let mean = stdout(&persuade(&["solve", "--posterior-mean", path(&data("figure4b.json"))]));
    assert!(mean.contains("value 1/2"), "{mean}");
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"states\": [\"w1\"]").unwrap();
    assert_eq!(persuade(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(persuade(&["check", "/nonexistent/file.json"]).status.code(), Some(2));
    // Probabilities that do not sum to one fail validation.
    let text = std::fs::read_to_string(data("example1.json")).unwrap().replacen("\"9/10\"", "\"1/10\"", 2);
    std::fs::write(&bad, text).unwrap();
    assert_eq!(persuade(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn exclusions_are_read_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("points.json");
    std::fs::write(&points, r#"{"exclusions": [{"observation": 0, "action": "b", "posterior": {"w1": "1/2", "w2": "1/2"}}]}"#).unwrap();
    let out = persuade(&["check", path(&data("example1_consistent.json")), "--exclude", points.to_str().unwrap()]);
    assert!(matches!(out.status.code(), Some(0 | 3)));
    assert!(stdout(&out).contains("NBPS_EXT"));
}
