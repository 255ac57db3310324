use std::path::PathBuf;

use persuasion::dataset::dataset_from_json;
use persuasion::examples;
use persuasion::forward::problems_from_json;
use persuasion::mean::{mean_dataset_from_json, mean_problems_from_json};

fn read(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn bundled_datasets_match_the_built_in_examples() {
    let cases = [
        ("example1.json", examples::example1()),
        ("example1_consistent.json", examples::example1_consistent()),
        ("example3.json", examples::example3()),
        ("example4.json", examples::example4()),
        ("example5.json", examples::example5()),
        ("example6.json", examples::example6_data()),
    ];
    for (name, expected) in cases {
        assert_eq!(dataset_from_json(&read(name)).unwrap(), expected, "{name}");
    }
    assert_eq!(mean_dataset_from_json(&read("mean_interior_split.json")).unwrap(), examples::mean_interior_split());
}

#[test]
fn bundled_problems_match_the_built_in_examples() {
    let one = problems_from_json(&read("example1_problem.json")).unwrap();
    assert_eq!(one.world, examples::example1_world());
    assert_eq!(one.sender_utility, examples::example1_sender());

    let six = problems_from_json(&read("example6_problem.json")).unwrap();
    assert_eq!(six.world, examples::example3_world());
    assert_eq!(six.sender_utility, examples::example6_sender());
    assert_eq!(six.problems[1].1, examples::binary_belief(persuasion::numeric::q(1, 5)));

    assert_eq!(mean_problems_from_json(&read("figure4a.json")).unwrap().problem(0), examples::figure4a());
    assert_eq!(mean_problems_from_json(&read("figure4b.json")).unwrap().problem(0), examples::figure4b());
}
