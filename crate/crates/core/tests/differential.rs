//! Tag-based validation and the grid-only audit must agree on mutated boards.

mod common;

#[test]
fn validate_grid_agrees_with_audit() {
    let out = common::differential::run(2024, 1000);
    assert_eq!(out.cases, 1000);
    assert!(out.valid > 0 && out.valid < out.cases, "mutations should hit both outcomes");
    if let Some((c, g)) = out.disagreements.first() {
        panic!("{} disagreements, first on {c}\n{g}", out.disagreements.len());
    }
}
