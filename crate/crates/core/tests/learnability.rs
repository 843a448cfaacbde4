mod support;

use support::{fixtures_matrix, learn_scores};

#[test]
fn ensembles_learn_the_generator_and_beat_a_single_tree() {
    let data = fixtures_matrix("synthetic_5000.csv");
    let scores: Vec<_> = (0..5).map(|seed| learn_scores(&data, seed)).collect();
    for s in &scores {
        assert!(s.gbt >= 0.90, "{s:?}");
        assert!(s.forest >= 0.90, "{s:?}");
    }
    let wins = scores.iter().filter(|s| s.forest >= s.tree).count();
    assert!(wins >= 4, "{scores:?}");
}
