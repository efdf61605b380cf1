mod support;

use lectalign::align::{dp_solve, flow_match, AlignerConfig, MatrixSimilarity};
use lectalign::corpus::{AlignmentResult, Method};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

#[test]
fn dp_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..150 {
        let (n, m) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let k = rng.random_range(1..=3);
        let skip = if rng.random_bool(0.5) { 0.0 } else { -0.1 };
        let table = ChunkTable::random(&mut rng, n, m, k);
        let sol = dp_solve(&table.similarity(), &dp_config(k, skip)).unwrap();
        assert_eq!(sol.total, dp_brute_total(&table, skip));
        assert!((path_total(&sol.alignments, n, m, skip) - sol.total).abs() < 1e-9);
        AlignmentResult::new("x", Method::Dp, sol.alignments).validate().unwrap();
    }
}

#[test]
fn flow_matches_assignment_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let (n, m) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let matrix = random_matrix(&mut rng, n, m);
        let pairs = flow_match(&MatrixSimilarity(&matrix), &AlignerConfig::default()).unwrap();
        assert_eq!(pairs.len(), n.min(m));
        let total: f64 = pairs.iter().map(|a| a.score).sum();
        assert!((total - assignment_optimum(&matrix)).abs() <= 1e-6);
        AlignmentResult::new("x", Method::Flow, pairs).validate().unwrap();
    }
}
