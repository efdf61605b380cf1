mod support;

use lectalign::similarity::{cosine, neg_l2, sentence_bleu, DEFAULT_BLEU_EPSILON};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

fn vector(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()
}

#[test]
fn bleu_agrees_with_direct_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..500 {
        let cand = random_tokens(&mut rng, 12, 5);
        let mut reference = random_tokens(&mut rng, 12, 5);
        if reference.is_empty() {
            reference.push("w0".into());
        }
        let got = sentence_bleu(&cand, &reference, DEFAULT_BLEU_EPSILON).unwrap();
        let want = reference_bleu(&cand, &reference, DEFAULT_BLEU_EPSILON);
        assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{cand:?} {reference:?} {got} {want}");
        assert!((0.0..=1.0).contains(&got));
    }
}

#[test]
fn vector_metric_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..500 {
        let d = rng.random_range(1..16);
        let (a, b, c) = (vector(&mut rng, d), vector(&mut rng, d), vector(&mut rng, d));
        let cab = cosine(&a, &b).unwrap();
        assert!((-1.0..=1.0).contains(&cab));
        assert_eq!(cab, cosine(&b, &a).unwrap());
        assert!((cosine(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let k = rng.random_range(0.1..10.0);
        let scaled: Vec<f64> = a.iter().map(|x| x * k).collect();
        assert!((cosine(&scaled, &b).unwrap() - cab).abs() < 1e-12);
        let (ab, bc, ac) = (neg_l2(&a, &b).unwrap(), neg_l2(&b, &c).unwrap(), neg_l2(&a, &c).unwrap());
        assert!(ab <= 0.0);
        assert_eq!(ab, neg_l2(&b, &a).unwrap());
        assert_eq!(neg_l2(&a, &a).unwrap(), 0.0);
        assert!(-ac <= -ab - bc + 1e-12);
    }
}
