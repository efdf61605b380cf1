use lectalign::align::{align_pair, macro_f1, score_alignment, AlignerConfig};
use lectalign::corpus::{IndexRange, Method};
use lectalign::similarity::{Scorer, ScorerKind};
use lectalign::synthetic::{generate, SynthConfig, SyntheticCorpus};

fn scorer(corpus: &SyntheticCorpus) -> Scorer {
    Scorer::embedding(ScorerKind::CosineEmbedding, corpus.embeddings.clone())
}

fn per_document(corpus: &SyntheticCorpus, method: Method, skip: f64) -> Vec<(bool, lectalign::align::AlignmentScore)> {
    let scorer = scorer(corpus);
    let cfg = AlignerConfig {
        skip_penalty: skip,
        ..Default::default()
    };
    corpus
        .pairs
        .iter()
        .map(|p| {
            let r = align_pair(&p.pair, &scorer, method, &cfg).unwrap();
            (p.has_merge(), score_alignment(&r, &p.gold).unwrap())
        })
        .collect()
}

#[test]
fn gold_units_score_high_and_unrelated_sentences_low() {
    let corpus = generate(&SynthConfig::default()).unwrap();
    let scorer = scorer(&corpus);
    for p in &corpus.pairs {
        let unit_of = |side_src: bool, k: usize| {
            p.gold
                .alignments
                .iter()
                .position(|a| {
                    let r = if side_src { a.src } else { a.tgt };
                    r.start <= k && k <= r.end
                })
                .unwrap()
        };
        for a in &p.gold.alignments {
            assert!(scorer.chunk_score(&p.pair, a.src, a.tgt).unwrap() >= 0.8);
        }
        for i in 0..p.pair.src.len() {
            for j in 0..p.pair.tgt.len() {
                if unit_of(true, i) != unit_of(false, j) {
                    let s = scorer
                        .chunk_score(&p.pair, IndexRange::single(i), IndexRange::single(j))
                        .unwrap();
                    assert!(s <= 0.3, "{i} {j} {s}");
                }
            }
        }
    }
}

#[test]
fn dp_recovers_gold_and_beats_greedy_on_merges() {
    let corpus = generate(&SynthConfig::default()).unwrap();
    assert!(corpus.pairs.iter().filter(|p| p.has_merge()).count() > 0);
    for skip in [0.0, -0.1] {
        let dp = per_document(&corpus, Method::Dp, skip);
        let greedy = per_document(&corpus, Method::Greedy, skip);
        let scores: Vec<_> = dp.iter().map(|(_, s)| *s).collect();
        assert!(macro_f1(&scores).unwrap() >= 0.95);
        for ((merge, d), (_, g)) in dp.iter().zip(&greedy) {
            if *merge {
                assert!(g.f1 < d.f1, "greedy {} vs dp {}", g.f1, d.f1);
            }
        }
    }
}
