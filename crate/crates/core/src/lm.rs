//! Word 4-gram language models with stupid backoff, cross-corpus
//! log-likelihood matrices and multistage fine-tuning schedules.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const ORDER: usize = 4;
pub const DEFAULT_ALPHA: f64 = 0.4;
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

const BOS_ID: u32 = 0;
const EOS_ID: u32 = 1;
const UNK_ID: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmConfig {
    pub alpha: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig { alpha: DEFAULT_ALPHA }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramLM {
    alpha: f64,
    vocab: Vec<String>,
    ids: HashMap<String, u32>,
    /// `counts[n - 1]` maps an n-gram to its count; every n-gram ends in a
    /// predicted token (never `<s>`).
    counts: Vec<HashMap<Vec<u32>, u64>>,
    /// `context_totals[n - 1]` maps an n-gram history to the summed count
    /// of all n-grams that extend it.
    context_totals: Vec<HashMap<Vec<u32>, u64>>,
    /// Predicted tokens in training (words plus end markers).
    total: u64,
}

#[derive(Serialize, Deserialize)]
struct LmFile {
    order: usize,
    smoothing: String,
    alpha: f64,
    vocab: Vec<String>,
    ngrams: Vec<Vec<(Vec<u32>, u64)>>,
}

fn lowercase_sentence<S: AsRef<str>>(sentence: &[S]) -> Vec<String> {
    sentence.iter().map(|t| t.as_ref().to_lowercase()).collect()
}

/// Trains on token sequences. Words seen once become `<unk>`.
pub fn train_lm<S: AsRef<str>>(corpus: &[Vec<S>], config: &LmConfig) -> Result<NGramLM> {
    if corpus.is_empty() {
        return Err(Error::Empty("language model corpus".into()));
    }
    if !(config.alpha > 0.0 && config.alpha <= 1.0) {
        return Err(Error::Config(format!("backoff factor {} outside (0, 1]", config.alpha)));
    }
    let sentences: Vec<Vec<String>> = corpus.iter().map(|s| lowercase_sentence(s)).collect();
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for s in &sentences {
        for t in s {
            *freq.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<&str> = freq
        .iter()
        .filter(|(w, c)| **c > 1 && ![BOS, EOS, UNK].contains(w))
        .map(|(w, _)| *w)
        .collect();
    kept.sort_unstable();
    let vocab: Vec<String> = [BOS, EOS, UNK]
        .into_iter()
        .chain(kept)
        .map(str::to_string)
        .collect();
    let mut lm = NGramLM {
        alpha: config.alpha,
        ids: vocab.iter().enumerate().map(|(k, w)| (w.clone(), k as u32)).collect(),
        vocab,
        counts: vec![HashMap::new(); ORDER],
        context_totals: vec![HashMap::new(); ORDER],
        total: 0,
    };
    for s in &sentences {
        let padded = lm.pad(s);
        for t in ORDER - 1..padded.len() {
            lm.total += 1;
            for n in 1..=ORDER {
                let gram = &padded[t + 1 - n..=t];
                *lm.counts[n - 1].entry(gram.to_vec()).or_default() += 1;
                *lm.context_totals[n - 1].entry(gram[..n - 1].to_vec()).or_default() += 1;
            }
        }
    }
    Ok(lm)
}

impl NGramLM {
    fn id(&self, token: &str) -> u32 {
        self.ids.get(token).copied().unwrap_or(UNK_ID)
    }

    /// `<s>` x 3, the lowercased words mapped to ids, then `</s>`.
    fn pad(&self, sentence: &[String]) -> Vec<u32> {
        let mut out = vec![BOS_ID; ORDER - 1];
        out.extend(sentence.iter().map(|t| match t.as_str() {
            BOS | EOS => UNK_ID,
            t => self.id(t),
        }));
        out.push(EOS_ID);
        out
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// Training count of an n-gram given as tokens.
    pub fn count(&self, gram: &[&str]) -> u64 {
        if gram.is_empty() || gram.len() > ORDER {
            return 0;
        }
        let ids: Vec<u32> = gram.iter().map(|t| self.id(t)).collect();
        self.counts[gram.len() - 1].get(&ids).copied().unwrap_or(0)
    }

    /// N-grams of one order as token strings, sorted.
    pub fn ngrams(&self, n: usize) -> Vec<(Vec<String>, u64)> {
        let mut out: Vec<_> = self.counts[n - 1]
            .iter()
            .map(|(g, c)| (g.iter().map(|&i| self.vocab[i as usize].clone()).collect::<Vec<_>>(), *c))
            .collect();
        out.sort();
        out
    }

    fn unigram(&self, w: u32) -> f64 {
        match self.counts[0].get(&vec![w]) {
            Some(&c) => c as f64 / self.total as f64,
            None => 1.0 / self.total as f64,
        }
    }

    /// Stupid-backoff score of `w` after `context` (at most three ids).
    fn score(&self, context: &[u32], w: u32) -> f64 {
        let mut penalty = 1.0;
        for start in 0..context.len() {
            let ctx = &context[start..];
            let n = ctx.len() + 1;
            let mut gram = ctx.to_vec();
            gram.push(w);
            if let Some(&c) = self.counts[n - 1].get(&gram) {
                let total = self.context_totals[n - 1][ctx];
                return penalty * c as f64 / total as f64;
            }
            penalty *= self.alpha;
        }
        penalty * self.unigram(w)
    }

    /// Natural-log probability of each predicted token of one sentence.
    pub fn sentence_logprobs<S: AsRef<str>>(&self, sentence: &[S]) -> Vec<f64> {
        let padded = self.pad(&lowercase_sentence(sentence));
        (ORDER - 1..padded.len())
            .map(|t| self.score(&padded[t + 1 - ORDER..t], padded[t]).ln())
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let ngrams = self
            .counts
            .iter()
            .map(|table| {
                let mut v: Vec<(Vec<u32>, u64)> = table.iter().map(|(g, c)| (g.clone(), *c)).collect();
                v.sort();
                v
            })
            .collect();
        let file = LmFile {
            order: ORDER,
            smoothing: "stupid_backoff".into(),
            alpha: self.alpha,
            vocab: self.vocab.clone(),
            ngrams,
        };
        fs::write(path, serde_json::to_string(&file)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: LmFile = serde_json::from_str(&text)?;
        if file.order != ORDER || file.ngrams.len() != ORDER {
            return Err(Error::Config(format!("unsupported model order {}", file.order)));
        }
        if file.vocab.len() < 3 || file.vocab[..3] != [BOS, EOS, UNK] {
            return Err(Error::Config("model vocabulary lacks reserved markers".into()));
        }
        let mut lm = NGramLM {
            alpha: file.alpha,
            ids: file.vocab.iter().enumerate().map(|(k, w)| (w.clone(), k as u32)).collect(),
            vocab: file.vocab,
            counts: vec![HashMap::new(); ORDER],
            context_totals: vec![HashMap::new(); ORDER],
            total: 0,
        };
        for (k, table) in file.ngrams.into_iter().enumerate() {
            for (gram, c) in table {
                if gram.len() != k + 1 || gram.iter().any(|&i| i as usize >= lm.vocab.len()) {
                    return Err(Error::Config("malformed n-gram entry".into()));
                }
                if k == 0 {
                    lm.total += c;
                }
                *lm.context_totals[k].entry(gram[..k].to_vec()).or_default() += c;
                lm.counts[k].insert(gram, c);
            }
        }
        if lm.total == 0 {
            return Err(Error::Empty("language model".into()));
        }
        Ok(lm)
    }
}

/// Mean natural-log probability per token; end markers count as tokens.
pub fn per_token_loglik<S: AsRef<str>>(lm: &NGramLM, corpus: &[Vec<S>]) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::Empty("scored corpus".into()));
    }
    let (mut sum, mut tokens) = (0.0, 0usize);
    for s in corpus {
        let lp = lm.sentence_logprobs(s);
        tokens += lp.len();
        sum += lp.iter().sum::<f64>();
    }
    Ok(sum / tokens as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledMatrix {
    /// Row `i` is the model trained on corpus `i`; column `j` the scored
    /// corpus.
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub smoothing: String,
    pub alpha: f64,
}

impl LabeledMatrix {
    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn get(&self, model: &str, corpus: &str) -> Option<f64> {
        Some(self.values[self.index(model)?][self.index(corpus)?])
    }
}

pub type NamedCorpus = (String, Vec<Vec<String>>);

pub fn similarity_matrix(corpora: &[NamedCorpus], config: &LmConfig) -> Result<LabeledMatrix> {
    if corpora.len() < 2 {
        return Err(Error::Config("a similarity matrix needs at least two corpora".into()));
    }
    let mut labels: Vec<&String> = corpora.iter().map(|(n, _)| n).collect();
    labels.sort();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("corpus names must be unique".into()));
    }
    let models = corpora
        .iter()
        .map(|(_, c)| train_lm(c, config))
        .collect::<Result<Vec<_>>>()?;
    let values = std::thread::scope(|scope| {
        let handles: Vec<_> = models
            .iter()
            .map(|lm| scope.spawn(move || corpora.iter().map(|(_, c)| per_token_loglik(lm, c)).collect::<Result<Vec<_>>>()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scoring thread panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(LabeledMatrix {
        labels: corpora.iter().map(|(n, _)| n.clone()).collect(),
        values,
        smoothing: "stupid_backoff".into(),
        alpha: config.alpha,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageMember {
    pub name: String,
    pub size: usize,
    pub multiplier: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub datasets: Vec<StageMember>,
}

impl Stage {
    pub fn names(&self) -> Vec<&str> {
        self.datasets.iter().map(|d| d.name.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub in_domain: String,
    /// Datasets by ascending log-likelihood under the in-domain model.
    pub order: Vec<String>,
    pub stages: Vec<Stage>,
}

/// Orders datasets by similarity to the in-domain one and grows the
/// training mix one dataset per stage.
pub fn plan_multistage(datasets: &[(String, usize)], in_domain: &str, matrix: &LabeledMatrix) -> Result<Schedule> {
    if datasets.is_empty() {
        return Err(Error::Empty("dataset list".into()));
    }
    if !datasets.iter().any(|(n, _)| n == in_domain) {
        return Err(Error::Config(format!("in-domain dataset {in_domain} not among datasets")));
    }
    if let Some((n, _)) = datasets.iter().find(|(_, s)| *s == 0) {
        return Err(Error::Config(format!("dataset {n} has size 0")));
    }
    let mut keyed = Vec::with_capacity(datasets.len());
    for (name, size) in datasets {
        let value = if name == in_domain {
            f64::INFINITY
        } else {
            matrix
                .get(in_domain, name)
                .ok_or_else(|| Error::Config(format!("matrix has no entry for {in_domain} -> {name}")))?
        };
        keyed.push((value, name.clone(), *size));
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let stages = (1..=keyed.len())
        .map(|k| {
            let members = &keyed[..k];
            let largest = members.iter().map(|m| m.2).max().expect("non-empty stage");
            Stage {
                datasets: members
                    .iter()
                    .map(|(_, name, size)| StageMember {
                        name: name.clone(),
                        size: *size,
                        multiplier: largest.div_ceil(*size),
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(Schedule {
        in_domain: in_domain.to_string(),
        order: keyed.into_iter().map(|(_, n, _)| n).collect(),
        stages,
    })
}

/// Reads a whitespace-tokenized corpus, one sentence per line.
pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let corpus: Vec<Vec<String>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect();
    if corpus.is_empty() {
        return Err(Error::Empty(format!("corpus {}", path.display())));
    }
    Ok(corpus)
}

/// Summary for reporting: label -> (label -> value).
pub fn matrix_as_map(m: &LabeledMatrix) -> BTreeMap<String, BTreeMap<String, f64>> {
    m.labels
        .iter()
        .zip(&m.values)
        .map(|(row, vals)| (row.clone(), m.labels.iter().cloned().zip(vals.iter().copied()).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn corpus(lines: &[&str]) -> Vec<Vec<String>> {
        lines.iter().map(|l| l.split_whitespace().map(str::to_string).collect()).collect()
    }

    fn matrix(labels: &[&str], values: Vec<Vec<f64>>) -> LabeledMatrix {
        LabeledMatrix {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            values,
            smoothing: "stupid_backoff".into(),
            alpha: DEFAULT_ALPHA,
        }
    }

    #[test]
    fn repeated_sentence_scores_zero() {
        let c = corpus(&["The cat sat", "the cat sat"]);
        let lm = train_lm(&c, &LmConfig::default()).unwrap();
        assert_eq!(per_token_loglik(&lm, &c).unwrap(), 0.0);
    }

    #[test]
    fn hapax_becomes_unk() {
        let lm = train_lm(&corpus(&["a a b"]), &LmConfig::default()).unwrap();
        assert_eq!(lm.vocab_size(), 4);
        assert_eq!(lm.count(&[UNK]), 1);
        assert_eq!(lm.count(&["b"]), lm.count(&[UNK]));
        assert_eq!(lm.count(&["a"]), 2);
    }

    #[test]
    fn padded_contexts() {
        let lm = train_lm(&corpus(&["x y", "x y"]), &LmConfig::default()).unwrap();
        let fours: Vec<Vec<String>> = lm.ngrams(4).into_iter().map(|(g, _)| g).collect();
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert!(fours.contains(&s(&[BOS, BOS, BOS, "x"])));
        assert!(fours.contains(&s(&[BOS, BOS, "x", "y"])));
        assert!(fours.contains(&s(&[BOS, "x", "y", EOS])));
        assert_eq!(fours.len(), 3);
    }

    /// "a a a a" gives five predicted tokens: a x4 and </s>. Under its own
    /// model the first three are certain and the 4-gram history "a a a"
    /// is followed once by a and once by </s>.
    #[test]
    fn hand_evaluated_backoff() {
        let c = corpus(&["a a a a"]);
        let lm = train_lm(&c, &LmConfig::default()).unwrap();
        let own = per_token_loglik(&lm, &c).unwrap();
        assert!((own - 2.0 * 0.5f64.ln() / 5.0).abs() < 1e-12);
        // "a b": b is unseen and <unk> has no count, so it falls to 1/N
        // after three backoffs; </s> after "<s> a <unk>" also backs off
        // three times to c(</s>)/N = 1/5.
        let lp = lm.sentence_logprobs(&["a", "b"]);
        let backed = (0.4f64.powi(3) / 5.0).ln();
        assert_eq!(lp.len(), 3);
        assert!(lp[0].abs() < 1e-15);
        assert!((lp[1] - backed).abs() < 1e-12);
        assert!((lp[2] - backed).abs() < 1e-12);
    }

    #[test]
    fn partial_backoff() {
        // Bigram "a </s>" exists, the trigram "b a </s>" does not.
        let lm = train_lm(&corpus(&["b a a", "b a a", "a a"]), &LmConfig::default()).unwrap();
        let lp = lm.sentence_logprobs(&["a", "b", "a"]);
        // "a" is followed 6 times in training, 3 of them by </s>.
        assert_eq!(lm.count(&["a", EOS]), 3);
        assert!((lp[3] - (0.4 * 0.4 * 0.5f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn lowercasing() {
        let lm = train_lm(&corpus(&["Hello World", "hello world"]), &LmConfig::default()).unwrap();
        assert_eq!(lm.count(&["hello"]), 2);
        assert!(per_token_loglik(&lm, &corpus(&["HELLO WORLD"])).unwrap().abs() < 1e-15);
    }

    #[test]
    fn empty_corpus_rejected() {
        let empty: Vec<Vec<String>> = Vec::new();
        assert!(train_lm(&empty, &LmConfig::default()).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = corpus(&["a b c d", "a b c", "d c b a", "a b"]);
        let lm = train_lm(&c, &LmConfig::default()).unwrap();
        let path = dir.path().join("lm.json");
        lm.save(&path).unwrap();
        let back = NGramLM::load(&path).unwrap();
        assert_eq!(back, lm);
    }

    #[test]
    fn matrix_shapes_and_symmetry() {
        let a = corpus(&["x y z", "x y z", "y z"]);
        let m = similarity_matrix(&[("a".into(), a.clone()), ("b".into(), a)], &LmConfig::default()).unwrap();
        assert_eq!(m.values[0][1], m.values[1][0]);
        assert_eq!(m.values[0][0], m.values[1][1]);
        let three = similarity_matrix(
            &[
                ("p".into(), corpus(&["a a b b"])),
                ("q".into(), corpus(&["c c d d"])),
                ("r".into(), corpus(&["e e f f"])),
            ],
            &LmConfig::default(),
        )
        .unwrap();
        assert_eq!(three.labels, vec!["p", "q", "r"]);
        assert_eq!(three.values.len(), 3);
        for (i, row) in three.values.iter().enumerate() {
            assert_eq!(row.len(), 3);
            for (j, v) in row.iter().enumerate() {
                assert!(v.is_finite());
                if i != j {
                    assert!(row[i] > *v);
                }
            }
        }
        assert!(similarity_matrix(&three_first(), &LmConfig::default()).is_err());
    }

    fn three_first() -> Vec<NamedCorpus> {
        vec![("only".into(), corpus(&["a"]))]
    }

    #[test]
    fn plan_orders_and_nests() {
        let m = matrix(
            &["A", "T", "C"],
            vec![vec![-1.0, -2.0, -3.0], vec![-2.0, -1.0, -2.5], vec![-3.0, -2.8, -0.8]],
        );
        let sizes = vec![("C".to_string(), 10), ("T".to_string(), 200), ("A".to_string(), 1000)];
        let s = plan_multistage(&sizes, "C", &m).unwrap();
        assert_eq!(s.order, vec!["A", "T", "C"]);
        let names: Vec<Vec<&str>> = s.stages.iter().map(Stage::names).collect();
        assert_eq!(names, vec![vec!["A"], vec!["A", "T"], vec!["A", "T", "C"]]);
        let last = &s.stages[2].datasets;
        assert_eq!(last.iter().map(|d| d.multiplier).collect::<Vec<_>>(), vec![1, 5, 100]);
        assert_eq!(s.stages[0].datasets[0].multiplier, 1);
    }

    #[test]
    fn in_domain_forced_last() {
        // Even if another dataset scored higher under the in-domain model.
        let m = matrix(&["N", "C"], vec![vec![-1.0, -2.0], vec![-0.1, -0.5]]);
        let sizes = vec![("C".to_string(), 3), ("N".to_string(), 7)];
        let s = plan_multistage(&sizes, "C", &m).unwrap();
        assert_eq!(s.order, vec!["N", "C"]);
        assert_eq!(s.stages[1].datasets[1].multiplier, 3);
    }

    #[test]
    fn single_dataset_plan() {
        let m = matrix(&["C", "X"], vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        let s = plan_multistage(&[("C".to_string(), 4)], "C", &m).unwrap();
        assert_eq!(s.stages.len(), 1);
        assert_eq!(s.stages[0].names(), vec!["C"]);
    }

    #[test]
    fn plan_errors() {
        let m = matrix(&["C", "X"], vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert!(plan_multistage(&[("C".to_string(), 4), ("Y".to_string(), 4)], "C", &m).is_err());
        assert!(plan_multistage(&[("X".to_string(), 4)], "C", &m).is_err());
        assert!(plan_multistage(&[("C".to_string(), 0)], "C", &m).is_err());
    }

    fn sentence_strategy(alphabet: &'static [&'static str]) -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(prop::sample::select(alphabet), 1..8)
            .prop_map(|v| v.into_iter().map(str::to_string).collect())
    }

    proptest! {
        #[test]
        fn scores_finite_and_deterministic(
            train in prop::collection::vec(sentence_strategy(&["a", "b", "c", "d"]), 1..12),
            test in prop::collection::vec(sentence_strategy(&["a", "b", "x", "y"]), 1..6),
        ) {
            let lm = train_lm(&train, &LmConfig::default()).unwrap();
            let again = train_lm(&train, &LmConfig::default()).unwrap();
            let v = per_token_loglik(&lm, &test).unwrap();
            prop_assert!(v.is_finite());
            prop_assert!(v <= 0.0);
            prop_assert_eq!(v, per_token_loglik(&again, &test).unwrap());
        }

        #[test]
        fn suffix_closure(train in prop::collection::vec(sentence_strategy(&["a", "b", "c"]), 1..10)) {
            let lm = train_lm(&train, &LmConfig::default()).unwrap();
            for n in 2..=ORDER {
                for (gram, c) in lm.ngrams(n) {
                    let suffix: Vec<&str> = gram[1..].iter().map(String::as_str).collect();
                    prop_assert!(lm.count(&suffix) >= c);
                }
            }
        }

        #[test]
        fn own_corpus_beats_disjoint(
            a in prop::collection::vec(sentence_strategy(&["a", "b", "c"]), 2..10),
            b in prop::collection::vec(sentence_strategy(&["x", "y", "z"]), 2..10),
        ) {
            let own = train_lm(&a, &LmConfig::default()).unwrap();
            let other = train_lm(&b, &LmConfig::default()).unwrap();
            prop_assert!(per_token_loglik(&own, &a).unwrap() >= per_token_loglik(&other, &a).unwrap());
        }

        #[test]
        fn plans_are_nested(sizes in prop::collection::vec(1usize..1000, 1..6), seed in any::<u64>()) {
            let names: Vec<String> = (0..sizes.len()).map(|k| format!("d{k}")).collect();
            let values: Vec<Vec<f64>> = (0..sizes.len())
                .map(|i| (0..sizes.len()).map(|j| -(((seed >> ((i * 5 + j) % 60)) & 0xff) as f64)).collect())
                .collect();
            let m = LabeledMatrix { labels: names.clone(), values, smoothing: String::new(), alpha: 0.4 };
            let data: Vec<(String, usize)> = names.iter().cloned().zip(sizes.iter().copied()).collect();
            let s = plan_multistage(&data, "d0", &m).unwrap();
            prop_assert_eq!(s.stages.len(), sizes.len());
            prop_assert_eq!(s.order.last().map(String::as_str), Some("d0"));
            for w in s.stages.windows(2) {
                let (a, b) = (w[0].names(), w[1].names());
                prop_assert_eq!(&b[..a.len()], &a[..]);
                prop_assert_eq!(b.len(), a.len() + 1);
            }
            for st in &s.stages {
                let largest = st.datasets.iter().map(|d| d.size).max().unwrap();
                for d in &st.datasets {
                    prop_assert_eq!(d.multiplier, largest.div_ceil(d.size));
                    prop_assert!(d.multiplier * d.size >= largest);
                }
            }
        }
    }
}
