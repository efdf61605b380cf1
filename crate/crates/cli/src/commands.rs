use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lectalign::align::{align_pair, macro_f1, score_alignment, AlignerConfig};
use lectalign::cleaning::{CleanOutcome, CleaningConfig, Detector, MetaPattern, RawDocument};
use lectalign::corpus::{
    read_alignments, write_alignments, write_document, AlignmentResult, Document, DocumentPair, IndexRange,
    Language, Method,
};
use lectalign::dataset::{
    corpus_stats, emit_splits, rank_pairs, Judgment, Next, ReviewSession, SplitOptions, SplitSpec, Verdict,
};
use lectalign::lm::{plan_multistage, read_corpus, similarity_matrix, train_lm, LabeledMatrix, LmConfig};
use lectalign::similarity::{load_embeddings, Scorer, ScorerKind, Tokenizer, Tokenizers};
use lectalign::synthetic::{generate, SynthConfig};
use lectalign::translate::{attach_translations, TranslationCache, TranslatorSpec};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{existing_path, pick, required_path, FileConfig};
use crate::error::{io_error, CliError, CliResult};
use crate::manifest::{relative_to, write_manifest, DocRef, LoadedManifest, Manifest, PairEntry};
use crate::{
    AlignArgs, AutoArgs, CleanArgs, Cli, Command, EvalArgs, LmCommand, LmSimArgs, LmTrainArgs, PlanArgs, RankArgs,
    ReviewCommand, ScorerArgs, ServeArgs, SessionArgs, SplitArgs, StatsArgs, SynthArgs, TranslateArgs,
};

type Output = CliResult<Option<Value>>;

struct Ctx {
    file: FileConfig,
    pool: rayon::ThreadPool,
}

impl Ctx {
    /// Applies `f` to every item on the worker pool; results keep input
    /// order and the first failing item (in order) decides the error.
    fn par_map<T, R, F>(&self, items: &[T], f: F) -> CliResult<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> CliResult<R> + Sync + Send,
    {
        let results: Vec<CliResult<R>> = self.pool.install(|| items.par_iter().map(&f).collect());
        results.into_iter().collect()
    }
}

pub fn dispatch(cli: Cli) -> Output {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let jobs = pick(cli.jobs, file.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map(usize::from).unwrap_or(1));
    if jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let ctx = Ctx { file, pool };
    match cli.command {
        Command::Clean(a) => clean(&ctx, a),
        Command::Translate(a) => translate(&ctx, a),
        Command::Align(a) => align(&ctx, a),
        Command::EvalAlign(a) => eval_align(&ctx, a),
        Command::Rank(a) => rank(&ctx, a),
        Command::Review(ReviewCommand::Serve(a)) => review_serve(&ctx, a),
        Command::Review(ReviewCommand::Auto(a)) => review_auto(&ctx, a),
        Command::Split(a) => split(&ctx, a),
        Command::Stats(a) => stats(&ctx, a),
        Command::Lm(LmCommand::Train(a)) => lm_train(a),
        Command::Lm(LmCommand::Sim(a)) => lm_sim(a),
        Command::Plan(a) => plan(a),
        Command::Synth(a) => synth(a),
    }
}

fn to_value(v: impl Serialize) -> Output {
    Ok(Some(serde_json::to_value(v)?))
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn read_manifest(ctx: &Ctx, flag: Option<PathBuf>) -> CliResult<LoadedManifest> {
    LoadedManifest::read(&existing_path(flag, ctx.file.paths.manifest.clone(), "manifest")?)
}

fn clean(ctx: &Ctx, a: CleanArgs) -> Output {
    let manifest = read_manifest(ctx, a.manifest)?;
    let out = required_path(a.out, ctx.file.paths.output.clone(), "out")?;
    let c = &ctx.file.cleaning;
    let mut config = CleaningConfig::default();
    if let Some(f) = pick(a.imbalance_factor, c.imbalance_factor) {
        config.imbalance_factor = f;
    }
    let patterns = if a.meta_patterns.is_empty() { c.meta_patterns.clone() } else { Some(a.meta_patterns) };
    if let Some(p) = patterns {
        config.meta_patterns = p.iter().map(|s| MetaPattern::parse(s)).collect();
    }
    if let Some(command) = pick(a.detector_command, c.detector_command.clone()) {
        config.detector = Detector::External { command };
    }
    let cleaner = config.compile()?;
    create_dir(&out)?;

    let outcomes = ctx.par_map(&manifest.manifest.pairs, |entry| {
        let src = RawDocument::read(manifest.resolve(&entry.src), &entry.course_id, &entry.lecture_id, entry.src.language)?;
        let tgt = RawDocument::read(manifest.resolve(&entry.tgt), &entry.course_id, &entry.lecture_id, entry.tgt.language)?;
        let outcome = cleaner.clean_pair(&src, &tgt)?;
        let kept = match &outcome {
            CleanOutcome::Kept(pair, _) => {
                let stem = entry.stem()?;
                let write = |doc: &Document| -> CliResult<DocRef> {
                    let rel = PathBuf::from("docs").join(format!("{}.{}", stem.display(), doc.language));
                    let path = out.join(&rel);
                    create_dir(path.parent().expect("document path has a parent"))?;
                    write_document(doc, &path)?;
                    Ok(DocRef { language: doc.language, path: rel })
                };
                Some(PairEntry {
                    course_id: entry.course_id.clone(),
                    lecture_id: entry.lecture_id.clone(),
                    src: write(&pair.src)?,
                    tgt: write(&pair.tgt)?,
                    src_translated: None,
                    tgt_translated: None,
                })
            }
            CleanOutcome::Rejected { .. } => None,
        };
        Ok((outcome, kept, entry.pair_id()))
    })?;

    let mut kept_entries = Vec::new();
    let mut report = String::new();
    let mut reasons: BTreeMap<String, usize> = BTreeMap::new();
    for (outcome, kept, pair_id) in outcomes {
        let line = match &outcome {
            CleanOutcome::Kept(_, r) => json!({"pair_id": pair_id, "status": "kept", "src": r.src, "tgt": r.tgt}),
            CleanOutcome::Rejected { reason, side, report } => {
                let key = serde_json::to_value(reason)?.as_str().unwrap_or_default().to_string();
                *reasons.entry(key).or_default() += 1;
                json!({"pair_id": pair_id, "status": "rejected", "reason": reason, "side": side,
                       "src": report.src, "tgt": report.tgt})
            }
        };
        report.push_str(&line.to_string());
        report.push('\n');
        kept_entries.extend(kept);
    }
    let report_path = out.join("cleaning_report.jsonl");
    fs::write(&report_path, report).map_err(|e| io_error(&report_path, e))?;
    let kept = kept_entries.len();
    write_manifest(&Manifest { pairs: kept_entries }, &out.join("manifest.json"))?;
    to_value(json!({
        "kept": kept,
        "rejected": manifest.manifest.pairs.len() - kept,
        "reasons": reasons,
        "manifest": out.join("manifest.json"),
    }))
}

fn translator(command: Option<String>, template: Option<String>, from: Language, to: Language, side: &str) -> CliResult<Option<TranslatorSpec>> {
    match (command, template) {
        (Some(_), Some(_)) => Err(CliError::Config(format!("give either --{side}-command or --{side}-template, not both"))),
        (Some(c), None) => Ok(Some(TranslatorSpec::command(c, from, to))),
        (None, Some(t)) => Ok(Some(TranslatorSpec::precomputed(t, from, to))),
        (None, None) => Ok(None),
    }
}

fn translate(ctx: &Ctx, a: TranslateArgs) -> Output {
    let manifest = read_manifest(ctx, a.manifest)?;
    let out = required_path(a.out, ctx.file.paths.output.clone(), "out")?;
    let t = &ctx.file.translate;
    let src_command = pick(a.src_command, t.src_command.clone());
    let src_template = pick(a.src_template, t.src_template.clone());
    let tgt_command = pick(a.tgt_command, t.tgt_command.clone());
    let tgt_template = pick(a.tgt_template, t.tgt_template.clone());
    if src_command.is_none() && src_template.is_none() {
        return Err(CliError::Config("--src-command or --src-template is required".into()));
    }
    let cache = pick(a.cache_dir, ctx.file.paths.cache_dir.clone())
        .map(TranslationCache::new)
        .transpose()?;
    create_dir(&out)?;

    let entries = ctx.par_map(&manifest.manifest.pairs, |entry| {
        let (sl, tl) = (entry.src.language, entry.tgt.language);
        let fwd = translator(src_command.clone(), src_template.clone(), sl, tl, "src")?.expect("checked above");
        let bwd = translator(tgt_command.clone(), tgt_template.clone(), tl, sl, "tgt")?;
        let mut pair = manifest.load_pair(entry)?;
        pair.src_translated = None;
        pair.tgt_translated = None;
        let pair = attach_translations(pair, &fwd, bwd.as_ref(), cache.as_ref())?;
        let stem = entry.stem()?;
        let write = |doc: &Document, from: Language| -> CliResult<DocRef> {
            let rel = PathBuf::from("translations").join(format!("{}.{from}-{}", stem.display(), doc.language));
            let path = out.join(&rel);
            create_dir(path.parent().expect("translation path has a parent"))?;
            write_document(doc, &path)?;
            Ok(DocRef { language: doc.language, path: rel })
        };
        let relocate = |d: &DocRef| -> CliResult<DocRef> {
            Ok(DocRef { language: d.language, path: relative_to(&manifest.resolve(d), &out)? })
        };
        Ok(PairEntry {
            course_id: entry.course_id.clone(),
            lecture_id: entry.lecture_id.clone(),
            src: relocate(&entry.src)?,
            tgt: relocate(&entry.tgt)?,
            src_translated: Some(write(pair.src_translated.as_ref().expect("attached"), sl)?),
            tgt_translated: pair.tgt_translated.as_ref().map(|d| write(d, tl)).transpose()?,
        })
    })?;
    let n = entries.len();
    write_manifest(&Manifest { pairs: entries }, &out.join("manifest.json"))?;
    to_value(json!({"translated": n, "manifest": out.join("manifest.json")}))
}

fn parse_tokenizers(specs: &[String]) -> CliResult<Tokenizers> {
    let mut out = Tokenizers::default();
    for spec in specs {
        let (lang, kind) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("tokenizer {spec:?} is not LANG=KIND")))?;
        let lang: Language = lang.parse()?;
        let tokenizer = match kind {
            "whitespace" => Tokenizer::Whitespace,
            "chars" | "characters" => Tokenizer::Characters,
            k => match k.strip_prefix("cmd:") {
                Some(command) => Tokenizer::External { command: command.to_string() },
                None => return Err(CliError::Config(format!("unknown tokenizer {k:?}"))),
            },
        };
        out.set(lang, tokenizer);
    }
    Ok(out)
}

fn build_scorer(ctx: &Ctx, a: ScorerArgs) -> CliResult<Scorer> {
    let s = &ctx.file.scorer;
    let kind: ScorerKind = pick(a.scorer, s.kind.clone()).unwrap_or_else(|| "cosine".into()).parse()?;
    let lowercase = a.lowercase || s.lowercase.unwrap_or(false);
    let mut scorer = match kind {
        ScorerKind::SentenceBleu => {
            Scorer::bleu(pick(a.bleu_epsilon, s.bleu_epsilon).unwrap_or(lectalign::similarity::DEFAULT_BLEU_EPSILON))
        }
        kind => {
            let path = existing_path(a.embeddings, ctx.file.paths.embeddings.clone(), "embeddings")?;
            Scorer::embedding(kind, Arc::new(load_embeddings(path, lowercase)?))
        }
    };
    scorer.symmetric = a.symmetric || s.symmetric.unwrap_or(false);
    scorer.tokenizers = parse_tokenizers(&a.tokenizers)?;
    scorer.validate()?;
    Ok(scorer)
}

fn align(ctx: &Ctx, a: AlignArgs) -> Output {
    let manifest = read_manifest(ctx, a.manifest)?;
    let out = required_path(a.out, ctx.file.paths.alignments.clone(), "out")?;
    let al = &ctx.file.aligner;
    let method: Method = pick(a.method, al.method.clone()).unwrap_or_else(|| "dp".into()).parse()?;
    if method == Method::Gold {
        return Err(CliError::Config("gold is not an alignment method".into()));
    }
    let defaults = AlignerConfig::default();
    let cfg = AlignerConfig {
        max_chunk: pick(a.max_chunk, al.max_chunk).unwrap_or(defaults.max_chunk),
        skip_penalty: pick(a.skip_penalty, al.skip_penalty).unwrap_or(defaults.skip_penalty),
        min_pair_score: pick(a.min_pair_score, al.min_pair_score),
        flow_cost_scale: pick(a.flow_cost_scale, al.flow_cost_scale).unwrap_or(defaults.flow_cost_scale),
    };
    cfg.validate()?;
    let scorer = build_scorer(ctx, a.scorer)?;
    let mut results = ctx.par_map(&manifest.manifest.pairs, |entry| {
        let pair = manifest.load_pair(entry)?;
        Ok(align_pair(&pair, &scorer, method, &cfg)?)
    })?;
    results.sort_by(|x, y| x.pair_id.cmp(&y.pair_id));
    if let Some(dir) = out.parent() {
        create_dir(dir)?;
    }
    write_alignments(&results, &out)?;
    to_value(json!({
        "method": method,
        "pairs": results.len(),
        "alignments": results.iter().map(|r| r.alignments.len()).sum::<usize>(),
        "out": out,
    }))
}

fn eval_align(ctx: &Ctx, a: EvalArgs) -> Output {
    let pred = existing_path(a.pred, ctx.file.paths.alignments.clone(), "pred")?;
    let gold = existing_path(a.gold, ctx.file.paths.gold.clone(), "gold")?;
    let pred = read_alignments(pred)?;
    let gold: BTreeMap<String, AlignmentResult> = read_alignments(gold)?
        .into_iter()
        .map(|g| (g.pair_id.clone(), g))
        .collect();
    let predicted: HashSet<&str> = pred.iter().map(|p| p.pair_id.as_str()).collect();
    if let Some(missing) = gold.keys().find(|k| !predicted.contains(k.as_str())) {
        return Err(CliError::Data(format!("pair id mismatch: gold pair {missing} has no prediction")));
    }
    let mut docs = Vec::with_capacity(pred.len());
    for p in &pred {
        let g = gold
            .get(&p.pair_id)
            .ok_or_else(|| CliError::Data(format!("pair id mismatch: predicted pair {} has no gold", p.pair_id)))?;
        docs.push((p.pair_id.clone(), score_alignment(p, g)?));
    }
    let scores: Vec<_> = docs.iter().map(|(_, s)| *s).collect();
    let macro_f1 = macro_f1(&scores)?;
    let documents: Vec<Value> = docs
        .into_iter()
        .map(|(id, s)| {
            json!({"pair_id": id, "precision": s.precision, "recall": s.recall, "f1": s.f1,
                   "correct": s.correct, "extracted": s.extracted, "total": s.total})
        })
        .collect();
    to_value(json!({"documents": documents, "macro_f1": macro_f1}))
}

/// Manifest pairs with their alignment results; pairs missing from the
/// alignment file get an empty result.
fn load_results(ctx: &Ctx, manifest: Option<PathBuf>, alignments: Option<PathBuf>) -> CliResult<Vec<(DocumentPair, AlignmentResult)>> {
    let manifest = read_manifest(ctx, manifest)?;
    let path = existing_path(alignments, ctx.file.paths.alignments.clone(), "alignments")?;
    let mut by_id: HashMap<String, AlignmentResult> =
        read_alignments(path)?.into_iter().map(|r| (r.pair_id.clone(), r)).collect();
    let mut out = ctx.par_map(&manifest.manifest.pairs, |entry| manifest.load_pair(entry))?
        .into_iter()
        .map(|pair| {
            let r = by_id
                .remove(&pair.pair_id)
                .unwrap_or_else(|| AlignmentResult::new(pair.pair_id.clone(), Method::Dp, Vec::new()));
            (pair, r)
        })
        .collect::<Vec<_>>();
    if let Some(extra) = by_id.keys().min() {
        return Err(CliError::Data(format!("alignments name pair {extra}, which is not in the manifest")));
    }
    for (pair, r) in &out {
        for a in &r.alignments {
            if a.src.end >= pair.src.len() || a.tgt.end >= pair.tgt.len() {
                return Err(CliError::Data(format!("alignment of {} exceeds the documents", pair.pair_id)));
            }
        }
    }
    out.sort_by(|x, y| x.0.pair_id.cmp(&y.0.pair_id));
    Ok(out)
}

fn rank(ctx: &Ctx, a: RankArgs) -> Output {
    let results = load_results(ctx, a.manifest, a.alignments)?;
    to_value(rank_pairs(&results))
}

fn split_spec(ctx: &Ctx, s: &SessionArgs) -> CliResult<SplitSpec> {
    let f = &ctx.file.split;
    let d = SplitSpec::default();
    let spec = SplitSpec {
        test_volume: pick(s.test_volume, f.test_volume).unwrap_or(d.test_volume),
        dev_volume: pick(s.dev_volume, f.dev_volume).unwrap_or(d.dev_volume),
        ratio: pick(s.ratio, f.ratio).unwrap_or(d.ratio),
    };
    spec.validate()?;
    Ok(spec)
}

fn open_session(ctx: &Ctx, s: SessionArgs) -> CliResult<(Vec<(DocumentPair, AlignmentResult)>, ReviewSession)> {
    let spec = split_spec(ctx, &s)?;
    let log = required_path(s.log, ctx.file.paths.log.clone(), "log")?;
    let results = load_results(ctx, s.manifest, s.alignments)?;
    if let Some(dir) = log.parent() {
        create_dir(dir)?;
    }
    let session = ReviewSession::with_log(&results, spec, log)?;
    Ok((results, session))
}

fn review_serve(ctx: &Ctx, a: ServeArgs) -> Output {
    let port = pick(a.port, ctx.file.review.port).unwrap_or(8080);
    let ui_dir = pick(a.ui_dir, ctx.file.paths.ui_dir.clone());
    if let Some(dir) = &ui_dir {
        if !dir.is_dir() {
            return Err(CliError::Config(format!("--ui-dir: {} is not a directory", dir.display())));
        }
    }
    let (_, session) = open_session(ctx, a.session)?;
    let state = crate::server::AppState::new(session, a.judge_name);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Config(format!("runtime: {e}")))?;
    runtime
        .block_on(crate::server::serve(state, ui_dir, port))
        .map_err(|e| CliError::Config(format!("cannot serve on port {port}: {e}")))?;
    Ok(None)
}

enum Judge {
    Gold(HashSet<(String, IndexRange, IndexRange)>),
    Threshold(f64),
    Fixed(Verdict),
}

impl Judge {
    fn parse(spec: &str) -> CliResult<Self> {
        if let Some(path) = spec.strip_prefix("gold:") {
            let path = Path::new(path);
            if !path.exists() {
                return Err(CliError::Config(format!("--judge: {} does not exist", path.display())));
            }
            let set = read_alignments(path)?
                .into_iter()
                .flat_map(|g| {
                    let id = g.pair_id.clone();
                    g.alignments.into_iter().map(move |a| (id.clone(), a.src, a.tgt))
                })
                .collect();
            return Ok(Judge::Gold(set));
        }
        if let Some(x) = spec.strip_prefix("threshold:") {
            let x: f64 = x.parse().map_err(|_| CliError::Config(format!("bad threshold {x:?}")))?;
            return Ok(Judge::Threshold(x));
        }
        match spec {
            "good" => Ok(Judge::Fixed(Verdict::Good)),
            "bad" => Ok(Judge::Fixed(Verdict::Bad)),
            _ => Err(CliError::Config(format!("unknown judge {spec:?}"))),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Judge::Gold(_) => "auto-gold",
            Judge::Threshold(_) => "auto-threshold",
            Judge::Fixed(_) => "auto-fixed",
        }
    }

    fn verdict(&self, pair_id: &str, a: &lectalign::corpus::ChunkAlignment) -> Verdict {
        let good = match self {
            Judge::Gold(set) => set.contains(&(pair_id.to_string(), a.src, a.tgt)),
            Judge::Threshold(x) => a.score >= *x,
            Judge::Fixed(v) => return *v,
        };
        if good {
            Verdict::Good
        } else {
            Verdict::Bad
        }
    }
}

fn review_auto(ctx: &Ctx, a: AutoArgs) -> Output {
    let judge = Judge::parse(&a.judge)?;
    let (results, mut session) = open_session(ctx, a.session)?;
    let by_id: HashMap<&str, &AlignmentResult> = results.iter().map(|(_, r)| (r.pair_id.as_str(), r)).collect();
    while let Next::Candidate(c) = session.next_candidate() {
        let alignment = &by_id[c.pair_id.as_str()].alignments[c.alignment_index];
        let verdict = judge.verdict(&c.pair_id, alignment);
        session.record_judgment(Judgment::now(c.pair_id, c.alignment_index, verdict, judge.name()))?;
    }
    to_value(json!({"progress": session.progress(), "decisions": session.decisions()}))
}

fn split(ctx: &Ctx, a: SplitArgs) -> Output {
    let out = required_path(a.out, ctx.file.paths.output.clone(), "out")?;
    let log = existing_path(a.session.log.clone(), ctx.file.paths.log.clone(), "log")?;
    let spec = split_spec(ctx, &a.session)?;
    let results = load_results(ctx, a.session.manifest, a.session.alignments)?;
    let judgments = lectalign::dataset::JudgmentLog::read(&log)?;
    let session = ReviewSession::replay(&results, spec, &judgments)?;
    let discard = a.discard_rejected || ctx.file.split.discard_rejected.unwrap_or(false);
    let splits = emit_splits(&session, SplitOptions { discard_rejected: discard })?;
    splits.write(&out, &spec)?;
    to_value(json!({
        "test": splits.test.len(),
        "dev": splits.dev.len(),
        "train": splits.train.len(),
        "out": out,
    }))
}

fn stats(ctx: &Ctx, a: StatsArgs) -> Output {
    let manifest = read_manifest(ctx, a.manifest)?;
    let tokenizers = parse_tokenizers(&a.tokenizers)?;
    let pairs = ctx.par_map(&manifest.manifest.pairs, |entry| manifest.load_pair(entry))?;
    let docs: Vec<Document> = pairs.into_iter().flat_map(|p| [p.src, p.tgt]).collect();
    let stats = corpus_stats(&docs, &tokenizers)?;
    let by_lang: BTreeMap<String, _> = stats.into_iter().map(|(l, s)| (l.to_string(), s)).collect();
    to_value(by_lang)
}

fn lm_config(alpha: Option<f64>) -> LmConfig {
    LmConfig {
        alpha: alpha.unwrap_or(lectalign::lm::DEFAULT_ALPHA),
    }
}

fn lm_train(a: LmTrainArgs) -> Output {
    if !a.corpus.exists() {
        return Err(CliError::Config(format!("--corpus: {} does not exist", a.corpus.display())));
    }
    let corpus = read_corpus(&a.corpus)?;
    let lm = train_lm(&corpus, &lm_config(a.alpha))?;
    lm.save(&a.out)?;
    to_value(json!({"sentences": corpus.len(), "vocabulary": lm.vocab_size(), "out": a.out}))
}

fn named_list(spec: &str, what: &str) -> CliResult<Vec<(String, String)>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            item.split_once('=')
                .map(|(n, v)| (n.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Config(format!("{what} entry {item:?} is not name=value")))
        })
        .collect()
}

fn read_named_corpora(spec: &str) -> CliResult<Vec<(String, Vec<Vec<String>>)>> {
    named_list(spec, "corpora")?
        .into_iter()
        .map(|(name, path)| {
            if !Path::new(&path).exists() {
                return Err(CliError::Config(format!("corpus {name}: {path} does not exist")));
            }
            Ok((name, read_corpus(&path)?))
        })
        .collect()
}

fn lm_sim(a: LmSimArgs) -> Output {
    let corpora = read_named_corpora(&a.corpora)?;
    let matrix = similarity_matrix(&corpora, &lm_config(a.alpha))?;
    if let Some(out) = &a.out {
        let text = serde_json::to_string_pretty(&matrix)? + "\n";
        fs::write(out, text).map_err(|e| io_error(out, e))?;
    }
    to_value(matrix)
}

fn plan(a: PlanArgs) -> Output {
    let (matrix, sizes) = match (&a.corpora, &a.matrix) {
        (Some(spec), None) => {
            let corpora = read_named_corpora(spec)?;
            let sizes = corpora.iter().map(|(n, c)| (n.clone(), c.len())).collect();
            (similarity_matrix(&corpora, &lm_config(a.alpha))?, sizes)
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("--matrix {}: {e}", path.display())))?;
            let matrix: LabeledMatrix = serde_json::from_str(&text)?;
            let sizes = named_list(a.sizes.as_deref().unwrap_or_default(), "sizes")?
                .into_iter()
                .map(|(n, v)| {
                    v.parse::<usize>()
                        .map(|s| (n, s))
                        .map_err(|_| CliError::Config(format!("size {v:?} is not a count")))
                })
                .collect::<CliResult<Vec<_>>>()?;
            (matrix, sizes)
        }
        _ => return Err(CliError::Config("give --corpora, or --matrix with --sizes".into())),
    };
    to_value(plan_multistage(&sizes, &a.in_domain, &matrix)?)
}

fn synth(a: SynthArgs) -> Output {
    let config = SynthConfig {
        seed: a.seed,
        documents: a.documents,
        units_per_document: a.units_per_document,
        ..Default::default()
    };
    let corpus = generate(&config)?;
    create_dir(&a.out.join("docs"))?;
    let mut entries = Vec::new();
    for p in &corpus.pairs {
        let mut refs = Vec::new();
        for doc in [&p.pair.src, &p.pair.tgt] {
            let rel = PathBuf::from("docs").join(format!("{}.{}", doc.lecture_id, doc.language));
            write_document(doc, a.out.join(&rel))?;
            refs.push(DocRef { language: doc.language, path: rel });
        }
        let tgt = refs.pop().expect("two documents");
        let src = refs.pop().expect("two documents");
        entries.push(PairEntry {
            course_id: p.pair.src.course_id.clone(),
            lecture_id: p.pair.src.lecture_id.clone(),
            src,
            tgt,
            src_translated: None,
            tgt_translated: None,
        });
    }
    write_alignments(corpus.pairs.iter().map(|p| &p.gold), a.out.join("gold.jsonl"))?;
    corpus.write_embeddings(a.out.join("embeddings.txt"))?;
    write_manifest(&Manifest { pairs: entries }, &a.out.join("manifest.json"))?;
    to_value(json!({
        "documents": corpus.pairs.len(),
        "with_merges": corpus.pairs.iter().filter(|p| p.has_merge()).count(),
        "embeddings": corpus.embeddings.len(),
        "out": a.out,
    }))
}
