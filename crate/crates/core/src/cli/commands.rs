use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context};
use serde_json::json;

use super::meta::{record_path, Stage};
use super::*;
use crate::corpus::{count_cooccurrences, tokenize_records, CooccurrenceMatrix, Vocabulary};
use crate::error::Error;
use crate::glove::{refit_center_rows, train, EmbeddingModel, TrainConfig};
use crate::inference::{
    compare_bias_types, neighbor_ranks, IntervalResult, ReportRow, ZTest,
};
use crate::io::{self, FileFormat, ModelMeta, ModelPaths};
use crate::propagate::{
    cosine, propagate, BiasQuery, CosineSimilarity, GargQuery, Propagation, WeatQuery,
};
use crate::variance::{build_store, CondPolicy, CovMethod, CovarianceStore};

type Model = EmbeddingModel<f64>;
type Store = CovarianceStore<f64>;

pub fn run(cli: Cli) -> anyhow::Result<()> {
    if cli.threads == 0 {
        bail!(Error::InvalidArgument("--threads must be at least 1".into()));
    }
    // A second build in the same process (tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    match cli.command {
        Command::Vocab(a) => cmd_vocab(a),
        Command::Cooccur(a) => cmd_cooccur(a),
        Command::Train(a) => cmd_train(a, cli.threads),
        Command::Variance(a) => cmd_variance(a),
        Command::Similarity(a) => cmd_similarity(a),
        Command::Neighbors(a) => cmd_neighbors(a),
        Command::Bias(a) => cmd_bias(a),
        Command::Weat(a) => cmd_weat(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Roundtrip(a) => cmd_roundtrip(a),
    }
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    String::from_utf8(bytes).map_err(|e| {
        Error::format(e.utf8_error().valid_up_to() as u64, "text", "invalid UTF-8").into()
    })
}

fn skip_if_current(stage: &Stage, force: bool) -> bool {
    if !force && stage.up_to_date() {
        log::info!("{}: outputs are up to date, skipping (use --force to recompute)", stage.name);
        eprintln!("{}: up to date", stage.name);
        return true;
    }
    false
}

fn cmd_vocab(a: VocabArgs) -> anyhow::Result<()> {
    if a.min_count == 0 {
        bail!(Error::InvalidArgument("--min-count must be at least 1".into()));
    }
    let stage = Stage {
        name: "vocab",
        params: json!({ "min_count": a.min_count, "normalize": a.normalize }),
        inputs: vec![("corpus", &a.corpus)],
        outputs: vec![("vocab", a.out.clone())],
        record: record_path(&a.out),
    };
    if skip_if_current(&stage, a.force) {
        return Ok(());
    }
    let records = tokenize_records(&read_text(&a.corpus)?, a.normalize);
    let vocab = Vocabulary::build(&records, a.min_count);
    if vocab.is_empty() {
        log::warn!("vocabulary is empty");
    }
    io::write_vocab(&a.out, &vocab)?;
    stage.finish()?;
    eprintln!("vocab: {} words", vocab.len());
    Ok(())
}

fn cmd_cooccur(a: CooccurArgs) -> anyhow::Result<()> {
    if a.window == 0 {
        bail!(Error::InvalidArgument("--window must be at least 1".into()));
    }
    let vocab = io::read_vocab(&a.vocab).with_context(|| format!("reading {}", a.vocab.display()))?;
    let stage = Stage {
        name: "cooccur",
        params: json!({
            "window": a.window,
            "symmetric": !a.asymmetric,
            "normalize": a.normalize,
            "vocab_size": vocab.len(),
        }),
        inputs: vec![("corpus", &a.corpus), ("vocab", &a.vocab)],
        outputs: vec![("cooccurrence", a.out.clone())],
        record: record_path(&a.out),
    };
    if skip_if_current(&stage, a.force) {
        return Ok(());
    }
    let records = tokenize_records(&read_text(&a.corpus)?, a.normalize);
    let x = count_cooccurrences(&records, &vocab, a.window, !a.asymmetric);
    if x.is_empty() {
        log::warn!("co-occurrence matrix is empty");
        eprintln!("warning: co-occurrence matrix is empty");
    }
    io::write_cooccurrence(&a.out, &x)?;
    stage.finish()?;
    eprintln!("cooccur: V={} nnz={}", x.vocab_size(), x.nnz());
    Ok(())
}

fn read_cooc(path: &Path, vocab_size: usize) -> anyhow::Result<CooccurrenceMatrix> {
    io::read_cooccurrence(path, Some(vocab_size)).with_context(|| format!("reading {}", path.display()))
}

fn cmd_train(a: TrainArgs, threads: usize) -> anyhow::Result<()> {
    let paths = ModelPaths::new(&a.out);
    let cfg = TrainConfig {
        dim: a.dim,
        epochs: a.epochs,
        initial_lr: a.lr,
        seed: a.seed,
        threads,
        x_max: a.x_max,
        alpha: a.alpha,
    };
    let mut params = serde_json::to_value(&cfg)?;
    params["refit_center"] = json!(a.refit_center);
    let stage = Stage {
        name: "train",
        params,
        inputs: vec![("vocab", &a.vocab), ("cooccurrence", &a.cooccur)],
        outputs: vec![
            ("center", paths.center.clone()),
            ("context", paths.context.clone()),
            ("center_bias", paths.center_bias.clone()),
            ("context_bias", paths.context_bias.clone()),
            ("meta", paths.meta.clone()),
        ],
        record: record_path(&a.out),
    };
    if skip_if_current(&stage, a.force) {
        return Ok(());
    }
    let vocab = io::read_vocab(&a.vocab).with_context(|| format!("reading {}", a.vocab.display()))?;
    check_cooc_vocab_size(&a.cooccur, vocab.len())?;
    let x = read_cooc(&a.cooccur, vocab.len())?;

    let mut model: Model = train(&x, &cfg)?;
    if a.refit_center {
        let skipped = refit_center_rows(&mut model, &x)?;
        if !skipped.is_empty() {
            log::warn!("{} rows kept their trained values (rank-deficient or isolated)", skipped.len());
        }
    }
    let meta = ModelMeta {
        dim: cfg.dim,
        vocab_size: vocab.len(),
        seed: cfg.seed,
        epochs: cfg.epochs,
        initial_lr: cfg.initial_lr,
        threads,
        x_max: cfg.x_max,
        alpha: cfg.alpha,
        precision: "f64".into(),
        init: "uniform(-0.5,0.5)/D".into(),
        shuffle: "once".into(),
        refit_center: a.refit_center,
        version: env!("CARGO_PKG_VERSION").into(),
    };
    io::write_model(&a.out, vocab.words(), &model, &meta)?;
    stage.finish()?;
    eprintln!("train: V={} D={} epochs={}", vocab.len(), cfg.dim, cfg.epochs);
    Ok(())
}

/// The binary co-occurrence file has no header, so a vocabulary larger than
/// the counted one is only visible through the counting stage's run record.
fn check_cooc_vocab_size(cooc: &Path, vocab_size: usize) -> anyhow::Result<()> {
    let rec = record_path(cooc);
    if let Ok(prev) = io::read_json::<super::meta::RunRecord>(&rec) {
        if let Some(counted) = prev.params.get("vocab_size").and_then(|v| v.as_u64()) {
            if counted as usize != vocab_size {
                bail!(Error::DimensionMismatch(format!(
                    "vocabulary has V={vocab_size} but {} was counted with V={counted}",
                    cooc.display()
                )));
            }
        }
    }
    Ok(())
}

fn read_model_checked(prefix: &Path) -> anyhow::Result<(Vec<String>, Model)> {
    io::read_model(prefix).with_context(|| format!("reading model {}", prefix.display()))
}

fn coverage_report(store: &Store) -> String {
    let mut s = String::from("method\tcount\tfraction\n");
    let n = store.len().max(1) as f64;
    for m in [CovMethod::ExactInverse, CovMethod::PseudoInverse, CovMethod::Uncovered] {
        let c = store.count(m);
        s.push_str(&format!("{}\t{}\t{}\n", m.name(), c, c as f64 / n));
    }
    let covered = store.len() - store.count(CovMethod::Uncovered);
    s.push_str(&format!("covered\t{}\t{}\n", covered, store.coverage()));
    s
}

fn cmd_variance(a: VarianceArgs) -> anyhow::Result<()> {
    let paths = ModelPaths::new(&a.model);
    let stage = Stage {
        name: "variance",
        params: json!({ "max_inverse_error": a.max_inverse_error, "pinv_cutoff": a.pinv_cutoff }),
        inputs: vec![("cooccurrence", &a.cooccur), ("center", &paths.center), ("context", &paths.context)],
        outputs: vec![("covariance", a.out.clone())],
        record: record_path(&a.out),
    };
    let (_, model) = read_model_checked(&a.model)?;
    let store = if !a.force && stage.up_to_date() {
        eprintln!("variance: up to date");
        io::read_covariance::<f64>(&a.out)?
    } else {
        let x = read_cooc(&a.cooccur, model.vocab_size())?;
        let policy = CondPolicy { max_inverse_error: a.max_inverse_error, pinv_rel_cutoff: a.pinv_cutoff };
        let store = build_store(&model, &x, &policy)?;
        io::write_covariance(&a.out, &store)?;
        stage.finish()?;
        store
    };
    let report = coverage_report(&store);
    print!("{report}");
    if let Some(p) = &a.report {
        io::atomic_write(p, |w| Ok(w.write_all(report.as_bytes())?))?;
    }
    Ok(())
}

/// Model, vocabulary lookup and covariance for the query commands.
struct Loaded {
    words: Vec<String>,
    vocab: std::collections::HashMap<String, usize>,
    model: Model,
    store: Store,
}

impl Loaded {
    fn open(q: &QueryArgs) -> anyhow::Result<Self> {
        let (words, model) = read_model_checked(&q.model)?;
        let store: Store = io::read_covariance(&q.covariance)
            .with_context(|| format!("reading {}", q.covariance.display()))?;
        if store.len() != model.vocab_size() || store.dim() != model.dim() {
            bail!(Error::DimensionMismatch(format!(
                "covariance file is V={} D={} but model is V={} D={}",
                store.len(),
                store.dim(),
                model.vocab_size(),
                model.dim()
            )));
        }
        let vocab = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(Loaded { words, vocab, model, store })
    }

    fn usable(&self, word: &str) -> Option<usize> {
        self.vocab.get(word).copied().filter(|&i| self.store.is_covered(i))
    }

    /// Maps words to ids. Unknown or uncovered words are an error unless
    /// `allow_skip`, in which case they are dropped with a warning.
    fn resolve(&self, words: &[String], allow_skip: bool, what: &str) -> anyhow::Result<Vec<usize>> {
        let mut ids = Vec::with_capacity(words.len());
        let mut missing = Vec::new();
        for w in words {
            match self.usable(w) {
                Some(i) => ids.push(i),
                None => missing.push(w.as_str()),
            }
        }
        if !missing.is_empty() {
            if !allow_skip {
                bail!(Error::Uncovered(format!(
                    "{} (in {what}); pass --allow-skip to drop them with a warning",
                    missing.join(", ")
                )));
            }
            log::warn!("{what}: skipping {} words without a covariance block: {}", missing.len(), missing.join(", "));
            eprintln!("warning: {what}: skipped {} uncovered or unknown words", missing.len());
        }
        Ok(ids)
    }

    fn resolve_file(&self, path: &Path, allow_skip: bool) -> anyhow::Result<Vec<usize>> {
        let words = io::read_word_set(path).with_context(|| format!("reading {}", path.display()))?;
        self.resolve(&words, allow_skip, &path.display().to_string())
    }
}

fn propagation(q: &QueryArgs) -> Propagation {
    match q.method {
        MethodArg::Delta => Propagation::Delta,
        MethodArg::Mc => Propagation::MonteCarlo { draws: q.draws, seed: q.seed },
    }
}

fn emit(q: &QueryArgs, rows: &[ReportRow], tests: usize) -> anyhow::Result<()> {
    let mut text = String::new();
    match q.format {
        OutputFormat::Tsv => {
            text.push_str(ReportRow::TSV_HEADER);
            text.push('\n');
            for r in rows {
                text.push_str(&r.to_tsv());
                text.push('\n');
            }
        }
        OutputFormat::Jsonl => {
            for r in rows {
                text.push_str(&r.to_json_line());
                text.push('\n');
            }
        }
    }
    match &q.out {
        Some(p) => io::atomic_write(p, |w| Ok(w.write_all(text.as_bytes())?))?,
        None => print!("{text}"),
    }
    eprintln!("tests performed: {tests}");
    Ok(())
}

fn cmd_similarity(a: SimilarityArgs) -> anyhow::Result<()> {
    let l = Loaded::open(&a.query)?;
    let how = propagation(&a.query);
    let mut rows = Vec::new();
    for pair in a.pair.chunks(2) {
        let ids = l.resolve(pair, a.query.allow_skip, "pair")?;
        if ids.len() < 2 {
            continue;
        }
        let stat = propagate(&CosineSimilarity::new(ids[0], ids[1]), &l.store, &l.model, how)?;
        let r = IntervalResult::from_statistic(&stat);
        rows.push(ReportRow::interval(format!("cos({},{})", pair[0], pair[1]), &r, None));
    }
    emit(&a.query, &rows, 0)
}

fn cmd_neighbors(a: NeighborsArgs) -> anyhow::Result<()> {
    let l = Loaded::open(&a.query)?;
    let how = propagation(&a.query);
    let query = l.resolve(std::slice::from_ref(&a.word), false, "query word")?[0];
    let candidates: Vec<usize> = match (&a.candidates, a.top) {
        (Some(path), _) => l.resolve_file(path, a.query.allow_skip)?.into_iter().filter(|&c| c != query).collect(),
        (None, Some(n)) => top_neighbors(&l, query, n)?,
        (None, None) => bail!(Error::InvalidArgument("give --candidates FILE or --top N".into())),
    };
    if candidates.is_empty() {
        bail!(Error::InvalidArgument("no candidate neighbors".into()));
    }
    let ranked = neighbor_ranks(query, &candidates, &l.store, &l.model, how)?;
    let mut rows = Vec::with_capacity(ranked.len());
    for n in &ranked {
        let name = format!("rank{}:cos({},{})", n.rank, a.word, l.words[n.word_id]);
        rows.push(ReportRow::interval(name, &n.cosine, n.vs_next.as_ref()));
    }
    let tests = ranked.iter().filter(|n| n.vs_next.is_some()).count();
    emit(&a.query, &rows, tests)
}

/// The `n` covered words with the largest point-estimate cosine to `query`.
fn top_neighbors(l: &Loaded, query: usize, n: usize) -> anyhow::Result<Vec<usize>> {
    let q = l.model.center(query);
    let mut scored = Vec::new();
    for i in 0..l.model.vocab_size() {
        if i == query || !l.store.is_covered(i) {
            continue;
        }
        if let Ok(c) = cosine(q, l.model.center(i)) {
            scored.push((i, c));
        }
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(scored.into_iter().take(n).map(|(i, _)| i).collect())
}

fn bias_rows(
    l: &Loaded,
    q: &QueryArgs,
    first: BiasQuery,
    second: Option<BiasQuery>,
    label: &str,
) -> anyhow::Result<()> {
    let how = propagation(q);
    let mut rows = Vec::new();
    let mut tests = 0;
    for (name, query) in std::iter::once((label.to_string(), &first))
        .chain(second.as_ref().map(|s| (format!("{label}2"), s)))
    {
        let spec = query.statistic::<f64>()?;
        let stat = propagate(spec.as_ref(), &l.store, &l.model, how)?;
        let test = ZTest::from_statistic(&stat);
        rows.push(ReportRow::interval(name, &IntervalResult::from_statistic(&stat), Some(&test)));
        tests += 1;
    }
    if let Some(second) = &second {
        let t = compare_bias_types(&first, second, &l.store, &l.model, how)?;
        rows.push(ReportRow::test(format!("{label}-{label}2"), &t));
        tests += 1;
    }
    emit(q, &rows, tests)
}

fn cmd_bias(a: BiasArgs) -> anyhow::Result<()> {
    let l = Loaded::open(&a.query)?;
    let skip = a.query.allow_skip;
    let garg = |attr: &Path, ga: &Path, gb: &Path| -> anyhow::Result<BiasQuery> {
        Ok(BiasQuery::Garg(GargQuery {
            attributes: l.resolve_file(attr, skip)?,
            group_a: l.resolve_file(ga, skip)?,
            group_b: l.resolve_file(gb, skip)?,
        }))
    };
    let first = garg(&a.attributes, &a.group_a, &a.group_b)?;
    let second = match &a.compare {
        Some(p) => Some(garg(&p[0], &p[1], &p[2])?),
        None => None,
    };
    bias_rows(&l, &a.query, first, second, "bias")
}

fn cmd_weat(a: WeatArgs) -> anyhow::Result<()> {
    let l = Loaded::open(&a.query)?;
    let skip = a.query.allow_skip;
    let weat = |x: &Path, y: &Path, aa: &Path, ab: &Path| -> anyhow::Result<BiasQuery> {
        let mut targets_x = l.resolve_file(x, skip)?;
        let mut targets_y = l.resolve_file(y, skip)?;
        if targets_x.len() != targets_y.len() {
            if !skip {
                bail!(Error::InvalidArgument(format!(
                    "target sets have {} and {} words; WEAT needs equal sizes",
                    targets_x.len(),
                    targets_y.len()
                )));
            }
            let k = targets_x.len().min(targets_y.len());
            log::warn!("truncating target sets to {k} words each");
            targets_x.truncate(k);
            targets_y.truncate(k);
        }
        Ok(BiasQuery::Weat(WeatQuery {
            targets_x,
            targets_y,
            attributes_a: l.resolve_file(aa, skip)?,
            attributes_b: l.resolve_file(ab, skip)?,
        }))
    };
    let first = weat(&a.targets_x, &a.targets_y, &a.attributes_a, &a.attributes_b)?;
    let second = match &a.compare {
        Some(p) => Some(weat(&p[0], &p[1], &p[2], &p[3])?),
        None => None,
    };
    bias_rows(&l, &a.query, first, second, "weat")
}

fn cmd_sample(a: SampleArgs) -> anyhow::Result<()> {
    let (words, model) = read_model_checked(&a.model)?;
    let store: Store = io::read_covariance(&a.covariance)?;
    let Some(id) = words.iter().position(|w| *w == a.word) else {
        bail!(Error::Uncovered(format!("{} (not in the vocabulary)", a.word)));
    };
    let draws = crate::propagate::sample_embeddings(id, &store, &model, a.draws, a.seed)?;
    let names: Vec<String> = (0..draws.len()).map(|k| format!("{}#{k}", a.word)).collect();
    let flat: Vec<f64> = draws.concat();
    match &a.out {
        Some(p) => io::write_vectors(p, &names, &flat, model.dim())?,
        None => {
            let mut buf = Vec::new();
            io::write_vectors_to(&mut buf, &names, &flat, model.dim())?;
            std::io::stdout().write_all(&buf)?;
        }
    }
    Ok(())
}

fn cmd_roundtrip(a: RoundtripArgs) -> anyhow::Result<()> {
    let fmt = match a.format {
        FormatArg::Vocab => FileFormat::Vocab,
        FormatArg::Cooccur => FileFormat::Cooccurrence,
        FormatArg::Vectors => FileFormat::Vectors,
        FormatArg::Covariance => FileFormat::Covariance,
    };
    match io::roundtrip_check(&a.path, fmt).with_context(|| format!("reading {}", a.path.display()))? {
        None => {
            println!("identical");
            Ok(())
        }
        Some(off) => bail!(Error::format(off, "roundtrip", "re-serialized file differs")),
    }
}
