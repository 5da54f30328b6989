use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use smoothrank::corpus::{
    build_candidate_lists, load_candidates, load_documents, load_qrels, load_queries, write_candidates,
    write_documents, write_qrels, write_queries, CandidateList, Corpus, Qrels, QuerySet,
};
use smoothrank::evaluation::{
    config_id, epsilon_sweep, evaluate as evaluate_lists, significance_report, SweepSpec, RESULTS_HEADER,
};
use smoothrank::ranker::{load_checkpoint, save_checkpoint, AdamConfig, FEATURE_DIM};
use smoothrank::retrieval::{ns_score_stats, InvertedIndex, NegativeSampling, Sampler};
use smoothrank::smoothing::{Method, TrainInstance};
use smoothrank::synthetic::{self, SyntheticConfig};
use smoothrank::trainer::{train_featurized, TrainConfig};
use smoothrank::{Dataset, Execution, FeaturizedList, IndexedCorpus};

use crate::manifest::{absolute, digest, Recorded, RunManifest, MANIFEST_FILE};
use crate::{CliError, CliResult, SweepArgs, TrainArgs};

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const TRAINLOG_FILE: &str = "trainlog.csv";
const DEFAULT_EPSILON: f64 = 0.2;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))
}

fn load_index(path: &Path) -> CliResult<(Corpus, InvertedIndex)> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let indexed: IndexedCorpus =
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: not an index: {e}", path.display())))?;
    Ok((indexed.corpus()?, indexed.index))
}

fn load_dataset(index: &Path, queries: &Path) -> CliResult<Dataset> {
    let (corpus, index) = load_index(index)?;
    Ok(Dataset::with_index(corpus, load_queries(queries)?, index))
}

/// Candidate lists that all share one length `n`.
fn load_lists(path: &Path) -> CliResult<(Vec<CandidateList>, usize)> {
    let lists = load_candidates(path)?;
    let n = lists
        .first()
        .map(CandidateList::n)
        .ok_or_else(|| CliError::Data(format!("{}: no candidate lists", path.display())))?;
    if let Some(l) = lists.iter().find(|l| l.n() != n) {
        return Err(CliError::Data(format!(
            "{}: query `{}` has {} candidates, expected {n}",
            path.display(),
            l.query_id,
            l.n()
        )));
    }
    Ok((lists, n))
}

pub fn index(docs: &Path, out: &Path) -> CliResult<()> {
    let corpus = load_documents(docs)?;
    let indexed = IndexedCorpus::build(&corpus)?;
    let json = serde_json::to_string(&indexed).map_err(|e| CliError::Data(e.to_string()))?;
    write_file(out, &json)?;
    println!("N={} avgdl={:.4}", indexed.index.doc_count(), indexed.index.avg_doc_length());
    Ok(())
}

pub fn sample(
    index: &Path,
    queries: &Path,
    qrels: &Path,
    ns: NegativeSampling,
    n: usize,
    seed: u64,
    out: &Path,
) -> CliResult<()> {
    if n < 2 {
        return Err(usage(format!("--n must be at least 2, got {n}")));
    }
    let (corpus, index) = load_index(index)?;
    let queries = load_queries(queries)?;
    let qrels = load_qrels(qrels)?;
    qrels.validate(&corpus, &queries)?;
    // Only judged queries get candidate lists.
    let judged = QuerySet::new(
        queries
            .iter()
            .filter(|q| qrels.relevant(&q.id).is_some())
            .cloned()
            .collect(),
    )?;
    let sampler = Sampler::new(ns, &index, seed);
    let lists = build_candidate_lists(&judged, &qrels, &sampler, n)?;
    write_candidates(out, &lists)?;
    println!("{} queries x {n} candidates -> {}", lists.len(), out.display());
    Ok(())
}

fn resolve_epsilon(policy: Method, epsilon: Option<f64>) -> CliResult<f64> {
    let eps = match (policy, epsilon) {
        (Method::Hard, Some(e)) if e != 0.0 => {
            return Err(usage(format!("policy `hard` forces epsilon = 0, got {e}")));
        }
        (Method::Hard, _) => 0.0,
        (_, e) => e.unwrap_or(DEFAULT_EPSILON),
    };
    if !(0.0..=1.0).contains(&eps) {
        return Err(usage(format!("epsilon must lie in [0, 1], got {eps}")));
    }
    Ok(eps)
}

fn base_config(batch_size: usize, instances: u64, lr: f64, hidden: usize, n: usize) -> CliResult<TrainConfig> {
    if !(lr.is_finite() && lr >= 0.0) {
        return Err(usage(format!("--lr must be a nonnegative number, got {lr}")));
    }
    let config = TrainConfig {
        batch_size,
        total_instances: instances,
        adam: AdamConfig { lr, ..AdamConfig::default() },
        n,
        hidden,
        ..TrainConfig::default()
    };
    config.validate()?;
    Ok(config)
}

pub fn train(mut args: TrainArgs) -> CliResult<PathBuf> {
    let eps = resolve_epsilon(args.policy, args.epsilon)?;
    if args.switch_at.is_some() && !args.policy.is_two_stage() {
        return Err(usage(format!("--switch-at only applies to t-ls and t-wsls, not `{}`", args.policy)));
    }
    args.epsilon = Some(eps);
    args.candidates = absolute(&args.candidates)?;
    args.index = absolute(&args.index)?;
    args.queries = absolute(&args.queries)?;

    let (lists, n) = load_lists(&args.candidates)?;
    let config = TrainConfig {
        seed: args.seed,
        ..base_config(args.batch_size, args.instances, args.lr, args.hidden, n)?
    }
    .with_method(args.policy, eps, args.switch_at)?;
    config.validate()?;
    let dataset = load_dataset(&args.index, &args.queries)?;
    let featurized = dataset.featurize(&lists, Execution::default())?;
    let outcome = train_featurized(&config, &featurized)?;

    create_dir(&args.out)?;
    let checkpoint = args.out.join(CHECKPOINT_FILE);
    save_checkpoint(&outcome.params, &outcome.state, &checkpoint)?;
    let trainlog = args.out.join(TRAINLOG_FILE);
    write_file(&trainlog, &outcome.log.to_csv())?;

    let inputs = vec![
        digest("candidates", &args.candidates)?,
        digest("index", &args.index)?,
        digest("queries", &args.queries)?,
    ];
    let outputs = vec![digest("checkpoint", &checkpoint)?, digest("trainlog", &trainlog)?];
    let checkpoint_sha = outputs[0].sha256.clone();
    let last_loss = outcome.log.entries.last().map_or(f64::NAN, |e| e.loss);
    let manifest = RunManifest::new(Recorded::Train(args.clone()), config, inputs, outputs).write(&args.out)?;
    println!(
        "{} eps={eps} instances={} final_loss={last_loss:.6} checkpoint_sha256={checkpoint_sha}",
        args.policy, config.total_instances
    );
    Ok(manifest)
}

/// Run identity for a results row, from the manifest next to the checkpoint.
fn run_identity(checkpoint: &Path) -> (String, String, String, u64) {
    let manifest = checkpoint.parent().map(|d| d.join(MANIFEST_FILE));
    match manifest.and_then(|m| RunManifest::read(&m).ok()).map(|m| m.run) {
        Some(Recorded::Train(a)) => {
            let eps = a.epsilon.unwrap_or(0.0);
            (config_id(a.policy, eps), a.policy.to_string(), eps.to_string(), a.seed)
        }
        _ => {
            let name = checkpoint.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            (name, "unknown".into(), String::new(), 0)
        }
    }
}

pub fn evaluate(checkpoint: &Path, candidates: &Path, index: &Path, queries: &Path, k: usize, out: &Path) -> CliResult<()> {
    let (lists, n) = load_lists(candidates)?;
    if k == 0 || k > n {
        return Err(usage(format!("--k must lie in 1..={n} for lists of {n} candidates, got {k}")));
    }
    let model = load_checkpoint(checkpoint)?;
    model.expect_dims(FEATURE_DIM, None)?;
    let dataset = load_dataset(index, queries)?;
    let featurized = dataset.featurize(&lists, Execution::default())?;
    let result = evaluate_lists(&model.params, &featurized, k, Execution::default())?;

    let (id, policy, eps, seed) = run_identity(checkpoint);
    let row = format!("{id},{policy},{eps},{seed},{},{:.6}", result.metric_name, result.value);
    let fresh = fs::metadata(out).map_or(true, |m| m.len() == 0);
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(out)
        .map_err(|e| usage(format!("{}: {e}", out.display())))?;
    let text = if fresh { format!("{RESULTS_HEADER}\n{row}\n") } else { format!("{row}\n") };
    file.write_all(text.as_bytes())
        .map_err(|e| usage(format!("{}: {e}", out.display())))?;
    println!("{row}");
    Ok(())
}

fn sweep_threads() -> CliResult<usize> {
    match std::env::var("SMOOTHRANK_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| usage(format!("SMOOTHRANK_THREADS must be a positive integer, got `{v}`"))),
        Err(_) => Ok(1),
    }
}

fn featurize_file(dataset: &Dataset, path: &Path) -> CliResult<(Vec<FeaturizedList>, usize)> {
    let (lists, n) = load_lists(path)?;
    Ok((dataset.featurize(&lists, Execution::default())?, n))
}

pub fn sweep(mut args: SweepArgs) -> CliResult<PathBuf> {
    if args.seeds.len() < 2 {
        return Err(usage(format!("--seeds needs at least 2 seeds, got {}", args.seeds.len())));
    }
    if args.policies.is_empty() || args.epsilons.is_empty() {
        return Err(usage("--policies and --epsilons must not be empty"));
    }
    if args.policies.contains(&Method::Hard) {
        return Err(usage("`hard` cannot be swept; the hard baseline is always included"));
    }
    if let Some(e) = args.epsilons.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(usage(format!("epsilon must lie in [0, 1], got {e}")));
    }
    if args.bonferroni == 0 || !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(usage("--alpha must lie in (0, 1) and --bonferroni must be at least 1"));
    }
    let threads = sweep_threads()?;
    args.train_candidates = absolute(&args.train_candidates)?;
    args.eval_candidates = absolute(&args.eval_candidates)?;
    args.index = absolute(&args.index)?;
    args.queries = absolute(&args.queries)?;

    let dataset = load_dataset(&args.index, &args.queries)?;
    let (train, n) = featurize_file(&dataset, &args.train_candidates)?;
    let (eval, eval_n) = featurize_file(&dataset, &args.eval_candidates)?;
    if args.k == 0 || args.k > eval_n {
        return Err(usage(format!("--k must lie in 1..={eval_n}, got {}", args.k)));
    }
    let base = base_config(args.batch_size, args.instances, args.lr, args.hidden, n)?;
    let spec = SweepSpec {
        base,
        methods: args.policies.clone(),
        epsilons: args.epsilons.clone(),
        seeds: args.seeds.clone(),
        switch_at: args.switch_at,
        k: args.k,
    };
    let outcome = Execution::with_threads(threads, |exec| epsilon_sweep(&spec, &train, &eval, exec))?;

    create_dir(&args.out)?;
    let files = [
        ("sweep", "sweep.csv", outcome.sweep_csv()),
        ("results", "results.csv", outcome.results_csv()),
        ("significance", "significance.txt", significance_report(&outcome, args.alpha, args.bonferroni)?),
    ];
    let mut outputs = Vec::new();
    for (role, name, contents) in &files {
        let path = args.out.join(name);
        write_file(&path, contents)?;
        outputs.push(digest(role, &path)?);
    }
    let inputs = vec![
        digest("train_candidates", &args.train_candidates)?,
        digest("eval_candidates", &args.eval_candidates)?,
        digest("index", &args.index)?,
        digest("queries", &args.queries)?,
    ];
    let manifest = RunManifest::new(Recorded::Sweep(args.clone()), base, inputs, outputs).write(&args.out)?;
    print!("{}", files[0].2);
    print!("{}", files[2].2);
    Ok(manifest)
}

pub fn analyze_ns(candidates: &Path, out: &Path) -> CliResult<()> {
    let lists = load_candidates(candidates)?;
    let instances: Vec<TrainInstance> = lists
        .iter()
        .flat_map(|l| {
            l.candidates.iter().map(|c| TrainInstance {
                query_id: l.query_id.clone(),
                doc_id: c.doc_id.clone(),
                label: c.label,
                ns_score: c.ns_score,
            })
        })
        .collect();
    let stats = ns_score_stats(&instances)?;
    write_file(out, &stats.to_csv())?;
    println!("negatives={} mean_ns_score={:.6}", stats.count, stats.mean);
    Ok(())
}

fn split_qrels(qrels: &Qrels, queries: &QuerySet, range: std::ops::Range<usize>) -> Qrels {
    let mut out = Qrels::default();
    for q in &queries.as_slice()[range] {
        for d in qrels.relevant(&q.id).into_iter().flatten() {
            out.insert(q.id.clone(), d.clone());
        }
    }
    out
}

pub fn generate(out: &Path, seed: u64, documents: usize, queries: usize, test_fraction: f64) -> CliResult<()> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(usage(format!("--test-fraction must lie in [0, 1), got {test_fraction}")));
    }
    let config = SyntheticConfig { documents, queries, ..SyntheticConfig::default() };
    let data = synthetic::generate(&config, seed)?;
    create_dir(out)?;
    write_documents(out.join("docs.jsonl"), &data.corpus)?;
    write_queries(out.join("queries.jsonl"), &data.queries)?;
    write_qrels(out.join("qrels.txt"), &data.qrels)?;
    let test = (queries as f64 * test_fraction).round() as usize;
    let cut = queries - test;
    write_qrels(out.join("train_qrels.txt"), &split_qrels(&data.qrels, &data.queries, 0..cut))?;
    write_qrels(out.join("test_qrels.txt"), &split_qrels(&data.qrels, &data.queries, cut..queries))?;
    println!(
        "{} documents, {} queries ({cut} train / {test} test) -> {}",
        data.corpus.len(),
        data.queries.len(),
        out.display()
    );
    Ok(())
}

pub fn rerun(manifest_path: &Path, out: &Path) -> CliResult<()> {
    let recorded = RunManifest::read(manifest_path)?;
    let changed = recorded.changed_inputs()?;
    if !changed.is_empty() {
        let list: Vec<String> = changed.iter().map(|p| p.display().to_string()).collect();
        return Err(CliError::Data(format!("inputs changed since the run: {}", list.join(", "))));
    }
    let new_manifest = match recorded.run.clone() {
        Recorded::Train(mut a) => {
            a.out = out.to_path_buf();
            train(a)?
        }
        Recorded::Sweep(mut a) => {
            a.out = out.to_path_buf();
            sweep(a)?
        }
    };
    let fresh = RunManifest::read(&new_manifest)?;
    let mut mismatches = Vec::new();
    for old in &recorded.outputs {
        let new = fresh.outputs.iter().find(|f| f.role == old.role);
        let same = new.is_some_and(|f| f.sha256 == old.sha256);
        println!("{:<14} {} {}", old.role, if same { "match" } else { "DIFFER" }, old.sha256);
        if !same {
            mismatches.push(old.role.clone());
        }
    }
    if !mismatches.is_empty() {
        return Err(CliError::Data(format!("not reproduced: {}", mismatches.join(", "))));
    }
    println!("reproducible: {} artifacts match", recorded.outputs.len());
    Ok(())
}
