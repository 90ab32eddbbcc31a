use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

use dodo_core::codebook::{find_isolated, random_search, verify_min_distance, vt_codebook, DegsSearch};
use dodo_core::decoder::{bench_correct as run_bench, brute_force_correct, Outcome, SegmentDecoder};
use dodo_core::edit::ChannelConfig;
use dodo_core::harness::{rate_table as build_rate_table, rate_table_csv, simulate_message, write_embedding_export, ExportSidecar, SizeSummary};
use dodo_core::model::io::{manifest_path, params_hash, ModelManifest};
use dodo_core::model::{embed_flat, evaluate, load_params, save_params, train as run_train, train_from as run_train_from, LossKind, ModelConfig, ModelParams, TrainConfig};
use dodo_core::rng::{derive_seed, rng_from_seed};
use dodo_core::space::{enumerate_sequences, DEFAULT_ENUMERATION_CAP};
use dodo_core::{Codebook, Sequence};

use crate::{BenchArgs, ChannelArgs, ExportArgs, LossArg, MethodArg, RateTableArgs, SearchArgs, TrainArgs, VerifyArgs};

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn load_model(path: &Path) -> Result<ModelParams> {
    load_params(path).with_context(|| format!("loading model {}", path.display()))
}

fn load_codebook(path: &Path) -> Result<Codebook> {
    Codebook::load(path).with_context(|| format!("loading codebook {}", path.display()))
}

pub fn train(a: TrainArgs) -> Result<ExitCode> {
    let model_cfg = ModelConfig { q: 4, m: a.m, layers: a.layers, channels: a.channels, kernel: a.kernel, max_len: a.n + 2 };
    let train_cfg = TrainConfig {
        steps: a.steps,
        learning_rate: a.lr,
        one_edit: a.mix[0],
        two_edits: a.mix[1],
        independent: a.mix[2],
        cosine_decay: a.cosine,
        loss: match a.loss {
            LossArg::Revised => LossKind::Revised,
            LossArg::Pnll => LossKind::Pnll,
        },
        seed: a.seed,
        ..TrainConfig::for_length(a.n)
    };
    let start = Instant::now();
    let mut window = 0.0;
    let progress = |step: u64, loss: f64| {
        window += loss;
        if !a.quiet && (step + 1) % 1000 == 0 {
            eprintln!("step {:>6}  loss {:.5}  {:.0}s", step + 1, window / 1000.0, start.elapsed().as_secs_f64());
            window = 0.0;
        }
    };
    let (outcome, init_hash) = match &a.init {
        Some(path) => {
            let mut params = load_model(path)?;
            if (ModelConfig { max_len: model_cfg.max_len, ..params.config }) != model_cfg {
                bail!("{} has architecture {:?}, expected {:?}", path.display(), params.config, model_cfg);
            }
            let hash = params_hash(&params);
            params.config.max_len = model_cfg.max_len;
            (run_train_from(params, &train_cfg, progress)?, Some(hash))
        }
        None => (run_train(&train_cfg, &model_cfg, progress)?, None),
    };
    save_params(&outcome.params, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    let tail = &outcome.losses[outcome.losses.len().saturating_sub(1000)..];
    let eval = if a.eval_pairs > 0 { Some(evaluate(&outcome.params, a.n, a.eval_pairs, derive_seed(a.seed, 99))?) } else { None };
    let manifest = ModelManifest {
        model_hash: params_hash(&outcome.params),
        model: model_cfg,
        train: train_cfg,
        final_loss: tail.iter().sum::<f64>() / tail.len() as f64,
        eval,
        init_hash,
    };
    write_json(&manifest_path(&a.out), &manifest)?;
    if !a.quiet {
        eprintln!("wrote {} ({})", a.out.display(), manifest.model_hash);
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize, Deserialize)]
pub struct SearchSummary {
    #[serde(flatten)]
    pub summary: SizeSummary,
    pub files: Vec<String>,
    pub model_hash: Option<String>,
}

pub fn search(a: SearchArgs) -> Result<ExitCode> {
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    ensure!(a.runs >= 1, "--runs must be at least 1");
    let start = Instant::now();
    let books: Vec<Codebook> = match a.method {
        MethodArg::Vt => vec![vt_codebook(a.n)?],
        MethodArg::Rand => (0..a.runs as u64).map(|i| random_search(a.n, a.q, a.seed + i)).collect::<Result<_, _>>()?,
        MethodArg::Degs => {
            let path = a.model.as_ref().context("--model is required for degs")?;
            let params = load_model(path)?;
            let prep = DegsSearch::prepare(a.n, &params, a.ridge)?;
            (0..a.runs as u64)
                .map(|i| prep.run((!a.lexicographic_ties).then_some(a.seed + i)))
                .collect::<Result<_, _>>()?
        }
    };
    let tag = books[0].provenance.method.tag();
    let mut files = Vec::new();
    for (i, cb) in books.iter().enumerate() {
        if cb.provenance.guarantees_distance_3() {
            let report = verify_min_distance(cb, 3);
            ensure!(report.ok, "run {i} violates minimum distance 3: {:?}", report.witness);
        }
        let name = format!("{tag}-n{}-run{i}.txt", a.n);
        cb.save(a.out.join(&name))?;
        files.push(name);
    }
    let summary = SearchSummary {
        summary: SizeSummary::from_codebooks(&books)?,
        files,
        model_hash: books[0].provenance.model_hash.clone(),
    };
    write_json(&a.out.join(format!("{tag}-n{}-summary.json", a.n)), &summary)?;
    let s = &summary.summary;
    eprintln!(
        "{tag} n={} runs={} mean {:.1} +- {:.1} max {} ({:.1}s)",
        s.n,
        s.runs,
        s.mean,
        s.std,
        s.max,
        start.elapsed().as_secs_f64()
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct VerifyReport {
    ok: bool,
    n: usize,
    size: usize,
    dmin: usize,
    witness: Option<(String, String, usize)>,
    isolated: Option<usize>,
}

pub fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let cb = load_codebook(&a.codebook)?;
    let report = verify_min_distance(&cb, a.dmin);
    let isolated = if a.maximal { Some(find_isolated(&cb)?.len()) } else { None };
    let ok = report.ok && isolated.is_none_or(|c| c == 0);
    let out = VerifyReport {
        ok,
        n: cb.n(),
        size: cb.len(),
        dmin: a.dmin,
        witness: report.witness.map(|(x, y, d)| (x.to_string(), y.to_string(), d)),
        isolated,
    };
    println!("{}", serde_json::to_string(&out)?);
    if let Some((x, y, d)) = &out.witness {
        eprintln!("violation: {x} and {y} at distance {d}");
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

pub fn rate_table(a: RateTableArgs) -> Result<ExitCode> {
    let mut best: BTreeMap<usize, u64> = BTreeMap::new();
    for path in &a.summary {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let s: SearchSummary = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let e = best.entry(s.summary.n).or_default();
        *e = (*e).max(s.summary.max as u64);
    }
    for spec in &a.size {
        let (n, size) = spec.split_once('=').with_context(|| format!("expected N=SIZE, got {spec:?}"))?;
        best.insert(n.trim().parse()?, size.trim().parse()?);
    }
    ensure!(!best.is_empty(), "no sizes given");
    let rows = build_rate_table(&best.into_iter().collect::<Vec<_>>())?;
    let csv = rate_table_csv(&rows)?;
    match &a.out {
        Some(path) => fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

pub fn bench_correct(a: BenchArgs) -> Result<ExitCode> {
    let cb = load_codebook(&a.codebook)?;
    let params = load_model(&a.model)?;
    let records = run_bench(&cb, &params, a.trials, &a.k, a.seed, a.brute)?;
    for r in &records {
        eprintln!(
            "n={} k={} failures {}/{} tree {:.3}s{}",
            r.n,
            r.k,
            r.failures,
            r.trials,
            r.tree_ns_total as f64 * 1e-9,
            r.brute_ns_total.map_or(String::new(), |b| format!(" brute {:.3}s", b as f64 * 1e-9)),
        );
    }
    match &a.out {
        Some(path) => write_json(path, &records)?,
        None => println!("{}", serde_json::to_string_pretty(&records)?),
    }
    Ok(ExitCode::SUCCESS)
}

pub fn export_embeddings(a: ExportArgs) -> Result<ExitCode> {
    let params = load_model(&a.model)?;
    let cb = a.codebook.as_deref().map(load_codebook).transpose()?;
    let (rows, source): (Vec<Sequence>, String) = match (a.n, &cb) {
        (Some(n), _) => (enumerate_sequences(n, params.config.q, DEFAULT_ENUMERATION_CAP)?.collect(), format!("all n={n}")),
        (None, Some(cb)) => (cb.selection_order().to_vec(), format!("codebook {}", cb.hash())),
        (None, None) => bail!("give --n, --codebook, or both"),
    };
    let matrix = embed_flat(&params, &rows)?;
    let (codeword, isolated, selection_index) = match &cb {
        Some(cb) => {
            let pos: BTreeMap<Sequence, usize> = cb.selection_order().iter().enumerate().map(|(i, s)| (*s, i)).collect();
            let iso: HashSet<Sequence> = if rows.iter().all(|s| s.len() == cb.n() && s.q() == cb.q()) {
                find_isolated(cb)?.into_iter().collect()
            } else {
                HashSet::new()
            };
            (
                rows.iter().map(|s| pos.contains_key(s)).collect(),
                rows.iter().map(|s| iso.contains(s)).collect(),
                rows.iter().map(|s| pos.get(s).copied()).collect(),
            )
        }
        None => (vec![false; rows.len()], vec![false; rows.len()], vec![None; rows.len()]),
    };
    let sidecar = ExportSidecar {
        rows: rows.len(),
        m: params.config.m,
        source,
        model_hash: params_hash(&params),
        sequences: rows.iter().map(|s| s.to_string()).collect(),
        codeword,
        isolated,
        selection_index,
    };
    let with_ext = |ext: &str| -> PathBuf {
        let mut p = a.out.clone().into_os_string();
        p.push(ext);
        p.into()
    };
    write_embedding_export(&matrix, &sidecar, &with_ext(".f32"), &with_ext(".json"))?;
    eprintln!("exported {} rows x {}", sidecar.rows, sidecar.m);
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ChannelSummary {
    messages: usize,
    bits_per_message: usize,
    bits_per_segment: usize,
    segments: usize,
    segment_failures: usize,
    messages_recovered: usize,
    message_success_rate: f64,
    segment_success_rate: f64,
    channel: ChannelConfig,
    decoder: String,
}

pub fn channel_sim(a: ChannelArgs) -> Result<ExitCode> {
    let cb = load_codebook(&a.codebook)?;
    let params = a.model.as_deref().map(load_model).transpose()?;
    let tree = params.as_ref().map(|p| SegmentDecoder::new(&cb, p)).transpose()?;
    let k = a.k.min(cb.len());
    let decode = |s: &Sequence| -> dodo_core::Result<Option<(usize, usize)>> {
        let r = match &tree {
            Some(t) => t.correct(s, k)?,
            None => brute_force_correct(s, &cb),
        };
        Ok(match r.outcome {
            Outcome::Corrected { index, distance } => Some((index, distance)),
            Outcome::Failed(_) => None,
        })
    };
    let channel = ChannelConfig { p_ins: a.p_ins, p_del: a.p_del, p_sub: a.p_sub, seed: a.seed };
    let mut bit_rng = rng_from_seed(derive_seed(a.seed, 0));
    let mut channel_rng = rng_from_seed(derive_seed(a.seed, 1));
    let mut transcript = a.transcript.as_ref().map(fs::File::create).transpose()?;
    let (mut segments, mut seg_fail, mut recovered, mut bps) = (0, 0, 0, 0);
    for _ in 0..a.messages {
        let bits: Vec<bool> = (0..a.bits).map(|_| bit_rng.gen()).collect();
        let report = simulate_message(&bits, &cb, &channel, &mut channel_rng, decode)?;
        segments += report.segments.len();
        seg_fail += report.segment_failures;
        recovered += report.recovered as usize;
        bps = report.bits_per_segment;
        if let Some(f) = transcript.as_mut() {
            serde_json::to_writer(&mut *f, &report)?;
            f.write_all(b"\n")?;
        }
    }
    let summary = ChannelSummary {
        messages: a.messages,
        bits_per_message: a.bits,
        bits_per_segment: bps,
        segments,
        segment_failures: seg_fail,
        messages_recovered: recovered,
        message_success_rate: recovered as f64 / a.messages.max(1) as f64,
        segment_success_rate: 1.0 - seg_fail as f64 / segments.max(1) as f64,
        channel,
        decoder: if tree.is_some() { format!("tree k={k}") } else { "brute-force".into() },
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(ExitCode::SUCCESS)
}
