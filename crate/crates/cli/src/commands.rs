//! Subcommand definitions and their implementations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use oversight_core::critique::{degrade, degrade_llm, DegradationKind, DegradeMode, DegradedCritique};
use oversight_core::export::{build_preferences, build_sft, export_jsonl, read_jsonl, SftOptions};
use oversight_core::instructions::task_instruction;
use oversight_core::metrics::{
    benchmark_report, bleu4, critique_revision_eval, llm_judge, rouge_l, BenchTask, Prediction, PredictionKey,
};
use oversight_core::prompts::{build_prompt, PolicyContext};
use oversight_core::reward::{predicted_cost, run_scaling, score_with_mode, RewardMode, ScalingConfig, ScalingMode, ScoreOptions};
use oversight_core::schema::parse_record;
use oversight_core::service::{accepted_triplets, simulate_store, Service, SimConfig};
use oversight_core::triplet::is_no_edit;
use oversight_core::workflow::{Actor, ItemState, Role};
use oversight_core::{AspectKind, ModelRequest, PrimitiveLabelRecord, TripletRecord};

use crate::model::ModelArgs;
use crate::server::{self, ServeConfig};

#[derive(Debug, Parser)]
#[command(name = "oversight", version, about = "Critique-based caption curation workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load primitive label records (one JSON object per line) into the store.
    Ingest(IngestArgs),
    /// Print the captioning prompt compiled from a label record.
    RenderPrompt(RenderArgs),
    /// Generate a pre-caption, for a stored item or a standalone label file.
    Precaption(PrecaptionArgs),
    /// Submit one critique to a stored item and show the revision.
    Loop(LoopArgs),
    /// Degrade the human critiques of a triplet file.
    Degrade(DegradeArgs),
    /// Reward score (probability of Yes) for one caption.
    Score(ScoreArgs),
    /// One inference-time scaling run with its cost report.
    Scale(ScaleArgs),
    /// Benchmark table for one task and metric.
    Eval(EvalArgs),
    /// Write SFT and preference datasets.
    Export(ExportArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Run synthetic videos through the full mock pipeline.
    Simulate(SimulateArgs),
    /// Annotation statistics for a store.
    Stats(StatsArgs),
    /// Fold the event log into a snapshot.
    Compact(StoreArgs),
}

fn parse_aspect(s: &str) -> Result<AspectKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_scaling(s: &str) -> Result<ScalingMode, String> {
    ScalingMode::parse(s).ok_or_else(|| {
        let all: Vec<&str> = ScalingMode::ALL.iter().map(|m| m.as_str()).collect();
        format!("unknown mode {s:?}; expected one of {}", all.join(", "))
    })
}

#[derive(Debug, Clone, Args)]
pub struct StoreArgs {
    #[arg(long, default_value = "oversight-data", env = "OVERSIGHT_DATA_DIR")]
    pub data_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub store: StoreArgs,
    #[arg(long)]
    pub labels: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long, value_parser = parse_aspect)]
    pub aspect: AspectKind,
    #[arg(long)]
    pub labels: PathBuf,
    /// Accepted subject caption, needed by motion and spatial.
    #[arg(long)]
    pub subject_caption: Option<String>,
    /// Accepted scene caption, needed by spatial.
    #[arg(long)]
    pub scene_caption: Option<String>,
}

#[derive(Debug, Args)]
pub struct PrecaptionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub store: StoreArgs,
    /// Stored item id, `<video_id>/<aspect>`.
    #[arg(long, conflicts_with = "labels")]
    pub item: Option<String>,
    #[arg(long, requires = "aspect")]
    pub labels: Option<PathBuf>,
    #[arg(long, value_parser = parse_aspect)]
    pub aspect: Option<AspectKind>,
    #[arg(long)]
    pub subject_caption: Option<String>,
    #[arg(long)]
    pub scene_caption: Option<String>,
}

#[derive(Debug, Args)]
pub struct LoopArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub store: StoreArgs,
    #[arg(long)]
    pub item: String,
    #[arg(long)]
    pub critique: String,
    #[arg(long, default_value = "annotator-0")]
    pub user: String,
    /// Finalize with this Likert score for the pre-caption.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    pub score: Option<u8>,
    /// Self-reported minutes spent.
    #[arg(long, requires = "score")]
    pub minutes: Option<f64>,
    /// Submit for review after finalizing.
    #[arg(long, requires = "score")]
    pub submit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DegradeModeArg {
    Deterministic,
    Llm,
}

#[derive(Debug, Args)]
pub struct DegradeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Triplet JSONL.
    #[arg(long)]
    pub input: PathBuf,
    /// insertion, replacement, deletion, non_constructive or all.
    #[arg(long, default_value = "all")]
    pub kind: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = DegradeModeArg::Deterministic)]
    pub mode: DegradeModeArg,
    /// Output JSONL; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub caption: String,
    #[arg(long, value_parser = parse_aspect, default_value = "subject")]
    pub aspect: AspectKind,
    #[arg(long)]
    pub media: Option<String>,
    /// direct, critique_first, critique_last or self_critique_conditioned.
    #[arg(long, default_value = "direct")]
    pub mode: String,
    #[arg(long, default_value_t = 1)]
    pub rollouts: u32,
    #[arg(long, default_value_t = 0.0)]
    pub temperature: f64,
}

#[derive(Debug, Args)]
pub struct ScaleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_parser = parse_scaling)]
    pub mode: ScalingMode,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = parse_aspect, default_value = "subject")]
    pub aspect: AspectKind,
    #[arg(long, default_value = "mem://scale-demo")]
    pub media: String,
    #[arg(long, default_value_t = 0.7)]
    pub temperature: f64,
    /// Print the full run, transcript included, as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Caption,
    Reward,
    Critique,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    /// caption: bleu4, rouge_l, judge, judge_instruct. reward: a reward mode.
    /// critique: bleu4, rouge_l, judge, revision.
    #[arg(long)]
    pub metric: Option<String>,
    /// Triplet JSONL; a simulated corpus is used when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub videos: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Structured report file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Triplet JSONL; accepted items of the store are used when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub store: StoreArgs,
    /// Degraded critique JSONL from `degrade`.
    #[arg(long)]
    pub degraded: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// TOML file with addr, data_dir and the three role tokens. Flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub addr: Option<SocketAddr>,
    #[arg(long, env = "OVERSIGHT_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
    #[arg(long, env = "OVERSIGHT_ANNOTATOR_TOKEN")]
    pub annotator_token: Option<String>,
    #[arg(long, env = "OVERSIGHT_REVIEWER_TOKEN")]
    pub reviewer_token: Option<String>,
    #[arg(long, env = "OVERSIGHT_MANAGER_TOKEN")]
    pub manager_token: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 100)]
    pub videos: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
    /// Also write the accepted triplets here as JSONL.
    #[arg(long)]
    pub triplets: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub store: StoreArgs,
    #[arg(long)]
    pub json: bool,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Ingest(a) => ingest(a, &mut out),
        Command::RenderPrompt(a) => render_prompt(a, &mut out),
        Command::Precaption(a) => precaption(a, &mut out),
        Command::Loop(a) => run_loop(a, &mut out),
        Command::Degrade(a) => run_degrade(a, &mut out),
        Command::Score(a) => score(a, &mut out),
        Command::Scale(a) => scale(a, &mut out),
        Command::Eval(a) => eval(a, &mut out),
        Command::Export(a) => export(a, &mut out),
        Command::Serve(a) => serve(a),
        Command::Simulate(a) => simulate(a, &mut out),
        Command::Stats(a) => stats(a, &mut out),
        Command::Compact(a) => compact(a, &mut out),
    }
}

fn json_line<T: Serialize>(out: &mut impl std::io::Write, value: &T) -> anyhow::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn read_record(path: &Path) -> anyhow::Result<PrimitiveLabelRecord> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let line = text.lines().find(|l| !l.trim().is_empty()).ok_or_else(|| anyhow!("{} has no record", path.display()))?;
    Ok(parse_record(line)?)
}

fn read_triplets(path: &Path) -> anyhow::Result<Vec<TripletRecord>> {
    read_jsonl(path).with_context(|| format!("reading {}", path.display()))
}

fn open_store(args: &StoreArgs, model: Option<&ModelArgs>) -> anyhow::Result<Service<crate::model::SharedClient>> {
    let client = match model {
        Some(m) => m.client()?,
        None => ModelArgs { model: crate::model::ModelKind::Mock, model_seed: 0 }.client()?,
    };
    Service::open(&args.data_dir, client).with_context(|| format!("opening store {}", args.data_dir.display()))
}

fn ingest(a: IngestArgs, out: &mut impl std::io::Write) -> anyhow::Result<()> {
    let text = fs::read_to_string(&a.labels).with_context(|| format!("reading {}", a.labels.display()))?;
    let mut svc = open_store(&a.store, None)?;
    let report = svc.ingest(&text)?;
    json_line(out, &report)
}

fn context(record: PrimitiveLabelRecord, subject: Option<String>, scene: Option<String>) -> PolicyContext {
    PolicyContext { record, subject_caption: subject, scene_caption: scene }
}

fn render_prompt(a: RenderArgs, out: &mut impl std::io::Write) -> anyhow::Result<()> {
    let ctx = context(read_record(&a.labels)?, a.subject_caption, a.scene_caption);
    let prompt = build_prompt(a.aspect, &ctx)?;
    out.write_all(prompt.text.as_bytes())?;
    Ok(())
}

fn precaption(a: PrecaptionArgs, out: &mut impl std::io::Write) -> anyhow::Result<()> {
    if let Some(item) = a.item {
        let mut svc = open_store(&a.store, Some(&a.model))?;
        svc.mutate(|wf| wf.generate_precaption(&item, &Actor::system(), None))?;
        let it = svc.store().get(&item)?;
        writeln!(out, "{}", it.current.pre_caption)?;
        return Ok(());
    }
    let (Some(labels), Some(aspect)) = (a.labels, a.aspect) else {
        bail!("pass --item, or --labels with --aspect");
    };
    let record = read_record(&labels)?;
    let media = record.media_uri.clone();
    let prompt = build_prompt(aspect, &context(record, a.subject_caption, a.scene_caption))?;
    let client = a.model.client()?;
    let req = ModelRequest::generate(&prompt.text, format!("precaption:{}", prompt.inputs_digest)).with_media(Some(&media));
    writeln!(out, "{}", client.generate(&req)?.text.trim())?;
    Ok(())
}

fn run_loop(a: LoopArgs, out: &mut impl std::io::Write) -> anyhow::Result<()> {
    let mut svc = open_store(&a.store, Some(&a.model))?;
    let actor = Actor::new(Role::Annotator, &a.user);
    let id = a.item.as_str();
    let state = svc.store().get(id)?.state;
    if state == ItemState::PrimitivesReady {
        svc.mutate(|wf| wf.generate_precaption(id, &Actor::system(), None))?;
    }
    if svc.store().get(id)?.state == ItemState::PostCaptioned {
        svc.mutate(|wf| wf.reopen(id, &actor, None))?;
    }
    svc.mutate(|wf| wf.submit_critique(id, &a.critique, &actor, None))?;
    if let Some(score) = a.score {
        if svc.store().get(id)?.state == ItemState::PostCaptioned {
            svc.mutate(|wf| wf.finalize(id, score, a.minutes, &actor, None))?;
            if a.submit {
                svc.mutate(|wf| wf.submit(id, &actor, None))?;
            }
        }
    }
    let item = svc.store().get(id)?;
    writeln!(out, "state\t{:?}", item.state)?;
    writeln!(out, "iteration\t{}", item.iteration)?;
    writeln!(out, "pre_caption\t{}", item.current.pre_caption)?;
    writeln!(out, "post_caption\t{}", item.current.post_caption.as_deref().unwrap_or(""))?;
    Ok(())
}

fn run_degrade(a: DegradeArgs, out: &mut impl std::io::Write) -> anyhow::Result<()> {
    let kinds: Vec<DegradationKind> = if a.kind == "all" {
        DegradationKind::ALL.to_vec()
    } else {
        vec![DegradationKind::parse(&a.kind).ok_or_else(|| anyhow!("unknown degradation kind {:?}", a.kind))?]
    };
    let triplets = read_triplets(&a.input)?;
    let client = match a.mode {
        DegradeModeArg::Llm => Some(a.model.client()?),
        DegradeModeArg::Deterministic => None,
    };
    let mut rows = Vec::new();
    let mut skipped = 0usize;
    for t in &triplets {
        let Some(original) = t.triplet.final_critique() else { continue };
        if is_no_edit(original) {
            continue;
        }
        for &kind in &kinds {
            let result = match &client {
                Some(c) => degrade_llm(c.as_ref(), kind, t.aspect, &t.triplet.pre_caption, original, a.seed),
                None => degrade(original, kind, a.seed),
            };
            match result {
                Ok(degraded) => rows.push(DegradedCritique {
                    video_id: t.video_id.clone(),
                    aspect: t.aspect,
                    kind,
                    original: original.to_string(),
                    degraded,
                    mode: if client.is_some() { DegradeMode::Llm } else { DegradeMode::Deterministic },
                    seed: a.seed,
                }),
                Err(e) => {
                    skipped += 1;
                    tracing::warn!(video = %t.video_id, aspect = %t.aspect, "skipped: {e}");
                }
            }
        }
    }
    match &a.out {
        Some(path) => {
            export_jsonl(&rows, path)?;
        }
        None => {
            for r in &rows {
                writeln!(out, "{}", serde_json::to_string(r)?)?;
            }
        }
    }
    eprintln!("degraded {} critiques, skipped {skipped}", rows.len());
    Ok(())
}

fn reward_mode(s: &str) -> anyhow::Result<RewardMode> {
    RewardMode::parse(s).ok_or_else(|| anyhow!("unknown reward mode {s:?}"))
}

fn score(a: ScoreArgs, out: &mut impl std::io::Write) -> anyhow::Result<()> {
    let client = a.model.client()?;
    let opts = ScoreOptions { rollouts: a.rollouts, temperature: a.temperature, run_tag: String::new() };
    let s = score_with_mode(client.as_ref(), a.media.as_deref(), task_instruction(a.aspect), &a.caption, reward_mode(&a.mode)?, &opts)?;
    json_line(out, &s)
}

fn scale(a: ScaleArgs, out: &mut impl std::io::Write) -> anyhow::Result<()> {
    let client = a.model.client()?;
    let cfg = ScalingConfig { temperature: a.temperature };
    let run = run_scaling(client.as_ref(), Some(&a.media), task_instruction(a.aspect), a.mode, a.n, a.seed, &cfg)?;
    let predicted = predicted_cost(a.mode, a.n)?;
    if run.cost != predicted {
        bail!("cost mismatch: transcript {:?}, formula {:?}", run.cost, predicted);
    }
    if a.json {
        return json_line(out, &run);
    }
    writeln!(out, "mode={} N={} generation={} reward={}", run.mode.as_str(), run.n, run.cost.generation_calls, run.cost.reward_calls)?;
    writeln!(out, "run_id={}", run.run_id)?;
    writeln!(out, "selected={}", run.selected)?;
    Ok(())
}

fn corpus(input: Option<&Path>, videos: usize, seed: u64) -> anyhow::Result<Vec<TripletRecord>> {
    match input {
        Some(p) => read_triplets(p),
        None => Ok(accepted_triplets(&simulate_store(&SimConfig::new(videos, seed))?.1)),
    }
}

#[derive(Serialize)]
struct EvalReport<'a> {
    task: &'a str,
    metric: &'a str,
    items: usize,
    report: oversight_core::metrics::BenchmarkReport,
}

fn eval(a: EvalArgs, out: &mut impl std::io::Write) -> anyhow::Result<()> {
    let triplets = corpus(a.input.as_deref(), a.videos, a.seed)?;
    let client = a.model.client()?;
    let c = client.as_ref();
    let (task, default_metric) = match a.task {
        TaskArg::Caption => (BenchTask::Caption, "bleu4"),
        TaskArg::Reward => (BenchTask::Reward, "direct"),
        TaskArg::Critique => (BenchTask::Critique, "bleu4"),
    };
    let metric = a.metric.as_deref().unwrap_or(default_metric);
    let mut preds: BTreeMap<PredictionKey, Prediction> = BTreeMap::new();
    for t in &triplets {
        let key = (t.video_id.clone(), t.aspect, task);
        let instruction = task_instruction(t.aspect);
        let media = Some(t.media_uri.as_str());
        let pred = match task {
            BenchTask::Caption => {
                let Some(reference) = t.triplet.post_caption.as_deref() else { continue };
                let req = ModelRequest::generate(instruction, format!("eval:{}:{}", t.video_id, t.aspect))
                    .with_media(media)
                    .with_temperature(0.7);
                let cand = client.generate(&req)?.text.trim().to_string();
                match metric {
                    "bleu4" => Prediction::Caption(cand),
                    "rouge_l" => Prediction::Value(rouge_l(&cand, reference)),
                    "judge" => Prediction::Value(llm_judge(c, &cand, reference, None)?),
                    "judge_instruct" => Prediction::Value(llm_judge(c, &cand, reference, Some(instruction))?),
                    other => bail!("unknown caption metric {other:?}"),
                }
            }
            BenchTask::Reward => {
                let Some(post) = t.triplet.post_caption.as_deref() else { continue };
                if post == t.triplet.pre_caption {
                    continue;
                }
                let mode = reward_mode(metric)?;
                let opts = ScoreOptions::default();
                let pre = score_with_mode(c, media, instruction, &t.triplet.pre_caption, mode, &opts)?.p_yes;
                let post = score_with_mode(c, media, instruction, post, mode, &opts)?.p_yes;
                Prediction::Reward { pre, post }
            }
            BenchTask::Critique => {
                let Some(reference) = t.triplet.final_critique() else { continue };
                if is_no_edit(reference) {
                    continue;
                }
                let cand = oversight_core::critique::gen_model_critique(c, &t.media_uri, t.aspect, &t.triplet.pre_caption, true)?;
                match metric {
                    "bleu4" => Prediction::Critique(cand),
                    "rouge_l" => Prediction::Value(rouge_l(&cand, reference)),
                    "judge" => Prediction::Value(llm_judge(c, &cand, reference, None)?),
                    "revision" => {
                        let Some(post) = t.triplet.post_caption.as_deref() else { continue };
                        Prediction::Value(critique_revision_eval(c, &t.triplet.pre_caption, &cand, post, bleu4)?)
                    }
                    other => bail!("unknown critique metric {other:?}"),
                }
            }
        };
        preds.insert(key, pred);
    }
    let mut report = benchmark_report(&triplets, &preds);
    report.rows.retain(|r| r.task == task);
    report.missing.retain(|m| m.2 == task);
    let mut table = String::new();
    writeln!(table, "# task={} metric={} items={} scored={}", task.as_str(), metric, triplets.len(), preds.len())?;
    table.push_str(&report.to_tsv());
    out.write_all(table.as_bytes())?;
    if let Some(path) = &a.out {
        let full = EvalReport { task: task.as_str(), metric, items: triplets.len(), report };
        fs::write(path, serde_json::to_string_pretty(&full)?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ExportSummary {
    triplets: usize,
    sft_records: usize,
    sft_excluded: usize,
    critique_reward_fallbacks: usize,
    preference_pairs: usize,
    skipped_critique: usize,
    skipped_incomplete: usize,
}

fn export(a: ExportArgs, out: &mut impl std::io::Write) -> anyhow::Result<()> {
    let triplets = match &a.input {
        Some(p) => read_triplets(p)?,
        None => accepted_triplets(open_store(&a.store, None)?.store()),
    };
    let degraded: Vec<DegradedCritique> = match &a.degraded {
        Some(p) => read_jsonl(p).with_context(|| format!("reading {}", p.display()))?,
        None => Vec::new(),
    };
    fs::create_dir_all(&a.out_dir)?;
    let sft = build_sft(&triplets, &degraded, &SftOptions { seed: a.seed, ..Default::default() });
    let prefs = build_preferences(&triplets, &degraded, a.seed);
    export_jsonl(&triplets, &a.out_dir.join("triplets.jsonl"))?;
    export_jsonl(&sft.records, &a.out_dir.join("sft.jsonl"))?;
    export_jsonl(&prefs.pairs, &a.out_dir.join("preferences.jsonl"))?;
    json_line(
        out,
        &ExportSummary {
            triplets: triplets.len(),
            sft_records: sft.records.len(),
            sft_excluded: sft.excluded.len(),
            critique_reward_fallbacks: sft.critique_reward_fallbacks,
            preference_pairs: prefs.pairs.len(),
            skipped_critique: prefs.skipped_critique,
            skipped_incomplete: prefs.skipped_incomplete,
        },
    )
}

fn serve(a: ServeArgs) -> anyhow::Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ServeConfig::from_file(p)?,
        None => ServeConfig::default(),
    };
    if let Some(v) = a.addr {
        cfg.addr = v;
    }
    if let Some(v) = a.data_dir {
        cfg.data_dir = Some(v);
    }
    for (slot, v) in [
        (&mut cfg.annotator_token, a.annotator_token),
        (&mut cfg.reviewer_token, a.reviewer_token),
        (&mut cfg.manager_token, a.manager_token),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    let client = a.model.client()?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(server::serve(cfg, client))
}

fn simulate(a: SimulateArgs, out: &mut impl std::io::Write) -> anyhow::Result<()> {
    let (outcome, store) = simulate_store(&SimConfig::new(a.videos, a.seed))?;
    if let Some(path) = &a.triplets {
        export_jsonl(&accepted_triplets(&store), path)?;
    }
    if a.json {
        return json_line(out, &outcome);
    }
    out.write_all(outcome.stats.to_table().as_bytes())?;
    writeln!(out, "model_calls\t{}", outcome.model_calls)?;
    writeln!(out, "events\t{}", outcome.events)?;
    writeln!(out, "ledger_entries\t{}", outcome.ledger.len())?;
    Ok(())
}

fn stats(a: StatsArgs, out: &mut impl std::io::Write) -> anyhow::Result<()> {
    let svc = open_store(&a.store, None)?;
    let report = svc.stats();
    if a.json {
        return json_line(out, &report);
    }
    out.write_all(report.to_table().as_bytes())?;
    Ok(())
}

fn compact(a: StoreArgs, out: &mut impl std::io::Write) -> anyhow::Result<()> {
    let snap = oversight_core::service::compact(&a.data_dir)?;
    writeln!(out, "compacted {} items at event {}", snap.store.items.len(), snap.last_event_id)?;
    Ok(())
}
