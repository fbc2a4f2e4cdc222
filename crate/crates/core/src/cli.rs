//! The `valex` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error, 3 numeric
//! or invariant failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bank::{read_bank, write_bank, Bank};
use crate::cooc::{agreement_score, cooc_matrix, reconstruct_dp, CoocMatrix, EntryTriple};
use crate::em::{disambiguation_accuracy, em_weights, log_likelihood, select, SelectionPolicy, DEFAULT_EM_ITERS};
use crate::error::{Result, ValexError};
use crate::eval::{read_verb_list, report_matrix, EvalLevel};
use crate::filters::args::DEFAULT_ARG_OFFSET;
use crate::filters::bht::DEFAULT_ALPHA;
use crate::filters::{read_params, write_params, LearnedParams, MatrixMethod};
use crate::lexicon::{read_lexicon, write_lexicon, Lexicon};
use crate::manifest::Manifest;
use crate::pipeline::{
    combine, filter_args, filter_bht, filter_matrix, learn_all, preliminary, run_pipeline, CombineMode,
    Counting, FilterPath, PipelineConfig, StageCount,
};
use crate::synth::{gen_bank, gen_gold, split_verbs, EditWeights, GoldMode, SynthConfig};

#[derive(Parser, Debug)]
#[command(name = "valex", version, about = "Verb valence dictionary extraction")]
pub struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Manifest path (default: <out>.manifest.tsv, or stderr without --out).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Disambiguate a bank and write one selected parse per clause.
    EmSelect(EmSelectArgs),
    /// Count selected parses into a preliminary dictionary.
    BuildDict(BuildDictArgs),
    /// Learn filter parameters against a training dictionary.
    Learn(LearnArgs),
    /// Filter possible and required arguments and restrict frames.
    FilterArgs(FilterArgsArgs),
    /// Correct co-occurrence matrices and reconstruct frame sets.
    FilterMatrix(FilterMatrixArgs),
    /// Keep frames passing the binomial test.
    FilterBht(FilterBhtArgs),
    /// Bank to dictionary in one run.
    Pipeline(PipelineArgs),
    /// Union, intersection or majority vote of dictionaries.
    Combine(CombineArgs),
    /// Pair counts and recall/precision/F against a reference.
    Eval(EvalArgs),
    /// Reconstruct frame sets from their own matrices.
    Reconstruct(ReconstructArgs),
    /// Agreement score between the matrices of two dictionaries.
    Agreement(AgreementArgs),
    /// Generate a synthetic gold dictionary and bank.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct EmArgs {
    #[arg(long, default_value_t = DEFAULT_EM_ITERS)]
    em_iters: usize,
    #[arg(long, default_value = "em-short", value_parser = parse_with::<SelectionPolicy>)]
    policy: SelectionPolicy,
}

#[derive(Args, Debug)]
struct EmSelectArgs {
    #[arg(long)]
    bank: PathBuf,
    #[command(flatten)]
    em: EmArgs,
    #[arg(long)]
    seed: u64,
    /// Selections as `clause TAB verb TAB frame`; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BuildDictArgs {
    #[arg(long)]
    bank: PathBuf,
    #[command(flatten)]
    em: EmArgs,
    #[arg(long, default_value = "hard", value_parser = parse_with::<Counting>)]
    counting: Counting,
    /// Required for hard counting.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    min_verb_count: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LearnArgs {
    #[arg(long)]
    prelim: PathBuf,
    #[arg(long)]
    train: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ARG_OFFSET)]
    arg_offset: u32,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Parameter file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FilterArgsArgs {
    #[arg(long)]
    prelim: PathBuf,
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FilterMatrixArgs {
    /// Argument-filtered dictionary.
    #[arg(long)]
    filtered: PathBuf,
    #[arg(long)]
    params: PathBuf,
    #[arg(long, default_value = "C", value_parser = parse_with::<MatrixMethod>)]
    matrix_method: MatrixMethod,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FilterBhtArgs {
    #[arg(long)]
    prelim: PathBuf,
    #[arg(long)]
    params: PathBuf,
    /// Overrides the level stored in the parameter file.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[arg(long)]
    bank: PathBuf,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    em: EmArgs,
    #[arg(long, default_value = "hard", value_parser = parse_with::<Counting>)]
    counting: Counting,
    #[arg(long, default_value = "two-stage", value_parser = parse_with::<FilterPath>)]
    path: FilterPath,
    #[arg(long, default_value = "C", value_parser = parse_with::<MatrixMethod>)]
    matrix_method: MatrixMethod,
    #[arg(long, default_value_t = DEFAULT_ARG_OFFSET)]
    arg_offset: u32,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    min_verb_count: f64,
    /// Where to write the learned parameters (default: <out>.params.tsv).
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CombineArgs {
    #[arg(long, value_parser = parse_with::<CombineMode>)]
    mode: CombineMode,
    #[arg(long)]
    out: PathBuf,
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, default_value = "frame", value_parser = parse_with::<EvalLevel>)]
    level: EvalLevel,
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Candidate dictionaries; repeatable.
    #[arg(long = "cand", required = true)]
    candidates: Vec<PathBuf>,
    /// Test verbs, one per line.
    #[arg(long)]
    verbs: PathBuf,
    /// Report path; a full-precision copy goes to <out>.full.tsv. Stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long)]
    lexicon: PathBuf,
    /// Print the frames of one verb; otherwise reconstruct every verb.
    #[arg(long)]
    verb: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AgreementArgs {
    #[arg(long)]
    first: PathBuf,
    #[arg(long)]
    second: PathBuf,
    /// Restrict to these verbs.
    #[arg(long)]
    verbs: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    n_verbs: usize,
    #[arg(long, default_value_t = 12)]
    inventory: usize,
    #[arg(long, default_value = "matrix-consistent", value_parser = parse_with::<GoldMode>)]
    gold_mode: GoldMode,
    #[arg(long, default_value = "2..5", value_parser = parse_range)]
    args_per_verb: (usize, usize),
    #[arg(long, default_value = "1..6", value_parser = parse_range)]
    frames_per_verb: (usize, usize),
    #[arg(long, default_value = "20..60", value_parser = parse_range)]
    clauses_per_verb: (usize, usize),
    #[arg(long, default_value_t = 1.0)]
    zipf: f64,
    #[arg(long, default_value_t = 0)]
    min_frame_obs: usize,
    #[arg(long, default_value = "1..5", value_parser = parse_range)]
    ambiguity: (usize, usize),
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Add, drop and swap weights of distractor edits.
    #[arg(long, default_value = "0.4,0.3,0.3", value_parser = parse_edits)]
    edits: EditWeights,
    #[arg(long, default_value_t = 0.2)]
    verb_swap: f64,
    #[arg(long)]
    distractors_avoid_gold: bool,
    #[arg(long)]
    gold_out: PathBuf,
    #[arg(long)]
    bank_out: PathBuf,
    /// Also split the gold dictionary, this many verbs going to the test part.
    #[arg(long, requires_all = ["train_out", "test_out"])]
    n_test: Option<usize>,
    #[arg(long)]
    train_out: Option<PathBuf>,
    #[arg(long)]
    test_out: Option<PathBuf>,
}

fn parse_with<T: std::str::FromStr<Err = ValexError>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: ValexError| e.to_string())
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let bad = || format!("expected LO..HI or N, found {s:?}");
    match s.split_once("..") {
        Some((lo, hi)) => Ok((lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?)),
        None => {
            let n = s.parse().map_err(|_| bad())?;
            Ok((n, n))
        }
    }
}

fn parse_edits(s: &str) -> std::result::Result<EditWeights, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.parse::<f64>().map_err(|_| format!("bad weight {p:?}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [add, drop, swap] => Ok(EditWeights { add, drop, swap }),
        _ => Err("expected three comma-separated weights".into()),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let display = path.display().to_string();
    File::open(path).map(BufReader::new).map_err(|e| ValexError::io(display, e))
}

fn load_bank(path: &Path) -> Result<Bank> {
    read_bank(open(path)?, &path.display().to_string())
}

fn load_lexicon(path: &Path) -> Result<Lexicon> {
    read_lexicon(open(path)?, &path.display().to_string())
}

fn load_params(path: &Path) -> Result<LearnedParams> {
    read_params(open(path)?, &path.display().to_string())
}

fn load_verbs(path: &Path) -> Result<Vec<String>> {
    read_verb_list(open(path)?, &path.display().to_string())
}

fn save(path: &Path, render: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let display = path.display().to_string();
    let file = File::create(path).map_err(|e| ValexError::io(display.clone(), e))?;
    let mut out = BufWriter::new(file);
    render(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| ValexError::io(display, e))
}

fn save_lexicon(path: &Path, lexicon: &Lexicon) -> Result<()> {
    save(path, |out| write_lexicon(lexicon, out))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn push_stages(manifest: &mut Manifest, stages: &[StageCount]) {
    for s in stages {
        manifest.push(format!("stage.{}", s.stage), format!("{} entries, {} frames", s.entries, s.frames));
    }
}

fn push_lexicon(manifest: &mut Manifest, key: &str, lexicon: &Lexicon) {
    manifest.push(key, format!("{} entries, {} frames", lexicon.verb_count(), lexicon.pair_count()));
}

/// What a command produced: manifest plus the path it is anchored to.
struct Outcome {
    manifest: Manifest,
    anchor: Option<PathBuf>,
    stdout: Option<String>,
}

fn em_select(args: EmSelectArgs, mut m: Manifest) -> Result<Outcome> {
    let bank = load_bank(&args.bank)?;
    let table = em_weights(&bank, args.em.em_iters)?;
    let chosen = select(&bank, &table, args.em.policy, args.seed)?;
    let mut text = String::new();
    for (forest, parse) in bank.forests().iter().zip(&chosen) {
        text.push_str(&format!("{}\t{}\t{}\n", forest.clause_id, parse.verb, parse.frame));
    }
    m.push("seed", args.seed);
    m.push("em_iters", args.em.em_iters);
    m.push("policy", args.em.policy);
    m.push("clauses", bank.len());
    m.push("log_likelihood", log_likelihood(&bank, &table)?);
    if let Ok(acc) = disambiguation_accuracy(&bank, &chosen) {
        m.push("accuracy", acc);
    }
    Ok(match args.out {
        Some(path) => {
            save(&path, |out| out.write_all(text.as_bytes()))?;
            Outcome { manifest: m, anchor: Some(path), stdout: None }
        }
        None => Outcome { manifest: m, anchor: None, stdout: Some(text) },
    })
}

fn build_dict(args: BuildDictArgs, mut m: Manifest) -> Result<Outcome> {
    let seed = match (args.counting, args.seed) {
        (Counting::Hard, None) => {
            return Err(ValexError::data("hard counting draws random selections and needs --seed"))
        }
        (_, seed) => seed.unwrap_or(0),
    };
    let config = PipelineConfig {
        em_iters: args.em.em_iters,
        policy: args.em.policy,
        seed,
        counting: args.counting,
        min_verb_count: args.min_verb_count,
        ..PipelineConfig::default()
    };
    let bank = load_bank(&args.bank)?;
    let prelim = preliminary(&bank, &config)?;
    save_lexicon(&args.out, &prelim)?;
    if let Some(seed) = args.seed {
        m.push("seed", seed);
    }
    m.push("counting", args.counting);
    m.push("em_iters", args.em.em_iters);
    m.push("policy", args.em.policy);
    push_lexicon(&mut m, "output", &prelim);
    Ok(Outcome { manifest: m, anchor: Some(args.out), stdout: None })
}

fn learn(args: LearnArgs, mut m: Manifest) -> Result<Outcome> {
    let prelim = load_lexicon(&args.prelim)?;
    let training = load_lexicon(&args.train)?;
    let config = PipelineConfig {
        arg_offset: args.arg_offset,
        alpha: args.alpha,
        ..PipelineConfig::default()
    };
    let params = learn_all(&prelim, &training, &config)?;
    save(&args.out, |out| write_params(&params, out))?;
    m.push("arg_offset", args.arg_offset);
    m.push("alpha", args.alpha);
    m.push("params", args.out.display());
    Ok(Outcome { manifest: m, anchor: Some(args.out), stdout: None })
}

fn filter_args_cmd(args: FilterArgsArgs, mut m: Manifest) -> Result<Outcome> {
    let prelim = load_lexicon(&args.prelim)?;
    let params = load_params(&args.params)?;
    let filtered = filter_args(&prelim, &params.args)?;
    save_lexicon(&args.out, &filtered)?;
    m.push("params", args.params.display());
    push_lexicon(&mut m, "input", &prelim);
    push_lexicon(&mut m, "output", &filtered);
    Ok(Outcome { manifest: m, anchor: Some(args.out), stdout: None })
}

fn filter_matrix_cmd(args: FilterMatrixArgs, mut m: Manifest) -> Result<Outcome> {
    let filtered = load_lexicon(&args.filtered)?;
    let params = load_params(&args.params)?;
    let output = filter_matrix(&filtered, args.matrix_method, &params.matrix)?;
    save_lexicon(&args.out, &output)?;
    m.push("params", args.params.display());
    m.push("matrix_method", args.matrix_method);
    push_lexicon(&mut m, "input", &filtered);
    push_lexicon(&mut m, "output", &output);
    Ok(Outcome { manifest: m, anchor: Some(args.out), stdout: None })
}

fn filter_bht_cmd(args: FilterBhtArgs, mut m: Manifest) -> Result<Outcome> {
    let prelim = load_lexicon(&args.prelim)?;
    let mut params = load_params(&args.params)?;
    if let Some(alpha) = args.alpha {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ValexError::numeric(format!("significance level {alpha} outside (0, 1)")));
        }
        params.frames.alpha = alpha;
    }
    let output = filter_bht(&prelim, &params.frames)?;
    save_lexicon(&args.out, &output)?;
    m.push("params", args.params.display());
    m.push("alpha", params.frames.alpha);
    push_lexicon(&mut m, "input", &prelim);
    push_lexicon(&mut m, "output", &output);
    Ok(Outcome { manifest: m, anchor: Some(args.out), stdout: None })
}

fn pipeline(args: PipelineArgs, mut m: Manifest) -> Result<Outcome> {
    let config = PipelineConfig {
        em_iters: args.em.em_iters,
        policy: args.em.policy,
        seed: args.seed,
        counting: args.counting,
        path: args.path,
        matrix_method: args.matrix_method,
        arg_offset: args.arg_offset,
        alpha: args.alpha,
        min_verb_count: args.min_verb_count,
    };
    let bank = load_bank(&args.bank)?;
    let training = load_lexicon(&args.train)?;
    let run = run_pipeline(&bank, &training, &config)?;
    save_lexicon(&args.out, &run.output)?;
    let params_path = args.params.unwrap_or_else(|| with_suffix(&args.out, ".params.tsv"));
    save(&params_path, |out| write_params(&run.params, out))?;
    m.push("seed", config.seed);
    m.push("em_iters", config.em_iters);
    m.push("policy", config.policy);
    m.push("counting", config.counting);
    m.push("path", config.path);
    m.push("matrix_method", config.matrix_method);
    m.push("arg_offset", config.arg_offset);
    m.push("alpha", config.alpha);
    m.push("min_verb_count", config.min_verb_count);
    m.push("params", params_path.display());
    push_stages(&mut m, &run.stages);
    Ok(Outcome { manifest: m, anchor: Some(args.out), stdout: None })
}

fn combine_cmd(args: CombineArgs, mut m: Manifest) -> Result<Outcome> {
    let lexica = args.inputs.iter().map(|p| load_lexicon(p)).collect::<Result<Vec<_>>>()?;
    let output = combine(&lexica, args.mode)?;
    save_lexicon(&args.out, &output)?;
    m.push("mode", args.mode);
    for (p, l) in args.inputs.iter().zip(&lexica) {
        push_lexicon(&mut m, &format!("input.{}", p.display()), l);
    }
    push_lexicon(&mut m, "output", &output);
    Ok(Outcome { manifest: m, anchor: Some(args.out), stdout: None })
}

fn file_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn eval_cmd(args: EvalArgs, mut m: Manifest) -> Result<Outcome> {
    let verbs = load_verbs(&args.verbs)?;
    let mut named = vec![(file_label(&args.reference), load_lexicon(&args.reference)?)];
    for c in &args.candidates {
        named.push((file_label(c), load_lexicon(c)?));
    }
    let report = report_matrix(&named, args.level, &verbs, 0)?;
    m.push("level", args.level);
    m.push("reference", args.reference.display());
    m.push("verbs", verbs.len());
    Ok(match args.out {
        Some(path) => {
            save(&path, |out| report.write_tsv(out))?;
            save(&with_suffix(&path, ".full.tsv"), |out| report.write_full_tsv(out))?;
            Outcome { manifest: m, anchor: Some(path), stdout: None }
        }
        None => Outcome { manifest: m, anchor: None, stdout: Some(report.to_tsv()) },
    })
}

fn reconstruct_cmd(args: ReconstructArgs, mut m: Manifest) -> Result<Outcome> {
    let lexicon = load_lexicon(&args.lexicon)?;
    let rebuild = |verb: &str| reconstruct_dp(&EntryTriple::from_frames(&lexicon.frames(verb))?);
    let text = match &args.verb {
        Some(verb) => {
            if !lexicon.contains_verb(verb) {
                return Err(ValexError::data(format!("verb {verb:?} is not in the dictionary")));
            }
            m.push("verb", verb);
            let frames = rebuild(verb)?;
            frames.iter().map(|f| format!("{f}\n")).collect::<String>()
        }
        None => {
            let mut out = Lexicon::new();
            for verb in lexicon.verbs() {
                out.set_frames(verb, &rebuild(verb)?);
            }
            push_lexicon(&mut m, "output", &out);
            crate::lexicon::lexicon_to_string(&out)
        }
    };
    Ok(match args.out {
        Some(path) => {
            save(&path, |out| out.write_all(text.as_bytes()))?;
            Outcome { manifest: m, anchor: Some(path), stdout: None }
        }
        None => Outcome { manifest: m, anchor: None, stdout: Some(text) },
    })
}

fn matrices(lexicon: &Lexicon, verbs: Option<&[String]>) -> Result<BTreeMap<String, CoocMatrix>> {
    lexicon
        .verbs()
        .filter(|v| verbs.is_none_or(|list| list.contains(v)))
        .map(|v| Ok((v.clone(), cooc_matrix(&lexicon.frames(v))?)))
        .collect()
}

fn agreement_cmd(args: AgreementArgs, mut m: Manifest) -> Result<Outcome> {
    let verbs = args.verbs.as_deref().map(load_verbs).transpose()?;
    let first = matrices(&load_lexicon(&args.first)?, verbs.as_deref())?;
    let second = matrices(&load_lexicon(&args.second)?, verbs.as_deref())?;
    let score = agreement_score(&first, &second)?;
    m.push("agreement", score);
    Ok(Outcome { manifest: m, anchor: None, stdout: Some(format!("{score}\n")) })
}

fn synth_cmd(args: SynthArgs, mut m: Manifest) -> Result<Outcome> {
    let config = SynthConfig {
        seed: args.seed,
        n_verbs: args.n_verbs,
        inventory: args.inventory,
        gold_mode: args.gold_mode,
        args_per_verb: args.args_per_verb,
        frames_per_verb: args.frames_per_verb,
        clauses_per_verb: args.clauses_per_verb,
        zipf_exponent: args.zipf,
        min_frame_observations: args.min_frame_obs,
        ambiguity: args.ambiguity,
        noise: args.noise,
        edits: args.edits,
        verb_swap: args.verb_swap,
        distractors_avoid_gold: args.distractors_avoid_gold,
    };
    let gold = gen_gold(&config)?;
    let bank = gen_bank(&gold, &config)?;
    save_lexicon(&args.gold_out, &gold)?;
    save(&args.bank_out, |out| write_bank(&bank, out))?;
    if let (Some(n), Some(train_out), Some(test_out)) = (args.n_test, &args.train_out, &args.test_out) {
        let (train, test) = split_verbs(&gold, n, args.seed)?;
        save_lexicon(train_out, &train)?;
        save_lexicon(test_out, &test)?;
        push_lexicon(&mut m, "train", &train);
        push_lexicon(&mut m, "test", &test);
    }
    for (k, v) in config.describe() {
        m.push(format!("synth.{k}"), v);
    }
    push_lexicon(&mut m, "gold", &gold);
    m.push("clauses", bank.len());
    Ok(Outcome { manifest: m, anchor: Some(args.gold_out), stdout: None })
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::EmSelect(_) => "em-select",
        Command::BuildDict(_) => "build-dict",
        Command::Learn(_) => "learn",
        Command::FilterArgs(_) => "filter-args",
        Command::FilterMatrix(_) => "filter-matrix",
        Command::FilterBht(_) => "filter-bht",
        Command::Pipeline(_) => "pipeline",
        Command::Combine(_) => "combine",
        Command::Eval(_) => "eval",
        Command::Reconstruct(_) => "reconstruct",
        Command::Agreement(_) => "agreement",
        Command::Synth(_) => "synth",
    }
}

fn dispatch(command: Command, manifest: Manifest) -> Result<Outcome> {
    match command {
        Command::EmSelect(a) => em_select(a, manifest),
        Command::BuildDict(a) => build_dict(a, manifest),
        Command::Learn(a) => learn(a, manifest),
        Command::FilterArgs(a) => filter_args_cmd(a, manifest),
        Command::FilterMatrix(a) => filter_matrix_cmd(a, manifest),
        Command::FilterBht(a) => filter_bht_cmd(a, manifest),
        Command::Pipeline(a) => pipeline(a, manifest),
        Command::Combine(a) => combine_cmd(a, manifest),
        Command::Eval(a) => eval_cmd(a, manifest),
        Command::Reconstruct(a) => reconstruct_cmd(a, manifest),
        Command::Agreement(a) => agreement_cmd(a, manifest),
        Command::Synth(a) => synth_cmd(a, manifest),
    }
}

fn execute(cli: Cli, flags: String) -> Result<()> {
    let mut manifest = Manifest::new(command_name(&cli.command));
    manifest.push("flags", flags);
    let explicit_manifest = cli.manifest;
    let run = || dispatch(cli.command, manifest);
    let outcome = match cli.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ValexError::data(format!("cannot start {n} workers: {e}")))?
            .install(run)?,
        None => run()?,
    };
    if let Some(text) = &outcome.stdout {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| ValexError::io("<stdout>", e))?;
    }
    let target = explicit_manifest.or_else(|| outcome.anchor.map(|a| with_suffix(&a, ".manifest.tsv")));
    match target {
        Some(path) => save(&path, |out| outcome.manifest.write(out)),
        None => {
            eprint!("{}", outcome.manifest.to_tsv());
            Ok(())
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let flags = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    match execute(cli, flags) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
