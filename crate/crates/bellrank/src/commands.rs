//! Subcommand drivers. Each returns the report and writes its sidecar files
//! into the output directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use bellrank_core::behavior::{
    correlation_matrix, nonsignalling_residual, normalize_counts, BehaviorTable, OutcomeCountTable, SETTING_PAIRS,
};
use bellrank_core::chsh::{chsh_report, local_model_decompose, ChshReport, LocalModel, SignConvention, STRATEGY_COUNT};
use bellrank_core::corpus::{build_rank_table, split_holdout, tokenize, PreprocessConfig, RankedCorpus, TokenRank};
use bellrank_core::inference::{
    bootstrap_ci_chsh, counts_from_trials, naive_t_test, participant_level_chsh, permutation_test_chsh,
    IntervalEstimate, ParticipantChshSummary, PermutationTest, TTest,
};
use bellrank_core::rankfit::{
    be_occupancy, be_small_i_approx, be_tail_approx, holdout_loglik, model_select, pmf_vector, zipf_regime_report,
    Family, FitConfig, FitResult, RankTable, RegimeReport,
};
use bellrank_core::rng::replicate_seed;
use bellrank_core::simulators::{
    lhv_behavior, mix_with_noise, pr_box_behavior, run_protocol, sample_trials, singlet_behavior, SessionPolicy,
    SharedStrategyResponder, SingletAngles,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cli::{
    ChshArgs, Cli, Command, ConventionChoice, CorpusArgs, FitArgs, InputFormat, PreprocessArgs, SimulateArgs,
};
use crate::error::{CliError, Result};
use crate::io::{self, ChshData, ChshInput, RankInput};
use crate::report::{to_value, InputRecord, Manifest, Report};

/// A finished run: the report and every file written.
pub struct RunOutput {
    pub report: Report,
    pub report_path: PathBuf,
    pub files: Vec<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<RunOutput> {
    let out = &cli.out_dir;
    let (name, report, mut files) = match &cli.command {
        Command::Chsh(args) => ("chsh_report.json", cmd_chsh(args)?, Vec::new()),
        Command::Fit(args) => {
            let (r, f) = cmd_fit(args, out)?;
            ("fit_report.json", r, f)
        }
        Command::Simulate(args) => {
            let (r, f) = cmd_simulate(args, out)?;
            ("simulate_report.json", r, f)
        }
        Command::Corpus(args) => {
            let (r, f) = cmd_corpus(args, out)?;
            ("corpus_report.json", r, f)
        }
    };
    let report_path = out.join(name);
    io::write_file(&report_path, report.to_json().as_bytes())?;
    files.push(report_path.clone());
    Ok(RunOutput { report, report_path, files })
}

// ---------------------------------------------------------------- chsh

const CELL_LABELS: [&str; 4] = ["++", "+-", "-+", "--"];

fn block_key(x: usize, y: usize) -> String {
    format!("{x}{y}")
}

#[derive(Serialize)]
struct BehaviorView {
    cell_order: [&'static str; 4],
    /// Keyed by `xy`.
    blocks: BTreeMap<String, [f64; 4]>,
}

impl BehaviorView {
    fn new(b: &BehaviorTable) -> Self {
        let blocks = SETTING_PAIRS.iter().map(|&(x, y)| (block_key(x, y), b.block(x, y))).collect();
        Self { cell_order: CELL_LABELS, blocks }
    }
}

fn counts_view(c: &OutcomeCountTable) -> BTreeMap<String, [u64; 4]> {
    SETTING_PAIRS.iter().map(|&(x, y)| (block_key(x, y), c.block(x, y))).collect()
}

#[derive(Serialize)]
struct ConventionInterval {
    convention: SignConvention,
    interval: IntervalEstimate,
}

#[derive(Serialize)]
struct NaiveTBlock {
    caveat: &'static str,
    convention: SignConvention,
    convention_selected_from_data: bool,
    null_value: f64,
    n_participants: usize,
    result: TTest,
}

#[derive(Serialize)]
struct PermutationBlock {
    convention: SignConvention,
    convention_selected_from_data: bool,
    seed: u64,
    result: PermutationTest,
}

#[derive(Serialize)]
struct LocalModelBlock {
    tolerance: f64,
    result: LocalModel,
}

#[derive(Serialize)]
struct ChshAnalysis {
    input_kind: ChshInput,
    outcome_encoding: &'static str,
    n_trials: u64,
    counts: BTreeMap<String, [u64; 4]>,
    behavior: BehaviorView,
    correlations: [[f64; 2]; 2],
    nonsignalling_residual: f64,
    chsh: ChshReport,
    conventions_examined: usize,
    multiple_comparisons_note: &'static str,
    bootstrap: BootstrapBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    participants: Option<ParticipantChshSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    naive_t_test_for_comparison: Option<NaiveTBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    permutation_test: Option<PermutationBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    local_model: Option<LocalModelBlock>,
}

#[derive(Serialize)]
struct BootstrapBlock {
    resamples: usize,
    level: f64,
    seed: u64,
    unit: &'static str,
    intervals: Vec<ConventionInterval>,
}

const MULTIPLE_COMPARISONS_NOTE: &str = "all 8 sign conventions were evaluated; intervals and p-values are \
     per convention and not adjusted for multiplicity";
const NAIVE_T_CAVEAT: &str = "aggregated one-sample t-test over per-participant S values; treats participants as \
     i.i.d. and ignores within-participant sampling error; reported only for comparison";

fn read_input(path: &Path) -> Result<(Vec<u8>, InputRecord)> {
    let bytes = io::read_bytes(path)?;
    let record = InputRecord::new(path, &bytes);
    Ok((bytes, record))
}

fn cmd_chsh(args: &ChshArgs) -> Result<Report> {
    let (bytes, record) = read_input(&args.input)?;
    let kind = match args.format {
        InputFormat::Auto => None,
        InputFormat::Counts => Some(ChshInput::Counts),
        InputFormat::Trials => Some(ChshInput::Trials),
    };
    let data = io::read_chsh_input(&args.input, &bytes, kind, args.bit_outcomes)?;
    let (input_kind, counts, trials) = match data {
        ChshData::Counts(c) => (ChshInput::Counts, c, None),
        ChshData::Trials(t) => (ChshInput::Trials, counts_from_trials(&t), Some(t)),
    };
    if trials.is_none() && (args.t_test || args.permutations > 0) {
        return Err(CliError::Usage("--t-test and --permutations need a trials CSV".into()));
    }
    if let Some((x, y)) = counts.first_empty_block() {
        return Err(CliError::schema(&args.input, None, format!("setting block ({x},{y}) has no trials")));
    }
    let bootstrap_seed = replicate_seed(args.seed, 0);
    let permutation_seed = replicate_seed(args.seed, 1);

    let behavior = normalize_counts(&counts)?;
    let corr = correlation_matrix(&behavior);
    let report = chsh_report(&corr);
    let (focus, selected) = match args.convention {
        ConventionChoice::One(c) => (c, false),
        ConventionChoice::All => (report.max_convention().0, true),
    };

    let intervals = args
        .convention
        .conventions()
        .into_iter()
        .map(|c| {
            bootstrap_ci_chsh(&counts, c, args.resamples, bootstrap_seed, args.level)
                .map(|interval| ConventionInterval { convention: c, interval })
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let participants = match &trials {
        Some(t) => Some(participant_level_chsh(t, focus)?),
        None => None,
    };
    let naive_t_test_for_comparison = match (&participants, args.t_test) {
        (Some(p), true) => Some(NaiveTBlock {
            caveat: NAIVE_T_CAVEAT,
            convention: focus,
            convention_selected_from_data: selected,
            null_value: args.null_value,
            n_participants: p.included.len(),
            result: naive_t_test(&p.values(), args.null_value)?,
        }),
        _ => None,
    };
    let permutation_test = match &trials {
        Some(t) if args.permutations > 0 => Some(PermutationBlock {
            convention: focus,
            convention_selected_from_data: selected,
            seed: permutation_seed,
            result: permutation_test_chsh(t, focus, args.permutations, permutation_seed)?,
        }),
        _ => None,
    };
    let local_model = match args.local_tolerance {
        Some(tol) => Some(LocalModelBlock { tolerance: tol, result: local_model_decompose(&behavior, tol)? }),
        None => None,
    };

    let analysis = ChshAnalysis {
        input_kind,
        outcome_encoding: if args.bit_outcomes { "bits" } else { "plus_minus_one" },
        n_trials: counts.total(),
        counts: counts_view(&counts),
        behavior: BehaviorView::new(&behavior),
        correlations: corr.entries(),
        nonsignalling_residual: nonsignalling_residual(&behavior),
        chsh: report,
        conventions_examined: SignConvention::ALL.len(),
        multiple_comparisons_note: MULTIPLE_COMPARISONS_NOTE,
        bootstrap: BootstrapBlock {
            resamples: args.resamples,
            level: args.level,
            seed: bootstrap_seed,
            unit: "setting_block",
            intervals,
        },
        participants,
        naive_t_test_for_comparison,
        permutation_test,
        local_model,
    };
    let manifest = Manifest::new(
        "chsh",
        vec![record],
        to_value(args),
        json!({ "seed": args.seed, "bootstrap": bootstrap_seed, "permutation": permutation_seed }),
    );
    Ok(Report::new(manifest, to_value(&analysis)))
}

// ---------------------------------------------------------------- corpus helpers

fn preprocess_config(args: &PreprocessArgs, inputs: &mut Vec<InputRecord>) -> Result<PreprocessConfig> {
    let stopwords = match &args.stopwords {
        Some(path) => {
            let (bytes, record) = read_input(path)?;
            inputs.push(record);
            let text =
                String::from_utf8(bytes).map_err(|_| CliError::schema(path, None, "stopword file is not UTF-8"))?;
            let words: BTreeSet<String> = text
                .split_whitespace()
                .map(|w| if args.case_fold { w.to_lowercase() } else { w.to_string() })
                .collect();
            Some(words)
        }
        None => None,
    };
    Ok(PreprocessConfig {
        case_fold: args.case_fold,
        strip_punctuation: args.strip_punctuation,
        stopwords,
        min_token_length: args.min_token_length,
        lemmatization: false,
    })
}

fn read_text(path: &Path) -> Result<(String, InputRecord)> {
    let (bytes, record) = read_input(path)?;
    let text = String::from_utf8(bytes).map_err(|e| {
        CliError::schema(
            path,
            None,
            format!("input is not UTF-8 (invalid byte at offset {})", e.utf8_error().valid_up_to()),
        )
    })?;
    Ok((text, record))
}

#[derive(Serialize)]
struct CorpusSummary {
    preprocess: PreprocessConfig,
    n_tokens: u64,
    n_types: usize,
}

// ---------------------------------------------------------------- fit

fn parse_families(spec: &str) -> Result<Vec<Family>> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(Family::ALL.to_vec());
    }
    let mut out = Vec::new();
    for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let f = Family::parse(name).ok_or_else(|| {
            let known: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
            CliError::Usage(format!("unknown family `{name}`; expected one of {}", known.join(", ")))
        })?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    if out.len() < 2 {
        return Err(CliError::Usage(format!("--families needs at least two distinct families, got {}", out.len())));
    }
    Ok(out)
}

#[derive(Serialize)]
struct ExcludedFamily {
    family: Family,
    error: String,
}

#[derive(Serialize)]
struct HoldoutFamily {
    family: Family,
    loglik: f64,
    loglik_per_occurrence: f64,
}

#[derive(Serialize)]
struct HoldoutBlock {
    fraction: f64,
    seed: u64,
    train_n: u64,
    test_n: u64,
    oov_count: u64,
    note: &'static str,
    per_family: Vec<HoldoutFamily>,
    best_family: Family,
}

#[derive(Serialize)]
struct FitAnalysis {
    source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    corpus: Option<CorpusSummary>,
    n_obs: u64,
    observed_ranks: usize,
    max_rank: u64,
    support: u64,
    families: Vec<Family>,
    ranking: Vec<FitResult>,
    excluded: Vec<ExcludedFamily>,
    best_by_aic: Family,
    best_by_bic: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    regime: Option<RegimeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    holdout: Option<HoldoutBlock>,
    curves_file: String,
}

/// Tokens standing for a rank table's occurrences, so holdout splitting
/// works the same way for tables and text.
fn occurrences_of(table: &RankTable) -> Vec<String> {
    let mut out = Vec::with_capacity(table.total() as usize);
    for &(rank, n) in table.entries() {
        let label = rank.to_string();
        out.extend(std::iter::repeat_n(label, n as usize));
    }
    out
}

fn cmd_fit(args: &FitArgs, out_dir: &Path) -> Result<(Report, Vec<PathBuf>)> {
    let families = parse_families(&args.families)?;
    let mut inputs = Vec::new();
    let preprocess = preprocess_config(&args.preprocess, &mut inputs)?;

    // Occurrence-level tokens are needed only for holdout splitting.
    let (source, table, tokens, corpus) = if args.raw_text {
        let (text, record) = read_text(&args.input)?;
        inputs.insert(0, record);
        let toks = tokenize(&text, &preprocess);
        let ranked = build_rank_table(&toks);
        let summary = CorpusSummary { preprocess, n_tokens: toks.len() as u64, n_types: ranked.tokens.len() };
        ("raw_text", ranked.table, toks, Some(summary))
    } else {
        let (bytes, record) = read_input(&args.input)?;
        inputs.insert(0, record);
        match io::read_rank_input(&args.input, &bytes)? {
            RankInput::Ranks(t) => {
                let toks = if args.holdout.is_some() { occurrences_of(&t) } else { Vec::new() };
                ("rank_table", t, toks, None)
            }
            RankInput::Tokens(c) => {
                let toks = if args.holdout.is_some() { occurrences_of(&c.table) } else { Vec::new() };
                ("token_table", c.table, toks, None)
            }
        }
    };
    if table.total() == 0 {
        return Err(CliError::schema(&args.input, None, "no observations to fit"));
    }

    let (fit_table, holdout_parts) = match args.holdout {
        Some(fraction) => {
            let split = split_holdout(&tokens, fraction, args.seed)?;
            (split.train.table.clone(), Some((fraction, split)))
        }
        None => (table.clone(), None),
    };
    let support = match args.support {
        Some(v) if v < fit_table.max_rank() => {
            return Err(CliError::Usage(format!(
                "--support {v} is below the largest observed rank {}",
                fit_table.max_rank()
            )))
        }
        Some(v) => v,
        None => fit_table.max_rank(),
    };
    let config =
        FitConfig { starts_per_dim: args.starts_per_dim, local_searches: args.local_searches, ..FitConfig::default() };
    let selection = model_select(&fit_table, &families, support, &config)?;
    let best_by_bic = selection
        .ranked
        .iter()
        .min_by(|a, b| a.bic.total_cmp(&b.bic).then(a.k.cmp(&b.k)).then(a.family().name().cmp(b.family().name())))
        .expect("model_select returns at least one fit")
        .family();

    let be_fit = selection.get(Family::BeRank);
    let regime = match be_fit {
        Some(fit) => Some(zipf_regime_report(&fit.spec, 1, fit_table.max_rank())?),
        None => None,
    };

    let holdout = match holdout_parts {
        Some((fraction, split)) => {
            let test_n = split.test.total();
            let per_family = selection
                .ranked
                .iter()
                .map(|fit| {
                    let ll = holdout_loglik(fit, &split.test)?;
                    let per = if test_n > 0 { ll / test_n as f64 } else { 0.0 };
                    Ok(HoldoutFamily { family: fit.family(), loglik: ll, loglik_per_occurrence: per })
                })
                .collect::<Result<Vec<_>>>()?;
            let best_family = per_family
                .iter()
                .max_by(|a, b| a.loglik.total_cmp(&b.loglik).then(b.family.name().cmp(a.family.name())))
                .expect("at least one family")
                .family;
            Some(HoldoutBlock {
                fraction,
                seed: args.seed,
                train_n: split.train.table.total(),
                test_n,
                oov_count: split.oov_count,
                note: "held-out occurrences of types unseen in training are counted in oov_count and excluded \
                       from every likelihood",
                per_family,
                best_family,
            })
        }
        None => None,
    };

    let curves_path = out_dir.join("fit_curves.csv");
    write_fit_curves(&curves_path, &fit_table, support, &selection.ranked)?;

    let analysis = FitAnalysis {
        source,
        corpus,
        n_obs: fit_table.total(),
        observed_ranks: fit_table.observed_ranks(),
        max_rank: fit_table.max_rank(),
        support,
        families,
        best_by_aic: selection.best().family(),
        best_by_bic,
        excluded: selection
            .excluded
            .iter()
            .map(|(family, e)| ExcludedFamily { family: *family, error: e.to_string() })
            .collect(),
        ranking: selection.ranked,
        regime,
        holdout,
        curves_file: "fit_curves.csv".into(),
    };
    let manifest = Manifest::new("fit", inputs, to_value(args), json!({ "holdout_split": args.seed }));
    Ok((Report::new(manifest, to_value(&analysis)), vec![curves_path]))
}

/// `rank, observed, expected_<FAMILY>...` plus, when BE was fitted, its two
/// closed-form approximants on the same normalization.
fn write_fit_curves(path: &Path, table: &RankTable, support: u64, fits: &[FitResult]) -> Result<()> {
    let n = table.total() as f64;
    let mut header = vec!["rank".to_string(), "observed".to_string()];
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for fit in fits {
        header.push(format!("expected_{}", fit.family().name()));
        columns.push(pmf_vector(&fit.spec)?.into_iter().map(|p| n * p).collect());
    }
    if let Some(be) = fits.iter().find(|f| f.family() == Family::BeRank) {
        let (a, b) = (be.spec.params[0], be.spec.params[1]);
        let z: f64 = (1..=support).map(|i| be_occupancy(a, b, i)).sum::<bellrank_core::Result<f64>>()?;
        header.push("be_small_i_approx".into());
        columns.push(
            (1..=support)
                .map(|i| be_small_i_approx(a, b, i).map(|v| n * v / z))
                .collect::<bellrank_core::Result<_>>()?,
        );
        header.push("be_tail_approx".into());
        columns.push(
            (1..=support).map(|i| be_tail_approx(a, b, i).map(|v| n * v / z)).collect::<bellrank_core::Result<_>>()?,
        );
    }
    let mut observed = vec![0.0; support as usize];
    for &(r, c) in table.entries() {
        observed[r as usize - 1] = c as f64;
    }
    let rows: Vec<Vec<f64>> = (0..support as usize)
        .map(|i| {
            let mut row = vec![(i + 1) as f64, observed[i]];
            row.extend(columns.iter().map(|c| c[i]));
            row
        })
        .collect();
    io::write_series_csv(path, &header, &rows)
}

// ---------------------------------------------------------------- simulate

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Scenario {
    PrBox,
    Singlet { angles: SingletAngles },
    Lhv { weights: Vec<f64> },
}

#[derive(Serialize)]
struct TruthBlock {
    behavior: BehaviorView,
    chsh: ChshReport,
}

#[derive(Serialize)]
struct EmpiricalBlock {
    counts: BTreeMap<String, [u64; 4]>,
    n_trials: u64,
    chsh: ChshReport,
}

#[derive(Serialize)]
struct ProtocolBlock {
    session_policy: SessionPolicy,
    n_trials: u64,
    log_file: String,
}

#[derive(Serialize)]
struct SimulateAnalysis {
    scenario: Scenario,
    visibility: f64,
    sampling: &'static str,
    truth: TruthBlock,
    empirical: Option<EmpiricalBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    protocol: Option<ProtocolBlock>,
    counts_file: String,
}

fn cmd_simulate(args: &SimulateArgs, out_dir: &Path) -> Result<(Report, Vec<PathBuf>)> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let (scenario, base) = if args.pr_box {
        (Scenario::PrBox, pr_box_behavior())
    } else if let Some(a) = &args.singlet {
        let angles = SingletAngles::try_new(a[0], a[1], a[2], a[3])?;
        (Scenario::Singlet { angles }, singlet_behavior(&angles))
    } else if let Some(w) = &args.lhv {
        let weights: [f64; STRATEGY_COUNT] = w.as_slice().try_into().map_err(|_| {
            CliError::Usage(format!("--lhv needs {STRATEGY_COUNT} comma-separated weights, got {}", w.len()))
        })?;
        (Scenario::Lhv { weights: w.clone() }, lhv_behavior(&weights)?)
    } else {
        return Err(CliError::Usage("choose one of --pr-box, --singlet, --lhv".into()));
    };
    if args.protocol && args.visibility != 1.0 {
        return Err(CliError::Usage("--protocol does not support --visibility".into()));
    }
    let behavior = mix_with_noise(&base, args.visibility)?;
    let truth =
        TruthBlock { behavior: BehaviorView::new(&behavior), chsh: chsh_report(&correlation_matrix(&behavior)) };

    let mut files = Vec::new();
    let (counts, protocol, sampling) = if args.protocol {
        let weights: [f64; STRATEGY_COUNT] =
            args.lhv.as_deref().expect("clap enforces --lhv").try_into().expect("checked above");
        // The responders' shared seed is derived from, but distinct from, the settings seed.
        let mut alice = SharedStrategyResponder::new(replicate_seed(args.seed, 1), &weights)?;
        let mut bob = alice.clone();
        let policy = SessionPolicy::from(args.session_policy);
        let run = run_protocol(&mut alice, &mut bob, args.n, args.seed, policy)
            .map_err(|e| CliError::Usage(format!("protocol aborted: {e}")))?;
        let log_path = out_dir.join("protocol_log.jsonl");
        io::write_jsonl(&log_path, &run.log)?;
        files.push(log_path);
        let block = ProtocolBlock { session_policy: policy, n_trials: args.n, log_file: "protocol_log.jsonl".into() };
        (run.counts, Some(block), "protocol")
    } else {
        (sample_trials(&behavior, args.n, args.seed)?, None, "multinomial_per_block")
    };
    let empirical = normalize_counts(&counts).ok().map(|b| EmpiricalBlock {
        counts: counts_view(&counts),
        n_trials: counts.total(),
        chsh: chsh_report(&correlation_matrix(&b)),
    });
    let counts_path = out_dir.join("counts.csv");
    io::write_counts_csv(&counts_path, &counts)?;
    files.insert(0, counts_path);

    let analysis = SimulateAnalysis {
        scenario,
        visibility: args.visibility,
        sampling,
        truth,
        empirical,
        protocol,
        counts_file: "counts.csv".into(),
    };
    let manifest = Manifest::new("simulate", Vec::new(), to_value(args), json!({ "seed": args.seed }));
    Ok((Report::new(manifest, to_value(&analysis)), files))
}

// ---------------------------------------------------------------- corpus

#[derive(Serialize)]
struct CorpusAnalysis {
    preprocess: PreprocessConfig,
    n_tokens: u64,
    n_types: usize,
    top_tokens: Vec<TokenRank>,
    rank_table_file: String,
    token_map_file: String,
    config_file: String,
}

fn cmd_corpus(args: &CorpusArgs, out_dir: &Path) -> Result<(Report, Vec<PathBuf>)> {
    let mut inputs = Vec::new();
    let mut text = String::new();
    for path in &args.inputs {
        let (t, record) = read_text(path)?;
        inputs.push(record);
        text.push_str(&t);
        text.push('\n');
    }
    let preprocess = preprocess_config(&args.preprocess, &mut inputs)?;
    let tokens = tokenize(&text, &preprocess);
    let ranked: RankedCorpus = build_rank_table(&tokens);

    let rank_path = out_dir.join("rank_table.csv");
    let map_path = out_dir.join("token_map.csv");
    let config_path = out_dir.join("preprocess_config.json");
    io::write_rank_table_csv(&rank_path, &ranked.table)?;
    io::write_token_map_csv(&map_path, &ranked)?;
    let mut config_json = serde_json::to_string_pretty(&preprocess).expect("config serializes");
    config_json.push('\n');
    io::write_file(&config_path, config_json.as_bytes())?;

    let analysis = CorpusAnalysis {
        n_tokens: tokens.len() as u64,
        n_types: ranked.tokens.len(),
        top_tokens: ranked.tokens.iter().take(20).cloned().collect(),
        preprocess,
        rank_table_file: "rank_table.csv".into(),
        token_map_file: "token_map.csv".into(),
        config_file: "preprocess_config.json".into(),
    };
    let manifest = Manifest::new("corpus", inputs, to_value(args), Value::Object(Default::default()));
    Ok((Report::new(manifest, to_value(&analysis)), vec![rank_path, map_path, config_path]))
}
