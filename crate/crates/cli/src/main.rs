// Copyright 2026 The sqpc-sim Developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `sqpc`: protocol runs, attack evaluation, scenario histograms and the
//! efficiency table, with fully deterministic seeding.
//!
//! Exit codes: 0 verdict produced (or report written), 2 detection abort,
//! 3 insufficient key material, 64 usage or configuration error, 1 I/O
//! failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use sqpc_core::adversary::{
    ancilla_zero_deviation, evaluate, probe_info_metric, AttackReport, AttackSpec, EvalOptions,
};
use sqpc_core::analysis::{
    efficiency_table, efficiency_table_to_csv, efficiency_table_to_text, histogram_to_csv,
    histogram_to_text, measured_efficiency, run_scenario_report, EfficiencyRow, Scenario,
    ScenarioReport, ScenarioSpec, EFFICIENCY_SCHEMA, HISTOGRAM_SCHEMA,
};
use sqpc_core::protocol::{
    finish_run, run_protocol_raw, ProtocolError, RunConfig, Secret, TpStrategy, Transcript, Verdict,
};
use sqpc_core::statevector::BellKind;
use sqpc_core::streams::{names, SeedSplitter};

const EXIT_OK: u8 = 0;
const EXIT_IO: u8 = 1;
const EXIT_DETECTION: u8 = 2;
const EXIT_INSUFFICIENT_KEY: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "sqpc",
    version,
    about = "Semi-quantum private comparison: deterministic protocol simulator and analysis toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one protocol run and emit its transcript.
    Run(RunArgs),
    /// Monte Carlo evaluation of an attack strategy.
    AttackEval(AttackEvalArgs),
    /// Shot histogram of a circuit scenario.
    Histogram(HistogramArgs),
    /// The qubit-efficiency comparison table.
    Efficiency(OutputArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Secret length in bits.
    #[arg(long)]
    n: Option<usize>,
    /// Root seed; every random stream derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Alice's secret: binary ("10110010"), hex ("0xb2"), or "random".
    #[arg(long)]
    secret_a: Option<String>,
    /// Bob's secret, same formats.
    #[arg(long)]
    secret_b: Option<String>,
    /// Channel attack or TP strategy by name (e.g. double-cnot, tp-zmeasure).
    #[arg(long)]
    attack: Option<String>,
    /// TP behavior: honest | z-measure-then-random-publish | fake-z-basis-states.
    #[arg(long)]
    tp: Option<String>,
    /// Violation-rate threshold above which the run aborts.
    #[arg(long)]
    threshold: Option<f64>,
    /// Retries with fresh seed segments when key material runs short.
    #[arg(long)]
    retries: Option<u32>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct AttackEvalArgs {
    /// JSON config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Attack name; one of: none, intercept-resend-leg1, intercept-resend-leg2,
    /// measure-resend-z, measure-resend-bell, measure-resend-bell-random,
    /// double-cnot, collective-identity, collective-constrained,
    /// collective-unconstrained, tp-zmeasure, tp-fake-states.
    #[arg(long)]
    attack: Option<String>,
    /// Secret length per trial.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Independent seeded trials.
    #[arg(long)]
    trials: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct HistogramArgs {
    /// Scenario: bell | reflect-reflect | measure-all | mixed-ops.
    #[arg(long)]
    scenario: String,
    /// Bell kind for the bell scenario: phi-plus | phi-minus | psi-plus | psi-minus.
    #[arg(long)]
    kind: Option<String>,
    /// Apply the re-pairing swap in the prepared group.
    #[arg(long)]
    swapped: bool,
    #[arg(long, default_value_t = 1024)]
    shots: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

/// Config-file counterpart of the run/attack-eval flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    seed: Option<u64>,
    secret_a: Option<String>,
    secret_b: Option<String>,
    attack: Option<String>,
    tp: Option<String>,
    threshold: Option<f64>,
    retries: Option<u32>,
    trials: Option<u64>,
    format: Option<OutputFormat>,
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Detection(ProtocolError),
    InsufficientKey(ProtocolError),
    Protocol(ProtocolError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Detection(_) => EXIT_DETECTION,
            CliError::InsufficientKey(_) => EXIT_INSUFFICIENT_KEY,
            CliError::Protocol(_) => EXIT_IO,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m.clone(),
            CliError::Detection(e) | CliError::InsufficientKey(e) | CliError::Protocol(e) => {
                e.to_string()
            }
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(err: ProtocolError) -> CliError {
        match err {
            ProtocolError::DetectionAbort { .. } => CliError::Detection(err),
            ProtocolError::InsufficientKey { .. } => CliError::InsufficientKey(err),
            ProtocolError::InvalidConfig(_) => CliError::Usage(err.to_string()),
            other => CliError::Protocol(other),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let kind = err.kind();
            let _ = err.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::from(EXIT_OK)
            } else {
                ExitCode::from(EXIT_USAGE)
            };
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::AttackEval(args) => cmd_attack_eval(args),
        Command::Histogram(args) => cmd_histogram(args),
        Command::Efficiency(args) => cmd_efficiency(args),
    };
    match outcome {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(err) => {
            eprintln!("sqpc: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Usage(format!(
            "config {}: {e} (line {}, column {})",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn parse_tp(name: &str) -> Result<TpStrategy, CliError> {
    match name {
        "honest" => Ok(TpStrategy::Honest),
        "z-measure-then-random-publish" | "zmeasure-random-publish" => {
            Ok(TpStrategy::ZMeasureThenRandomPublish)
        }
        "fake-z-basis-states" | "fake-states" => Ok(TpStrategy::FakeZBasisStates),
        other => Err(CliError::Usage(format!(
            "unknown TP strategy {other:?} (expected honest, z-measure-then-random-publish, or fake-z-basis-states)"
        ))),
    }
}

fn parse_secret(
    text: &str,
    n: usize,
    which: &str,
    rng_pool: &mut SecretPool,
) -> Result<Secret, CliError> {
    if text == "random" {
        return Ok(rng_pool.next(n));
    }
    Secret::parse(text, n).map_err(|e| CliError::Usage(format!("--secret-{which}: {e}")))
}

/// Draws random secrets from the run's dedicated stream, in flag order.
struct SecretPool {
    rng: sqpc_core::streams::StreamRng,
}

impl SecretPool {
    fn new(seed: u64) -> SecretPool {
        SecretPool {
            rng: SeedSplitter::new(seed).stream(names::SECRETS),
        }
    }

    fn next(&mut self, n: usize) -> Secret {
        Secret::random(n, &mut self.rng)
    }
}

fn write_output(target: Option<&Path>, body: &str) -> Result<(), CliError> {
    match target {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut body = serde_json::to_string_pretty(value).expect("serializable output");
    body.push('\n');
    body
}

/// Effective run parameters, echoed into every run output document.
#[derive(Debug, Serialize)]
struct EffectiveRunConfig {
    n: usize,
    seed: u64,
    secret_a: String,
    secret_b: String,
    attack: Option<String>,
    tp: TpStrategy,
    threshold: f64,
    retries: u32,
}

/// Probe analysis of the channel attack that ran alongside the transcript.
#[derive(Debug, Serialize)]
struct AttackRunInfo {
    info_metric: f64,
    probe_states_compared: u64,
    ancilla_zero_deviation: f64,
}

#[derive(Debug, Serialize)]
struct RunOutput {
    schema: String,
    effective_config: EffectiveRunConfig,
    /// 1 + the number of insufficient-key retries consumed.
    attempts_used: u32,
    attack_info: Option<AttackRunInfo>,
    transcript: Transcript,
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let file = load_file_config(args.config.as_deref())?;
    let n = args.n.or(file.n).unwrap_or(8);
    let seed = args.seed.or(file.seed).unwrap_or(1);
    let threshold = args.threshold.or(file.threshold).unwrap_or(0.0);
    let retries = args.retries.or(file.retries).unwrap_or(0);
    let attack_name = args.attack.or(file.attack);
    let tp_name = args.tp.or(file.tp);
    let format = args
        .output
        .format
        .or(file.format)
        .unwrap_or(OutputFormat::Json);
    let output = args.output.output.or(file.output);

    let mut secrets = SecretPool::new(seed);
    let secret_a_text = args
        .secret_a
        .or(file.secret_a)
        .unwrap_or_else(|| "random".into());
    let secret_b_text = args
        .secret_b
        .or(file.secret_b)
        .unwrap_or_else(|| "random".into());
    let secret_a = parse_secret(&secret_a_text, n, "a", &mut secrets)?;
    let secret_b = parse_secret(&secret_b_text, n, "b", &mut secrets)?;

    // An attack name may denote a channel strategy or a TP strategy.
    let mut tp_strategy = match tp_name.as_deref() {
        Some(name) => parse_tp(name)?,
        None => TpStrategy::Honest,
    };
    let attack_spec = match attack_name.as_deref() {
        None | Some("none") => None,
        Some(name) => {
            let spec = AttackSpec::parse(name).map_err(|e| CliError::Usage(e.to_string()))?;
            if spec.tp_strategy() != TpStrategy::Honest {
                if tp_name.is_some() && tp_strategy != spec.tp_strategy() {
                    return Err(CliError::Usage(format!(
                        "--attack {name} conflicts with the --tp flag"
                    )));
                }
                tp_strategy = spec.tp_strategy();
                None
            } else {
                Some(spec)
            }
        }
    };

    let splitter = SeedSplitter::new(seed);
    let mut attempts_used = 0;
    let mut last_err: Option<ProtocolError> = None;
    let mut outcome: Option<(Transcript, Option<AttackRunInfo>)> = None;
    for attempt in 0..=retries {
        let attempt_seed = if attempt == 0 {
            seed
        } else {
            splitter.derive_seed("retry", u64::from(attempt))
        };
        let config = RunConfig {
            n,
            seed: attempt_seed,
            secret_a: secret_a.clone(),
            secret_b: secret_b.clone(),
            tp_strategy,
            threshold,
            continue_on_detection: false,
        };
        let mut sampler = splitter.stream("attack-sampler");
        let mut attack = attack_spec.and_then(|spec| spec.build(&mut sampler));
        attempts_used = attempt + 1;
        let raw = run_protocol_raw(
            &config,
            attack
                .as_mut()
                .map(|a| a.as_mut() as &mut dyn sqpc_core::protocol::AttackStrategy),
        )?;
        let attack_info = attack.as_ref().map(|a| {
            let (info_metric, probe_states_compared) = probe_info_metric(&raw, a.as_ref());
            AttackRunInfo {
                info_metric,
                probe_states_compared,
                ancilla_zero_deviation: ancilla_zero_deviation(&raw, a.as_ref()),
            }
        });
        let attack_name = attack.as_ref().map(|a| a.name());
        match finish_run(&config, attack_name, raw) {
            Ok(t) => {
                outcome = Some((t, attack_info));
                last_err = None;
                break;
            }
            Err(err @ ProtocolError::InsufficientKey { .. }) => {
                last_err = Some(err);
            }
            Err(other) => return Err(other.into()),
        }
    }
    let (transcript, attack_info) = match outcome {
        Some(pair) => pair,
        None => return Err(last_err.expect("an error or a transcript").into()),
    };

    let effective = EffectiveRunConfig {
        n,
        seed,
        secret_a: secret_a.to_binary_string(),
        secret_b: secret_b.to_binary_string(),
        attack: transcript
            .attack
            .clone()
            .or_else(|| attack_spec.map(|s| s.name().to_string())),
        tp: tp_strategy,
        threshold,
        retries,
    };
    let body = match format {
        OutputFormat::Json => to_pretty_json(&RunOutput {
            schema: "sqpc.run_output.v1".to_string(),
            effective_config: effective,
            attempts_used,
            attack_info,
            transcript,
        }),
        OutputFormat::Text => {
            run_to_text(&effective, attempts_used, attack_info.as_ref(), &transcript)
        }
        OutputFormat::Csv => run_to_csv(&effective, &transcript),
    };
    write_output(output.as_deref(), &body)
}

fn run_to_text(
    effective: &EffectiveRunConfig,
    attempts: u32,
    attack_info: Option<&AttackRunInfo>,
    t: &Transcript,
) -> String {
    let eta = measured_efficiency(&t.counters);
    let verdict = match t.comparison.verdict {
        Verdict::Equal => "equal",
        Verdict::NotEqual => "not-equal",
    };
    let mut out = String::new();
    out.push_str(&format!(
        "run n={} seed={} attack={} tp={:?} attempts={}\n",
        effective.n,
        effective.seed,
        effective.attack.as_deref().unwrap_or("none"),
        effective.tp,
        attempts,
    ));
    out.push_str(&format!("verdict: {verdict}\n"));
    out.push_str(&format!(
        "violations: {}/{} checks\n",
        t.violations.violations(),
        t.violations.events()
    ));
    out.push_str(&format!(
        "keys: |k_ab|={} |k_ta|={} |k_tb|={} (agreement: {} {} {})\n",
        t.keys.k_ab.len(),
        t.keys.k_ta.len(),
        t.keys.k_tb.len(),
        t.key_agreement.k_ab,
        t.key_agreement.k_ta,
        t.key_agreement.k_tb,
    ));
    out.push_str(&format!(
        "resources: tp_qubits={} regenerated={}+{} comparison_bits={} eta={}\n",
        t.counters.tp_qubits_prepared,
        t.counters.alice_qubits_regenerated,
        t.counters.bob_qubits_regenerated,
        t.counters.comparison_bits_published,
        eta,
    ));
    if let Some(info) = attack_info {
        out.push_str(&format!(
            "attack info: info_metric={:.3e} probes={} ancilla_deviation={:.3e}\n",
            info.info_metric, info.probe_states_compared, info.ancilla_zero_deviation
        ));
    }
    out
}

fn run_to_csv(effective: &EffectiveRunConfig, t: &Transcript) -> String {
    let eta = measured_efficiency(&t.counters);
    let verdict = match t.comparison.verdict {
        Verdict::Equal => "equal",
        Verdict::NotEqual => "not-equal",
    };
    format!(
        "n,seed,attack,tp,verdict,violations,checks,kab_len,kta_len,ktb_len,eta\n\
         {},{},{},{:?},{},{},{},{},{},{},{}\n",
        effective.n,
        effective.seed,
        effective.attack.as_deref().unwrap_or("none"),
        effective.tp,
        verdict,
        t.violations.violations(),
        t.violations.events(),
        t.keys.k_ab.len(),
        t.keys.k_ta.len(),
        t.keys.k_tb.len(),
        eta,
    )
}

fn cmd_attack_eval(args: AttackEvalArgs) -> Result<(), CliError> {
    let file = load_file_config(args.config.as_deref())?;
    let attack_name = args
        .attack
        .or(file.attack)
        .ok_or_else(|| CliError::Usage("attack-eval requires --attack".into()))?;
    let spec = AttackSpec::parse(&attack_name).map_err(|e| CliError::Usage(e.to_string()))?;
    let opts = EvalOptions {
        n: args.n.or(file.n).unwrap_or(8),
        seed: args.seed.or(file.seed).unwrap_or(1),
        trials: args.trials.or(file.trials).unwrap_or(1000),
    };
    let report = evaluate(spec, &opts)?;
    let format = args
        .output
        .format
        .or(file.format)
        .unwrap_or(OutputFormat::Json);
    let output = args.output.output.or(file.output);
    let body = match format {
        OutputFormat::Json => to_pretty_json(&report),
        OutputFormat::Csv => attack_report_to_csv(&report),
        OutputFormat::Text => attack_report_to_text(&report),
    };
    write_output(output.as_deref(), &body)
}

fn attack_report_to_csv(r: &AttackReport) -> String {
    let mut out = String::from(
        "attack,n,seed,trials,detections,detection_rate,ci_low,ci_high,info_metric,\
         class,events,violations\n",
    );
    let base = format!(
        "{},{},{},{},{},{},{},{},{}",
        r.attack,
        r.n,
        r.seed,
        r.trials,
        r.detections,
        r.detection_rate,
        r.detection_ci_low,
        r.detection_ci_high,
        r.info_metric
    );
    if r.per_class.is_empty() {
        out.push_str(&format!("{base},,,\n"));
    }
    for (class, tally) in &r.per_class {
        out.push_str(&format!(
            "{base},{class:?},{},{}\n",
            tally.events, tally.violations
        ));
    }
    out
}

fn attack_report_to_text(r: &AttackReport) -> String {
    let mut out = format!(
        "attack {} over {} trials (n={}, seed={})\n\
         detection rate: {:.4} [{:.4}, {:.4}] ({} trials detected)\n\
         info metric: {:.3e} over {} probe states\n",
        r.attack,
        r.trials,
        r.n,
        r.seed,
        r.detection_rate,
        r.detection_ci_low,
        r.detection_ci_high,
        r.detections,
        r.info_metric,
        r.probe_states_compared,
    );
    if r.tp_kab_bits_total > 0 && r.tp_kab_bits_learned > 0 {
        out.push_str(&format!(
            "k_ab bits learned by TP: {}/{}\n",
            r.tp_kab_bits_learned, r.tp_kab_bits_total
        ));
    }
    for (class, tally) in &r.per_class {
        let rate = if tally.events == 0 {
            0.0
        } else {
            tally.violations as f64 / tally.events as f64
        };
        out.push_str(&format!(
            "  {:?}: {}/{} violated ({:.4})\n",
            class, tally.violations, tally.events, rate
        ));
    }
    out
}

#[derive(Debug, Serialize)]
struct HistogramOutput {
    schema: String,
    report: ScenarioReport,
}

fn parse_kind(name: &str) -> Result<BellKind, CliError> {
    match name {
        "phi-plus" => Ok(BellKind::PhiPlus),
        "phi-minus" => Ok(BellKind::PhiMinus),
        "psi-plus" => Ok(BellKind::PsiPlus),
        "psi-minus" => Ok(BellKind::PsiMinus),
        other => Err(CliError::Usage(format!(
            "unknown Bell kind {other:?} (expected phi-plus, phi-minus, psi-plus, psi-minus)"
        ))),
    }
}

fn cmd_histogram(args: HistogramArgs) -> Result<(), CliError> {
    let scenario = match args.scenario.as_str() {
        "bell" => {
            let kind = parse_kind(args.kind.as_deref().unwrap_or("phi-plus"))?;
            Scenario::BellPrepMeasure { kind }
        }
        "reflect-reflect" => Scenario::ReflectReflect {
            swapped: args.swapped,
        },
        "measure-all" => Scenario::MeasureAll {
            swapped: args.swapped,
        },
        "mixed-ops" => Scenario::MixedOps {
            swapped: args.swapped,
        },
        other => {
            return Err(CliError::Usage(format!(
            "unknown scenario {other:?} (expected bell, reflect-reflect, measure-all, mixed-ops)"
        )))
        }
    };
    let spec = ScenarioSpec {
        scenario,
        shots: args.shots,
        seed: args.seed,
    };
    let report = run_scenario_report(&spec)?;
    let format = args.output.format.unwrap_or(OutputFormat::Json);
    let body = match format {
        OutputFormat::Json => to_pretty_json(&HistogramOutput {
            schema: HISTOGRAM_SCHEMA.to_string(),
            report,
        }),
        OutputFormat::Csv => histogram_to_csv(&report.histogram),
        OutputFormat::Text => histogram_to_text(&report.histogram),
    };
    write_output(args.output.output.as_deref(), &body)
}

#[derive(Debug, Serialize)]
struct EfficiencyOutput {
    schema: String,
    rows: Vec<EfficiencyRow>,
}

fn cmd_efficiency(args: OutputArgs) -> Result<(), CliError> {
    let rows = efficiency_table();
    let format = args.format.unwrap_or(OutputFormat::Json);
    let body = match format {
        OutputFormat::Json => to_pretty_json(&EfficiencyOutput {
            schema: EFFICIENCY_SCHEMA.to_string(),
            rows,
        }),
        OutputFormat::Csv => efficiency_table_to_csv(&rows),
        OutputFormat::Text => efficiency_table_to_text(&rows),
    };
    write_output(args.output.as_deref(), &body)
}
