//! Command-line front end and the oracle self-checks.
//!
//! Three subcommands: `plan` prints a staged pipeline with closed-form
//! probabilities, `simulate` replays it on explicit states and insists
//! the two agree, and `oracle` runs independent cross-checks of the
//! closed forms against raw circuit simulations. JSON in, JSON out;
//! reports are deterministic byte-for-byte so they can be diffed.
//!
//! Exit codes: 0 on success, 1 when numbers fail a check (fidelity below
//! the bar, a stage off its closed form, an oracle deviation), 2 when
//! arguments or input files cannot be used.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditional::{erase_to_single_mode, quantum_scissors, scissors_resource, QndBackend};
use crate::elements::{
    apply_beam_splitter, apply_beam_splitter_polarized, subtract_photon, BeamSplitterParams,
};
use crate::fock::{
    binomial, make_state, C64, Caps, FockState, ModeLabel, ModeRegistry, DEFAULT_PRUNE,
};
use crate::planner::{
    estimate_resources, plan, simulate, DeviceKind, DevicePlan, GateSuccess, PlanConfig,
    PlanResult, PrepPlan, Scheme, TargetSpec, TargetTerm,
};
use crate::solver::{forward_multi, forward_two_term, invert_multi};

#[derive(Parser)]
#[command(name = "heralded", version, about = "Plan and simulate heralded multimode state preparation")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Pick sources and closed-form stage probabilities for a target.
    Plan(RunArgs),
    /// Plan, then replay the pipeline on explicit states and cross-check
    /// every stage against its closed form.
    Simulate(RunArgs),
    /// Independent consistency checks of the closed forms.
    Oracle(OracleArgs),
}

const ROOT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Args)]
struct RunArgs {
    /// JSON target description.
    spec: PathBuf,
    /// Preparation layout; inferred from the target's shape when omitted.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    /// Subtraction coupler transmission amplitude.
    #[arg(long, default_value_t = ROOT_HALF)]
    t1: f64,
    /// Subtraction coupler reflection amplitude.
    #[arg(long, default_value_t = ROOT_HALF)]
    r1: f64,
    /// Erasure mixer weight on the first rail.
    #[arg(long, default_value_t = ROOT_HALF)]
    r2: f64,
    /// Erasure mixer weight on the second rail.
    #[arg(long, default_value_t = ROOT_HALF)]
    t2: f64,
    /// Vacuum amplitude seeding every reconstructed source.
    #[arg(long, default_value_t = 1.0)]
    seed_amplitude: f64,
    /// Gate success override, repeatable: NAME=VALUE with NAME one of
    /// qnd, qudit_qnd, bell, ghz, cshift.
    #[arg(long = "gate-success", value_name = "NAME=VALUE")]
    gate_success: Vec<String>,
    /// Cap on photons in flight in any one device.
    #[arg(long, default_value_t = 24)]
    max_total_photons: u32,
    /// Stage agreement bound, and the fidelity bar for exit code 0.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Also write the JSON document to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Which suite: subtraction, two-term, multi-term, scissors, all.
    #[arg(default_value = "all")]
    which: String,
    /// Largest deviation counted as a pass.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    /// Seed for the generated cases.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse::<Scheme>().map_err(|e| e.to_string())
}

/// Parses argv and runs the tool, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let _ = err.print();
            return code;
        }
    };
    match cli.command {
        Commands::Plan(args) => run_plan(&args),
        Commands::Simulate(args) => run_simulate(&args),
        Commands::Oracle(args) => run_oracle(&args),
    }
}

// ---------------------------------------------------------------- JSON io

#[derive(Clone, Copy, Serialize, Deserialize)]
struct CVal {
    re: f64,
    im: f64,
}

impl From<C64> for CVal {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<CVal> for C64 {
    fn from(v: CVal) -> Self {
        C64::new(v.re, v.im)
    }
}

fn cvec(v: &[C64]) -> Vec<CVal> {
    v.iter().map(|&z| z.into()).collect()
}

#[derive(Serialize, Deserialize)]
struct SpecDoc {
    modes: usize,
    max_photons: u32,
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    coeff: CVal,
    factors: Vec<Vec<CVal>>,
}

impl SpecDoc {
    fn to_spec(&self) -> TargetSpec {
        TargetSpec {
            modes: self.modes,
            max_photons: self.max_photons,
            terms: self
                .terms
                .iter()
                .map(|t| TargetTerm {
                    coeff: t.coeff.into(),
                    factors: t
                        .factors
                        .iter()
                        .map(|f| f.iter().map(|&v| v.into()).collect())
                        .collect(),
                })
                .collect(),
        }
    }

    fn from_spec(spec: &TargetSpec) -> Self {
        Self {
            modes: spec.modes,
            max_photons: spec.max_photons,
            terms: spec
                .terms
                .iter()
                .map(|t| TermDoc {
                    coeff: t.coeff.into(),
                    factors: t.factors.iter().map(|f| cvec(f)).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct CouplerDoc {
    t: f64,
    r: f64,
}

#[derive(Serialize)]
struct GateDoc {
    qnd: f64,
    qudit_qnd: f64,
    bell: f64,
    ghz: f64,
    cshift: f64,
}

#[derive(Serialize)]
struct ConfigDoc {
    subtraction: CouplerDoc,
    erasure: CouplerDoc,
    seed_amplitude: CVal,
    gate_success: GateDoc,
    qnd_backend: &'static str,
    max_total_photons: u32,
    prune: f64,
    stage_tolerance: f64,
}

impl ConfigDoc {
    fn from_config(c: &PlanConfig) -> Self {
        Self {
            subtraction: CouplerDoc { t: c.subtraction.t(), r: c.subtraction.r() },
            erasure: CouplerDoc { t: c.erasure.t(), r: c.erasure.r() },
            seed_amplitude: c.seed.into(),
            gate_success: GateDoc {
                qnd: c.gate_success.qnd,
                qudit_qnd: c.gate_success.qudit_qnd,
                bell: c.gate_success.bell,
                ghz: c.gate_success.ghz,
                cshift: c.gate_success.cshift,
            },
            qnd_backend: match c.qnd_backend {
                QndBackend::Ideal => "ideal",
                QndBackend::Interferometric => "interferometric",
            },
            max_total_photons: c.max_total_photons,
            prune: c.prune,
            stage_tolerance: c.stage_tolerance,
        }
    }
}

#[derive(Serialize)]
struct TensorDoc {
    dims: Vec<usize>,
    data: Vec<CVal>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum DeviceDoc {
    Polarized {
        label: String,
        output_spatials: Vec<u32>,
        f_input: Vec<CVal>,
        g_input: Vec<CVal>,
    },
    Qudit {
        label: String,
        output_spatials: Vec<u32>,
        inputs: Vec<TensorDoc>,
    },
    Direct {
        label: String,
        output_spatials: Vec<u32>,
        factors: Vec<Vec<CVal>>,
    },
}

impl DeviceDoc {
    fn from_device(dev: &DevicePlan) -> Self {
        let label = dev.label.clone();
        let output_spatials = dev.output_spatials.clone();
        match &dev.kind {
            DeviceKind::Polarized { f_input, g_input } => DeviceDoc::Polarized {
                label,
                output_spatials,
                f_input: cvec(f_input),
                g_input: cvec(g_input),
            },
            DeviceKind::Qudit { inputs } => DeviceDoc::Qudit {
                label,
                output_spatials,
                inputs: inputs
                    .iter()
                    .map(|t| TensorDoc { dims: t.dims().to_vec(), data: cvec(t.as_slice()) })
                    .collect(),
            },
            DeviceKind::Direct { factors } => DeviceDoc::Direct {
                label,
                output_spatials,
                factors: factors.iter().map(|f| cvec(f)).collect(),
            },
        }
    }
}

#[derive(Serialize)]
struct StageDoc {
    label: String,
    probability: f64,
}

#[derive(Serialize)]
struct PlanDoc {
    tool_version: &'static str,
    command: &'static str,
    scheme: String,
    target: SpecDoc,
    config: ConfigDoc,
    devices: Vec<DeviceDoc>,
    stages: Vec<StageDoc>,
    schmidt_ranks: Vec<usize>,
    total_probability: f64,
    photon_budget: u32,
    attempts_no_memory: f64,
    attempts_with_memory: f64,
}

#[derive(Serialize)]
struct StageReportDoc {
    label: String,
    analytic: f64,
    simulated: f64,
}

#[derive(Serialize)]
struct KetDoc {
    occupation: Vec<u8>,
    amplitude: CVal,
}

#[derive(Serialize)]
struct SimDoc {
    tool_version: &'static str,
    command: &'static str,
    scheme: String,
    target: SpecDoc,
    config: ConfigDoc,
    fidelity: f64,
    total_probability: f64,
    attempts_no_memory: f64,
    attempts_with_memory: f64,
    schmidt_ranks: Vec<usize>,
    stages: Vec<StageReportDoc>,
    state: Vec<KetDoc>,
}

fn plan_doc(prep: &PrepPlan) -> PlanResult<PlanDoc> {
    let probs: Vec<f64> = prep.stages.iter().map(|s| s.probability).collect();
    Ok(PlanDoc {
        tool_version: env!("CARGO_PKG_VERSION"),
        command: "plan",
        scheme: prep.scheme.to_string(),
        target: SpecDoc::from_spec(&prep.spec),
        config: ConfigDoc::from_config(&prep.config),
        devices: prep.devices.iter().map(DeviceDoc::from_device).collect(),
        stages: prep
            .stages
            .iter()
            .map(|s| StageDoc { label: s.label.clone(), probability: s.probability })
            .collect(),
        schmidt_ranks: prep.schmidt_ranks.clone(),
        total_probability: prep.total_probability,
        photon_budget: prep.photon_budget,
        attempts_no_memory: estimate_resources(&probs, false)?,
        attempts_with_memory: estimate_resources(&probs, true)?,
    })
}

fn emit<T: Serialize>(doc: &T, path: Option<&Path>) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| e.to_string())?;
    text.push('\n');
    print!("{text}");
    if let Some(p) = path {
        fs::write(p, &text).map_err(|e| format!("cannot write {}: {e}", p.display()))?;
    }
    Ok(())
}

// ------------------------------------------------------------ subcommands

fn apply_gate_overrides(gate: &mut GateSuccess, overrides: &[String]) -> Result<(), String> {
    for spec in overrides {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| format!("gate override '{spec}' is not NAME=VALUE"))?;
        let value: f64 = value
            .parse()
            .map_err(|_| format!("gate override '{spec}' has a non-numeric value"))?;
        match name {
            "qnd" => gate.qnd = value,
            "qudit_qnd" => gate.qudit_qnd = value,
            "bell" => gate.bell = value,
            "ghz" => gate.ghz = value,
            "cshift" => gate.cshift = value,
            other => return Err(format!("unknown gate '{other}'")),
        }
    }
    Ok(())
}

fn prepare(args: &RunArgs) -> Result<PrepPlan, String> {
    let text = fs::read_to_string(&args.spec)
        .map_err(|e| format!("cannot read {}: {e}", args.spec.display()))?;
    let doc: SpecDoc = serde_json::from_str(&text)
        .map_err(|e| format!("cannot parse {}: {e}", args.spec.display()))?;
    let spec = doc.to_spec();
    let subtraction = BeamSplitterParams::new(args.t1, args.r1).map_err(|e| e.to_string())?;
    let erasure = BeamSplitterParams::new(args.t2, args.r2).map_err(|e| e.to_string())?;
    let mut gate_success = GateSuccess::default();
    apply_gate_overrides(&mut gate_success, &args.gate_success)?;
    let config = PlanConfig {
        subtraction,
        erasure,
        seed: C64::new(args.seed_amplitude, 0.0),
        gate_success,
        qnd_backend: QndBackend::Ideal,
        max_total_photons: args.max_total_photons,
        prune: DEFAULT_PRUNE,
        stage_tolerance: args.tolerance,
    };
    let scheme = args.scheme.unwrap_or_else(|| Scheme::choose(&spec));
    plan(&spec, scheme, &config).map_err(|e| e.to_string())
}

fn run_plan(args: &RunArgs) -> i32 {
    let prep = match prepare(args) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let doc = match plan_doc(&prep) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(msg) = emit(&doc, args.report.as_deref()) {
        eprintln!("error: {msg}");
        return 2;
    }
    0
}

fn run_simulate(args: &RunArgs) -> i32 {
    let prep = match prepare(args) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let outcome = match simulate(&prep) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let report = &outcome.report;
    let doc = SimDoc {
        tool_version: env!("CARGO_PKG_VERSION"),
        command: "simulate",
        scheme: report.scheme.to_string(),
        target: SpecDoc::from_spec(&prep.spec),
        config: ConfigDoc::from_config(&prep.config),
        fidelity: report.fidelity,
        total_probability: report.total_probability,
        attempts_no_memory: report.attempts_no_memory,
        attempts_with_memory: report.attempts_with_memory,
        schmidt_ranks: report.schmidt_ranks.clone(),
        stages: report
            .stages
            .iter()
            .map(|s| StageReportDoc {
                label: s.label.clone(),
                analytic: s.analytic,
                simulated: s.simulated,
            })
            .collect(),
        state: outcome
            .state
            .iter()
            .map(|(occ, amp)| KetDoc { occupation: occ.clone(), amplitude: (*amp).into() })
            .collect(),
    };
    if let Err(msg) = emit(&doc, args.report.as_deref()) {
        eprintln!("error: {msg}");
        return 2;
    }
    eprintln!(
        "fidelity {:.12}, success probability {:.6e}",
        report.fidelity, report.total_probability
    );
    if report.fidelity >= 1.0 - args.tolerance {
        0
    } else {
        1
    }
}

fn run_oracle(args: &OracleArgs) -> i32 {
    let reports = match args.which.as_str() {
        "subtraction" => oracle_subtraction(args.seed).map(|r| vec![r]),
        "two-term" => oracle_two_term(args.seed).map(|r| vec![r]),
        "multi-term" => oracle_multi_term(args.seed).map(|r| vec![r]),
        "scissors" => oracle_scissors(args.seed).map(|r| vec![r]),
        "all" => oracle_all(args.seed),
        other => {
            eprintln!("error: unknown oracle suite '{other}'");
            return 2;
        }
    };
    let reports = match reports {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let mut worst: f64 = 0.0;
    for r in &reports {
        let verdict = if r.max_deviation <= args.tolerance { "ok" } else { "FAIL" };
        println!(
            "oracle {}: {} cases, max deviation {:.3e} ({verdict})",
            r.name, r.cases, r.max_deviation
        );
        worst = worst.max(r.max_deviation);
    }
    if worst <= args.tolerance {
        0
    } else {
        1
    }
}

// ----------------------------------------------------------------- oracles

/// Outcome of one oracle suite: how many scalar comparisons ran and the
/// largest absolute deviation seen.
#[derive(Clone, Debug)]
pub struct OracleReport {
    pub name: &'static str,
    pub cases: usize,
    pub max_deviation: f64,
}

struct Deviation {
    cases: usize,
    max: f64,
}

impl Deviation {
    fn new() -> Self {
        Self { cases: 0, max: 0.0 }
    }

    fn record(&mut self, dev: f64) {
        self.cases += 1;
        self.max = self.max.max(dev);
    }

    fn into_report(self, name: &'static str) -> OracleReport {
        OracleReport { name, cases: self.cases, max_deviation: self.max }
    }
}

fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
}

fn single_mode_state(amps: &[C64], cap: u32) -> PlanResult<FockState> {
    let registry = ModeRegistry::scalars(&[0])?;
    let kets: Vec<(Vec<u8>, C64)> =
        amps.iter().enumerate().map(|(n, &a)| (vec![n as u8], a)).collect();
    Ok(FockState::from_kets(registry, Caps::new(cap, cap), &kets)?)
}

/// Heralded k-photon subtraction against its closed form
/// `out_n = sqrt(C(n+k, k)) t^n r^k in_{n+k}`.
pub fn oracle_subtraction(seed: u64) -> PlanResult<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = BeamSplitterParams::from_transmittance(0.64)?;
    let (t, r) = (params.t(), params.r());
    let mut dev = Deviation::new();
    for len in 2..=7usize {
        let amps: Vec<C64> = (0..len).map(|_| rand_c(&mut rng)).collect();
        let state = single_mode_state(&amps, 8)?;
        for k in 0..=2u8 {
            let res = subtract_photon(&state, ModeLabel::scalar(0), k, params)?;
            let mut expected_norm = 0.0;
            for n in 0..len.saturating_sub(k as usize) {
                let want = amps[n + k as usize]
                    * binomial((n + k as usize) as u32, k as u32).sqrt()
                    * t.powi(n as i32)
                    * r.powi(k as i32);
                expected_norm += want.norm_sqr();
                dev.record((res.state.amplitude(&[n as u8]) - want).norm());
            }
            let in_norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            dev.record((res.probability - expected_norm / in_norm).abs());
        }
    }
    Ok(dev.into_report("subtraction"))
}

/// The two-branch forward map against the explicit circuit: polarized
/// source, subtraction tap, ideal presence detection, erasure to one
/// rail. Both herald branches are compared amplitude by amplitude.
pub fn oracle_two_term(seed: u64) -> PlanResult<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sub = BeamSplitterParams::from_transmittance(0.55)?;
    let mix = BeamSplitterParams::from_transmittance(0.35)?;
    let (t1, r1) = (sub.t(), sub.r());
    let (t2, r2) = (mix.t(), mix.r());
    let mut dev = Deviation::new();
    for n in 0..=3usize {
        let f_src: Vec<C64> = (0..n + 2).map(|_| rand_c(&mut rng)).collect();
        let g_src: Vec<C64> = (0..n + 2).map(|_| rand_c(&mut rng)).collect();
        let (f_exp, g_exp) = forward_two_term(&f_src, &g_src, t1, r1, t2, r2, 2 * n + 4);

        let registry = ModeRegistry::polarized(&[0])?;
        let caps = Caps::new(16, 16);
        let source = make_state(
            &registry,
            caps,
            &[(C64::new(1.0, 0.0), vec![f_src.clone(), g_src.clone()])],
        )?;
        let opened = source.add_vacuum_modes(&[ModeLabel::v(1), ModeLabel::h(1)])?;
        let tapped = apply_beam_splitter_polarized(&opened, 0, 1, sub, 0.0)?;
        let picked =
            tapped.project_photon_total(&[ModeLabel::v(1), ModeLabel::h(1)], 1)?;
        let erased = erase_to_single_mode(
            &picked,
            &[ModeLabel::v(0), ModeLabel::h(0)],
            &[r2, t2],
        )?;
        let merged = erased.state.relabel(&[(ModeLabel::v(0), ModeLabel::scalar(0))])?;
        let f_branch =
            merged.project_counts(&[ModeLabel::v(1), ModeLabel::h(1)], &[1, 0])?;
        let g_branch =
            merged.project_counts(&[ModeLabel::v(1), ModeLabel::h(1)], &[0, 1])?;
        for (m, &want) in f_exp.iter().enumerate() {
            dev.record((f_branch.amplitude(&[m as u8]) - want).norm());
        }
        for (m, &want) in g_exp.iter().enumerate() {
            dev.record((g_branch.amplitude(&[m as u8]) - want).norm());
        }
    }
    Ok(dev.into_report("two-term"))
}

/// Three-branch reconstruction: invert random targets, push the sources
/// through an explicit three-register circuit with presence detection and
/// a balanced merge, and compare every herald branch against the forward
/// closed form (whose truncation must in turn equal the targets).
pub fn oracle_multi_term(seed: u64) -> PlanResult<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sub = BeamSplitterParams::from_transmittance(0.58)?;
    let (t1, r1) = (sub.t(), sub.r());
    let d = 3usize;
    let seeds = [C64::new(1.0, 0.0), C64::new(0.7, 0.2), C64::new(1.3, -0.4)];
    let mut dev = Deviation::new();

    let targets: Vec<Vec<C64>> =
        (0..d).map(|_| (0..3).map(|_| rand_c(&mut rng)).collect()).collect();
    let sources = invert_multi(&targets, t1, r1, &seeds)?;
    let merged_exp = forward_multi(&sources, t1, r1, 3 * d)?;
    for (j, target) in targets.iter().enumerate() {
        for (n, &want) in target.iter().enumerate() {
            dev.record((merged_exp[j][n] - want).norm());
        }
    }

    let caps = Caps::new(12, 12);
    let mut st: Option<FockState> = None;
    for (k, src) in sources.iter().enumerate() {
        let registry = ModeRegistry::scalars(&[k as u32])?;
        let kets: Vec<(Vec<u8>, C64)> =
            src.iter().enumerate().map(|(n, &a)| (vec![n as u8], a)).collect();
        let branch = FockState::from_kets(registry, caps, &kets)?;
        st = Some(match st {
            None => branch,
            Some(acc) => acc.tensor(&branch)?,
        });
    }
    let mut st = st.expect("three branches");
    for k in 0..d {
        let x = ModeLabel::scalar((d + k) as u32);
        st = st.add_vacuum_modes(&[x])?;
        st = apply_beam_splitter(&st, ModeLabel::scalar(k as u32), x, sub, 0.0)?;
    }
    let x_modes: Vec<ModeLabel> =
        (0..d).map(|k| ModeLabel::scalar((d + k) as u32)).collect();
    st = st.project_photon_total(&x_modes, 1)?;
    let group: Vec<ModeLabel> = (0..d).map(|k| ModeLabel::scalar(k as u32)).collect();
    let weights = vec![1.0 / (d as f64).sqrt(); d];
    let erased = erase_to_single_mode(&st, &group, &weights)?;
    for j in 0..d {
        let pattern: Vec<u8> = (0..d).map(|k| u8::from(k == j)).collect();
        let branch = erased.state.project_counts(&x_modes, &pattern)?;
        for (n, &want) in merged_exp[j].iter().enumerate() {
            dev.record((branch.amplitude(&[n as u8]) - want).norm());
        }
    }
    Ok(dev.into_report("multi-term"))
}

/// Truncation herald probabilities against their closed form, and the
/// scissors map itself against scaled truncation of random inputs.
pub fn oracle_scissors(seed: u64) -> PlanResult<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pinned = [1.0, 0.25, 0.1, 3.0 / 64.0, 3.0 / 128.0];
    let mut dev = Deviation::new();
    for n in 0..=4u32 {
        let resource = scissors_resource(n);
        dev.record((resource.success_probability - pinned[n as usize]).abs());

        let len = 2 * n as usize + 2;
        let amps: Vec<C64> = (0..len).map(|_| rand_c(&mut rng)).collect();
        let state = single_mode_state(&amps, len as u32)?;
        let cut = quantum_scissors(&state, ModeLabel::scalar(0), n)?;
        let scale = resource.success_probability.sqrt();
        let mut kept_norm = 0.0;
        for (m, &a) in amps.iter().enumerate() {
            let want = if m <= n as usize { a * scale } else { C64::default() };
            if m <= n as usize {
                kept_norm += a.norm_sqr();
            }
            dev.record((cut.state.amplitude(&[m as u8]) - want).norm());
        }
        let in_norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let expected_p = resource.success_probability * kept_norm / in_norm;
        dev.record((cut.probability - expected_p).abs());
    }
    Ok(dev.into_report("scissors"))
}

/// Every suite, in a fixed order.
pub fn oracle_all(seed: u64) -> PlanResult<Vec<OracleReport>> {
    Ok(vec![
        oracle_subtraction(seed)?,
        oracle_two_term(seed)?,
        oracle_multi_term(seed)?,
        oracle_scissors(seed)?,
    ])
}
