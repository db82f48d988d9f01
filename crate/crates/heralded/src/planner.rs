//! Turning a target description into a staged heralded pipeline.
//!
//! [`plan`] picks source amplitudes for every device and computes each
//! heralding stage's success probability in closed form, without touching
//! a state vector. [`simulate`] then replays the same pipeline on explicit
//! states and refuses to hand back a report if any stage disagrees with
//! its closed form. Stage probabilities multiply into the overall success
//! rate, which [`estimate_resources`] converts into expected attempt
//! counts with and without a quantum memory holding finished devices.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::conditional::{
    erase_to_single_mode, qnd_single_photon, quantum_scissors, scissors_resource, ProtocolError,
    QndBackend,
};
use crate::elements::{apply_beam_splitter, apply_beam_splitter_polarized, BeamSplitterParams};
use crate::fock::{
    make_state, C64, Caps, FockError, FockState, ModeLabel, ModeRegistry, DEFAULT_PRUNE,
};
use crate::solver::{
    b0_apply, b1_apply, forward_tuple, forward_two_term, invert_tuple, invert_two_term,
    schmidt_split, AmplitudeTensor, SolverError,
};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error(transparent)]
    State(#[from] FockError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("invalid target: {0}")]
    BadSpec(String),
    #[error("scheme {scheme} cannot prepare this target: {reason}")]
    SchemeMismatch { scheme: Scheme, reason: String },
    #[error("unknown scheme name '{0}'")]
    UnknownScheme(String),
    #[error("pipeline needs up to {need} photons in flight, cap is {cap}")]
    PhotonBudget { need: u32, cap: u32 },
    #[error(
        "stage '{stage}': closed-form probability {analytic} and simulated {simulated} disagree"
    )]
    StageMismatch { stage: String, analytic: f64, simulated: f64 },
    #[error("probability {0} must lie in (0, 1]")]
    BadProbability(f64),
}

pub type PlanResult<T> = Result<T, PlanError>;

/// One product term of a target: `coeff * |factors[0]> ... |factors[M-1]>`,
/// where each factor lists Fock amplitudes starting at the vacuum.
#[derive(Clone, Debug)]
pub struct TargetTerm {
    pub coeff: C64,
    pub factors: Vec<Vec<C64>>,
}

/// A target state as a sum of product terms over `modes` scalar modes,
/// with every mode capped at `max_photons`.
#[derive(Clone, Debug)]
pub struct TargetSpec {
    pub modes: usize,
    pub max_photons: u32,
    pub terms: Vec<TargetTerm>,
}

impl TargetSpec {
    pub fn validate(&self) -> PlanResult<()> {
        if self.modes == 0 {
            return Err(PlanError::BadSpec("target needs at least one mode".into()));
        }
        if self.max_photons == 0 {
            return Err(PlanError::BadSpec("per-mode photon cap must be positive".into()));
        }
        if self.terms.is_empty() {
            return Err(PlanError::BadSpec("target needs at least one term".into()));
        }
        let dim = self.max_photons as usize + 1;
        for (j, term) in self.terms.iter().enumerate() {
            if !(term.coeff.re.is_finite() && term.coeff.im.is_finite()) {
                return Err(PlanError::BadSpec(format!("term {j} coefficient is not finite")));
            }
            if term.coeff == C64::default() {
                return Err(PlanError::BadSpec(format!("term {j} coefficient is zero")));
            }
            if term.factors.len() != self.modes {
                return Err(PlanError::BadSpec(format!(
                    "term {j} has {} factors for {} modes",
                    term.factors.len(),
                    self.modes
                )));
            }
            for (m, f) in term.factors.iter().enumerate() {
                if f.is_empty() || f.len() > dim {
                    return Err(PlanError::BadSpec(format!(
                        "term {j} mode {m}: factor length {} outside 1..={dim}",
                        f.len()
                    )));
                }
                if f.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
                    return Err(PlanError::BadSpec(format!(
                        "term {j} mode {m}: non-finite amplitude"
                    )));
                }
                if f.iter().all(|a| *a == C64::default()) {
                    return Err(PlanError::BadSpec(format!(
                        "term {j} mode {m}: factor is identically zero"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The target as an unnormalized state on scalar modes `0..modes`.
    pub fn state(&self) -> PlanResult<FockState> {
        self.validate()?;
        let spatials: Vec<u32> = (0..self.modes as u32).collect();
        let registry = ModeRegistry::scalars(&spatials)?;
        let caps = Caps::new(
            self.max_photons,
            self.max_photons.saturating_mul(self.modes as u32),
        );
        let terms: Vec<(C64, Vec<Vec<C64>>)> =
            self.terms.iter().map(|t| (t.coeff, t.factors.clone())).collect();
        Ok(make_state(&registry, caps, &terms)?)
    }

    /// Per-term factor vectors padded to `max_photons + 1` entries, with
    /// each term's coefficient folded into its mode-0 factor. Downstream
    /// projectors can then use uniform phases.
    fn folded_factors(&self) -> Vec<Vec<Vec<C64>>> {
        let dim = self.max_photons as usize + 1;
        self.terms
            .iter()
            .map(|term| {
                term.factors
                    .iter()
                    .enumerate()
                    .map(|(m, f)| {
                        let scale = if m == 0 { term.coeff } else { C64::new(1.0, 0.0) };
                        let mut v = vec![C64::default(); dim];
                        for (n, &a) in f.iter().enumerate() {
                            v[n] = a * scale;
                        }
                        v
                    })
                    .collect()
            })
            .collect()
    }
}

/// Which preparation layout to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Two terms over two modes: one polarization-encoded device per mode,
    /// joined by a Bell projection.
    TwoTermTwoMode,
    /// Two terms over any number of modes: polarization-encoded devices
    /// joined by a multiparty phase projection.
    TwoTermMultiMode,
    /// Any number of terms over two modes: spatially encoded devices with
    /// one presence register per term.
    DTermTwoMode,
    /// One device per mode, each carrying all terms spatially. Works for
    /// every target; term count drives the ancilla cost.
    General,
    /// Split the mode set in half, factor the coefficient tensor across
    /// the cut, and prepare each half as one multimode device.
    SchmidtRecursive,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::TwoTermTwoMode,
        Scheme::TwoTermMultiMode,
        Scheme::DTermTwoMode,
        Scheme::General,
        Scheme::SchmidtRecursive,
    ];

    /// Picks a layout from the target's shape: the two-term and two-mode
    /// special cases where they apply, the general layout otherwise.
    pub fn choose(spec: &TargetSpec) -> Scheme {
        match (spec.terms.len(), spec.modes) {
            (1, _) => Scheme::General,
            (2, 2) => Scheme::TwoTermTwoMode,
            (2, _) => Scheme::TwoTermMultiMode,
            (_, 2) => Scheme::DTermTwoMode,
            _ => Scheme::General,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scheme::TwoTermTwoMode => "two_term_2mode",
            Scheme::TwoTermMultiMode => "two_term_Mmode",
            Scheme::DTermTwoMode => "d_term_2mode",
            Scheme::General => "general",
            Scheme::SchmidtRecursive => "schmidt_recursive",
        };
        f.write_str(name)
    }
}

impl FromStr for Scheme {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.to_string() == s)
            .ok_or_else(|| PlanError::UnknownScheme(s.to_string()))
    }
}

/// Success factors of the non-deterministic gates, each in `(0, 1]`.
/// Defaults model ideal gates; lower them to study realistic setups.
#[derive(Clone, Copy, Debug)]
pub struct GateSuccess {
    /// Single-photon presence detection on a polarized register.
    pub qnd: f64,
    /// Presence detection across a group of spatial registers.
    pub qudit_qnd: f64,
    /// Two-party polarization projection.
    pub bell: f64,
    /// Multiparty phase projection.
    pub ghz: f64,
    /// Photon-number controlled shift; not used by the planner itself,
    /// carried for network-level estimates on top of finished states.
    pub cshift: f64,
}

impl Default for GateSuccess {
    fn default() -> Self {
        Self { qnd: 1.0, qudit_qnd: 1.0, bell: 1.0, ghz: 1.0, cshift: 1.0 }
    }
}

/// Knobs shared by every device in a plan.
#[derive(Clone, Copy, Debug)]
pub struct PlanConfig {
    /// Tap coupler that routes subtracted photons to presence registers.
    pub subtraction: BeamSplitterParams,
    /// Mixer weights for collapsing a polarized pair to one rail.
    pub erasure: BeamSplitterParams,
    /// Vacuum amplitude assigned to each reconstructed source; any
    /// nonzero value works, the pipeline output is scale-invariant.
    pub seed: C64,
    pub gate_success: GateSuccess,
    /// Backend for presence detection on polarized devices. Spatially
    /// encoded devices always use the ideal projection.
    pub qnd_backend: QndBackend,
    /// Upper bound on photons in flight anywhere in the pipeline.
    pub max_total_photons: u32,
    /// Amplitudes below this are dropped during simulation.
    pub prune: f64,
    /// Allowed gap between a stage's closed-form and simulated
    /// probability before [`simulate`] refuses to report.
    pub stage_tolerance: f64,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            subtraction: BeamSplitterParams::balanced(),
            erasure: BeamSplitterParams::balanced(),
            seed: C64::new(1.0, 0.0),
            gate_success: GateSuccess::default(),
            qnd_backend: QndBackend::default(),
            max_total_photons: 24,
            prune: DEFAULT_PRUNE,
            stage_tolerance: 1e-9,
        }
    }
}

/// What one device feeds into its pipeline.
#[derive(Clone, Debug)]
pub enum DeviceKind {
    /// Two source vectors on one polarized spatial index; the two target
    /// branches ride the V and H rails.
    Polarized { f_input: Vec<C64>, g_input: Vec<C64> },
    /// One source tensor per target branch, each over this device's
    /// group of scalar modes.
    Qudit { inputs: Vec<AmplitudeTensor> },
    /// Single-term targets need no heralding at all: the product state is
    /// emitted directly.
    Direct { factors: Vec<Vec<C64>> },
}

/// One independently prepared block of the pipeline.
#[derive(Clone, Debug)]
pub struct DevicePlan {
    pub label: String,
    /// Scalar indices of the target modes this device delivers.
    pub output_spatials: Vec<u32>,
    pub kind: DeviceKind,
}

/// A heralded step with its closed-form success probability.
#[derive(Clone, Debug)]
pub struct PlanStage {
    pub label: String,
    pub probability: f64,
}

/// Everything needed to run and audit a preparation.
#[derive(Clone, Debug)]
pub struct PrepPlan {
    pub scheme: Scheme,
    pub spec: TargetSpec,
    pub config: PlanConfig,
    pub devices: Vec<DevicePlan>,
    pub stages: Vec<PlanStage>,
    /// Branch counts across the bipartition, one entry per cut taken.
    pub schmidt_ranks: Vec<usize>,
    /// Product of all stage probabilities.
    pub total_probability: f64,
    /// Largest photon total any single device holds at once.
    pub photon_budget: u32,
}

/// One stage as observed by [`simulate`], next to its closed form.
#[derive(Clone, Debug)]
pub struct StageReport {
    pub label: String,
    pub analytic: f64,
    pub simulated: f64,
}

/// Outcome summary of a full simulated preparation.
#[derive(Clone, Debug)]
pub struct PrepReport {
    pub scheme: Scheme,
    /// Overlap with the requested target, in `[0, 1]`.
    pub fidelity: f64,
    /// Product of the simulated stage probabilities.
    pub total_probability: f64,
    pub stages: Vec<StageReport>,
    /// Expected repetitions when every stage must succeed in one shot.
    pub attempts_no_memory: f64,
    /// Expected repetitions when finished stages can be held.
    pub attempts_with_memory: f64,
    pub schmidt_ranks: Vec<usize>,
}

pub struct SimulationOutcome {
    pub report: PrepReport,
    /// The prepared state, normalized, on the target's scalar modes.
    pub state: FockState,
}

/// Expected attempts for a chain of independent heralded stages. Without
/// memory every run must clear all stages at once; with memory each stage
/// is retried on its own and the costs add.
pub fn estimate_resources(probabilities: &[f64], with_memory: bool) -> PlanResult<f64> {
    for &p in probabilities {
        if !(p.is_finite() && 0.0 < p && p <= 1.0) {
            return Err(PlanError::BadProbability(p));
        }
    }
    Ok(if with_memory {
        probabilities.iter().map(|p| 1.0 / p).sum()
    } else {
        probabilities.iter().map(|p| 1.0 / p).product()
    })
}

fn validate_config(config: &PlanConfig) -> PlanResult<()> {
    let g = &config.gate_success;
    for (name, v) in [
        ("qnd", g.qnd),
        ("qudit_qnd", g.qudit_qnd),
        ("bell", g.bell),
        ("ghz", g.ghz),
        ("cshift", g.cshift),
    ] {
        if !(v.is_finite() && 0.0 < v && v <= 1.0) {
            return Err(PlanError::BadSpec(format!(
                "gate success {name}={v} outside (0, 1]"
            )));
        }
    }
    if config.max_total_photons == 0 || config.max_total_photons > 255 {
        return Err(PlanError::BadSpec(format!(
            "photon cap {} outside 1..=255",
            config.max_total_photons
        )));
    }
    if !(config.stage_tolerance.is_finite() && config.stage_tolerance > 0.0) {
        return Err(PlanError::BadSpec("stage tolerance must be positive".into()));
    }
    if !(config.prune.is_finite() && (0.0..1.0).contains(&config.prune)) {
        return Err(PlanError::BadSpec("prune threshold must lie in [0, 1)".into()));
    }
    if config.seed.norm_sqr() == 0.0 || !config.seed.re.is_finite() || !config.seed.im.is_finite()
    {
        return Err(PlanError::BadSpec("seed amplitude must be finite and nonzero".into()));
    }
    Ok(())
}

fn check_scheme(scheme: Scheme, modes: usize, terms: usize) -> PlanResult<()> {
    let ok = match scheme {
        Scheme::TwoTermTwoMode => terms <= 2 && modes == 2,
        Scheme::TwoTermMultiMode => terms <= 2,
        Scheme::DTermTwoMode => modes == 2,
        Scheme::General => true,
        Scheme::SchmidtRecursive => modes >= 2,
    };
    if ok {
        return Ok(());
    }
    Err(PlanError::SchemeMismatch {
        scheme,
        reason: format!("target has {terms} terms over {modes} modes"),
    })
}

fn ensure_probability(label: &str, p: f64) -> PlanResult<()> {
    if !(p.is_finite() && p > 0.0 && p <= 1.0 + 1e-9) {
        return Err(PlanError::BadSpec(format!(
            "stage {label} has unusable success probability {p}"
        )));
    }
    Ok(())
}

fn vec2(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn vec_to_tensor(v: &[C64]) -> AmplitudeTensor {
    AmplitudeTensor::from_vec(&[v.len()], v.to_vec()).expect("length matches its own dims")
}

/// Per-device closed forms plus what the swap overlap needs.
struct DeviceBuild {
    device: DevicePlan,
    stages: Vec<PlanStage>,
    /// Kept-subspace branch tensors, normalized jointly per device.
    branches: Vec<AmplitudeTensor>,
    /// Photons sitting in this device's sources.
    source_total: u32,
}

struct DeviceStats {
    p_qnd: f64,
    p_erase: f64,
    p_scissors: Vec<f64>,
    branches: Vec<AmplitudeTensor>,
}

fn analyze_polarized(
    f_src: &[C64],
    g_src: &[C64],
    n_keep: u32,
    config: &PlanConfig,
) -> PlanResult<DeviceStats> {
    let (t1, r1) = (config.subtraction.t(), config.subtraction.r());
    let (t2, r2) = (config.erasure.t(), config.erasure.r());
    let in2 = vec2(f_src) * vec2(g_src);
    // exactly one photon leaves the pair of rails, from either branch
    let sub2 = vec2(&b1_apply(f_src, t1, r1)) * vec2(&b0_apply(g_src, t1))
        + vec2(&b0_apply(f_src, t1)) * vec2(&b1_apply(g_src, t1, r1));
    let herald = match config.qnd_backend {
        QndBackend::Ideal => 1.0,
        QndBackend::Interferometric => 0.125,
    };
    let p_qnd = sub2 / in2 * herald * config.gate_success.qnd;
    let n_full = f_src.len() + g_src.len();
    let (f_out, g_out) = forward_two_term(f_src, g_src, t1, r1, t2, r2, n_full);
    let full2 = vec2(&f_out) + vec2(&g_out);
    let p_erase = full2 / sub2;
    let keep = n_keep as usize;
    let f_kept = &f_out[..=keep];
    let g_kept = &g_out[..=keep];
    let kept2 = vec2(f_kept) + vec2(g_kept);
    let p_scissors = scissors_resource(n_keep).success_probability * kept2 / full2;
    let scale = C64::new(1.0 / kept2.sqrt(), 0.0);
    let branches =
        vec![vec_to_tensor(f_kept).scaled(scale), vec_to_tensor(g_kept).scaled(scale)];
    Ok(DeviceStats { p_qnd, p_erase, p_scissors: vec![p_scissors], branches })
}

fn b0_norm_sqr(t: &AmplitudeTensor, t1: f64) -> f64 {
    t.indices()
        .map(|idx| {
            let q = *idx.last().expect("tensors have at least one axis") as i32;
            t.get(&idx).norm_sqr() * t1.powi(2 * q)
        })
        .sum()
}

fn b1_norm_sqr(t: &AmplitudeTensor, t1: f64, r1: f64) -> f64 {
    t.indices()
        .filter(|idx| *idx.last().expect("nonempty dims") >= 1)
        .map(|idx| {
            let q = *idx.last().expect("nonempty dims");
            q as f64 * t1.powi(2 * (q as i32 - 1)) * r1 * r1 * t.get(&idx).norm_sqr()
        })
        .sum()
}

fn analyze_qudit(
    inputs: &[AmplitudeTensor],
    keeps: &[u32],
    config: &PlanConfig,
) -> PlanResult<DeviceStats> {
    let d = inputs.len();
    let g = keeps.len();
    let (t1, r1) = (config.subtraction.t(), config.subtraction.r());
    let in2: f64 = inputs.iter().map(AmplitudeTensor::norm_sqr).product();
    let b0: Vec<f64> = inputs.iter().map(|t| b0_norm_sqr(t, t1)).collect();
    let b1: Vec<f64> = inputs.iter().map(|t| b1_norm_sqr(t, t1, r1)).collect();
    let sub2: f64 = (0..d)
        .map(|j| b1[j] * (0..d).filter(|&k| k != j).map(|k| b0[k]).product::<f64>())
        .sum();
    let p_qnd = sub2 / in2 * config.gate_success.qudit_qnd;

    // merged support: d sources pile onto each kept slot, and the branch
    // that heralded loses one photon on the last slot
    let mut src_dims = vec![1usize; g];
    for t in inputs {
        for (i, &dim) in t.dims().iter().enumerate() {
            src_dims[i] = src_dims[i].max(dim);
        }
    }
    let full_dims: Vec<usize> = (0..g)
        .map(|i| {
            let spread = d * (src_dims[i] - 1);
            if i + 1 == g {
                spread.max(1)
            } else {
                spread + 1
            }
        })
        .collect();
    let merged = forward_tuple(inputs, t1, r1, &full_dims)?;
    let full2: f64 = merged.iter().map(AmplitudeTensor::norm_sqr).sum();
    let p_erase = full2 / sub2;

    let mut cur = merged;
    let mut p_scissors = Vec::with_capacity(g);
    for (i, &keep) in keeps.iter().enumerate() {
        let before: f64 = cur.iter().map(AmplitudeTensor::norm_sqr).sum();
        cur = cur.iter().map(|t| t.truncated_axis(i, keep as usize + 1)).collect();
        let after: f64 = cur.iter().map(AmplitudeTensor::norm_sqr).sum();
        p_scissors.push(scissors_resource(keep).success_probability * after / before);
    }
    let kept2: f64 = cur.iter().map(AmplitudeTensor::norm_sqr).sum();
    let scale = C64::new(1.0 / kept2.sqrt(), 0.0);
    let branches = cur.iter().map(|t| t.scaled(scale)).collect();
    Ok(DeviceStats { p_qnd, p_erase, p_scissors, branches })
}

fn polarized_stage_labels(dev: &str) -> [String; 3] {
    [format!("qnd@{dev}"), format!("erase@{dev}"), format!("scissors@{dev}")]
}

fn qudit_stage_labels(dev: &str, g: usize) -> Vec<String> {
    let mut labels = vec![format!("qudit_qnd@{dev}"), format!("erase@{dev}")];
    if g == 1 {
        labels.push(format!("scissors@{dev}"));
    } else {
        labels.extend((0..g).map(|i| format!("scissors@{dev}#{i}")));
    }
    labels
}

fn stats_to_stages(labels: &[String], stats: &DeviceStats) -> PlanResult<Vec<PlanStage>> {
    let mut probs = vec![stats.p_qnd, stats.p_erase];
    probs.extend_from_slice(&stats.p_scissors);
    debug_assert_eq!(labels.len(), probs.len());
    labels
        .iter()
        .zip(probs)
        .map(|(label, probability)| {
            ensure_probability(label, probability)?;
            Ok(PlanStage { label: label.clone(), probability })
        })
        .collect()
}

fn build_polarized(
    spec: &TargetSpec,
    folded: &[Vec<Vec<C64>>],
    config: &PlanConfig,
) -> PlanResult<Vec<DeviceBuild>> {
    let (t1, r1) = (config.subtraction.t(), config.subtraction.r());
    let (t2, r2) = (config.erasure.t(), config.erasure.r());
    let mut builds = Vec::with_capacity(spec.modes);
    for m in 0..spec.modes {
        let (f_src, g_src) = invert_two_term(
            &folded[0][m],
            &folded[1][m],
            t1,
            r1,
            t2,
            r2,
            (config.seed, config.seed),
        )?;
        let stats = analyze_polarized(&f_src, &g_src, spec.max_photons, config)?;
        let label = format!("dev{m}");
        let stages = stats_to_stages(&polarized_stage_labels(&label), &stats)?;
        let source_total = (f_src.len() + g_src.len()) as u32 - 2;
        builds.push(DeviceBuild {
            device: DevicePlan {
                label,
                output_spatials: vec![m as u32],
                kind: DeviceKind::Polarized { f_input: f_src, g_input: g_src },
            },
            stages,
            branches: stats.branches,
            source_total,
        });
    }
    Ok(builds)
}

fn build_qudit_per_mode(
    spec: &TargetSpec,
    folded: &[Vec<Vec<C64>>],
    config: &PlanConfig,
) -> PlanResult<Vec<DeviceBuild>> {
    let d = spec.terms.len();
    let (t1, r1) = (config.subtraction.t(), config.subtraction.r());
    let seeds = vec![config.seed; d];
    let mut builds = Vec::with_capacity(spec.modes);
    for m in 0..spec.modes {
        let targets: Vec<AmplitudeTensor> =
            (0..d).map(|j| vec_to_tensor(&folded[j][m])).collect();
        let inputs = invert_tuple(&targets, t1, r1, &seeds)?;
        let stats = analyze_qudit(&inputs, &[spec.max_photons], config)?;
        let label = format!("dev{m}");
        let stages = stats_to_stages(&qudit_stage_labels(&label, 1), &stats)?;
        let source_total = tensors_photon_total(&inputs);
        builds.push(DeviceBuild {
            device: DevicePlan {
                label,
                output_spatials: vec![m as u32],
                kind: DeviceKind::Qudit { inputs },
            },
            stages,
            branches: stats.branches,
            source_total,
        });
    }
    Ok(builds)
}

fn tensors_photon_total(tensors: &[AmplitudeTensor]) -> u32 {
    tensors
        .iter()
        .map(|t| t.dims().iter().map(|&d| d as u32 - 1).sum::<u32>())
        .sum()
}

fn build_schmidt(
    spec: &TargetSpec,
    folded: &[Vec<Vec<C64>>],
    config: &PlanConfig,
) -> PlanResult<(Vec<DeviceBuild>, usize)> {
    let dim = spec.max_photons as usize + 1;
    let g_left = spec.modes.div_ceil(2);
    let g_right = spec.modes - g_left;

    let mut full = AmplitudeTensor::zeros(&vec![dim; spec.modes]);
    for idx in full.indices().collect::<Vec<_>>() {
        let mut amp = C64::default();
        for term in folded {
            amp += idx.iter().enumerate().map(|(m, &n)| term[m][n]).product::<C64>();
        }
        full.set(&idx, amp);
    }
    let rows = dim.pow(g_left as u32);
    let cols = dim.pow(g_right as u32);
    let split = schmidt_split(rows, cols, full.as_slice())?;
    let rank = split.rank;

    let mut left_targets = Vec::with_capacity(rank);
    let mut right_targets = Vec::with_capacity(rank);
    for i in 0..rank {
        let w = C64::new(split.lambdas[i].sqrt(), 0.0);
        left_targets.push(AmplitudeTensor::from_vec(
            &vec![dim; g_left],
            split.left[i].iter().map(|a| a * w).collect(),
        )?);
        right_targets.push(AmplitudeTensor::from_vec(
            &vec![dim; g_right],
            split.right[i].iter().map(|a| a * w).collect(),
        )?);
    }

    let (t1, r1) = (config.subtraction.t(), config.subtraction.r());
    let seeds = vec![config.seed; rank];
    let groups = [
        (0u32..g_left as u32, left_targets),
        (g_left as u32..spec.modes as u32, right_targets),
    ];
    let mut builds = Vec::with_capacity(2);
    for (i, (range, targets)) in groups.into_iter().enumerate() {
        let outputs: Vec<u32> = range.collect();
        let inputs = invert_tuple(&targets, t1, r1, &seeds)?;
        let keeps = vec![spec.max_photons; outputs.len()];
        let stats = analyze_qudit(&inputs, &keeps, config)?;
        let label = format!("dev{i}");
        let stages = stats_to_stages(&qudit_stage_labels(&label, outputs.len()), &stats)?;
        let source_total = tensors_photon_total(&inputs);
        builds.push(DeviceBuild {
            device: DevicePlan {
                label,
                output_spatials: outputs,
                kind: DeviceKind::Qudit { inputs },
            },
            stages,
            branches: stats.branches,
            source_total,
        });
    }
    Ok((builds, rank))
}

/// Joint success probability of projecting every device's presence
/// register onto the same branch, coherently over branches. Branch
/// vectors within a device overlap in general, so this is a full
/// double sum rather than a diagonal one.
fn swap_probability(builds: &[DeviceBuild], d: usize, gate: f64) -> f64 {
    let mut total = C64::default();
    for j in 0..d {
        for jp in 0..d {
            let mut prod = C64::new(1.0, 0.0);
            for b in builds {
                prod *= b.branches[jp].overlap(&b.branches[j]);
            }
            total += prod;
        }
    }
    total.re / d as f64 * gate
}

pub fn plan(spec: &TargetSpec, scheme: Scheme, config: &PlanConfig) -> PlanResult<PrepPlan> {
    spec.validate()?;
    validate_config(config)?;
    check_scheme(scheme, spec.modes, spec.terms.len())?;

    let folded = spec.folded_factors();
    let d = spec.terms.len();
    let n = spec.max_photons;

    let mut schmidt_ranks = Vec::new();
    let (builds, swap_gate, swap_levels) = if d == 1 {
        let factors = folded.into_iter().next().expect("one term");
        let source_total: u32 =
            factors.iter().map(|f| f.len() as u32 - 1).sum();
        let build = DeviceBuild {
            device: DevicePlan {
                label: "dev0".into(),
                output_spatials: (0..spec.modes as u32).collect(),
                kind: DeviceKind::Direct { factors },
            },
            stages: Vec::new(),
            branches: Vec::new(),
            source_total,
        };
        (vec![build], 0.0, 0)
    } else {
        match scheme {
            Scheme::TwoTermTwoMode | Scheme::TwoTermMultiMode => {
                let builds = build_polarized(spec, &folded, config)?;
                let gate = if builds.len() == 2 {
                    config.gate_success.bell
                } else {
                    config.gate_success.ghz
                };
                (builds, gate, 2)
            }
            Scheme::DTermTwoMode | Scheme::General => {
                let builds = build_qudit_per_mode(spec, &folded, config)?;
                (builds, config.gate_success.ghz, d)
            }
            Scheme::SchmidtRecursive => {
                let (builds, rank) = build_schmidt(spec, &folded, config)?;
                schmidt_ranks.push(rank);
                (builds, config.gate_success.ghz, rank)
            }
        }
    };

    let mut stages: Vec<PlanStage> = Vec::new();
    for b in &builds {
        stages.extend(b.stages.iter().cloned());
    }
    if swap_levels > 0 {
        let p_swap = swap_probability(&builds, swap_levels, swap_gate);
        ensure_probability("swap", p_swap)?;
        stages.push(PlanStage { label: "swap".into(), probability: p_swap });
    }

    let qnd_overhead = match config.qnd_backend {
        QndBackend::Ideal => 0,
        QndBackend::Interferometric => 2,
    };
    let mut budget = n.saturating_mul(spec.modes as u32);
    for b in &builds {
        let extra = match b.device.kind {
            DeviceKind::Direct { .. } => 0,
            DeviceKind::Polarized { .. } => qnd_overhead.max(n),
            DeviceKind::Qudit { .. } => n,
        };
        budget = budget.max(b.source_total + extra);
    }
    if budget > config.max_total_photons {
        return Err(PlanError::PhotonBudget { need: budget, cap: config.max_total_photons });
    }

    let total_probability = stages.iter().map(|s| s.probability).product();
    Ok(PrepPlan {
        scheme,
        spec: spec.clone(),
        config: *config,
        devices: builds.into_iter().map(|b| b.device).collect(),
        stages,
        schmidt_ranks,
        total_probability,
        photon_budget: budget,
    })
}

/// A device's simulated output: its normalized state, the observed stage
/// probabilities, and which modes the swap measures with what patterns.
struct DeviceRun {
    state: FockState,
    stages: Vec<(String, f64)>,
    herald_modes: Vec<ModeLabel>,
    patterns: Vec<Vec<u8>>,
}

fn run_direct(dev: &DevicePlan, factors: &[Vec<C64>], caps: Caps, prune: f64) -> PlanResult<DeviceRun> {
    let registry = ModeRegistry::scalars(&dev.output_spatials)?;
    let state = make_state(&registry, caps, &[(C64::new(1.0, 0.0), factors.to_vec())])?
        .with_prune(prune)
        .normalized()?;
    Ok(DeviceRun { state, stages: Vec::new(), herald_modes: Vec::new(), patterns: Vec::new() })
}

fn run_polarized(
    dev: &DevicePlan,
    f_input: &[C64],
    g_input: &[C64],
    plan: &PrepPlan,
    caps: Caps,
) -> PlanResult<DeviceRun> {
    let config = &plan.config;
    let m = dev.output_spatials[0];
    let anc = plan.spec.modes as u32 + m;
    let labels = polarized_stage_labels(&dev.label);
    let mut stages = Vec::with_capacity(3);

    let registry = ModeRegistry::polarized(&[m])?;
    let source = make_state(
        &registry,
        caps,
        &[(C64::new(1.0, 0.0), vec![f_input.to_vec(), g_input.to_vec()])],
    )?
    .with_prune(config.prune)
    .normalized()?;

    let mut st = source.add_vacuum_modes(&[ModeLabel::v(anc), ModeLabel::h(anc)])?;
    st = apply_beam_splitter_polarized(&st, m, anc, config.subtraction, 0.0)?;

    // Presence detection: restrict to the one-photon register first, then
    // let the backend herald it. The interferometric network is exact on
    // that subspace, so the stage keeps its closed-form probability.
    let pre = st.norm_sqr();
    let filtered =
        st.project_photon_total(&[ModeLabel::v(anc), ModeLabel::h(anc)], 1)?;
    let heralded = qnd_single_photon(&filtered, anc, config.qnd_backend, config.gate_success.qnd)?;
    stages.push((labels[0].clone(), heralded.state.norm_sqr() / pre));
    st = heralded.state.normalized()?;

    let erased = erase_to_single_mode(
        &st,
        &[ModeLabel::v(m), ModeLabel::h(m)],
        &[config.erasure.r(), config.erasure.t()],
    )?;
    stages.push((labels[1].clone(), erased.probability));
    st = erased.state.normalized()?;
    st = st.relabel(&[(ModeLabel::v(m), ModeLabel::scalar(m))])?;

    let cut = quantum_scissors(&st, ModeLabel::scalar(m), plan.spec.max_photons)?;
    stages.push((labels[2].clone(), cut.probability));
    st = cut.state.normalized()?;

    Ok(DeviceRun {
        state: st,
        stages,
        herald_modes: vec![ModeLabel::v(anc), ModeLabel::h(anc)],
        patterns: vec![vec![1, 0], vec![0, 1]],
    })
}

fn run_qudit(
    dev: &DevicePlan,
    inputs: &[AmplitudeTensor],
    plan: &PrepPlan,
    caps: Caps,
) -> PlanResult<DeviceRun> {
    let config = &plan.config;
    let d = inputs.len();
    let outs = &dev.output_spatials;
    let g = outs.len();
    let base = plan.spec.modes as u32;
    let branch_mode = |k: usize, i: usize| base + (k * g + i) as u32;
    let presence_mode = |k: usize| base + (d * g + k) as u32;
    let labels = qudit_stage_labels(&dev.label, g);
    let mut stages = Vec::with_capacity(labels.len());

    let mut st: Option<FockState> = None;
    for (k, tensor) in inputs.iter().enumerate() {
        let spatials: Vec<u32> = (0..g).map(|i| branch_mode(k, i)).collect();
        let registry = ModeRegistry::scalars(&spatials)?;
        let kets: Vec<(Vec<u8>, C64)> = tensor
            .indices()
            .map(|idx| (idx.iter().map(|&n| n as u8).collect(), tensor.get(&idx)))
            .filter(|(_, amp)| amp.norm_sqr() > 0.0)
            .collect();
        let branch = FockState::from_kets(registry, caps, &kets)?;
        st = Some(match st {
            None => branch,
            Some(acc) => acc.tensor(&branch)?,
        });
    }
    let mut st = st.expect("at least one branch").with_prune(config.prune).normalized()?;

    for k in 0..d {
        let x = ModeLabel::scalar(presence_mode(k));
        st = st.add_vacuum_modes(&[x])?;
        st = apply_beam_splitter(
            &st,
            ModeLabel::scalar(branch_mode(k, g - 1)),
            x,
            config.subtraction,
            0.0,
        )?;
    }
    let herald_modes: Vec<ModeLabel> =
        (0..d).map(|k| ModeLabel::scalar(presence_mode(k))).collect();
    let pre = st.norm_sqr();
    let picked = st
        .project_photon_total(&herald_modes, 1)?
        .scaled(C64::new(config.gate_success.qudit_qnd.sqrt(), 0.0));
    stages.push((labels[0].clone(), picked.norm_sqr() / pre));
    st = picked.normalized()?;

    // collapse the d copies of every kept slot onto branch 0's copy
    let weights = vec![1.0 / (d as f64).sqrt(); d];
    let mut p_merge = 1.0;
    for i in 0..g {
        let group: Vec<ModeLabel> =
            (0..d).map(|k| ModeLabel::scalar(branch_mode(k, i))).collect();
        let erased = erase_to_single_mode(&st, &group, &weights)?;
        p_merge *= erased.probability;
        st = erased.state;
    }
    stages.push((labels[1].clone(), p_merge));
    st = st.normalized()?;

    for i in 0..g {
        let cut = quantum_scissors(&st, ModeLabel::scalar(branch_mode(0, i)), plan.spec.max_photons)?;
        stages.push((labels[2 + i].clone(), cut.probability));
        st = cut.state.normalized()?;
    }

    let renames: Vec<(ModeLabel, ModeLabel)> = (0..g)
        .map(|i| (ModeLabel::scalar(branch_mode(0, i)), ModeLabel::scalar(outs[i])))
        .collect();
    st = st.relabel(&renames)?;

    let patterns: Vec<Vec<u8>> = (0..d)
        .map(|j| (0..d).map(|k| u8::from(k == j)).collect())
        .collect();
    Ok(DeviceRun { state: st, stages, herald_modes, patterns })
}

/// Replays a plan on explicit states. Every heralded stage is compared
/// against its closed-form probability; a gap beyond the configured
/// tolerance aborts with [`PlanError::StageMismatch`] rather than
/// reporting numbers that the two methods cannot agree on.
pub fn simulate(plan: &PrepPlan) -> PlanResult<SimulationOutcome> {
    let config = &plan.config;
    let caps = Caps::new(plan.photon_budget, plan.photon_budget);
    let target = plan.spec.state()?.normalized()?;

    let mut runs = Vec::with_capacity(plan.devices.len());
    for dev in &plan.devices {
        let run = match &dev.kind {
            DeviceKind::Direct { factors } => run_direct(dev, factors, caps, config.prune)?,
            DeviceKind::Polarized { f_input, g_input } => {
                run_polarized(dev, f_input, g_input, plan, caps)?
            }
            DeviceKind::Qudit { inputs } => run_qudit(dev, inputs, plan, caps)?,
        };
        runs.push(run);
    }

    let mut observed: Vec<(String, f64)> = Vec::new();
    for run in &runs {
        observed.extend(run.stages.iter().cloned());
    }

    let direct = matches!(plan.devices[0].kind, DeviceKind::Direct { .. });
    let final_state = if direct {
        runs[0].state.clone()
    } else {
        let d = runs[0].patterns.len();
        let gate = swap_gate_factor(plan);
        let amp = C64::new((gate / d as f64).sqrt(), 0.0);
        let mut summed: Option<FockState> = None;
        for j in 0..d {
            let mut branch: Option<FockState> = None;
            for run in &runs {
                let projected = run.state.project_counts(&run.herald_modes, &run.patterns[j])?;
                branch = Some(match branch {
                    None => projected,
                    Some(acc) => acc.tensor(&projected)?,
                });
            }
            let piece = branch.expect("at least one device").scaled(amp);
            summed = Some(match summed {
                None => piece,
                Some(acc) => acc.add(&piece)?,
            });
        }
        let raw = summed.expect("d >= 1");
        observed.push(("swap".into(), raw.norm_sqr()));
        raw.normalized()?
    };

    if observed.len() != plan.stages.len() {
        return Err(PlanError::BadSpec(format!(
            "stage bookkeeping is inconsistent: planned {}, observed {}",
            plan.stages.len(),
            observed.len()
        )));
    }
    let mut reports = Vec::with_capacity(observed.len());
    for (planned, (label, simulated)) in plan.stages.iter().zip(observed) {
        assert_eq!(planned.label, label, "plan and simulation disagree on stage order");
        if (planned.probability - simulated).abs() > config.stage_tolerance {
            return Err(PlanError::StageMismatch {
                stage: label,
                analytic: planned.probability,
                simulated,
            });
        }
        reports.push(StageReport { label, analytic: planned.probability, simulated });
    }

    let final_state = final_state.permuted_to(target.registry())?;
    let fidelity = crate::fock::fidelity(&final_state, &target)?;
    let probs: Vec<f64> = reports.iter().map(|r| r.simulated).collect();
    let report = PrepReport {
        scheme: plan.scheme,
        fidelity,
        total_probability: probs.iter().product(),
        attempts_no_memory: estimate_resources(&probs, false)?,
        attempts_with_memory: estimate_resources(&probs, true)?,
        stages: reports,
        schmidt_ranks: plan.schmidt_ranks.clone(),
    };
    Ok(SimulationOutcome { report, state: final_state })
}

fn swap_gate_factor(plan: &PrepPlan) -> f64 {
    let polarized = matches!(plan.devices[0].kind, DeviceKind::Polarized { .. });
    if polarized && plan.devices.len() == 2 {
        plan.config.gate_success.bell
    } else {
        plan.config.gate_success.ghz
    }
}
