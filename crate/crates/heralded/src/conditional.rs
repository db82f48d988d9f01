//! Measurement-conditioned building blocks: heralded photon-number
//! gates that succeed with some probability and leave a known state.
//!
//! Conventions shared by every operation here:
//!
//! * Inputs are never required to be normalized. The returned state is
//!   left unnormalized so that `probability` always equals
//!   `out.norm_sqr() / in.norm_sqr()`, including any gate success factor
//!   (folded in as an amplitude scale of `sqrt(factor)`).
//! * Detected modes disappear from the registry; filtered modes (where a
//!   photon-number subspace is kept coherently) stay.
//! * A probability of zero is not an error: the herald simply never
//!   fires for that input, and the returned state is empty.

use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

use crate::elements::{
    apply_beam_splitter, apply_beam_splitter_polarized, apply_pbs, apply_phase, apply_waveplate,
    BeamSplitterParams,
};
use crate::fock::{factorial, C64, Caps, FockError, FockResult, FockState, ModeLabel, ModeRegistry};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    State(#[from] FockError),
    #[error("input state has zero norm")]
    ZeroNormInput,
    #[error("gate success factor {0} must lie in (0, 1]")]
    BadSuccessFactor(f64),
    #[error("erasure weights invalid: {0}")]
    BadWeights(String),
    #[error("projection needs {want} phases, got {got}")]
    PhaseCount { want: usize, got: usize },
    #[error("qudit groups must share one size of at least 2, got {0:?}")]
    RaggedQudits(Vec<usize>),
    #[error("ket outside the one-photon-per-qudit subspace: {0}")]
    OutsideQuditSupport(String),
}

pub type ProtocolResult<T> = Result<T, ProtocolError>;

/// Outcome of a heralded operation.
///
/// `state` keeps its reduced norm: `probability` is exactly
/// `state.norm_sqr()` divided by the input's norm. Renormalize when (and
/// only when) the branch has been committed to.
#[derive(Clone, Debug)]
pub struct ConditionalResult {
    pub state: FockState,
    pub probability: f64,
    pub outcome: String,
}

fn check_factor(factor: f64) -> ProtocolResult<()> {
    if !(factor.is_finite() && 0.0 < factor && factor <= 1.0) {
        return Err(ProtocolError::BadSuccessFactor(factor));
    }
    Ok(())
}

fn input_norm(state: &FockState) -> ProtocolResult<f64> {
    let n2 = state.norm_sqr();
    if n2 <= 0.0 {
        return Err(ProtocolError::ZeroNormInput);
    }
    Ok(n2)
}

/// How the single-photon presence check is realized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QndBackend {
    /// Keeps the total-photon-number-one subspace of the watched spatial
    /// index directly. Unit success probability on that subspace.
    #[default]
    Ideal,
    /// Linear-optical realization with two single-photon ancillas and
    /// threefold coincidence detection. Heralds with probability 1/8 on
    /// one-photon inputs, preserves polarization exactly, and never fires
    /// on vacuum (the two ancilla photons bunch at the final coupler, so
    /// they cannot produce the required coincidence on their own).
    Interferometric,
}

/// Heralds "exactly one photon at `spatial`, polarization untouched".
///
/// The watched index must carry a V/H pair. `success_factor` models any
/// extra detector or gate inefficiency; it scales the probability and the
/// amplitudes by its square root.
pub fn qnd_single_photon(
    state: &FockState,
    spatial: u32,
    backend: QndBackend,
    success_factor: f64,
) -> ProtocolResult<ConditionalResult> {
    check_factor(success_factor)?;
    let norm_in = input_norm(state)?;
    state.registry().polarized_pair(spatial)?;
    let filtered = match backend {
        QndBackend::Ideal => {
            state.project_photon_total(&[ModeLabel::v(spatial), ModeLabel::h(spatial)], 1)?
        }
        QndBackend::Interferometric => interferometric_filter(state, spatial)?,
    };
    let out = filtered.scaled(C64::new(success_factor.sqrt(), 0.0));
    let probability = out.norm_sqr() / norm_in;
    Ok(ConditionalResult {
        state: out,
        probability,
        outcome: format!("qnd[n=1]@{spatial}"),
    })
}

/// Coincidence-heralded presence check.
///
/// Layout: a polarizing splitter sends V to rail `p` and H to rail `q`;
/// a half-turn rotation puts the `q` rail into V as well. Each rail meets
/// a single-photon ancilla (`c`, `d`) on a balanced coupler, the two
/// ancilla arms interfere on a final balanced coupler, and a coincidence
/// `(c, d) = (1, 0, 1, 0)` is detected. The network swaps the rails while
/// heralding, so the recombination rotates `p` and reassembles the
/// original polarizations through a second polarizing splitter.
fn interferometric_filter(state: &FockState, spatial: u32) -> ProtocolResult<FockState> {
    let fresh = state.registry().fresh_spatials(7);
    let (vin, p, q, c, d, o, bin) =
        (fresh[0], fresh[1], fresh[2], fresh[3], fresh[4], fresh[5], fresh[6]);

    let st = state.add_vacuum_modes(&[ModeLabel::v(vin), ModeLabel::h(vin)])?;
    let st = apply_pbs(&st, spatial, vin, p, q)?;
    let st = apply_waveplate(&st, q, FRAC_PI_2)?;

    let ancillas = FockState::from_kets(
        ModeRegistry::polarized(&[c, d])?,
        Caps::new(1, 2),
        &[(vec![1, 0, 1, 0], C64::new(1.0, 0.0))],
    )?;
    let st = st.tensor(&ancillas)?;

    let bal = BeamSplitterParams::balanced();
    let st = apply_beam_splitter_polarized(&st, p, c, bal, 0.0)?;
    let st = apply_beam_splitter_polarized(&st, q, d, bal, 0.0)?;
    let st = apply_beam_splitter_polarized(&st, c, d, bal, 0.0)?;
    let st = st.project_counts(
        &[ModeLabel::v(c), ModeLabel::h(c), ModeLabel::v(d), ModeLabel::h(d)],
        &[1, 0, 1, 0],
    )?;

    let st = apply_waveplate(&st, p, FRAC_PI_2)?;
    let st = apply_pbs(&st, q, p, o, bin)?;
    let st = st.project_counts(&[ModeLabel::v(bin), ModeLabel::h(bin)], &[0, 0])?;
    let st = st.relabel(&[
        (ModeLabel::v(o), ModeLabel::v(spatial)),
        (ModeLabel::h(o), ModeLabel::h(spatial)),
    ])?;
    Ok(st.permuted_to(state.registry())?)
}

/// Entangled two-mode resource driving a photon-number truncation.
#[derive(Clone, Debug)]
pub struct ScissorsResource {
    pub truncation: u32,
    /// Amplitude of `|k>` on the coupler arm paired with `|N-k>` on the
    /// output arm; normalized to one.
    pub coefficients: Vec<f64>,
    /// Herald probability for an input already inside the kept subspace.
    pub success_probability: f64,
}

/// Resource for truncation at `n` photons.
pub fn scissors_resource(truncation: u32) -> ScissorsResource {
    let n = truncation;
    let two_n = 2f64.powi(n as i32);
    let weights: Vec<f64> = (0..=n)
        .map(|k| factorial(k) * factorial(n - k) * two_n / factorial(n))
        .collect();
    let success_probability = 1.0 / weights.iter().sum::<f64>();
    let coefficients =
        weights.iter().map(|w| (success_probability * w).sqrt()).collect();
    ScissorsResource { truncation: n, coefficients, success_probability }
}

/// Heralded truncation of one mode to at most `truncation` photons.
///
/// On success the kept amplitudes are all scaled by the same constant
/// `sqrt(success_probability)`: the operation is exact, not approximate,
/// for every photon number of the input.
pub fn quantum_scissors(
    state: &FockState,
    mode: ModeLabel,
    truncation: u32,
) -> ProtocolResult<ConditionalResult> {
    let norm_in = input_norm(state)?;
    state.registry().index_of(mode)?;
    let resource = scissors_resource(truncation);
    let fresh = state.registry().fresh_spatials(2);
    let (arm, out_arm) = (ModeLabel::scalar(fresh[0]), ModeLabel::scalar(fresh[1]));

    let n = truncation;
    let kets: Vec<(Vec<u8>, C64)> = resource
        .coefficients
        .iter()
        .enumerate()
        .map(|(k, &ck)| {
            (vec![k as u8, (n as usize - k) as u8], C64::new(ck, 0.0))
        })
        .collect();
    let resource_state = FockState::from_kets(
        ModeRegistry::scalars(&[fresh[0], fresh[1]])?,
        Caps::new(n.max(1), n.max(1)),
        &kets,
    )?;

    let joint = state.tensor(&resource_state)?;
    let mixed = apply_beam_splitter(&joint, mode, arm, BeamSplitterParams::balanced(), 0.0)?;
    let heralded = mixed.project_counts(&[mode, arm], &[0, n as u8])?;
    let out = heralded.relabel(&[(out_arm, mode)])?.permuted_to(state.registry())?;
    let probability = out.norm_sqr() / norm_in;
    Ok(ConditionalResult {
        state: out,
        probability,
        outcome: format!("scissors[n<={n}]@{mode}"),
    })
}

/// Coherently concentrates a weighted combination of `modes` into
/// `modes[0]` and heralds vacuum on all the others.
///
/// Weights must be real with squares summing to one. The kept mode ends
/// up carrying the combination `sum_j w_j a_j+`; every ket that would
/// have left a photon in a discarded mode is removed by the herald.
pub fn erase_to_single_mode(
    state: &FockState,
    modes: &[ModeLabel],
    weights: &[f64],
) -> ProtocolResult<ConditionalResult> {
    if modes.is_empty() || modes.len() != weights.len() {
        return Err(ProtocolError::BadWeights(format!(
            "{} modes with {} weights",
            modes.len(),
            weights.len()
        )));
    }
    for m in modes {
        state.registry().index_of(*m)?;
    }
    if !weights.iter().all(|w| w.is_finite()) {
        return Err(ProtocolError::BadWeights("weights must be finite".into()));
    }
    let total: f64 = weights.iter().map(|w| w * w).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(ProtocolError::BadWeights(format!(
            "squares sum to {total}, expected 1"
        )));
    }
    let norm_in = input_norm(state)?;

    let mut st = state.clone();
    if weights[0] < 0.0 {
        st = apply_phase(&st, modes[0], PI)?;
    }
    let mut reach = weights[0].abs();
    for (j, &w) in weights.iter().enumerate().skip(1) {
        if w == 0.0 {
            continue;
        }
        let next = (reach * reach + w * w).sqrt();
        // Mixer that sends the accumulated combination plus this mode's
        // share onto the kept port, and the orthogonal combination onto
        // this mode (to be heralded empty below).
        let params = BeamSplitterParams::raw(reach / next, w.abs() / next);
        let phase = if w > 0.0 { PI } else { 0.0 };
        st = apply_beam_splitter(&st, modes[0], modes[j], params, phase)?;
        reach = next;
    }
    let discard = &modes[1..];
    let zeros = vec![0u8; discard.len()];
    let kept = st.project_counts(discard, &zeros)?;
    let probability = kept.norm_sqr() / norm_in;
    Ok(ConditionalResult {
        state: kept,
        probability,
        outcome: format!("erase[{}->{}]", modes.len(), modes[0]),
    })
}

/// Which modes carry the logical levels in a multiparty projection.
#[derive(Clone, Debug)]
pub enum GhzEncoding {
    /// Each party is one spatial index; level 0 is a V photon, level 1 an
    /// H photon.
    Polarization { spatials: Vec<u32> },
    /// Each party is a group of scalar spatial indices; level `l` is one
    /// photon in the group's `l`-th index. All groups share one size.
    Spatial { qudits: Vec<Vec<u32>> },
}

impl GhzEncoding {
    fn levels(&self) -> ProtocolResult<usize> {
        match self {
            GhzEncoding::Polarization { spatials } => {
                if spatials.is_empty() {
                    return Err(ProtocolError::RaggedQudits(vec![]));
                }
                Ok(2)
            }
            GhzEncoding::Spatial { qudits } => {
                let sizes: Vec<usize> = qudits.iter().map(Vec::len).collect();
                if sizes.is_empty() || sizes.iter().any(|&s| s < 2 || s != sizes[0]) {
                    return Err(ProtocolError::RaggedQudits(sizes));
                }
                Ok(sizes[0])
            }
        }
    }

    fn measured_modes(&self) -> Vec<ModeLabel> {
        match self {
            GhzEncoding::Polarization { spatials } => spatials
                .iter()
                .flat_map(|&s| [ModeLabel::v(s), ModeLabel::h(s)])
                .collect(),
            GhzEncoding::Spatial { qudits } => qudits
                .iter()
                .flatten()
                .map(|&s| ModeLabel::scalar(s))
                .collect(),
        }
    }

    /// Occupation pattern of the measured modes when every party sits at
    /// logical level `level`.
    fn pattern(&self, level: usize) -> Vec<u8> {
        match self {
            GhzEncoding::Polarization { spatials } => spatials
                .iter()
                .flat_map(|_| {
                    if level == 0 {
                        [1u8, 0]
                    } else {
                        [0u8, 1]
                    }
                })
                .collect(),
            GhzEncoding::Spatial { qudits } => qudits
                .iter()
                .flat_map(|group| {
                    (0..group.len()).map(move |i| u8::from(i == level))
                })
                .collect(),
        }
    }
}

/// Projects onto the multiparty entangled combination
/// `sum_l e^{-i phases[l]} |l, l, ..., l> / sqrt(d)` of the encoded
/// parties and drops the measured modes.
///
/// The returned amplitudes are the overlaps with that combination, so the
/// branch coefficients pick up `e^{+i phases[l]}`.
pub fn ghz_project(
    state: &FockState,
    encoding: &GhzEncoding,
    phases: &[f64],
    success_factor: f64,
) -> ProtocolResult<ConditionalResult> {
    check_factor(success_factor)?;
    let norm_in = input_norm(state)?;
    let d = encoding.levels()?;
    if phases.len() != d {
        return Err(ProtocolError::PhaseCount { want: d, got: phases.len() });
    }
    let measured = encoding.measured_modes();
    let scale = (success_factor / d as f64).sqrt();
    let mut acc: Option<FockState> = None;
    for (level, &theta) in phases.iter().enumerate() {
        let branch = state
            .project_counts(&measured, &encoding.pattern(level))?
            .scaled(C64::from_polar(scale, theta));
        acc = Some(match acc {
            None => branch,
            Some(sum) => sum.add(&branch)?,
        });
    }
    let out = acc.expect("at least two levels");
    let probability = out.norm_sqr() / norm_in;
    Ok(ConditionalResult {
        state: out,
        probability,
        outcome: format!("ghz[d={d}]"),
    })
}

/// Two-party polarization case of [`ghz_project`], matching the
/// combination `|VV> + e^{-i theta} |HH>` up to normalization.
pub fn bell_project(
    state: &FockState,
    spatial_a: u32,
    spatial_b: u32,
    theta: f64,
    success_factor: f64,
) -> ProtocolResult<ConditionalResult> {
    let encoding = GhzEncoding::Polarization { spatials: vec![spatial_a, spatial_b] };
    let mut result = ghz_project(state, &encoding, &[0.0, theta], success_factor)?;
    result.outcome = format!("bell@({spatial_a},{spatial_b})");
    Ok(result)
}

/// Conditional level shift between two spatially encoded qudits: with the
/// control at level `j`, the target moves from level `b` to `(b - j) mod d`.
///
/// Defined only on kets holding exactly one photon in each group; any
/// other ket in the state is an error, not a silent pass-through.
pub fn cshift(
    state: &FockState,
    control: &[u32],
    target: &[u32],
) -> ProtocolResult<FockState> {
    let d = control.len();
    if d < 2 || target.len() != d {
        return Err(ProtocolError::RaggedQudits(vec![control.len(), target.len()]));
    }
    let cidx: Vec<usize> = control
        .iter()
        .map(|&s| state.registry().index_of(ModeLabel::scalar(s)))
        .collect::<FockResult<_>>()?;
    let tidx: Vec<usize> = target
        .iter()
        .map(|&s| state.registry().index_of(ModeLabel::scalar(s)))
        .collect::<FockResult<_>>()?;

    let level_of = |occ: &[u8], idx: &[usize]| -> Option<usize> {
        let mut found = None;
        for (lvl, &i) in idx.iter().enumerate() {
            match occ[i] {
                0 => {}
                1 if found.is_none() => found = Some(lvl),
                _ => return None,
            }
        }
        found
    };

    let mut out = std::collections::BTreeMap::new();
    for (occ, amp) in state.iter() {
        let j = level_of(occ, &cidx).ok_or_else(|| {
            ProtocolError::OutsideQuditSupport(format!("control group in |{occ:?}>"))
        })?;
        let b = level_of(occ, &tidx).ok_or_else(|| {
            ProtocolError::OutsideQuditSupport(format!("target group in |{occ:?}>"))
        })?;
        let mut moved = occ.clone();
        moved[tidx[b]] = 0;
        moved[tidx[(b + d - j) % d]] = 1;
        out.insert(moved, *amp);
    }
    Ok(state.rebuild(out))
}
