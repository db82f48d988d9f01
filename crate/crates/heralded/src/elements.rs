//! Passive linear elements and heralded single-mode photon subtraction.
//!
//! Everything in this module rewrites states exactly (no sampling). The
//! two-mode coupler fixes the sign convention for the whole crate through
//! the creation-operator substitution
//!
//! ```text
//! a_i+  ->  t a_i+ + r e^{+i phi} a_j+
//! a_j+  ->  t a_j+ - r e^{-i phi} a_i+
//! ```
//!
//! with real `t`, `r`. A single photon on the first port of a balanced
//! coupler (`phi = 0`) splits as `(|1,0> + |0,1>)/sqrt(2)`, and two photons
//! meeting on it bunch as `(|0,2> - |2,0>)/sqrt(2)` with no coincidence
//! term. Waveplates reuse the same law on the (V, H) pair of one spatial
//! index, and the polarizing splitter is a pure mode relabelling.

use std::collections::BTreeMap;

use crate::conditional::ConditionalResult;
use crate::fock::{
    binomial, factorial, C64, FockError, FockResult, FockState, ModeLabel, Occupation,
};

/// Real amplitude pair `(t, r)` of a lossless two-mode coupler.
///
/// Values may be negative; only `t^2 + r^2 = 1` is required. The fields
/// are private so a checked pair cannot be mutated out of unitarity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterParams {
    t: f64,
    r: f64,
}

impl BeamSplitterParams {
    /// Tolerance on `t^2 + r^2 - 1` accepted by [`BeamSplitterParams::new`].
    pub const UNITARITY_TOL: f64 = 1e-12;

    pub fn new(t: f64, r: f64) -> FockResult<Self> {
        if !t.is_finite() || !r.is_finite() || (t * t + r * r - 1.0).abs() > Self::UNITARITY_TOL {
            return Err(FockError::NotUnitary { t, r });
        }
        Ok(Self { t, r })
    }

    /// 50/50 coupler.
    pub fn balanced() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self { t: s, r: s }
    }

    /// Coupler with intensity transmittance `tau`: `t = sqrt(tau)`.
    pub fn from_transmittance(tau: f64) -> FockResult<Self> {
        if !tau.is_finite() || !(0.0..=1.0).contains(&tau) {
            return Err(FockError::BadTransmittance(tau));
        }
        Ok(Self { t: tau.sqrt(), r: (1.0 - tau).sqrt() })
    }

    /// Used internally where `t^2 + r^2 = 1` holds by construction.
    pub(crate) fn raw(t: f64, r: f64) -> Self {
        Self { t, r }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// Couples two modes with the substitution documented at module level.
///
/// Photon number is conserved ket by ket, so this never re-checks caps:
/// photons may concentrate (two modes' worth ending up in one), which is
/// physical and allowed.
pub fn apply_beam_splitter(
    state: &FockState,
    mode_i: ModeLabel,
    mode_j: ModeLabel,
    params: BeamSplitterParams,
    phase: f64,
) -> FockResult<FockState> {
    if mode_i == mode_j {
        return Err(FockError::DuplicateMode(mode_i));
    }
    let i = state.registry().index_of(mode_i)?;
    let j = state.registry().index_of(mode_j)?;
    let t = params.t();
    // a_i+ picks up `r_up` units of a_j+, a_j+ picks up `r_dn` of a_i+.
    let r_up = C64::from_polar(params.r(), phase);
    let r_dn = -C64::from_polar(params.r(), -phase);

    let mut out: BTreeMap<Occupation, C64> = BTreeMap::new();
    for (occ, amp) in state.iter() {
        let ni = u32::from(occ[i]);
        let nj = u32::from(occ[j]);
        let denom = (factorial(ni) * factorial(nj)).sqrt();
        for p in 0..=ni {
            for q in 0..=nj {
                let oi = p + nj - q;
                let oj = ni - p + q;
                if oi > u32::from(u8::MAX) || oj > u32::from(u8::MAX) {
                    return Err(FockError::PerModeCap { cap: u8::MAX.into(), count: oi.max(oj) });
                }
                let real = binomial(ni, p) * binomial(nj, q)
                    * t.powi((p + q) as i32)
                    * (factorial(oi) * factorial(oj)).sqrt()
                    / denom;
                let weight = r_up.powu(ni - p) * r_dn.powu(nj - q) * real;
                if weight == C64::default() {
                    continue;
                }
                let mut occ2 = occ.clone();
                occ2[i] = oi as u8;
                occ2[j] = oj as u8;
                *out.entry(occ2).or_default() += amp * weight;
            }
        }
    }
    Ok(state.rebuild(out))
}

/// Same coupler applied to both polarization components of two spatial
/// indices, i.e. a polarization-insensitive splitter.
pub fn apply_beam_splitter_polarized(
    state: &FockState,
    spatial_i: u32,
    spatial_j: u32,
    params: BeamSplitterParams,
    phase: f64,
) -> FockResult<FockState> {
    state.registry().polarized_pair(spatial_i)?;
    state.registry().polarized_pair(spatial_j)?;
    let step = apply_beam_splitter(
        state,
        ModeLabel::v(spatial_i),
        ModeLabel::v(spatial_j),
        params,
        phase,
    )?;
    apply_beam_splitter(
        &step,
        ModeLabel::h(spatial_i),
        ModeLabel::h(spatial_j),
        params,
        phase,
    )
}

/// Phase shifter: each ket gains `e^{i n phase}` for `n` photons in `mode`.
pub fn apply_phase(state: &FockState, mode: ModeLabel, phase: f64) -> FockResult<FockState> {
    let i = state.registry().index_of(mode)?;
    let mut out = BTreeMap::new();
    for (occ, amp) in state.iter() {
        let ph = C64::from_polar(1.0, phase * f64::from(occ[i]));
        out.insert(occ.clone(), amp * ph);
    }
    Ok(state.rebuild(out))
}

/// Polarization rotator on one spatial index, angle in radians.
///
/// Acts as the coupler law on the (V, H) pair with `t = cos`, `r = sin`:
/// at `pi/2` it maps `a_V+ -> a_H+` and `a_H+ -> -a_V+`.
pub fn apply_waveplate(state: &FockState, spatial: u32, angle: f64) -> FockResult<FockState> {
    state.registry().polarized_pair(spatial)?;
    // cos^2 + sin^2 = 1 by construction, skip the unitarity check.
    let params = BeamSplitterParams::raw(angle.cos(), angle.sin());
    apply_beam_splitter(state, ModeLabel::v(spatial), ModeLabel::h(spatial), params, 0.0)
}

/// Polarizing splitter: V transmits, H reflects.
///
/// Inputs `in_a`, `in_b` map to outputs `out_a`, `out_b` as
/// `aV -> out_a V`, `bV -> out_b V`, `aH -> out_b H`, `bH -> out_a H`.
/// This is a pure relabelling of modes; output indices may reuse the input
/// indices or be fresh ones.
pub fn apply_pbs(
    state: &FockState,
    in_a: u32,
    in_b: u32,
    out_a: u32,
    out_b: u32,
) -> FockResult<FockState> {
    if in_a == in_b {
        return Err(FockError::DuplicateMode(ModeLabel::v(in_a)));
    }
    state.registry().polarized_pair(in_a)?;
    state.registry().polarized_pair(in_b)?;
    state.relabel(&[
        (ModeLabel::v(in_a), ModeLabel::v(out_a)),
        (ModeLabel::v(in_b), ModeLabel::v(out_b)),
        (ModeLabel::h(in_a), ModeLabel::h(out_b)),
        (ModeLabel::h(in_b), ModeLabel::h(out_a)),
    ])
}

/// Taps `mode` with a `(t, r)` coupler into a fresh vacuum ancilla and
/// heralds on detecting exactly `k` photons there.
///
/// For `k = 0` the surviving amplitudes are damped by `t^n`; for `k = 1`
/// the map sends `f_{n+1}` to `sqrt(n+1) t^n r f_{n+1}` on `|n>`, which is
/// the textbook heralded subtraction. The returned state keeps its reduced
/// norm; see [`ConditionalResult`].
pub fn subtract_photon(
    state: &FockState,
    mode: ModeLabel,
    k: u8,
    params: BeamSplitterParams,
) -> FockResult<ConditionalResult> {
    let norm_in = state.norm_sqr();
    if norm_in <= 0.0 {
        return Err(FockError::ZeroNorm);
    }
    let ancilla = ModeLabel::scalar(state.registry().fresh_spatials(1)[0]);
    let opened = state.add_vacuum_modes(&[ancilla])?;
    let mixed = apply_beam_splitter(&opened, mode, ancilla, params, 0.0)?;
    let kept = mixed.project_counts(&[ancilla], &[k])?;
    let probability = kept.norm_sqr() / norm_in;
    Ok(ConditionalResult {
        state: kept,
        probability,
        outcome: format!("subtract[{k}]@{mode}"),
    })
}
