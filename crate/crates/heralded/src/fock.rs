//! Sparse Fock-basis states over a registry of labelled optical modes.
//!
//! A [`ModeRegistry`] fixes an ordered list of bosonic modes, each labelled
//! by a spatial index and a polarization tag (`V`, `H`, or `Scalar` for
//! modes without a polarization degree of freedom). A [`FockState`] maps
//! occupation vectors to complex amplitudes and is deliberately kept
//! unnormalized: conditional protocols scale amplitudes, and the squared
//! norm of a branch is its probability. Renormalization happens in one
//! place only (the planner, between pipeline stages) so that probability
//! bookkeeping stays auditable.
//!
//! Photon caps are constructor parameters. Passive elements conserve total
//! photon number, so caps are enforced where photons enter: `make_state`
//! and the other constructors. Amplitudes with magnitude below the prune
//! threshold are dropped to keep the maps small; the default threshold is
//! [`DEFAULT_PRUNE`] and can be adjusted per state.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Shorthand for the amplitude scalar used throughout the crate.
pub type C64 = Complex64;

/// Occupation numbers, one entry per registry mode, in registry order.
pub type Occupation = Vec<u8>;

/// Default magnitude below which amplitudes are dropped from the map.
pub const DEFAULT_PRUNE: f64 = 1e-14;

#[derive(Debug, Error, PartialEq)]
pub enum FockError {
    #[error("mode {0} is not in the registry")]
    UnknownMode(ModeLabel),
    #[error("duplicate mode label {0}")]
    DuplicateMode(ModeLabel),
    #[error("spatial index {0} mixes scalar and polarized mode labels")]
    PolarizationClash(u32),
    #[error("spatial index {0} must carry both a V and an H mode")]
    MissingPolarization(u32),
    #[error("registries do not match (left has {0} modes, right has {1})")]
    RegistryMismatch(usize, usize),
    #[error("registries share spatial index {0}; tensor factors must be disjoint")]
    OverlappingSpatial(u32),
    #[error("occupation vector has {got} entries, registry has {want} modes")]
    OccupationLength { got: usize, want: usize },
    #[error("term has {got} factor vectors, registry has {want} modes")]
    TermLength { got: usize, want: usize },
    #[error("per-mode photon cap {cap} exceeded by count {count}")]
    PerModeCap { cap: u32, count: u32 },
    #[error("total photon cap {cap} exceeded by total {total}")]
    TotalCap { cap: u32, total: u32 },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("beam splitter amplitudes t={t}, r={r} violate t^2 + r^2 = 1")]
    NotUnitary { t: f64, r: f64 },
    #[error("transmittance {0} must lie in [0, 1]")]
    BadTransmittance(f64),
    #[error("expected {want} counts for {got} measured modes")]
    CountsLength { want: usize, got: usize },
    #[error("relabelling maps two modes onto {0}")]
    RelabelCollision(ModeLabel),
}

pub type FockResult<T> = Result<T, FockError>;

/// Polarization tag of a mode. `Scalar` marks a mode with no polarization
/// degree of freedom (for example the output of an erasing cascade).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    Scalar,
    V,
    H,
}

/// A single bosonic mode: spatial index plus polarization tag.
///
/// Labels order by `(spatial, polarization)`, which fixes the canonical
/// registry order used when comparing states from different pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub spatial: u32,
    pub pol: Polarization,
}

impl ModeLabel {
    pub const fn scalar(spatial: u32) -> Self {
        Self { spatial, pol: Polarization::Scalar }
    }

    pub const fn v(spatial: u32) -> Self {
        Self { spatial, pol: Polarization::V }
    }

    pub const fn h(spatial: u32) -> Self {
        Self { spatial, pol: Polarization::H }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pol {
            Polarization::Scalar => write!(f, "{}", self.spatial),
            Polarization::V => write!(f, "{}V", self.spatial),
            Polarization::H => write!(f, "{}H", self.spatial),
        }
    }
}

/// Ordered, duplicate-free list of mode labels.
///
/// A spatial index either carries a single scalar mode or a V/H pair;
/// mixing the two on one index is rejected at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeRegistry {
    labels: Vec<ModeLabel>,
}

impl ModeRegistry {
    pub fn new(labels: Vec<ModeLabel>) -> FockResult<Self> {
        for (i, a) in labels.iter().enumerate() {
            for b in &labels[i + 1..] {
                if a == b {
                    return Err(FockError::DuplicateMode(*a));
                }
                if a.spatial == b.spatial
                    && (a.pol == Polarization::Scalar) != (b.pol == Polarization::Scalar)
                {
                    return Err(FockError::PolarizationClash(a.spatial));
                }
            }
        }
        Ok(Self { labels })
    }

    /// Registry of scalar modes with the given spatial indices.
    pub fn scalars(spatials: &[u32]) -> FockResult<Self> {
        Self::new(spatials.iter().map(|&s| ModeLabel::scalar(s)).collect())
    }

    /// Registry of V/H pairs with the given spatial indices.
    pub fn polarized(spatials: &[u32]) -> FockResult<Self> {
        let mut labels = Vec::with_capacity(2 * spatials.len());
        for &s in spatials {
            labels.push(ModeLabel::v(s));
            labels.push(ModeLabel::h(s));
        }
        Self::new(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn index_of(&self, label: ModeLabel) -> FockResult<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or(FockError::UnknownMode(label))
    }

    pub fn contains(&self, label: ModeLabel) -> bool {
        self.labels.contains(&label)
    }

    /// Indices of the V and H modes of a spatial index.
    pub fn polarized_pair(&self, spatial: u32) -> FockResult<(usize, usize)> {
        let v = self
            .index_of(ModeLabel::v(spatial))
            .map_err(|_| FockError::MissingPolarization(spatial))?;
        let h = self
            .index_of(ModeLabel::h(spatial))
            .map_err(|_| FockError::MissingPolarization(spatial))?;
        Ok((v, h))
    }

    /// `count` spatial indices not yet present in the registry.
    pub fn fresh_spatials(&self, count: usize) -> Vec<u32> {
        let next = self.labels.iter().map(|l| l.spatial + 1).max().unwrap_or(0);
        (next..next + count as u32).collect()
    }
}

/// Photon caps applied when photons enter a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Caps {
    pub per_mode: u32,
    pub total: u32,
}

impl Caps {
    pub fn new(per_mode: u32, total: u32) -> Self {
        Self { per_mode, total }
    }

    fn admit(&self, occ: &[u8]) -> FockResult<()> {
        let mut total = 0u32;
        for &n in occ {
            if u32::from(n) > self.per_mode {
                return Err(FockError::PerModeCap { cap: self.per_mode, count: n.into() });
            }
            total += u32::from(n);
        }
        if total > self.total {
            return Err(FockError::TotalCap { cap: self.total, total });
        }
        Ok(())
    }
}

/// Sparse, unnormalized Fock-basis state vector.
///
/// Amplitudes live in a `BTreeMap` keyed by occupation vectors, so
/// iteration order is lexicographic and therefore deterministic; reports
/// and serialized artifacts produced from a state are reproducible.
#[derive(Clone, Debug)]
pub struct FockState {
    registry: ModeRegistry,
    caps: Caps,
    prune: f64,
    amps: BTreeMap<Occupation, C64>,
}

impl FockState {
    /// The vacuum on the given registry.
    pub fn vacuum(registry: ModeRegistry, caps: Caps) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(vec![0; registry.len()], C64::new(1.0, 0.0));
        Self { registry, caps, prune: DEFAULT_PRUNE, amps }
    }

    /// Builds a state from explicit kets. Intended for tests and small
    /// fixtures; `make_state` is the term-based constructor.
    pub fn from_kets(
        registry: ModeRegistry,
        caps: Caps,
        kets: &[(Occupation, C64)],
    ) -> FockResult<Self> {
        let mut state = Self {
            registry,
            caps,
            prune: DEFAULT_PRUNE,
            amps: BTreeMap::new(),
        };
        for (occ, amp) in kets {
            if occ.len() != state.registry.len() {
                return Err(FockError::OccupationLength {
                    got: occ.len(),
                    want: state.registry.len(),
                });
            }
            state.caps.admit(occ)?;
            state.accumulate(occ.clone(), *amp);
        }
        state.prune_now();
        Ok(state)
    }

    pub fn with_prune(mut self, threshold: f64) -> Self {
        self.prune = threshold;
        self.prune_now();
        self
    }

    pub fn registry(&self) -> &ModeRegistry {
        &self.registry
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune
    }

    /// Number of kets with retained (non-pruned) amplitude.
    pub fn ket_count(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, occ: &[u8]) -> C64 {
        self.amps.get(occ).copied().unwrap_or_default()
    }

    /// Kets and amplitudes in lexicographic occupation order.
    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, &C64)> {
        self.amps.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        let mut out = self.clone();
        for amp in out.amps.values_mut() {
            *amp *= factor;
        }
        out.prune_now();
        out
    }

    pub fn normalized(&self) -> FockResult<Self> {
        let n2 = self.norm_sqr();
        if n2 <= 0.0 {
            return Err(FockError::ZeroNorm);
        }
        Ok(self.scaled(C64::new(1.0 / n2.sqrt(), 0.0)))
    }

    /// Sum of two states on the same registry. Caps take the larger of
    /// the two bounds; no ket can exceed what its source already allowed.
    pub fn add(&self, other: &Self) -> FockResult<Self> {
        self.check_same_registry(other)?;
        let mut out = self.clone();
        out.caps = Caps::new(
            self.caps.per_mode.max(other.caps.per_mode),
            self.caps.total.max(other.caps.total),
        );
        for (occ, amp) in &other.amps {
            out.accumulate(occ.clone(), *amp);
        }
        out.prune_now();
        Ok(out)
    }

    /// Tensor product. The registries must use disjoint spatial indices;
    /// the result concatenates them, left factor first. Total caps add,
    /// since the factors contribute photons independently.
    pub fn tensor(&self, other: &Self) -> FockResult<Self> {
        for l in self.registry.labels() {
            if other.registry.labels().iter().any(|r| r.spatial == l.spatial) {
                return Err(FockError::OverlappingSpatial(l.spatial));
            }
        }
        let mut labels = self.registry.labels().to_vec();
        labels.extend_from_slice(other.registry.labels());
        let registry = ModeRegistry::new(labels)?;
        let caps = Caps::new(
            self.caps.per_mode.max(other.caps.per_mode),
            self.caps.total + other.caps.total,
        );
        let mut amps = BTreeMap::new();
        for (lo, la) in &self.amps {
            for (ro, ra) in &other.amps {
                let mut occ = lo.clone();
                occ.extend_from_slice(ro);
                amps.insert(occ, la * ra);
            }
        }
        let mut out = Self { registry, caps, prune: self.prune.min(other.prune), amps };
        out.prune_now();
        Ok(out)
    }

    /// Appends vacuum modes to the registry.
    pub fn add_vacuum_modes(&self, labels: &[ModeLabel]) -> FockResult<Self> {
        let mut all = self.registry.labels().to_vec();
        all.extend_from_slice(labels);
        let registry = ModeRegistry::new(all)?;
        let mut amps = BTreeMap::new();
        for (occ, amp) in &self.amps {
            let mut ext = occ.clone();
            ext.extend(std::iter::repeat(0).take(labels.len()));
            amps.insert(ext, *amp);
        }
        Ok(Self { registry, caps: self.caps, prune: self.prune, amps })
    }

    /// Inner product `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> FockResult<C64> {
        self.check_same_registry(other)?;
        let mut acc = C64::default();
        for (occ, a) in &self.amps {
            if let Some(b) = other.amps.get(occ) {
                acc += a.conj() * b;
            }
        }
        Ok(acc)
    }

    /// Projects the listed modes onto definite photon counts and removes
    /// them from the registry. The result is unnormalized; its squared
    /// norm over the input's is the outcome probability. An empty result
    /// is valid and signals probability zero.
    pub fn project_counts(&self, modes: &[ModeLabel], counts: &[u8]) -> FockResult<Self> {
        if modes.len() != counts.len() {
            return Err(FockError::CountsLength { want: modes.len(), got: counts.len() });
        }
        let idx: Vec<usize> = modes
            .iter()
            .map(|&m| self.registry.index_of(m))
            .collect::<FockResult<_>>()?;
        let keep: Vec<usize> =
            (0..self.registry.len()).filter(|i| !idx.contains(i)).collect();
        let registry =
            ModeRegistry::new(keep.iter().map(|&i| self.registry.labels()[i]).collect())?;
        let mut amps = BTreeMap::new();
        for (occ, amp) in &self.amps {
            if idx.iter().zip(counts).all(|(&i, &c)| occ[i] == c) {
                let reduced: Occupation = keep.iter().map(|&i| occ[i]).collect();
                amps.insert(reduced, *amp);
            }
        }
        Ok(Self { registry, caps: self.caps, prune: self.prune, amps })
    }

    /// Keeps only kets whose photon total over `modes` equals `n`. The
    /// registry is unchanged: this is a subspace projection, not a
    /// detection, so coherences within the subspace survive.
    pub fn project_photon_total(&self, modes: &[ModeLabel], n: u32) -> FockResult<Self> {
        let idx: Vec<usize> = modes
            .iter()
            .map(|&m| self.registry.index_of(m))
            .collect::<FockResult<_>>()?;
        let mut out = self.clone();
        out.amps.retain(|occ, _| idx.iter().map(|&i| u32::from(occ[i])).sum::<u32>() == n);
        Ok(out)
    }

    /// Probabilities of every photon-count pattern on the listed modes,
    /// for the normalized version of this state.
    pub fn branch_probabilities(
        &self,
        modes: &[ModeLabel],
    ) -> FockResult<BTreeMap<Occupation, f64>> {
        let idx: Vec<usize> = modes
            .iter()
            .map(|&m| self.registry.index_of(m))
            .collect::<FockResult<_>>()?;
        let n2 = self.norm_sqr();
        if n2 <= 0.0 {
            return Err(FockError::ZeroNorm);
        }
        let mut out: BTreeMap<Occupation, f64> = BTreeMap::new();
        for (occ, amp) in &self.amps {
            let pattern: Occupation = idx.iter().map(|&i| occ[i]).collect();
            *out.entry(pattern).or_default() += amp.norm_sqr() / n2;
        }
        Ok(out)
    }

    /// Renames modes. Unlisted modes keep their labels; the renamed
    /// registry is revalidated, so collisions and scalar/polarized mixes
    /// are rejected.
    pub fn relabel(&self, pairs: &[(ModeLabel, ModeLabel)]) -> FockResult<Self> {
        let mut labels = self.registry.labels().to_vec();
        for &(from, to) in pairs {
            let i = self.registry.index_of(from)?;
            labels[i] = to;
        }
        let registry = ModeRegistry::new(labels).map_err(|e| match e {
            FockError::DuplicateMode(l) => FockError::RelabelCollision(l),
            other => other,
        })?;
        Ok(Self { registry, caps: self.caps, prune: self.prune, amps: self.amps.clone() })
    }

    /// Reorders modes to match `target`, which must contain exactly the
    /// same labels.
    pub fn permuted_to(&self, target: &ModeRegistry) -> FockResult<Self> {
        if target.len() != self.registry.len() {
            return Err(FockError::RegistryMismatch(self.registry.len(), target.len()));
        }
        let perm: Vec<usize> = target
            .labels()
            .iter()
            .map(|&l| self.registry.index_of(l))
            .collect::<FockResult<_>>()?;
        let mut amps = BTreeMap::new();
        for (occ, amp) in &self.amps {
            let newocc: Occupation = perm.iter().map(|&i| occ[i]).collect();
            amps.insert(newocc, *amp);
        }
        Ok(Self { registry: target.clone(), caps: self.caps, prune: self.prune, amps })
    }

    /// Reorders modes into canonical `(spatial, polarization)` order.
    pub fn sorted_modes(&self) -> Self {
        let mut labels = self.registry.labels().to_vec();
        labels.sort();
        let target = ModeRegistry::new(labels).expect("sorting preserves validity");
        self.permuted_to(&target).expect("same label set")
    }

    /// Largest photon total over all retained kets.
    pub fn max_total_photons(&self) -> u32 {
        self.amps
            .keys()
            .map(|occ| occ.iter().map(|&n| u32::from(n)).sum())
            .max()
            .unwrap_or(0)
    }

    fn check_same_registry(&self, other: &Self) -> FockResult<()> {
        if self.registry != other.registry {
            return Err(FockError::RegistryMismatch(self.registry.len(), other.registry.len()));
        }
        Ok(())
    }

    pub(crate) fn accumulate(&mut self, occ: Occupation, amp: C64) {
        let entry = self.amps.entry(occ).or_default();
        *entry += amp;
    }

    pub(crate) fn prune_now(&mut self) {
        let threshold = self.prune;
        self.amps.retain(|_, a| a.norm() > threshold);
    }

    /// Builds a state from raw (occupation, amplitude) pairs without cap
    /// checks. Element implementations use this for photon-conserving
    /// rewrites of already-admitted states.
    pub(crate) fn rebuild(&self, amps: BTreeMap<Occupation, C64>) -> Self {
        let mut out =
            Self { registry: self.registry.clone(), caps: self.caps, prune: self.prune, amps };
        out.prune_now();
        out
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amps.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (occ, amp) in &self.amps {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let body: Vec<String> = occ.iter().map(|n| n.to_string()).collect();
            write!(f, "({:.6}{:+.6}i)|{}>", amp.re, amp.im, body.join(","))?;
        }
        Ok(())
    }
}

/// Builds a superposition of product states.
///
/// Each term is a coefficient together with one amplitude vector per
/// registry mode (indexed by photon number); the term contributes
/// `coeff * prod_k v_k[n_k]` to the ket `|n_1..n_M>`. Vectors shorter
/// than the per-mode cap are treated as zero-padded; longer ones are a
/// cap violation.
pub fn make_state(
    registry: &ModeRegistry,
    caps: Caps,
    terms: &[(C64, Vec<Vec<C64>>)],
) -> FockResult<FockState> {
    let mut state = FockState {
        registry: registry.clone(),
        caps,
        prune: DEFAULT_PRUNE,
        amps: BTreeMap::new(),
    };
    for (coeff, vectors) in terms {
        if vectors.len() != registry.len() {
            return Err(FockError::TermLength { got: vectors.len(), want: registry.len() });
        }
        for v in vectors {
            if v.len() > caps.per_mode as usize + 1 {
                return Err(FockError::PerModeCap {
                    cap: caps.per_mode,
                    count: (v.len() - 1) as u32,
                });
            }
        }
        let mut occ = vec![0u8; registry.len()];
        expand_term(&mut state, *coeff, vectors, 0, &mut occ)?;
    }
    state.prune_now();
    Ok(state)
}

fn expand_term(
    state: &mut FockState,
    partial: C64,
    vectors: &[Vec<C64>],
    mode: usize,
    occ: &mut Occupation,
) -> FockResult<()> {
    if partial.norm() <= state.prune {
        return Ok(());
    }
    if mode == vectors.len() {
        state.caps.admit(occ)?;
        state.accumulate(occ.clone(), partial);
        return Ok(());
    }
    for (n, v) in vectors[mode].iter().enumerate() {
        occ[mode] = n as u8;
        expand_term(state, partial * v, vectors, mode + 1, occ)?;
        occ[mode] = 0;
    }
    Ok(())
}

/// n! as a float. Occupation numbers stay small enough (totals are capped
/// well below 255) that the relative error is a few ulps.
pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * f64::from(k))
}

/// Binomial coefficient as a float, by the multiplicative formula.
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `|<a|b>|^2 / (<a|a><b|b>)`; scale-invariant state overlap.
pub fn fidelity(a: &FockState, b: &FockState) -> FockResult<f64> {
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    if na <= 0.0 || nb <= 0.0 {
        return Err(FockError::ZeroNorm);
    }
    Ok(a.inner(b)?.norm_sqr() / (na * nb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn two_scalar() -> ModeRegistry {
        ModeRegistry::scalars(&[1, 2]).unwrap()
    }

    #[test]
    fn registry_rejects_duplicates_and_clashes() {
        let dup = ModeRegistry::new(vec![ModeLabel::v(1), ModeLabel::v(1)]);
        assert_eq!(dup.unwrap_err(), FockError::DuplicateMode(ModeLabel::v(1)));
        let clash = ModeRegistry::new(vec![ModeLabel::scalar(1), ModeLabel::h(1)]);
        assert_eq!(clash.unwrap_err(), FockError::PolarizationClash(1));
        // V and H on one index are fine without the scalar.
        assert!(ModeRegistry::polarized(&[1, 2]).is_ok());
    }

    #[test]
    fn make_state_expands_terms_bilinearly() {
        let reg = two_scalar();
        let caps = Caps::new(3, 6);
        // (|0>+|1>) x (|0>-|1>) => |00> - |01> + |10> - |11>
        let st = make_state(
            &reg,
            caps,
            &[(c(1.0, 0.0), vec![vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(-1.0, 0.0)]])],
        )
        .unwrap();
        assert_eq!(st.ket_count(), 4);
        assert_relative_eq!(st.amplitude(&[1, 1]).re, -1.0);
        assert_relative_eq!(st.norm_sqr(), 4.0);
    }

    #[test]
    fn make_state_enforces_caps() {
        let reg = two_scalar();
        let long = make_state(
            &reg,
            Caps::new(1, 4),
            &[(c(1.0, 0.0), vec![vec![c(1.0, 0.0); 3], vec![c(1.0, 0.0)]])],
        );
        assert!(matches!(long.unwrap_err(), FockError::PerModeCap { cap: 1, .. }));
        let total = make_state(
            &reg,
            Caps::new(3, 2),
            &[(
                c(1.0, 0.0),
                vec![vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
            )],
        );
        assert!(matches!(total.unwrap_err(), FockError::TotalCap { cap: 2, total: 3 }));
    }

    #[test]
    fn tensor_requires_disjoint_spatials() {
        let a = FockState::vacuum(ModeRegistry::scalars(&[1]).unwrap(), Caps::new(2, 2));
        let b = FockState::vacuum(ModeRegistry::polarized(&[1]).unwrap(), Caps::new(2, 2));
        assert_eq!(a.tensor(&b).unwrap_err(), FockError::OverlappingSpatial(1));
    }

    #[test]
    fn inner_is_conjugate_linear_on_the_left() {
        let reg = ModeRegistry::scalars(&[1]).unwrap();
        let caps = Caps::new(2, 2);
        let a = FockState::from_kets(reg.clone(), caps, &[(vec![0], c(0.0, 1.0))]).unwrap();
        let b = FockState::from_kets(reg, caps, &[(vec![0], c(1.0, 0.0))]).unwrap();
        let ab = a.inner(&b).unwrap();
        assert_relative_eq!(ab.im, -1.0);
        let ba = b.inner(&a).unwrap();
        assert_relative_eq!(ba.im, 1.0);
    }

    #[test]
    fn project_counts_removes_measured_modes() {
        let reg = two_scalar();
        let caps = Caps::new(2, 4);
        let inv = 1.0 / 2.0_f64.sqrt();
        // (|0,1> + |1,0>)/sqrt2, project mode 2 onto count 0.
        let st = FockState::from_kets(
            reg,
            caps,
            &[(vec![0, 1], c(inv, 0.0)), (vec![1, 0], c(inv, 0.0))],
        )
        .unwrap();
        let out = st.project_counts(&[ModeLabel::scalar(2)], &[0]).unwrap();
        assert_eq!(out.registry().labels(), &[ModeLabel::scalar(1)]);
        assert_relative_eq!(out.norm_sqr(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(out.amplitude(&[1]).re, inv, epsilon = 1e-12);
        // Pattern that never occurs: empty state, probability zero.
        let none = st.project_counts(&[ModeLabel::scalar(2)], &[2]).unwrap();
        assert_eq!(none.ket_count(), 0);
        assert_relative_eq!(none.norm_sqr(), 0.0);
    }

    #[test]
    fn project_photon_total_keeps_coherence() {
        let reg = two_scalar();
        let caps = Caps::new(2, 4);
        let st = FockState::from_kets(
            reg,
            caps,
            &[
                (vec![0, 1], c(0.5, 0.0)),
                (vec![1, 0], c(0.5, 0.0)),
                (vec![1, 1], c(0.5, 0.0)),
                (vec![0, 0], c(0.5, 0.0)),
            ],
        )
        .unwrap();
        let one = st
            .project_photon_total(&[ModeLabel::scalar(1), ModeLabel::scalar(2)], 1)
            .unwrap();
        assert_eq!(one.ket_count(), 2);
        assert_eq!(one.registry().len(), 2);
        assert_relative_eq!(one.norm_sqr(), 0.5);
    }

    #[test]
    fn fidelity_matches_hand_value() {
        let reg = ModeRegistry::scalars(&[1]).unwrap();
        let caps = Caps::new(2, 2);
        let zero = FockState::from_kets(reg.clone(), caps, &[(vec![0], c(1.0, 0.0))]).unwrap();
        let plus = FockState::from_kets(
            reg,
            caps,
            &[(vec![0], c(1.0, 0.0)), (vec![1], c(1.0, 0.0))],
        )
        .unwrap();
        // |<0|+>|^2 with |+> unnormalized: scale invariance gives 1/2.
        assert_relative_eq!(fidelity(&zero, &plus).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        let reg = two_scalar();
        let caps = Caps::new(2, 4);
        let st = FockState::from_kets(
            reg,
            caps,
            &[
                (vec![0, 1], c(0.3, 0.4)),
                (vec![1, 0], c(0.5, 0.0)),
                (vec![2, 1], c(0.0, 0.7)),
            ],
        )
        .unwrap();
        let branches = st.branch_probabilities(&[ModeLabel::scalar(2)]).unwrap();
        let total: f64 = branches.values().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn relabel_and_permute_round_trip() {
        let reg = ModeRegistry::polarized(&[3]).unwrap();
        let caps = Caps::new(2, 4);
        let st =
            FockState::from_kets(reg, caps, &[(vec![1, 0], c(1.0, 0.0))]).unwrap();
        let renamed = st
            .relabel(&[(ModeLabel::v(3), ModeLabel::v(1)), (ModeLabel::h(3), ModeLabel::h(1))])
            .unwrap();
        assert_relative_eq!(renamed.amplitude(&[1, 0]).re, 1.0);
        let sorted = renamed.sorted_modes();
        assert_eq!(sorted.registry().labels(), &[ModeLabel::v(1), ModeLabel::h(1)]);
        // Collision is rejected.
        let bad = st.relabel(&[(ModeLabel::v(3), ModeLabel::h(3))]);
        assert_eq!(bad.unwrap_err(), FockError::RelabelCollision(ModeLabel::h(3)));
    }

    #[test]
    fn pruning_drops_tiny_amplitudes() {
        let reg = ModeRegistry::scalars(&[1]).unwrap();
        let st = FockState::from_kets(
            reg,
            Caps::new(2, 2),
            &[(vec![0], c(1.0, 0.0)), (vec![1], c(1e-16, 0.0))],
        )
        .unwrap();
        assert_eq!(st.ket_count(), 1);
        let kept = st.with_prune(0.0);
        assert_eq!(kept.ket_count(), 1); // already gone
    }
}
