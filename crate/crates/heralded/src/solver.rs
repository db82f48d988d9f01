//! Closed-form maps of the heralded pipelines and their inversions.
//!
//! Each preparation scheme composes a heralded subtraction, an erasing
//! merge and a truncation. For those pipelines the end-to-end action on
//! amplitude vectors has a closed form, and that form is triangular in
//! the photon number: the `n`-th output amplitude involves one input
//! amplitude of order `n + 1` and lower-order ones only. The inversions
//! here exploit that to solve for source amplitudes exactly, given the
//! seed amplitudes at photon number zero.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::fock::{binomial, factorial, C64};

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("amplitude vectors must be non-empty and of equal length")]
    DimensionMismatch,
    #[error("tensor data length {got} does not match dims product {want}")]
    BadShape { got: usize, want: usize },
    #[error("cannot invert: {0} vanishes")]
    SingularPivot(&'static str),
    #[error("need at least one branch")]
    NoBranches,
    #[error("a zero matrix has no Schmidt form")]
    ZeroTarget,
}

pub type SolverResult<T> = Result<T, SolverError>;

/// Transmission-damping map: `out_n = t1^n f_n`. This is what surviving
/// amplitudes pick up when the tap detector sees nothing.
pub fn b0_apply(f: &[C64], t1: f64) -> Vec<C64> {
    f.iter().enumerate().map(|(n, &fn_)| fn_ * t1.powi(n as i32)).collect()
}

/// One-photon-subtracted map: `out_n = sqrt(n+1) t1^n r1 f_{n+1}`.
pub fn b1_apply(f: &[C64], t1: f64, r1: f64) -> Vec<C64> {
    (0..f.len().saturating_sub(1))
        .map(|n| f[n + 1] * ((n as f64 + 1.0).sqrt() * t1.powi(n as i32) * r1))
        .collect()
}

fn vector_get(v: &[C64], idx: usize) -> C64 {
    v.get(idx).copied().unwrap_or_default()
}

/// Composed subtraction-plus-merge map of the two-branch polarized
/// pipeline. Inputs ride on the V and H lines, lose one photon to a
/// `(t1, r1)` tap, and merge with weights `(r2, t2)`; the two outputs
/// correspond to the tap photon having come from `f` or from `g`.
/// Output vectors have length `n_max + 1`.
pub fn forward_two_term(
    f_in: &[C64],
    g_in: &[C64],
    t1: f64,
    r1: f64,
    t2: f64,
    r2: f64,
    n_max: usize,
) -> (Vec<C64>, Vec<C64>) {
    let mut f_out = vec![C64::default(); n_max + 1];
    let mut g_out = vec![C64::default(); n_max + 1];
    for n in 0..=n_max {
        let t1n = t1.powi(n as i32);
        let mut fsum = C64::default();
        let mut gsum = C64::default();
        for k in 0..=n {
            let comb = ((k as f64 + 1.0) * binomial(n as u32, k as u32)).sqrt();
            fsum += vector_get(f_in, k + 1)
                * vector_get(g_in, n - k)
                * (comb * r2.powi(k as i32) * t2.powi((n - k) as i32));
            gsum += vector_get(g_in, k + 1)
                * vector_get(f_in, n - k)
                * (comb * t2.powi(k as i32) * r2.powi((n - k) as i32));
        }
        f_out[n] = fsum * (t1n * r1);
        g_out[n] = gsum * (t1n * r1);
    }
    (f_out, g_out)
}

/// Solves [`forward_two_term`] for the source vectors.
///
/// `f` and `g` are the desired outputs (equal length, the truncation
/// bound); `seeds` fixes the free zero-photon amplitudes of the sources.
/// The returned vectors are one entry longer than the targets. Exact: a
/// forward pass over the result reproduces `f` and `g` to rounding.
pub fn invert_two_term(
    f: &[C64],
    g: &[C64],
    t1: f64,
    r1: f64,
    t2: f64,
    r2: f64,
    seeds: (C64, C64),
) -> SolverResult<(Vec<C64>, Vec<C64>)> {
    if f.is_empty() || f.len() != g.len() {
        return Err(SolverError::DimensionMismatch);
    }
    for (value, name) in [
        (t1, "the tap transmission t1"),
        (r1, "the tap reflection r1"),
        (t2, "the merge weight t2"),
        (r2, "the merge weight r2"),
    ] {
        if value == 0.0 {
            return Err(SolverError::SingularPivot(name));
        }
    }
    if seeds.0 == C64::default() || seeds.1 == C64::default() {
        return Err(SolverError::SingularPivot("a seed amplitude"));
    }

    let len = f.len() + 1;
    let mut f_src = vec![C64::default(); len];
    let mut g_src = vec![C64::default(); len];
    f_src[0] = seeds.0;
    g_src[0] = seeds.1;

    for n in 0..f.len() {
        let t1n = t1.powi(n as i32);
        let mut f_known = C64::default();
        let mut g_known = C64::default();
        for k in 0..n {
            let comb = ((k as f64 + 1.0) * binomial(n as u32, k as u32)).sqrt();
            f_known += f_src[k + 1]
                * g_src[n - k]
                * (comb * t1n * r1 * r2.powi(k as i32) * t2.powi((n - k) as i32));
            g_known += g_src[k + 1]
                * f_src[n - k]
                * (comb * t1n * r1 * t2.powi(k as i32) * r2.powi((n - k) as i32));
        }
        let order = (n as f64 + 1.0).sqrt();
        f_src[n + 1] =
            (f[n] - f_known) / (g_src[0] * (order * t1n * r1 * r2.powi(n as i32)));
        g_src[n + 1] =
            (g[n] - g_known) / (f_src[0] * (order * t1n * r1 * t2.powi(n as i32)));
    }
    Ok((f_src, g_src))
}

/// Dense row-major tensor of complex amplitudes, indexed by one photon
/// count per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeTensor {
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl AmplitudeTensor {
    pub fn zeros(dims: &[usize]) -> Self {
        let len = dims.iter().product();
        Self { dims: dims.to_vec(), data: vec![C64::default(); len] }
    }

    pub fn from_vec(dims: &[usize], data: Vec<C64>) -> SolverResult<Self> {
        let want: usize = dims.iter().product();
        if data.len() != want || dims.iter().any(|&d| d == 0) {
            return Err(SolverError::BadShape { got: data.len(), want });
        }
        Ok(Self { dims: dims.to_vec(), data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut off = 0;
        for (i, (&x, &d)) in idx.iter().zip(&self.dims).enumerate() {
            debug_assert!(x < d, "index {x} out of range for axis {i} of size {d}");
            off = off * d + x;
        }
        off
    }

    /// Amplitude at `idx`; indices beyond any axis read as zero.
    pub fn get(&self, idx: &[usize]) -> C64 {
        if idx.iter().zip(&self.dims).any(|(&x, &d)| x >= d) {
            return C64::default();
        }
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: C64) {
        let off = self.offset(idx);
        self.data[off] = value;
    }

    /// All multi-indices in row-major order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let dims = self.dims.clone();
        (0..self.data.len()).map(move |mut off| {
            let mut idx = vec![0usize; dims.len()];
            for ax in (0..dims.len()).rev() {
                idx[ax] = off % dims[ax];
                off /= dims[ax];
            }
            idx
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    /// Copy with `axis` cut down to its first `new_dim` entries.
    pub fn truncated_axis(&self, axis: usize, new_dim: usize) -> Self {
        let mut dims = self.dims.clone();
        dims[axis] = new_dim.min(self.dims[axis]);
        let mut out = Self::zeros(&dims);
        for idx in out.indices().collect::<Vec<_>>() {
            out.set(&idx, self.get(&idx));
        }
        out
    }

    /// `<self|other>` with `self` conjugated. Entries outside either
    /// shape read as zero, so differing dims are allowed.
    pub fn overlap(&self, other: &Self) -> C64 {
        self.indices()
            .map(|idx| self.get(&idx).conj() * other.get(&idx))
            .sum()
    }
}

/// All ways of writing `total` (componentwise) as an ordered sum of
/// `parts` non-negative vectors.
fn compositions(total: &[usize], parts: usize) -> Vec<Vec<Vec<usize>>> {
    if parts == 1 {
        return vec![vec![total.to_vec()]];
    }
    let mut out = Vec::new();
    let mut first = vec![0usize; total.len()];
    loop {
        let rest: Vec<usize> = total.iter().zip(&first).map(|(&t, &f)| t - f).collect();
        for mut tail in compositions(&rest, parts - 1) {
            let mut whole = Vec::with_capacity(parts);
            whole.push(first.clone());
            whole.append(&mut tail);
            out.push(whole);
        }
        // Next componentwise choice below `total`.
        let mut ax = total.len();
        loop {
            if ax == 0 {
                return out;
            }
            ax -= 1;
            if first[ax] < total[ax] {
                first[ax] += 1;
                for later in first[ax + 1..].iter_mut() {
                    *later = 0;
                }
                break;
            }
            first[ax] = 0;
        }
    }
}

fn multi_factorial(idx: &[usize]) -> f64 {
    idx.iter().map(|&x| factorial(x as u32)).product()
}

/// Forward map of the grouped (tuple) pipeline.
///
/// There are `d` branches, each a tensor over `g` modes whose last axis
/// feeds a `(t1, r1)` tap. A herald marks that exactly one photon was
/// tapped somewhere, and the branches' mode groups merge slotwise with
/// balanced weights. Output `j` is the amplitude tensor of the merged
/// group given the tapped photon came from branch `j`.
pub fn forward_tuple(
    inputs: &[AmplitudeTensor],
    t1: f64,
    r1: f64,
    out_dims: &[usize],
) -> SolverResult<Vec<AmplitudeTensor>> {
    let d = inputs.len();
    if d == 0 {
        return Err(SolverError::NoBranches);
    }
    let g = inputs[0].dims().len();
    if g == 0
        || inputs.iter().any(|t| t.dims() != inputs[0].dims())
        || out_dims.len() != g
    {
        return Err(SolverError::DimensionMismatch);
    }
    let droot = d as f64;

    let mut outputs = Vec::with_capacity(d);
    for j in 0..d {
        let mut out = AmplitudeTensor::zeros(out_dims);
        for idx in out.indices().collect::<Vec<_>>() {
            let s: usize = idx.iter().sum();
            let q = idx[g - 1];
            let base = t1.powi(q as i32) * r1 * droot.powf(-(s as f64) / 2.0)
                * multi_factorial(&idx).sqrt();
            let mut sum = C64::default();
            for split in compositions(&idx, d) {
                let mut term = C64::new(1.0, 0.0);
                let mut weight = 1.0;
                for (k, part) in split.iter().enumerate() {
                    let mut lookup = part.clone();
                    if k == j {
                        lookup[g - 1] += 1;
                        weight *= (part[g - 1] as f64 + 1.0).sqrt();
                    }
                    term *= inputs[k].get(&lookup);
                    weight /= multi_factorial(part).sqrt();
                }
                sum += term * weight;
            }
            out.set(&idx, sum * base);
        }
        outputs.push(out);
    }
    Ok(outputs)
}

/// Solves [`forward_tuple`] for the branch source tensors.
///
/// `targets[j]` is the wanted output for the photon-from-branch-`j`
/// herald; all targets share their dims. `seeds[k]` fixes branch `k`'s
/// all-vacuum amplitude. Entries of a source tensor with photons in the
/// passenger slots but none on the tapped axis are gauge freedom and are
/// set to zero. The result's last axis is one longer than the target's.
pub fn invert_tuple(
    targets: &[AmplitudeTensor],
    t1: f64,
    r1: f64,
    seeds: &[C64],
) -> SolverResult<Vec<AmplitudeTensor>> {
    let d = targets.len();
    if d == 0 {
        return Err(SolverError::NoBranches);
    }
    let g = targets[0].dims().len();
    if g == 0 || targets.iter().any(|t| t.dims() != targets[0].dims()) || seeds.len() != d {
        return Err(SolverError::DimensionMismatch);
    }
    if t1 == 0.0 {
        return Err(SolverError::SingularPivot("the tap transmission t1"));
    }
    if r1 == 0.0 {
        return Err(SolverError::SingularPivot("the tap reflection r1"));
    }
    if seeds.iter().any(|&s| s == C64::default()) {
        return Err(SolverError::SingularPivot("a seed amplitude"));
    }
    let droot = d as f64;

    let mut src_dims = targets[0].dims().to_vec();
    src_dims[g - 1] += 1;
    let mut sources: Vec<AmplitudeTensor> =
        (0..d).map(|_| AmplitudeTensor::zeros(&src_dims)).collect();
    for (k, src) in sources.iter_mut().enumerate() {
        src.set(&vec![0; g], seeds[k]);
    }

    // Target entries ordered by total photon number; each step pins the
    // one source amplitude of the next order.
    let mut order: Vec<Vec<usize>> = targets[0].indices().collect();
    order.sort_by_key(|idx| (idx.iter().sum::<usize>(), idx.clone()));

    for idx in order {
        let s: usize = idx.iter().sum();
        let q = idx[g - 1];
        let base = t1.powi(q as i32) * r1 * droot.powf(-(s as f64) / 2.0)
            * multi_factorial(&idx).sqrt();
        let splits = compositions(&idx, d);
        for j in 0..d {
            // Everything already known, with the unknown entry still zero.
            let mut sum = C64::default();
            for split in &splits {
                let mut term = C64::new(1.0, 0.0);
                let mut weight = 1.0;
                for (k, part) in split.iter().enumerate() {
                    let mut lookup = part.clone();
                    if k == j {
                        lookup[g - 1] += 1;
                        weight *= (part[g - 1] as f64 + 1.0).sqrt();
                    }
                    term *= sources[k].get(&lookup);
                    weight /= multi_factorial(part).sqrt();
                }
                sum += term * weight;
            }
            let known = sum * base;

            let mut other_seeds = C64::new(1.0, 0.0);
            for (k, &seed) in seeds.iter().enumerate() {
                if k != j {
                    other_seeds *= seed;
                }
            }
            let pivot = other_seeds
                * (t1.powi(q as i32)
                    * r1
                    * droot.powf(-(s as f64) / 2.0)
                    * (q as f64 + 1.0).sqrt());
            let mut target_idx = idx.clone();
            target_idx[g - 1] += 1;
            let value = (targets[j].get(&idx) - known) / pivot;
            sources[j].set(&target_idx, value);
        }
    }
    Ok(sources)
}

/// Single-mode-per-branch case of [`forward_tuple`].
pub fn forward_multi(
    inputs: &[Vec<C64>],
    t1: f64,
    r1: f64,
    n_max: usize,
) -> SolverResult<Vec<Vec<C64>>> {
    let tensors: Vec<AmplitudeTensor> = inputs
        .iter()
        .map(|v| AmplitudeTensor::from_vec(&[v.len()], v.clone()))
        .collect::<SolverResult<_>>()?;
    let out = forward_tuple(&tensors, t1, r1, &[n_max + 1])?;
    Ok(out.into_iter().map(|t| t.as_slice().to_vec()).collect())
}

/// Single-mode-per-branch case of [`invert_tuple`].
pub fn invert_multi(
    targets: &[Vec<C64>],
    t1: f64,
    r1: f64,
    seeds: &[C64],
) -> SolverResult<Vec<Vec<C64>>> {
    let tensors: Vec<AmplitudeTensor> = targets
        .iter()
        .map(|v| AmplitudeTensor::from_vec(&[v.len()], v.clone()))
        .collect::<SolverResult<_>>()?;
    let out = invert_tuple(&tensors, t1, r1, seeds)?;
    Ok(out.into_iter().map(|t| t.as_slice().to_vec()).collect())
}

/// Bipartite decomposition of a coefficient matrix into orthonormal
/// factor pairs with non-negative weights.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    /// Weights, descending; squares sum to the matrix's squared norm.
    pub lambdas: Vec<f64>,
    /// Row-side factors, one per retained weight, each of length `rows`.
    pub left: Vec<Vec<C64>>,
    /// Column-side factors, each of length `cols`.
    pub right: Vec<Vec<C64>>,
    pub rank: usize,
}

/// Relative threshold below which singular values count as zero.
pub const SCHMIDT_RANK_TOL: f64 = 1e-10;

/// Decomposes `entries` (row-major, `rows * cols`) so that
/// `entries[a][b] = sum_i lambdas[i] left[i][a] right[i][b]`.
pub fn schmidt_split(rows: usize, cols: usize, entries: &[C64]) -> SolverResult<SchmidtDecomposition> {
    if rows == 0 || cols == 0 || entries.len() != rows * cols {
        return Err(SolverError::BadShape { got: entries.len(), want: rows * cols });
    }
    let matrix = DMatrix::from_row_slice(rows, cols, entries);
    let svd = matrix.svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let sigma = &svd.singular_values;

    let largest = sigma.iter().cloned().fold(0.0f64, f64::max);
    if largest <= 0.0 {
        return Err(SolverError::ZeroTarget);
    }
    let mut keep: Vec<usize> =
        (0..sigma.len()).filter(|&i| sigma[i] > SCHMIDT_RANK_TOL * largest).collect();
    keep.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).expect("finite"));

    let lambdas: Vec<f64> = keep.iter().map(|&i| sigma[i]).collect();
    let left: Vec<Vec<C64>> =
        keep.iter().map(|&i| u.column(i).iter().copied().collect()).collect();
    let right: Vec<Vec<C64>> =
        keep.iter().map(|&i| v_t.row(i).iter().copied().collect()).collect();
    let rank = keep.len();
    Ok(SchmidtDecomposition { lambdas, left, right, rank })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn max_dev(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn b_maps_match_hand_values() {
        let f = [c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0)];
        let damped = b0_apply(&f, 0.5);
        assert_relative_eq!(damped[2].re, -0.75, epsilon = 1e-15);
        let subtracted = b1_apply(&f, 0.5, 0.8);
        // n = 0: sqrt(1) * 0.5^0 * 0.8 * f_1
        assert_relative_eq!(subtracted[0].im, 1.6, epsilon = 1e-15);
        // n = 1: sqrt(2) * 0.5 * 0.8 * f_2
        assert_relative_eq!(subtracted[1].re, -3.0 * 2f64.sqrt() * 0.4, epsilon = 1e-15);
        assert_eq!(subtracted.len(), 2);
    }

    #[test]
    fn two_term_inversion_reproduces_the_targets() {
        let f = [c(0.3, 0.1), c(-0.4, 0.2), c(0.05, -0.7)];
        let g = [c(0.9, 0.0), c(0.2, 0.2), c(-0.3, 0.4)];
        let (t1, r1) = (0.8, 0.6);
        let (t2, r2) = (0.6, 0.8);
        let seeds = (c(1.0, 0.0), c(0.5, -0.5));
        let (fs, gs) = invert_two_term(&f, &g, t1, r1, t2, r2, seeds).unwrap();
        assert_eq!(fs.len(), 4);
        let (fo, go) = forward_two_term(&fs, &gs, t1, r1, t2, r2, 2);
        assert!(max_dev(&fo, &f) < 1e-12);
        assert!(max_dev(&go, &g) < 1e-12);
    }

    #[test]
    fn inversion_rejects_zero_pivots() {
        let f = [c(1.0, 0.0)];
        let g = [c(1.0, 0.0)];
        let zero = C64::default();
        assert_eq!(
            invert_two_term(&f, &g, 0.8, 0.6, 0.6, 0.8, (zero, c(1.0, 0.0))).unwrap_err(),
            SolverError::SingularPivot("a seed amplitude")
        );
        assert!(invert_two_term(&f, &g, 0.8, 0.0, 0.6, 0.8, (c(1.0, 0.0), c(1.0, 0.0)))
            .is_err());
    }

    #[test]
    fn multi_branch_round_trip_holds_for_three_branches() {
        let targets = vec![
            vec![c(0.5, 0.0), c(0.1, 0.2), c(-0.3, 0.1)],
            vec![c(0.0, 0.4), c(0.7, 0.0), c(0.2, -0.2)],
            vec![c(-0.6, 0.1), c(0.3, 0.3), c(0.0, 0.5)],
        ];
        let seeds = vec![c(1.0, 0.0), c(0.8, 0.1), c(-0.9, 0.3)];
        let sources = invert_multi(&targets, 0.9, (1.0f64 - 0.81).sqrt(), &seeds).unwrap();
        let outputs = forward_multi(&sources, 0.9, (1.0f64 - 0.81).sqrt(), 2).unwrap();
        for (got, want) in outputs.iter().zip(&targets) {
            assert!(max_dev(got, want) < 1e-12);
        }
    }

    #[test]
    fn balanced_unit_case_matches_the_hand_computation() {
        // d = 2 branches, unit seeds, balanced tap: the zero-photon output
        // is r1 * src_1 * seed, so hitting target 1 needs src_1 = sqrt(2).
        let targets = vec![vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let seeds = vec![c(1.0, 0.0), c(1.0, 0.0)];
        let sources = invert_multi(&targets, s, s, &seeds).unwrap();
        assert_relative_eq!(sources[0][1].re, 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(sources[1][1].re, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn grouped_tensors_round_trip() {
        // Two branches over two modes each, passenger axis of size 2.
        let dims = [2usize, 2];
        let t0 = AmplitudeTensor::from_vec(
            &dims,
            vec![c(0.4, 0.0), c(0.1, -0.2), c(0.0, 0.3), c(-0.5, 0.1)],
        )
        .unwrap();
        let t1_target = AmplitudeTensor::from_vec(
            &dims,
            vec![c(0.2, 0.2), c(0.6, 0.0), c(-0.1, 0.4), c(0.3, -0.3)],
        )
        .unwrap();
        let targets = vec![t0, t1_target];
        let seeds = vec![c(1.0, 0.0), c(0.7, -0.4)];
        let sources = invert_tuple(&targets, 0.85, (1.0f64 - 0.7225).sqrt(), &seeds).unwrap();
        assert_eq!(sources[0].dims(), &[2, 3]);
        let outputs =
            forward_tuple(&sources, 0.85, (1.0f64 - 0.7225).sqrt(), &dims).unwrap();
        for (got, want) in outputs.iter().zip(&targets) {
            assert!(max_dev(got.as_slice(), want.as_slice()) < 1e-12);
        }
    }

    #[test]
    fn schmidt_split_reconstructs_and_orthonormalizes() {
        let entries = vec![
            c(0.5, 0.1), c(0.0, -0.3), c(0.2, 0.0),
            c(-0.1, 0.4), c(0.6, 0.0), c(0.0, 0.2),
        ];
        let dec = schmidt_split(2, 3, &entries).unwrap();
        assert!(dec.rank >= 1 && dec.rank <= 2);
        for a in 0..2 {
            for b in 0..3 {
                let mut sum = C64::default();
                for i in 0..dec.rank {
                    sum += dec.left[i][a] * dec.right[i][b] * dec.lambdas[i];
                }
                let want = entries[a * 3 + b];
                assert_relative_eq!(sum.re, want.re, epsilon = 1e-12);
                assert_relative_eq!(sum.im, want.im, epsilon = 1e-12);
            }
        }
        // Factor orthonormality on both sides.
        for i in 0..dec.rank {
            for j in 0..dec.rank {
                let dot: C64 = dec.left[i]
                    .iter()
                    .zip(&dec.left[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let want = f64::from(u8::from(i == j));
                assert_relative_eq!(dot.re, want, epsilon = 1e-12);
                assert_relative_eq!(dot.im, 0.0, epsilon = 1e-12);
            }
        }
        assert!(schmidt_split(2, 2, &vec![C64::default(); 4]).is_err());
    }

    proptest! {
        #[test]
        fn prop_two_term_round_trip(
            re in proptest::collection::vec(-1.0f64..1.0, 6),
            im in proptest::collection::vec(-1.0f64..1.0, 6),
            t1 in 0.3f64..0.95,
            t2 in 0.3f64..0.95,
        ) {
            let f: Vec<C64> = (0..3).map(|i| c(re[i], im[i])).collect();
            let g: Vec<C64> = (3..6).map(|i| c(re[i], im[i])).collect();
            let r1 = (1.0 - t1 * t1).sqrt();
            let r2 = (1.0 - t2 * t2).sqrt();
            let seeds = (c(1.0, 0.0), c(1.0, 0.0));
            let (fs, gs) = invert_two_term(&f, &g, t1, r1, t2, r2, seeds).unwrap();
            let (fo, go) = forward_two_term(&fs, &gs, t1, r1, t2, r2, 2);
            prop_assert!(max_dev(&fo, &f) < 1e-9);
            prop_assert!(max_dev(&go, &g) < 1e-9);
        }

        #[test]
        fn prop_composition_count_is_multinomial(
            total in 0usize..5,
            parts in 1usize..4,
        ) {
            let count = compositions(&[total], parts).len();
            // Stars and bars: C(total + parts - 1, parts - 1).
            let want = binomial((total + parts - 1) as u32, (parts - 1) as u32) as usize;
            prop_assert_eq!(count, want);
        }
    }
}
