//! Additive spin observables `Ŝ = Σ_j α_j·σ_j`, their variances, and the
//! variance-covariance matrix (VCM) of single-site Pauli fluctuations.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::limits::check_dense;
use crate::states::{PureState, SymmetricState, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Whether a [`SpinOrientation`] satisfies per-site unit norms or only the
/// summed constraint `Σ_j |α_j|² = N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrientationMode {
    Strict,
    Relaxed,
}

/// Local measurement directions `α_j`, one real 3-vector per site.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinOrientation {
    vectors: Vec<[f64; 3]>,
    mode: OrientationMode,
}

const STRICT_TOL: f64 = 1e-12;
const RELAXED_TOL: f64 = 1e-9;

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl SpinOrientation {
    /// Unit vectors; fails if any `|α_j|² − 1` exceeds 1e−12.
    pub fn strict(vectors: Vec<[f64; 3]>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::invalid("orientation needs at least one site"));
        }
        for (j, v) in vectors.iter().enumerate() {
            let n2 = v.iter().map(|x| x * x).sum::<f64>();
            if (n2 - 1.0).abs() > STRICT_TOL {
                return Err(Error::invalid(format!(
                    "site {j}: |α|² = {n2} is not unit (strict mode)"
                )));
            }
        }
        Ok(SpinOrientation {
            vectors,
            mode: OrientationMode::Strict,
        })
    }

    /// Normalizes every direction; zero vectors are rejected.
    pub fn from_directions(vectors: Vec<[f64; 3]>) -> Result<Self> {
        let vectors = vectors
            .into_iter()
            .enumerate()
            .map(|(j, v)| {
                let n = norm3(&v);
                if n < 1e-300 || !n.is_finite() {
                    Err(Error::invalid(format!("site {j}: zero direction")))
                } else {
                    Ok([v[0] / n, v[1] / n, v[2] / n])
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::strict(vectors)
    }

    /// Weighted directions obeying only `Σ_j |α_j|² = N` within 1e−9.
    pub fn relaxed(vectors: Vec<[f64; 3]>) -> Result<Self> {
        let n = vectors.len();
        if n == 0 {
            return Err(Error::invalid("orientation needs at least one site"));
        }
        let total: f64 = vectors.iter().flatten().map(|x| x * x).sum();
        if (total - n as f64).abs() > RELAXED_TOL * n as f64 {
            return Err(Error::invalid(format!(
                "Σ|α|² = {total}, expected {n} (relaxed mode)"
            )));
        }
        Ok(SpinOrientation {
            vectors,
            mode: OrientationMode::Relaxed,
        })
    }

    /// The same direction on every site.
    pub fn uniform(n: usize, dir: [f64; 3]) -> Result<Self> {
        Self::from_directions(vec![dir; n])
    }

    pub fn along(n: usize, axis: Axis) -> Self {
        let mut v = [0.0; 3];
        v[axis.index()] = 1.0;
        SpinOrientation {
            vectors: vec![v; n],
            mode: OrientationMode::Strict,
        }
    }

    /// From spherical angles `(θ_j, φ_j)`.
    pub fn from_angles(angles: &[(f64, f64)]) -> Result<Self> {
        Self::from_directions(
            angles
                .iter()
                .map(|&(t, p)| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()])
                .collect(),
        )
    }

    pub fn vectors(&self) -> &[[f64; 3]] {
        &self.vectors
    }

    pub fn mode(&self) -> OrientationMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Flattened `3N` vector `(α_1x, α_1y, α_1z, α_2x, …)`.
    pub fn flat(&self) -> Vec<f64> {
        self.vectors.iter().flatten().copied().collect()
    }

    pub(crate) fn from_flat_unchecked(flat: &[f64], mode: OrientationMode) -> Self {
        SpinOrientation {
            vectors: flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
            mode,
        }
    }
}

/// `⟨σ^axis_site⟩`.
pub fn pauli_expectation(state: &PureState, site: usize, axis: Axis) -> Result<f64> {
    state.check_site(site)?;
    let m = state.site_mask(site);
    let a = state.amplitudes();
    let value = match axis {
        Axis::Z => a
            .iter()
            .enumerate()
            .map(|(i, x)| if i & m == 0 { x.norm_sqr() } else { -x.norm_sqr() })
            .sum(),
        Axis::X | Axis::Y => {
            let s: C64 = (0..a.len())
                .filter(|i| i & m == 0)
                .map(|i| a[i].conj() * a[i | m])
                .sum();
            if axis == Axis::X {
                2.0 * s.re
            } else {
                2.0 * s.im
            }
        }
    };
    Ok(value)
}

/// Single-site Bloch vectors `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` for every site.
pub fn bloch_vectors(state: &PureState) -> Vec<[f64; 3]> {
    (0..state.n_qubits())
        .map(|q| {
            let mut r = [0.0; 3];
            for ax in Axis::ALL {
                r[ax.index()] = pauli_expectation(state, q, ax).expect("site in range");
            }
            r
        })
        .collect()
}

/// Phase picked up by `σ^axis` acting on bit `b`, together with whether it flips the bit.
#[inline]
fn pauli_action(axis: Axis, bit: usize) -> (C64, bool) {
    match (axis, bit) {
        (Axis::X, _) => (C64::new(1.0, 0.0), true),
        (Axis::Y, 0) => (C64::new(0.0, 1.0), true),
        (Axis::Y, _) => (C64::new(0.0, -1.0), true),
        (Axis::Z, 0) => (C64::new(1.0, 0.0), false),
        (Axis::Z, _) => (C64::new(-1.0, 0.0), false),
    }
}

/// `⟨σ^g_k σ^b_j⟩` for all nine axis pairs at distinct sites, in one pass over the amplitudes.
///
/// The pass accumulates `Σ conj(a_{i⊕f}) a_i` split by the two site bits of `i`
/// for the four flip patterns `f`; the Pauli phases are applied afterwards.
pub fn two_site_moments(state: &PureState, k: usize, j: usize) -> Result<[[f64; 3]; 3]> {
    state.check_site(k)?;
    state.check_site(j)?;
    if k == j {
        return Err(Error::invalid("two_site_moments needs distinct sites"));
    }
    let mk = state.site_mask(k);
    let mj = state.site_mask(j);
    let a = state.amplitudes();
    // acc[flip_k][flip_j][bit_k][bit_j]
    let mut acc = [[[[C64::new(0.0, 0.0); 2]; 2]; 2]; 2];
    for (i, ai) in a.iter().enumerate() {
        let bk = usize::from(i & mk != 0);
        let bj = usize::from(i & mj != 0);
        acc[0][0][bk][bj] += ai.conj() * ai;
        acc[1][0][bk][bj] += a[i ^ mk].conj() * ai;
        acc[0][1][bk][bj] += a[i ^ mj].conj() * ai;
        acc[1][1][bk][bj] += a[i ^ mk ^ mj].conj() * ai;
    }
    let mut out = [[0.0; 3]; 3];
    for g in Axis::ALL {
        for b in Axis::ALL {
            let mut s = C64::new(0.0, 0.0);
            for bk in 0..2 {
                for bj in 0..2 {
                    let (pk, fk) = pauli_action(g, bk);
                    let (pj, fj) = pauli_action(b, bj);
                    s += pk * pj * acc[usize::from(fk)][usize::from(fj)][bk][bj];
                }
            }
            out[g.index()][b.index()] = s.re;
        }
    }
    Ok(out)
}

fn levi_civita(g: usize, b: usize) -> Option<(usize, f64)> {
    match (g, b) {
        (0, 1) => Some((2, 1.0)),
        (1, 2) => Some((0, 1.0)),
        (2, 0) => Some((1, 1.0)),
        (1, 0) => Some((2, -1.0)),
        (2, 1) => Some((0, -1.0)),
        (0, 2) => Some((1, -1.0)),
        _ => None,
    }
}

/// Raw (one-sided) covariance `⟨Δσ^g_k Δσ^b_j⟩`.
///
/// Real for distinct sites. On the same site `σ^g σ^b = δ_gb + i ε_gbd σ^d`, so
/// cross-axis entries carry imaginary part `±⟨σ^d⟩`.
pub fn pauli_correlation(
    state: &PureState,
    site_k: usize,
    site_j: usize,
    axis_g: Axis,
    axis_b: Axis,
) -> Result<C64> {
    state.check_site(site_k)?;
    state.check_site(site_j)?;
    let mg = pauli_expectation(state, site_k, axis_g)?;
    let mb = pauli_expectation(state, site_j, axis_b)?;
    if site_k == site_j {
        let (g, b) = (axis_g.index(), axis_b.index());
        let product = if g == b {
            C64::new(1.0, 0.0)
        } else {
            let (d, sign) = levi_civita(g, b).expect("distinct axes");
            let md = pauli_expectation(state, site_k, Axis::ALL[d])?;
            C64::new(0.0, sign * md)
        };
        Ok(product - mg * mb)
    } else {
        let moments = two_site_moments(state, site_k, site_j)?;
        Ok(C64::new(moments[axis_g.index()][axis_b.index()] - mg * mb, 0.0))
    }
}

/// `⟨ΔŜ²⟩` for `Ŝ = Σ_j α_j·σ_j`, computed from `Ŝ|ψ⟩` directly.
pub fn additive_variance(state: &PureState, alpha: &SpinOrientation) -> Result<f64> {
    let n = state.n_qubits();
    if alpha.len() != n {
        return Err(Error::invalid(format!(
            "orientation has {} sites, state has {n}",
            alpha.len()
        )));
    }
    let a = state.amplitudes();
    let mut s_psi = vec![C64::new(0.0, 0.0); a.len()];
    for (site, v) in alpha.vectors().iter().enumerate() {
        let m = state.site_mask(site);
        // α·σ = [[z, x − iy], [x + iy, −z]]
        let off_down = C64::new(v[0], v[1]);
        let off_up = off_down.conj();
        for (i, out) in s_psi.iter_mut().enumerate() {
            let partner = a[i ^ m];
            *out += if i & m == 0 {
                a[i] * v[2] + partner * off_up
            } else {
                -a[i] * v[2] + partner * off_down
            };
        }
    }
    let mean: f64 = a.iter().zip(&s_psi).map(|(x, y)| (x.conj() * y).re).sum();
    let second: f64 = s_psi.iter().map(|x| x.norm_sqr()).sum();
    Ok((second - mean * mean).max(0.0))
}

/// Real symmetric `3N × 3N` VCM, row/column index `3·site + axis`.
#[derive(Clone, Debug)]
pub struct Vcm {
    matrix: DMatrix<f64>,
    n: usize,
    built_from: u64,
}

/// Leading eigenpair plus the full spectrum in descending order.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub leading_vector: Vec<f64>,
}

fn sorted_spectrum(m: &DMatrix<f64>) -> Spectrum {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lead = order[0];
    Spectrum {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        leading_vector: eig.eigenvectors.column(lead).iter().copied().collect(),
    }
}

/// FNV-1a over the amplitude bit patterns.
pub fn fingerprint(state: &PureState) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for byte in x.to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    eat(state.n_qubits() as u64);
    for a in state.amplitudes() {
        eat(a.re.to_bits());
        eat(a.im.to_bits());
    }
    h
}

impl Vcm {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn built_from(&self) -> u64 {
        self.built_from
    }

    pub fn entry(&self, site_k: usize, axis_g: Axis, site_j: usize, axis_b: Axis) -> f64 {
        self.matrix[(3 * site_k + axis_g.index(), 3 * site_j + axis_b.index())]
    }

    /// `Σ α V α`.
    pub fn quadratic_form(&self, alpha: &SpinOrientation) -> Result<f64> {
        if alpha.len() != self.n {
            return Err(Error::invalid("orientation size does not match VCM"));
        }
        Ok(quad_form(&self.matrix, &alpha.flat()))
    }

    pub fn spectrum(&self) -> Spectrum {
        sorted_spectrum(&self.matrix)
    }
}

pub(crate) fn quad_form(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let d = x.len();
    let mut total = 0.0;
    for r in 0..d {
        let mut row = 0.0;
        for c in 0..d {
            row += m[(r, c)] * x[c];
        }
        total += x[r] * row;
    }
    total
}

/// Builds the symmetrized VCM.
///
/// Same-site blocks hold `δ_gb − ⟨σ^g⟩⟨σ^b⟩` (the real part of the Hermitian
/// raw covariance); cross-site blocks hold `⟨σ^g_k σ^b_j⟩ − ⟨σ^g_k⟩⟨σ^b_j⟩`.
pub fn build_vcm(state: &PureState) -> Result<Vcm> {
    let n = state.n_qubits();
    check_dense(n)?;
    let means = bloch_vectors(state);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|k| (k + 1..n).map(move |j| (k, j)))
        .collect();
    let cross: Vec<[[f64; 3]; 3]> = pairs
        .par_iter()
        .map(|&(k, j)| two_site_moments(state, k, j).expect("sites in range"))
        .collect();

    let mut m = DMatrix::<f64>::zeros(3 * n, 3 * n);
    for (site, mean) in means.iter().enumerate() {
        for g in 0..3 {
            for b in 0..3 {
                let delta = if g == b { 1.0 } else { 0.0 };
                m[(3 * site + g, 3 * site + b)] = delta - mean[g] * mean[b];
            }
        }
    }
    for (&(k, j), mom) in pairs.iter().zip(&cross) {
        for g in 0..3 {
            for b in 0..3 {
                let v = mom[g][b] - means[k][g] * means[j][b];
                m[(3 * k + g, 3 * j + b)] = v;
                m[(3 * j + b, 3 * k + g)] = v;
            }
        }
    }
    Ok(Vcm {
        matrix: m,
        n,
        built_from: fingerprint(state),
    })
}

/// Raw Hermitian same-site block `⟨Δσ^g Δσ^b⟩`, kept for auditing the symmetrization.
pub fn raw_same_site_block(state: &PureState, site: usize) -> Result<[[C64; 3]; 3]> {
    let mut out = [[C64::new(0.0, 0.0); 3]; 3];
    for g in Axis::ALL {
        for b in Axis::ALL {
            out[g.index()][b.index()] = pauli_correlation(state, site, site, g, b)?;
        }
    }
    Ok(out)
}

/// VCM of a permutation-symmetric state in block form.
#[derive(Clone, Debug)]
pub struct SymmetricVcm {
    pub n: usize,
    /// Single-site covariances.
    pub a_block: Matrix3<f64>,
    /// Covariances between two distinct sites.
    pub b_block: Matrix3<f64>,
    /// `A + (N−1)·B`.
    pub v_sym: Matrix3<f64>,
    /// `⟨σ^g⟩` on any site.
    pub means: [f64; 3],
    /// `⟨σ^g_1 σ^b_2⟩` on any pair of distinct sites.
    pub two_site: Matrix3<f64>,
}

impl SymmetricVcm {
    /// Eigenvalues of `v_sym` in descending order, with the leading eigenvector.
    pub fn spectrum(&self) -> ([f64; 3], [f64; 3]) {
        let eig = SymmetricEigen::new(self.v_sym);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let vals = order.map(|i| eig.eigenvalues[i]);
        let v = eig.eigenvectors.column(order[0]);
        (vals, [v[0], v[1], v[2]])
    }
}

/// Applies the three collective Pauli sums `S_g = Σ_j σ^g_j` in the Dicke basis.
///
/// With `L|D_j⟩ = √((n−j)(j+1)) |D_{j+1}⟩` adding one excitation,
/// `S_x = L + L†`, `S_y = i(L − L†)` and `S_z|D_j⟩ = (n − 2j)|D_j⟩`.
pub(crate) fn collective_actions(c: &[C64]) -> [Vec<C64>; 3] {
    let n = c.len() - 1;
    let ladder = |j: usize| (((n - j) * (j + 1)) as f64).sqrt();
    let mut up = vec![C64::new(0.0, 0.0); n + 1];
    let mut down = vec![C64::new(0.0, 0.0); n + 1];
    for j in 0..n {
        up[j + 1] = c[j] * ladder(j);
        down[j] = c[j + 1] * ladder(j);
    }
    let i = C64::new(0.0, 1.0);
    let sx = up.iter().zip(&down).map(|(u, d)| u + d).collect();
    let sy = up.iter().zip(&down).map(|(u, d)| i * (u - d)).collect();
    let sz = c
        .iter()
        .enumerate()
        .map(|(j, x)| x * (n as f64 - 2.0 * j as f64))
        .collect();
    [sx, sy, sz]
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// A and B blocks from collective-spin moments, `O(N)` per entry.
pub fn build_symmetric_vcm(state: &SymmetricState) -> SymmetricVcm {
    let n = state.n_qubits();
    let c = state.coeffs();
    let s = collective_actions(c);
    let nf = n as f64;
    let mut means = [0.0; 3];
    for g in 0..3 {
        means[g] = dot(c, &s[g]).re / nf;
    }
    let mut two_site = Matrix3::zeros();
    if n >= 2 {
        for g in 0..3 {
            for b in 0..3 {
                let delta = if g == b { nf } else { 0.0 };
                two_site[(g, b)] = (dot(&s[g], &s[b]).re - delta) / (nf * (nf - 1.0));
            }
        }
        two_site = (two_site + two_site.transpose()) * 0.5;
    }
    let m = nalgebra::Vector3::from(means);
    let outer = m * m.transpose();
    let a_block = Matrix3::identity() - outer;
    let b_block = if n >= 2 { two_site - outer } else { Matrix3::zeros() };
    let v_sym = a_block + b_block * (nf - 1.0);
    SymmetricVcm {
        n,
        a_block,
        b_block,
        v_sym: (v_sym + v_sym.transpose()) * 0.5,
        means,
        two_site,
    }
}
