//! Pure N-qubit states in dense and symmetric (Dicke) form.
//!
//! Basis layout: qubit 0 is the most significant bit of a basis index, so
//! basis index `b` has qubit `q` in `|(b >> (n - 1 - q)) & 1⟩`. Sites are
//! zero-based throughout the crate.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::limits::check_dense;

pub type C64 = Complex64;

/// A single-qubit state `a|0⟩ + b|1⟩`.
pub type Qubit = [C64; 2];


/// Binomial coefficient as a float; exact for every argument used in this crate
/// (n ≤ 1023 stays finite, n ≤ 56 is exact in the mantissa).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round_if_exact()
}

trait RoundIfExact {
    fn round_if_exact(self) -> Self;
}

impl RoundIfExact for f64 {
    // The running product can pick up a few ulps; snap back when the true value is an integer
    // that f64 can represent exactly.
    fn round_if_exact(self) -> Self {
        if self < 9.0e15 {
            self.round()
        } else {
            self
        }
    }
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn normalize_vec(v: &mut [C64]) -> Result<()> {
    let n2 = norm_sqr(v);
    if !n2.is_finite() || n2 < 1e-300 {
        return Err(Error::invalid("state vector has zero or non-finite norm"));
    }
    let inv = 1.0 / n2.sqrt();
    v.iter_mut().for_each(|a| *a *= inv);
    Ok(())
}

/// Normalized single-qubit state `cos x |0⟩ + e^{iy} sin x |1⟩`.
pub fn qubit_from_angles(x: f64, y: f64) -> Qubit {
    [C64::new(x.cos(), 0.0), C64::from_polar(x.sin(), y)]
}

/// Angles `(x, y)` with `x ∈ [0, π/2]` describing `q` up to a global phase.
pub fn qubit_angles(q: &Qubit) -> (f64, f64) {
    let x = q[1].norm().atan2(q[0].norm());
    let y = if q[0].norm() < 1e-300 {
        0.0
    } else {
        (q[1] * q[0].conj()).arg()
    };
    (x, y)
}

pub fn normalize_qubit(q: Qubit) -> Option<Qubit> {
    let n = (q[0].norm_sqr() + q[1].norm_sqr()).sqrt();
    if n < 1e-300 || !n.is_finite() {
        None
    } else {
        Some([q[0] / n, q[1] / n])
    }
}

/// Dense complex amplitude vector over `n_qubits` qubits, unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(n_qubits: usize, mut amps: Vec<C64>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("a state needs at least one qubit"));
        }
        check_dense(n_qubits)?;
        if amps.len() != 1usize << n_qubits {
            return Err(Error::invalid(format!(
                "expected {} amplitudes for {} qubits, got {}",
                1usize << n_qubits,
                n_qubits,
                amps.len()
            )));
        }
        normalize_vec(&mut amps)?;
        Ok(PureState { n_qubits, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("a state needs at least one qubit"));
        }
        check_dense(n_qubits)?;
        if index >= 1usize << n_qubits {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1usize << n_qubits];
        amps[index] = C64::new(1.0, 0.0);
        Ok(PureState { n_qubits, amps })
    }

    /// `|0⟩^⊗n`.
    pub fn zeros(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// `|1⟩^⊗n`.
    pub fn ones(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, (1usize << n_qubits) - 1)
    }

    /// Tensor product of single-qubit states, first entry is qubit 0.
    pub fn product(locals: &[Qubit]) -> Result<Self> {
        let n = locals.len();
        if n == 0 {
            return Err(Error::invalid("a state needs at least one qubit"));
        }
        check_dense(n)?;
        let mut amps = vec![C64::new(1.0, 0.0)];
        for q in locals {
            let q = normalize_qubit(*q).ok_or_else(|| Error::invalid("zero local state"))?;
            amps = amps
                .iter()
                .flat_map(|a| [a * q[0], a * q[1]])
                .collect();
        }
        Ok(PureState { n_qubits: n, amps })
    }

    /// `(|01⟩ − |10⟩)/√2`.
    pub fn bell_psi_minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState {
            n_qubits: 2,
            amps: vec![
                C64::new(0.0, 0.0),
                C64::new(h, 0.0),
                C64::new(-h, 0.0),
                C64::new(0.0, 0.0),
            ],
        }
    }

    /// `(|01⟩ + |10⟩)/√2`.
    pub fn bell_psi_plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState {
            n_qubits: 2,
            amps: vec![
                C64::new(0.0, 0.0),
                C64::new(h, 0.0),
                C64::new(h, 0.0),
                C64::new(0.0, 0.0),
            ],
        }
    }

    /// `|Ψ⁻⟩^⊗(n/2)` for even `n`.
    pub fn bell_product(n_qubits: usize) -> Result<Self> {
        if n_qubits < 2 || n_qubits % 2 != 0 {
            return Err(Error::invalid(format!(
                "Bell product needs an even number of qubits ≥ 2, got {n_qubits}"
            )));
        }
        check_dense(n_qubits)?;
        let pair = Self::bell_psi_minus();
        let mut acc = pair.clone();
        for _ in 1..n_qubits / 2 {
            acc = acc.tensor(&pair)?;
        }
        Ok(acc)
    }

    /// `|Ψ⁺⟩ ⊗ |0⟩^⊗(n−2)`: entangled pair next to separable spectators.
    pub fn bell_with_spectators(n_qubits: usize) -> Result<Self> {
        if n_qubits < 3 {
            return Err(Error::invalid("need at least 3 qubits"));
        }
        Self::bell_psi_plus().tensor(&Self::zeros(n_qubits - 2)?)
    }

    /// `|GHZ⟩_{n1} ⊗ |1⟩^⊗n2`.
    pub fn ghz_with_ones(n1: usize, n2: usize) -> Result<Self> {
        let ghz = SymmetricState::ghz(n1)?.to_dense()?;
        if n2 == 0 {
            return Ok(ghz);
        }
        ghz.tensor(&Self::ones(n2)?)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Bit mask selecting `site` in a basis index.
    #[inline]
    pub fn site_mask(&self, site: usize) -> usize {
        1usize << (self.n_qubits - 1 - site)
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_qubits {
            Err(Error::invalid(format!(
                "site {site} out of range for {} qubits",
                self.n_qubits
            )))
        } else {
            Ok(())
        }
    }

    /// Kronecker product; `self` occupies the leading qubits.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let n = self.n_qubits + other.n_qubits;
        check_dense(n)?;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(PureState { n_qubits: n, amps })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::invalid("inner product of states with different sizes"));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    pub fn apply_single_qubit(&mut self, site: usize, u: &[[C64; 2]; 2]) -> Result<()> {
        self.check_site(site)?;
        let m = self.site_mask(site);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | m];
                self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[i | m] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
        Ok(())
    }

    /// Applies a 4×4 gate on `(p, q)`; gate rows/columns are indexed by
    /// `2·bit_p + bit_q`.
    pub fn apply_two_qubit(&mut self, p: usize, q: usize, u: &[[C64; 4]; 4]) -> Result<()> {
        self.check_site(p)?;
        self.check_site(q)?;
        if p == q {
            return Err(Error::invalid("two-qubit gate needs distinct sites"));
        }
        let mp = self.site_mask(p);
        let mq = self.site_mask(q);
        let both = mp | mq;
        let amps = &mut self.amps;
        for i in 0..amps.len() {
            if i & both != 0 {
                continue;
            }
            let idx = [i, i | mq, i | mp, i | both];
            let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
            for (r, &target) in idx.iter().enumerate() {
                let row = &u[r];
                amps[target] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
            }
        }
        Ok(())
    }

    /// Relabels qubits: qubit `q` of `self` becomes qubit `perm[q]` of the result.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<PureState> {
        let n = self.n_qubits;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::invalid("not a permutation of the qubits"));
        }
        let mut amps = vec![C64::new(0.0, 0.0); self.dim()];
        for (i, a) in self.amps.iter().enumerate() {
            let mut j = 0usize;
            for (q, &target) in perm.iter().enumerate() {
                if (i >> (n - 1 - q)) & 1 == 1 {
                    j |= 1 << (n - 1 - target);
                }
            }
            amps[j] = *a;
        }
        Ok(PureState { n_qubits: n, amps })
    }
}

/// Permutation-symmetric state `Σ_j c_j |D^(j)_n⟩`, where `D^(j)` has `j` qubits in `|1⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricState {
    n_qubits: usize,
    coeffs: Vec<C64>,
}

impl SymmetricState {
    pub fn from_coeffs(mut coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::invalid("symmetric state needs at least one qubit"));
        }
        normalize_vec(&mut coeffs)?;
        Ok(SymmetricState {
            n_qubits: coeffs.len() - 1,
            coeffs,
        })
    }

    pub fn ghz(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("GHZ state needs n ≥ 2, got {n}")));
        }
        let mut c = vec![C64::new(0.0, 0.0); n + 1];
        c[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        c[n] = c[0];
        Ok(SymmetricState { n_qubits: n, coeffs: c })
    }

    pub fn dicke(n: usize, j: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("Dicke state needs n ≥ 1"));
        }
        if j > n {
            return Err(Error::invalid(format!("Dicke index {j} out of range 0..={n}")));
        }
        let mut c = vec![C64::new(0.0, 0.0); n + 1];
        c[j] = C64::new(1.0, 0.0);
        Ok(SymmetricState { n_qubits: n, coeffs: c })
    }

    /// `cos θ |0⟩^⊗n + sin θ (cos ε|0⟩ + sin ε|1⟩)^⊗n`, normalized.
    pub fn xi_state(n: usize, theta: f64, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("xi state needs n ≥ 1"));
        }
        if !theta.is_finite() || !epsilon.is_finite() {
            return Err(Error::invalid("xi state parameters must be finite"));
        }
        let (s, c) = epsilon.sin_cos();
        let mut coeffs: Vec<C64> = (0..=n)
            .map(|j| {
                let amp = binomial(n, j).sqrt() * c.powi((n - j) as i32) * s.powi(j as i32);
                C64::new(theta.sin() * amp, 0.0)
            })
            .collect();
        coeffs[0] += theta.cos();
        // At θ = π/4, ε = π with odd n the two branches cancel exactly.
        if norm_sqr(&coeffs) < 1e-24 {
            return Err(Error::invalid(format!(
                "xi state degenerates to the zero vector at n={n}, θ={theta}, ε={epsilon}"
            )));
        }
        Self::from_coeffs(coeffs)
    }

    /// Symmetric product `|φ⟩^⊗n`.
    pub fn coherent(n: usize, phi: &Qubit) -> Result<Self> {
        let phi = normalize_qubit(*phi).ok_or_else(|| Error::invalid("zero local state"))?;
        let coeffs = (0..=n)
            .map(|j| binomial(n, j).sqrt() * phi[0].powu((n - j) as u32) * phi[1].powu(j as u32))
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn inner(&self, other: &SymmetricState) -> Result<C64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::invalid("inner product of states with different sizes"));
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &SymmetricState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Expands into the full `2^n` amplitude vector.
    pub fn to_dense(&self) -> Result<PureState> {
        let n = self.n_qubits;
        check_dense(n)?;
        let scale: Vec<C64> = (0..=n)
            .map(|j| self.coeffs[j] / binomial(n, j).sqrt())
            .collect();
        let amps = (0..1usize << n)
            .map(|b| scale[b.count_ones() as usize])
            .collect();
        Ok(PureState { n_qubits: n, amps })
    }

    /// Majorana points of the state.
    ///
    /// The points are the roots `t_k` of
    /// `M(t) = Σ_j (−1)^(n−j) c_j √C(n,j) t^(n−j)` mapped to
    /// `(|0⟩ + t_k|1⟩)/√(1+|t_k|²)`, i.e. `t = e^{iy} tan x`. When the lowest
    /// `d` coefficients `c_0..c_{d−1}` vanish, `M` loses `d` degrees and the
    /// corresponding points sit at `|1⟩`.
    pub fn majorana_points(&self) -> Result<MajoranaPoints> {
        let n = self.n_qubits;
        let cmax = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if cmax == 0.0 {
            return Err(Error::invalid("all-zero Dicke coefficients"));
        }
        let zero_tol = 1e-14 * cmax;
        let is_zero = |c: &C64| c.norm() <= zero_tol;

        let pole_count = self.coeffs.iter().take_while(|c| is_zero(c)).count();
        let origin_count = self.coeffs.iter().rev().take_while(|c| is_zero(c)).count();

        // poly[m] multiplies t^m, m = n − j
        let poly: Vec<C64> = (0..=n)
            .map(|m| {
                let j = n - m;
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                self.coeffs[j] * (sign * binomial(n, j).sqrt())
            })
            .collect();
        // strip roots at 0 (t^origin_count factor) and at infinity (degree deficit)
        let reduced = &poly[origin_count..=n - pole_count];
        let mut roots = poly_roots(reduced);
        for r in roots.iter_mut() {
            *r = newton_polish(reduced, *r);
        }

        let assemble = |roots: &[C64]| {
            let mut points = Vec::with_capacity(n);
            points.extend(std::iter::repeat_n([C64::new(1.0, 0.0), C64::new(0.0, 0.0)], origin_count));
            points.extend(roots.iter().map(|&t| root_to_point(t)));
            points.extend(std::iter::repeat_n([C64::new(0.0, 0.0), C64::new(1.0, 0.0)], pole_count));
            MajoranaPoints { points, pole_count }
        };
        let score = |pts: &MajoranaPoints| pts.reconstruct().and_then(|r| r.fidelity(self)).unwrap_or(0.0);

        // A root of multiplicity m is perturbed by ~ε^(1/m) but the cluster mean
        // is accurate to ~ε, so merge clusters whenever that reconstructs better.
        let mut best = assemble(&roots);
        let mut best_score = score(&best);
        for radius in [1e-6, 1e-4, 1e-2, 1e-1] {
            let merged = merge_clusters(reduced, &roots, radius);
            if merged == roots {
                continue;
            }
            let cand = assemble(&merged);
            let s = score(&cand);
            if s > best_score {
                best = cand;
                best_score = s;
            }
        }
        Ok(best)
    }

    /// Normalized symmetrization of `⊗_k |ε_k⟩`.
    pub fn from_majorana(points: &[Qubit]) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::invalid("need at least one Majorana point"));
        }
        // Π_k (a_k + b_k X) = Σ_j e_j X^j
        let mut e = vec![C64::new(1.0, 0.0)];
        for p in points {
            let mut next = vec![C64::new(0.0, 0.0); e.len() + 1];
            for (j, v) in e.iter().enumerate() {
                next[j] += v * p[0];
                next[j + 1] += v * p[1];
            }
            e = next;
        }
        let coeffs = e
            .iter()
            .enumerate()
            .map(|(j, v)| v / binomial(n, j).sqrt())
            .collect();
        Self::from_coeffs(coeffs)
    }
}

#[derive(Clone, Debug)]
pub struct MajoranaPoints {
    pub points: Vec<Qubit>,
    /// Points placed at `|1⟩` because the polynomial lost degree.
    pub pole_count: usize,
}

impl MajoranaPoints {
    pub fn reconstruct(&self) -> Result<SymmetricState> {
        SymmetricState::from_majorana(&self.points)
    }
}

fn root_to_point(t: C64) -> Qubit {
    let s = (1.0 + t.norm_sqr()).sqrt();
    if s.is_finite() {
        [C64::new(1.0 / s, 0.0), t / s]
    } else {
        [C64::new(0.0, 0.0), C64::from_polar(1.0, t.arg())]
    }
}

/// Replaces each single-linkage cluster of roots (relative distance below
/// `radius`) by its mean, polished as a simple root of the derivative of
/// order `multiplicity − 1`.
fn merge_clusters(poly: &[C64], roots: &[C64], radius: f64) -> Vec<C64> {
    let k = roots.len();
    let mut label: Vec<usize> = (0..k).collect();
    for i in 0..k {
        for j in 0..i {
            let scale = 1.0 + roots[i].norm().max(roots[j].norm());
            if (roots[i] - roots[j]).norm() < radius * scale {
                let (from, to) = (label[i], label[j]);
                for l in label.iter_mut() {
                    if *l == from {
                        *l = to;
                    }
                }
            }
        }
    }
    (0..k)
        .map(|i| {
            let members: Vec<C64> = (0..k).filter(|&j| label[j] == label[i]).map(|j| roots[j]).collect();
            let mean = members.iter().sum::<C64>() / members.len() as f64;
            if members.len() == 1 {
                return mean;
            }
            let mut deriv = poly.to_vec();
            for _ in 1..members.len() {
                deriv = deriv.iter().enumerate().skip(1).map(|(m, c)| c * m as f64).collect();
            }
            newton_polish(&deriv, mean)
        })
        .collect()
}

/// Roots of `Σ_m poly[m] t^m` via eigenvalues of the companion matrix.
fn poly_roots(poly: &[C64]) -> Vec<C64> {
    let deg = poly.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = poly[deg];
    if deg == 1 {
        return vec![-poly[0] / lead];
    }
    let mut comp = DMatrix::<C64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -poly[i] / lead;
    }
    let (_, t) = comp.schur().unpack();
    (0..deg).map(|i| t[(i, i)]).collect()
}

fn poly_eval(poly: &[C64], t: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for c in poly.iter().rev() {
        dp = dp * t + p;
        p = p * t + c;
    }
    (p, dp)
}

fn newton_polish(poly: &[C64], mut t: C64) -> C64 {
    let (mut p, _) = poly_eval(poly, t);
    for _ in 0..4 {
        let (_, dp) = poly_eval(poly, t);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = t - p / dp;
        let (pc, _) = poly_eval(poly, cand);
        if pc.norm() < p.norm() {
            t = cand;
            p = pc;
        } else {
            break;
        }
    }
    t
}
