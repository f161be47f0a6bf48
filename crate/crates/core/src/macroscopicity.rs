//! Maximal-variance macroscopicity.
//!
//! `M̃ = max_α ⟨ΔŜ²(α)⟩` over unit local directions. The variance is the
//! quadratic form `αᵀVα` of the (positive semidefinite) VCM, so the exact
//! value is found by multi-start ascent on the product of spheres after the
//! VCM is built once. The leading eigenpair of `V` brackets the optimum:
//! `N·λ1` from above, and the renormalized eigenvector from below.

use rayon::prelude::*;

use crate::ensembles::RngStream;
use crate::error::{Error, Result};
use crate::limits::check_dense;
use crate::observables::{
    additive_variance, bloch_vectors, build_symmetric_vcm, build_vcm, quad_form, Axis,
    OrientationMode, SpinOrientation, Vcm,
};
use crate::states::{PureState, SymmetricState};

/// Values of `M̃` this far below `N` are rounding noise and clamp to `N`.
const CLAMP_TOL: f64 = 1e-9;
/// Allowed excess of `M̃` over `N²`.
const UPPER_TOL: f64 = 1e-6;
const ZERO_WEIGHT: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct OptimizerConfig {
    /// Random starts on top of the three deterministic ones; `None` means `8 + 2N`.
    pub random_starts: Option<usize>,
    /// Stop a start once one sweep improves the variance by less than this.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            random_starts: None,
            tol: 1e-10,
            max_iter: 10_000,
            seed: 0x5eed,
        }
    }
}

impl OptimizerConfig {
    pub fn with_restarts(restarts: usize) -> Self {
        OptimizerConfig {
            random_starts: Some(restarts),
            ..Default::default()
        }
    }

    pub fn random_starts_for(&self, n: usize) -> usize {
        self.random_starts.unwrap_or(8 + 2 * n)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OptimizerStats {
    pub restarts: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct MacroResult {
    pub n: usize,
    pub m_tilde: f64,
    pub m_norm: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub optimal_alpha: SpinOrientation,
    pub optimizer_stats: OptimizerStats,
}

/// `√((M̃ − n)/(n(n−1)))`.
pub fn normalize(m_tilde: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("normalization needs n ≥ 2, got {n}")));
    }
    let nf = n as f64;
    if !m_tilde.is_finite() || m_tilde > nf * nf + UPPER_TOL * nf * nf.max(1.0) {
        return Err(Error::invalid(format!(
            "M̃ = {m_tilde} exceeds n² = {} for n = {n}",
            nf * nf
        )));
    }
    if m_tilde < nf - CLAMP_TOL * nf {
        return Err(Error::invalid(format!("M̃ = {m_tilde} is below n = {n}")));
    }
    let m = m_tilde.clamp(nf, nf * nf);
    Ok(((m - nf) / (nf * (nf - 1.0))).sqrt())
}

/// `N·λ1` and the relaxed candidate `α_j = √N · v1[3j..3j+3]`.
pub fn vcm_upper_bound(v: &Vcm) -> (f64, SpinOrientation) {
    let n = v.n_qubits();
    let spec = v.spectrum();
    let scale = (n as f64).sqrt();
    let flat: Vec<f64> = spec.leading_vector.iter().map(|x| x * scale).collect();
    (
        n as f64 * spec.values[0],
        SpinOrientation::from_flat_unchecked(&flat, OrientationMode::Relaxed),
    )
}

/// Direction orthogonal to a Bloch vector, built from the coordinate axis
/// least aligned with it. Any unit vector works for a maximally mixed site.
fn transverse_direction(r: &[f64; 3]) -> [f64; 3] {
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if norm < 1e-12 {
        return [1.0, 0.0, 0.0];
    }
    let u = [r[0] / norm, r[1] / norm, r[2] / norm];
    let axis = (0..3)
        .min_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()))
        .expect("three axes");
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let d = u[axis];
    let w = [e[0] - d * u[0], e[1] - d * u[1], e[2] - d * u[2]];
    let wn = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    [w[0] / wn, w[1] / wn, w[2] / wn]
}

/// Renormalizes a relaxed candidate site by site.
///
/// Sites whose weight `|α_j|` is at most 1e−8 carry no direction; they get a
/// direction transverse to their local Bloch vector, which maximizes their own
/// variance.
pub fn beta_lower_bound(
    state: &PureState,
    candidate: &SpinOrientation,
) -> Result<(f64, SpinOrientation)> {
    if candidate.len() != state.n_qubits() {
        return Err(Error::invalid("candidate size does not match state"));
    }
    let mut bloch = None;
    let mut dirs = Vec::with_capacity(candidate.len());
    for (j, a) in candidate.vectors().iter().enumerate() {
        let w = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        if w > ZERO_WEIGHT {
            dirs.push([a[0] / w, a[1] / w, a[2] / w]);
        } else {
            let b = bloch.get_or_insert_with(|| bloch_vectors(state));
            dirs.push(transverse_direction(&b[j]));
        }
    }
    let beta = SpinOrientation::from_directions(dirs)?;
    Ok((additive_variance(state, &beta)?, beta))
}

struct Ascent {
    value: f64,
    alpha: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// Block-normalized gradient ascent of `αᵀVα` on the product of unit spheres.
///
/// Each sweep sets every `α_j ← (Vα)_j / |(Vα)_j|`. For positive semidefinite
/// `V` this maximizes the linearization over the whole constraint set, so the
/// objective never decreases.
fn ascend(v: &nalgebra::DMatrix<f64>, mut alpha: Vec<f64>, tol: f64, max_iter: usize) -> Ascent {
    let d = alpha.len();
    let mut value = quad_form(v, &alpha);
    let mut grad = vec![0.0; d];
    for it in 1..=max_iter {
        for (r, g) in grad.iter_mut().enumerate() {
            *g = (0..d).map(|c| v[(r, c)] * alpha[c]).sum();
        }
        let mut next = alpha.clone();
        for (blk, g) in next.chunks_exact_mut(3).zip(grad.chunks_exact(3)) {
            let gn = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
            if gn > 1e-300 {
                blk.iter_mut().zip(g).for_each(|(b, x)| *b = x / gn);
            }
        }
        let next_value = quad_form(v, &next);
        if next_value < value {
            // only round-off can make a sweep go downhill
            return Ascent { value, alpha, iterations: it, converged: true };
        }
        let gain = next_value - value;
        alpha = next;
        value = next_value;
        if gain < tol * value.max(1.0) {
            return Ascent { value, alpha, iterations: it, converged: true };
        }
    }
    Ascent {
        value,
        alpha,
        iterations: max_iter,
        converged: false,
    }
}

/// Exact `M̃` by multi-start ascent, bracketed by the VCM bounds.
///
/// Starts: the renormalized eigenvector candidate, all-z, all-x, then
/// `cfg.random_starts_for(N)` uniformly random orientations.
pub fn macroscopicity_exact(state: &PureState, cfg: &OptimizerConfig) -> Result<MacroResult> {
    let n = state.n_qubits();
    check_dense(n)?;
    let vcm = build_vcm(state)?;
    let (upper, candidate) = vcm_upper_bound(&vcm);
    let (lower, beta) = beta_lower_bound(state, &candidate)?;

    let mut starts = vec![
        beta.flat(),
        SpinOrientation::along(n, Axis::Z).flat(),
        SpinOrientation::along(n, Axis::X).flat(),
    ];
    let root = RngStream::new(cfg.seed);
    for s in 0..cfg.random_starts_for(n) {
        let mut rng = root.derive(s as u64);
        starts.push((0..n).flat_map(|_| rng.unit_vector3()).collect());
    }

    let runs: Vec<Ascent> = starts
        .into_par_iter()
        .map(|a| ascend(vcm.matrix(), a, cfg.tol, cfg.max_iter))
        .collect();
    let iterations = runs.iter().map(|r| r.iterations).sum();
    let restarts = runs.len();
    // first maximum wins, so the result does not depend on scheduling
    let best = runs
        .into_iter()
        .reduce(|best, r| if r.value > best.value { r } else { best })
        .expect("at least three starts");

    let m_tilde = best.value.max(lower);
    let m_norm = if n >= 2 { normalize(m_tilde, n)? } else { 0.0 };
    Ok(MacroResult {
        n,
        m_tilde,
        m_norm,
        lower_bound: lower,
        upper_bound: upper,
        optimal_alpha: SpinOrientation::from_flat_unchecked(&best.alpha, OrientationMode::Strict),
        optimizer_stats: OptimizerStats {
            restarts,
            iterations,
            converged: best.converged,
        },
    })
}

/// Only the VCM bracket; `m_tilde` is the certified lower bound.
pub fn macroscopicity_bracket(state: &PureState) -> Result<MacroResult> {
    let n = state.n_qubits();
    let vcm = build_vcm(state)?;
    let (upper, candidate) = vcm_upper_bound(&vcm);
    let (lower, beta) = beta_lower_bound(state, &candidate)?;
    Ok(MacroResult {
        n,
        m_tilde: lower,
        m_norm: if n >= 2 { normalize(lower, n)? } else { 0.0 },
        lower_bound: lower,
        upper_bound: upper,
        optimal_alpha: beta,
        optimizer_stats: OptimizerStats {
            restarts: 0,
            iterations: 0,
            converged: false,
        },
    })
}

/// `M̃ = N·λ1(A + (N−1)B)` with the common direction from the leading eigenvector.
pub fn macroscopicity_symmetric(state: &SymmetricState) -> Result<MacroResult> {
    let n = state.n_qubits();
    let v = build_symmetric_vcm(state);
    let (vals, dir) = v.spectrum();
    let m_tilde = n as f64 * vals[0];
    let alpha = SpinOrientation::uniform(n, dir)?;
    Ok(MacroResult {
        n,
        m_tilde,
        m_norm: if n >= 2 { normalize(m_tilde, n)? } else { 0.0 },
        lower_bound: m_tilde,
        upper_bound: m_tilde,
        optimal_alpha: alpha,
        optimizer_stats: OptimizerStats {
            restarts: 0,
            iterations: 0,
            converged: true,
        },
    })
}

/// A family member: dense states go through the exact optimizer, symmetric
/// ones through the block fast path.
#[derive(Clone, Debug)]
pub enum FamilyState {
    Dense(PureState),
    Symmetric(SymmetricState),
}

#[derive(Clone, Debug)]
pub struct IndexPEstimate {
    pub p: f64,
    /// RMS residual of the log-log fit.
    pub fit_residual: f64,
    pub sizes_used: Vec<usize>,
}

/// Least-squares slope of `ln M̃` against `ln N`.
pub fn estimate_index_p<F>(family: F, sizes: &[usize], cfg: &OptimizerConfig) -> Result<IndexPEstimate>
where
    F: Fn(usize) -> Result<FamilyState>,
{
    if sizes.len() < 3 {
        return Err(Error::invalid(format!(
            "index estimate needs at least 3 sizes, got {}",
            sizes.len()
        )));
    }
    let mut pts = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let m = match family(n)? {
            FamilyState::Dense(s) => macroscopicity_exact(&s, cfg)?.m_tilde,
            FamilyState::Symmetric(s) => {
                if s.n_qubits() > 128 {
                    return Err(Error::invalid("symmetric family sizes are limited to 128"));
                }
                macroscopicity_symmetric(&s)?.m_tilde
            }
        };
        pts.push(((n as f64).ln(), m.ln()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("index estimate needs distinct sizes"));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let p = sxy / sxx;
    let icpt = my - p * mx;
    let rss: f64 = pts.iter().map(|q| (q.1 - icpt - p * q.0).powi(2)).sum();
    Ok(IndexPEstimate {
        p,
        fit_residual: (rss / k).sqrt(),
        sizes_used: sizes.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ghz(n: usize) -> PureState {
        SymmetricState::ghz(n).unwrap().to_dense().unwrap()
    }

    #[test]
    fn normalize_examples() {
        for n in [2, 5, 17] {
            let nf = n as f64;
            assert_eq!(normalize(nf, n).unwrap(), 0.0);
            assert!((normalize(nf * nf, n).unwrap() - 1.0).abs() < 1e-15);
            // round-off just below n clamps
            assert_eq!(normalize(nf - 1e-12, n).unwrap(), 0.0);
        }
        assert!((normalize(10.0, 4).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(normalize(17.0, 4).is_err());
        assert!(normalize(3.0, 4).is_err());
        assert!(normalize(1.0, 1).is_err());
    }

    #[test]
    fn upper_bound_examples() {
        let (b, _) = vcm_upper_bound(&build_vcm(&ghz(4)).unwrap());
        assert!((b - 16.0).abs() < 1e-10);
        let (b, _) = vcm_upper_bound(&build_vcm(&PureState::zeros(4).unwrap()).unwrap());
        assert!((b - 4.0).abs() < 1e-10);

        let phi_c = PureState::bell_with_spectators(4).unwrap();
        let (b, cand) = vcm_upper_bound(&build_vcm(&phi_c).unwrap());
        assert!((b - 8.0).abs() < 1e-10);
        assert_eq!(cand.mode(), OrientationMode::Relaxed);
        let w: Vec<f64> = cand
            .vectors()
            .iter()
            .map(|a| (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt())
            .collect();
        assert!((w[0] - 2f64.sqrt()).abs() < 1e-8 && (w[1] - 2f64.sqrt()).abs() < 1e-8);
        assert!(w[2] < 1e-8 && w[3] < 1e-8);
    }

    #[test]
    fn lower_bound_examples() {
        let phi_c = PureState::bell_with_spectators(4).unwrap();
        let (_, cand) = vcm_upper_bound(&build_vcm(&phi_c).unwrap());
        let (lb, beta) = beta_lower_bound(&phi_c, &cand).unwrap();
        assert!((lb - 6.0).abs() < 1e-10, "lb {lb}");
        assert_eq!(beta.mode(), OrientationMode::Strict);
        // spectators get a direction transverse to z
        assert!(beta.vectors()[2][2].abs() < 1e-12 && beta.vectors()[3][2].abs() < 1e-12);

        for n in [2, 5] {
            let zero = PureState::zeros(n).unwrap();
            let cand = SpinOrientation::relaxed(
                std::iter::once([(n as f64).sqrt(), 0.0, 0.0])
                    .chain(std::iter::repeat_n([0.0; 3], n - 1))
                    .collect(),
            )
            .unwrap();
            let (lb, _) = beta_lower_bound(&zero, &cand).unwrap();
            assert!((lb - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_landmarks() {
        let cfg = OptimizerConfig::default();
        let r = macroscopicity_exact(&ghz(4), &cfg).unwrap();
        assert!((r.m_tilde - 16.0).abs() < 1e-8 && (r.m_norm - 1.0).abs() < 1e-6);

        let bell = PureState::bell_product(4).unwrap();
        let r = macroscopicity_exact(&bell, &OptimizerConfig::with_restarts(32)).unwrap();
        assert!((r.m_tilde - 8.0).abs() < 1e-6);
        assert!((r.m_norm - 1.0 / 3f64.sqrt()).abs() < 1e-6);

        let phi_c = PureState::bell_with_spectators(4).unwrap();
        let r = macroscopicity_exact(&phi_c, &cfg).unwrap();
        assert!((r.m_tilde - 6.0).abs() < 1e-6);
        assert!((r.upper_bound - 8.0).abs() < 1e-10);
        assert!(r.optimizer_stats.converged);
        let v = additive_variance(&phi_c, &r.optimal_alpha).unwrap();
        assert!((v - r.m_tilde).abs() < 1e-8);
    }

    #[test]
    fn symmetric_examples() {
        let r = macroscopicity_symmetric(&SymmetricState::dicke(3, 1).unwrap()).unwrap();
        assert!((r.m_tilde - 7.0).abs() < 1e-12);
        assert!((r.m_norm - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let r = macroscopicity_symmetric(&SymmetricState::dicke(4, 2).unwrap()).unwrap();
        assert!((r.m_tilde - 12.0).abs() < 1e-12);
        assert!((r.m_norm - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let r = macroscopicity_symmetric(&SymmetricState::ghz(8).unwrap()).unwrap();
        assert!((r.m_tilde - 64.0).abs() < 1e-10 && (r.m_norm - 1.0).abs() < 1e-10);
        assert_eq!(r.lower_bound, r.upper_bound);
    }

    #[test]
    fn index_p_examples() {
        let cfg = OptimizerConfig::default();
        let ghz_fam = |n| Ok(FamilyState::Symmetric(SymmetricState::ghz(n)?));
        let est = estimate_index_p(ghz_fam, &[4, 6, 8, 10], &cfg).unwrap();
        assert!((est.p - 2.0).abs() < 0.01);

        let prod = |n| Ok(FamilyState::Dense(PureState::zeros(n)?));
        assert!((estimate_index_p(prod, &[4, 6, 8], &cfg).unwrap().p - 1.0).abs() < 0.01);

        let bell = |n| Ok(FamilyState::Dense(PureState::bell_product(n)?));
        let est = estimate_index_p(bell, &[4, 6, 8], &OptimizerConfig::with_restarts(16)).unwrap();
        assert!((est.p - 1.0).abs() < 0.01);

        assert!(estimate_index_p(ghz_fam, &[4, 6], &cfg).is_err());
    }

    #[test]
    fn transverse_is_orthogonal() {
        for r in [[0.0, 0.0, 1.0], [0.3, -0.4, 0.5], [1.0, 0.0, 0.0]] {
            let t = transverse_direction(&r);
            assert!((t[0] * r[0] + t[1] * r[1] + t[2] * r[2]).abs() < 1e-14);
            assert!(((t[0] * t[0] + t[1] * t[1] + t[2] * t[2]) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let n = crate::limits::dense_cap() + 1;
        assert!(matches!(
            PureState::zeros(n),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
