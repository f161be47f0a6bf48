//! Geometric measure of entanglement `E_G = −log2 η`, with `η` the largest
//! squared overlap with a product state.
//!
//! Every search here returns a certified witness, so `η` is a lower bound on
//! the true maximal overlap and the reported `e_g` is an upper-bound estimate
//! of the true `E_G`.

use rayon::prelude::*;

use crate::ensembles::RngStream;
use crate::error::{Error, Result};
use crate::limits::check_dense;
use crate::states::{binomial, normalize_qubit, qubit_angles, qubit_from_angles, PureState, Qubit, SymmetricState, C64};

const ORTHOGONAL_TOL: f64 = 1e-14;

/// Product state `⊗_j (cos x_j|0⟩ + e^{iy_j} sin x_j|1⟩)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableProduct {
    locals: Vec<Qubit>,
}

impl SeparableProduct {
    pub fn from_locals(locals: Vec<Qubit>) -> Result<Self> {
        if locals.is_empty() {
            return Err(Error::invalid("product state needs at least one site"));
        }
        let locals = locals
            .into_iter()
            .map(|q| normalize_qubit(q).ok_or_else(|| Error::invalid("zero local state")))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeparableProduct { locals })
    }

    pub fn from_angles(angles: &[(f64, f64)]) -> Result<Self> {
        Self::from_locals(angles.iter().map(|&(x, y)| qubit_from_angles(x, y)).collect())
    }

    pub fn uniform(n: usize, phi: Qubit) -> Result<Self> {
        Self::from_locals(vec![phi; n])
    }

    pub fn random(n: usize, rng: &mut RngStream) -> Self {
        SeparableProduct {
            locals: (0..n).map(|_| rng.qubit()).collect(),
        }
    }

    pub fn locals(&self) -> &[Qubit] {
        &self.locals
    }

    pub fn angles(&self) -> Vec<(f64, f64)> {
        self.locals.iter().map(qubit_angles).collect()
    }

    pub fn n_qubits(&self) -> usize {
        self.locals.len()
    }

    pub fn to_dense(&self) -> Result<PureState> {
        PureState::product(&self.locals)
    }

    /// `⟨Φ_sep|Ψ⟩`.
    pub fn overlap(&self, state: &PureState) -> Result<C64> {
        self.check_size(state)?;
        let u = partial_overlap(state, &self.locals, 0, &mut Scratch::default());
        let phi = &self.locals[0];
        Ok(phi[0].conj() * u[0] + phi[1].conj() * u[1])
    }

    fn check_size(&self, state: &PureState) -> Result<()> {
        if self.n_qubits() != state.n_qubits() {
            Err(Error::invalid(format!(
                "product state has {} sites, state has {}",
                self.n_qubits(),
                state.n_qubits()
            )))
        } else {
            Ok(())
        }
    }
}

#[derive(Default)]
struct Scratch {
    a: Vec<C64>,
    b: Vec<C64>,
}

/// Contracts every site except `site` with `conj(locals)`, leaving the
/// 2-vector `u[b] = ⟨⊗_{k≠site} φ_k| ⊗ ⟨b|_site |Ψ⟩`.
///
/// Sites after `site` are folded from the least significant end, then sites
/// before it from the most significant end; total work is about `2·2^N`.
fn partial_overlap(state: &PureState, locals: &[Qubit], site: usize, scratch: &mut Scratch) -> [C64; 2] {
    let n = state.n_qubits();
    let Scratch { a: cur, b: next } = scratch;
    cur.clear();
    cur.extend_from_slice(state.amplitudes());
    for q in (site + 1..n).rev() {
        let (c0, c1) = (locals[q][0].conj(), locals[q][1].conj());
        next.clear();
        next.extend(cur.chunks_exact(2).map(|p| c0 * p[0] + c1 * p[1]));
        std::mem::swap(cur, next);
    }
    for q in 0..site {
        let (c0, c1) = (locals[q][0].conj(), locals[q][1].conj());
        let half = cur.len() / 2;
        next.clear();
        next.extend((0..half).map(|i| c0 * cur[i] + c1 * cur[i + half]));
        std::mem::swap(cur, next);
    }
    debug_assert_eq!(cur.len(), 2);
    [cur[0], cur[1]]
}

/// One sweep of alternating maximization: each site in turn is replaced by
/// the normalized partial overlap of the state with the other sites' locals.
/// The squared overlap does not decrease.
pub fn closest_separable_step(state: &PureState, current: &SeparableProduct) -> Result<SeparableProduct> {
    current.check_size(state)?;
    let mut scratch = Scratch::default();
    sweep(state, current.clone(), &mut scratch).map(|(p, _)| p)
}

fn sweep(state: &PureState, mut prod: SeparableProduct, scratch: &mut Scratch) -> Result<(SeparableProduct, f64)> {
    let mut eta = 0.0;
    for site in 0..prod.locals.len() {
        let u = partial_overlap(state, &prod.locals, site, scratch);
        let norm = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
        if norm < ORTHOGONAL_TOL {
            return Err(Error::RestartRequired);
        }
        // conj(φ)·u is maximal in modulus for φ ∝ u
        prod.locals[site] = [u[0] / norm, u[1] / norm];
        eta = norm * norm;
    }
    Ok((prod, eta))
}

#[derive(Clone, Debug)]
pub struct GeomConfig {
    /// Random starts; `None` means `4 + N` for dense states and 8 for symmetric ones.
    pub random_starts: Option<usize>,
    /// Stop once an iteration changes the overlap by less than this.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for GeomConfig {
    fn default() -> Self {
        GeomConfig {
            random_starts: None,
            tol: 1e-12,
            max_iter: 500,
            seed: 0x6e0,
        }
    }
}

impl GeomConfig {
    pub fn with_restarts(restarts: usize) -> Self {
        GeomConfig {
            random_starts: Some(restarts),
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeomResult {
    pub eta: f64,
    pub e_g: f64,
    pub witness: SeparableProduct,
    pub restarts_used: usize,
    pub converged: bool,
}

struct Run {
    eta: f64,
    witness: SeparableProduct,
    converged: bool,
}

fn iterate_from(state: &PureState, start: SeparableProduct, cfg: &GeomConfig) -> Result<Run> {
    let mut scratch = Scratch::default();
    let mut prod = start;
    let mut eta = prod.overlap(state)?.norm_sqr();
    for _ in 0..cfg.max_iter {
        let (next, next_eta) = sweep(state, prod.clone(), &mut scratch)?;
        let change = next_eta - eta;
        prod = next;
        eta = next_eta;
        if change.abs() < cfg.tol {
            return Ok(Run { eta, witness: prod, converged: true });
        }
    }
    Ok(Run { eta, witness: prod, converged: false })
}

/// Best overlap over alternating-maximization runs.
///
/// Starts are the largest-amplitude basis state plus `4 + N` (or the
/// configured number of) Haar-random products; a random start orthogonal to
/// the state is redrawn.
pub fn geometric_entanglement(state: &PureState, cfg: &GeomConfig) -> Result<GeomResult> {
    let n = state.n_qubits();
    check_dense(n)?;
    let random_starts = cfg.random_starts.unwrap_or(4 + n);

    let peak = state
        .amplitudes()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .map(|(i, _)| i)
        .expect("non-empty state");
    let basis_start = SeparableProduct {
        locals: (0..n)
            .map(|q| {
                if (peak >> (n - 1 - q)) & 1 == 0 {
                    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
                } else {
                    [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
                }
            })
            .collect(),
    };

    let root = RngStream::new(cfg.seed);
    let runs: Vec<Result<Run>> = (0..=random_starts)
        .into_par_iter()
        .map(|s| {
            if s == 0 {
                return iterate_from(state, basis_start.clone(), cfg);
            }
            let mut rng = root.derive(s as u64);
            loop {
                let start = SeparableProduct::random(n, &mut rng);
                if start.overlap(state)?.norm() < ORTHOGONAL_TOL {
                    continue;
                }
                match iterate_from(state, start, cfg) {
                    Err(Error::RestartRequired) => continue,
                    other => return other,
                }
            }
        })
        .collect();

    let mut best: Option<Run> = None;
    for r in runs {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.eta > b.eta) {
            best = Some(r);
        }
    }
    let best = best.expect("at least one start");
    // report the overlap the witness actually certifies
    let eta = best.witness.overlap(state)?.norm_sqr().min(1.0);
    Ok(GeomResult {
        eta,
        e_g: -eta.log2(),
        witness: best.witness,
        restarts_used: random_starts + 1,
        converged: best.converged,
    })
}

/// `⟨φ^⊗N|Ψ⟩ = Σ_j c_j √C(N,j) conj(a)^(N−j) conj(b)^j`.
fn symmetric_amplitude(c: &[C64], phi: &Qubit) -> C64 {
    let n = c.len() - 1;
    let (a, b) = (phi[0].conj(), phi[1].conj());
    let mut pa = vec![C64::new(1.0, 0.0); n + 1];
    for j in 1..=n {
        pa[j] = pa[j - 1] * a;
    }
    let mut pb = C64::new(1.0, 0.0);
    let mut total = C64::new(0.0, 0.0);
    for j in 0..=n {
        total += c[j] * binomial(n, j).sqrt() * pa[n - j] * pb;
        pb *= b;
    }
    total
}

/// `|⟨φ^⊗N|Ψ⟩|²` in `O(N)`.
pub fn symmetric_overlap(state: &SymmetricState, phi: &Qubit) -> f64 {
    match normalize_qubit(*phi) {
        Some(p) => symmetric_amplitude(state.coeffs(), &p).norm_sqr(),
        None => 0.0,
    }
}

/// Overlap at `cos x|0⟩ + e^{iy} sin x|1⟩`.
pub fn symmetric_overlap_angles(state: &SymmetricState, x: f64, y: f64) -> f64 {
    symmetric_overlap(state, &qubit_from_angles(x, y))
}

/// Single-site partial overlap `u` with `⟨φ^⊗N|Ψ⟩ = conj(φ)·u`.
fn symmetric_partial(c: &[C64], phi: &Qubit) -> [C64; 2] {
    let n = c.len() - 1;
    let nf = n as f64;
    let (a, b) = (phi[0].conj(), phi[1].conj());
    let mut pa = vec![C64::new(1.0, 0.0); n];
    for j in 1..n {
        pa[j] = pa[j - 1] * a;
    }
    let mut pb = C64::new(1.0, 0.0);
    let mut u = [C64::new(0.0, 0.0); 2];
    for j in 0..n {
        let w = pa[n - 1 - j] * pb;
        u[0] += c[j] * (binomial(n, j).sqrt() * (nf - j as f64) / nf) * w;
        u[1] += c[j + 1] * (binomial(n, j + 1).sqrt() * (j as f64 + 1.0) / nf) * w;
        pb *= b;
    }
    u
}

/// Local update rule for the symmetric search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SymmetricEngine {
    /// Move toward the single-site partial overlap computed in the Dicke basis.
    #[default]
    Dicke,
    /// Move toward `Σ_j |ε_j⟩ / ⟨φ|ε_j⟩` over the Majorana points `ε_j`.
    Majorana,
}

/// Ascent direction from the current `φ`, or `None` at a stationary or singular point.
fn direction(
    engine: SymmetricEngine,
    c: &[C64],
    points: &[Qubit],
    phi: &Qubit,
) -> Option<Qubit> {
    let raw = match engine {
        SymmetricEngine::Dicke => symmetric_partial(c, phi),
        SymmetricEngine::Majorana => {
            let mut acc = [C64::new(0.0, 0.0); 2];
            for e in points {
                let ov = phi[0].conj() * e[0] + phi[1].conj() * e[1];
                if ov.norm() < 1e-300 {
                    return None;
                }
                acc[0] += e[0] / ov;
                acc[1] += e[1] / ov;
            }
            acc
        }
    };
    normalize_qubit(raw)
}

fn symmetric_ascent(
    state: &SymmetricState,
    points: &[Qubit],
    start: Qubit,
    engine: SymmetricEngine,
    cfg: &GeomConfig,
) -> (f64, Qubit, bool) {
    let c = state.coeffs();
    let mut phi = start;
    let mut f = symmetric_overlap(state, &phi);
    for _ in 0..cfg.max_iter {
        let Some(dir) = direction(engine, c, points, &phi) else {
            return (f, phi, true);
        };
        // rephase φ so that ⟨φ|dir⟩ is real and non-negative before mixing
        let ov = phi[0].conj() * dir[0] + phi[1].conj() * dir[1];
        let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { C64::new(1.0, 0.0) };
        let aligned = [phi[0] * phase, phi[1] * phase];

        let mut accepted = None;
        let mut t = f64::INFINITY;
        for _ in 0..30 {
            let cand = if t.is_infinite() {
                Some(dir)
            } else {
                normalize_qubit([aligned[0] + dir[0] * t, aligned[1] + dir[1] * t])
            };
            if let Some(cand) = cand {
                let fc = symmetric_overlap(state, &cand);
                if fc >= f {
                    accepted = Some((cand, fc));
                    break;
                }
            }
            t = if t.is_infinite() { 1.0 } else { t * 0.5 };
        }
        let Some((next, fn_)) = accepted else {
            return (f, phi, true);
        };
        let gain = fn_ - f;
        phi = next;
        f = fn_;
        if gain < cfg.tol {
            return (f, phi, true);
        }
    }
    (f, phi, false)
}

/// Symmetric closest-product search over one Bloch vector.
///
/// Starts: a 16-point grid (`x ∈ {0, π/6, π/3, π/2}` × `y ∈ {0, π/2, π, 3π/2}`)
/// plus 8 (or the configured number of) random single-qubit states.
pub fn geometric_entanglement_symmetric(state: &SymmetricState, cfg: &GeomConfig) -> Result<GeomResult> {
    geometric_entanglement_symmetric_with(state, cfg, SymmetricEngine::Dicke)
}

pub fn geometric_entanglement_symmetric_with(
    state: &SymmetricState,
    cfg: &GeomConfig,
    engine: SymmetricEngine,
) -> Result<GeomResult> {
    let n = state.n_qubits();
    let points = match engine {
        SymmetricEngine::Majorana => state.majorana_points()?.points,
        SymmetricEngine::Dicke => Vec::new(),
    };
    let mut starts: Vec<Qubit> = Vec::with_capacity(24);
    for i in 0..4 {
        for k in 0..4 {
            let x = i as f64 * std::f64::consts::PI / 6.0;
            let y = k as f64 * std::f64::consts::FRAC_PI_2;
            starts.push(qubit_from_angles(x, y));
        }
    }
    let root = RngStream::new(cfg.seed);
    for s in 0..cfg.random_starts.unwrap_or(8) {
        starts.push(root.derive(s as u64).qubit());
    }
    let restarts_used = starts.len();
    let mut best: Option<(f64, Qubit, bool)> = None;
    for start in starts {
        let run = symmetric_ascent(state, &points, start, engine, cfg);
        if best.as_ref().is_none_or(|b| run.0 > b.0) {
            best = Some(run);
        }
    }
    let (_, phi, converged) = best.expect("grid starts");
    let eta = symmetric_overlap(state, &phi).min(1.0);
    Ok(GeomResult {
        eta,
        e_g: -eta.log2(),
        witness: SeparableProduct::uniform(n, phi)?,
        restarts_used,
        converged,
    })
}
