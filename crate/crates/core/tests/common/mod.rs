//! Reference computations that share no code with the library: explicit
//! Kronecker-product operators, SVDs and grid searches.
#![allow(dead_code)]

use std::f64::consts::PI;

use macrolab::{PureState, C64};
use nalgebra::{DMatrix, DVector, Matrix2};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Pauli matrix `g ∈ {0: x, 1: y, 2: z}`.
pub fn pauli(g: usize) -> Matrix2<C64> {
    match g {
        0 => Matrix2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)),
        1 => Matrix2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)),
        _ => Matrix2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)),
    }
}

/// `op` acting on `site` of `n` qubits, site 0 being the most significant bit.
pub fn embed(n: usize, site: usize, op: &Matrix2<C64>) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::from_element(1, 1, c(1., 0.));
    for s in 0..n {
        let f = if s == site {
            DMatrix::from_fn(2, 2, |i, j| op[(i, j)])
        } else {
            DMatrix::identity(2, 2)
        };
        m = m.kronecker(&f);
    }
    m
}

pub fn vector(state: &PureState) -> DVector<C64> {
    DVector::from_column_slice(state.amplitudes())
}

pub fn expectation(psi: &DVector<C64>, op: &DMatrix<C64>) -> C64 {
    psi.dotc(&(op * psi))
}

pub fn direction(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Precomputed `σ^g_j` for an `n`-qubit register.
pub struct Paulis {
    pub n: usize,
    ops: Vec<[DMatrix<C64>; 3]>,
}

impl Paulis {
    pub fn new(n: usize) -> Self {
        let ops = (0..n).map(|j| [0, 1, 2].map(|g| embed(n, j, &pauli(g)))).collect();
        Paulis { n, ops }
    }

    pub fn get(&self, site: usize, g: usize) -> &DMatrix<C64> {
        &self.ops[site][g]
    }

    pub fn additive(&self, dirs: &[[f64; 3]]) -> DMatrix<C64> {
        let d = 1 << self.n;
        let mut s = DMatrix::<C64>::zeros(d, d);
        for (j, v) in dirs.iter().enumerate() {
            for g in 0..3 {
                s += &self.ops[j][g] * c(v[g], 0.0);
            }
        }
        s
    }

    /// `⟨S²⟩ − ⟨S⟩²` for `S = Σ_j α_j·σ_j`.
    pub fn variance(&self, psi: &DVector<C64>, dirs: &[[f64; 3]]) -> f64 {
        let s = self.additive(dirs);
        let s_psi = &s * psi;
        let second = s_psi.dotc(&s_psi).re;
        let first = psi.dotc(&s_psi).re;
        second - first * first
    }
}

/// Coordinate ascent over per-site spherical angles with shrinking steps.
fn refine<F: Fn(&[f64]) -> f64>(f: &F, mut x: Vec<f64>, start_step: f64) -> (f64, Vec<f64>) {
    let mut best = f(&x);
    let mut step = start_step;
    while step > 1e-8 {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += dir * step;
                let v = f(&y);
                if v > best {
                    best = v;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, x)
}

/// The 18 grid directions used per sphere: 3 polar × 6 azimuthal angles.
fn sphere_grid() -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for i in 0..3 {
        for k in 0..6 {
            pts.push(((i as f64 + 0.5) * PI / 3.0, 2.0 * PI * k as f64 / 6.0));
        }
    }
    pts
}

/// Maximal additive variance by exhaustive 18-point-per-sphere search and
/// local refinement of the best few grid points. Meant for `N ≤ 3`.
pub fn m_tilde_oracle(state: &PureState) -> f64 {
    let n = state.n_qubits();
    let paulis = Paulis::new(n);
    let psi = vector(state);
    let grid = sphere_grid();
    let f = |x: &[f64]| {
        let dirs: Vec<[f64; 3]> = (0..n).map(|j| direction(x[2 * j], x[2 * j + 1])).collect();
        paulis.variance(&psi, &dirs)
    };
    let mut scored = Vec::new();
    let total = grid.len().pow(n as u32);
    for idx in 0..total {
        let mut r = idx;
        let mut x = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let (t, p) = grid[r % grid.len()];
            r /= grid.len();
            x.push(t);
            x.push(p);
        }
        scored.push((f(&x), x));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored
        .into_iter()
        .take(6)
        .map(|(_, x)| refine(&f, x, 0.3).0)
        .fold(f64::MIN, f64::max)
}

/// Largest squared Schmidt coefficient of a two-qubit state.
pub fn eta_two_qubit_svd(state: &PureState) -> f64 {
    let a = state.amplitudes();
    let m = nalgebra::Matrix2::new(a[0], a[1], a[2], a[3]);
    let s = m.singular_values();
    s[0].max(s[1]).powi(2)
}

fn qubit(theta: f64, phi: f64) -> [C64; 2] {
    [c((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)]
}

/// Contracts every site but `free` with `conj(locals)`; `|result|²` is the
/// best overlap over the free site.
fn free_site_norm(amps: &[C64], n: usize, locals: &[[C64; 2]], free: usize) -> f64 {
    let mut u = [c(0., 0.); 2];
    for (i, a) in amps.iter().enumerate() {
        let mut w = *a;
        for (s, q) in locals.iter().enumerate() {
            if s == free {
                continue;
            }
            let bit = (i >> (n - 1 - s)) & 1;
            w *= q[bit].conj();
        }
        u[(i >> (n - 1 - free)) & 1] += w;
    }
    u[0].norm_sqr() + u[1].norm_sqr()
}

/// `max η` for `N = 2` from a 256×256 grid on the first Bloch sphere, the
/// second site solved exactly, then refined.
pub fn eta_grid_n2(state: &PureState) -> f64 {
    assert_eq!(state.n_qubits(), 2);
    let amps = state.amplitudes();
    let f = |x: &[f64]| free_site_norm(amps, 2, &[qubit(x[0], x[1]), qubit(0.0, 0.0)], 1);
    let m = 256;
    let mut best = (f64::MIN, vec![0.0, 0.0]);
    for i in 0..m {
        for k in 0..m {
            let x = vec![PI * i as f64 / (m - 1) as f64, 2.0 * PI * k as f64 / m as f64];
            let v = f(&x);
            if v > best.0 {
                best = (v, x);
            }
        }
    }
    refine(&f, best.1, PI / m as f64).0
}

/// `max η` for `N = 3`: grid over the first two spheres, third site exact.
pub fn eta_grid_n3(state: &PureState) -> f64 {
    assert_eq!(state.n_qubits(), 3);
    let amps = state.amplitudes();
    let f = |x: &[f64]| {
        free_site_norm(amps, 3, &[qubit(x[0], x[1]), qubit(x[2], x[3]), qubit(0.0, 0.0)], 2)
    };
    let (mt, mp) = (12, 24);
    let pts: Vec<(f64, f64)> = (0..mt)
        .flat_map(|i| (0..mp).map(move |k| (PI * (i as f64 + 0.5) / mt as f64, 2.0 * PI * k as f64 / mp as f64)))
        .collect();
    let mut scored = Vec::new();
    for &(a, b) in &pts {
        for &(p, q) in &pts {
            let x = vec![a, b, p, q];
            scored.push((f(&x), x));
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored
        .into_iter()
        .take(8)
        .map(|(_, x)| refine(&f, x, 0.2).0)
        .fold(f64::MIN, f64::max)
}

/// `max η` over uniform products `φ^⊗N` from a grid in `(θ, φ)` with the
/// product vector built explicitly.
pub fn eta_uniform_grid(state: &PureState, points: usize) -> f64 {
    let n = state.n_qubits();
    let psi = vector(state);
    let f = |x: &[f64]| {
        let q = qubit(x[0], x[1]);
        let mut v = DVector::from_element(1, c(1., 0.));
        for _ in 0..n {
            v = v.kronecker(&DVector::from_column_slice(&q));
        }
        v.dotc(&psi).norm_sqr()
    };
    let mut best = (f64::MIN, vec![0.0, 0.0]);
    for i in 0..points {
        for k in 0..points {
            let x = vec![PI * i as f64 / (points - 1) as f64, 2.0 * PI * k as f64 / points as f64];
            let v = f(&x);
            if v > best.0 {
                best = (v, x);
            }
        }
    }
    refine(&f, best.1, PI / points as f64).0
}
