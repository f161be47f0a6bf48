//! Seeded generators for the random pure-state ensembles.
//!
//! Every generator draws from an [`RngStream`] (ChaCha8 keyed by a 64-bit
//! seed), so a given `(parameters, seed)` pair always yields bit-identical
//! states. Parallel callers derive one stream per sample with
//! [`RngStream::derive`].

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::limits::check_dense;
use crate::states::{PureState, SymmetricState, C64};

pub type Gate2 = [[C64; 4]; 4];

/// A reproducible random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn algorithm(&self) -> &'static str {
        Self::ALGORITHM
    }

    /// Stream for sub-task `index` of this seed, independent of draw order.
    pub fn derive(&self, index: u64) -> RngStream {
        RngStream::new(derive_seed(self.seed, index))
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Complex number with independent standard-normal real and imaginary parts.
    pub fn complex_normal(&mut self) -> C64 {
        let re = self.normal();
        let im = self.normal();
        C64::new(re, im)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Uniform point on the unit 2-sphere.
    pub fn unit_vector3(&mut self) -> [f64; 3] {
        loop {
            let v = [self.normal(), self.normal(), self.normal()];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-12 {
                return [v[0] / n, v[1] / n, v[2] / n];
            }
        }
    }

    /// Haar-random single-qubit state.
    pub fn qubit(&mut self) -> [C64; 2] {
        loop {
            let a = self.complex_normal();
            let b = self.complex_normal();
            let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if n > 1e-12 {
                return [a / n, b / n];
            }
        }
    }
}

/// SplitMix64 finalizer over `(seed, index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Haar-random element of U(4): QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn random_two_qubit_unitary(rng: &mut RngStream) -> Gate2 {
    let g = Matrix4::<C64>::from_fn(|_, _| rng.complex_normal());
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = [[C64::new(0.0, 0.0); 4]; 4];
    for c in 0..4 {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for (row, urow) in u.iter_mut().enumerate() {
            urow[c] = q[(row, c)] * phase;
        }
    }
    u
}

/// Which pairs a random physical circuit may couple.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Topology {
    /// Adjacent sites on a closed ring, including `(n−1, 0)`.
    #[default]
    Ring,
    /// Any two distinct sites.
    AllToAll,
}

/// Applies `k` Haar-random two-qubit gates to `|0⟩^⊗n`, returning the state
/// and the pairs that were hit, in order.
pub fn random_physical_circuit(
    n: usize,
    k: usize,
    rng: &mut RngStream,
    topology: Topology,
) -> Result<(PureState, Vec<(usize, usize)>)> {
    if n < 2 {
        return Err(Error::invalid(format!("random physical state needs n ≥ 2, got {n}")));
    }
    check_dense(n)?;
    let mut state = PureState::zeros(n)?;
    let mut pairs = Vec::with_capacity(k);
    for _ in 0..k {
        let pair = match topology {
            Topology::Ring => {
                let e = rng.below(n);
                (e, (e + 1) % n)
            }
            Topology::AllToAll => {
                let a = rng.below(n);
                let b = (a + 1 + rng.below(n - 1)) % n;
                (a, b)
            }
        };
        let u = random_two_qubit_unitary(rng);
        state.apply_two_qubit(pair.0, pair.1, &u)?;
        pairs.push(pair);
    }
    Ok((state, pairs))
}

pub fn random_physical_state(n: usize, k: usize, rng: &mut RngStream) -> Result<PureState> {
    random_physical_circuit(n, k, rng, Topology::Ring).map(|(s, _)| s)
}

/// Gates on `(0,1), (1,2), …, (k−1,k)` applied to `|0⟩^⊗n`.
pub fn random_linear_chain(n: usize, k: usize, rng: &mut RngStream) -> Result<PureState> {
    if n < 2 {
        return Err(Error::invalid(format!("random linear chain needs n ≥ 2, got {n}")));
    }
    if k > n - 1 {
        return Err(Error::invalid(format!(
            "linear chain of {n} qubits has {} pairs, asked for {k}",
            n - 1
        )));
    }
    check_dense(n)?;
    let mut state = PureState::zeros(n)?;
    for p in 0..k {
        let u = random_two_qubit_unitary(rng);
        state.apply_two_qubit(p, p + 1, &u)?;
    }
    Ok(state)
}

/// Normalized complex Gaussian amplitude vector.
pub fn haar_random_state(n: usize, rng: &mut RngStream) -> Result<PureState> {
    if n == 0 {
        return Err(Error::invalid("a state needs at least one qubit"));
    }
    check_dense(n)?;
    let amps = (0..1usize << n).map(|_| rng.complex_normal()).collect();
    PureState::from_amplitudes(n, amps)
}

/// Normalized complex Gaussian Dicke coefficients.
pub fn random_symmetric_state(n: usize, rng: &mut RngStream) -> Result<SymmetricState> {
    if n < 2 {
        return Err(Error::invalid(format!("random symmetric state needs n ≥ 2, got {n}")));
    }
    SymmetricState::from_coeffs((0..=n).map(|_| rng.complex_normal()).collect())
}

/// Haar-random single-qubit unitary (used for local-rotation checks).
pub fn random_single_qubit_unitary(rng: &mut RngStream) -> [[C64; 2]; 2] {
    let [a, b] = rng.qubit();
    let phase = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * rng.uniform());
    [[a, -b.conj() * phase], [b, a.conj() * phase]]
}
