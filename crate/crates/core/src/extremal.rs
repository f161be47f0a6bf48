//! Closed forms for the `Ξ(θ, ε)` family and the largest macroscopicity
//! compatible with a given product-state overlap `η`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::macroscopicity::normalize;
use crate::observables::build_symmetric_vcm;
use crate::states::{binomial, SymmetricState, C64};

const LINE_TOL: f64 = 1e-12;

/// Normalized macroscopicity `M` of `Ξ(θ, ε)`.
///
/// On `ε = π/2` this is `√((max(1, N sin²2θ) − 1)/(N − 1))`, on `θ = π/4` it is
/// `√(sin²ε / (1 + cos^N ε))`; elsewhere the 3×3 symmetric VCM is diagonalized.
pub fn xi_macroscopicity_analytic(n: usize, theta: f64, epsilon: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("need n ≥ 2, got {n}")));
    }
    let nf = n as f64;
    if (epsilon - FRAC_PI_2).abs() < LINE_TOL {
        let lambda = (nf * (2.0 * theta).sin().powi(2)).max(1.0);
        return Ok(((lambda - 1.0) / (nf - 1.0)).sqrt());
    }
    if (theta - FRAC_PI_4).abs() < LINE_TOL {
        let denom = 1.0 + epsilon.cos().powi(n as i32);
        if denom <= 0.0 {
            return Err(Error::invalid("Ξ(π/4, ε) vanishes for this (n, ε)"));
        }
        return Ok((epsilon.sin().powi(2) / denom).sqrt().min(1.0));
    }
    let state = SymmetricState::xi_state(n, theta, epsilon)?;
    let (values, _) = build_symmetric_vcm(&state).spectrum();
    normalize(nf * values[0], n)
}

/// `E_G = −log2 cos²θ` of `Ξ(θ, π/2)`, valid for `0 ≤ θ ≤ π/4` and any `N`.
pub fn xi_geometric_analytic(theta: f64) -> f64 {
    -theta.cos().powi(2).log2()
}

/// `θ` at which `M(Ξ(θ, π/2))` leaves zero: `½ arcsin √(1/N)`.
pub fn xi_threshold_theta(n: usize) -> f64 {
    0.5 * (1.0 / n as f64).sqrt().asin()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    /// Total-spin eigenstates `|S, λ⟩`, with `C(N, (N+S)/2)` states per `S`.
    General,
    /// Dicke states `|D_N^(k)⟩` with `S = N − 2k`.
    Symmetric,
}

impl BoundMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundMode::General => "general",
            BoundMode::Symmetric => "symmetric",
        }
    }
}

impl std::str::FromStr for BoundMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(BoundMode::General),
            "symmetric" => Ok(BoundMode::Symmetric),
            other => Err(Error::invalid(format!("unknown bound mode `{other}`"))),
        }
    }
}

/// `multiplicity` pairs `(S, −S)`, each carrying total probability `weight`
/// split evenly between its two components. For `S = 0` a "pair" is a single state.
#[derive(Clone, Debug, PartialEq)]
pub struct FilledPair {
    /// `S` in general mode, the smaller Dicke index `k` in symmetric mode.
    pub label: usize,
    pub s: usize,
    pub multiplicity: f64,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct EtaMaxSpec {
    pub n: usize,
    pub eta: f64,
    pub mode: BoundMode,
    pub filled_pairs: Vec<FilledPair>,
}

impl EtaMaxSpec {
    /// Greedy filling from the largest `|S|` downward; every component gets at
    /// most `η` and the leftover goes on the next unfilled pair.
    ///
    /// Fails for `η > 1/2` and for `η` below the feasibility limit (`2^−N` in
    /// general mode, `1/(N+1)` in symmetric mode), where the probability
    /// cannot be placed.
    pub fn build(n: usize, eta: f64, mode: BoundMode) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("need n ≥ 2, got {n}")));
        }
        if !(eta > 0.0 && eta <= 0.5) {
            return Err(Error::invalid(format!("η must lie in (0, 1/2], got {eta}")));
        }
        let min = min_eta(n, mode);
        if eta < min * (1.0 - 1e-12) {
            return Err(Error::invalid(format!(
                "η = {eta} is below the {} minimum {min} for n = {n}",
                mode.as_str()
            )));
        }
        let mut remaining = 1.0f64;
        let mut filled = Vec::new();
        for step in 0..=n / 2 {
            if remaining <= 0.0 {
                break;
            }
            let s = n - 2 * step;
            let (label, degeneracy, capacity) = match mode {
                BoundMode::General => (s, binomial(n, step), if s == 0 { eta } else { 2.0 * eta }),
                BoundMode::Symmetric => (step, 1.0, if s == 0 { eta } else { 2.0 * eta }),
            };
            let full = (remaining / capacity).floor().min(degeneracy);
            if full >= 1.0 {
                filled.push(FilledPair {
                    label,
                    s,
                    multiplicity: full,
                    weight: capacity,
                });
                remaining = (remaining - full * capacity).max(0.0);
            }
            if full < degeneracy && remaining > 0.0 {
                filled.push(FilledPair {
                    label,
                    s,
                    multiplicity: 1.0,
                    weight: remaining,
                });
                remaining = 0.0;
            }
        }
        if remaining > 1e-12 {
            return Err(Error::invalid(format!("η = {eta} leaves {remaining} unplaced")));
        }
        Ok(EtaMaxSpec {
            n,
            eta,
            mode,
            filled_pairs: filled,
        })
    }

    pub fn total_weight(&self) -> f64 {
        self.filled_pairs.iter().map(|p| p.multiplicity * p.weight).sum()
    }

    /// Largest single-component probability.
    pub fn max_component_weight(&self) -> f64 {
        self.filled_pairs
            .iter()
            .map(|p| if p.s == 0 { p.weight } else { p.weight / 2.0 })
            .fold(0.0, f64::max)
    }

    /// The symmetric construction as a state with real non-negative Dicke coefficients.
    pub fn to_symmetric_state(&self) -> Result<SymmetricState> {
        if self.mode != BoundMode::Symmetric {
            return Err(Error::invalid("only symmetric-mode bounds have a Dicke realization"));
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); self.n + 1];
        for p in &self.filled_pairs {
            if p.s == 0 {
                coeffs[p.label] = C64::new(p.weight.sqrt(), 0.0);
            } else {
                let a = C64::new((p.weight / 2.0).sqrt(), 0.0);
                coeffs[p.label] = a;
                coeffs[self.n - p.label] = a;
            }
        }
        SymmetricState::from_coeffs(coeffs)
    }
}

/// Smallest feasible `η` for the construction.
pub fn min_eta(n: usize, mode: BoundMode) -> f64 {
    match mode {
        BoundMode::General => 0.5f64.powi(n as i32),
        BoundMode::Symmetric => 1.0 / (n as f64 + 1.0),
    }
}

/// `(M̃, M)` of the construction; `M̃ = Σ weight · S²` since every pair has zero mean.
pub fn eta_max_bound(spec: &EtaMaxSpec) -> Result<(f64, f64)> {
    let m_tilde: f64 = spec
        .filled_pairs
        .iter()
        .map(|p| p.multiplicity * p.weight * (p.s * p.s) as f64)
        .sum();
    Ok((m_tilde, normalize(m_tilde, spec.n)?))
}

/// Shorthand for `eta_max_bound(&EtaMaxSpec::build(n, eta, mode)?)`.
pub fn eta_bound(n: usize, eta: f64, mode: BoundMode) -> Result<(f64, f64)> {
    eta_max_bound(&EtaMaxSpec::build(n, eta, mode)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::macroscopicity::macroscopicity_symmetric;
    use std::f64::consts::PI;

    #[test]
    fn xi_examples() {
        for n in [2, 5, 9] {
            assert!((xi_macroscopicity_analytic(n, FRAC_PI_4, FRAC_PI_2).unwrap() - 1.0).abs() < 1e-12);
        }
        let th = 0.5 * (1.0f64 / 3.0).asin();
        assert!(xi_macroscopicity_analytic(9, th, FRAC_PI_2).unwrap().abs() < 1e-6);
        let want = (0.75 / (1.0 + 2f64.powi(-24))).sqrt();
        assert!((xi_macroscopicity_analytic(24, FRAC_PI_4, PI / 3.0).unwrap() - want).abs() < 1e-12);
        assert!((xi_geometric_analytic(FRAC_PI_4) - 1.0).abs() < 1e-15);
        assert_eq!(xi_geometric_analytic(0.0), 0.0);
        assert!((xi_geometric_analytic(PI / 6.0) - 0.415_037_499_278_843_8).abs() < 1e-12);
        assert!(xi_macroscopicity_analytic(3, FRAC_PI_4, PI).is_err());
    }

    #[test]
    fn xi_general_point_matches_numeric() {
        let s = SymmetricState::xi_state(7, 0.3, 1.2).unwrap();
        let numeric = macroscopicity_symmetric(&s).unwrap().m_norm;
        assert!((xi_macroscopicity_analytic(7, 0.3, 1.2).unwrap() - numeric).abs() < 1e-12);
    }

    #[test]
    fn threshold_theta() {
        assert!((xi_threshold_theta(9) - 0.5 * (1.0f64 / 3.0).asin()).abs() < 1e-15);
    }

    #[test]
    fn bound_examples() {
        for n in [3, 7, 20] {
            for mode in [BoundMode::General, BoundMode::Symmetric] {
                let (mt, m) = eta_bound(n, 0.5, mode).unwrap();
                assert!((mt - (n * n) as f64).abs() < 1e-9 && (m - 1.0).abs() < 1e-12);
            }
        }
        let (mt, m) = eta_bound(4, 0.25, BoundMode::General).unwrap();
        assert!((mt - 10.0).abs() < 1e-12);
        assert!((m - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(eta_bound(4, 0.6, BoundMode::General).is_err());
        assert!(eta_bound(4, 0.1, BoundMode::Symmetric).is_err());
    }

    #[test]
    fn spec_invariants() {
        for mode in [BoundMode::General, BoundMode::Symmetric] {
            for n in [3, 6, 10] {
                for e in 1..=10 {
                    let eta = 0.5f64.powi(e);
                    let Ok(spec) = EtaMaxSpec::build(n, eta, mode) else {
                        assert!(eta < min_eta(n, mode));
                        continue;
                    };
                    assert!((spec.total_weight() - 1.0).abs() < 1e-12);
                    assert!(spec.max_component_weight() <= eta + 1e-12);
                    assert!(spec.filled_pairs.windows(2).all(|w| w[0].s >= w[1].s));
                }
            }
        }
    }

    #[test]
    fn symmetric_realization_reproduces_bound() {
        for (n, eta) in [(5, 0.3), (8, 0.2), (12, 1.0 / 13.0)] {
            let spec = EtaMaxSpec::build(n, eta, BoundMode::Symmetric).unwrap();
            let (mt, _) = eta_max_bound(&spec).unwrap();
            let state = spec.to_symmetric_state().unwrap();
            let r = macroscopicity_symmetric(&state).unwrap();
            assert!((r.m_tilde - mt).abs() < 1e-9, "n={n}: {} vs {mt}", r.m_tilde);
            let largest = state.coeffs().iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
            assert!((largest - spec.max_component_weight()).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_dicke_limit() {
        let (_, m) = eta_bound(200, 1.0 / 201.0, BoundMode::Symmetric).unwrap();
        assert!((m - 1.0 / 3f64.sqrt()).abs() < 0.02);
    }
}
