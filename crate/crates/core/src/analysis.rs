//! Effective interaction strength and first-order error scaling of pulse
//! programs.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{distance, program_unitary};
use crate::error::{QsaError, Result};
use crate::schedule::{Pulse, PulseProgram};

/// Pulse durations, either given directly or from pulse strengths
/// (`τ = −π/(2ω)`, `τ′ = π/(2ω′)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum Pulses {
    Tau { tau: f64, tau_prime: f64 },
    Omega { omega: f64, omega_prime: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrengthParams {
    pub g: f64,
    pub t: f64,
    pub n: u32,
    pub pulses: Pulses,
}

impl StrengthParams {
    pub fn tau(g: f64, t: f64, tau: f64, tau_prime: f64, n: u32) -> Self {
        StrengthParams {
            g,
            t,
            n,
            pulses: Pulses::Tau { tau, tau_prime },
        }
    }

    pub fn omega(g: f64, t: f64, omega: f64, omega_prime: f64, n: u32) -> Self {
        StrengthParams {
            g,
            t,
            n,
            pulses: Pulses::Omega { omega, omega_prime },
        }
    }

    /// `(τ, τ′)` after checking every invariant.
    pub fn durations(&self) -> Result<(f64, f64)> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(QsaError::Domain(format!("evolution time must be positive, got {}", self.t)));
        }
        if !self.g.is_finite() {
            return Err(QsaError::Domain("strength must be finite".into()));
        }
        if self.n == 0 {
            return Err(QsaError::Domain("step count must be positive".into()));
        }
        let (tau, tau_prime) = match self.pulses {
            Pulses::Tau { tau, tau_prime } => (tau, tau_prime),
            Pulses::Omega { omega, omega_prime } => {
                if !(omega < 0.0 && omega_prime > 0.0) {
                    return Err(QsaError::Domain(format!(
                        "need omega < 0 < omega_prime, got {omega} and {omega_prime}"
                    )));
                }
                (-FRAC_PI_2 / omega, FRAC_PI_2 / omega_prime)
            }
        };
        if !(tau >= 0.0 && tau_prime >= 0.0) || !(tau + tau_prime).is_finite() {
            return Err(QsaError::Domain(format!(
                "pulse durations must be nonnegative, got {tau} and {tau_prime}"
            )));
        }
        Ok((tau, tau_prime))
    }

    /// `t′ = t + n(τ + τ′)`.
    pub fn stretched_time(&self) -> Result<f64> {
        let (tau, tau_prime) = self.durations()?;
        Ok(self.t + self.n as f64 * (tau + tau_prime))
    }
}

/// `g′ = g·t / (t + n(τ + τ′))`.
pub fn strength_target(p: &StrengthParams) -> Result<f64> {
    Ok(p.g * p.t / p.stretched_time()?)
}

/// Toric-code strength `g_w = g·t / (4(t + τ + τ′))`; needs `n = 1`.
pub fn strength_toric(p: &StrengthParams) -> Result<f64> {
    let (tau, tau_prime) = p.durations()?;
    if p.n != 1 {
        return Err(QsaError::InvalidSpec(format!("toric strength uses n = 1, got {}", p.n)));
    }
    Ok(p.g * p.t / (4.0 * (p.t + tau + tau_prime)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum OffsetMode {
    /// Every pulse angle shifted by `+δ`.
    Common,
    /// Each angle shifted by `δ·u`, `u` uniform in `[−1, 1]` and drawn once
    /// per pulse, so every `δ` uses the same direction.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorScalingReport {
    pub subject: String,
    pub pulses: usize,
    pub deltas: Vec<f64>,
    pub distances: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute angle offset applied, per delta.
    pub max_offsets: Vec<f64>,
}

fn perturbed(prog: &PulseProgram, delta: f64, mode: OffsetMode) -> (PulseProgram, f64) {
    match mode {
        OffsetMode::Common => (prog.offset(delta), delta.abs()),
        OffsetMode::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut max: f64 = 0.0;
            let pulses = prog
                .pulses
                .iter()
                .map(|p| {
                    let d = delta * rng.random_range(-1.0..=1.0);
                    max = max.max(d.abs());
                    Pulse {
                        kind: p.kind,
                        rotation: p.rotation.with_angle(p.rotation.angle() + d),
                    }
                })
                .collect();
            (
                PulseProgram {
                    n_sites: prog.n_sites,
                    pulses,
                },
                max,
            )
        }
    }
}

/// Spectral distance between the program with every angle offset by `delta`
/// and the ideal program.
pub fn perturbation_distance(prog: &PulseProgram, delta: f64) -> Result<f64> {
    let ideal = program_unitary(prog)?;
    distance(&program_unitary(&prog.offset(delta))?, &ideal)
}

/// Least-squares fit of `log d = slope·log δ + intercept` over the given
/// offsets, which must be strictly decreasing and lie in `(0, 0.1]`.
pub fn error_scaling(subject: &str, prog: &PulseProgram, deltas: &[f64], mode: OffsetMode) -> Result<ErrorScalingReport> {
    if deltas.len() < 2 {
        return Err(QsaError::Domain("need at least two offsets".into()));
    }
    if deltas.iter().any(|&d| !(d > 0.0 && d <= 0.1)) {
        return Err(QsaError::Domain("offsets must lie in (0, 0.1]".into()));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(QsaError::Domain("offsets must be strictly decreasing".into()));
    }
    let ideal = program_unitary(prog)?;
    let mut distances = Vec::with_capacity(deltas.len());
    let mut max_offsets = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let (p, max) = perturbed(prog, d, mode);
        distances.push(distance(&program_unitary(&p)?, &ideal)?);
        max_offsets.push(max);
    }
    if distances.iter().any(|&d| d <= 0.0) {
        return Err(QsaError::Domain("a perturbed program matched the ideal one exactly".into()));
    }
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = distances.iter().map(|d| d.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(ErrorScalingReport {
        subject: subject.to_string(),
        pulses: prog.len(),
        deltas: deltas.to_vec(),
        distances,
        slope,
        intercept,
        max_offsets,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
