//! Dense matrices and statevectors used as ground truth.
//!
//! Basis ordering: site 0 is the most significant qubit, so the matrix of a
//! string is the Kronecker product of its letters read left to right.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{QsaError, Result};
use crate::pauli::{i_pow, PauliOperator, PauliString, WeightedPauliSum};
use crate::propagator::InvolutionRotation;
use crate::schedule::{PulseProgram, QsaSchedule};

pub type C64 = Complex64;

const DEFAULT_MAX_DENSE: usize = 14;
const DEFAULT_MAX_STATE: usize = 24;

/// Largest qubit count for which full matrices are built
/// (`QSA_MAX_DENSE_QUBITS`, default 14).
pub fn max_dense_qubits() -> usize {
    static LIMIT: OnceLock<usize> = OnceLock::new();
    *LIMIT.get_or_init(|| env_limit("QSA_MAX_DENSE_QUBITS", DEFAULT_MAX_DENSE))
}

/// Largest qubit count for statevectors (`QSA_MAX_STATE_QUBITS`, default 24).
pub fn max_state_qubits() -> usize {
    static LIMIT: OnceLock<usize> = OnceLock::new();
    *LIMIT.get_or_init(|| env_limit("QSA_MAX_STATE_QUBITS", DEFAULT_MAX_STATE))
}

fn env_limit(var: &str, default: usize) -> usize {
    std::env::var(var)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(default)
}

fn check_dense(n: usize) -> Result<()> {
    let limit = max_dense_qubits();
    if n > limit {
        return Err(QsaError::Resource {
            what: "dense operator",
            needed: n,
            limit,
        });
    }
    Ok(())
}

pub(crate) fn check_state(n: usize) -> Result<()> {
    let limit = max_state_qubits();
    if n > limit {
        return Err(QsaError::Resource {
            what: "statevector",
            needed: n,
            limit,
        });
    }
    Ok(())
}

/// Adds `coeff·P·src` into `dst`.
fn accumulate_string(p: &PauliString, coeff: C64, src: &[C64], dst: &mut [C64]) {
    let (x, z, y) = p.masks();
    let base = coeff * i_pow(p.phase() + (y % 4) as u8);
    for (b, amp) in src.iter().enumerate() {
        if amp.re == 0.0 && amp.im == 0.0 {
            continue;
        }
        let sign = if (b as u64 & z).count_ones() % 2 == 0 { base } else { -base };
        dst[b ^ x as usize] += sign * amp;
    }
}

fn accumulate_operator(op: &PauliOperator, src: &[C64], dst: &mut [C64]) {
    for (c, p) in op.terms() {
        accumulate_string(&p, c, src, dst);
    }
}

fn accumulate_sum(h: &WeightedPauliSum, src: &[C64], dst: &mut [C64]) {
    for (c, p) in h.terms() {
        accumulate_string(p, C64::new(*c, 0.0), src, dst);
    }
}

/// `ψ ← cos(θ)ψ − i sin(θ) Hψ`.
fn rotate_slice(r: &InvolutionRotation, amps: &mut [C64], scratch: &mut Vec<C64>) {
    scratch.clear();
    scratch.resize(amps.len(), C64::new(0.0, 0.0));
    accumulate_sum(r.generator(), amps, scratch);
    let (s, c) = r.angle().sin_cos();
    let mis = C64::new(0.0, -s);
    for (a, h) in amps.iter_mut().zip(scratch.iter()) {
        *a = *a * c + mis * h;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_sites: usize,
    amps: Vec<C64>,
}

impl Statevector {
    /// `|0…0⟩`.
    pub fn zero(n_sites: usize) -> Result<Self> {
        check_state(n_sites)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_sites];
        amps[0] = C64::new(1.0, 0.0);
        Ok(Statevector { n_sites, amps })
    }

    /// Computational basis state with the given bit per site.
    pub fn basis(n_sites: usize, bits: &[bool]) -> Result<Self> {
        check_state(n_sites)?;
        let mut idx = 0usize;
        for (k, &bit) in bits.iter().enumerate() {
            if bit {
                idx |= 1 << (n_sites - 1 - k);
            }
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_sites];
        amps[idx] = C64::new(1.0, 0.0);
        Ok(Statevector { n_sites, amps })
    }

    pub fn from_amplitudes(n_sites: usize, amps: Vec<C64>) -> Result<Self> {
        check_state(n_sites)?;
        if amps.len() != 1 << n_sites {
            return Err(QsaError::Dimension(amps.len(), 1 << n_sites));
        }
        Ok(Statevector { n_sites, amps })
    }

    /// Normalized Gaussian random state, reproducible from `seed`.
    pub fn random(n_sites: usize, seed: u64) -> Result<Self> {
        check_state(n_sites)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..1usize << n_sites)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            })
            .collect();
        let mut s = Statevector { n_sites, amps };
        s.normalize();
        Ok(s)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    pub fn scale(&mut self, c: C64) {
        for a in &mut self.amps {
            *a *= c;
        }
    }

    fn check_same(&self, other: &Statevector) -> Result<()> {
        if self.n_sites != other.n_sites {
            return Err(QsaError::Dimension(self.n_sites, other.n_sites));
        }
        Ok(())
    }

    fn check_op(&self, n: usize) -> Result<()> {
        if n != self.n_sites {
            return Err(QsaError::Dimension(self.n_sites, n));
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> Result<C64> {
        self.check_same(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `‖self − other‖₂`.
    pub fn distance(&self, other: &Statevector) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn add_scaled(&mut self, c: C64, other: &Statevector) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
        Ok(())
    }

    /// `P|ψ⟩` as a new state.
    pub fn apply_string(&self, p: &PauliString) -> Result<Statevector> {
        self.check_op(p.n_sites())?;
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        accumulate_string(p, C64::new(1.0, 0.0), &self.amps, &mut out);
        Ok(Statevector {
            n_sites: self.n_sites,
            amps: out,
        })
    }

    /// `O|ψ⟩` for a symbolic operator (not necessarily unitary).
    pub fn apply_operator(&self, op: &PauliOperator) -> Result<Statevector> {
        self.check_op(op.n_sites())?;
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        accumulate_operator(op, &self.amps, &mut out);
        Ok(Statevector {
            n_sites: self.n_sites,
            amps: out,
        })
    }

    pub fn apply_sum(&self, h: &WeightedPauliSum) -> Result<Statevector> {
        self.check_op(h.n_sites())?;
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        accumulate_sum(h, &self.amps, &mut out);
        Ok(Statevector {
            n_sites: self.n_sites,
            amps: out,
        })
    }

    pub fn apply_rotation(&mut self, r: &InvolutionRotation) -> Result<()> {
        self.check_op(r.n_sites())?;
        let mut scratch = Vec::new();
        rotate_slice(r, &mut self.amps, &mut scratch);
        Ok(())
    }

    pub fn apply_program(&mut self, prog: &PulseProgram) -> Result<()> {
        self.check_op(prog.n_sites)?;
        let mut scratch = Vec::new();
        for p in &prog.pulses {
            rotate_slice(&p.rotation, &mut self.amps, &mut scratch);
        }
        Ok(())
    }

    /// `(1 + P)/2 |ψ⟩`, unnormalized.
    pub fn project_plus(&mut self, p: &PauliString) -> Result<()> {
        let pp = self.apply_string(p)?;
        for (a, b) in self.amps.iter_mut().zip(pp.amps) {
            *a = (*a + b) * 0.5;
        }
        Ok(())
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn expectation(&self, p: &PauliString) -> Result<C64> {
        self.inner(&self.apply_string(p)?)
    }

    /// `exp(−i·angle·H)|ψ⟩` by a scaled Taylor series; valid for any Hermitian
    /// sum and independent of the involution closed form.
    pub fn evolve_taylor(&self, h: &WeightedPauliSum, angle: f64) -> Result<Statevector> {
        self.check_op(h.n_sites())?;
        let bound = h.norm_bound() * angle.abs();
        let steps = (bound / 0.5).ceil().max(1.0) as usize;
        let dt = angle / steps as f64;
        let mut state = self.amps.clone();
        let mut term = vec![C64::new(0.0, 0.0); state.len()];
        let mut next = vec![C64::new(0.0, 0.0); state.len()];
        for _ in 0..steps {
            term.copy_from_slice(&state);
            for k in 1..60 {
                next.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
                accumulate_sum(h, &term, &mut next);
                let f = C64::new(0.0, -dt / k as f64);
                let mut mag = 0.0;
                for (t, n) in term.iter_mut().zip(&next) {
                    *t = f * n;
                    mag += t.norm_sqr();
                }
                for (s, t) in state.iter_mut().zip(&term) {
                    *s += t;
                }
                if mag.sqrt() < 1e-18 {
                    break;
                }
            }
        }
        Ok(Statevector {
            n_sites: self.n_sites,
            amps: state,
        })
    }
}

/// Dense `2^n × 2^n` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n_qubits: usize,
    matrix: DMatrix<C64>,
}

/// Anything that has an exact dense matrix.
pub trait ToDense {
    fn n_sites(&self) -> usize;
    fn accumulate_into(&self, src: &[C64], dst: &mut [C64]);
}

impl ToDense for PauliString {
    fn n_sites(&self) -> usize {
        PauliString::n_sites(self)
    }
    fn accumulate_into(&self, src: &[C64], dst: &mut [C64]) {
        accumulate_string(self, C64::new(1.0, 0.0), src, dst)
    }
}

impl ToDense for WeightedPauliSum {
    fn n_sites(&self) -> usize {
        WeightedPauliSum::n_sites(self)
    }
    fn accumulate_into(&self, src: &[C64], dst: &mut [C64]) {
        accumulate_sum(self, src, dst)
    }
}

impl ToDense for PauliOperator {
    fn n_sites(&self) -> usize {
        PauliOperator::n_sites(self)
    }
    fn accumulate_into(&self, src: &[C64], dst: &mut [C64]) {
        accumulate_operator(self, src, dst)
    }
}

pub fn to_matrix<T: ToDense + ?Sized>(p: &T) -> Result<DenseOperator> {
    let n = p.n_sites();
    check_dense(n)?;
    let dim = 1usize << n;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    let mut basis = vec![C64::new(0.0, 0.0); dim];
    for (col, chunk) in m.as_mut_slice().chunks_mut(dim).enumerate() {
        basis[col] = C64::new(1.0, 0.0);
        p.accumulate_into(&basis, chunk);
        basis[col] = C64::new(0.0, 0.0);
    }
    Ok(DenseOperator { n_qubits: n, matrix: m })
}

/// `exp(−i·angle·H)`: closed form when `H² = I`, eigendecomposition otherwise.
pub fn expm(h: &WeightedPauliSum, angle: f64) -> Result<DenseOperator> {
    if h.square().is_identity() {
        let n = h.n_sites();
        let hm = to_matrix(h)?;
        let (s, c) = angle.sin_cos();
        let mut m = hm.matrix * C64::new(0.0, -s);
        for k in 0..m.nrows() {
            m[(k, k)] += C64::new(c, 0.0);
        }
        Ok(DenseOperator { n_qubits: n, matrix: m })
    } else {
        expm_eigen(h, angle)
    }
}

/// `exp(−i·angle·H)` through the Hermitian eigendecomposition, whatever `H` is.
pub fn expm_eigen(h: &WeightedPauliSum, angle: f64) -> Result<DenseOperator> {
    let hm = to_matrix(h)?;
    let eig = hm.matrix.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -angle * l)));
    Ok(DenseOperator {
        n_qubits: hm.n_qubits,
        matrix: v * phases * v.adjoint(),
    })
}

pub fn program_unitary(prog: &PulseProgram) -> Result<DenseOperator> {
    let n = prog.n_sites;
    check_dense(n)?;
    let mut u = DenseOperator::identity(n)?;
    let dim = 1usize << n;
    let mut scratch = Vec::new();
    for col in u.matrix.as_mut_slice().chunks_mut(dim) {
        for p in &prog.pulses {
            rotate_slice(&p.rotation, col, &mut scratch);
        }
    }
    Ok(u)
}

pub fn schedule_unitary(schedule: &QsaSchedule) -> Result<DenseOperator> {
    check_dense(schedule.n_sites)?;
    program_unitary(&schedule.pulse_program()?)
}

/// Spectral norm of `a − b`.
pub fn distance(a: &DenseOperator, b: &DenseOperator) -> Result<f64> {
    if a.n_qubits != b.n_qubits {
        return Err(QsaError::Dimension(a.n_qubits, b.n_qubits));
    }
    Ok(spectral_norm(&(&a.matrix - &b.matrix)))
}

fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.iter().all(|z| z.norm() == 0.0) {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

impl DenseOperator {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_dense(n_qubits)?;
        let dim = 1usize << n_qubits;
        Ok(DenseOperator {
            n_qubits,
            matrix: DMatrix::identity(dim, dim),
        })
    }

    pub fn from_matrix(n_qubits: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(QsaError::Dimension(matrix.nrows(), dim));
        }
        Ok(DenseOperator { n_qubits, matrix })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<DenseOperator> {
        if self.n_qubits != other.n_qubits {
            return Err(QsaError::Dimension(self.n_qubits, other.n_qubits));
        }
        Ok(DenseOperator {
            n_qubits: self.n_qubits,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator {
            n_qubits: self.n_qubits,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, c: C64) -> DenseOperator {
        DenseOperator {
            n_qubits: self.n_qubits,
            matrix: &self.matrix * c,
        }
    }

    /// `‖U†U − I‖` in spectral norm.
    pub fn unitarity_error(&self) -> f64 {
        let dim = self.dim();
        let g = self.matrix.adjoint() * &self.matrix - DMatrix::<C64>::identity(dim, dim);
        spectral_norm(&g)
    }

    pub fn apply(&self, state: &Statevector) -> Result<Statevector> {
        if state.n_sites() != self.n_qubits {
            return Err(QsaError::Dimension(state.n_sites(), self.n_qubits));
        }
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        let out = &self.matrix * v;
        Statevector::from_amplitudes(self.n_qubits, out.as_slice().to_vec())
    }
}

/// Oracle verdict in the shared report format.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub seed: Option<u64>,
    pub metric: String,
    pub distance: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(metric: &str, distance: f64, tolerance: f64, seed: Option<u64>) -> Self {
        OracleReport {
            seed,
            metric: metric.to_string(),
            distance,
            tolerance,
            pass: distance <= tolerance,
        }
    }
}

/// Worst-case comparison of two state maps over `k` seeded random inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub seed: u64,
    pub states: usize,
    pub max_distance: f64,
    pub max_infidelity: f64,
}

pub fn probe_states<A, B>(n_sites: usize, k: usize, seed: u64, mut a: A, mut b: B) -> Result<ProbeReport>
where
    A: FnMut(&Statevector) -> Result<Statevector>,
    B: FnMut(&Statevector) -> Result<Statevector>,
{
    let mut max_distance: f64 = 0.0;
    let mut max_infidelity: f64 = 0.0;
    for j in 0..k {
        let psi = Statevector::random(n_sites, seed.wrapping_add(j as u64))?;
        let ya = a(&psi)?;
        let yb = b(&psi)?;
        max_distance = max_distance.max(ya.distance(&yb)?);
        max_infidelity = max_infidelity.max(1.0 - ya.inner(&yb)?.norm_sqr());
    }
    Ok(ProbeReport {
        seed,
        states: k,
        max_distance,
        max_infidelity,
    })
}
