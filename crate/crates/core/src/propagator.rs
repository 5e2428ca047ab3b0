//! Attachment and swapper propagators and their exact action on Pauli strings.
//!
//! Every generator here squares to the identity, so
//! `exp(-i·angle·H) = cos(angle)·I − i·sin(angle)·H` and conjugating a Pauli
//! string can be expanded symbolically.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QsaError, Result};
use crate::pauli::{Pauli, PauliOperator, PauliString, WeightedPauliSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

/// Branch integers selecting the rotation angle: forward `3π/2 + 2πm`,
/// inverse `π/2 + 2πm′`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub m: i64,
    pub m_prime: i64,
}

impl Default for Branch {
    fn default() -> Self {
        Branch { m: -1, m_prime: 0 }
    }
}

impl Branch {
    pub fn forward_angle(&self) -> f64 {
        1.5 * PI + 2.0 * PI * self.m as f64
    }

    pub fn inverse_angle(&self) -> f64 {
        0.5 * PI + 2.0 * PI * self.m_prime as f64
    }
}

/// `exp(-i·angle·generator)` with `generator² = I`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvolutionRotation {
    generator: WeightedPauliSum,
    angle: f64,
    direction: Direction,
}

impl InvolutionRotation {
    pub fn new(generator: WeightedPauliSum, angle: f64, direction: Direction) -> Result<Self> {
        let sq = generator.square();
        if !sq.is_identity() {
            return Err(QsaError::NotInvolution(format!("{generator:?}")));
        }
        Ok(InvolutionRotation {
            generator,
            angle,
            direction,
        })
    }

    /// Rotation generated by a single Hermitian string.
    pub fn from_string(p: &PauliString, angle: f64) -> Result<Self> {
        Self::new(WeightedPauliSum::from_string(p)?, angle, Direction::Forward)
    }

    pub fn generator(&self) -> &WeightedPauliSum {
        &self.generator
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn n_sites(&self) -> usize {
        self.generator.n_sites()
    }

    pub fn with_angle(&self, angle: f64) -> Self {
        InvolutionRotation {
            angle,
            ..self.clone()
        }
    }

    /// Closed form `cos·I − i·sin·H` as a symbolic operator.
    pub fn operator(&self) -> PauliOperator {
        let n = self.n_sites();
        let (s, c) = self.angle.sin_cos();
        PauliOperator::identity(n)
            .scale(Complex64::new(c, 0.0))
            .add(&self.generator.to_operator().scale(Complex64::new(0.0, -s)))
            .expect("same size")
    }

    /// `U·q·U†` for an arbitrary symbolic operator.
    pub fn conjugate_operator(&self, q: &PauliOperator) -> Result<PauliOperator> {
        let (s, c) = self.angle.sin_cos();
        let h = self.generator.to_operator();
        let hqh = h.mul(q)?.mul(&h)?;
        let comm = h.commutator(q)?;
        q.scale(Complex64::new(c * c, 0.0))
            .add(&hqh.scale(Complex64::new(s * s, 0.0)))?
            .add(&comm.scale(Complex64::new(0.0, -s * c)))
    }
}

/// The forward and inverse pulses of one attachment or swapper.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorPair {
    pub forward: InvolutionRotation,
    pub inverse: InvolutionRotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAttachment", into = "RawAttachment")]
pub struct AttachmentSpec {
    connector_site: usize,
    alpha: Pauli,
    beta: Pauli,
    attached_site: usize,
    attached_letter: Pauli,
    branch: Branch,
}

#[derive(Serialize, Deserialize)]
struct RawAttachment {
    connector_site: usize,
    alpha: Pauli,
    beta: Pauli,
    attached_site: usize,
    attached_letter: Pauli,
    #[serde(default = "default_m")]
    branch_m: i64,
    #[serde(default)]
    branch_mp: i64,
}

fn default_m() -> i64 {
    -1
}

impl TryFrom<RawAttachment> for AttachmentSpec {
    type Error = QsaError;
    fn try_from(r: RawAttachment) -> Result<Self> {
        AttachmentSpec::with_branch(
            r.connector_site,
            r.alpha,
            r.beta,
            r.attached_site,
            r.attached_letter,
            Branch {
                m: r.branch_m,
                m_prime: r.branch_mp,
            },
        )
    }
}

impl From<AttachmentSpec> for RawAttachment {
    fn from(s: AttachmentSpec) -> Self {
        RawAttachment {
            connector_site: s.connector_site,
            alpha: s.alpha,
            beta: s.beta,
            attached_site: s.attached_site,
            attached_letter: s.attached_letter,
            branch_m: s.branch.m,
            branch_mp: s.branch.m_prime,
        }
    }
}

fn check_connectors(alpha: Pauli, beta: Pauli) -> Result<()> {
    if alpha.is_identity() || beta.is_identity() {
        return Err(QsaError::InvalidSpec("connector letters must be non-identity".into()));
    }
    if alpha == beta {
        return Err(QsaError::InvalidSpec(format!("connector letters coincide ({alpha})")));
    }
    Ok(())
}

fn check_site(site: usize, n_sites: usize) -> Result<()> {
    if site >= n_sites {
        return Err(QsaError::InvalidSpec(format!(
            "site {site} out of range for {n_sites} sites"
        )));
    }
    Ok(())
}

impl AttachmentSpec {
    pub fn new(
        connector_site: usize,
        alpha: Pauli,
        beta: Pauli,
        attached_site: usize,
        attached_letter: Pauli,
    ) -> Result<Self> {
        Self::with_branch(
            connector_site,
            alpha,
            beta,
            attached_site,
            attached_letter,
            Branch::default(),
        )
    }

    pub fn with_branch(
        connector_site: usize,
        alpha: Pauli,
        beta: Pauli,
        attached_site: usize,
        attached_letter: Pauli,
        branch: Branch,
    ) -> Result<Self> {
        check_connectors(alpha, beta)?;
        if attached_letter.is_identity() {
            return Err(QsaError::InvalidSpec("attached letter must be non-identity".into()));
        }
        if attached_site == connector_site {
            return Err(QsaError::InvalidSpec(format!(
                "attached site equals connector site {connector_site}"
            )));
        }
        Ok(AttachmentSpec {
            connector_site,
            alpha,
            beta,
            attached_site,
            attached_letter,
            branch,
        })
    }

    pub fn connector_site(&self) -> usize {
        self.connector_site
    }
    pub fn alpha(&self) -> Pauli {
        self.alpha
    }
    pub fn beta(&self) -> Pauli {
        self.beta
    }
    pub fn attached_site(&self) -> usize {
        self.attached_site
    }
    pub fn attached_letter(&self) -> Pauli {
        self.attached_letter
    }
    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// `(σ_α@c + σ_β@c ⊗ σ_m@a)/√2`.
    pub fn generator(&self, n_sites: usize) -> Result<WeightedPauliSum> {
        check_site(self.connector_site, n_sites)?;
        check_site(self.attached_site, n_sites)?;
        let a = PauliString::single(n_sites, self.connector_site, self.alpha)?;
        let b = PauliString::from_sparse(
            n_sites,
            &[
                (self.connector_site, self.beta),
                (self.attached_site, self.attached_letter),
            ],
        )?;
        WeightedPauliSum::new(n_sites, [(FRAC_1_SQRT_2, a), (FRAC_1_SQRT_2, b)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSwapper", into = "RawSwapper")]
pub struct SwapperSpec {
    site: usize,
    alpha: Pauli,
    beta: Pauli,
    branch: Branch,
}

#[derive(Serialize, Deserialize)]
struct RawSwapper {
    site: usize,
    alpha: Pauli,
    beta: Pauli,
    #[serde(default = "default_m")]
    branch_m: i64,
    #[serde(default)]
    branch_mp: i64,
}

impl TryFrom<RawSwapper> for SwapperSpec {
    type Error = QsaError;
    fn try_from(r: RawSwapper) -> Result<Self> {
        SwapperSpec::with_branch(
            r.site,
            r.alpha,
            r.beta,
            Branch {
                m: r.branch_m,
                m_prime: r.branch_mp,
            },
        )
    }
}

impl From<SwapperSpec> for RawSwapper {
    fn from(s: SwapperSpec) -> Self {
        RawSwapper {
            site: s.site,
            alpha: s.alpha,
            beta: s.beta,
            branch_m: s.branch.m,
            branch_mp: s.branch.m_prime,
        }
    }
}

impl SwapperSpec {
    pub fn new(site: usize, alpha: Pauli, beta: Pauli) -> Result<Self> {
        Self::with_branch(site, alpha, beta, Branch::default())
    }

    pub fn with_branch(site: usize, alpha: Pauli, beta: Pauli, branch: Branch) -> Result<Self> {
        check_connectors(alpha, beta)?;
        Ok(SwapperSpec {
            site,
            alpha,
            beta,
            branch,
        })
    }

    pub fn site(&self) -> usize {
        self.site
    }
    pub fn alpha(&self) -> Pauli {
        self.alpha
    }
    pub fn beta(&self) -> Pauli {
        self.beta
    }
    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// `(σ_α + σ_β)/√2` on one site.
    pub fn generator(&self, n_sites: usize) -> Result<WeightedPauliSum> {
        check_site(self.site, n_sites)?;
        WeightedPauliSum::new(
            n_sites,
            [
                (FRAC_1_SQRT_2, PauliString::single(n_sites, self.site, self.alpha)?),
                (FRAC_1_SQRT_2, PauliString::single(n_sites, self.site, self.beta)?),
            ],
        )
    }
}

fn pair(generator: WeightedPauliSum, branch: Branch) -> Result<PropagatorPair> {
    Ok(PropagatorPair {
        forward: InvolutionRotation::new(generator.clone(), branch.forward_angle(), Direction::Forward)?,
        inverse: InvolutionRotation::new(generator, branch.inverse_angle(), Direction::Inverse)?,
    })
}

pub fn make_attachment(spec: &AttachmentSpec, n_sites: usize) -> Result<PropagatorPair> {
    pair(spec.generator(n_sites)?, spec.branch)
}

pub fn make_swapper(spec: &SwapperSpec, n_sites: usize) -> Result<PropagatorPair> {
    pair(spec.generator(n_sites)?, spec.branch)
}

/// `U·q·U†` for a Hermitian string `q`, as a collected real sum.
pub fn conjugate(q: &PauliString, r: &InvolutionRotation) -> Result<WeightedPauliSum> {
    if !q.is_hermitian() {
        return Err(QsaError::NonHermitian(q.to_string()));
    }
    r.conjugate_operator(&PauliOperator::from_string(q))?
        .to_weighted_sum()
}

/// Like [`conjugate`] but demands collapse to a single string with coefficient +1.
pub fn conjugate_strict(q: &PauliString, r: &InvolutionRotation) -> Result<PauliString> {
    let out = conjugate(q, r)?;
    out.as_single_string().ok_or_else(|| {
        QsaError::InvalidSchedule(format!("conjugation of {q} does not collapse: {out:?}"))
    })
}

/// Exchanges the connector letters at the swapper site, keeping the phase.
pub fn apply_swap(q: &PauliString, s: &SwapperSpec) -> Result<PauliString> {
    if s.site >= q.n_sites() {
        return Err(QsaError::InvalidSpec(format!(
            "swapper site {} out of range for {} sites",
            s.site,
            q.n_sites()
        )));
    }
    let found = q.letter(s.site);
    let replacement = if found == s.alpha {
        s.beta
    } else if found == s.beta {
        s.alpha
    } else {
        return Err(QsaError::ConnectorMismatch {
            site: s.site,
            found: found.to_char(),
            alpha: s.alpha.to_char(),
            beta: s.beta.to_char(),
        });
    };
    let mut out = q.clone();
    out.set_letter(s.site, replacement);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn default_branch_angles() {
        let b = Branch::default();
        assert!((b.forward_angle() + PI / 2.0).abs() < 1e-15);
        assert!((b.inverse_angle() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn attachment_generator_letters() {
        let spec = AttachmentSpec::new(2, Pauli::Z, Pauli::X, 0, Pauli::X).unwrap();
        let g = spec.generator(4).unwrap();
        let strings: Vec<String> = g.terms().iter().map(|(_, p)| p.to_string()).collect();
        assert!(strings.contains(&"IIZI".to_string()));
        assert!(strings.contains(&"XIXI".to_string()));
        assert!(g.square().is_identity());
    }

    #[test]
    fn spec_invariants() {
        assert!(AttachmentSpec::new(1, Pauli::X, Pauli::X, 0, Pauli::X).is_err());
        assert!(AttachmentSpec::new(1, Pauli::X, Pauli::Z, 1, Pauli::X).is_err());
        assert!(AttachmentSpec::new(1, Pauli::X, Pauli::Z, 0, Pauli::I).is_err());
        assert!(SwapperSpec::new(0, Pauli::X, Pauli::X).is_err());
        let spec = AttachmentSpec::new(5, Pauli::X, Pauli::Z, 0, Pauli::X).unwrap();
        assert!(make_attachment(&spec, 4).is_err());
    }

    #[test]
    fn conjugation_collapses_on_plaquette() {
        let first = AttachmentSpec::new(2, Pauli::Z, Pauli::X, 0, Pauli::X).unwrap();
        let second = AttachmentSpec::new(1, Pauli::Z, Pauli::X, 3, Pauli::X).unwrap();
        let f1 = make_attachment(&first, 4).unwrap().forward;
        let f2 = make_attachment(&second, 4).unwrap().forward;
        let step = conjugate_strict(&ps("IXXI"), &f1).unwrap();
        assert_eq!(step, ps("XXZI"));
        assert_eq!(conjugate_strict(&step, &f2).unwrap(), ps("XZZX"));
    }

    #[test]
    fn disjoint_string_is_untouched() {
        let spec = AttachmentSpec::new(1, Pauli::Z, Pauli::X, 2, Pauli::X).unwrap();
        let f = make_attachment(&spec, 3).unwrap().forward;
        assert_eq!(conjugate_strict(&ps("XII"), &f).unwrap(), ps("XII"));
    }

    #[test]
    fn swap_examples() {
        let s = SwapperSpec::new(1, Pauli::Z, Pauli::Y).unwrap();
        assert_eq!(apply_swap(&ps("XZX"), &s).unwrap(), ps("XYX"));
        let bad = SwapperSpec::new(1, Pauli::X, Pauli::Y).unwrap();
        assert!(matches!(
            apply_swap(&ps("XZ"), &bad),
            Err(QsaError::ConnectorMismatch { .. })
        ));
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = AttachmentSpec::new(2, Pauli::Z, Pauli::X, 0, Pauli::X).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"branch_m\":-1"));
        let back: AttachmentSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let bad = r#"{"connector_site":0,"alpha":"X","beta":"X","attached_site":1,"attached_letter":"X"}"#;
        assert!(serde_json::from_str::<AttachmentSpec>(bad).is_err());
    }
}
