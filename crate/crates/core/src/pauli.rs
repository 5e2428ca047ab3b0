//! Symbolic Pauli-string algebra.
//!
//! A [`PauliString`] is a tensor product of single-site letters with a phase
//! `i^k`. Products track the phase exactly. [`WeightedPauliSum`] holds real
//! combinations of phase-free strings, and [`PauliOperator`] is the complex
//! version used for intermediate expansions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QsaError, Result};

/// Absolute tolerance used when collecting coefficients.
pub const COEFF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn is_identity(self) -> bool {
        self == Pauli::I
    }

    /// Single-site product `a·b = i^k c`, returned as `(k, c)`.
    pub fn product(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
        }
    }

    /// True when the two single-site letters anticommute.
    pub fn anticommutes(self, other: Pauli) -> bool {
        !self.is_identity() && !other.is_identity() && self != other
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// Tensor product of Pauli letters with phase `i^phase`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliString {
    letters: Vec<Pauli>,
    phase: u8,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, phase: u8) -> Result<Self> {
        if letters.is_empty() {
            return Err(QsaError::InvalidSpec("a Pauli string needs at least one site".into()));
        }
        Ok(PauliString {
            letters,
            phase: phase % 4,
        })
    }

    pub fn identity(n_sites: usize) -> Self {
        PauliString {
            letters: vec![Pauli::I; n_sites.max(1)],
            phase: 0,
        }
    }

    /// Builds a phase +1 string from `(site, letter)` pairs; unlisted sites are `I`.
    pub fn from_sparse(n_sites: usize, entries: &[(usize, Pauli)]) -> Result<Self> {
        let mut letters = vec![Pauli::I; n_sites];
        for &(site, p) in entries {
            if site >= n_sites {
                return Err(QsaError::InvalidSpec(format!(
                    "site {site} out of range for {n_sites} sites"
                )));
            }
            letters[site] = p;
        }
        PauliString::new(letters, 0)
    }

    pub fn single(n_sites: usize, site: usize, letter: Pauli) -> Result<Self> {
        Self::from_sparse(n_sites, &[(site, letter)])
    }

    pub fn n_sites(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, site: usize) -> Pauli {
        self.letters[site]
    }

    /// Phase exponent `k` of `i^k`, always in `0..4`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn phase_value(&self) -> Complex64 {
        i_pow(self.phase)
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|p| p.is_identity())
    }

    /// Sites carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_identity())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|p| !p.is_identity()).count()
    }

    pub fn set_letter(&mut self, site: usize, letter: Pauli) {
        self.letters[site] = letter;
    }

    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        check_sizes(self.n_sites(), other.n_sites())?;
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (k, c) = a.product(b);
                phase += k;
                c
            })
            .collect();
        Ok(PauliString {
            letters,
            phase: phase % 4,
        })
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        check_sizes(self.n_sites(), other.n_sites())?;
        Ok(self.anticommuting_sites(other) % 2 == 0)
    }

    fn anticommuting_sites(&self, other: &PauliString) -> usize {
        self.letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| a.anticommutes(**b))
            .count()
    }

    /// Adjoint: the letters are Hermitian, so only the phase conjugates.
    pub fn adjoint(&self) -> PauliString {
        PauliString {
            letters: self.letters.clone(),
            phase: (4 - self.phase) % 4,
        }
    }

    /// Bit masks for the action on computational basis states: bit `n-1-k`
    /// belongs to site `k`, so site 0 is the most significant qubit.
    /// Returns `(x_mask, z_mask, y_count)`.
    pub fn masks(&self) -> (u64, u64, u32) {
        let n = self.n_sites();
        let mut x = 0u64;
        let mut z = 0u64;
        let mut y = 0u32;
        for (k, p) in self.letters.iter().enumerate() {
            let bit = 1u64 << (n - 1 - k);
            match p {
                Pauli::I => {}
                Pauli::X => x |= bit,
                Pauli::Z => z |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit;
                    y += 1;
                }
            }
        }
        (x, z, y)
    }
}

pub fn multiply(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    a.multiply(b)
}

pub fn commutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    a.commutes(b)
}

pub fn sum_commutes(a: &WeightedPauliSum, b: &WeightedPauliSum) -> Result<bool> {
    a.commutes_with(b)
}

pub fn square(h: &WeightedPauliSum) -> WeightedPauliSum {
    h.square()
}

pub(crate) fn i_pow(k: u8) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn check_sizes(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(QsaError::Dimension(a, b))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for p in &self.letters {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = QsaError;

    fn from_str(s: &str) -> Result<Self> {
        let fail = |reason: &str| QsaError::Parse {
            literal: s.to_string(),
            reason: reason.to_string(),
        };
        let mut rest = s;
        let mut phase = 0u8;
        if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        } else if let Some(r) = rest.strip_prefix('-') {
            rest = r;
            phase = 2;
        }
        if let Some(r) = rest.strip_prefix('i') {
            rest = r;
            phase += 1;
        }
        if rest.is_empty() {
            return Err(fail("no letters"));
        }
        let letters = rest
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| fail(&format!("unexpected character {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(letters, phase)
    }
}

impl TryFrom<String> for PauliString {
    type Error = QsaError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PauliString> for String {
    fn from(p: PauliString) -> String {
        p.to_string()
    }
}

/// Complex linear combination of Pauli strings, keyed by letter sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliOperator {
    n_sites: usize,
    terms: BTreeMap<Vec<Pauli>, Complex64>,
}

impl PauliOperator {
    pub fn zero(n_sites: usize) -> Self {
        PauliOperator {
            n_sites,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_sites: usize) -> Self {
        let mut op = Self::zero(n_sites);
        op.add_term(Complex64::new(1.0, 0.0), &PauliString::identity(n_sites));
        op
    }

    pub fn from_string(p: &PauliString) -> Self {
        let mut op = Self::zero(p.n_sites());
        op.add_term(Complex64::new(1.0, 0.0), p);
        op
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Adds `c·p`, folding the string's phase into the coefficient.
    pub fn add_term(&mut self, c: Complex64, p: &PauliString) {
        let c = c * p.phase_value();
        let entry = self
            .terms
            .entry(p.letters().to_vec())
            .or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if entry.norm() <= COEFF_TOL {
            self.terms.remove(p.letters());
        }
    }

    /// Iterates `(coefficient, phase-free string)` pairs in letter order.
    pub fn terms(&self) -> impl Iterator<Item = (Complex64, PauliString)> + '_ {
        self.terms.iter().map(|(l, c)| {
            (
                *c,
                PauliString {
                    letters: l.clone(),
                    phase: 0,
                },
            )
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.norm() <= COEFF_TOL)
    }

    pub fn scale(&self, s: Complex64) -> PauliOperator {
        let mut out = Self::zero(self.n_sites);
        for (c, p) in self.terms() {
            out.add_term(c * s, &p);
        }
        out
    }

    pub fn add(&self, other: &PauliOperator) -> Result<PauliOperator> {
        check_sizes(self.n_sites, other.n_sites)?;
        let mut out = self.clone();
        for (c, p) in other.terms() {
            out.add_term(c, &p);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PauliOperator) -> Result<PauliOperator> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &PauliOperator) -> Result<PauliOperator> {
        check_sizes(self.n_sites, other.n_sites)?;
        let mut out = Self::zero(self.n_sites);
        for (ca, a) in self.terms() {
            for (cb, b) in other.terms() {
                let ab = a.multiply(&b)?;
                out.add_term(ca * cb, &ab);
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &PauliOperator) -> Result<PauliOperator> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Converts to a real weighted sum; fails if any coefficient has an
    /// imaginary part above tolerance.
    pub fn to_weighted_sum(&self) -> Result<WeightedPauliSum> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (c, p) in self.terms() {
            if c.im.abs() > COEFF_TOL {
                return Err(QsaError::NonHermitian(format!("coefficient {c} on {p}")));
            }
            terms.push((c.re, p));
        }
        WeightedPauliSum::new(self.n_sites, terms)
    }
}

/// Real linear combination of phase-free Pauli strings in collected form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPauliSum {
    n_sites: usize,
    terms: Vec<(f64, PauliString)>,
}

impl WeightedPauliSum {
    /// Collects the given terms. Strings with phase −1 fold the sign into the
    /// coefficient; strings with phase ±i are rejected.
    pub fn new(n_sites: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        let mut acc: BTreeMap<Vec<Pauli>, f64> = BTreeMap::new();
        for (c, p) in terms {
            check_sizes(n_sites, p.n_sites())?;
            if !p.is_hermitian() {
                return Err(QsaError::NonHermitian(p.to_string()));
            }
            let sign = if p.phase() == 2 { -1.0 } else { 1.0 };
            *acc.entry(p.letters().to_vec()).or_insert(0.0) += sign * c;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| c.abs() > COEFF_TOL)
            .map(|(letters, c)| (c, PauliString { letters, phase: 0 }))
            .collect();
        Ok(WeightedPauliSum { n_sites, terms })
    }

    pub fn from_string(p: &PauliString) -> Result<Self> {
        Self::new(p.n_sites(), [(1.0, p.clone())])
    }

    pub fn identity(n_sites: usize) -> Self {
        WeightedPauliSum {
            n_sites,
            terms: vec![(1.0, PauliString::identity(n_sites))],
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn to_operator(&self) -> PauliOperator {
        let mut op = PauliOperator::zero(self.n_sites);
        for (c, p) in &self.terms {
            op.add_term(Complex64::new(*c, 0.0), p);
        }
        op
    }

    pub fn square(&self) -> WeightedPauliSum {
        let op = self.to_operator();
        op.mul(&op)
            .and_then(|sq| sq.to_weighted_sum())
            .expect("square of a Hermitian sum is Hermitian")
    }

    pub fn is_identity(&self) -> bool {
        self.terms.len() == 1
            && self.terms[0].1.is_identity()
            && (self.terms[0].0 - 1.0).abs() <= COEFF_TOL
    }

    pub fn commutes_with(&self, other: &WeightedPauliSum) -> Result<bool> {
        check_sizes(self.n_sites, other.n_sites)?;
        Ok(self.to_operator().commutator(&other.to_operator())?.is_zero())
    }

    /// The single string this sum collapses to, if it is exactly one term with
    /// coefficient +1.
    pub fn as_single_string(&self) -> Option<PauliString> {
        match self.terms.as_slice() {
            [(c, p)] if (c - 1.0).abs() <= COEFF_TOL => Some(p.clone()),
            _ => None,
        }
    }

    /// Union of the supports of all terms.
    pub fn support(&self) -> Vec<usize> {
        let mut sites: Vec<usize> = self.terms.iter().flat_map(|(_, p)| p.support()).collect();
        sites.sort_unstable();
        sites.dedup();
        sites
    }

    /// Sum of absolute coefficients, an upper bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }
}
