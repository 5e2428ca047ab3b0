//! Toric-code lattices.
//!
//! The Wen plaquette model puts one spin on every vertex of a `rows × cols`
//! grid, site index `i·cols + j`, with
//! `P_{i,j} = X_{i,j} Z_{i,j+1} Z_{i+1,j} X_{i+1,j+1}`. Row `i` grows upward,
//! so `(0,0)` is the bottom-left spin.
//!
//! The hole model puts spins on the edges of the grid, drives `ZZZZ` on faces
//! and `XXXX` on vertices, and leaves the terms inside holes undriven.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::dense::{check_state, Statevector};
use crate::error::{QsaError, Result};
use crate::pauli::{Pauli, PauliString, WeightedPauliSum};
use crate::propagator::{AttachmentSpec, SwapperSpec};
use crate::schedule::{compile, ConnectivityGraph, PulseProgram, QsaSchedule, Seed, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Wen,
    KitaevHoles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HoleKind {
    Smooth,
    Rough,
}

/// Undriven region. Smooth holes list face cells, rough holes list vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hole {
    pub plaquettes: Vec<[usize; 2]>,
    pub kind: HoleKind,
}

/// A twist sits on the face strip between rows `row` and `row + 1`, starting
/// at column `col`. The strip is sheared for `length` faces and closed by a
/// second twist; without a length the shear runs to the right boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Twist {
    pub row: usize,
    pub col: usize,
    #[serde(default)]
    pub length: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
    pub boundary: Boundary,
    pub model: Model,
    #[serde(rename = "J", default = "unit")]
    pub coupling: f64,
    #[serde(default)]
    pub holes: Vec<Hole>,
    #[serde(default)]
    pub twists: Vec<Twist>,
}

fn unit() -> f64 {
    1.0
}

impl LatticeSpec {
    pub fn wen(rows: usize, cols: usize, boundary: Boundary) -> Self {
        LatticeSpec {
            rows,
            cols,
            boundary,
            model: Model::Wen,
            coupling: 1.0,
            holes: Vec::new(),
            twists: Vec::new(),
        }
    }

    pub fn kitaev(rows: usize, cols: usize, holes: Vec<Hole>) -> Self {
        LatticeSpec {
            rows,
            cols,
            boundary: Boundary::Open,
            model: Model::KitaevHoles,
            coupling: 1.0,
            holes,
            twists: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(QsaError::InvalidSpec(m));
        if self.rows < 2 || self.cols < 2 {
            return bad(format!("lattice {}x{} is smaller than 2x2", self.rows, self.cols));
        }
        match self.model {
            Model::Wen => {
                if !self.holes.is_empty() {
                    return bad("holes need the kitaev_holes model".into());
                }
                if self.boundary == Boundary::Periodic && (self.rows % 2 == 1 || self.cols % 2 == 1) {
                    return bad("periodic lattices need even dimensions".into());
                }
                if !self.twists.is_empty() && self.boundary != Boundary::Open {
                    return bad("twists need an open lattice".into());
                }
                let mut rows_used: Vec<usize> = Vec::new();
                for t in &self.twists {
                    self.twist_extent(t)?;
                    if rows_used.iter().any(|&r| r.abs_diff(t.row) < 2) {
                        return bad(format!("twist strips closer than two rows at row {}", t.row));
                    }
                    rows_used.push(t.row);
                }
            }
            Model::KitaevHoles => {
                if !self.twists.is_empty() {
                    return bad("twists need the wen model".into());
                }
                if self.boundary != Boundary::Open {
                    return bad("the hole model uses open boundaries".into());
                }
                let mut seen = BTreeSet::new();
                for h in &self.holes {
                    if h.plaquettes.is_empty() {
                        return bad("empty hole".into());
                    }
                    for &[i, j] in &h.plaquettes {
                        let inside = match h.kind {
                            HoleKind::Smooth => i + 1 < self.rows && j + 1 < self.cols,
                            HoleKind::Rough => i < self.rows && j < self.cols,
                        };
                        if !inside {
                            return bad(format!("hole cell ({i},{j}) out of bounds"));
                        }
                        if !seen.insert((h.kind, i, j)) {
                            return bad(format!("holes overlap at ({i},{j})"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `(a, b, closed)`: left pentagon over columns `a−1..=a+1`, sheared faces
    /// `a..b`, and a closing pentagon over `b..=b+2` when `closed`.
    fn twist_extent(&self, t: &Twist) -> Result<(usize, usize, bool)> {
        let a = t.col + 1;
        if t.row + 1 >= self.rows {
            return Err(QsaError::InvalidSpec(format!("twist row {} out of bounds", t.row)));
        }
        match t.length {
            Some(len) => {
                let b = a + len;
                if b + 2 > self.cols - 1 {
                    return Err(QsaError::InvalidSpec(format!(
                        "twist at column {} with length {len} does not fit",
                        t.col
                    )));
                }
                Ok((a, b, true))
            }
            None => {
                if self.cols < 2 || a > self.cols - 2 {
                    return Err(QsaError::InvalidSpec(format!(
                        "twist at column {} does not fit",
                        t.col
                    )));
                }
                Ok((a, self.cols - 2, false))
            }
        }
    }

    pub fn n_sites(&self) -> usize {
        match self.model {
            Model::Wen => self.rows * self.cols,
            Model::KitaevHoles => KitaevGeometry::new(self.rows, self.cols).n_qubits(),
        }
    }

    /// Row-major index of spin `(i, j)`, wrapping on periodic lattices.
    pub fn site(&self, i: usize, j: usize) -> usize {
        match self.boundary {
            Boundary::Open => i * self.cols + j,
            Boundary::Periodic => (i % self.rows) * self.cols + (j % self.cols),
        }
    }

    /// Wen plaquette cells in row-major order.
    pub fn plaquette_cells(&self) -> Vec<(usize, usize)> {
        let (r, c) = match self.boundary {
            Boundary::Open => (self.rows - 1, self.cols - 1),
            Boundary::Periodic => (self.rows, self.cols),
        };
        (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).collect()
    }

    pub fn wen_plaquette(&self, i: usize, j: usize) -> Result<PauliString> {
        if !self.plaquette_cells().contains(&(i, j)) {
            return Err(QsaError::InvalidSpec(format!("no plaquette at ({i},{j})")));
        }
        PauliString::from_sparse(
            self.n_sites(),
            &[
                (self.site(i, j), Pauli::X),
                (self.site(i, j + 1), Pauli::Z),
                (self.site(i + 1, j), Pauli::Z),
                (self.site(i + 1, j + 1), Pauli::X),
            ],
        )
    }

    fn hole_cells(&self, kind: HoleKind) -> BTreeSet<(usize, usize)> {
        self.holes
            .iter()
            .filter(|h| h.kind == kind)
            .flat_map(|h| h.plaquettes.iter().map(|&[i, j]| (i, j)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Plaquette,
    DeformedPlaquette,
    Twist,
    Vertex,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub index: (usize, usize),
    pub kind: TermKind,
    pub operator: PauliString,
    pub group: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaquetteSet {
    pub n_sites: usize,
    pub terms: Vec<Term>,
}

impl PlaquetteSet {
    /// `Σ_k P_k` with unit coefficients.
    pub fn sum(&self) -> Result<WeightedPauliSum> {
        WeightedPauliSum::new(self.n_sites, self.terms.iter().map(|t| (1.0, t.operator.clone())))
    }

    pub fn groups(&self) -> BTreeMap<usize, Vec<&Term>> {
        let mut out: BTreeMap<usize, Vec<&Term>> = BTreeMap::new();
        for t in &self.terms {
            out.entry(t.group).or_default().push(t);
        }
        out
    }

    pub fn find(&self, index: (usize, usize), kind: TermKind) -> Option<&Term> {
        self.terms.iter().find(|t| t.index == index && t.kind == kind)
    }
}

/// Wen plaquettes of an untwisted lattice, grouped by `(i mod 2, j mod 2)`.
pub fn build_wen(spec: &LatticeSpec) -> Result<PlaquetteSet> {
    spec.validate()?;
    if spec.model != Model::Wen {
        return Err(QsaError::InvalidSpec("build_wen needs the wen model".into()));
    }
    let terms = spec
        .plaquette_cells()
        .into_iter()
        .map(|(i, j)| {
            Ok(Term {
                index: (i, j),
                kind: TermKind::Plaquette,
                operator: spec.wen_plaquette(i, j)?,
                group: 2 * (i % 2) + (j % 2) + 1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PlaquetteSet {
        n_sites: spec.n_sites(),
        terms,
    })
}

/// Terms of a lattice with twists or holes.
pub fn build_variant(spec: &LatticeSpec) -> Result<PlaquetteSet> {
    spec.validate()?;
    let mut terms = match spec.model {
        Model::Wen => twisted_terms(spec)?,
        Model::KitaevHoles => kitaev_terms(spec)?,
    };
    color_greedy(&mut terms);
    Ok(PlaquetteSet {
        n_sites: spec.n_sites(),
        terms,
    })
}

/// The term list a spec describes, whichever model it uses.
pub fn build_terms(spec: &LatticeSpec) -> Result<PlaquetteSet> {
    if spec.model == Model::Wen && spec.twists.is_empty() {
        build_wen(spec)
    } else {
        build_variant(spec)
    }
}

/// First-fit assignment of groups with pairwise disjoint supports.
fn color_greedy(terms: &mut [Term]) {
    let mut used: Vec<BTreeSet<usize>> = Vec::new();
    for t in terms.iter_mut() {
        let support: BTreeSet<usize> = t.operator.support().into_iter().collect();
        let g = match used.iter().position(|u| u.is_disjoint(&support)) {
            Some(g) => g,
            None => {
                used.push(BTreeSet::new());
                used.len() - 1
            }
        };
        used[g].extend(support);
        t.group = g + 1;
    }
}

fn twisted_terms(spec: &LatticeSpec) -> Result<Vec<Term>> {
    let n = spec.n_sites();
    let strips: BTreeMap<usize, &Twist> = spec.twists.iter().map(|t| (t.row, t)).collect();
    let mut terms = Vec::new();
    let string = |letters: &[((usize, usize), Pauli)]| {
        let entries: Vec<(usize, Pauli)> = letters.iter().map(|&((i, j), p)| (spec.site(i, j), p)).collect();
        PauliString::from_sparse(n, &entries)
    };
    let plain = |i: usize, j: usize| -> Result<Term> {
        Ok(Term {
            index: (i, j),
            kind: TermKind::Plaquette,
            operator: spec.wen_plaquette(i, j)?,
            group: 0,
        })
    };
    for r in 0..spec.rows - 1 {
        let Some(tw) = strips.get(&r) else {
            for j in 0..spec.cols - 1 {
                terms.push(plain(r, j)?);
            }
            continue;
        };
        let (a, b, closed) = spec.twist_extent(tw)?;
        for j in 0..a - 1 {
            terms.push(plain(r, j)?);
        }
        terms.push(Term {
            index: (r, a - 1),
            kind: TermKind::Twist,
            operator: string(&[
                ((r, a - 1), Pauli::X),
                ((r, a), Pauli::Y),
                ((r, a + 1), Pauli::Z),
                ((r + 1, a - 1), Pauli::Z),
                ((r + 1, a), Pauli::X),
            ])?,
            group: 0,
        });
        for j in a..b {
            terms.push(Term {
                index: (r, j),
                kind: TermKind::DeformedPlaquette,
                operator: string(&[
                    ((r, j + 1), Pauli::X),
                    ((r, j + 2), Pauli::Z),
                    ((r + 1, j), Pauli::Z),
                    ((r + 1, j + 1), Pauli::X),
                ])?,
                group: 0,
            });
        }
        if closed {
            terms.push(Term {
                index: (r, b),
                kind: TermKind::Twist,
                operator: string(&[
                    ((r, b + 1), Pauli::X),
                    ((r, b + 2), Pauli::Z),
                    ((r + 1, b), Pauli::Z),
                    ((r + 1, b + 1), Pauli::Y),
                    ((r + 1, b + 2), Pauli::X),
                ])?,
                group: 0,
            });
            for j in b + 2..spec.cols - 1 {
                terms.push(plain(r, j)?);
            }
        }
    }
    Ok(terms)
}

/// Edge-qubit layout of the hole model. Horizontal edges come first, then
/// vertical ones; the vertical edges of the top row dangle off a rough
/// boundary, the other three sides are smooth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KitaevGeometry {
    pub rows: usize,
    pub cols: usize,
}

impl KitaevGeometry {
    pub fn new(rows: usize, cols: usize) -> Self {
        KitaevGeometry { rows, cols }
    }

    pub fn n_qubits(&self) -> usize {
        self.rows * (self.cols - 1) + self.rows * self.cols
    }

    /// Edge from vertex `(i, j)` to `(i, j+1)`.
    pub fn h(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.rows && j + 1 < self.cols);
        i * (self.cols - 1) + j
    }

    /// Edge from vertex `(i, j)` upward.
    pub fn v(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.rows && j < self.cols);
        self.rows * (self.cols - 1) + i * self.cols + j
    }

    /// Faces `(i, j)` with `i < rows`; the top row is truncated to three edges.
    pub fn plaquette_edges(&self, i: usize, j: usize) -> Vec<usize> {
        let mut e = vec![self.h(i, j), self.v(i, j), self.v(i, j + 1)];
        if i + 1 < self.rows {
            e.push(self.h(i + 1, j));
        }
        e.sort_unstable();
        e
    }

    pub fn vertex_edges(&self, i: usize, j: usize) -> Vec<usize> {
        let mut e = vec![self.v(i, j)];
        if j > 0 {
            e.push(self.h(i, j - 1));
        }
        if j + 1 < self.cols {
            e.push(self.h(i, j));
        }
        if i > 0 {
            e.push(self.v(i - 1, j));
        }
        e.sort_unstable();
        e
    }

    pub fn plaquettes(&self) -> Vec<(usize, usize)> {
        (0..self.rows).flat_map(|i| (0..self.cols - 1).map(move |j| (i, j))).collect()
    }

    pub fn vertices(&self) -> Vec<(usize, usize)> {
        (0..self.rows).flat_map(|i| (0..self.cols).map(move |j| (i, j))).collect()
    }

    pub fn uniform(&self, edges: &[usize], letter: Pauli) -> Result<PauliString> {
        let entries: Vec<(usize, Pauli)> = edges.iter().map(|&e| (e, letter)).collect();
        PauliString::from_sparse(self.n_qubits(), &entries)
    }
}

fn kitaev_terms(spec: &LatticeSpec) -> Result<Vec<Term>> {
    let geo = KitaevGeometry::new(spec.rows, spec.cols);
    let smooth = spec.hole_cells(HoleKind::Smooth);
    let rough = spec.hole_cells(HoleKind::Rough);
    let mut terms = Vec::new();
    for (i, j) in geo.plaquettes() {
        if smooth.contains(&(i, j)) {
            continue;
        }
        terms.push(Term {
            index: (i, j),
            kind: TermKind::Plaquette,
            operator: geo.uniform(&geo.plaquette_edges(i, j), Pauli::Z)?,
            group: 0,
        });
    }
    for (i, j) in geo.vertices() {
        if rough.contains(&(i, j)) {
            continue;
        }
        terms.push(Term {
            index: (i, j),
            kind: TermKind::Vertex,
            operator: geo.uniform(&geo.vertex_edges(i, j), Pauli::X)?,
            group: 0,
        });
    }
    Ok(terms)
}

/// Two-body couplings available on the lattice: nearest and diagonal
/// neighbours for spins on vertices, and edges sharing a vertex or a face for
/// the hole model.
pub fn lattice_graph(spec: &LatticeSpec) -> Result<ConnectivityGraph> {
    spec.validate()?;
    let mut edges = BTreeSet::new();
    match spec.model {
        Model::Wen => {
            let periodic = spec.boundary == Boundary::Periodic;
            for i in 0..spec.rows {
                for j in 0..spec.cols {
                    for (di, dj) in [(0i64, 1i64), (1, 0), (1, 1), (1, -1)] {
                        let (ni, nj) = (i as i64 + di, j as i64 + dj);
                        let inside = ni >= 0 && nj >= 0 && (ni as usize) < spec.rows && (nj as usize) < spec.cols;
                        if !inside && !periodic {
                            continue;
                        }
                        let ni = ni.rem_euclid(spec.rows as i64) as usize;
                        let nj = nj.rem_euclid(spec.cols as i64) as usize;
                        let (a, b) = (spec.site(i, j), spec.site(ni, nj));
                        if a != b {
                            edges.insert((a.min(b), a.max(b)));
                        }
                    }
                }
            }
        }
        Model::KitaevHoles => {
            let geo = KitaevGeometry::new(spec.rows, spec.cols);
            let groups = geo
                .plaquettes()
                .into_iter()
                .map(|(i, j)| geo.plaquette_edges(i, j))
                .chain(geo.vertices().into_iter().map(|(i, j)| geo.vertex_edges(i, j)));
            for g in groups {
                for (k, &a) in g.iter().enumerate() {
                    for &b in &g[k + 1..] {
                        edges.insert((a, b));
                    }
                }
            }
        }
    }
    ConnectivityGraph::new(spec.n_sites(), edges)
}

/// Four-body schedule for a Wen plaquette: seed `X X` on the two `Z` corners,
/// then one layer attaching the two `X` corners through `(Z + X X)/√2`.
pub fn wen_plaquette_schedule(spec: &LatticeSpec, i: usize, j: usize, tg: f64) -> Result<QsaSchedule> {
    let target = spec.wen_plaquette(i, j)?;
    let n = spec.n_sites();
    let (s1, s2, s3, s4) = (
        spec.site(i, j),
        spec.site(i, j + 1),
        spec.site(i + 1, j),
        spec.site(i + 1, j + 1),
    );
    Ok(QsaSchedule {
        n_sites: n,
        seed: Seed {
            string: PauliString::from_sparse(n, &[(s2, Pauli::X), (s3, Pauli::X)])?,
            tg,
        },
        layers: vec![vec![
            AttachmentSpec::new(s3, Pauli::Z, Pauli::X, s1, Pauli::X)?,
            AttachmentSpec::new(s2, Pauli::Z, Pauli::X, s4, Pauli::X)?,
        ]],
        final_swappers: Vec::new(),
        target,
    })
}

/// Schedule realizing `exp(−i·tg·term)`.
pub fn term_schedule(spec: &LatticeSpec, term: &Term, tg: f64) -> Result<QsaSchedule> {
    if spec.model == Model::Wen && term.kind == TermKind::Plaquette {
        return wen_plaquette_schedule(spec, term.index.0, term.index.1, tg);
    }
    Ok(compile(&term.operator, &lattice_graph(spec)?, Strategy::Auto)?.with_tg(tg))
}

/// Schedule for the face term at `(i, j)`, or `None` when a hole leaves it undriven.
pub fn plaquette_schedule(spec: &LatticeSpec, i: usize, j: usize, tg: f64) -> Result<Option<QsaSchedule>> {
    spec.validate()?;
    if spec.model == Model::KitaevHoles && spec.hole_cells(HoleKind::Smooth).contains(&(i, j)) {
        return Ok(None);
    }
    let set = build_terms(spec)?;
    let term = set
        .find((i, j), TermKind::Plaquette)
        .ok_or_else(|| QsaError::InvalidSpec(format!("no plaquette at ({i},{j})")))?;
    term_schedule(spec, term, tg).map(Some)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub group: usize,
    pub terms: Vec<((usize, usize), TermKind)>,
    pub schedules: Vec<QsaSchedule>,
}

/// Stages run one after another; schedules inside a stage act on disjoint
/// sites and run simultaneously.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DigitalSequence {
    pub n_sites: usize,
    pub j_tau: f64,
    pub stages: Vec<Stage>,
}

impl DigitalSequence {
    pub fn program(&self) -> Result<PulseProgram> {
        let mut prog = PulseProgram::empty(self.n_sites);
        for stage in &self.stages {
            for s in &stage.schedules {
                prog.extend(s.pulse_program()?)?;
            }
        }
        Ok(prog)
    }
}

/// Pulse program for `exp(+i·Jτ·Σ_k P_k)`: every term's seed runs with
/// `tg = −Jτ`, one stage per group.
pub fn digital_sequence(spec: &LatticeSpec, j_tau: f64) -> Result<DigitalSequence> {
    let set = build_terms(spec)?;
    let mut stages = Vec::new();
    for (group, terms) in set.groups() {
        let schedules = terms
            .iter()
            .map(|t| term_schedule(spec, t, -j_tau))
            .collect::<Result<Vec<_>>>()?;
        stages.push(Stage {
            group,
            terms: terms.iter().map(|t| (t.index, t.kind)).collect(),
            schedules,
        });
    }
    Ok(DigitalSequence {
        n_sites: set.n_sites,
        j_tau,
        stages,
    })
}

fn require_plain_wen(spec: &LatticeSpec) -> Result<()> {
    spec.validate()?;
    if spec.model != Model::Wen || !spec.twists.is_empty() {
        return Err(QsaError::InvalidSpec("needs an untwisted wen lattice".into()));
    }
    Ok(())
}

/// `(X+Z)/√2` on every spin with odd `i + j`, applied to `|0…0⟩`.
pub fn build_psi0(spec: &LatticeSpec) -> Result<Statevector> {
    require_plain_wen(spec)?;
    let n = spec.n_sites();
    check_state(n)?;
    let mut psi = Statevector::zero(n)?;
    for i in 0..spec.rows {
        for j in 0..spec.cols {
            if (i + j) % 2 == 1 {
                let s = spec.site(i, j);
                let h = WeightedPauliSum::new(
                    n,
                    [
                        (FRAC_1_SQRT_2, PauliString::single(n, s, Pauli::X)?),
                        (FRAC_1_SQRT_2, PauliString::single(n, s, Pauli::Z)?),
                    ],
                )?;
                psi = psi.apply_sum(&h)?;
            }
        }
    }
    Ok(psi)
}

/// `∏_{even (i,j)} (1 + P_{i,j}) |ψ₀⟩`, normalized.
pub fn ground_state_projector(spec: &LatticeSpec) -> Result<Statevector> {
    let mut psi = build_psi0(spec)?;
    for t in build_wen(spec)?.terms {
        if (t.index.0 + t.index.1) % 2 == 0 {
            psi.project_plus(&t.operator)?;
        }
    }
    if psi.norm() < 1e-12 {
        return Err(QsaError::Domain("projected state vanished".into()));
    }
    psi.normalize();
    Ok(psi)
}

/// Which rotation prepared a plaquette during the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepGate {
    /// `exp(−iπ XZZY/4)`, equal to `(1 + P)/√2` while the top-right spin is `|0⟩`.
    A,
    /// `exp(−iπ YZZX/4)`, equal to `(1 + P)/√2` while the bottom-left spin is `|0⟩`.
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepStep {
    pub stage: usize,
    pub plaquette: (usize, usize),
    pub gate: SweepGate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub state: Statevector,
    pub stages: usize,
    pub steps: Vec<SweepStep>,
}

/// Sweep order for the even plaquettes of an open lattice. Each diagonal
/// `i − j = d` is handled by one gate type: `A` upward for `d ≥ 0`, `B`
/// downward for `d < 0`. Stage `s` applies the `s`-th plaquette of every
/// diagonal.
pub fn sweep_plan(spec: &LatticeSpec) -> Result<Vec<SweepStep>> {
    require_plain_wen(spec)?;
    if spec.boundary != Boundary::Open {
        return Err(QsaError::Unsupported("the sweep needs an open lattice".into()));
    }
    let mut diagonals: BTreeMap<i64, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, j) in spec.plaquette_cells() {
        if (i + j) % 2 == 0 {
            diagonals.entry(i as i64 - j as i64).or_default().push((i, j));
        }
    }
    let mut steps = Vec::new();
    for (d, mut cells) in diagonals {
        cells.sort_unstable();
        let gate = if d >= 0 { SweepGate::A } else { SweepGate::B };
        if gate == SweepGate::B {
            cells.reverse();
        }
        for (stage, p) in cells.into_iter().enumerate() {
            steps.push(SweepStep {
                stage,
                plaquette: p,
                gate,
            });
        }
    }
    steps.sort_by_key(|s| (s.stage, s.plaquette));
    Ok(steps)
}

/// Schedule for the sweep rotation on one plaquette: the plaquette schedule
/// followed by a swapper turning one `X` corner into `Y`.
pub fn sweep_schedule(spec: &LatticeSpec, i: usize, j: usize, gate: SweepGate) -> Result<QsaSchedule> {
    let mut s = wen_plaquette_schedule(spec, i, j, FRAC_PI_4)?;
    let site = match gate {
        SweepGate::A => spec.site(i + 1, j + 1),
        SweepGate::B => spec.site(i, j),
    };
    s.final_swappers.push(SwapperSpec::new(site, Pauli::X, Pauli::Y)?);
    s.target.set_letter(site, Pauli::Y);
    Ok(s)
}

/// Ground state by sweeping `U^A`/`U^B` rotations over the even plaquettes,
/// each realized by its four-body schedule.
pub fn ground_state_sweep(spec: &LatticeSpec) -> Result<Sweep> {
    let steps = sweep_plan(spec)?;
    let mut psi = build_psi0(spec)?;
    for step in &steps {
        let (i, j) = step.plaquette;
        let prog = sweep_schedule(spec, i, j, step.gate)?.pulse_program()?;
        psi.apply_program(&prog)?;
    }
    let stages = steps.iter().map(|s| s.stage + 1).max().unwrap_or(0);
    Ok(Sweep {
        state: psi,
        stages,
        steps,
    })
}
