//! Anyons on the toric code: open strings and their syndromes, string
//! propagators, braiding, loop-encoded memory states, and logical qubits
//! stored in holes.
//!
//! On the Wen lattice a plaquette `(i, j)` is dark when `i + j` is even and
//! hosts `e` anyons; light plaquettes host `m`. A `Z` on spin `(i, j)` flips
//! `P_{i−1,j−1}` and `P_{i,j}`, an `X` flips `P_{i,j−1}` and `P_{i−1,j}`.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::{expm, to_matrix, DenseOperator, Statevector, C64};
use crate::error::{QsaError, Result};
use crate::lattice::{
    build_terms, build_wen, ground_state_projector, lattice_graph, Boundary, HoleKind, KitaevGeometry, LatticeSpec,
    Model, PlaquetteSet,
};
use crate::pauli::{Pauli, PauliString};
use crate::propagator::InvolutionRotation;
use crate::schedule::{compile, ConnectivityGraph, Pulse, PulseKind, PulseProgram, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnyonKind {
    #[serde(rename = "e")]
    E,
    #[serde(rename = "m")]
    M,
}

/// Kind hosted by Wen plaquette `(i, j)`; the bottom-left plaquette is dark.
pub fn anyon_kind(i: usize, j: usize) -> AnyonKind {
    if (i + j) % 2 == 0 {
        AnyonKind::E
    } else {
        AnyonKind::M
    }
}

/// Pauli letters on an ordered chain of spins `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StringPath {
    pub sites: Vec<[usize; 2]>,
    pub letters: String,
}

impl StringPath {
    pub fn new(sites: Vec<[usize; 2]>, letters: &str) -> Result<Self> {
        let p = StringPath {
            sites,
            letters: letters.to_string(),
        };
        p.letter_list()?;
        Ok(p)
    }

    pub fn letter_list(&self) -> Result<Vec<Pauli>> {
        let letters: Vec<Pauli> = self
            .letters
            .chars()
            .map(|c| match Pauli::from_char(c) {
                Some(p) if !p.is_identity() => Ok(p),
                _ => Err(QsaError::Parse {
                    literal: self.letters.clone(),
                    reason: format!("unexpected path letter {c:?}"),
                }),
            })
            .collect::<Result<_>>()?;
        if letters.len() != self.sites.len() {
            return Err(QsaError::InvalidSpec(format!(
                "path has {} sites but {} letters",
                self.sites.len(),
                letters.len()
            )));
        }
        if letters.is_empty() {
            return Err(QsaError::InvalidSpec("empty path".into()));
        }
        Ok(letters)
    }

    /// Sites on the lattice, pairwise distinct, consecutive ones coupled.
    pub fn check(&self, spec: &LatticeSpec) -> Result<()> {
        self.letter_list()?;
        if spec.model != Model::Wen {
            return Err(QsaError::InvalidSpec("paths live on the wen lattice".into()));
        }
        let mut seen = BTreeSet::new();
        for &[i, j] in &self.sites {
            if i >= spec.rows || j >= spec.cols {
                return Err(QsaError::InvalidSpec(format!("path site ({i},{j}) off the lattice")));
            }
            if !seen.insert((i, j)) {
                return Err(QsaError::InvalidSpec(format!("path visits ({i},{j}) twice")));
            }
        }
        let g = lattice_graph(spec)?;
        for w in self.sites.windows(2) {
            let (a, b) = (spec.site(w[0][0], w[0][1]), spec.site(w[1][0], w[1][1]));
            if !g.has_edge(a, b) {
                return Err(QsaError::InvalidSpec(format!(
                    "path sites {:?} and {:?} are not neighbours",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    /// True when the last site neighbours the first.
    pub fn is_closed(&self, spec: &LatticeSpec) -> Result<bool> {
        if self.sites.len() < 3 {
            return Ok(false);
        }
        let (f, l) = (self.sites[0], self.sites[self.sites.len() - 1]);
        Ok(lattice_graph(spec)?.has_edge(spec.site(f[0], f[1]), spec.site(l[0], l[1])))
    }

    pub fn to_pauli(&self, spec: &LatticeSpec) -> Result<PauliString> {
        self.check(spec)?;
        let entries: Vec<(usize, Pauli)> = self
            .sites
            .iter()
            .zip(self.letter_list()?)
            .map(|(&[i, j], p)| (spec.site(i, j), p))
            .collect();
        PauliString::from_sparse(spec.n_sites(), &entries)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Excitation {
    pub plaquette: (usize, usize),
    pub kind: AnyonKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Syndrome {
    pub excitations: Vec<Excitation>,
}

impl Syndrome {
    fn from_cells(cells: BTreeSet<(usize, usize)>) -> Self {
        Syndrome {
            excitations: cells
                .into_iter()
                .map(|(i, j)| Excitation {
                    plaquette: (i, j),
                    kind: anyon_kind(i, j),
                })
                .collect(),
        }
    }

    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.excitations.iter().map(|e| e.plaquette).collect()
    }
}

fn plain_wen_set(spec: &LatticeSpec) -> Result<PlaquetteSet> {
    if spec.model != Model::Wen || !spec.twists.is_empty() {
        return Err(QsaError::InvalidSpec("needs an untwisted wen lattice".into()));
    }
    build_wen(spec)
}

/// Excited plaquettes from the per-letter diagonal rule, with pairs cancelling.
pub fn syndrome_of(path: &StringPath, spec: &LatticeSpec) -> Result<Syndrome> {
    let set = plain_wen_set(spec)?;
    path.check(spec)?;
    let cells: BTreeSet<(usize, usize)> = set.terms.iter().map(|t| t.index).collect();
    let wrap = |i: usize, di: i64, n: usize| -> Option<usize> {
        let k = i as i64 + di;
        match spec.boundary {
            Boundary::Periodic => Some(k.rem_euclid(n as i64) as usize),
            Boundary::Open => (k >= 0).then_some(k as usize),
        }
    };
    let mut flipped = BTreeSet::new();
    for (&[i, j], p) in path.sites.iter().zip(path.letter_list()?) {
        let mut offsets = Vec::new();
        if matches!(p, Pauli::Z | Pauli::Y) {
            offsets.extend([(-1, -1), (0, 0)]);
        }
        if matches!(p, Pauli::X | Pauli::Y) {
            offsets.extend([(0, -1), (-1, 0)]);
        }
        for (di, dj) in offsets {
            let (Some(a), Some(b)) = (wrap(i, di, spec.rows), wrap(j, dj, spec.cols)) else {
                continue;
            };
            if cells.contains(&(a, b)) && !flipped.insert((a, b)) {
                flipped.remove(&(a, b));
            }
        }
    }
    Ok(Syndrome::from_cells(flipped))
}

/// Plaquettes whose operator anticommutes with the path string.
pub fn syndrome_by_commutation(path: &StringPath, spec: &LatticeSpec) -> Result<Syndrome> {
    let set = plain_wen_set(spec)?;
    let s = path.to_pauli(spec)?;
    let mut cells = BTreeSet::new();
    for t in &set.terms {
        if !t.operator.commutes(&s)? {
            cells.insert(t.index);
        }
    }
    Ok(Syndrome::from_cells(cells))
}

/// `exp(−i·tg·P)` for a Hermitian string `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct StringPropagator {
    pub string: PauliString,
    pub tg: f64,
}

impl StringPropagator {
    pub fn new(string: PauliString, tg: f64) -> Result<Self> {
        if !string.is_hermitian() {
            return Err(QsaError::NonHermitian(string.to_string()));
        }
        Ok(StringPropagator { string, tg })
    }

    /// `cos(tg)|ψ⟩ − i sin(tg) P|ψ⟩`.
    pub fn apply(&self, psi: &Statevector) -> Result<Statevector> {
        let mut out = psi.clone();
        out.scale(C64::new(self.tg.cos(), 0.0));
        out.add_scaled(C64::new(0.0, -self.tg.sin()), &psi.apply_string(&self.string)?)?;
        Ok(out)
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        let p = to_matrix(&self.string)?;
        let id = DenseOperator::identity(p.n_qubits())?;
        let m = id.matrix() * C64::new(self.tg.cos(), 0.0) + p.matrix() * C64::new(0.0, -self.tg.sin());
        DenseOperator::from_matrix(p.n_qubits(), m)
    }

    /// Pulses realizing the propagator with two-body attachments on `graph`;
    /// single-site strings are rotated directly.
    pub fn program(&self, graph: &ConnectivityGraph) -> Result<PulseProgram> {
        rotation_program(&self.string, self.tg, graph)
    }
}

/// Pulse program for `exp(−i·tg·S)`, `S` a Hermitian string of any sign.
pub fn rotation_program(s: &PauliString, tg: f64, graph: &ConnectivityGraph) -> Result<PulseProgram> {
    if !s.is_hermitian() {
        return Err(QsaError::NonHermitian(s.to_string()));
    }
    if s.is_identity() {
        return Err(QsaError::InvalidSpec("identity string has no propagator".into()));
    }
    let n = s.n_sites();
    if s.weight() == 1 {
        return Ok(PulseProgram {
            n_sites: n,
            pulses: vec![Pulse {
                kind: PulseKind::Seed,
                rotation: InvolutionRotation::from_string(s, tg)?,
            }],
        });
    }
    let (bare, tg) = if s.phase() == 2 {
        (s.clone().with_phase(0), -tg)
    } else {
        (s.clone(), tg)
    };
    compile(&bare, graph, Strategy::Auto)?.with_tg(tg).pulse_program()
}

fn rotate(psi: &mut Statevector, s: &PauliString, tg: f64, graph: &ConnectivityGraph) -> Result<()> {
    psi.apply_program(&rotation_program(s, tg, graph)?)
}

/// Six-spin loop around `P_{i,j}` and `P_{i+1,j+1}`: the product of those two
/// plaquettes, so it carries an `m` around both.
pub fn encircling_loop(spec: &LatticeSpec, i: usize, j: usize) -> Result<StringPath> {
    let (r, c) = (spec.rows, spec.cols);
    let at = |a: usize, b: usize| [a % r, b % c];
    let path = StringPath::new(
        vec![
            at(i, j),
            at(i, j + 1),
            at(i + 1, j + 2),
            at(i + 2, j + 2),
            at(i + 2, j + 1),
            at(i + 1, j),
        ],
        "XZZXZZ",
    )?;
    path.check(spec)?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BraidReport {
    pub e_site: (usize, usize),
    pub loop_len: usize,
    pub phase: C64,
    pub expected: f64,
    pub distance: f64,
    pub pass: bool,
}

/// Runs an `m` loop propagator (`tg = π/2`) with an `e` pair created by `Z`
/// at `e_site`, and compares with the loop run before the pair existed.
pub fn braid(spec: &LatticeSpec, e_site: (usize, usize), loop_path: &StringPath, tol: f64) -> Result<BraidReport> {
    let set = plain_wen_set(spec)?;
    let l = loop_path.to_pauli(spec)?;
    if !loop_path.is_closed(spec)? {
        return Err(QsaError::Topology("braid path is not a closed loop".into()));
    }
    for t in &set.terms {
        if !t.operator.commutes(&l)? {
            return Err(QsaError::Topology(format!(
                "loop leaves an excitation on plaquette {:?}",
                t.index
            )));
        }
    }
    let n = spec.n_sites();
    let z = PauliString::single(n, spec.site(e_site.0, e_site.1), Pauli::Z)?;
    let graph = lattice_graph(spec)?;
    let prog = rotation_program(&l, FRAC_PI_2, &graph)?;
    let g = ground_state_projector(spec)?;

    let mut braided = g.apply_string(&z)?;
    braided.apply_program(&prog)?;
    let mut reference = g.clone();
    reference.apply_program(&prog)?;
    let reference = reference.apply_string(&z)?;

    let phase = reference.inner(&braided)?;
    let expected = if z.commutes(&l)? { 1.0 } else { -1.0 };
    let mut scaled = reference.clone();
    scaled.scale(C64::new(expected, 0.0));
    let distance = braided.distance(&scaled)?;
    Ok(BraidReport {
        e_site,
        loop_len: loop_path.sites.len(),
        phase,
        expected,
        distance,
        pass: distance <= tol,
    })
}

/// Logical operators of the loop memory on a periodic lattice. `m` loops flip
/// the encoded bits, `e` loops read them; the ground state is fixed by both
/// `e` loops.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemoryLoops {
    pub vertical_m: PauliString,
    pub horizontal_m: PauliString,
    pub vertical_e: PauliString,
    pub horizontal_e: PauliString,
}

/// Loop along column `col` (vertical) or row `row` (horizontal); `m` loops put
/// `Z` on odd spins and `X` on even ones, `e` loops the reverse.
pub fn memory_loop(spec: &LatticeSpec, kind: AnyonKind, vertical: bool, line: usize) -> Result<PauliString> {
    let sites: Vec<(usize, usize)> = if vertical {
        (0..spec.rows).map(|i| (i, line)).collect()
    } else {
        (0..spec.cols).map(|j| (line, j)).collect()
    };
    let entries: Vec<(usize, Pauli)> = sites
        .into_iter()
        .map(|(i, j)| {
            let odd = (i + j) % 2 == 1;
            let letter = match (kind, odd) {
                (AnyonKind::M, true) | (AnyonKind::E, false) => Pauli::Z,
                _ => Pauli::X,
            };
            (spec.site(i, j), letter)
        })
        .collect();
    PauliString::from_sparse(spec.n_sites(), &entries)
}

fn require_memory(spec: &LatticeSpec) -> Result<()> {
    plain_wen_set(spec)?;
    if spec.boundary != Boundary::Periodic {
        return Err(QsaError::InvalidSpec("the loop memory needs a periodic lattice".into()));
    }
    Ok(())
}

pub fn memory_loops(spec: &LatticeSpec) -> Result<MemoryLoops> {
    require_memory(spec)?;
    Ok(MemoryLoops {
        vertical_m: memory_loop(spec, AnyonKind::M, true, 0)?,
        horizontal_m: memory_loop(spec, AnyonKind::M, false, 0)?,
        vertical_e: memory_loop(spec, AnyonKind::E, true, 1)?,
        horizontal_e: memory_loop(spec, AnyonKind::E, false, 1)?,
    })
}

impl MemoryLoops {
    /// `(X̄₁, Z̄₁, X̄₂, Z̄₂)`.
    pub fn logicals(&self) -> [&PauliString; 4] {
        [&self.vertical_m, &self.horizontal_e, &self.horizontal_m, &self.vertical_e]
    }
}

/// `G`, `V_m G`, `H_m G`, `V_m H_m G`.
pub fn memory_basis(spec: &LatticeSpec) -> Result<([Statevector; 4], MemoryLoops)> {
    let loops = memory_loops(spec)?;
    let g = ground_state_projector(spec)?;
    let v = g.apply_string(&loops.vertical_m)?;
    let h = g.apply_string(&loops.horizontal_m)?;
    let vh = h.apply_string(&loops.vertical_m)?;
    Ok(([g, v, h, vh], loops))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryState {
    pub state: Statevector,
    /// Overlaps `⟨basis_k|state⟩`.
    pub overlaps: [C64; 4],
    /// Phase `φ̄` multiplied onto the state after the loop rotations.
    pub global_phase: f64,
}

/// Single `m`-loop propagator on the ground state:
/// `cos(tg)|G⟩ − i sin(tg) V_m|G⟩` (vertical) or the `H_m` analogue.
pub fn memory_loop_state(spec: &LatticeSpec, vertical: bool, tg: f64) -> Result<MemoryState> {
    let (basis, loops) = memory_basis(spec)?;
    let l = if vertical { &loops.vertical_m } else { &loops.horizontal_m };
    let mut psi = basis[0].clone();
    rotate(&mut psi, l, tg, &lattice_graph(spec)?)?;
    let overlaps = overlaps(&basis, &psi)?;
    Ok(MemoryState {
        state: psi,
        overlaps,
        global_phase: 0.0,
    })
}

fn overlaps(basis: &[Statevector; 4], psi: &Statevector) -> Result<[C64; 4]> {
    let mut out = [C64::new(0.0, 0.0); 4];
    for (o, b) in out.iter_mut().zip(basis) {
        *o = b.inner(psi)?;
    }
    Ok(out)
}

/// Prepares `Σ_k a_k |basis_k⟩` from the ground state with loop propagators:
/// `Ȳ₁`, then `Ȳ₂` and `Z̄₁Ȳ₂` together, then diagonal `Z̄₁`, `Z̄₂`, `Z̄₁Z̄₂`
/// phases. Amplitudes are normalized first.
pub fn memory_encode(spec: &LatticeSpec, amplitudes: [C64; 4]) -> Result<MemoryState> {
    let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 1e-12) || !norm.is_finite() {
        return Err(QsaError::Domain("amplitudes must have a positive finite norm".into()));
    }
    let a: Vec<C64> = amplitudes.iter().map(|x| x / norm).collect();
    let (basis, loops) = memory_basis(spec)?;
    let [x1, z1, x2, z2] = loops.logicals();
    let graph = lattice_graph(spec)?;
    let y1 = x1.multiply(z1)?.with_phase(x1.multiply(z1)?.phase() + 1);
    let y2 = x2.multiply(z2)?.with_phase(x2.multiply(z2)?.phase() + 1);
    let z1y2 = z1.multiply(&y2)?;
    let z1z2 = z1.multiply(z2)?;

    // Index order: 0 = |00⟩, 1 = |10⟩ (X̄₁), 2 = |01⟩ (X̄₂), 3 = |11⟩.
    let r: Vec<f64> = a.iter().map(|x| x.norm()).collect();
    let alpha = (r[1].hypot(r[3])).atan2(r[0].hypot(r[2]));
    let th0 = r[2].atan2(r[0]);
    let th1 = r[3].atan2(r[1]);
    let (beta, gamma) = ((th0 + th1) / 2.0, (th0 - th1) / 2.0);

    let mut psi = basis[0].clone();
    for (s, tg) in [(&y1, alpha), (&y2, beta), (&z1y2, gamma)] {
        if tg != 0.0 {
            rotate(&mut psi, s, tg, &graph)?;
        }
    }
    let phi: Vec<f64> = a
        .iter()
        .map(|x| if x.norm() > 1e-14 { x.arg() } else { 0.0 })
        .collect();
    let global = phi.iter().sum::<f64>() / 4.0;
    let c1 = (-phi[0] + phi[1] - phi[2] + phi[3]) / 4.0;
    let c2 = (-phi[0] - phi[1] + phi[2] + phi[3]) / 4.0;
    let c12 = (-phi[0] + phi[1] + phi[2] - phi[3]) / 4.0;
    for (s, tg) in [(z1, c1), (z2, c2), (&z1z2, c12)] {
        if tg != 0.0 {
            rotate(&mut psi, s, tg, &graph)?;
        }
    }
    psi.scale(C64::from_polar(1.0, global));
    let overlaps = overlaps(&basis, &psi)?;
    Ok(MemoryState {
        state: psi,
        overlaps,
        global_phase: global,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exit {
    Bottom,
    Left,
    Right,
    Top,
}

impl FromStr for Exit {
    type Err = QsaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bottom" => Ok(Exit::Bottom),
            "left" => Ok(Exit::Left),
            "right" => Ok(Exit::Right),
            "top" => Ok(Exit::Top),
            _ => Err(QsaError::Parse {
                literal: s.to_string(),
                reason: "expected bottom, left, right or top".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    MemoryLoops,
    SmoothHole,
    RoughHole,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogicalQubit {
    pub encoding: Encoding,
    pub hole: Option<usize>,
    pub exit: Option<Exit>,
    pub x: PauliString,
    pub z: PauliString,
}

/// Smooth holes exit at the bottom, rough holes at the top.
pub fn default_exit(kind: HoleKind) -> Exit {
    match kind {
        HoleKind::Smooth => Exit::Bottom,
        HoleKind::Rough => Exit::Top,
    }
}

fn require_holes(spec: &LatticeSpec) -> Result<KitaevGeometry> {
    spec.validate()?;
    if spec.model != Model::KitaevHoles {
        return Err(QsaError::InvalidSpec("needs the kitaev_holes model".into()));
    }
    Ok(KitaevGeometry::new(spec.rows, spec.cols))
}

/// Logical pair of hole `hole`. A smooth hole has `Z̄` = product of its
/// plaquettes and `X̄` = X-string to a smooth side; a rough hole has `X̄` =
/// product of its vertex operators and `Z̄` = Z-string to the rough top.
pub fn hole_logicals(spec: &LatticeSpec, hole: usize, exit: Exit) -> Result<LogicalQubit> {
    let geo = require_holes(spec)?;
    let h = spec
        .holes
        .get(hole)
        .ok_or_else(|| QsaError::InvalidSpec(format!("no hole {hole}")))?;
    let toggle = |acc: &mut BTreeSet<usize>, edges: Vec<usize>| {
        for e in edges {
            if !acc.insert(e) {
                acc.remove(&e);
            }
        }
    };
    let cells: Vec<(usize, usize)> = h.plaquettes.iter().map(|&[i, j]| (i, j)).collect();
    let (encoding, x, z) = match h.kind {
        HoleKind::Smooth => {
            let mut loop_edges = BTreeSet::new();
            for &(i, j) in &cells {
                toggle(&mut loop_edges, geo.plaquette_edges(i, j));
            }
            let string: Vec<usize> = match exit {
                Exit::Bottom => {
                    let &(pi, pj) = cells.iter().min().unwrap();
                    (0..=pi).map(|k| geo.h(k, pj)).collect()
                }
                Exit::Left => {
                    let &(pi, pj) = cells.iter().min_by_key(|c| (c.1, c.0)).unwrap();
                    (0..=pj).map(|k| geo.v(pi, k)).collect()
                }
                Exit::Right => {
                    let &(pi, pj) = cells.iter().max_by_key(|c| (c.1, c.0)).unwrap();
                    (pj + 1..spec.cols).map(|k| geo.v(pi, k)).collect()
                }
                Exit::Top => {
                    return Err(QsaError::Encoding(
                        "a smooth hole cannot exit through the rough top boundary".into(),
                    ))
                }
            };
            let loop_edges: Vec<usize> = loop_edges.into_iter().collect();
            (
                Encoding::SmoothHole,
                geo.uniform(&string, Pauli::X)?,
                geo.uniform(&loop_edges, Pauli::Z)?,
            )
        }
        HoleKind::Rough => {
            if exit != Exit::Top {
                return Err(QsaError::Encoding(format!(
                    "a rough hole cannot exit through the smooth {exit:?} boundary"
                )));
            }
            let mut loop_edges = BTreeSet::new();
            for &(i, j) in &cells {
                toggle(&mut loop_edges, geo.vertex_edges(i, j));
            }
            let &(vi, vj) = cells.iter().max().unwrap();
            let string: Vec<usize> = (vi..spec.rows).map(|k| geo.v(k, vj)).collect();
            let loop_edges: Vec<usize> = loop_edges.into_iter().collect();
            (
                Encoding::RoughHole,
                geo.uniform(&loop_edges, Pauli::X)?,
                geo.uniform(&string, Pauli::Z)?,
            )
        }
    };
    if x.commutes(&z)? {
        return Err(QsaError::Encoding(format!("logical pair of hole {hole} commutes")));
    }
    for t in &build_terms(spec)?.terms {
        if !t.operator.commutes(&x)? || !t.operator.commutes(&z)? {
            return Err(QsaError::Encoding(format!(
                "logical of hole {hole} anticommutes with the driven term at {:?}",
                t.index
            )));
        }
    }
    Ok(LogicalQubit {
        encoding,
        hole: Some(hole),
        exit: Some(exit),
        x,
        z,
    })
}

/// Logical `|0̄…0̄⟩` of every hole: `|0…0⟩` projected onto the driven vertex terms.
pub fn code_state(spec: &LatticeSpec) -> Result<Statevector> {
    require_holes(spec)?;
    let mut psi = Statevector::zero(spec.n_sites())?;
    for t in build_terms(spec)?.terms {
        if t.kind == crate::lattice::TermKind::Vertex {
            psi.project_plus(&t.operator)?;
        }
    }
    psi.normalize();
    Ok(psi)
}

/// `e^{itg}·exp(−i·tg·Z)` as a 2×2 matrix minus `diag(1, e^{2itg})`, in spectral norm.
pub fn phase_gate_error(tg: f64) -> Result<f64> {
    let z = crate::pauli::WeightedPauliSum::from_string(&"Z".parse()?)?;
    let lhs = expm(&z, tg)?.scale(C64::from_polar(1.0, tg));
    let m = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C64::new(1.0, 0.0),
        C64::from_polar(1.0, 2.0 * tg),
    ]));
    crate::dense::distance(&lhs, &DenseOperator::from_matrix(1, m)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagicState {
    pub theta: f64,
    pub state: Statevector,
    pub fidelity: f64,
    /// Argument of `⟨target|state⟩`.
    pub global_phase: f64,
}

/// `(|0̄⟩ + e^{iθ}|1̄⟩)/√2` from `|0̄⟩`: `exp(−iπ/4·X̄)`, then the phase gate
/// `P(θ + π/2) = e^{itg}exp(−i·tg·Z̄)` with `tg = (θ + π/2)/2`, which also
/// removes the `−i` left by the first step.
pub fn magic_state(spec: &LatticeSpec, qubit: &LogicalQubit, theta: f64) -> Result<MagicState> {
    let graph = lattice_graph(spec)?;
    let zero = code_state(spec)?;
    let one = zero.apply_string(&qubit.x)?;
    let mut psi = zero.clone();
    rotate(&mut psi, &qubit.x, FRAC_PI_4, &graph)?;
    let tg = (theta + FRAC_PI_2) / 2.0;
    rotate(&mut psi, &qubit.z, tg, &graph)?;
    psi.scale(C64::from_polar(1.0, tg));

    let mut target = zero;
    target.add_scaled(C64::from_polar(1.0, theta), &one)?;
    target.normalize();
    let ov = target.inner(&psi)?;
    Ok(MagicState {
        theta,
        state: psi,
        fidelity: ov.norm_sqr(),
        global_phase: ov.arg(),
    })
}

/// Controlled-NOT between a smooth-hole control and a rough-hole target,
/// `U(tg) = e^{i tg/2}·exp(−i tg/2·Z̄_c)·exp(−i tg/2·L)·exp(+i tg/2·Z̄_c L)`
/// with `L` the X-loop around the target hole. At `tg = π/2` this is CNOT
/// with global phase `π/4` already included.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopCnot {
    pub control_z: PauliString,
    pub loop_op: PauliString,
}

impl LoopCnot {
    pub fn new(spec: &LatticeSpec, control: &LogicalQubit, target: &LogicalQubit) -> Result<Self> {
        if control.encoding != Encoding::SmoothHole || target.encoding != Encoding::RoughHole {
            return Err(QsaError::Encoding(
                "the loop CNOT needs a smooth-hole control and a rough-hole target".into(),
            ));
        }
        Self::with_loop(spec, control, target, &target.x)
    }

    /// Uses `loop_op` as the loop; it must be a closed loop of the driven
    /// lattice that encloses the target hole.
    pub fn with_loop(
        spec: &LatticeSpec,
        control: &LogicalQubit,
        target: &LogicalQubit,
        loop_op: &PauliString,
    ) -> Result<Self> {
        for t in &build_terms(spec)?.terms {
            if !t.operator.commutes(loop_op)? {
                return Err(QsaError::Topology(format!(
                    "loop is open at the driven term {:?}",
                    t.index
                )));
            }
        }
        if loop_op.commutes(&target.z)? {
            return Err(QsaError::Topology("loop does not enclose the target hole".into()));
        }
        Self::from_parts(control.z.clone(), loop_op.clone())
    }

    /// No topology checks.
    pub fn from_parts(control_z: PauliString, loop_op: PauliString) -> Result<Self> {
        if !control_z.commutes(&loop_op)? {
            return Err(QsaError::InvalidSpec("control and loop operators must commute".into()));
        }
        Ok(LoopCnot { control_z, loop_op })
    }

    pub fn global_phase(tg: f64) -> f64 {
        tg / 2.0
    }

    pub fn program(&self, tg: f64, graph: &ConnectivityGraph) -> Result<PulseProgram> {
        let zl = self.control_z.multiply(&self.loop_op)?;
        let mut prog = rotation_program(&self.control_z, tg / 2.0, graph)?;
        prog.extend(rotation_program(&self.loop_op, tg / 2.0, graph)?)?;
        prog.extend(rotation_program(&zl, -tg / 2.0, graph)?)?;
        Ok(prog)
    }

    pub fn apply(&self, psi: &Statevector, tg: f64, graph: &ConnectivityGraph) -> Result<Statevector> {
        let mut out = psi.clone();
        out.apply_program(&self.program(tg, graph)?)?;
        out.scale(C64::from_polar(1.0, Self::global_phase(tg)));
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthRow {
    pub input: (u8, u8),
    pub expected: (u8, u8),
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CnotReport {
    pub tg: f64,
    pub rows: Vec<TruthRow>,
    pub max_distance: f64,
    /// `‖exp(−i tg X̄_c L)|0,b⟩ − CNOT·exp(−i tg X̄_c)|0,b⟩‖`, worst over `b`.
    pub braided_preparation: f64,
}

fn logical_basis(zero: &Statevector, c: &LogicalQubit, t: &LogicalQubit, bits: (u8, u8)) -> Result<Statevector> {
    let mut s = zero.clone();
    if bits.0 == 1 {
        s = s.apply_string(&c.x)?;
    }
    if bits.1 == 1 {
        s = s.apply_string(&t.x)?;
    }
    Ok(s)
}

/// Truth table of the loop CNOT on the four logical basis states, plus the
/// braided-preparation identity at `prep_tg`.
pub fn cnot_truth_table(
    spec: &LatticeSpec,
    control: &LogicalQubit,
    target: &LogicalQubit,
    prep_tg: f64,
) -> Result<CnotReport> {
    let cnot = LoopCnot::new(spec, control, target)?;
    let graph = lattice_graph(spec)?;
    let zero = code_state(spec)?;
    let mut rows = Vec::new();
    for bits in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
        let input = logical_basis(&zero, control, target, bits)?;
        let expected = (bits.0, bits.1 ^ bits.0);
        let want = logical_basis(&zero, control, target, expected)?;
        let got = cnot.apply(&input, FRAC_PI_2, &graph)?;
        rows.push(TruthRow {
            input: bits,
            expected,
            distance: got.distance(&want)?,
        });
    }
    let xl = control.x.multiply(&cnot.loop_op)?;
    let mut braided_preparation: f64 = 0.0;
    for b in [0u8, 1] {
        let input = logical_basis(&zero, control, target, (0, b))?;
        let mut braided = input.clone();
        rotate(&mut braided, &xl, prep_tg, &graph)?;
        let mut plain = input;
        rotate(&mut plain, &control.x, prep_tg, &graph)?;
        let plain = cnot.apply(&plain, FRAC_PI_2, &graph)?;
        braided_preparation = braided_preparation.max(braided.distance(&plain)?);
    }
    let max_distance = rows.iter().map(|r| r.distance).fold(0.0, f64::max);
    Ok(CnotReport {
        tg: FRAC_PI_2,
        rows,
        max_distance,
        braided_preparation,
    })
}

/// Edge on the far side of the hole's extremal plaquette, opposite its exit.
pub fn extension_edge(spec: &LatticeSpec, qubit: &LogicalQubit) -> Result<usize> {
    let geo = require_holes(spec)?;
    let (Some(h), Some(exit)) = (qubit.hole, qubit.exit) else {
        return Err(QsaError::InvalidSpec("extension needs a hole qubit".into()));
    };
    let hole = &spec.holes[h];
    if hole.kind != HoleKind::Smooth {
        return Err(QsaError::Unsupported("extension is defined for smooth holes".into()));
    }
    let cells: Vec<(usize, usize)> = hole.plaquettes.iter().map(|&[i, j]| (i, j)).collect();
    Ok(match exit {
        Exit::Bottom => {
            let &(pi, pj) = cells.iter().min().unwrap();
            geo.h(pi + 1, pj)
        }
        Exit::Left => {
            let &(pi, pj) = cells.iter().min_by_key(|c| (c.1, c.0)).unwrap();
            geo.v(pi, pj + 1)
        }
        Exit::Right => {
            let &(pi, pj) = cells.iter().max_by_key(|c| (c.1, c.0)).unwrap();
            geo.v(pi, pj)
        }
        Exit::Top => unreachable!("smooth holes never exit at the top"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NaiveMoveReport {
    pub tg: f64,
    pub extension_site: usize,
    /// `‖naive − intended‖`.
    pub distance: f64,
    /// `2|cos tg|·f` with `f = ‖(X_e − 1)|0̄⟩‖/2`.
    pub predicted: f64,
    pub overlap_factor: f64,
    /// `‖exp(−i tg X̄ X_e)|0̄⟩ − intended‖` with the propagator run as pulses.
    pub loop_route_distance: f64,
}

/// Starting from `cos(tg)|0̄⟩ − i sin(tg) X̄|0̄⟩`, compares a bare `X_e` on the
/// extension edge with the intended `cos(tg)|0̄⟩ − i sin(tg) X̄ X_e|0̄⟩`.
pub fn naive_move_error(
    spec: &LatticeSpec,
    qubit: &LogicalQubit,
    tg: f64,
    extension: Option<usize>,
) -> Result<NaiveMoveReport> {
    let e = match extension {
        Some(e) => e,
        None => extension_edge(spec, qubit)?,
    };
    let n = spec.n_sites();
    let xe = PauliString::single(n, e, Pauli::X)?;
    let zero = code_state(spec)?;
    let (c, s) = (tg.cos(), tg.sin());

    let mut superposed = zero.clone();
    superposed.scale(C64::new(c, 0.0));
    superposed.add_scaled(C64::new(0.0, -s), &zero.apply_string(&qubit.x)?)?;
    let naive = superposed.apply_string(&xe)?;

    let xs_xe = qubit.x.multiply(&xe)?;
    let mut intended = zero.clone();
    intended.scale(C64::new(c, 0.0));
    intended.add_scaled(C64::new(0.0, -s), &zero.apply_string(&xs_xe)?)?;

    let mut moved = zero.apply_string(&xe)?;
    moved.add_scaled(C64::new(-1.0, 0.0), &zero)?;
    let f = moved.norm() / 2.0;

    let mut routed = zero;
    rotate(&mut routed, &xs_xe, tg, &lattice_graph(spec)?)?;
    Ok(NaiveMoveReport {
        tg,
        extension_site: e,
        distance: naive.distance(&intended)?,
        predicted: 2.0 * c.abs() * f,
        overlap_factor: f,
        loop_route_distance: routed.distance(&intended)?,
    })
}

/// Concatenates string propagators. Two loops crossing in time without
/// commuting have no exact attachment construction and are rejected.
pub fn crossing_program(props: &[(PauliString, f64)], graph: &ConnectivityGraph) -> Result<PulseProgram> {
    for (k, (a, _)) in props.iter().enumerate() {
        for (b, _) in &props[k + 1..] {
            if !a.commutes(b)? {
                return Err(QsaError::Unsupported(format!(
                    "interleaved propagators {a} and {b} do not commute"
                )));
            }
        }
    }
    let mut prog = PulseProgram::empty(graph.n_sites());
    for (s, tg) in props {
        prog.extend(rotation_program(s, *tg, graph)?)?;
    }
    Ok(prog)
}
