//! Truncated tensor-product Hilbert space of the two-atom, six-mode system,
//! with a compressed sparse operator type and state containers.
//!
//! A basis configuration is `(atom A level, atom B level, n_aAL, n_aAR,
//! n_aBL, n_aBR, n_fL, n_fR)`. Configurations are enumerated
//! lexicographically in that field order, using the declared label order of
//! each factor, so index 0 is `|0>_A |g>_B |vac>`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Atomic level label shared by both atoms. Atom B only carries a subset.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Zero,
    One,
    G,
    L,
    R,
    EL,
    ER,
}

impl Level {
    pub fn is_excited(self) -> bool {
        matches!(self, Level::EL | Level::ER)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Level::Zero => "0",
            Level::One => "1",
            Level::G => "g",
            Level::L => "L",
            Level::R => "R",
            Level::EL => "eL",
            Level::ER => "eR",
        };
        f.write_str(s)
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" => Ok(Level::Zero),
            "1" => Ok(Level::One),
            "g" => Ok(Level::G),
            "L" => Ok(Level::L),
            "R" => Ok(Level::R),
            "eL" => Ok(Level::EL),
            "eR" => Ok(Level::ER),
            _ => Err(Error::UnknownLabel { label: s.to_string(), context: "atomic level".into() }),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    A,
    B,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Atom::A => "A",
            Atom::B => "B",
        })
    }
}

/// Bosonic modes: the four cavity modes and the two fiber modes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    AL,
    AR,
    BL,
    BR,
    FL,
    FR,
}

impl Mode {
    pub const ALL: [Mode; 6] = [Mode::AL, Mode::AR, Mode::BL, Mode::BR, Mode::FL, Mode::FR];

    pub fn is_fiber(self) -> bool {
        matches!(self, Mode::FL | Mode::FR)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::AL => "aAL",
            Mode::AR => "aAR",
            Mode::BL => "aBL",
            Mode::BR => "aBR",
            Mode::FL => "fL",
            Mode::FR => "fR",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::UnknownLabel { label: s.to_string(), context: "bosonic mode".into() })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelScheme {
    pub atom_a: Vec<Level>,
    pub atom_b: Vec<Level>,
    pub modes: Vec<Mode>,
    pub n_max: usize,
}

impl LevelScheme {
    /// The seven-level atom A, five-level atom B scheme with all six modes.
    pub fn new(n_max: usize) -> Result<Self> {
        use Level::*;
        let scheme = LevelScheme {
            atom_a: vec![Zero, One, G, L, R, EL, ER],
            atom_b: vec![G, L, R, EL, ER],
            modes: Mode::ALL.to_vec(),
            n_max,
        };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::InvalidScheme("n_max must be at least 1".into()));
        }
        fn dup_free<T: Ord + Copy>(xs: &[T]) -> bool {
            let mut v = xs.to_vec();
            v.sort();
            v.windows(2).all(|w| w[0] != w[1])
        }
        if !dup_free(&self.atom_a) || !dup_free(&self.atom_b) || !dup_free(&self.modes) {
            return Err(Error::InvalidScheme("duplicate label".into()));
        }
        if self.atom_a.is_empty() || self.atom_b.is_empty() {
            return Err(Error::InvalidScheme("empty atomic level set".into()));
        }
        Ok(())
    }

    pub fn levels(&self, atom: Atom) -> &[Level] {
        match atom {
            Atom::A => &self.atom_a,
            Atom::B => &self.atom_b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub atom_a: Level,
    pub atom_b: Level,
    /// Occupation numbers in the scheme's mode order.
    pub occupations: Vec<usize>,
}

impl BasisState {
    pub fn new(atom_a: Level, atom_b: Level) -> Self {
        BasisState { atom_a, atom_b, occupations: vec![0; 6] }
    }

    /// Same configuration with one photon (or `n`) in `mode`.
    pub fn with_photons(mut self, scheme: &LevelScheme, mode: Mode, n: usize) -> Self {
        if let Some(k) = scheme.modes.iter().position(|&m| m == mode) {
            self.occupations[k] = n;
        }
        self
    }

    pub fn level(&self, atom: Atom) -> Level {
        match atom {
            Atom::A => self.atom_a,
            Atom::B => self.atom_b,
        }
    }

    /// Photons plus excited-state flags.
    pub fn excitations(&self) -> usize {
        self.occupations.iter().sum::<usize>()
            + self.atom_a.is_excited() as usize
            + self.atom_b.is_excited() as usize
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}>A|{}>B|", self.atom_a, self.atom_b)?;
        for (k, n) in self.occupations.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str(">")
    }
}

#[derive(Clone, Debug)]
pub struct Basis {
    scheme: LevelScheme,
    states: Vec<BasisState>,
    mode_block: usize,
}

impl Basis {
    pub fn enumerate(scheme: LevelScheme) -> Result<Self> {
        scheme.validate()?;
        let radix = scheme.n_max + 1;
        let n_modes = scheme.modes.len();
        let mode_block = radix.pow(n_modes as u32);
        let mut states = Vec::with_capacity(scheme.atom_a.len() * scheme.atom_b.len() * mode_block);
        for &a in &scheme.atom_a {
            for &b in &scheme.atom_b {
                for code in 0..mode_block {
                    let mut occupations = vec![0; n_modes];
                    let mut rem = code;
                    for k in (0..n_modes).rev() {
                        occupations[k] = rem % radix;
                        rem /= radix;
                    }
                    states.push(BasisState { atom_a: a, atom_b: b, occupations });
                }
            }
        }
        Ok(Basis { scheme, states, mode_block })
    }

    pub fn with_cutoff(n_max: usize) -> Result<Self> {
        Self::enumerate(LevelScheme::new(n_max)?)
    }

    pub fn scheme(&self) -> &LevelScheme {
        &self.scheme
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &BasisState {
        &self.states[i]
    }

    pub fn index(&self, s: &BasisState) -> Option<usize> {
        let ia = self.scheme.atom_a.iter().position(|&l| l == s.atom_a)?;
        let ib = self.scheme.atom_b.iter().position(|&l| l == s.atom_b)?;
        if s.occupations.len() != self.scheme.modes.len() {
            return None;
        }
        let radix = self.scheme.n_max + 1;
        let mut code = 0;
        for &n in &s.occupations {
            if n >= radix {
                return None;
            }
            code = code * radix + n;
        }
        Some((ia * self.scheme.atom_b.len() + ib) * self.mode_block + code)
    }

    /// Index of a configuration known to exist; panics otherwise.
    pub fn idx(&self, s: &BasisState) -> usize {
        self.index(s).unwrap_or_else(|| panic!("{s} not in basis"))
    }

    pub fn mode_position(&self, mode: Mode) -> Result<usize> {
        self.scheme
            .modes
            .iter()
            .position(|&m| m == mode)
            .ok_or_else(|| Error::UnknownLabel { label: mode.to_string(), context: "bosonic mode".into() })
    }

    /// Unit vector on a single configuration.
    pub fn ket(&self, s: &BasisState) -> StateVector {
        StateVector::basis(self.dim(), self.idx(s))
    }
}

/// Complex sparse matrix in compressed-row form. Entries are unique per
/// `(row, col)` and sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        SparseOperator { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, ONE)))
    }

    /// Duplicate `(row, col)` pairs are summed; exact zeros are dropped.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut acc: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "entry ({r}, {c}) out of range for dim {dim}");
            *acc.entry((r, c)).or_insert(ZERO) += v;
        }
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(acc.len());
        let mut vals = Vec::with_capacity(acc.len());
        for ((r, c), v) in acc {
            if v == ZERO {
                continue;
            }
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseOperator { dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.cols[lo..hi].binary_search(&c) {
            Ok(k) => self.vals[lo + k],
            Err(_) => ZERO,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()))
    }

    /// `self + self†`
    pub fn plus_adjoint(&self) -> Self {
        self.add(&self.adjoint())
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a SparseOperator>>(dim: usize, ops: I) -> Self {
        Self::from_triplets(dim, ops.into_iter().flat_map(|o| o.triplets().collect::<Vec<_>>()))
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut trip = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    trip.push((r, c, a * b));
                }
            }
        }
        Self::from_triplets(self.dim, trip)
    }

    /// `out = self * x`
    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            out[r] = acc;
        }
    }

    /// `out += s * self * x`
    pub fn apply_add(&self, s: C64, x: &[C64], out: &mut [C64]) {
        for r in 0..self.dim {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            out[r] += s * acc;
        }
    }

    pub fn apply(&self, x: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(self.dim);
        self.apply_into(x, &mut out);
        out
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.add(&other.scale(-ONE)).vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.triplets().map(|(r, c, v)| (v - self.get(c, r).conj()).norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        Self::from_triplets(
            n,
            (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| (r, c, m[(r, c)])),
        )
    }
}

/// Complex state vector in some basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(pub Vec<C64>);

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        StateVector(vec![ZERO; dim])
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = ONE;
        v
    }

    pub fn from_real(xs: &[f64]) -> Self {
        StateVector(xs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        self.0.iter_mut().for_each(|a| *a /= n);
        self
    }

    pub fn scaled(mut self, s: C64) -> Self {
        self.0.iter_mut().for_each(|a| *a *= s);
        self
    }

    pub fn add_scaled(&mut self, s: C64, other: &Self) {
        self.0.iter_mut().zip(&other.0).for_each(|(a, b)| *a += s * b);
    }

    /// Nonzero components as `(index, amplitude)`.
    pub fn support(&self) -> Vec<(usize, C64)> {
        self.0.iter().enumerate().filter(|(_, a)| **a != ZERO).map(|(i, a)| (i, *a)).collect()
    }
}

impl Deref for StateVector {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl DerefMut for StateVector {
    fn deref_mut(&mut self) -> &mut [C64] {
        &mut self.0
    }
}

/// `|to><from|` on one atom, identity on every other factor.
pub fn atomic_projector(basis: &Basis, atom: Atom, to: Level, from: Level) -> Result<SparseOperator> {
    let levels = basis.scheme().levels(atom);
    for l in [to, from] {
        if !levels.contains(&l) {
            return Err(Error::UnknownLabel { label: l.to_string(), context: format!("atom {atom}") });
        }
    }
    let trip = basis.states().iter().enumerate().filter(|(_, s)| s.level(atom) == from).map(|(i, s)| {
        let mut t = s.clone();
        match atom {
            Atom::A => t.atom_a = to,
            Atom::B => t.atom_b = to,
        }
        (basis.idx(&t), i, ONE)
    });
    Ok(SparseOperator::from_triplets(basis.dim(), trip))
}

/// Truncated bosonic annihilation operator for `mode`.
pub fn mode_annihilation(basis: &Basis, mode: Mode) -> Result<SparseOperator> {
    let k = basis.mode_position(mode)?;
    let trip = basis.states().iter().enumerate().filter(|(_, s)| s.occupations[k] > 0).map(|(i, s)| {
        let n = s.occupations[k];
        let mut t = s.clone();
        t.occupations[k] = n - 1;
        (basis.idx(&t), i, C64::new((n as f64).sqrt(), 0.0))
    });
    Ok(SparseOperator::from_triplets(basis.dim(), trip))
}

/// Largest deviation of the Gram matrix of `span` from the identity.
pub fn gram_residual(span: &[StateVector]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, u) in span.iter().enumerate() {
        for (j, v) in span.iter().enumerate() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((u.inner(v) - target).norm());
        }
    }
    worst
}

/// Matrix of `op` in an orthonormal `span`: `M[i][j] = <span_i|op|span_j>`.
pub fn restrict(op: &SparseOperator, span: &[StateVector]) -> Result<DMatrix<C64>> {
    for v in span {
        if v.len() != op.dim() {
            return Err(Error::DimensionMismatch { expected: op.dim(), found: v.len() });
        }
    }
    let residual = gram_residual(span);
    if residual > 1e-10 {
        return Err(Error::NonOrthonormalSpan { residual });
    }
    let images: Vec<StateVector> = span.iter().map(|v| op.apply(v)).collect();
    let k = span.len();
    Ok(DMatrix::from_fn(k, k, |i, j| span[i].inner(&images[j])))
}

/// A coordinate subspace: an ordered set of basis indices of a larger space.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    full_dim: usize,
    indices: Vec<usize>,
}

impl Subspace {
    pub fn new(full_dim: usize, mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        assert!(indices.last().is_none_or(|&i| i < full_dim));
        Subspace { full_dim, indices }
    }

    pub fn full(dim: usize) -> Self {
        Subspace { full_dim: dim, indices: (0..dim).collect() }
    }

    /// Smallest coordinate subspace containing `seeds` and closed under every
    /// operator in `ops`.
    pub fn reachable<'a, I>(full_dim: usize, seeds: &[usize], ops: I) -> Self
    where
        I: IntoIterator<Item = &'a SparseOperator>,
    {
        let ops: Vec<&SparseOperator> = ops.into_iter().collect();
        // column -> rows adjacency across all operators
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); full_dim];
        for op in &ops {
            for (r, c, _) in op.triplets() {
                adj[c].push(r);
            }
        }
        let mut seen = vec![false; full_dim];
        let mut stack: Vec<usize> = seeds.to_vec();
        while let Some(i) = stack.pop() {
            if seen[i] {
                continue;
            }
            seen[i] = true;
            stack.extend(adj[i].iter().copied().filter(|&j| !seen[j]));
        }
        Subspace::new(full_dim, (0..full_dim).filter(|&i| seen[i]).collect())
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn full_dim(&self) -> usize {
        self.full_dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn position(&self, full_index: usize) -> Option<usize> {
        self.indices.binary_search(&full_index).ok()
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.full_dim
    }

    /// Express `op` in subspace coordinates. Fails if `op` maps any span
    /// vector outside the span.
    pub fn restrict_operator(&self, op: &SparseOperator, name: &str) -> Result<SparseOperator> {
        if op.dim() != self.full_dim {
            return Err(Error::DimensionMismatch { expected: self.full_dim, found: op.dim() });
        }
        if self.is_full() {
            return Ok(op.clone());
        }
        let mut trip = Vec::new();
        for (r, c, v) in op.triplets() {
            let Some(pc) = self.position(c) else { continue };
            match self.position(r) {
                Some(pr) => trip.push((pr, pc, v)),
                None => {
                    return Err(Error::SpanNotInvariant { operator: name.to_string(), from: c, to: r });
                }
            }
        }
        Ok(SparseOperator::from_triplets(self.dim(), trip))
    }

    /// Drop components outside the span.
    pub fn project(&self, v: &StateVector) -> StateVector {
        StateVector(self.indices.iter().map(|&i| v[i]).collect())
    }

    pub fn embed(&self, v: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(self.full_dim);
        for (k, &i) in self.indices.iter().enumerate() {
            out[i] = v[k];
        }
        out
    }

    /// Weight of `v` outside the span.
    pub fn outside_weight(&self, v: &StateVector) -> f64 {
        let inside: f64 = self.indices.iter().map(|&i| v[i].norm_sqr()).sum();
        v.iter().map(|a| a.norm_sqr()).sum::<f64>() - inside
    }
}
