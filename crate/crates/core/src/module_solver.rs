//! Bases of finitely presented modules over `F_p(Q)` by linear algebra in
//! the free module, coordinates `(generator, group element)`.

use std::fmt;

use serde::Serialize;

use crate::error::{Ceiling, Error, Result};
use crate::group_algebra::{AlgebraElement, GroupAlgebra, ModuleWord};
use crate::presentations::{NormalWord, PcPresentation};

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    let (mut base, mut exp, mut acc) = (a as u64 % p as u64, p as u64 - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    acc as u32
}

/// A dense row over `F_p` supporting the operations of echelon reduction.
trait Row: Clone + Send + Sync {
    fn zeros(len: usize) -> Self;
    fn get(&self, c: usize) -> u32;
    fn set(&mut self, c: usize, v: u32);
    /// Highest nonzero column strictly below `bound`.
    fn last_nonzero_below(&self, bound: usize) -> Option<usize>;
    /// `self -= c * other`, where `other` vanishes beyond column `upto`.
    fn sub_scaled(&mut self, c: u32, other: &Self, p: u32, upto: usize);
    fn scale(&mut self, c: u32, p: u32);
    /// Moves entry `c` to `perm[c]`.
    fn permuted(&self, perm: &[u32]) -> Self;
    fn nonzero(&self) -> Vec<(usize, u32)>;
}

#[derive(Clone, Debug)]
struct Gf2Row {
    bits: Vec<u64>,
    len: usize,
}

impl Row for Gf2Row {
    fn zeros(len: usize) -> Self {
        Self {
            bits: vec![0; len.div_ceil(64)],
            len,
        }
    }

    fn get(&self, c: usize) -> u32 {
        ((self.bits[c / 64] >> (c % 64)) & 1) as u32
    }

    fn set(&mut self, c: usize, v: u32) {
        let mask = 1u64 << (c % 64);
        if v & 1 == 1 {
            self.bits[c / 64] |= mask;
        } else {
            self.bits[c / 64] &= !mask;
        }
    }

    fn last_nonzero_below(&self, bound: usize) -> Option<usize> {
        if bound == 0 {
            return None;
        }
        let top = bound - 1;
        let mut w = top / 64;
        let mut word = self.bits[w] & (u64::MAX >> (63 - top % 64));
        loop {
            if word != 0 {
                return Some(w * 64 + 63 - word.leading_zeros() as usize);
            }
            if w == 0 {
                return None;
            }
            w -= 1;
            word = self.bits[w];
        }
    }

    fn sub_scaled(&mut self, c: u32, other: &Self, _p: u32, upto: usize) {
        if c & 1 == 1 {
            let words = upto / 64 + 1;
            for (a, b) in self.bits[..words].iter_mut().zip(&other.bits[..words]) {
                *a ^= b;
            }
        }
    }

    fn scale(&mut self, c: u32, _p: u32) {
        if c & 1 == 0 {
            self.bits.iter_mut().for_each(|w| *w = 0);
        }
    }

    fn permuted(&self, perm: &[u32]) -> Self {
        let mut out = Self::zeros(self.len);
        for (c, _) in self.nonzero() {
            let d = perm[c] as usize;
            out.bits[d / 64] |= 1 << (d % 64);
        }
        out
    }

    fn nonzero(&self) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        for (w, &word) in self.bits.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                let b = rest.trailing_zeros() as usize;
                out.push((w * 64 + b, 1));
                rest &= rest - 1;
            }
        }
        out
    }
}

/// Remainder by a fixed divisor using two multiplications.
#[derive(Clone, Copy)]
struct FastMod {
    m: u64,
    p: u32,
}

impl FastMod {
    fn new(p: u32) -> Self {
        Self {
            m: u64::MAX / p as u64 + 1,
            p,
        }
    }

    fn reduce(self, a: u32) -> u32 {
        let low = self.m.wrapping_mul(a as u64);
        ((low as u128 * self.p as u128) >> 64) as u32
    }
}

/// Row over `F_p` with lazily reduced entries: values are kept below
/// `2^32` and read modulo `p`.
#[derive(Clone, Debug)]
struct GfpRow {
    vals: Vec<u32>,
    p: u32,
    pending: u32,
}

impl GfpRow {
    fn normalize(&mut self) {
        let fm = FastMod::new(self.p);
        for a in self.vals.iter_mut() {
            *a = fm.reduce(*a);
        }
        self.pending = 0;
    }

    /// Accumulations of `(p-1)^2` that fit on top of a reduced row.
    fn headroom(p: u32) -> u32 {
        let sq = (p as u64 - 1) * (p as u64 - 1);
        ((u32::MAX as u64 - p as u64) / sq.max(1)).min(u32::MAX as u64) as u32
    }
}

impl Row for GfpRow {
    fn zeros(len: usize) -> Self {
        Self {
            vals: vec![0; len],
            p: 0,
            pending: 0,
        }
    }

    fn get(&self, c: usize) -> u32 {
        if self.p == 0 {
            self.vals[c]
        } else {
            self.vals[c] % self.p
        }
    }

    fn set(&mut self, c: usize, v: u32) {
        self.vals[c] = v;
    }

    fn last_nonzero_below(&self, bound: usize) -> Option<usize> {
        if self.p == 0 {
            return self.vals[..bound].iter().rposition(|&v| v != 0);
        }
        let fm = FastMod::new(self.p);
        self.vals[..bound].iter().rposition(|&v| v != 0 && fm.reduce(v) != 0)
    }

    fn sub_scaled(&mut self, c: u32, other: &Self, p: u32, upto: usize) {
        if c == 0 {
            return;
        }
        if self.p == 0 {
            self.p = p;
        }
        if self.pending >= Self::headroom(p) {
            self.normalize();
        }
        let m = p - c;
        for (a, &b) in self.vals[..=upto].iter_mut().zip(&other.vals[..=upto]) {
            *a += m * b;
        }
        self.pending += 1;
    }

    fn scale(&mut self, c: u32, p: u32) {
        self.p = p;
        let fm = FastMod::new(p);
        for a in self.vals.iter_mut() {
            *a = fm.reduce(fm.reduce(*a) * c);
        }
        self.pending = 0;
    }

    fn permuted(&self, perm: &[u32]) -> Self {
        let mut out = Self::zeros(self.vals.len());
        out.p = self.p;
        for (c, &v) in self.vals.iter().enumerate() {
            if v != 0 {
                out.vals[perm[c] as usize] = v;
            }
        }
        out.pending = self.pending;
        out
    }

    fn nonzero(&self) -> Vec<(usize, u32)> {
        (0..self.vals.len())
            .map(|c| (c, self.get(c)))
            .filter(|&(_, v)| v != 0)
            .collect()
    }
}

/// Rows in echelon form; each row is monic at its last nonzero column.
struct Echelon<R: Row> {
    p: u32,
    len: usize,
    rows: Vec<R>,
    pivot_row: Vec<u32>,
}

const NO_PIVOT: u32 = u32::MAX;

impl<R: Row> Echelon<R> {
    fn new(p: u32, len: usize) -> Self {
        Self {
            p,
            len,
            rows: Vec::new(),
            pivot_row: vec![NO_PIVOT; len],
        }
    }

    /// Reduces `v` to the unique representative supported off the pivots.
    fn reduce(&self, v: &mut R) {
        let mut bound = self.len;
        while let Some(c) = v.last_nonzero_below(bound) {
            let r = self.pivot_row[c];
            if r != NO_PIVOT {
                let coeff = v.get(c);
                v.sub_scaled(coeff, &self.rows[r as usize], self.p, c);
            }
            bound = c;
        }
    }

    /// Reduces only until the last entry is a new pivot; returns its row.
    fn insert(&mut self, mut v: R) -> Option<usize> {
        let mut bound = self.len;
        loop {
            let c = v.last_nonzero_below(bound)?;
            let r = self.pivot_row[c];
            if r == NO_PIVOT {
                let lead = v.get(c);
                v.scale(inv_mod(lead, self.p), self.p);
                self.pivot_row[c] = self.rows.len() as u32;
                self.rows.push(v);
                return Some(self.rows.len() - 1);
            }
            let coeff = v.get(c);
            v.sub_scaled(coeff, &self.rows[r as usize], self.p, c);
            bound = c;
        }
    }
}

/// Limits for the solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverLimits {
    pub max_dim: usize,
    pub max_columns: usize,
}

impl Default for SolverLimits {
    fn default() -> Self {
        Self {
            max_dim: 4096,
            max_columns: 1 << 24,
        }
    }
}

/// Where a basis vector of the quotient comes from: free generator
/// `generator` translated by the group element of rank `element`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BasisLabel {
    pub generator: usize,
    pub element: usize,
}

/// Square or rectangular matrix over `F_p`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        Self {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(p: u32, rows: Vec<Vec<u32>>, cols: usize) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged matrix rows");
            data.extend(row.into_iter().map(|v| v % p));
        }
        Self { p, rows: n, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.rows, "matrix shapes do not chain");
        let p = self.p as u64;
        let mut out = FpMatrix::zeros(self.p, self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            let mut acc = vec![0u64; other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k] as u64;
                if a == 0 {
                    continue;
                }
                for (j, slot) in acc.iter_mut().enumerate() {
                    *slot += a * other.data[k * other.cols + j] as u64;
                }
                if k % 1024 == 1023 {
                    acc.iter_mut().for_each(|s| *s %= p);
                }
            }
            for (d, a) in dst.iter_mut().zip(acc) {
                *d = (a % p) as u32;
            }
        }
        out
    }

    /// `v M` for a row vector `v`.
    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.rows, "vector length does not match");
        let p = self.p as u64;
        let mut acc = vec![0u64; self.cols];
        for (i, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, slot) in acc.iter_mut().enumerate() {
                *slot = (*slot + a as u64 * self.data[i * self.cols + j] as u64) % p;
            }
        }
        acc.into_iter().map(|a| a as u32).collect()
    }

    pub fn pow(&self, mut e: u64) -> FpMatrix {
        let mut base = self.clone();
        let mut acc = FpMatrix::identity(self.p, self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn inverse(&self) -> Option<FpMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let p = self.p;
        let mut a = self.clone();
        let mut inv = FpMatrix::identity(p, n);
        for col in 0..n {
            let piv = (col..n).find(|&r| a.get(r, col) != 0)?;
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let s = inv_mod(a.get(col, col), p);
            for j in 0..n {
                a.data[col * n + j] = (a.data[col * n + j] as u64 * s as u64 % p as u64) as u32;
                inv.data[col * n + j] = (inv.data[col * n + j] as u64 * s as u64 % p as u64) as u32;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f == 0 {
                    continue;
                }
                let m = (p - f) as u64;
                for j in 0..n {
                    a.data[r * n + j] = ((a.data[r * n + j] as u64 + m * a.data[col * n + j] as u64) % p as u64) as u32;
                    inv.data[r * n + j] =
                        ((inv.data[r * n + j] as u64 + m * inv.data[col * n + j] as u64) % p as u64) as u32;
                }
            }
        }
        Some(inv)
    }
}

impl fmt::Display for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                f.write_str("\n")?;
            }
            let row: Vec<String> = self.row(i).iter().map(u32::to_string).collect();
            f.write_str(&row.join(" "))?;
        }
        Ok(())
    }
}

/// An `F_p`-basis of a quotient of a free `F_p(Q)`-module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModuleBasis {
    pub dim: usize,
    pub p: u32,
    /// Right action of each pc generator of `Q`; row `i` is the image of
    /// basis vector `i`.
    pub action: Vec<FpMatrix>,
    /// Coordinates of each free generator.
    pub gen_images: Vec<Vec<u32>>,
    pub basis_labels: Vec<BasisLabel>,
}

/// Computes the quotient of the free module of rank `rank` over `F_p(Q)` by
/// the submodule generated by `relators`.
pub fn module_basis(
    alg: &GroupAlgebra,
    rank: usize,
    relators: &[ModuleWord],
    limits: SolverLimits,
) -> Result<ModuleBasis> {
    if alg.characteristic() >= 1 << 16 {
        return Err(Error::InvalidSeries(format!(
            "prime {} is too large for the module solver",
            alg.characteristic()
        )));
    }
    if let Some(rel) = relators.iter().find(|r| r.rank() != rank) {
        return Err(Error::Mismatch(format!(
            "relator of rank {} for a module of rank {rank}",
            rel.rank()
        )));
    }
    let reduced = eliminate(alg, rank, relators);
    let basis = if alg.characteristic() == 2 {
        solve::<Gf2Row>(alg, reduced.kept.len(), &reduced.relators, limits)?
    } else {
        solve::<GfpRow>(alg, reduced.kept.len(), &reduced.relators, limits)?
    };
    Ok(reduced.restore(alg, rank, basis))
}

type Entries = Vec<Option<Vec<u32>>>;

/// Result of removing generators that some relator expresses in the others.
struct Reduced {
    kept: Vec<usize>,
    relators: Vec<ModuleWord>,
    /// `(t, expr)` meaning `y_t = expr`, in elimination order.
    substitutions: Vec<(usize, Entries)>,
}

fn support(e: &[u32]) -> usize {
    e.iter().filter(|&&c| c != 0).count()
}

/// Convolution `f g` on coefficient vectors.
fn convolve(alg: &GroupAlgebra, f: &[u32], g: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32; f.len()];
    for (y, &c) in g.iter().enumerate() {
        if c != 0 {
            alg.add_acted(&mut out, f, y, c);
        }
    }
    out
}

fn add_into(acc: &mut Option<Vec<u32>>, v: &[u32], p: u32) {
    match acc {
        Some(a) => {
            for (x, &y) in a.iter_mut().zip(v) {
                *x = (*x + y) % p;
            }
            if a.iter().all(|&c| c == 0) {
                *acc = None;
            }
        }
        None => {
            if v.iter().any(|&c| c != 0) {
                *acc = Some(v.to_vec());
            }
        }
    }
}

fn eliminate(alg: &GroupAlgebra, rank: usize, relators: &[ModuleWord]) -> Reduced {
    let p = alg.characteristic();
    let mut rels: Vec<Entries> = relators
        .iter()
        .map(|r| {
            r.entries()
                .iter()
                .map(|f| (!f.is_zero()).then(|| f.coefficients().to_vec()))
                .collect()
        })
        .collect();
    let mut alive = vec![true; rank];
    let mut substitutions = Vec::new();
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        for (ri, rel) in rels.iter().enumerate() {
            let weight: usize = rel.iter().flatten().map(|e| support(e)).sum();
            if weight == 0 || best.is_some_and(|(w, _, _)| w <= weight) {
                continue;
            }
            if let Some(t) = (0..rank)
                .rev()
                .find(|&t| rel[t].as_ref().is_some_and(|e| support(e) == 1))
            {
                best = Some((weight, ri, t));
            }
        }
        let Some((_, ri, t)) = best else { break };
        let rel = rels.swap_remove(ri);
        let entry = rel[t].as_ref().expect("pivot entry");
        let g = entry.iter().position(|&c| c != 0).expect("monomial");
        let scale = (p - inv_mod(entry[g], p)) % p;
        let mut ginv = vec![0u32; alg.order()];
        ginv[alg.inverse(g)] = scale;
        let expr: Entries = rel
            .iter()
            .enumerate()
            .map(|(i, e)| match e {
                Some(e) if i != t => Some(convolve(alg, e, &ginv)),
                _ => None,
            })
            .collect();
        for other in rels.iter_mut() {
            let Some(f) = other[t].take() else { continue };
            for (i, e) in expr.iter().enumerate() {
                if let Some(e) = e {
                    add_into(&mut other[i], &convolve(alg, e, &f), p);
                }
            }
        }
        rels.retain(|r| r.iter().any(Option::is_some));
        alive[t] = false;
        substitutions.push((t, expr));
    }
    let kept: Vec<usize> = (0..rank).filter(|&i| alive[i]).collect();
    let relators = rels
        .into_iter()
        .map(|r| {
            ModuleWord::from_entries(
                kept.iter()
                    .map(|&i| match &r[i] {
                        Some(e) => AlgebraElement::from_coefficients(p, e.clone()),
                        None => alg.zero(),
                    })
                    .collect(),
            )
        })
        .collect();
    Reduced {
        kept,
        relators,
        substitutions,
    }
}

impl Reduced {
    /// Extends a basis computed for the kept generators to all of them.
    fn restore(&self, alg: &GroupAlgebra, rank: usize, basis: ModuleBasis) -> ModuleBasis {
        let p = basis.p as u64;
        let dim = basis.dim;
        let mut gen_images: Vec<Option<Vec<u32>>> = vec![None; rank];
        for (k, &i) in self.kept.iter().enumerate() {
            gen_images[i] = Some(basis.gen_images[k].clone());
        }
        for (t, expr) in self.substitutions.iter().rev() {
            let mut acc = vec![0u64; dim];
            for (i, e) in expr.iter().enumerate() {
                let Some(e) = e else { continue };
                let v = gen_images[i].as_ref().expect("substituted in order");
                let orbit = basis.orbit(alg, v);
                for (x, &c) in e.iter().enumerate() {
                    if c != 0 {
                        for (a, &b) in acc.iter_mut().zip(&orbit[x]) {
                            *a = (*a + c as u64 * b as u64) % p;
                        }
                    }
                }
            }
            gen_images[*t] = Some(acc.into_iter().map(|a| a as u32).collect());
        }
        let basis_labels = basis
            .basis_labels
            .iter()
            .map(|l| BasisLabel {
                generator: self.kept[l.generator],
                element: l.element,
            })
            .collect();
        ModuleBasis {
            dim,
            p: basis.p,
            action: basis.action,
            gen_images: gen_images
                .into_iter()
                .map(|v| v.expect("every generator restored"))
                .collect(),
            basis_labels,
        }
    }
}

fn column_permutations(alg: &GroupAlgebra, rank: usize) -> Vec<Vec<u32>> {
    let q = alg.order();
    (0..alg.generator_count())
        .map(|g| {
            let table = alg.generator_table(g);
            (0..rank * q)
                .map(|c| ((c / q) * q + table[c % q] as usize) as u32)
                .collect()
        })
        .collect()
}

fn spin<R: Row>(
    alg: &GroupAlgebra,
    rank: usize,
    relators: &[ModuleWord],
    limits: SolverLimits,
) -> Result<(Echelon<R>, Vec<Vec<u32>>)> {
    let p = alg.characteristic();
    let q = alg.order();
    let len = rank * q;
    if len > limits.max_columns {
        return Err(Error::CeilingExceeded(
            Ceiling::SolverColumns,
            len as u128,
            limits.max_columns as u128,
        ));
    }
    let perms = column_permutations(alg, rank);
    let mut ech = Echelon::<R>::new(p, len);
    let mut queue = Vec::new();
    for rel in relators {
        if ech.rows.len() == len {
            break;
        }
        if rel.rank() != rank {
            return Err(Error::Mismatch(format!(
                "relator of rank {} for a module of rank {rank}",
                rel.rank()
            )));
        }
        let mut v = R::zeros(len);
        for (c, val) in rel.flatten().into_iter().enumerate() {
            if val != 0 {
                v.set(c, val % p);
            }
        }
        if let Some(r) = ech.insert(v) {
            queue.push(r);
        }
        while let Some(r) = queue.pop() {
            if ech.rows.len() == len {
                return Ok((ech, perms));
            }
            for perm in &perms {
                let img = ech.rows[r].permuted(perm);
                if let Some(nr) = ech.insert(img) {
                    queue.push(nr);
                }
            }
        }
    }
    Ok((ech, perms))
}

fn solve<R: Row>(
    alg: &GroupAlgebra,
    rank: usize,
    relators: &[ModuleWord],
    limits: SolverLimits,
) -> Result<ModuleBasis> {
    let p = alg.characteristic();
    let q = alg.order();
    let len = rank * q;
    let (ech, perms) = spin::<R>(alg, rank, relators, limits)?;
    let free: Vec<usize> = (0..len).filter(|&c| ech.pivot_row[c] == NO_PIVOT).collect();
    let dim = free.len();
    if dim > limits.max_dim {
        return Err(Error::CeilingExceeded(
            Ceiling::ModuleDimension,
            dim as u128,
            limits.max_dim as u128,
        ));
    }
    let mut coord_of = vec![u32::MAX; len];
    for (i, &c) in free.iter().enumerate() {
        coord_of[c] = i as u32;
    }
    let coords = |c: usize| -> Vec<u32> {
        let mut v = R::zeros(len);
        v.set(c, 1);
        ech.reduce(&mut v);
        let mut out = vec![0u32; dim];
        for (col, val) in v.nonzero() {
            debug_assert_ne!(coord_of[col], u32::MAX);
            out[coord_of[col] as usize] = val;
        }
        out
    };
    let action = perms
        .iter()
        .map(|perm| {
            let rows = free.iter().map(|&c| coords(perm[c] as usize)).collect();
            FpMatrix::from_rows(p, rows, dim)
        })
        .collect();
    let gen_images = (0..rank).map(|i| coords(i * q)).collect();
    let basis_labels = free
        .iter()
        .map(|&c| BasisLabel {
            generator: c / q,
            element: c % q,
        })
        .collect();
    Ok(ModuleBasis {
        dim,
        p,
        action,
        gen_images,
        basis_labels,
    })
}

impl ModuleBasis {
    /// Matrix of the action of a normal word of `Q`.
    pub fn word_matrix(&self, w: &NormalWord) -> FpMatrix {
        let mut m = FpMatrix::identity(self.p, self.dim);
        for (g, e) in w.letters() {
            m = m.mul(&self.action[g].pow(e as u64));
        }
        m
    }

    /// `v g` for every element `g` of `Q`, indexed by rank.
    fn orbit(&self, alg: &GroupAlgebra, v: &[u32]) -> Vec<Vec<u32>> {
        let q = alg.order();
        let mut out: Vec<Option<Vec<u32>>> = vec![None; q];
        out[0] = Some(v.to_vec());
        let mut stack = vec![0usize];
        while let Some(x) = stack.pop() {
            for g in 0..alg.generator_count() {
                let y = alg.times_generator(x, g);
                if out[y].is_none() {
                    out[y] = Some(self.action[g].apply(out[x].as_ref().expect("visited")));
                    stack.push(y);
                }
            }
        }
        out.into_iter()
            .map(|o| o.expect("generators reach every element"))
            .collect()
    }

    /// Coordinates of an arbitrary module word.
    pub fn coordinates(&self, alg: &GroupAlgebra, w: &ModuleWord) -> Vec<u32> {
        let p = self.p as u64;
        let mut out = vec![0u64; self.dim];
        for (i, f) in w.entries().iter().enumerate() {
            for (x, &c) in f.coefficients().iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let v = self.word_matrix(alg.element(x)).apply(&self.gen_images[i]);
                for (slot, a) in out.iter_mut().zip(v) {
                    *slot = (*slot + c as u64 * a as u64) % p;
                }
            }
        }
        out.into_iter().map(|a| a as u32).collect()
    }

    pub fn dump(&self, alg: &GroupAlgebra) -> String {
        let names = alg.quotient().names();
        let mut out = format!("dimension {} over F_{}\n", self.dim, self.p);
        for (i, l) in self.basis_labels.iter().enumerate() {
            out.push_str(&format!(
                "b{} = y{}^({})\n",
                i + 1,
                l.generator + 1,
                alg.element(l.element).display(names)
            ));
        }
        for (g, m) in self.action.iter().enumerate() {
            out.push_str(&format!("action of {}:\n{}\n", names[g], m));
        }
        for (i, v) in self.gen_images.iter().enumerate() {
            let s: Vec<String> = v.iter().map(u32::to_string).collect();
            out.push_str(&format!("y{} -> [{}]\n", i + 1, s.join(" ")));
        }
        out
    }
}

/// Result of checking that action matrices satisfy the relations of `Q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepresentationReport {
    pub failures: Vec<String>,
}

impl RepresentationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verifies `A_i^{p_i} = A(v_ii)` and `A_k A_j = A_j A(v_jk)`.
pub fn check_representation(basis: &ModuleBasis, quotient: &PcPresentation) -> RepresentationReport {
    let names = quotient.names();
    let mut failures = Vec::new();
    if basis.action.len() != quotient.len() {
        failures.push(format!(
            "{} action matrices for {} generators",
            basis.action.len(),
            quotient.len()
        ));
        return RepresentationReport { failures };
    }
    for i in 0..quotient.len() {
        let lhs = basis.action[i].pow(quotient.primes()[i] as u64);
        if lhs != basis.word_matrix(quotient.power(i)) {
            failures.push(format!("{}^{}", names[i], quotient.primes()[i]));
        }
        for j in 0..i {
            let lhs = basis.action[i].mul(&basis.action[j]);
            let rhs = basis.action[j].mul(&basis.word_matrix(quotient.conjugate(j, i)));
            if lhs != rhs {
                failures.push(format!("{}^{}", names[i], names[j]));
            }
        }
    }
    RepresentationReport { failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collector::quotient_by_tail;
    use crate::group_algebra::AlgebraElement;
    use crate::presentations::parse_pc_presentation;
    use proptest::prelude::*;

    const S4: &str = "{ a, b, c, d | a^2 =: c, b^a = b^2 c, b^3, c^a = c, c^b =: d, c^2,
        d^a = cd, d^b = cd, d^c = d, d^2 }";

    fn s3(p: u32) -> GroupAlgebra {
        let s4 = parse_pc_presentation(S4).unwrap();
        GroupAlgebra::new(&quotient_by_tail(&s4, 2).unwrap(), p, 1000).unwrap()
    }

    #[test]
    fn free_module_is_regular() {
        let alg = s3(2);
        let basis = module_basis(&alg, 1, &[], SolverLimits::default()).unwrap();
        assert_eq!(basis.dim, 6);
        for (g, m) in basis.action.iter().enumerate() {
            for x in 0..6 {
                let y = alg.times_generator(x, g);
                for z in 0..6 {
                    assert_eq!(m.get(x, z), u32::from(z == y));
                }
            }
        }
        assert!(check_representation(&basis, alg.quotient()).passed());
    }

    #[test]
    fn killed_generator() {
        let alg = s3(2);
        let rel = ModuleWord::single(&alg, 1, 0, alg.one());
        let basis = module_basis(&alg, 1, &[rel], SolverLimits::default()).unwrap();
        assert_eq!(basis.dim, 0);
    }

    #[test]
    fn augmentation_quotient() {
        // y (1 + b) and y (1 + a) leave the trivial module in characteristic 3.
        let alg = s3(3);
        let one = alg.one();
        let rels = [
            ModuleWord::single(&alg, 1, 0, one.sub(&alg.basis(1)).unwrap()),
            ModuleWord::single(&alg, 1, 0, one.sub(&alg.basis(3)).unwrap()),
        ];
        let basis = module_basis(&alg, 1, &rels, SolverLimits::default()).unwrap();
        assert_eq!(basis.dim, 1);
        assert_eq!(basis.gen_images[0], vec![1]);
        assert!(check_representation(&basis, alg.quotient()).passed());
    }

    #[test]
    fn corrupted_action_fails_check() {
        let alg = s3(2);
        let mut basis = module_basis(&alg, 1, &[], SolverLimits::default()).unwrap();
        let v = basis.action[1].get(0, 0);
        basis.action[1].set(0, 0, v + 1);
        assert!(!check_representation(&basis, alg.quotient()).passed());
    }

    #[test]
    fn ceilings() {
        let alg = s3(2);
        let tight = SolverLimits {
            max_dim: 5,
            max_columns: 100,
        };
        assert!(matches!(
            module_basis(&alg, 1, &[], tight),
            Err(Error::CeilingExceeded(Ceiling::ModuleDimension, 6, 5))
        ));
        let narrow = SolverLimits {
            max_dim: 100,
            max_columns: 11,
        };
        assert!(matches!(
            module_basis(&alg, 2, &[], narrow),
            Err(Error::CeilingExceeded(Ceiling::SolverColumns, 12, 11))
        ));
    }

    #[test]
    fn matrix_inverse() {
        let m = FpMatrix::from_rows(5, vec![vec![1, 2], vec![3, 4]], 2);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), FpMatrix::identity(5, 2));
        let singular = FpMatrix::from_rows(5, vec![vec![1, 2], vec![2, 4]], 2);
        assert!(singular.inverse().is_none());
    }

    fn arb_relators(p: u32, rank: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
        prop::collection::vec(prop::collection::vec(0..p, rank * 6), 0..4)
    }

    fn to_words(alg: &GroupAlgebra, rank: usize, raw: &[Vec<u32>]) -> Vec<ModuleWord> {
        raw.iter()
            .map(|v| {
                ModuleWord::from_entries(
                    (0..rank)
                        .map(|i| {
                            AlgebraElement::from_coefficients(alg.characteristic(), v[i * 6..(i + 1) * 6].to_vec())
                        })
                        .collect(),
                )
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fast_mod_matches_remainder(p in 2u32..(1 << 16), a in any::<u32>()) {
            prop_assert_eq!(FastMod::new(p).reduce(a), a % p);
        }

        #[test]
        fn relators_vanish_and_representation_holds(raw in arb_relators(3, 2)) {
            let alg = s3(3);
            let rels = to_words(&alg, 2, &raw);
            let basis = module_basis(&alg, 2, &rels, SolverLimits::default()).unwrap();
            prop_assert!(check_representation(&basis, alg.quotient()).passed());
            for rel in &rels {
                prop_assert!(basis.coordinates(&alg, rel).iter().all(|&c| c == 0));
                for g in 0..6 {
                    let moved = rel.act(&alg, g).unwrap();
                    prop_assert!(basis.coordinates(&alg, &moved).iter().all(|&c| c == 0));
                }
            }
        }

        #[test]
        fn dimension_ignores_relator_order(raw in arb_relators(2, 2)) {
            let alg = s3(2);
            let rels = to_words(&alg, 2, &raw);
            let mut reversed = rels.clone();
            reversed.reverse();
            let a = module_basis(&alg, 2, &rels, SolverLimits::default()).unwrap();
            let b = module_basis(&alg, 2, &reversed, SolverLimits::default()).unwrap();
            prop_assert_eq!(a.dim, b.dim);
            prop_assert!(check_representation(&a, alg.quotient()).passed());
        }
    }
}
