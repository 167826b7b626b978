//! The group algebra `F_p(Q)` of a small pc group `Q`, free modules over it,
//! and collection in an extension of a pc group by such a module.

use std::fmt;

use serde::Serialize;

use crate::collector::{enumerate_normal_words, Collector, Item};
use crate::error::{Error, Result};
use crate::presentations::{NormalWord, PcPresentation, RelationId};

const FULL_TABLE_LIMIT: usize = 2048;

/// Multiplication data for a pc group `Q` small enough to enumerate.
///
/// Elements are identified with their rank: the position of their exponent
/// vector in lexicographic order, first generator most significant.
#[derive(Clone, Debug)]
pub struct GroupAlgebra {
    quotient: PcPresentation,
    p: u32,
    elements: Vec<NormalWord>,
    strides: Vec<usize>,
    /// `right[g][x]` is the rank of `x a_g`.
    right: Vec<Vec<u32>>,
    inverse: Vec<u32>,
    /// Row-major `q x q` table of `x y`, present for small `q`.
    table: Option<Vec<u32>>,
}

impl GroupAlgebra {
    pub fn new(quotient: &PcPresentation, p: u32, ceiling: u64) -> Result<Self> {
        let elements = enumerate_normal_words(quotient.primes(), ceiling)?;
        let q = elements.len();
        let r = quotient.len();
        let mut strides = vec![1usize; r];
        for i in (0..r.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * quotient.primes()[i + 1] as usize;
        }
        let collector = Collector::new(quotient);
        let rank_of = |w: &NormalWord| -> u32 {
            w.exponents()
                .iter()
                .zip(&strides)
                .map(|(&e, &s)| e as usize * s)
                .sum::<usize>() as u32
        };
        let mut right = Vec::with_capacity(r);
        for g in 0..r {
            let gen = quotient.generator(g);
            let row = elements
                .iter()
                .map(|x| collector.multiply(x, &gen).map(|y| rank_of(&y)))
                .collect::<Result<Vec<u32>>>()?;
            right.push(row);
        }
        let inverse = elements
            .iter()
            .map(|x| collector.invert(x).map(|y| rank_of(&y)))
            .collect::<Result<Vec<u32>>>()?;
        let mut alg = Self {
            quotient: quotient.clone(),
            p,
            elements,
            strides,
            right,
            inverse,
            table: None,
        };
        if q <= FULL_TABLE_LIMIT {
            let mut table = vec![0u32; q * q];
            for y in 0..q {
                match alg.elements[y].last_letter() {
                    None => {
                        for x in 0..q {
                            table[x * q] = x as u32;
                        }
                    }
                    Some((g, _)) => {
                        let prev = y - alg.strides[g];
                        for x in 0..q {
                            table[x * q + y] = alg.right[g][table[x * q + prev] as usize];
                        }
                    }
                }
            }
            alg.table = Some(table);
        }
        Ok(alg)
    }

    pub fn quotient(&self) -> &PcPresentation {
        &self.quotient
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    /// `|Q|`
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Number of pc generators of `Q`.
    pub fn generator_count(&self) -> usize {
        self.quotient.len()
    }

    pub fn elements(&self) -> &[NormalWord] {
        &self.elements
    }

    pub fn element(&self, rank: usize) -> &NormalWord {
        &self.elements[rank]
    }

    /// Rank of the image of a word of a larger group whose first generators
    /// are those of `Q` and whose remaining generators map to the identity.
    pub fn rank_of_prefix(&self, exps: &[u32]) -> usize {
        self.strides.iter().zip(exps).map(|(&s, &e)| s * e as usize).sum()
    }

    pub fn rank(&self, w: &NormalWord) -> usize {
        self.rank_of_prefix(w.exponents())
    }

    /// Rank of `x a_g`.
    pub fn times_generator(&self, x: usize, g: usize) -> usize {
        self.right[g][x] as usize
    }

    pub fn generator_table(&self, g: usize) -> &[u32] {
        &self.right[g]
    }

    pub fn inverse(&self, x: usize) -> usize {
        self.inverse[x] as usize
    }

    /// Rank of `x y`.
    pub fn product(&self, x: usize, y: usize) -> usize {
        match &self.table {
            Some(t) => t[x * self.order() + y] as usize,
            None => {
                let mut cur = x;
                for (g, e) in self.elements[y].letters() {
                    for _ in 0..e {
                        cur = self.right[g][cur] as usize;
                    }
                }
                cur
            }
        }
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement {
            p: self.p,
            coeffs: vec![0; self.order()],
        }
    }

    /// The group element of rank `x` as an algebra element.
    pub fn basis(&self, x: usize) -> AlgebraElement {
        let mut f = self.zero();
        f.coeffs[x] = 1;
        f
    }

    pub fn one(&self) -> AlgebraElement {
        self.basis(0)
    }

    fn check(&self, f: &AlgebraElement) -> Result<()> {
        if f.p != self.p || f.coeffs.len() != self.order() {
            return Err(Error::Mismatch(format!(
                "element over F_{} of length {} in an algebra over F_{} of dimension {}",
                f.p,
                f.coeffs.len(),
                self.p,
                self.order()
            )));
        }
        Ok(())
    }

    /// `f g` for the group element of rank `g`.
    pub fn act(&self, f: &AlgebraElement, g: usize) -> Result<AlgebraElement> {
        self.check(f)?;
        let mut out = self.zero();
        for (x, &c) in f.coeffs.iter().enumerate() {
            if c != 0 {
                out.coeffs[self.product(x, g)] = c;
            }
        }
        Ok(out)
    }

    /// Adds `c f g` into `acc` without checks.
    pub(crate) fn add_acted(&self, acc: &mut [u32], f: &[u32], g: usize, c: u32) {
        let p = self.p as u64;
        for (x, &v) in f.iter().enumerate() {
            if v != 0 {
                let y = self.product(x, g);
                acc[y] = ((acc[y] as u64 + v as u64 * c as u64) % p) as u32;
            }
        }
    }

    /// Convolution product.
    pub fn mul(&self, f: &AlgebraElement, g: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(f)?;
        self.check(g)?;
        let mut out = self.zero();
        for (y, &c) in g.coeffs.iter().enumerate() {
            if c != 0 {
                self.add_acted(&mut out.coeffs, &f.coeffs, y, c);
            }
        }
        Ok(out)
    }

    /// Writes an element as a sum of group elements, e.g. `1+b+a b^2`.
    pub fn display<'a>(&'a self, f: &'a AlgebraElement) -> impl fmt::Display + 'a {
        DisplayAlgebra { alg: self, f }
    }
}

struct DisplayAlgebra<'a> {
    alg: &'a GroupAlgebra,
    f: &'a AlgebraElement,
}

impl fmt::Display for DisplayAlgebra<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.alg.quotient.names();
        let mut first = true;
        for (x, &c) in self.f.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str("+")?;
            }
            first = false;
            if c != 1 {
                write!(f, "{c}*")?;
            }
            write!(f, "{}", self.alg.elements[x].display(names))?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// An element of `F_p(Q)` as a dense coefficient vector indexed by rank.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AlgebraElement {
    p: u32,
    coeffs: Vec<u32>,
}

impl AlgebraElement {
    pub fn from_coefficients(p: u32, coeffs: Vec<u32>) -> Self {
        let coeffs = coeffs.into_iter().map(|c| c % p).collect();
        Self { p, coeffs }
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn coefficients(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.coeffs.len() != other.coeffs.len() {
            return Err(Error::Mismatch(format!(
                "F_{} element of length {} against F_{} element of length {}",
                self.p,
                self.coeffs.len(),
                other.p,
                other.coeffs.len()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let p = self.p;
        Ok(Self {
            p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| (a + b) % p)
                .collect(),
        })
    }

    pub fn neg(&self) -> Self {
        let p = self.p;
        Self {
            p,
            coeffs: self.coeffs.iter().map(|&a| (p - a) % p).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u32) -> Self {
        let p = self.p as u64;
        Self {
            p: self.p,
            coeffs: self.coeffs.iter().map(|&a| (a as u64 * c as u64 % p) as u32).collect(),
        }
    }
}

/// An element `y_1^{f_1} ... y_s^{f_s}` of a free `F_p(Q)`-module.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ModuleWord {
    entries: Vec<AlgebraElement>,
}

impl ModuleWord {
    pub fn zero(alg: &GroupAlgebra, rank: usize) -> Self {
        Self {
            entries: vec![alg.zero(); rank],
        }
    }

    /// `y_i` with exponent `f`.
    pub fn single(alg: &GroupAlgebra, rank: usize, i: usize, f: AlgebraElement) -> Self {
        let mut w = Self::zero(alg, rank);
        w.entries[i] = f;
        w
    }

    pub fn from_entries(entries: Vec<AlgebraElement>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[AlgebraElement] {
        &self.entries
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(AlgebraElement::is_zero)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rank() != other.rank() {
            return Err(Error::Mismatch(format!(
                "module words of rank {} and {}",
                self.rank(),
                other.rank()
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { entries })
    }

    pub fn neg(&self) -> Self {
        Self {
            entries: self.entries.iter().map(AlgebraElement::neg).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// `w g` for the group element of rank `g`.
    pub fn act(&self, alg: &GroupAlgebra, g: usize) -> Result<Self> {
        let entries = self.entries.iter().map(|f| alg.act(f, g)).collect::<Result<Vec<_>>>()?;
        Ok(Self { entries })
    }

    /// Coordinates in the regular module, generator-major.
    pub fn flatten(&self) -> Vec<u32> {
        self.entries.iter().flat_map(|f| f.coeffs.iter().copied()).collect()
    }

    pub fn display<'a>(&'a self, alg: &'a GroupAlgebra, names: &'a [String]) -> impl fmt::Display + 'a {
        DisplayModule { w: self, alg, names }
    }
}

struct DisplayModule<'a> {
    w: &'a ModuleWord,
    alg: &'a GroupAlgebra,
    names: &'a [String],
}

impl fmt::Display for DisplayModule<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, e) in self.w.entries.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            f.write_str(&self.names[i])?;
            let terms: Vec<(usize, u32)> = e
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(x, &c)| (x, c))
                .collect();
            match terms.as_slice() {
                [(0, 1)] => {}
                [(x, 1)] if self.alg.elements[*x].letters().count() == 1 => {
                    write!(f, "^{}", self.alg.display(e))?;
                }
                _ => write!(f, "^({})", self.alg.display(e))?,
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// A letter of a word in an extension: a pc generator power or a module
/// generator with a group algebra exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Letter {
    Gen(usize, u32),
    Module(usize, AlgebraElement),
}

/// Normal form `v y_1^{f_1} ... y_s^{f_s}` in an extension.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ExtendedNormalWord {
    pub head: NormalWord,
    pub tail: ModuleWord,
}

/// Collection in an extension of a pc group `K` by a free `F_p(Q)`-module,
/// `Q = K / <a_{r+1}, ..., a_n>`, where chosen relations of `K` carry a
/// module generator as a tag.
#[derive(Clone, Debug)]
pub struct ExtendedCollector {
    collector: Collector,
    alg: GroupAlgebra,
    rank: usize,
}

impl ExtendedCollector {
    /// `tags` assigns module generator indices (below `rank`) to relations.
    pub fn new(base: &PcPresentation, alg: GroupAlgebra, tags: &[(RelationId, usize)], rank: usize) -> Result<Self> {
        let r = alg.generator_count();
        if r > base.len() || alg.quotient().primes() != &base.primes()[..r] {
            return Err(Error::Mismatch(
                "group algebra is not over a head quotient of the base group".into(),
            ));
        }
        let mut collector = Collector::new(base);
        for &(rel, t) in tags {
            if t >= rank {
                return Err(Error::OutOfRange { index: t, limit: rank });
            }
            collector.set_mark(rel, t as u32);
        }
        Ok(Self { collector, alg, rank })
    }

    pub fn collector(&self) -> &Collector {
        &self.collector
    }

    pub fn algebra(&self) -> &GroupAlgebra {
        &self.alg
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn identity(&self) -> ExtendedNormalWord {
        ExtendedNormalWord {
            head: self.collector.identity(),
            tail: ModuleWord::zero(&self.alg, self.rank),
        }
    }

    /// Image in `Q` of a normal word of `K`.
    pub fn head_rank(&self, w: &NormalWord) -> usize {
        self.alg.rank_of_prefix(w.exponents())
    }

    /// Collects `letters` to the right of the normal word `start`; returns
    /// the new head and the module part produced along the way.
    fn run(&self, start: &NormalWord, letters: &[Letter]) -> Result<(NormalWord, Vec<Vec<u32>>)> {
        let q = self.alg.order();
        let rank = self.rank as u32;
        let mut stack = Vec::with_capacity(letters.len());
        for (idx, l) in letters.iter().enumerate().rev() {
            match l {
                Letter::Gen(g, e) => {
                    if *g >= self.collector.len() {
                        return Err(Error::OutOfRange {
                            index: *g,
                            limit: self.collector.len(),
                        });
                    }
                    stack.push(Item::Gen(*g, *e));
                }
                Letter::Module(i, f) => {
                    if *i >= self.rank {
                        return Err(Error::OutOfRange {
                            index: *i,
                            limit: self.rank,
                        });
                    }
                    if f.p != self.alg.p || f.coeffs.len() != q {
                        return Err(Error::Mismatch("module letter over a different algebra".into()));
                    }
                    stack.push(Item::Mark(rank + idx as u32));
                }
            }
        }
        // Entry (i, x) counts y_i standing where the head so far has
        // inverse image x in Q.
        let mut pending = vec![vec![0u32; q]; self.rank];
        let p = self.alg.p;
        let mut exps = start.exponents().to_vec();
        self.collector.run(&mut exps, &mut stack, &mut |m, h| {
            let inv = self.alg.inverse(self.alg.rank_of_prefix(h));
            if m < rank {
                let slot = &mut pending[m as usize][inv];
                *slot = (*slot + 1) % p;
            } else if let Letter::Module(i, f) = &letters[(m - rank) as usize] {
                self.alg.add_acted(&mut pending[*i], &f.coeffs, inv, 1);
            }
        })?;
        let head = NormalWord::from_exponents(exps);
        let fin = self.head_rank(&head);
        let tail = pending
            .iter()
            .map(|row| {
                let mut out = vec![0u32; q];
                self.alg.add_acted(&mut out, row, fin, 1);
                out
            })
            .collect();
        Ok((head, tail))
    }

    fn to_module(&self, tail: Vec<Vec<u32>>) -> ModuleWord {
        ModuleWord {
            entries: tail
                .into_iter()
                .map(|coeffs| AlgebraElement { p: self.alg.p, coeffs })
                .collect(),
        }
    }

    /// Collects an arbitrary word into normal form.
    pub fn collect(&self, letters: &[Letter]) -> Result<ExtendedNormalWord> {
        let (head, tail) = self.run(&self.collector.identity(), letters)?;
        Ok(ExtendedNormalWord {
            head,
            tail: self.to_module(tail),
        })
    }

    /// Collects a word in the pc generators only.
    pub fn collect_generators(&self, word: &[usize]) -> Result<ExtendedNormalWord> {
        let letters: Vec<Letter> = word.iter().map(|&g| Letter::Gen(g, 1)).collect();
        self.collect(&letters)
    }

    fn check(&self, w: &ExtendedNormalWord) -> Result<()> {
        if w.head.len() != self.collector.len() || w.tail.rank() != self.rank {
            return Err(Error::Mismatch("extended word of the wrong shape".into()));
        }
        Ok(())
    }

    pub fn multiply(&self, u: &ExtendedNormalWord, v: &ExtendedNormalWord) -> Result<ExtendedNormalWord> {
        self.check(u)?;
        self.check(v)?;
        let letters: Vec<Letter> = v.head.letters().map(|(g, e)| Letter::Gen(g, e)).collect();
        let (head, tags) = self.run(&u.head, &letters)?;
        let moved = u.tail.act(&self.alg, self.head_rank(&v.head))?;
        let tail = moved.add(&self.to_module(tags))?.add(&v.tail)?;
        Ok(ExtendedNormalWord { head, tail })
    }

    pub fn invert(&self, u: &ExtendedNormalWord) -> Result<ExtendedNormalWord> {
        self.check(u)?;
        let inv = self.collector.invert(&u.head)?;
        let letters: Vec<Letter> = inv.letters().map(|(g, e)| Letter::Gen(g, e)).collect();
        let (head, tags) = self.run(&u.head, &letters)?;
        if !head.is_identity() {
            return Err(Error::Internal("base inverse does not cancel".into()));
        }
        let moved = u.tail.act(&self.alg, self.head_rank(&inv))?;
        let tail = moved.add(&self.to_module(tags))?.neg();
        Ok(ExtendedNormalWord { head: inv, tail })
    }

    pub fn power(&self, u: &ExtendedNormalWord, mut e: u64) -> Result<ExtendedNormalWord> {
        let mut base = u.clone();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.multiply(&acc, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = self.multiply(&base, &base)?;
            }
        }
        Ok(acc)
    }

    pub fn display<'a>(&'a self, w: &'a ExtendedNormalWord, module_names: &'a [String]) -> impl fmt::Display + 'a {
        DisplayExtended {
            ec: self,
            w,
            module_names,
        }
    }
}

struct DisplayExtended<'a> {
    ec: &'a ExtendedCollector,
    w: &'a ExtendedNormalWord,
    module_names: &'a [String],
}

impl fmt::Display for DisplayExtended<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.ec.collector.presentation().names();
        let head_trivial = self.w.head.is_identity();
        if !head_trivial {
            write!(f, "{}", self.w.head.display(names))?;
        }
        if !self.w.tail.is_zero() {
            if !head_trivial {
                f.write_str(" ")?;
            }
            write!(f, "{}", self.w.tail.display(&self.ec.alg, self.module_names))?;
        } else if head_trivial {
            f.write_str("1")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collector::quotient_by_tail;
    use crate::presentations::parse_pc_presentation;

    const S4: &str = "{ a, b, c, d | a^2 =: c, b^a = b^2 c, b^3, c^a = c, c^b =: d, c^2,
        d^a = cd, d^b = cd, d^c = d, d^2 }";

    fn s3_algebra() -> GroupAlgebra {
        let s4 = parse_pc_presentation(S4).unwrap();
        GroupAlgebra::new(&quotient_by_tail(&s4, 2).unwrap(), 2, 1000).unwrap()
    }

    #[test]
    fn characteristic_two() {
        let alg = s3_algebra();
        let b = alg.basis(1);
        assert!(b.add(&b).unwrap().is_zero());
    }

    #[test]
    fn action_returns_after_order() {
        let alg = s3_algebra();
        let one = alg.one();
        let b = alg.act(&one, 1).unwrap();
        let back = alg.act(&b, 2).unwrap();
        assert_eq!(back, one);
    }

    #[test]
    fn one_plus_b_times_a() {
        let alg = s3_algebra();
        let f = alg.one().add(&alg.basis(1)).unwrap();
        let fa = alg.act(&f, 3).unwrap();
        // a has rank 3 and a b^2 rank 5; b a = a b^2.
        let mut expect = alg.zero();
        expect.coeffs[3] = 1;
        expect.coeffs[5] = 1;
        assert_eq!(fa, expect);
        assert_eq!(alg.display(&fa).to_string(), "a+a b^2");
        assert_eq!(alg.mul(&f, &alg.basis(3)).unwrap(), expect);
    }

    #[test]
    fn right_action_law() {
        let alg = s3_algebra();
        let f = AlgebraElement::from_coefficients(2, vec![1, 0, 1, 1, 0, 1]);
        for g in 0..6 {
            for h in 0..6 {
                let lhs = alg.act(&alg.act(&f, g).unwrap(), h).unwrap();
                let rhs = alg.act(&f, alg.product(g, h)).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn mismatched_shapes() {
        let alg = s3_algebra();
        let f = AlgebraElement::from_coefficients(3, vec![0; 6]);
        assert!(alg.act(&f, 0).is_err());
        assert!(alg.one().add(&f).is_err());
    }
}
