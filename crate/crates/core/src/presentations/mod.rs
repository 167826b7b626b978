//! Finitely presented groups, L-series specifications and power-conjugate
//! presentations, together with their text formats.
//!
//! The text grammar is shared by all three kinds of input:
//!
//! ```text
//! fp group:   { a, b | (ab)^2 b^-6, a^4 = b, [a, b] }
//! series:     [(2,1), (3,1), (2,2)]
//! pc group:   { a, b, c | a^2 =: c, b^a = b^2 c, b^3, c^a = c, c^b = c, c^2 }
//!             weights [(1,1), (2,1), (3,1)]
//! ```
//!
//! Juxtaposition is multiplication; generator names are split greedily
//! against the declared names, so `ab` means `a b` when only `a` and `b` are
//! declared. `x^y` conjugates (`y^-1 x y`) and `[u, v]` is `u^-1 v^-1 u v`
//! (left-normed for more arguments).

mod parse;
mod pc;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

pub use parse::{parse_fp_presentation, parse_lspec, parse_pc_presentation, parse_pc_word};
pub use pc::{Definition, NormalWord, PcPresentation, RelationId, Weight};

/// A freely reduced word in the generators of a finitely presented group.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct FreeWord {
    letters: Vec<(usize, i64)>,
}

impl FreeWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn generator(g: usize) -> Self {
        Self { letters: vec![(g, 1)] }
    }

    /// Builds a word from arbitrary letters, freely reducing as it goes.
    pub fn from_letters<I: IntoIterator<Item = (usize, i64)>>(letters: I) -> Self {
        let mut out: Vec<(usize, i64)> = Vec::new();
        for (g, e) in letters {
            if e == 0 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.0 == g => {
                    last.1 += e;
                    if last.1 == 0 {
                        out.pop();
                    }
                }
                _ => out.push((g, e)),
            }
        }
        Self { letters: out }
    }

    pub fn letters(&self) -> &[(usize, i64)] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Sum of the absolute values of the exponents.
    pub fn length(&self) -> u64 {
        self.letters.iter().map(|&(_, e)| e.unsigned_abs()).sum()
    }

    pub fn inverse(&self) -> Self {
        Self {
            letters: self.letters.iter().rev().map(|&(g, e)| (g, -e)).collect(),
        }
    }

    pub fn concat(&self, other: &FreeWord) -> Self {
        Self::from_letters(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let reps = e.unsigned_abs() as usize;
        Self::from_letters(std::iter::repeat_n(base.letters.iter().copied(), reps).flatten())
    }

    /// `by^-1 self by`
    pub fn conjugate(&self, by: &FreeWord) -> Self {
        by.inverse().concat(self).concat(by)
    }

    /// `u^-1 v^-1 u v`
    pub fn commutator(u: &FreeWord, v: &FreeWord) -> Self {
        u.inverse().concat(&v.inverse()).concat(u).concat(v)
    }

    /// Largest generator index referenced, if any.
    pub fn max_generator(&self) -> Option<usize> {
        self.letters.iter().map(|&(g, _)| g).max()
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        DisplayFreeWord { word: self, names }
    }
}

struct DisplayFreeWord<'a> {
    word: &'a FreeWord,
    names: &'a [String],
}

impl fmt::Display for DisplayFreeWord<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_identity() {
            return f.write_str("1");
        }
        for (idx, &(g, e)) in self.word.letters.iter().enumerate() {
            if idx > 0 {
                f.write_str(" ")?;
            }
            f.write_str(&self.names[g])?;
            if e != 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// A finitely presented group `{ g_1, ..., g_b | r_1, ..., r_m }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FpPresentation {
    generators: Vec<String>,
    relators: Vec<FreeWord>,
}

impl FpPresentation {
    pub fn new(generators: Vec<String>, relators: Vec<FreeWord>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidPresentation(
                "a finitely presented group needs at least one generator".into(),
            ));
        }
        for (i, name) in generators.iter().enumerate() {
            if generators[..i].contains(name) {
                return Err(Error::InvalidPresentation(format!("duplicate generator name {name:?}")));
            }
        }
        for r in &relators {
            if let Some(g) = r.max_generator() {
                if g >= generators.len() {
                    return Err(Error::OutOfRange {
                        index: g,
                        limit: generators.len(),
                    });
                }
            }
        }
        Ok(Self { generators, relators })
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relators(&self) -> &[FreeWord] {
        &self.relators
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }
}

impl fmt::Display for FpPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{ {} |", self.generators.join(", "))?;
        for (i, r) in self.relators.iter().enumerate() {
            let sep = if i == 0 { " " } else { ", " };
            write!(f, "{sep}{}", r.display(&self.generators))?;
        }
        f.write_str(" }")
    }
}

pub(crate) fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A list `[(p_1, c_1), ..., (p_k, c_k)]` of primes and exponent-p classes
/// describing a soluble L-series.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct LSpec {
    pairs: Vec<(u32, usize)>,
}

impl LSpec {
    pub fn new(pairs: Vec<(u32, usize)>) -> Result<Self> {
        for (idx, &(p, c)) in pairs.iter().enumerate() {
            if !is_prime(p as u64) {
                return Err(Error::InvalidSeries(format!("{p} is not prime")));
            }
            if c < 1 {
                return Err(Error::InvalidSeries(format!(
                    "class of pair {} must be positive",
                    idx + 1
                )));
            }
            if idx > 0 && pairs[idx - 1].0 == p {
                return Err(Error::InvalidSeries(format!(
                    "adjacent pairs {} and {} share the prime {p}",
                    idx,
                    idx + 1
                )));
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(u32, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The series one exponent-`p` step deeper.
    pub fn lplus(&self, p: u32) -> LSpec {
        let mut pairs = self.pairs.clone();
        match pairs.last_mut() {
            Some(last) if last.0 == p => last.1 += 1,
            _ => pairs.push((p, 1)),
        }
        LSpec { pairs }
    }

    /// Drops the final pair when it belongs to `p`.
    pub fn lminus(&self, p: u32) -> LSpec {
        let mut pairs = self.pairs.clone();
        if pairs.last().is_some_and(|last| last.0 == p) {
            pairs.pop();
        }
        LSpec { pairs }
    }
}

impl fmt::Display for LSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (p, c)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "({p},{c})")?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn free_reduction_cancels() {
        let w = FreeWord::from_letters([(0, 2), (1, 1), (1, -1), (0, -2), (1, 3)]);
        assert_eq!(w.letters(), &[(1, 3)]);
    }

    #[test]
    fn lspec_rules() {
        assert!(LSpec::new(vec![(2, 1), (2, 1)]).is_err());
        assert!(LSpec::new(vec![(4, 1)]).is_err());
        assert!(LSpec::new(vec![(3, 0)]).is_err());
        let l = LSpec::new(vec![(2, 1), (3, 1)]).unwrap();
        assert_eq!(l.lplus(2).pairs(), &[(2, 1), (3, 1), (2, 1)]);
        assert_eq!(l.lplus(3).pairs(), &[(2, 1), (3, 2)]);
        let l3 = LSpec::new(vec![(2, 1), (3, 1), (2, 1)]).unwrap();
        assert_eq!(l3.lminus(2).pairs(), &[(2, 1), (3, 1)]);
        assert_eq!(l3.lminus(3), l3);
    }

    fn arb_letters() -> impl Strategy<Value = Vec<(usize, i64)>> {
        prop::collection::vec((0usize..3, -3i64..=3), 0..20)
    }

    proptest! {
        #[test]
        fn reduction_is_idempotent(letters in arb_letters()) {
            let w = FreeWord::from_letters(letters);
            let again = FreeWord::from_letters(w.letters().iter().copied());
            prop_assert_eq!(&again, &w);
            for pair in w.letters().windows(2) {
                prop_assert_ne!(pair[0].0, pair[1].0);
            }
            prop_assert!(w.letters().iter().all(|&(_, e)| e != 0));
        }

        #[test]
        fn inverse_cancels(letters in arb_letters()) {
            let w = FreeWord::from_letters(letters);
            prop_assert!(w.concat(&w.inverse()).is_identity());
        }
    }
}
