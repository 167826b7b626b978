use std::fmt;
use std::ops::Index;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::presentations::is_prime;

/// Exponent vector `e_1 ... e_n` of a normal word `a_1^e_1 ... a_n^e_n`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct NormalWord(Vec<u32>);

impl NormalWord {
    pub fn identity(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Self(exps)
    }

    /// The word `a_g` in a presentation on `n` generators.
    pub fn generator(n: usize, g: usize) -> Self {
        let mut w = Self::identity(n);
        w.0[g] = 1;
        w
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponents_mut(&mut self) -> &mut [u32] {
        &mut self.0
    }

    pub fn into_exponents(self) -> Vec<u32> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Nonzero `(generator, exponent)` pairs in generator order.
    pub fn letters(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().enumerate().filter(|(_, &e)| e != 0).map(|(g, &e)| (g, e))
    }

    /// Last generator with a nonzero exponent.
    pub fn last_letter(&self) -> Option<(usize, u32)> {
        self.0
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &e)| e != 0)
            .map(|(g, &e)| (g, e))
    }

    /// First generator with a nonzero exponent.
    pub fn first_letter(&self) -> Option<(usize, u32)> {
        self.letters().next()
    }

    pub fn resized(&self, n: usize) -> Self {
        let mut v = self.0.clone();
        v.resize(n, 0);
        Self(v)
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        DisplayNormalWord { word: self, names }
    }
}

impl Index<usize> for NormalWord {
    type Output = u32;

    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

struct DisplayNormalWord<'a> {
    word: &'a NormalWord,
    names: &'a [String],
}

impl fmt::Display for DisplayNormalWord<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (g, e) in self.word.letters() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            f.write_str(&self.names[g])?;
            if e != 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// Position `(i, j)` of a generator in the L-series: it lies in layer
/// `L_{i,j-1} / L_{i,j}`. Both coordinates count from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Weight {
    pub pair: usize,
    pub class: usize,
}

impl Weight {
    pub fn new(pair: usize, class: usize) -> Self {
        Self { pair, class }
    }
}

/// A power relation `a_i^p = v_ii` or a conjugate relation `a_k^{a_j} = v_jk`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RelationId {
    Power(usize),
    Conjugate { j: usize, k: usize },
}

impl RelationId {
    /// Every relation of a presentation on `n` generators, ordered by the
    /// generator being powered or conjugated, conjugates before the power.
    pub fn all(n: usize) -> impl Iterator<Item = RelationId> {
        (0..n).flat_map(|k| {
            (0..k)
                .map(move |j| RelationId::Conjugate { j, k })
                .chain(std::iter::once(RelationId::Power(k)))
        })
    }

    pub fn display<'a>(&self, names: &'a [String], primes: &'a [u32]) -> String {
        match *self {
            RelationId::Power(i) => format!("{}^{}", names[i], primes[i]),
            RelationId::Conjugate { j, k } => format!("{}^{}", names[k], names[j]),
        }
    }
}

/// How a generator is defined in a labelled presentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Definition {
    /// The relation's right-hand side ends in the generator with exponent 1.
    Relation(RelationId),
    /// The generator is the last letter of the image of the given
    /// finitely presented generator.
    Image(usize),
}

/// A power-conjugate presentation with L-series weights and definitions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PcPresentation {
    names: Vec<String>,
    primes: Vec<u32>,
    powers: Vec<NormalWord>,
    /// `conjugates[k][j]` is the right-hand side of `a_k^{a_j}` for `j < k`.
    conjugates: Vec<Vec<NormalWord>>,
    weights: Vec<Weight>,
    definitions: Vec<Option<Definition>>,
}

impl PcPresentation {
    pub fn trivial() -> Self {
        Self {
            names: Vec::new(),
            primes: Vec::new(),
            powers: Vec::new(),
            conjugates: Vec::new(),
            weights: Vec::new(),
            definitions: Vec::new(),
        }
    }

    /// Validates every structural invariant before accepting the tables.
    pub fn new(
        names: Vec<String>,
        primes: Vec<u32>,
        powers: Vec<NormalWord>,
        conjugates: Vec<Vec<NormalWord>>,
        weights: Vec<Weight>,
        definitions: Vec<Option<Definition>>,
    ) -> Result<Self> {
        let pc = Self {
            names,
            primes,
            powers,
            conjugates,
            weights,
            definitions,
        };
        pc.validate()?;
        Ok(pc)
    }

    fn validate(&self) -> Result<()> {
        let n = self.names.len();
        let bad = |msg: String| Err(Error::InvalidPresentation(msg));
        if self.primes.len() != n
            || self.powers.len() != n
            || self.conjugates.len() != n
            || self.weights.len() != n
            || self.definitions.len() != n
        {
            return bad("table sizes do not match the generator count".into());
        }
        for (i, name) in self.names.iter().enumerate() {
            if name.is_empty() || self.names[..i].contains(name) {
                return bad(format!("generator name {name:?} is empty or repeated"));
            }
        }
        for (i, &p) in self.primes.iter().enumerate() {
            if !is_prime(p as u64) {
                return bad(format!("relative order {p} of {} is not prime", self.names[i]));
            }
        }
        for rel in RelationId::all(n) {
            let (rhs, lowest) = match rel {
                RelationId::Power(i) => (&self.powers[i], i),
                RelationId::Conjugate { j, k } => {
                    if self.conjugates[k].len() != k {
                        return bad(format!("conjugate table row {} has wrong length", self.names[k]));
                    }
                    (&self.conjugates[k][j], j)
                }
            };
            let label = rel.display(&self.names, &self.primes);
            if rhs.len() != n {
                return bad(format!("{label}: right-hand side has wrong length"));
            }
            for (g, e) in rhs.letters() {
                if g <= lowest {
                    return bad(format!(
                        "{label}: right-hand side uses {} which is not beyond {}",
                        self.names[g], self.names[lowest]
                    ));
                }
                if e >= self.primes[g] {
                    return bad(format!(
                        "{label}: exponent {e} of {} is not below {}",
                        self.names[g], self.primes[g]
                    ));
                }
            }
        }
        for (i, w) in self.weights.iter().enumerate() {
            if w.pair == 0 || w.class == 0 {
                return bad(format!("weight of {} must be positive", self.names[i]));
            }
            if i > 0 {
                let prev = self.weights[i - 1];
                if *w < prev {
                    return bad(format!("weights decrease at {}", self.names[i]));
                }
                if w.pair == prev.pair && self.primes[i] != self.primes[i - 1] {
                    return bad(format!(
                        "{} shares series pair {} with a generator of another prime",
                        self.names[i], w.pair
                    ));
                }
            }
        }
        let mut used_relations = Vec::new();
        let mut used_images = Vec::new();
        for (x, def) in self.definitions.iter().enumerate() {
            let Some(def) = def else { continue };
            match *def {
                Definition::Image(g) => {
                    if used_images.contains(&g) {
                        return bad(format!("image {g} defines two generators"));
                    }
                    used_images.push(g);
                }
                Definition::Relation(rel) => {
                    let label = rel.display(&self.names, &self.primes);
                    let (rhs, lhs_top) = match rel {
                        RelationId::Power(i) if i < n => (&self.powers[i], i),
                        RelationId::Conjugate { j, k } if j < k && k < n => (&self.conjugates[k][j], k),
                        _ => return bad(format!("definition of {} names no relation", self.names[x])),
                    };
                    if rhs.last_letter() != Some((x, 1)) {
                        return bad(format!(
                            "{label} cannot define {}: its right-hand side does not end in {} with exponent 1",
                            self.names[x], self.names[x]
                        ));
                    }
                    if lhs_top >= x {
                        return bad(format!("{label} cannot define the earlier generator {}", self.names[x]));
                    }
                    if used_relations.contains(&rel) {
                        return bad(format!("{label} defines two generators"));
                    }
                    used_relations.push(rel);
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn power(&self, i: usize) -> &NormalWord {
        &self.powers[i]
    }

    /// Right-hand side of `a_k^{a_j}`, `j < k`.
    pub fn conjugate(&self, j: usize, k: usize) -> &NormalWord {
        &self.conjugates[k][j]
    }

    pub fn rhs(&self, rel: RelationId) -> &NormalWord {
        match rel {
            RelationId::Power(i) => self.power(i),
            RelationId::Conjugate { j, k } => self.conjugate(j, k),
        }
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn definitions(&self) -> &[Option<Definition>] {
        &self.definitions
    }

    pub fn is_relation_definition(&self, rel: RelationId) -> bool {
        self.definitions.contains(&Some(Definition::Relation(rel)))
    }

    /// Number of generators not defined by a relation.
    pub fn generator_number(&self) -> usize {
        self.definitions
            .iter()
            .filter(|d| !matches!(d, Some(Definition::Relation(_))))
            .count()
    }

    /// Number of leading generators lying outside series pair `pair`
    /// (and everything after it).
    pub fn head_count(&self, pair: usize) -> usize {
        self.weights.iter().take_while(|w| w.pair < pair).count()
    }

    pub fn identity(&self) -> NormalWord {
        NormalWord::identity(self.len())
    }

    pub fn generator(&self, g: usize) -> NormalWord {
        NormalWord::generator(self.len(), g)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Product of the relative orders as prime factorisation, primes ascending.
    pub fn order_factorization(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        let mut primes = self.primes.clone();
        primes.sort_unstable();
        for p in primes {
            match out.last_mut() {
                Some(last) if last.0 == p => last.1 += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// Returns a copy with different definitions, revalidated.
    pub fn with_definitions(&self, definitions: Vec<Option<Definition>>) -> Result<Self> {
        let mut pc = self.clone();
        pc.definitions = definitions;
        pc.validate()?;
        Ok(pc)
    }

    pub(crate) fn default_weights(primes: &[u32]) -> Vec<Weight> {
        let mut pair = 0;
        primes
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                if i == 0 || primes[i - 1] != p {
                    pair += 1;
                }
                Weight::new(pair, 1)
            })
            .collect()
    }
}

impl fmt::Display for PcPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.len();
        if n == 0 {
            return f.write_str("{ | }");
        }
        writeln!(f, "{{ {} |", self.names.join(", "))?;
        for k in 0..n {
            f.write_str("  ")?;
            for (idx, rel) in (0..k)
                .map(|j| RelationId::Conjugate { j, k })
                .chain(std::iter::once(RelationId::Power(k)))
                .enumerate()
            {
                if idx > 0 {
                    f.write_str(", ")?;
                }
                let rhs = self.rhs(rel);
                let op = if self.is_relation_definition(rel) { "=:" } else { "=" };
                f.write_str(&rel.display(&self.names, &self.primes))?;
                let trivial = match rel {
                    RelationId::Power(_) => rhs.is_identity(),
                    RelationId::Conjugate { .. } => false,
                };
                if !trivial {
                    write!(f, " {op} {}", rhs.display(&self.names))?;
                }
            }
            f.write_str(if k + 1 == n { " }" } else { ",\n" })?;
        }
        f.write_str("\nweights [")?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({},{})", w.pair, w.class)?;
        }
        f.write_str("]")?;
        let images: Vec<(usize, usize)> = self
            .definitions
            .iter()
            .enumerate()
            .filter_map(|(x, d)| match d {
                Some(Definition::Image(g)) => Some((x, *g)),
                _ => None,
            })
            .collect();
        if !images.is_empty() {
            f.write_str("\nimages [")?;
            for (i, (x, g)) in images.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{} <- {}", self.names[*x], g + 1)?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}
