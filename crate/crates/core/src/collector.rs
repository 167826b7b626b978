//! Arithmetic in a group given by a power-conjugate presentation.

use std::fmt;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Ceiling, Error, Result};
use crate::presentations::{FreeWord, NormalWord, PcPresentation, RelationId, Weight};

/// Entry on the collection stack.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Item {
    Gen(usize, u32),
    /// An opaque marker reported back to the caller when it is reached.
    Mark(u32),
}

type Sparse = Vec<(usize, u32)>;

/// Collection from the left over a fixed presentation.
///
/// Relations may carry a mark which is reported, together with the
/// collected prefix at that moment, whenever the relation is applied.
#[derive(Clone, Debug)]
pub struct Collector {
    pc: PcPresentation,
    powers: Vec<Sparse>,
    conjugates: Vec<Vec<Sparse>>,
    power_marks: Vec<Option<u32>>,
    conj_marks: Vec<Vec<Option<u32>>>,
    step_factor: u64,
}

fn sparse(w: &NormalWord) -> Sparse {
    w.letters().collect()
}

impl Collector {
    pub fn new(pc: &PcPresentation) -> Self {
        let n = pc.len();
        let powers = (0..n).map(|i| sparse(pc.power(i))).collect();
        let conjugates = (0..n)
            .map(|k| (0..k).map(|j| sparse(pc.conjugate(j, k))).collect())
            .collect();
        let order = pc.primes().iter().fold(1u64, |acc, &p| acc.saturating_mul(p as u64));
        let pmax = pc.primes().iter().copied().max().unwrap_or(2) as u64;
        Self {
            pc: pc.clone(),
            powers,
            conjugates,
            power_marks: vec![None; n],
            conj_marks: (0..n).map(|k| vec![None; k]).collect(),
            step_factor: order.saturating_mul(pmax).saturating_mul(4),
        }
    }

    /// Attaches `mark` to relation `rel`.
    pub(crate) fn set_mark(&mut self, rel: RelationId, mark: u32) {
        match rel {
            RelationId::Power(i) => self.power_marks[i] = Some(mark),
            RelationId::Conjugate { j, k } => self.conj_marks[k][j] = Some(mark),
        }
    }

    pub fn presentation(&self) -> &PcPresentation {
        &self.pc
    }

    pub fn len(&self) -> usize {
        self.pc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pc.is_empty()
    }

    pub fn primes(&self) -> &[u32] {
        self.pc.primes()
    }

    pub fn identity(&self) -> NormalWord {
        self.pc.identity()
    }

    fn push_rhs(stack: &mut Vec<Item>, rhs: &Sparse, mark: Option<u32>) {
        if let Some(m) = mark {
            stack.push(Item::Mark(m));
        }
        for &(g, e) in rhs.iter().rev() {
            stack.push(Item::Gen(g, e));
        }
    }

    /// Runs collection from the left: `exps` holds the collected prefix and
    /// `stack` the unprocessed suffix, top of stack first.
    pub(crate) fn run(
        &self,
        exps: &mut [u32],
        stack: &mut Vec<Item>,
        on_mark: &mut dyn FnMut(u32, &[u32]),
    ) -> Result<()> {
        let primes = self.pc.primes();
        let n = exps.len();
        let budget = self.step_factor.saturating_mul(stack.len().max(1) as u64);
        let mut steps = 0u64;
        while let Some(item) = stack.pop() {
            steps += 1;
            if steps > budget {
                return Err(Error::Internal(
                    "collection exceeded its step ceiling; the presentation is corrupt".into(),
                ));
            }
            let (j, c) = match item {
                Item::Mark(m) => {
                    on_mark(m, exps);
                    continue;
                }
                Item::Gen(_, 0) => continue,
                Item::Gen(j, c) => (j, c),
            };
            match (j + 1..n).rev().find(|&k| exps[k] != 0) {
                None => {
                    let total = exps[j] as u64 + c as u64;
                    let p = primes[j] as u64;
                    exps[j] = (total % p) as u32;
                    for _ in 0..total / p {
                        Self::push_rhs(stack, &self.powers[j], self.power_marks[j]);
                    }
                }
                Some(last) => {
                    if c > 1 {
                        stack.push(Item::Gen(j, c - 1));
                    }
                    for k in (j + 1..=last).rev() {
                        let e = std::mem::take(&mut exps[k]);
                        for _ in 0..e {
                            Self::push_rhs(stack, &self.conjugates[k][j], self.conj_marks[k][j]);
                        }
                    }
                    stack.push(Item::Gen(j, 1));
                }
            }
        }
        Ok(())
    }

    fn run_plain(&self, exps: &mut [u32], stack: &mut Vec<Item>) -> Result<()> {
        self.run(exps, stack, &mut |_, _| {})
    }

    fn stack_of(word: &[(usize, u32)]) -> Vec<Item> {
        word.iter().rev().map(|&(g, e)| Item::Gen(g, e)).collect()
    }

    fn check_indices(&self, word: impl Iterator<Item = usize>) -> Result<()> {
        for g in word {
            if g >= self.len() {
                return Err(Error::OutOfRange {
                    index: g,
                    limit: self.len(),
                });
            }
        }
        Ok(())
    }

    /// Normal word of a semigroup word given as generator indices.
    pub fn collect(&self, word: &[usize]) -> Result<NormalWord> {
        let letters: Vec<(usize, u32)> = word.iter().map(|&g| (g, 1)).collect();
        self.collect_letters(&letters)
    }

    /// Normal word of `a_{g_1}^{e_1} a_{g_2}^{e_2} ...`.
    pub fn collect_letters(&self, word: &[(usize, u32)]) -> Result<NormalWord> {
        self.check_indices(word.iter().map(|&(g, _)| g))?;
        let mut exps = vec![0; self.len()];
        let mut stack = Self::stack_of(word);
        self.run_plain(&mut exps, &mut stack)?;
        Ok(NormalWord::from_exponents(exps))
    }

    pub fn multiply(&self, u: &NormalWord, v: &NormalWord) -> Result<NormalWord> {
        self.check_len(u)?;
        self.check_len(v)?;
        let mut exps = u.exponents().to_vec();
        let letters: Vec<(usize, u32)> = v.letters().collect();
        let mut stack = Self::stack_of(&letters);
        self.run_plain(&mut exps, &mut stack)?;
        Ok(NormalWord::from_exponents(exps))
    }

    fn check_len(&self, u: &NormalWord) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::Mismatch(format!(
                "word of length {} for a presentation on {} generators",
                u.len(),
                self.len()
            )));
        }
        Ok(())
    }

    /// Solves `u x = 1` one generator at a time from the top.
    pub fn invert(&self, u: &NormalWord) -> Result<NormalWord> {
        self.check_len(u)?;
        let primes = self.pc.primes();
        let mut cur = u.exponents().to_vec();
        let mut x = vec![0u32; self.len()];
        for i in 0..self.len() {
            if cur[i] == 0 {
                continue;
            }
            let need = primes[i] - cur[i];
            x[i] = need;
            let mut stack = vec![Item::Gen(i, need)];
            self.run_plain(&mut cur, &mut stack)?;
            debug_assert_eq!(cur[i], 0);
        }
        Ok(NormalWord::from_exponents(x))
    }

    /// `u^e` by repeated squaring.
    pub fn power(&self, u: &NormalWord, mut e: u64) -> Result<NormalWord> {
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

    /// Evaluates a free word with generator `g` sent to `images[g]`.
    pub fn evaluate(&self, w: &FreeWord, images: &[NormalWord]) -> Result<NormalWord> {
        let mut acc = self.identity();
        for &(g, e) in w.letters() {
            let img = images.get(g).ok_or(Error::MissingImage(g))?;
            let base = if e < 0 { self.invert(img)? } else { img.clone() };
            let term = self.power(&base, e.unsigned_abs())?;
            acc = self.multiply(&acc, &term)?;
        }
        Ok(acc)
    }

    /// Evaluates a word written in the presentation's own generators.
    pub fn evaluate_in_generators(&self, w: &FreeWord) -> Result<NormalWord> {
        let gens: Vec<NormalWord> = (0..self.len()).map(|g| self.pc.generator(g)).collect();
        self.evaluate(w, &gens)
    }

    fn collect_side(&self, side: &Side) -> Result<NormalWord> {
        let left = self.collect(&side.prefix)?;
        if side.inner.is_empty() {
            return Ok(left);
        }
        let right = self.collect(&side.inner)?;
        self.multiply(&left, &right)
    }

    /// Compares both bracketings of every test word.
    pub fn consistency_check(&self) -> Result<ConsistencyReport> {
        let words = TestWord::all(self.pc.primes());
        let results: Vec<Result<Option<ConsistencyFailure>>> = words
            .par_iter()
            .map(|&word| {
                let (l, r) = word.sides(self.pc.primes());
                let left = self.collect_side(&l)?;
                let right = self.collect_side(&r)?;
                Ok((left != right).then_some(ConsistencyFailure { word, left, right }))
            })
            .collect();
        let mut failures = Vec::new();
        for r in results {
            if let Some(f) = r? {
                failures.push(f);
            }
        }
        Ok(ConsistencyReport {
            tested: words.len(),
            failures,
        })
    }

    /// Group order, after confirming consistency.
    pub fn order(&self) -> Result<BigUint> {
        let report = self.consistency_check()?;
        if !report.passed() {
            return Err(Error::Inconsistent {
                failures: report.failures.len(),
            });
        }
        Ok(order_of(&self.pc))
    }

    /// All normal words in lexicographic order of exponent vectors.
    pub fn enumerate_elements(&self, ceiling: u64) -> Result<Vec<NormalWord>> {
        enumerate_normal_words(self.pc.primes(), ceiling)
    }
}

/// Product of the relative orders.
pub fn order_of(pc: &PcPresentation) -> BigUint {
    pc.primes()
        .iter()
        .fold(BigUint::from(1u32), |acc, &p| acc * BigUint::from(p))
}

pub(crate) fn enumerate_normal_words(primes: &[u32], ceiling: u64) -> Result<Vec<NormalWord>> {
    let mut total: u128 = 1;
    for &p in primes {
        total = total.saturating_mul(p as u128);
        if total > ceiling as u128 {
            return Err(Error::CeilingExceeded(Ceiling::Enumeration, total, ceiling as u128));
        }
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut cur = vec![0u32; primes.len()];
    loop {
        out.push(NormalWord::from_exponents(cur.clone()));
        let mut i = primes.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < primes[i] {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Presentation of the quotient by the normal subgroup generated by
/// `a_{r+1}, ..., a_n`, obtained by truncating every right-hand side.
pub fn quotient_by_tail(pc: &PcPresentation, r: usize) -> Result<PcPresentation> {
    if r > pc.len() {
        return Err(Error::OutOfRange {
            index: r,
            limit: pc.len(),
        });
    }
    if r == pc.len() {
        return Ok(pc.clone());
    }
    let cut = |w: &NormalWord| NormalWord::from_exponents(w.exponents()[..r].to_vec());
    let names = pc.names()[..r].to_vec();
    let primes = pc.primes()[..r].to_vec();
    let powers = (0..r).map(|i| cut(pc.power(i))).collect();
    let conjugates = (0..r)
        .map(|k| (0..k).map(|j| cut(pc.conjugate(j, k))).collect())
        .collect();
    let weights: Vec<Weight> = pc.weights()[..r].to_vec();
    let definitions = pc.definitions()[..r].to_vec();
    PcPresentation::new(names, primes, powers, conjugates, weights, definitions)
}

/// One of the test words of the consistency criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TestWord {
    /// `a_k a_j a_i`, `i < j < k`
    Triple { i: usize, j: usize, k: usize },
    /// `a_k^p a_j`, `j < k`
    PowerLeft { j: usize, k: usize },
    /// `a_j a_i^p`, `i < j`
    PowerRight { i: usize, j: usize },
    /// `a_i^(p+1)`
    PowerPower { i: usize },
}

/// `collect(prefix)` multiplied by `collect(inner)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Side {
    pub prefix: Vec<usize>,
    pub inner: Vec<usize>,
}

impl TestWord {
    pub fn all(primes: &[u32]) -> Vec<TestWord> {
        let n = primes.len();
        let mut out = Vec::with_capacity(n * n * n / 6 + n * n + n);
        for k in 0..n {
            for j in 0..k {
                for i in 0..j {
                    out.push(TestWord::Triple { i, j, k });
                }
            }
        }
        for k in 0..n {
            for j in 0..k {
                out.push(TestWord::PowerLeft { j, k });
            }
        }
        for j in 0..n {
            for i in 0..j {
                out.push(TestWord::PowerRight { i, j });
            }
        }
        for i in 0..n {
            out.push(TestWord::PowerPower { i });
        }
        out
    }

    pub(crate) fn sides(&self, primes: &[u32]) -> (Side, Side) {
        let rep = |g: usize, e: u32| std::iter::repeat_n(g, e as usize);
        match *self {
            TestWord::Triple { i, j, k } => (
                Side {
                    prefix: vec![k, j, i],
                    inner: vec![],
                },
                Side {
                    prefix: vec![k],
                    inner: vec![j, i],
                },
            ),
            TestWord::PowerLeft { j, k } => {
                let p = primes[k];
                (
                    Side {
                        prefix: rep(k, p).chain([j]).collect(),
                        inner: vec![],
                    },
                    Side {
                        prefix: rep(k, p - 1).collect(),
                        inner: vec![k, j],
                    },
                )
            }
            TestWord::PowerRight { i, j } => {
                let p = primes[i];
                (
                    Side {
                        prefix: [j, i].into_iter().chain(rep(i, p - 1)).collect(),
                        inner: vec![],
                    },
                    Side {
                        prefix: vec![j],
                        inner: rep(i, p).collect(),
                    },
                )
            }
            TestWord::PowerPower { i } => {
                let p = primes[i];
                (
                    Side {
                        prefix: rep(i, p + 1).collect(),
                        inner: vec![],
                    },
                    Side {
                        prefix: vec![i],
                        inner: rep(i, p).collect(),
                    },
                )
            }
        }
    }

    pub fn display(&self, names: &[String], primes: &[u32]) -> String {
        match *self {
            TestWord::Triple { i, j, k } => format!("{} {} {}", names[k], names[j], names[i]),
            TestWord::PowerLeft { j, k } => format!("{}^{} {}", names[k], primes[k], names[j]),
            TestWord::PowerRight { i, j } => format!("{} {}^{}", names[j], names[i], primes[i]),
            TestWord::PowerPower { i } => format!("{}^{}", names[i], primes[i] + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConsistencyFailure {
    pub word: TestWord,
    pub left: NormalWord,
    pub right: NormalWord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub tested: usize,
    pub failures: Vec<ConsistencyFailure>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn display<'a>(&'a self, pc: &'a PcPresentation) -> impl fmt::Display + 'a {
        DisplayReport { report: self, pc }
    }
}

struct DisplayReport<'a> {
    report: &'a ConsistencyReport,
    pc: &'a PcPresentation,
}

impl fmt::Display for DisplayReport<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.report.passed() {
            return write!(f, "consistent ({} test words)", self.report.tested);
        }
        write!(
            f,
            "inconsistent: {} of {} test words fail",
            self.report.failures.len(),
            self.report.tested
        )?;
        let names = self.pc.names();
        for fail in &self.report.failures {
            write!(
                f,
                "\n  {}: {} <> {}",
                fail.word.display(names, self.pc.primes()),
                fail.left.display(names),
                fail.right.display(names)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentations::parse_pc_presentation;
    use proptest::prelude::*;

    const S4: &str = "{ a, b, c, d | a^2 =: c, b^a = b^2 c, b^3, c^a = c, c^b =: d, c^2,
        d^a = cd, d^b = cd, d^c = d, d^2 }";

    fn s4() -> Collector {
        Collector::new(&parse_pc_presentation(S4).unwrap())
    }

    fn nw(e: &[u32]) -> NormalWord {
        NormalWord::from_exponents(e.to_vec())
    }

    #[test]
    fn s4_collection() {
        let c = s4();
        assert_eq!(c.collect(&[1, 0]).unwrap(), nw(&[1, 2, 1, 0]));
        assert_eq!(c.collect(&[0, 0]).unwrap(), nw(&[0, 0, 1, 0]));
        assert_eq!(c.collect(&[1, 1, 0]).unwrap(), nw(&[1, 1, 0, 1]));
        assert_eq!(
            c.multiply(&nw(&[1, 0, 0, 0]), &nw(&[1, 0, 0, 0])).unwrap(),
            nw(&[0, 0, 1, 0])
        );
        assert_eq!(
            c.multiply(&nw(&[0, 1, 0, 0]), &nw(&[1, 0, 0, 0])).unwrap(),
            nw(&[1, 2, 1, 0])
        );
    }

    #[test]
    fn s4_inverse() {
        let c = s4();
        assert_eq!(c.invert(&nw(&[1, 0, 0, 0])).unwrap(), nw(&[1, 0, 1, 0]));
        assert_eq!(c.invert(&c.identity()).unwrap(), c.identity());
        for u in c.enumerate_elements(1000).unwrap() {
            let v = c.invert(&u).unwrap();
            assert!(c.multiply(&u, &v).unwrap().is_identity());
            assert!(c.multiply(&v, &u).unwrap().is_identity());
            assert_eq!(c.invert(&v).unwrap(), u);
        }
    }

    #[test]
    fn s4_evaluate() {
        let c = s4();
        let images = vec![nw(&[1, 0, 0, 0]), nw(&[0, 1, 0, 0])];
        let x8 = FreeWord::from_letters([(0, 8)]);
        assert!(c.evaluate(&x8, &images).unwrap().is_identity());
        assert!(c.evaluate(&FreeWord::identity(), &images).unwrap().is_identity());
        let r = FreeWord::from_letters([(0, -1), (1, 1)]).pow(2);
        assert!(c.evaluate(&r, &images).unwrap().is_identity());
        assert_eq!(
            c.evaluate(&FreeWord::generator(2), &images),
            Err(Error::MissingImage(2))
        );
    }

    #[test]
    fn s4_consistency_and_order() {
        let c = s4();
        let report = c.consistency_check().unwrap();
        assert!(report.passed(), "{}", report.display(c.presentation()));
        assert_eq!(report.tested, 4 + 12 + 4);
        assert_eq!(c.order().unwrap(), BigUint::from(24u32));

        let bad = parse_pc_presentation(&S4.replace("d^b = cd", "d^b = d")).unwrap();
        let c = Collector::new(&bad);
        let report = c.consistency_check().unwrap();
        assert!(!report.passed());
        assert!(matches!(c.order(), Err(Error::Inconsistent { .. })));
        assert!(report.display(&bad).to_string().contains("<>"));
    }

    #[test]
    fn small_cases() {
        let c2 = Collector::new(&parse_pc_presentation("{ a | a^2 }").unwrap());
        let report = c2.consistency_check().unwrap();
        assert!(report.passed());
        assert_eq!(report.tested, 1);
        let triv = Collector::new(&PcPresentation::trivial());
        assert_eq!(triv.order().unwrap(), BigUint::from(1u32));
        assert_eq!(triv.enumerate_elements(10).unwrap(), vec![NormalWord::identity(0)]);
    }

    #[test]
    fn enumeration_order_and_ceiling() {
        let c = s4();
        let all = c.enumerate_elements(1_000_000).unwrap();
        assert_eq!(all.len(), 24);
        assert_eq!(all[0], nw(&[0, 0, 0, 0]));
        assert_eq!(all[23], nw(&[1, 2, 1, 1]));
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(
            c.enumerate_elements(10),
            Err(Error::CeilingExceeded(Ceiling::Enumeration, _, 10))
        ));
    }

    #[test]
    fn truncation() {
        let pc = parse_pc_presentation(S4).unwrap();
        let s3 = quotient_by_tail(&pc, 2).unwrap();
        assert_eq!(s3.len(), 2);
        assert!(s3.power(0).is_identity());
        assert_eq!(s3.conjugate(0, 1).exponents(), &[0, 2]);
        let c = Collector::new(&s3);
        assert_eq!(c.order().unwrap(), BigUint::from(6u32));
        assert_eq!(c.enumerate_elements(100).unwrap().len(), 6);
        assert_eq!(quotient_by_tail(&pc, 4).unwrap(), pc);
        assert!(quotient_by_tail(&pc, 0).unwrap().is_empty());
        assert!(quotient_by_tail(&pc, 5).is_err());
    }

    proptest! {
        #[test]
        fn collect_is_idempotent(word in prop::collection::vec(0usize..4, 0..40)) {
            let c = s4();
            let once = c.collect(&word).unwrap();
            let letters: Vec<usize> = once
                .letters()
                .flat_map(|(g, e)| std::iter::repeat_n(g, e as usize))
                .collect();
            prop_assert_eq!(c.collect(&letters).unwrap(), once);
        }

        #[test]
        fn evaluate_is_a_homomorphism(
            u in prop::collection::vec((0usize..4, -5i64..=5), 0..10),
            v in prop::collection::vec((0usize..4, -5i64..=5), 0..10),
        ) {
            let c = s4();
            let u = FreeWord::from_letters(u);
            let v = FreeWord::from_letters(v);
            let whole = c.evaluate_in_generators(&u.concat(&v)).unwrap();
            let parts = c
                .multiply(
                    &c.evaluate_in_generators(&u).unwrap(),
                    &c.evaluate_in_generators(&v).unwrap(),
                )
                .unwrap();
            prop_assert_eq!(whole, parts);
        }
    }
}
