//! Extensions of a pc group by elementary abelian modules: the covering
//! presentation, its module relators and the assembled pc presentation.

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;

use crate::collector::{quotient_by_tail, TestWord};
use crate::error::{Error, Result};
use crate::group_algebra::{ExtendedCollector, ExtendedNormalWord, GroupAlgebra, Letter, ModuleWord};
use crate::module_solver::{module_basis, FpMatrix, ModuleBasis, SolverLimits};
use crate::presentations::{Definition, FpPresentation, FreeWord, NormalWord, PcPresentation, RelationId, Weight};

/// A finitely presented group together with images of its generators in
/// the base group.
#[derive(Clone, Copy, Debug)]
pub struct Attachment<'a> {
    pub fp: &'a FpPresentation,
    pub images: &'a [NormalWord],
}

/// The extended covering presentation of a base group `K` for a prime `p`.
#[derive(Clone, Debug)]
pub struct CoverContext {
    base: PcPresentation,
    p: u32,
    pair: usize,
    r: usize,
    s: usize,
    t: usize,
    tags: Vec<(RelationId, usize)>,
    /// Per finitely presented generator: its image in `K` and its z-index.
    sigma: Vec<(NormalWord, Option<usize>)>,
    ext: ExtendedCollector,
    module_names: Vec<String>,
}

/// Series pair to extend when only the prime is known: the last pair if
/// it belongs to `p`, else a fresh one.
pub fn next_pair(pc: &PcPresentation, p: u32) -> usize {
    match (pc.weights().last(), pc.primes().last()) {
        (Some(w), Some(&q)) if q == p => w.pair,
        (Some(w), _) => w.pair + 1,
        _ => 1,
    }
}

/// Weight of a layer added to pair `pair`.
pub fn layer_weight(pc: &PcPresentation, pair: usize) -> Weight {
    let class = pc
        .weights()
        .iter()
        .filter(|w| w.pair == pair)
        .map(|w| w.class)
        .max()
        .unwrap_or(0);
    Weight::new(pair, class + 1)
}

/// Gives every undefined generator a definition as the image of a finitely
/// presented generator, where one ends in it with exponent 1.
pub fn label_images(pc: &PcPresentation, images: &[NormalWord]) -> Result<PcPresentation> {
    let mut defs = pc.definitions().to_vec();
    let mut used: Vec<usize> = defs
        .iter()
        .filter_map(|d| match d {
            Some(Definition::Image(g)) => Some(*g),
            _ => None,
        })
        .collect();
    for (x, def) in defs.iter_mut().enumerate() {
        if def.is_some() {
            continue;
        }
        let found = images
            .iter()
            .enumerate()
            .find(|(g, w)| !used.contains(g) && w.last_letter() == Some((x, 1)));
        match found {
            Some((g, _)) => {
                used.push(g);
                *def = Some(Definition::Image(g));
            }
            None => {
                return Err(Error::InvalidEpimorphism(format!(
                    "generator {} is neither defined by a relation nor the last letter of an image",
                    pc.names()[x]
                )))
            }
        }
    }
    for (x, d) in defs.iter().enumerate() {
        if let Some(Definition::Image(g)) = d {
            if images.get(*g).and_then(NormalWord::last_letter) != Some((x, 1)) {
                return Err(Error::InvalidEpimorphism(format!(
                    "image of generator {} does not end in {}",
                    g + 1,
                    pc.names()[x]
                )));
            }
        }
    }
    pc.with_definitions(defs)
}

/// Sets up the covering presentation of `base` for prime `p` extending
/// series pair `pair` (derived from the weights when `None`).
pub fn build_cover_context(
    base: &PcPresentation,
    p: u32,
    pair: Option<usize>,
    attachment: Option<Attachment<'_>>,
    enumeration_ceiling: u64,
) -> Result<CoverContext> {
    if !crate::presentations::is_prime(p as u64) {
        return Err(Error::InvalidSeries(format!("{p} is not prime")));
    }
    let pair = pair.unwrap_or_else(|| next_pair(base, p));
    for (x, w) in base.weights().iter().enumerate() {
        if w.pair > pair || (w.pair == pair && base.primes()[x] != p) {
            return Err(Error::InvalidSeries(format!(
                "generator {} with weight ({},{}) does not fit below pair {pair} for prime {p}",
                base.names()[x],
                w.pair,
                w.class
            )));
        }
    }
    let n = base.len();
    let r = base.head_count(pair);
    let tags: Vec<(RelationId, usize)> = RelationId::all(n)
        .filter(|rel| !base.is_relation_definition(*rel))
        .enumerate()
        .map(|(t, rel)| (rel, t))
        .collect();
    let s = tags.len();

    let mut sigma = Vec::new();
    if let Some(att) = attachment {
        if att.images.len() != att.fp.generator_count() {
            return Err(Error::InvalidEpimorphism(format!(
                "{} images for {} generators",
                att.images.len(),
                att.fp.generator_count()
            )));
        }
        if base.definitions().iter().any(Option::is_none) {
            return Err(Error::InvalidEpimorphism(
                "the base presentation is not labelled for this epimorphism".into(),
            ));
        }
        let defining: HashSet<usize> = base
            .definitions()
            .iter()
            .filter_map(|d| match d {
                Some(Definition::Image(g)) => Some(*g),
                _ => None,
            })
            .collect();
        let mut next_z = s;
        for (g, img) in att.images.iter().enumerate() {
            if img.len() != n {
                return Err(Error::InvalidEpimorphism(format!(
                    "image of generator {} has the wrong length",
                    g + 1
                )));
            }
            let z = if defining.contains(&g) {
                None
            } else {
                next_z += 1;
                Some(next_z - 1)
            };
            sigma.push((img.clone(), z));
        }
    }
    let t = sigma.iter().filter(|(_, z)| z.is_some()).count();

    let quotient = quotient_by_tail(base, r)?;
    let alg = GroupAlgebra::new(&quotient, p, enumeration_ceiling)?;
    let ext = ExtendedCollector::new(base, alg, &tags, s + t)?;
    let module_names = (0..s)
        .map(|i| format!("y{}", i + 1))
        .chain((0..t).map(|i| format!("z{}", i + 1)))
        .collect();
    Ok(CoverContext {
        base: base.clone(),
        p,
        pair,
        r,
        s,
        t,
        tags,
        sigma,
        ext,
        module_names,
    })
}

impl CoverContext {
    pub fn base(&self) -> &PcPresentation {
        &self.base
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn pair(&self) -> usize {
        self.pair
    }

    pub fn head_count(&self) -> usize {
        self.r
    }

    /// Number of tagged relations.
    pub fn s(&self) -> usize {
        self.s
    }

    /// Number of extra module generators for non-defining images.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn rank(&self) -> usize {
        self.s + self.t
    }

    pub fn tags(&self) -> &[(RelationId, usize)] {
        &self.tags
    }

    pub fn tag_of(&self, rel: RelationId) -> Option<usize> {
        self.tags.iter().find(|(r, _)| *r == rel).map(|&(_, t)| t)
    }

    pub fn sigma(&self) -> &[(NormalWord, Option<usize>)] {
        &self.sigma
    }

    pub fn head_quotient(&self) -> &PcPresentation {
        self.ext.algebra().quotient()
    }

    pub fn algebra(&self) -> &GroupAlgebra {
        self.ext.algebra()
    }

    pub fn extended(&self) -> &ExtendedCollector {
        &self.ext
    }

    pub fn module_names(&self) -> &[String] {
        &self.module_names
    }

    /// Image of the module generator `i` as an extended word.
    pub fn module_generator(&self, i: usize) -> ExtendedNormalWord {
        let alg = self.algebra();
        ExtendedNormalWord {
            head: self.base.identity(),
            tail: ModuleWord::single(alg, self.rank(), i, alg.one()),
        }
    }

    /// The extended map on generator `g`.
    pub fn sigma_image(&self, g: usize) -> Result<ExtendedNormalWord> {
        let (head, z) = self.sigma.get(g).ok_or(Error::MissingImage(g))?;
        let alg = self.algebra();
        let tail = match z {
            Some(z) => ModuleWord::single(alg, self.rank(), *z, alg.one()),
            None => ModuleWord::zero(alg, self.rank()),
        };
        Ok(ExtendedNormalWord {
            head: head.clone(),
            tail,
        })
    }

    /// Evaluates a relator of the attached group under the extended map.
    pub fn evaluate_extended(&self, w: &FreeWord) -> Result<ExtendedNormalWord> {
        let ext = &self.ext;
        let mut acc = ext.identity();
        for &(g, e) in w.letters() {
            let img = self.sigma_image(g)?;
            let base = if e < 0 { ext.invert(&img)? } else { img };
            let term = ext.power(&base, e.unsigned_abs())?;
            acc = ext.multiply(&acc, &term)?;
        }
        Ok(acc)
    }

    fn collect_side(&self, prefix: &[usize], inner: &[usize]) -> Result<ExtendedNormalWord> {
        let left = self.ext.collect_generators(prefix)?;
        if inner.is_empty() {
            return Ok(left);
        }
        let right = self.ext.collect_generators(inner)?;
        self.ext.multiply(&left, &right)
    }

    /// The tails of both bracketings of one test word; `None` when equal.
    pub fn test_word_relator(&self, word: TestWord) -> Result<Option<ModuleWord>> {
        let (l, r) = word.sides(self.base.primes());
        let left = self.collect_side(&l.prefix, &l.inner)?;
        let right = self.collect_side(&r.prefix, &r.inner)?;
        if left.head != right.head {
            return Err(Error::Internal(format!(
                "test word {} collects to different heads; the base presentation is inconsistent",
                word.display(self.base.names(), self.base.primes())
            )));
        }
        let diff = left.tail.sub(&right.tail)?;
        Ok((!diff.is_zero()).then_some(diff))
    }

    pub fn dump(&self) -> String {
        let names = self.base.names();
        let primes = self.base.primes();
        let mut out = String::new();
        let gens: Vec<&str> = names
            .iter()
            .map(String::as_str)
            .chain(self.module_names.iter().map(String::as_str))
            .collect();
        out.push_str(&format!("generators {{{}}}\n", gens.join(", ")));
        for rel in RelationId::all(self.base.len()) {
            let lhs = rel.display(names, primes);
            let rhs = self.base.rhs(rel);
            let mut text = if rhs.is_identity() {
                String::new()
            } else {
                rhs.display(names).to_string()
            };
            match self.tag_of(rel) {
                Some(t) => {
                    if !text.is_empty() {
                        text.push(' ');
                    }
                    text.push_str(&self.module_names[t]);
                    out.push_str(&format!("{lhs} = {text}\n"));
                }
                None => out.push_str(&format!("{lhs} =: {text}\n")),
            }
        }
        for name in &names[self.r..] {
            out.push_str(&format!("{name} acts trivially on the module\n"));
        }
        for (g, (img, z)) in self.sigma.iter().enumerate() {
            let mut text = img.display(names).to_string();
            if let Some(z) = z {
                text.push(' ');
                text.push_str(&self.module_names[*z]);
            }
            out.push_str(&format!("sigma({}) = {text}\n", g + 1));
        }
        out
    }
}

fn dedupe(words: Vec<ModuleWord>) -> Vec<ModuleWord> {
    let mut seen = HashSet::new();
    words.into_iter().filter(|w| seen.insert(w.clone())).collect()
}

/// Module relators from the consistency test words.
pub fn compute_t(ctx: &CoverContext) -> Result<Vec<ModuleWord>> {
    let words = TestWord::all(ctx.base.primes());
    let out: Vec<Option<ModuleWord>> = words
        .par_iter()
        .map(|&w| ctx.test_word_relator(w))
        .collect::<Result<_>>()?;
    Ok(dedupe(out.into_iter().flatten().collect()))
}

/// Module relators from the relators of the attached group.
pub fn compute_u(ctx: &CoverContext, fp: &FpPresentation) -> Result<Vec<ModuleWord>> {
    if ctx.sigma.len() != fp.generator_count() {
        return Err(Error::InvalidEpimorphism(
            "the cover context carries no images for this presentation".into(),
        ));
    }
    let out: Vec<ExtendedNormalWord> = fp
        .relators()
        .par_iter()
        .map(|r| ctx.evaluate_extended(r))
        .collect::<Result<_>>()?;
    let mut tails = Vec::new();
    for (i, w) in out.into_iter().enumerate() {
        if !w.head.is_identity() {
            return Err(Error::InvalidEpimorphism(format!(
                "relator {} maps to {} rather than the identity",
                i + 1,
                w.head.display(ctx.base.names())
            )));
        }
        if !w.tail.is_zero() {
            tails.push(w.tail);
        }
    }
    Ok(dedupe(tails))
}

/// Generator names for a presentation with `total` generators that keeps
/// the names it already has.
fn extend_names(names: &[String], total: usize) -> Vec<String> {
    let mut out = names.to_vec();
    let mut idx = 0usize;
    while out.len() < total {
        let candidate = if idx < 26 {
            ((b'a' + idx as u8) as char).to_string()
        } else {
            format!("g{}", idx + 1)
        };
        idx += 1;
        if !out.contains(&candidate) {
            out.push(candidate);
        }
    }
    out
}

/// A pc presentation for an extension together with the images of the
/// attached generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    pub pc: PcPresentation,
    /// Images of the attached finitely presented generators, if any.
    pub images: Option<Vec<NormalWord>>,
    /// Number of generators of the base; the projection onto the base
    /// drops the remaining ones.
    pub base_len: usize,
}

impl Extension {
    /// The projection onto the base group.
    pub fn project(&self, w: &NormalWord) -> NormalWord {
        NormalWord::from_exponents(w.exponents()[..self.base_len].to_vec())
    }

    /// Base normal words read in the extension.
    pub fn lift(&self, w: &NormalWord) -> NormalWord {
        w.resized(self.pc.len())
    }

    pub fn layer_dim(&self) -> usize {
        self.pc.len() - self.base_len
    }
}

/// Builds the pc presentation of the extension of the base by the module
/// described by `basis`.
pub fn assemble_pc(ctx: &CoverContext, basis: &ModuleBasis) -> Result<Extension> {
    let base = &ctx.base;
    let n = base.len();
    let m = basis.dim;
    let images: Option<Vec<NormalWord>> = if ctx.sigma.is_empty() {
        None
    } else {
        Some(ctx.sigma.iter().map(|(w, _)| w.clone()).collect())
    };
    if m == 0 {
        return Ok(Extension {
            pc: base.clone(),
            images,
            base_len: n,
        });
    }
    if basis.gen_images.len() != ctx.rank() || basis.action.len() != ctx.r {
        return Err(Error::Mismatch("module basis does not belong to this cover".into()));
    }
    let total = n + m;
    let extend = |w: &NormalWord, layer: Option<&[u32]>| -> NormalWord {
        let mut e = w.exponents().to_vec();
        e.resize(total, 0);
        if let Some(v) = layer {
            e[n..].copy_from_slice(v);
        }
        NormalWord::from_exponents(e)
    };
    let rhs_of = |rel: RelationId| -> NormalWord {
        let tag = ctx.tag_of(rel).map(|t| basis.gen_images[t].as_slice());
        extend(base.rhs(rel), tag)
    };
    let mut powers = Vec::with_capacity(total);
    let mut conjugates = Vec::with_capacity(total);
    for k in 0..n {
        powers.push(rhs_of(RelationId::Power(k)));
        conjugates.push((0..k).map(|j| rhs_of(RelationId::Conjugate { j, k })).collect());
    }
    for i in 0..m {
        powers.push(NormalWord::identity(total));
        let mut row = Vec::with_capacity(n + i);
        for j in 0..n {
            let mut e = vec![0u32; total];
            if j < ctx.r {
                e[n..].copy_from_slice(basis.action[j].row(i));
            } else {
                e[n + i] = 1;
            }
            row.push(NormalWord::from_exponents(e));
        }
        for _ in 0..i {
            row.push(NormalWord::generator(total, n + i));
        }
        conjugates.push(row);
    }
    let names = extend_names(base.names(), total);
    let mut primes = base.primes().to_vec();
    primes.resize(total, ctx.p);
    let mut weights = base.weights().to_vec();
    weights.resize(total, layer_weight(base, ctx.pair));
    let mut definitions = base.definitions().to_vec();
    definitions.resize(total, None);
    let pc = PcPresentation::new(names, primes, powers, conjugates, weights, definitions)?;
    let images = images.map(|imgs| {
        ctx.sigma
            .iter()
            .zip(imgs)
            .map(|((_, z), w)| {
                let layer = z.map(|z| basis.gen_images[z].as_slice());
                extend(&w, layer)
            })
            .collect()
    });
    Ok(Extension {
        pc,
        images,
        base_len: n,
    })
}

/// Rebases the top layer so that each of its generators has a definition.
///
/// The layer is the block of generators sharing the last weight. Its new
/// basis is collected greedily from right-hand sides of relations of the
/// earlier generators, closed under their action, and then from images.
pub fn relabel(
    pc: &PcPresentation,
    images: Option<&[NormalWord]>,
) -> Result<(PcPresentation, Option<Vec<NormalWord>>)> {
    let n = pc.len();
    let Some(&top) = pc.weights().last() else {
        return Ok((pc.clone(), images.map(<[_]>::to_vec)));
    };
    let l0 = pc.weights().iter().position(|w| *w == top).unwrap_or(0);
    let m = n - l0;
    if pc.definitions()[l0..].iter().all(Option::is_some) {
        return Ok((pc.clone(), images.map(<[_]>::to_vec)));
    }
    let p = pc.primes()[n - 1];
    let layer = |w: &NormalWord| -> Vec<u32> { w.exponents()[l0..].to_vec() };

    // Action of the earlier generators on the layer, row i the image of b_i.
    let action: Vec<FpMatrix> = (0..l0)
        .map(|j| FpMatrix::from_rows(p, (l0..n).map(|k| layer(pc.conjugate(j, k))).collect(), m))
        .collect();

    let mut chooser = Chooser {
        span: Span::new(p, m),
        chosen: Vec::new(),
        closed: 0,
        m,
    };
    for rel in RelationId::all(l0) {
        if pc.is_relation_definition(rel) {
            continue;
        }
        chooser.offer(layer(pc.rhs(rel)), Definition::Relation(rel));
    }
    chooser.spin(&action, l0);
    if let Some(imgs) = images {
        for (g, w) in imgs.iter().enumerate() {
            if pc.definitions().contains(&Some(Definition::Image(g))) {
                continue;
            }
            if chooser.offer(layer(w), Definition::Image(g)) {
                chooser.spin(&action, l0);
            }
        }
    }
    let chosen = chooser.chosen;
    if chosen.len() < m {
        return Err(Error::Internal(format!(
            "only {} of {m} layer generators can be given definitions",
            chosen.len()
        )));
    }

    let c = FpMatrix::from_rows(p, chosen.iter().map(|(v, _)| v.clone()).collect(), m);
    let c_inv = c
        .inverse()
        .ok_or_else(|| Error::Internal("relabelling basis is singular".into()))?;
    let rebase = |w: &NormalWord| -> NormalWord {
        let mut e = w.exponents().to_vec();
        let v = c_inv.apply(&e[l0..]);
        e[l0..].copy_from_slice(&v);
        NormalWord::from_exponents(e)
    };
    let mut powers = Vec::with_capacity(n);
    let mut conjugates = Vec::with_capacity(n);
    for k in 0..n {
        if k < l0 {
            powers.push(rebase(pc.power(k)));
            conjugates.push((0..k).map(|j| rebase(pc.conjugate(j, k))).collect());
        } else {
            powers.push(pc.power(k).clone());
            let i = k - l0;
            let row: Vec<NormalWord> = (0..k)
                .map(|j| {
                    if j < l0 {
                        let img = action[j].apply(c.row(i));
                        let mut e = pc.conjugate(j, k).exponents().to_vec();
                        e[l0..].copy_from_slice(&c_inv.apply(&img));
                        NormalWord::from_exponents(e)
                    } else {
                        pc.conjugate(j, k).clone()
                    }
                })
                .collect();
            conjugates.push(row);
        }
    }
    let mut definitions = pc.definitions()[..l0].to_vec();
    definitions.extend(chosen.iter().map(|(_, d)| Some(*d)));
    let new_pc = PcPresentation::new(
        pc.names().to_vec(),
        pc.primes().to_vec(),
        powers,
        conjugates,
        pc.weights().to_vec(),
        definitions,
    )?;
    let new_images = images.map(|imgs| imgs.iter().map(rebase).collect());
    Ok((new_pc, new_images))
}

struct Chooser {
    span: Span,
    chosen: Vec<(Vec<u32>, Definition)>,
    closed: usize,
    m: usize,
}

impl Chooser {
    fn offer(&mut self, v: Vec<u32>, def: Definition) -> bool {
        if self.chosen.len() < self.m && v.iter().any(|&c| c != 0) && self.span.insert(&v) {
            self.chosen.push((v, def));
            true
        } else {
            false
        }
    }

    fn spin(&mut self, action: &[FpMatrix], l0: usize) {
        while self.closed < self.chosen.len() {
            let v = self.chosen[self.closed].0.clone();
            let k = l0 + self.closed;
            for (j, a) in action.iter().enumerate() {
                self.offer(a.apply(&v), Definition::Relation(RelationId::Conjugate { j, k }));
            }
            self.closed += 1;
        }
    }
}

/// Incremental linear independence test over `F_p`.
struct Span {
    p: u32,
    rows: Vec<(usize, Vec<u32>)>,
    len: usize,
}

impl Span {
    fn new(p: u32, len: usize) -> Self {
        Self {
            p,
            rows: Vec::new(),
            len,
        }
    }

    fn insert(&mut self, v: &[u32]) -> bool {
        debug_assert_eq!(v.len(), self.len);
        let p = self.p as u64;
        let mut v: Vec<u32> = v.to_vec();
        for (piv, row) in &self.rows {
            let c = v[*piv] as u64;
            if c != 0 {
                for (a, &b) in v.iter_mut().zip(row) {
                    *a = ((*a as u64 + (p - c) * b as u64) % p) as u32;
                }
            }
        }
        let Some(piv) = v.iter().position(|&c| c != 0) else {
            return false;
        };
        let s = crate::module_solver::inv_mod(v[piv], self.p) as u64;
        for a in v.iter_mut() {
            *a = (*a as u64 * s % p) as u32;
        }
        for (_, row) in self.rows.iter_mut() {
            let c = row[piv] as u64;
            if c != 0 {
                for (a, &b) in row.iter_mut().zip(&v) {
                    *a = ((*a as u64 + (p - c) * b as u64) % p) as u32;
                }
            }
        }
        self.rows.push((piv, v));
        true
    }
}

/// Outcome of one covering computation.
#[derive(Clone, Debug)]
pub struct Cover {
    pub pc: PcPresentation,
    pub dim: usize,
    pub relators: usize,
}

/// The covering group of `base` for prime `p`: the largest extension by an
/// elementary abelian p-group with the same generator number on which the
/// p-part at the end of the series acts trivially.
pub fn l_cover(base: &PcPresentation, p: u32, limits: SolverLimits, enumeration_ceiling: u64) -> Result<Cover> {
    let ctx = build_cover_context(base, p, None, None, enumeration_ceiling)?;
    let t = compute_t(&ctx)?;
    let basis = module_basis(ctx.algebra(), ctx.rank(), &t, limits)?;
    let ext = assemble_pc(&ctx, &basis)?;
    let (pc, _) = relabel(&ext.pc, None)?;
    Ok(Cover {
        pc,
        dim: basis.dim,
        relators: t.len(),
    })
}

impl fmt::Display for Cover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pc)
    }
}

/// Collects `letters` in the cover, for inspection and tests.
pub fn collect_in_cover(ctx: &CoverContext, letters: &[Letter]) -> Result<ExtendedNormalWord> {
    ctx.ext.collect(letters)
}
