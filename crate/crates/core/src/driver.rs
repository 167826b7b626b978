//! The soluble quotient loop: repeated extension of a pc quotient of a
//! finitely presented group by modules, one series layer at a time.

use std::time::{Duration, Instant};

use num_bigint::BigUint;

use crate::collector::{order_of, Collector};
use crate::covering::{assemble_pc, build_cover_context, compute_t, compute_u, label_images, relabel, Attachment};
use crate::error::{Ceiling, Error, Result};
use crate::module_solver::{module_basis, SolverLimits};
use crate::presentations::{Definition, FpPresentation, LSpec, NormalWord, PcPresentation};

/// Resource ceilings for a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// `None` leaves the group order unbounded.
    pub max_order: Option<u128>,
    /// Largest head quotient whose elements are enumerated.
    pub enumeration: u64,
    pub solver: SolverLimits,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_order: Some(1_000_000_000),
            enumeration: 1_000_000,
            solver: SolverLimits::default(),
        }
    }
}

/// A homomorphism from a finitely presented group onto a pc group, given by
/// generator images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Epimorphism {
    source: FpPresentation,
    target: PcPresentation,
    images: Vec<NormalWord>,
}

impl Epimorphism {
    /// Checks the relators and labels the undefined generators of `target`
    /// by images.
    pub fn new(source: FpPresentation, target: PcPresentation, images: Vec<NormalWord>) -> Result<Self> {
        if images.len() != source.generator_count() {
            return Err(Error::InvalidEpimorphism(format!(
                "{} images for {} generators",
                images.len(),
                source.generator_count()
            )));
        }
        if let Some(g) = images.iter().position(|w| w.len() != target.len()) {
            return Err(Error::InvalidEpimorphism(format!(
                "image of generator {} has {} exponents, expected {}",
                g + 1,
                images[g].len(),
                target.len()
            )));
        }
        let target = label_images(&target, &images)?;
        let epi = Self { source, target, images };
        epi.verify()?;
        Ok(epi)
    }

    /// The map onto the trivial group.
    pub fn trivial(source: FpPresentation) -> Self {
        let images = vec![NormalWord::identity(0); source.generator_count()];
        Self {
            source,
            target: PcPresentation::trivial(),
            images,
        }
    }

    pub fn source(&self) -> &FpPresentation {
        &self.source
    }

    pub fn target(&self) -> &PcPresentation {
        &self.target
    }

    pub fn images(&self) -> &[NormalWord] {
        &self.images
    }

    /// For each source generator, whether its image defines a generator.
    pub fn definition_flags(&self) -> Vec<bool> {
        (0..self.images.len())
            .map(|g| self.target.definitions().contains(&Some(Definition::Image(g))))
            .collect()
    }

    /// Every relator of the source evaluates to the identity.
    pub fn verify(&self) -> Result<()> {
        let collector = Collector::new(&self.target);
        for (i, r) in self.source.relators().iter().enumerate() {
            let w = collector.evaluate(r, &self.images)?;
            if !w.is_identity() {
                return Err(Error::InvalidEpimorphism(format!(
                    "relator {} maps to {}",
                    i + 1,
                    w.display(self.target.names())
                )));
            }
        }
        Ok(())
    }
}

/// One successful extension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerRecord {
    pub prime: u32,
    /// Position of the pair in the series, 1-based.
    pub pair: usize,
    /// Class reached within the pair.
    pub class: usize,
    pub rank: usize,
    pub dim: usize,
    pub order: BigUint,
}

/// What a progress hook sees after every basic step.
#[derive(Clone, Debug)]
pub struct Progress {
    pub prime: u32,
    pub step: usize,
    pub rank: usize,
    pub dim: usize,
    pub order: BigUint,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub enum StepOutcome {
    Extended {
        epimorphism: Epimorphism,
        record: LayerRecord,
    },
    Closed {
        rank: usize,
    },
}

/// Extends the image of `theta` by the largest module layer for prime `p`
/// at series pair `pair`.
pub fn basic_step(theta: &Epimorphism, p: u32, pair: usize, limits: &Limits) -> Result<StepOutcome> {
    let base = theta.target();
    let ctx = build_cover_context(
        base,
        p,
        Some(pair),
        Some(Attachment {
            fp: theta.source(),
            images: theta.images(),
        }),
        limits.enumeration,
    )?;
    let mut relators = compute_t(&ctx)?;
    relators.extend(compute_u(&ctx, theta.source())?);
    let basis = module_basis(ctx.algebra(), ctx.rank(), &relators, limits.solver)?;
    if basis.dim == 0 {
        return Ok(StepOutcome::Closed { rank: ctx.rank() });
    }
    let order = order_of(base) * BigUint::from(p).pow(basis.dim as u32);
    if let Some(max) = limits.max_order {
        if order > BigUint::from(max) {
            return Err(Error::CeilingExceeded(
                Ceiling::GroupOrder,
                u128::try_from(&order).unwrap_or(u128::MAX),
                max,
            ));
        }
    }
    let ext = assemble_pc(&ctx, &basis)?;
    let images = ext
        .images
        .ok_or_else(|| Error::Internal("assembled extension lost its images".into()))?;
    let (pc, images) = relabel(&ext.pc, Some(&images))?;
    let images = images.ok_or_else(|| Error::Internal("relabelling lost the images".into()))?;
    for (g, (new, old)) in images.iter().zip(theta.images()).enumerate() {
        if new.exponents()[..ext.base_len] != *old.exponents() {
            return Err(Error::Internal(format!(
                "image of generator {} does not project onto its old image",
                g + 1
            )));
        }
    }
    let class = pc.weights().last().map_or(1, |w| w.class);
    let epimorphism = Epimorphism {
        source: theta.source().clone(),
        target: pc,
        images,
    };
    epimorphism.verify()?;
    Ok(StepOutcome::Extended {
        epimorphism,
        record: LayerRecord {
            prime: p,
            pair,
            class,
            rank: ctx.rank(),
            dim: basis.dim,
            order,
        },
    })
}

/// Output of the soluble quotient loop.
#[derive(Clone, Debug)]
pub struct QuotientResult {
    pub pc: PcPresentation,
    pub tau: Epimorphism,
    /// Classes realised per requested pair; a layer may close early.
    pub achieved: Vec<(u32, usize)>,
    pub layer_log: Vec<LayerRecord>,
}

impl QuotientResult {
    pub fn order(&self) -> BigUint {
        order_of(&self.pc)
    }
}

/// A run that stopped at a ceiling, with everything computed before it.
#[derive(Debug)]
pub struct Interrupted {
    pub error: Error,
    pub partial: QuotientResult,
}

/// Computes the largest quotient of `fp` with soluble series of type
/// `series`.
pub fn soluble_quotient(
    fp: &FpPresentation,
    series: &LSpec,
    limits: &Limits,
    progress: Option<&mut dyn FnMut(&Progress)>,
) -> std::result::Result<QuotientResult, Interrupted> {
    let start = Instant::now();
    let mut progress = progress;
    let mut theta = Epimorphism::trivial(fp.clone());
    let mut achieved: Vec<(u32, usize)> = series.pairs().iter().map(|&(p, _)| (p, 0)).collect();
    let mut layer_log = Vec::new();
    let mut step = 0;
    let partial = |theta: &Epimorphism, achieved: &[(u32, usize)], log: &[LayerRecord]| QuotientResult {
        pc: theta.target().clone(),
        tau: theta.clone(),
        achieved: achieved.to_vec(),
        layer_log: log.to_vec(),
    };
    for (i, &(p, c)) in series.pairs().iter().enumerate() {
        for _ in 0..c {
            step += 1;
            let outcome = match basic_step(&theta, p, i + 1, limits) {
                Ok(o) => o,
                Err(error) => {
                    return Err(Interrupted {
                        error,
                        partial: partial(&theta, &achieved, &layer_log),
                    })
                }
            };
            let (rank, dim) = match outcome {
                StepOutcome::Closed { rank } => (rank, 0),
                StepOutcome::Extended { epimorphism, record } => {
                    theta = epimorphism;
                    achieved[i].1 += 1;
                    let out = (record.rank, record.dim);
                    layer_log.push(record);
                    out
                }
            };
            if let Some(hook) = progress.as_mut() {
                hook(&Progress {
                    prime: p,
                    step,
                    rank,
                    dim,
                    order: order_of(theta.target()),
                    elapsed: start.elapsed(),
                });
            }
            if dim == 0 {
                break;
            }
        }
    }
    Ok(partial(&theta, &achieved, &layer_log))
}
