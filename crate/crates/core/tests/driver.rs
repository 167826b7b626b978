use solquo_core::collector::{order_of, quotient_by_tail, Collector};
use solquo_core::driver::{basic_step, soluble_quotient, Epimorphism, Limits, Progress, StepOutcome};
use solquo_core::error::{Ceiling, Error};
use solquo_core::presentations::{
    parse_fp_presentation, parse_lspec, parse_pc_presentation, FpPresentation, NormalWord, RelationId,
};

fn corpus(file: &str) -> String {
    std::fs::read_to_string(format!("{}/../../corpus/{file}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn fp(file: &str) -> FpPresentation {
    parse_fp_presentation(&corpus(file)).unwrap()
}

fn quotient(file: &str, series: &str) -> solquo_core::driver::QuotientResult {
    soluble_quotient(&fp(file), &parse_lspec(series).unwrap(), &Limits::default(), None).unwrap()
}

/// Tables of the small test cases; each row is the presentation, its
/// series and the factorised order of the quotient.
const CASES: &[(&str, &str, &[(u32, u32)])] = &[
    ("p01.fp", "[(2,1),(3,1),(2,2),(3,2)]", &[(2, 4), (3, 4)]),
    ("p02.fp", "[(2,1),(3,1),(2,2),(5,1)]", &[(2, 5), (3, 1), (5, 2)]),
    ("p03.fp", "[(3,1),(2,2),(5,2)]", &[(2, 3), (3, 1), (5, 3)]),
    ("p05.fp", "[(2,3),(3,2)]", &[(2, 3), (3, 6)]),
    ("p12.fp", "[(5,1),(31,1),(2,1)]", &[(2, 5), (5, 1), (31, 1)]),
    ("p13.fp", "[(7,1),(127,1),(2,1)]", &[(2, 7), (7, 1), (127, 1)]),
    ("p14.fp", "[(2,2),(3,1),(5,1),(2,1),(3,1)]", &[(2, 6), (3, 1), (5, 1)]),
];

#[test]
fn small_case_orders() {
    for &(file, series, order) in CASES {
        let result = quotient(file, series);
        assert_eq!(result.pc.order_factorization(), order, "{file}");
        assert!(
            Collector::new(&result.pc).consistency_check().unwrap().passed(),
            "{file}"
        );
        result.tau.verify().unwrap();
        let reached: usize = result.layer_log.iter().map(|r| r.dim).sum();
        assert_eq!(reached, result.pc.len(), "{file}");
    }
}

#[test]
fn p4_and_p6_orders() {
    let p4 = quotient("p04.fp", "[(3,1),(2,2),(5,1),(11,1)]");
    assert_eq!(p4.pc.order_factorization(), vec![(2, 3), (3, 1), (5, 1), (11, 1)]);
    assert_eq!(p4.achieved, vec![(3, 1), (2, 2), (5, 1), (11, 1)]);
    let p6 = quotient("p06.fp", "[(3,2),(2,2)]");
    assert_eq!(p6.pc.order_factorization(), vec![(2, 8), (3, 3)]);
}

#[test]
fn g2_reaches_the_labelled_s4() {
    let result = quotient("g2.fp", "[(2,1),(3,1),(2,1)]");
    let s4 = parse_pc_presentation(&corpus("s4.pc")).unwrap();
    for rel in RelationId::all(4) {
        assert_eq!(result.pc.rhs(rel), s4.rhs(rel), "{rel:?}");
    }
    assert_eq!(result.pc.names(), s4.names());
    assert_eq!(
        result.tau.images(),
        &[NormalWord::generator(4, 0), NormalWord::generator(4, 1)]
    );
    assert_eq!(result.tau.definition_flags(), vec![true, true]);
}

#[test]
fn g2_closes_after_two_classes() {
    let result = quotient("g2.fp", "[(2,1),(3,1),(2,4)]");
    assert_eq!(order_of(&result.pc), 192u32.into());
    assert_eq!(result.achieved, vec![(2, 1), (3, 1), (2, 2)]);
    let dims: Vec<usize> = result.layer_log.iter().map(|r| r.dim).collect();
    assert_eq!(dims, vec![1, 1, 2, 3]);
}

#[test]
fn basic_step_onto_order_192() {
    let k = quotient("g2.fp", "[(2,1),(3,1),(2,1)]");
    match basic_step(&k.tau, 2, 3, &Limits::default()).unwrap() {
        StepOutcome::Extended { epimorphism, record } => {
            assert_eq!(record.dim, 3);
            assert_eq!((record.pair, record.class, record.rank), (3, 2, 8));
            let h = epimorphism.target();
            assert_eq!(order_of(h), 192u32.into());
            assert_eq!(&quotient_by_tail(h, 4).unwrap(), k.tau.target());
            for (new, old) in epimorphism.images().iter().zip(k.tau.images()) {
                assert_eq!(&new.exponents()[..4], old.exponents());
            }
        }
        StepOutcome::Closed { .. } => panic!("step closed"),
    }
}

#[test]
fn closed_step_on_a_finished_layer() {
    let h = quotient("g2.fp", "[(2,1),(3,1),(2,2)]");
    assert!(matches!(
        basic_step(&h.tau, 2, 3, &Limits::default()).unwrap(),
        StepOutcome::Closed { .. }
    ));
}

#[test]
fn runs_are_deterministic() {
    let a = quotient("p12.fp", "[(5,1),(31,1),(2,1)]");
    let b = quotient("p12.fp", "[(5,1),(31,1),(2,1)]");
    assert_eq!(a.pc, b.pc);
    assert_eq!(a.tau, b.tau);
    assert_eq!(a.layer_log, b.layer_log);
}

#[test]
fn trivial_group() {
    let g = parse_fp_presentation("{ a, b | a, b }").unwrap();
    let result = soluble_quotient(&g, &parse_lspec("[(2,2),(3,1)]").unwrap(), &Limits::default(), None).unwrap();
    assert_eq!(order_of(&result.pc), 1u32.into());
    assert_eq!(result.achieved, vec![(2, 0), (3, 0)]);
    assert!(result.layer_log.is_empty());
}

#[test]
fn free_abelian_quotient() {
    let g = parse_fp_presentation("{ a, b | [a, b] }").unwrap();
    let result = soluble_quotient(&g, &parse_lspec("[(3,2)]").unwrap(), &Limits::default(), None).unwrap();
    assert_eq!(result.pc.order_factorization(), vec![(3, 4)]);
    assert_eq!(result.achieved, vec![(3, 2)]);
}

#[test]
fn order_ceiling_keeps_the_partial_result() {
    let limits = Limits {
        max_order: Some(100),
        ..Limits::default()
    };
    let err = soluble_quotient(
        &fp("g2.fp"),
        &parse_lspec("[(2,1),(3,1),(2,2)]").unwrap(),
        &limits,
        None,
    )
    .unwrap_err();
    assert_eq!(err.error, Error::CeilingExceeded(Ceiling::GroupOrder, 192, 100));
    assert_eq!(order_of(&err.partial.pc), 24u32.into());
    assert_eq!(err.partial.achieved, vec![(2, 1), (3, 1), (2, 1)]);
    err.partial.tau.verify().unwrap();
}

#[test]
fn progress_is_reported_per_step() {
    let mut seen: Vec<(usize, u32, usize)> = Vec::new();
    let mut hook = |p: &Progress| seen.push((p.step, p.prime, p.dim));
    soluble_quotient(
        &fp("g2.fp"),
        &parse_lspec("[(2,1),(3,1),(2,3)]").unwrap(),
        &Limits::default(),
        Some(&mut hook),
    )
    .unwrap();
    assert_eq!(seen, vec![(1, 2, 1), (2, 3, 1), (3, 2, 2), (4, 2, 3), (5, 2, 0)]);
}

#[test]
fn epimorphism_validation() {
    let g = fp("g2.fp");
    let s4 = parse_pc_presentation(&corpus("s4.pc")).unwrap();
    let a = NormalWord::generator(4, 0);
    let b = NormalWord::generator(4, 1);
    assert!(Epimorphism::new(g.clone(), s4.clone(), vec![a.clone(), b.clone()]).is_ok());
    assert!(matches!(
        Epimorphism::new(g.clone(), s4.clone(), vec![a.clone()]),
        Err(Error::InvalidEpimorphism(_))
    ));
    assert!(matches!(
        Epimorphism::new(g.clone(), s4.clone(), vec![b.clone(), a.clone()]),
        Err(Error::InvalidEpimorphism(_))
    ));
    assert!(matches!(
        Epimorphism::new(g, s4, vec![a, NormalWord::identity(3)]),
        Err(Error::InvalidEpimorphism(_))
    ));
}
