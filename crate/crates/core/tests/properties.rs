use std::collections::{BTreeSet, VecDeque};

use folner::{
    check_instance, classify, gen_instance, phi, rips_components, run_pipeline, set_ratio,
    variation_ratio, verify_certificate, verify_naive, AugPoint, Case, Chain, ChainFamily,
    ComponentClass, Dist, GenKind, GenParams, InstanceParams, MetricGenerator, PipelineOptions,
    Space, VarRatio,
};
use num_rational::Ratio;
use proptest::prelude::*;

fn q(n: i64) -> Dist {
    Dist::from_integer(n)
}

fn generator() -> impl Strategy<Value = MetricGenerator<Dist>> {
    prop_oneof![
        (1usize..30).prop_map(|n| MetricGenerator::Line { n }),
        (1usize..6, 1usize..6).prop_map(|(width, height)| MetricGenerator::Grid { width, height }),
        (proptest::collection::vec(1usize..8, 1..4), 1i64..5).prop_map(|(lengths, gap)| {
            MetricGenerator::Paths {
                lengths,
                gap: q(gap),
                prefixes: None,
            }
        }),
        (3usize..20).prop_map(|n| MetricGenerator::CayleyCyclic {
            n,
            generators: vec![1, -1],
        }),
    ]
}

proptest! {
    #[test]
    fn generated_spaces_are_metric(generator in generator()) {
        let space = Space::from_generator(generator).unwrap();
        prop_assert!(space.check_axioms().is_ok());
    }

    #[test]
    fn growth_profile_is_monotone(generator in generator(), r in 0i64..6) {
        let space = Space::from_generator(generator).unwrap();
        prop_assert_eq!(space.growth_profile(&q(0)), 1);
        prop_assert!(space.growth_profile(&q(r)) <= space.growth_profile(&q(r + 1)));
    }

    #[test]
    fn components_are_separated_and_connected(generator in generator(), scale in 1i64..4) {
        let space = Space::from_generator(generator).unwrap();
        let scale = q(scale);
        let d = rips_components(&space, &scale);
        let mut seen = BTreeSet::new();
        for c in &d.components {
            for &x in &c.points {
                prop_assert!(seen.insert(x));
                prop_assert_eq!(d.component_of[x], c.id);
            }
            // breadth-first search inside the component reaches everything
            let mut reached = BTreeSet::from([c.points[0]]);
            let mut queue = VecDeque::from([c.points[0]]);
            while let Some(v) = queue.pop_front() {
                for &w in &c.points {
                    if space.dist(v, w) <= scale && reached.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
            prop_assert_eq!(reached.len(), c.points.len());
        }
        prop_assert_eq!(seen.len(), space.len());
        for x in 0..space.len() {
            for y in 0..space.len() {
                if d.component_of[x] != d.component_of[y] {
                    prop_assert!(space.dist(x, y) > scale);
                }
            }
        }
    }

    #[test]
    fn generators_are_deterministic(seed in any::<u64>(), paths in 1usize..6) {
        let params = GenParams::<Dist> {
            paths: Some(paths),
            max_len: 40,
            ..GenParams::default()
        };
        let a = gen_instance(GenKind::DisjointUnionPaths, &params, seed).unwrap();
        let b = gen_instance(GenKind::DisjointUnionPaths, &params, seed).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
    }
}

/// Weighted-ball chains on a union of paths long enough that some
/// components come out large, with `eps` just above the worst input ratio.
fn pipeline_instance() -> impl Strategy<Value = (GenParams<Dist>, u64)> {
    (
        1usize..4,
        prop_oneof![Just(vec![q(1)]), Just(vec![q(2), q(1)]), Just(vec![q(0)]), Just(vec![q(2)])],
        any::<u64>(),
        prop_oneof![Just(q(1)), Just(Dist::new(1, 2))],
    )
        .prop_map(|(paths, radii, seed, r)| {
            let params = GenParams {
                paths: Some(paths),
                min_len: 5,
                max_len: 400,
                radii: Some(radii),
                s: Some(q(2)),
                r,
                epsilon: Ratio::from_integer(1),
                ..GenParams::default()
            };
            (params, seed)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pipeline_output_is_a_naive_witness((params, seed) in pipeline_instance()) {
        let mut inst = gen_instance(GenKind::WeightedBall, &params, seed).unwrap();
        let report = check_instance(&inst.space, &inst.chains, &inst.r, &inst.epsilon, &inst.s).unwrap();
        // singleton chains with R >= 1 are no witness at any eps
        let VarRatio::Finite(worst) = report.worst_ratio else {
            return Err(TestCaseError::reject("infinite input ratio"));
        };
        // tighten eps to just above the worst input ratio
        inst.epsilon = worst + Ratio::new(1, 100);
        let out = run_pipeline(&inst.space, &inst.chains, &inst.r, &inst.epsilon, &inst.s, &PipelineOptions::default()).unwrap();
        let cert = &out.certificate;

        let naive = verify_naive(&inst.space, &out.subsets, &inst.r, &inst.epsilon).unwrap();
        prop_assert!(naive.passed, "{:?}", naive.failures);
        prop_assert!(naive.support_radius.unwrap() <= cert.bound_radius);

        for pair in &cert.pairs {
            let input = variation_ratio(inst.chains.get(pair.x), inst.chains.get(pair.y));
            let output = set_ratio(out.subsets.get(pair.x), out.subsets.get(pair.y));
            prop_assert_eq!(pair.input_ratio, input);
            prop_assert_eq!(pair.output_ratio, output);
            prop_assert!(output <= input);
        }
        for (x, case) in cert.cases.iter().enumerate() {
            let bound = match case {
                Case::One => &cert.bounds.flow,
                Case::Two => &cert.bounds.small,
                Case::ThreeA | Case::ThreeB => &cert.bounds.large,
            };
            prop_assert!(cert.radii[x] <= *bound);
            prop_assert!(out.subsets.get(x).iter().all(|&y| inst.space.dist(x, y) <= cert.radii[x]));
        }

        let again = verify_certificate(&inst.space, &inst.chains, (&inst.r, &inst.epsilon, &inst.s), &out.subsets, cert).unwrap();
        prop_assert!(again.passed, "{:?}", again.failures);
    }

    #[test]
    fn phi_is_injective_off_the_annulus(
        bases in proptest::collection::btree_set(0usize..40, 0..10),
        tails in proptest::collection::btree_set(1u64..=6, 0..6),
    ) {
        prop_assume!(!bases.is_empty() || !tails.is_empty());
        let space = Space::<Dist>::from_generator(MetricGenerator::Line { n: 200 }).unwrap();
        let chains = ChainFamily::from_vec((0..200).map(|x| Chain::indicator([x])).collect()).unwrap();
        let params = InstanceParams::new(q(1), Ratio::new(1, 2), q(2), 2).unwrap();
        let plan = classify(&space, &rips_components(&space, &q(2)), &chains, &params).unwrap();
        prop_assert_eq!(plan.decomposition.components[0].class, ComponentClass::BoundedLarge);

        // line ids sort as p0, p1, p10, p100, ...; pick base points by id
        let line = |i: usize| space.index_of(&format!("p{i}")).unwrap();
        let set: BTreeSet<AugPoint> = bases
            .iter()
            .map(|&i| AugPoint::Base(line(i)))
            .chain(tails.iter().map(|&index| AugPoint::Tail { component: 0, index }))
            .collect();
        let z: BTreeSet<usize> = plan.annulus[0].iter().copied().collect();
        prop_assert!(set.iter().filter_map(AugPoint::base).all(|p| !z.contains(&p)));
        prop_assert_eq!(phi(&plan, 0, &set, params.n).unwrap().len(), set.len());
    }
}

#[test]
fn fault_injection_is_detected() {
    let params = GenParams {
        n: Some(120),
        radii: Some(vec![q(2), q(1)]),
        s: Some(q(2)),
        r: q(1),
        epsilon: Ratio::from_integer(1),
        ..GenParams::default()
    };
    let inst = gen_instance::<Dist>(GenKind::Line, &params, 0).unwrap();
    let out = run_pipeline(&inst.space, &inst.chains, &inst.r, &inst.epsilon, &inst.s, &PipelineOptions::default()).unwrap();
    let check = |subsets: &folner::SubsetFamily, cert: &folner::Certificate<Dist>| {
        verify_certificate(&inst.space, &inst.chains, (&inst.r, &inst.epsilon, &inst.s), subsets, cert).unwrap()
    };
    assert!(check(&out.subsets, &out.certificate).passed);

    let mut cert = out.certificate.clone();
    cert.pairs[7].output_ratio = VarRatio::Finite(Ratio::new(1, 1000));
    let report = check(&out.subsets, &cert);
    assert!(!report.passed);
    assert!(report.failures[0].starts_with("pairs[7].output_ratio"), "{:?}", report.failures);

    let mut subsets = out.subsets.clone();
    let x = inst.space.index_of("p60").unwrap();
    let far = *subsets.subsets[x].iter().max_by_key(|&&y| inst.space.dist(x, y)).unwrap();
    subsets.subsets[x].remove(&far);
    let report = check(&subsets, &out.certificate);
    assert!(!report.passed);
    let first = &report.failures[0];
    assert!(first.starts_with("radii[") || first.starts_with("pairs["), "{first}");
}

#[test]
fn case_three_b_is_taken_on_a_long_line() {
    let params = GenParams {
        n: Some(800),
        radii: Some(vec![q(2), q(1)]),
        s: Some(q(2)),
        r: q(1),
        epsilon: Ratio::from_integer(1),
        ..GenParams::default()
    };
    let inst = gen_instance::<Dist>(GenKind::Line, &params, 0).unwrap();
    let out = run_pipeline(&inst.space, &inst.chains, &inst.r, &inst.epsilon, &inst.s, &PipelineOptions::default()).unwrap();
    let threes: Vec<usize> = (0..800).filter(|&x| out.certificate.cases[x] == Case::ThreeB).collect();
    assert!(!threes.is_empty());
    assert!(out.stats.case3b_pairs > 0);
    let base = out.plan.decomposition.components[0].basepoint;
    for &x in &threes {
        assert!(inst.space.dist(x, base) <= out.certificate.bounds.locality);
    }
}

#[test]
fn other_scalar_types_agree() {
    let run = |kind| {
        let params = GenParams::<i64> {
            n: Some(60),
            radii: Some(vec![2, 1]),
            s: Some(2),
            r: 1,
            epsilon: Ratio::from_integer(1),
            ..GenParams::default()
        };
        let inst = gen_instance(kind, &params, 0).unwrap();
        run_pipeline(&inst.space, &inst.chains, &inst.r, &inst.epsilon, &inst.s, &PipelineOptions::default()).unwrap()
    };
    let ints = run(GenKind::Line);

    let params = GenParams::<num_rational::BigRational> {
        n: Some(60),
        radii: Some(vec![big(2), big(1)]),
        s: Some(big(2)),
        r: big(1),
        epsilon: Ratio::from_integer(1),
        ..GenParams::default()
    };
    let inst = gen_instance(GenKind::Line, &params, 0).unwrap();
    let bigs = run_pipeline(&inst.space, &inst.chains, &inst.r, &inst.epsilon, &inst.s, &PipelineOptions { jobs: Some(2), trace: false }).unwrap();

    assert_eq!(ints.subsets, bigs.subsets);
    assert_eq!(ints.certificate.cases, bigs.certificate.cases);
    assert_eq!(ints.certificate.worst_ratio, bigs.certificate.worst_ratio);
}

fn big(n: i64) -> num_rational::BigRational {
    num_rational::BigRational::from_integer(n.into())
}
