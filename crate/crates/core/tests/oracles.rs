//! Worked examples checked against brute-force oracles written here, away
//! from the library's own algorithms.

use std::collections::{BTreeSet, VecDeque};

use folner::{
    augment, classify, gen_instance, rips_components, run_pipeline, AugPoint, Case, Chain,
    ChainFamily, ComponentClass, Dist, GenKind, GenParams, InstanceParams, MetricGenerator,
    PipelineOptions, Space, VarRatio,
};
use num_rational::Ratio;
use proptest::prelude::*;

fn q(n: i64) -> Dist {
    Dist::from_integer(n)
}

fn ids(space: &Space<Dist>, xs: impl IntoIterator<Item = usize>) -> Vec<String> {
    xs.into_iter().map(|x| space.id(x).to_string()).collect()
}

/// All-pairs shortest paths by relaxation over every intermediate vertex.
fn floyd_warshall(n: usize, edges: &[(usize, usize, i64)]) -> Vec<Vec<Option<i64>>> {
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for &(a, b, w) in edges {
        for (u, v) in [(a, b), (b, a)] {
            if d[u][v].is_none_or(|old| w < old) {
                d[u][v] = Some(w);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|old| a + b < old) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// Components of the `scale`-Rips graph by union-find over all pairs.
fn union_find_components(space: &Space<Dist>, scale: &Dist) -> Vec<BTreeSet<usize>> {
    let n = space.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        parent[x] = root;
        root
    }
    for x in 0..n {
        for y in x + 1..n {
            if space.dist(x, y) <= *scale {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups = std::collections::BTreeMap::<usize, BTreeSet<usize>>::new();
    for x in 0..n {
        let root = find(&mut parent, x);
        groups.entry(root).or_default().insert(x);
    }
    groups.into_values().collect()
}

#[test]
fn path_graph_shortest_paths() {
    let points = vec!["p0".to_string(), "p1".into(), "p2".into()];
    let edges = vec![("p0".into(), "p1".into(), q(1)), ("p1".into(), "p2".into(), q(1))];
    let space = Space::from_graph(points, edges).unwrap();
    let oracle = floyd_warshall(3, &[(0, 1, 1), (1, 2, 1)]);
    assert_eq!(oracle[0][2], Some(2));
    assert_eq!(space.dist(0, 2), q(2));
}

proptest! {
    #[test]
    fn graph_metric_matches_floyd_warshall(
        n in 2usize..9,
        extra in proptest::collection::vec((0usize..9, 0usize..9, 1i64..20), 0..15),
        chain_weights in proptest::collection::vec(1i64..20, 8),
    ) {
        // a spanning path keeps the graph connected
        let mut edges: Vec<(usize, usize, i64)> = (1..n).map(|i| (i - 1, i, chain_weights[i - 1])).collect();
        edges.extend(extra.into_iter().filter(|&(a, b, _)| a < n && b < n && a != b));
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let space = Space::from_graph(
            names.clone(),
            edges.iter().map(|&(a, b, w)| (names[a].clone(), names[b].clone(), q(w))).collect(),
        ).unwrap();
        let oracle = floyd_warshall(n, &edges);
        for i in 0..n {
            for j in 0..n {
                let (si, sj) = (space.index_of(&names[i]).unwrap(), space.index_of(&names[j]).unwrap());
                prop_assert_eq!(space.dist(si, sj), q(oracle[i][j].unwrap()));
            }
        }
    }

    #[test]
    fn rips_components_match_union_find(
        coords in proptest::collection::vec(0i64..60, 1..25),
        scale in 1i64..6,
    ) {
        let n = coords.len();
        let names: Vec<String> = (0..n).map(|i| format!("x{i:02}")).collect();
        // ties would break positivity; spread equal coordinates apart
        let coords: Vec<i64> = coords.iter().enumerate().map(|(i, c)| c * 100 + i as i64).collect();
        let rows = coords.iter().map(|a| coords.iter().map(|b| q((a - b).abs())).collect()).collect();
        let space = Space::from_matrix(names, rows).unwrap();
        let scale = q(scale * 100);
        let d = rips_components(&space, &scale);
        let ours: Vec<BTreeSet<usize>> = d.components.iter().map(|c| c.points.iter().copied().collect()).collect();
        prop_assert_eq!(ours, union_find_components(&space, &scale));
        for c in &d.components {
            prop_assert_eq!(c.basepoint, *c.points.iter().min().unwrap());
        }
    }
}

#[test]
fn components_of_two_paths() {
    let space = Space::<Dist>::from_generator(MetricGenerator::Paths {
        lengths: vec![5, 5],
        gap: q(100),
        prefixes: Some(vec!["q".into(), "r".into()]),
    })
    .unwrap();
    let d = rips_components(&space, &q(2));
    let oracle = union_find_components(&space, &q(2));
    assert_eq!(oracle.len(), 2);
    assert_eq!(d.components.len(), 2);
    let bases: Vec<&str> = d.components.iter().map(|c| space.id(c.basepoint)).collect();
    assert_eq!(bases, ["q0", "r0"]);
}

#[test]
fn weighted_ball_is_a_sum_of_indicators() {
    let params = GenParams {
        n: Some(10),
        radii: Some(vec![q(2), q(1)]),
        s: Some(q(2)),
        ..GenParams::default()
    };
    let inst = gen_instance::<Dist>(GenKind::WeightedBall, &params, 0).unwrap();
    // positions on the line are the numeric suffixes
    let pos = |x: usize| inst.space.id(x)[1..].parse::<i64>().unwrap();
    for x in 0..10 {
        for y in 0..10 {
            let gap = (pos(x) - pos(y)).abs();
            let expect = u64::from(gap <= 2) + u64::from(gap <= 1);
            assert_eq!(inst.chains.get(x).get(&y), expect);
        }
    }
    let p3 = inst.space.index_of("p3").unwrap();
    let twos: Vec<String> = ids(&inst.space, inst.chains.get(p3).iter().filter(|(_, v)| *v == 2).map(|(&k, _)| k));
    assert_eq!(twos, ["p2", "p3", "p4"]);
}

#[test]
fn cyclic_ball_by_breadth_first_search() {
    let params = GenParams::<Dist> {
        n: Some(12),
        k: 3,
        ..GenParams::default()
    };
    let inst = gen_instance(GenKind::CayleyCyclic, &params, 0).unwrap();
    // word lengths on the 12-cycle with steps ±1
    let mut len = [usize::MAX; 12];
    len[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for w in [(v + 1) % 12, (v + 11) % 12] {
            if len[w] == usize::MAX {
                len[w] = len[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let ball: BTreeSet<usize> = (0..12).filter(|&i| len[i] <= 3).collect();
    assert_eq!(ball.len(), 7);
    for x in 0..12 {
        let zx = inst.space.index_of(&format!("z{x}")).unwrap();
        let expect: BTreeSet<usize> = ball
            .iter()
            .map(|a| inst.space.index_of(&format!("z{}", (x + a) % 12)).unwrap())
            .collect();
        assert_eq!(inst.chains.get(zx).support_set(), expect);
        assert!(inst.chains.get(zx).is_binary());
    }
}

#[test]
fn annulus_points_follow_a_two_hop_walk() {
    let space = Space::<Dist>::from_generator(MetricGenerator::Paths {
        lengths: vec![200],
        gap: q(10),
        prefixes: Some(vec!["q".into()]),
    })
    .unwrap();
    let params = InstanceParams::new(q(1), Ratio::new(1, 2), q(2), 2).unwrap();
    assert_eq!((params.n, params.inner_radius(), params.outer_radius()), (6, q(42), q(54)));

    // lexicographically smallest point beyond 54 is q100; the shortest
    // 2-Rips path from q0 moves two steps at a time
    let mut walk = vec![0i64];
    while *walk.last().unwrap() < 100 {
        walk.push(walk.last().unwrap() + 2);
    }
    let oracle: Vec<String> = walk
        .into_iter()
        .filter(|&i| 42 < i && i <= 54)
        .take(6)
        .map(|i| format!("q{i}"))
        .collect();

    let chains = ChainFamily::from_vec((0..200).map(|x| Chain::indicator([x])).collect()).unwrap();
    let d = rips_components(&space, &q(2));
    let plan = classify(&space, &d, &chains, &params).unwrap();
    assert_eq!(plan.decomposition.components[0].class, ComponentClass::BoundedLarge);
    assert_eq!(ids(&space, plan.annulus[0].iter().copied()), oracle);
}

#[test]
fn two_point_component_hand_trace() {
    let space = Space::from_matrix(
        vec!["q0".into(), "q1".into()],
        vec![vec![q(0), q(1)], vec![q(1), q(0)]],
    )
    .unwrap();
    let both = Chain::indicator([0, 1]);
    let chains = ChainFamily::from_vec(vec![both.clone(), both]).unwrap();
    let out = run_pipeline(&space, &chains, &q(1), &Ratio::new(1, 2), &q(2), &PipelineOptions::default()).unwrap();
    let c = &out.certificate;
    // L = 1 + 2, N = 9 + 2, outer = 6 + 8 * 11, bound = 12 + 16 * 11
    assert_eq!((c.params.l, c.params.n), (3, 11));
    assert_eq!(out.plan.outer, q(94));
    assert_eq!(c.bound_radius, q(188));
    assert_eq!(c.cases, [Case::Two, Case::Two]);
    assert_eq!(c.worst_ratio, VarRatio::ZERO);
    assert_eq!(c.worst_radius, q(1));
}

#[test]
fn augmented_distances_on_two_paths() {
    let space = Space::<Dist>::from_generator(MetricGenerator::Paths {
        lengths: vec![5, 5],
        gap: q(100),
        prefixes: Some(vec!["q".into(), "r".into()]),
    })
    .unwrap();
    let d = rips_components(&space, &q(2));
    let params = InstanceParams::new(q(1), Ratio::new(1, 2), q(2), 2).unwrap();
    let aug = augment(&space, &d, &params);
    let base = |s: &str| AugPoint::Base(space.index_of(s).unwrap());
    let tail = |component, index| AugPoint::Tail { component, index };
    // hand-computed: legs of length 2j hang off q0 and r0, which sit 100 + 0 + 0 apart
    assert_eq!(aug.dist(base("q2"), tail(0, 3)).unwrap(), q(2 + 6));
    assert_eq!(aug.dist(tail(0, 1), tail(0, 3)).unwrap(), q(4));
    assert_eq!(aug.dist(base("q1"), base("r1")).unwrap(), q(1 + 100 + 1));
    assert_eq!(aug.dist(tail(0, 1), tail(1, 2)).unwrap(), q(2 + 100 + 4));
}
