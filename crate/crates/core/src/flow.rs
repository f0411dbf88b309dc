//! Integer token flow along a spanning forest oriented towards infinity.
//!
//! Each point keeps one unit of its mass and pushes the excess one step
//! along `σ`. Repeating this until the chain is `{0,1}`-valued spreads the
//! mass of `a` over exactly `||a||_1` distinct points.

use crate::augment::{AugPoint, AugmentedSpace};
use crate::chains::Chain;
use crate::error::{Error, Result};
use crate::metric::{Component, ComponentClass, PointIdx, Space};
use crate::scalar::Scalar;

/// The successor map `σ` on the dense indices of an augmented space.
/// `None` marks the end of the materialized window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowMap {
    sigma: Vec<Option<usize>>,
}

impl FlowMap {
    /// A map with no edges on `len` points.
    pub fn empty(len: usize) -> Self {
        FlowMap {
            sigma: vec![None; len],
        }
    }

    /// `0 -> 1 -> ... -> len-1`.
    pub fn path(len: usize) -> Self {
        FlowMap {
            sigma: (0..len).map(|i| (i + 1 < len).then_some(i + 1)).collect(),
        }
    }

    pub fn from_sigma(sigma: Vec<Option<usize>>) -> Result<Self> {
        if let Some(&bad) = sigma.iter().flatten().find(|&&s| s >= sigma.len()) {
            return Err(Error::Malformed(format!("successor {bad} out of range")));
        }
        let map = FlowMap { sigma };
        map.check_proper()?;
        Ok(map)
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn successor(&self, i: usize) -> Option<usize> {
        self.sigma[i]
    }

    /// Edges `(x, σ(x))`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sigma
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| (i, s)))
    }

    /// Fails if some orbit revisits a point.
    pub fn check_proper(&self) -> Result<()> {
        // 0 = unvisited, 1 = on current walk, 2 = known to terminate
        let mut state = vec![0u8; self.sigma.len()];
        for start in 0..self.sigma.len() {
            let mut walk = Vec::new();
            let mut cur = Some(start);
            while let Some(v) = cur {
                match state[v] {
                    2 => break,
                    1 => {
                        return Err(Error::invariant(
                            "proper orbit",
                            format!("successor map has a cycle through dense point {v}"),
                        ))
                    }
                    _ => {
                        state[v] = 1;
                        walk.push(v);
                        cur = self.sigma[v];
                    }
                }
            }
            for v in walk {
                state[v] = 2;
            }
        }
        Ok(())
    }

    /// Number of `σ` steps from `i` to the end of the window.
    pub fn steps_to_end(&self, i: usize) -> usize {
        let mut n = 0;
        let mut cur = i;
        while let Some(next) = self.sigma[cur] {
            n += 1;
            cur = next;
        }
        n
    }

    /// Orients the BFS tree of a bounded component towards its basepoint and
    /// continues along the tail starting at dense index `tail_start`.
    pub fn attach_tree_with_tail<T: Scalar>(
        &mut self,
        space: &Space<T>,
        component: &Component,
        scale: &T,
        tail_start: usize,
        tail_len: u64,
    ) {
        let tree = space.rips_bfs(&component.points, &[component.basepoint], scale);
        for (&child, &parent) in &tree.parent {
            self.sigma[child] = Some(parent);
        }
        if tail_len > 0 {
            self.sigma[component.basepoint] = Some(tail_start);
            for j in 0..tail_len as usize - 1 {
                self.sigma[tail_start + j] = Some(tail_start + j + 1);
            }
            self.sigma[tail_start + tail_len as usize - 1] = None;
        }
    }

    /// Sends every point of the component towards the ray along a BFS forest
    /// seeded with the ray points, then along the ray to its last point.
    pub fn attach_ray<T: Scalar>(
        &mut self,
        space: &Space<T>,
        component: &Component,
        ray: &[PointIdx],
        scale: &T,
    ) -> Result<()> {
        validate_ray(space, component, ray, scale).map_err(Error::Precondition)?;
        let tree = space.rips_bfs(&component.points, ray, scale);
        for (&child, &parent) in &tree.parent {
            self.sigma[child] = Some(parent);
        }
        for w in ray.windows(2) {
            self.sigma[w[0]] = Some(w[1]);
        }
        self.sigma[*ray.last().expect("validated")] = None;
        Ok(())
    }
}

/// A ray must start at the basepoint, stay inside the component, never
/// repeat a point and only take steps of length at most `scale`.
pub fn validate_ray<T: Scalar>(
    space: &Space<T>,
    component: &Component,
    ray: &[PointIdx],
    scale: &T,
) -> std::result::Result<(), String> {
    let Some(&first) = ray.first() else {
        return Err("ray is empty".into());
    };
    if first != component.basepoint {
        return Err(format!(
            "ray starts at {} but the component basepoint is {}",
            space.id(first),
            space.id(component.basepoint)
        ));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &p in ray {
        if component.points.binary_search(&p).is_err() {
            return Err(format!("ray point {} lies outside the component", space.id(p)));
        }
        if !seen.insert(p) {
            return Err(format!("ray revisits {}", space.id(p)));
        }
    }
    for w in ray.windows(2) {
        let d = space.dist(w[0], w[1]);
        if d > *scale {
            return Err(format!(
                "ray step {} -> {} has length {d} > S = {scale}",
                space.id(w[0]),
                space.id(w[1])
            ));
        }
    }
    Ok(())
}

/// Builds `σ` on the whole augmented space: trees into tails for bounded
/// components, forests into the designated ray for emulated unbounded ones.
pub fn build_flow<T: Scalar>(aug: &AugmentedSpace<'_, T>) -> Result<FlowMap> {
    let space = aug.base();
    let decomposition = aug.decomposition();
    let scale = &decomposition.scale;
    let mut flow = FlowMap::empty(aug.len());
    for c in &decomposition.components {
        if c.class == ComponentClass::UnboundedEmulated {
            let ray = c.ray.as_ref().ok_or_else(|| {
                Error::invariant("ray", format!("component {} is unbounded without a ray", c.id))
            })?;
            flow.attach_ray(space, c, ray, scale)?;
        } else {
            let start = aug.dense_index(AugPoint::Tail {
                component: c.id,
                index: 1,
            })?;
            flow.attach_tree_with_tail(space, c, scale, start, aug.tail_cap());
        }
    }
    for (x, y) in flow.edges() {
        let d = aug.dist(aug.point(x), aug.point(y))?;
        if d > *scale {
            return Err(Error::invariant(
                "sigma edge length",
                format!(
                    "edge {} -> {} has length {d} > S",
                    aug.label(aug.point(x)),
                    aug.label(aug.point(y))
                ),
            ));
        }
    }
    flow.check_proper()?;
    Ok(flow)
}

/// `b(a)`, the indicator of the support, and `t(a) = a - b(a)`.
pub fn split<K: Ord + Clone>(a: &Chain<K>) -> (Chain<K>, Chain<K>) {
    let b = Chain::indicator(a.support().cloned());
    let t = Chain::from_entries(a.iter().map(|(k, v)| (k.clone(), v - 1)));
    (b, t)
}

/// One application of the flow: `s1(a)(x) = b(a)(x) + Σ_{σ(y)=x} t(a)(y)`.
pub fn step(flow: &FlowMap, a: &Chain<usize>) -> Result<Chain<usize>> {
    let mut out = Chain::new();
    for (&y, v) in a.iter() {
        out.add(y, 1);
        if v > 1 {
            match flow.successor(y) {
                Some(next) => out.add(next, v - 1),
                None => {
                    return Err(Error::invariant(
                        "flow window",
                        format!("excess {} at dense point {y}, which has no successor", v - 1),
                    ))
                }
            }
        }
    }
    Ok(out)
}

/// Result of [`stabilize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stabilized {
    pub chain: Chain<usize>,
    pub iterations: u64,
    /// `||a||_1 · ||t(a)||_1`.
    pub bound: u64,
}

/// Iterates the flow to its `{0,1}`-valued fixed point.
pub fn stabilize(flow: &FlowMap, a: &Chain<usize>) -> Result<Stabilized> {
    stabilize_traced(flow, a, |_, _| {})
}

/// As [`stabilize`], calling `observe(n, s_n(a))` for `n = 0, 1, ...`.
pub fn stabilize_traced(
    flow: &FlowMap,
    a: &Chain<usize>,
    mut observe: impl FnMut(u64, &Chain<usize>),
) -> Result<Stabilized> {
    let mass = a.l1_norm();
    let (_, t) = split(a);
    let bound = mass * t.l1_norm();
    let mut cur = a.clone();
    let mut iterations = 0;
    observe(0, &cur);
    while !cur.is_binary() {
        if iterations >= bound {
            return Err(Error::invariant(
                "stabilization bound",
                format!("not {{0,1}}-valued after {bound} steps"),
            ));
        }
        cur = step(flow, &cur)?;
        iterations += 1;
        observe(iterations, &cur);
    }
    if cur.support_len() as u64 != mass {
        return Err(Error::invariant(
            "support size",
            format!("|supp| = {} but mass is {mass}", cur.support_len()),
        ));
    }
    Ok(Stabilized {
        chain: cur,
        iterations,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::augment;
    use crate::chains::InstanceParams;
    use crate::metric::{rips_components, MetricGenerator};
    use num_rational::{Ratio, Rational64};
    use proptest::prelude::*;

    type Q = Rational64;

    fn c(entries: &[(usize, u64)]) -> Chain<usize> {
        Chain::from_entries(entries.iter().copied())
    }

    /// Reference evaluation of one step: for every target point, gather the
    /// kept unit and the excess of all its preimages.
    fn step_by_gathering(sigma: &[Option<usize>], a: &Chain<usize>) -> Chain<usize> {
        let mut out = Chain::new();
        for x in 0..sigma.len() {
            let keep = u64::from(a.get(&x) > 0);
            let inflow: u64 = (0..sigma.len())
                .filter(|&y| sigma[y] == Some(x))
                .map(|y| a.get(&y).saturating_sub(1))
                .sum();
            out.add(x, keep + inflow);
        }
        out
    }

    #[test]
    fn split_examples() {
        assert_eq!(split(&c(&[(0, 3)])), (c(&[(0, 1)]), c(&[(0, 2)])));
        assert!(split(&c(&[(0, 1), (4, 1)])).1.is_empty());
        assert_eq!(
            split(&c(&[(0, 2), (1, 1)])),
            (c(&[(0, 1), (1, 1)]), c(&[(0, 1)]))
        );
    }

    #[test]
    fn step_examples() {
        let flow = FlowMap::path(4);
        assert_eq!(step(&flow, &c(&[(0, 3)])).unwrap(), c(&[(0, 1), (1, 2)]));
        assert_eq!(
            step(&flow, &c(&[(0, 1), (1, 2)])).unwrap(),
            c(&[(0, 1), (1, 1), (2, 1)])
        );
        let binary = c(&[(0, 1), (2, 1)]);
        assert_eq!(step(&flow, &binary).unwrap(), binary);
    }

    #[test]
    fn stabilize_examples() {
        let flow = FlowMap::path(8);
        let s = stabilize(&flow, &c(&[(0, 3)])).unwrap();
        assert_eq!(s.chain, c(&[(0, 1), (1, 1), (2, 1)]));
        assert_eq!(s.iterations, 2);
        assert_eq!(s.bound, 6);

        let binary = c(&[(1, 1), (3, 1)]);
        let s = stabilize(&flow, &binary).unwrap();
        assert_eq!((s.chain, s.iterations), (binary, 0));

        let mut trace = Vec::new();
        let s = stabilize_traced(&flow, &c(&[(0, 2), (1, 2)]), |n, ch| {
            trace.push((n, ch.clone()))
        })
        .unwrap();
        assert_eq!(trace[1].1, c(&[(0, 1), (1, 2), (2, 1)]));
        assert_eq!(trace[2].1, c(&[(0, 1), (1, 1), (2, 2)]));
        assert_eq!(trace[3].1, c(&[(0, 1), (1, 1), (2, 1), (3, 1)]));
        assert_eq!(s.iterations, 3);
        assert!(s.iterations <= 4 * 2);
    }

    #[test]
    fn single_column_spreads_in_v_minus_one_steps() {
        let flow = FlowMap::path(64);
        for v in 1..20u64 {
            let s = stabilize(&flow, &c(&[(0, v)])).unwrap();
            assert_eq!(s.iterations, v - 1);
            assert_eq!(s.chain, Chain::indicator(0..v as usize));
        }
    }

    #[test]
    fn window_overflow_is_reported() {
        let flow = FlowMap::path(2);
        let err = stabilize(&flow, &c(&[(0, 3)])).unwrap_err();
        assert!(matches!(err, Error::Invariant { invariant: "flow window", .. }));
    }

    #[test]
    fn cycles_are_rejected() {
        let err = FlowMap::from_sigma(vec![Some(1), Some(2), Some(0)]).unwrap_err();
        assert!(matches!(err, Error::Invariant { .. }));
        FlowMap::from_sigma(vec![Some(1), Some(2), None]).unwrap();
    }

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    #[test]
    fn bounded_component_flows_into_its_tail() {
        let space = Space::<Q>::from_generator(MetricGenerator::Paths {
            lengths: vec![3],
            gap: q(10),
            prefixes: Some(vec!["q".into()]),
        })
        .unwrap();
        let d = rips_components(&space, &q(2));
        let p = InstanceParams::new(q(1), Ratio::new(1, 2), q(2), 2).unwrap();
        let aug = augment(&space, &d, &p);
        let flow = build_flow(&aug).unwrap();
        let (q0, q1, q2) = (0, 1, 2);
        assert_eq!(flow.successor(q1), Some(q0));
        assert_eq!(flow.successor(q2), Some(q0));
        let t1 = aug.dense_index(AugPoint::Tail { component: 0, index: 1 }).unwrap();
        assert_eq!(flow.successor(q0), Some(t1));
        assert_eq!(flow.successor(t1), Some(t1 + 1));
        assert_eq!(flow.steps_to_end(q2), 1 + p.n as usize);
        for (x, y) in flow.edges() {
            assert!(aug.dist(aug.point(x), aug.point(y)).unwrap() <= q(2));
        }
    }

    #[test]
    fn singleton_component() {
        let space = Space::<Q>::from_matrix(vec!["x".into()], vec![vec![q(0)]]).unwrap();
        let d = rips_components(&space, &q(2));
        let p = InstanceParams::new(q(1), Ratio::new(1, 2), q(2), 2).unwrap();
        let aug = augment(&space, &d, &p);
        let flow = build_flow(&aug).unwrap();
        assert_eq!(flow.successor(0), Some(1));
        assert_eq!(flow.successor(1), Some(2));
        assert_eq!(aug.point(1), AugPoint::Tail { component: 0, index: 1 });
    }

    #[test]
    fn ray_validation() {
        let space = Space::<Q>::from_generator(MetricGenerator::Line { n: 6 }).unwrap();
        let d = rips_components(&space, &q(1));
        let comp = &d.components[0];
        let id = |s: &str| space.index_of(s).unwrap();
        let good: Vec<_> = ["p0", "p1", "p2", "p3", "p4", "p5"].iter().map(|s| id(s)).collect();
        validate_ray(&space, comp, &good, &q(1)).unwrap();
        let jump = vec![id("p0"), id("p2")];
        assert!(validate_ray(&space, comp, &jump, &q(1)).unwrap_err().contains("length"));
        let repeat = vec![id("p0"), id("p1"), id("p0")];
        assert!(validate_ray(&space, comp, &repeat, &q(1)).unwrap_err().contains("revisits"));
        let wrong_start = vec![id("p1"), id("p2")];
        assert!(validate_ray(&space, comp, &wrong_start, &q(1)).is_err());

        let mut flow = FlowMap::empty(6);
        flow.attach_ray(&space, comp, &good, &q(1)).unwrap();
        assert_eq!(flow.successor(id("p4")), Some(id("p5")));
        assert_eq!(flow.successor(id("p5")), None);
    }

    fn path_chain(len: usize, max: u64) -> impl Strategy<Value = Chain<usize>> {
        proptest::collection::vec(0..=max, len).prop_map(|v| v.into_iter().enumerate().collect())
    }

    proptest! {
        #[test]
        fn step_matches_gathering_oracle(
            a in path_chain(6, 4),
            parents in proptest::collection::vec(0usize..3, 5),
        ) {
            // random forest on 12 points: point i < 6 points to a later point
            let mut sigma: Vec<Option<usize>> = (0..12).map(|i| (i + 1 < 12).then_some(i + 1)).collect();
            for (i, p) in parents.iter().enumerate() {
                sigma[i] = Some(i + 1 + p);
            }
            let flow = FlowMap::from_sigma(sigma.clone()).unwrap();
            let got = step(&flow, &a).unwrap();
            prop_assert_eq!(got.clone(), step_by_gathering(&sigma, &a));
            prop_assert_eq!(got.l1_norm(), a.l1_norm());
        }

        #[test]
        fn stabilization_within_bound(a in path_chain(6, 5)) {
            prop_assume!(!a.is_empty());
            let flow = FlowMap::path(6 + 30);
            let s = stabilize(&flow, &a).unwrap();
            prop_assert!(s.iterations <= s.bound);
            prop_assert_eq!(s.chain.support_len() as u64, a.l1_norm());
        }
    }
}
