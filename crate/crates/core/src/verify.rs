//! Re-checking outputs without trusting the pipeline.
//!
//! [`verify_naive`] only looks at a subset family. [`verify_certificate`]
//! rebuilds every stage from the instance and compares field by field.
//! [`flow_monitor`] exhausts all small chains on a path.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::augment::{augment, AugPoint};
use crate::chains::{check_instance, set_ratio, variation_ratio, Chain, ChainFamily, VarRatio};
use crate::error::{Error, Result};
use crate::flow::{build_flow, split, stabilize, step, FlowMap};
use crate::metric::{rips_components, PointIdx, Space};
use crate::scalar::{Quotient, Scalar};
use crate::tailor::{classify, phi, Case, Certificate, RadiusBounds, SubsetFamily};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport<T> {
    pub passed: bool,
    /// Every violation or mismatch, in a fixed order; the first one is the
    /// first divergent field.
    pub failures: Vec<String>,
    pub worst_ratio: VarRatio,
    /// `max d(x, y)` over `y` in the subset of `x`, when computed.
    pub support_radius: Option<T>,
    pub pairs_checked: usize,
}

/// Checks the naive witness conditions on a subset family: every `R`-close
/// pair has `|A_x △ A_y| / |A_x ∩ A_y| < eps`, and reports the smallest
/// support radius that works.
pub fn verify_naive<T: Scalar>(
    space: &Space<T>,
    subsets: &SubsetFamily,
    r: &T,
    epsilon: &Quotient,
) -> Result<VerifyReport<T>> {
    if subsets.len() != space.len() {
        return Err(Error::Malformed(format!(
            "{} subsets for {} points",
            subsets.len(),
            space.len()
        )));
    }
    for (x, set) in subsets.subsets.iter().enumerate() {
        if set.is_empty() {
            return Err(Error::Malformed(format!("subset of {} is empty", space.id(x))));
        }
        if let Some(&y) = set.iter().find(|&&y| y >= space.len()) {
            return Err(Error::UnknownPoint(format!("#{y}")));
        }
    }

    let per_x: Vec<(Vec<(PointIdx, VarRatio)>, T)> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let close = (x + 1..space.len())
                .filter(|&y| space.dist(x, y) <= *r)
                .map(|y| (y, set_ratio(subsets.get(x), subsets.get(y))))
                .collect();
            let radius = subsets
                .get(x)
                .iter()
                .map(|&y| space.dist(x, y))
                .max()
                .unwrap_or_else(T::zero);
            (close, radius)
        })
        .collect();

    let mut failures = Vec::new();
    let mut worst = VarRatio::ZERO;
    let mut pairs_checked = 0;
    let mut support_radius = T::zero();
    for (x, (close, radius)) in per_x.into_iter().enumerate() {
        support_radius = support_radius.max(radius);
        for (y, ratio) in close {
            pairs_checked += 1;
            worst = worst.max(ratio);
            if !ratio.less_than(epsilon) {
                failures.push(format!(
                    "ratio({}, {}) = {ratio} is not < {epsilon}",
                    space.id(x),
                    space.id(y)
                ));
            }
        }
    }
    Ok(VerifyReport {
        passed: failures.is_empty(),
        failures,
        worst_ratio: worst,
        support_radius: Some(support_radius),
        pairs_checked,
    })
}

/// Rebuilds decomposition, classification, flow and tailoring from the
/// instance and compares the result with a claimed output.
pub fn verify_certificate<T: Scalar>(
    space: &Space<T>,
    chains: &ChainFamily,
    (r, epsilon, s): (&T, &Quotient, &T),
    subsets: &SubsetFamily,
    certificate: &Certificate<T>,
) -> Result<VerifyReport<T>> {
    let report = check_instance(space, chains, r, epsilon, s)?;
    if !report.passed() {
        return Err(Error::Precondition(report.describe(space)));
    }
    let params = report.params;
    let decomposition = rips_components(space, s);
    let plan = classify(space, &decomposition, chains, &params)?;
    let aug = augment(space, &plan.decomposition, &params);
    let flow = build_flow(&aug)?;

    let rebuilt: Vec<(BTreeSet<PointIdx>, Case)> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let settled = stabilize(&flow, chains.get(x))?;
            let support: BTreeSet<AugPoint> = settled.chain.support().map(|&i| aug.point(i)).collect();
            let component = plan.decomposition.component_of[x];
            let case = Case::of(
                plan.decomposition.components[component].class,
                support.iter().any(AugPoint::is_tail),
            );
            Ok((phi(&plan, component, &support, params.n)?, case))
        })
        .collect::<Result<_>>()?;

    let mut failures = Vec::new();
    let mut check = |field: String, claimed: String, actual: String| {
        if claimed != actual {
            failures.push(format!("{field}: certificate has {claimed}, recomputed {actual}"));
        }
    };

    let c = certificate;
    check("params.R".into(), c.params.r.to_string(), params.r.to_string());
    check("params.epsilon".into(), c.params.epsilon.to_string(), params.epsilon.to_string());
    check("params.S".into(), c.params.s.to_string(), params.s.to_string());
    check("params.L".into(), c.params.l.to_string(), params.l.to_string());
    check("params.N".into(), c.params.n.to_string(), params.n.to_string());
    let bounds = RadiusBounds::of(&params);
    check("bounds.flow".into(), c.bounds.flow.to_string(), bounds.flow.to_string());
    check("bounds.small".into(), c.bounds.small.to_string(), bounds.small.to_string());
    check("bounds.large".into(), c.bounds.large.to_string(), bounds.large.to_string());
    check("bounds.locality".into(), c.bounds.locality.to_string(), bounds.locality.to_string());
    check("bound_radius".into(), c.bound_radius.to_string(), params.bound_radius().to_string());
    check("warnings".into(), c.warnings.join("; "), plan.warnings.join("; "));

    if c.cases.len() != space.len() || c.radii.len() != space.len() {
        return Err(Error::Malformed("certificate does not cover every point".into()));
    }
    let radius = |x: PointIdx, set: &BTreeSet<PointIdx>| {
        set.iter().map(|&y| space.dist(x, y)).max().unwrap_or_else(T::zero)
    };
    let mut worst_radius = T::zero();
    for (x, (set, case)) in rebuilt.iter().enumerate() {
        let id = space.id(x);
        check(format!("cases[{id}]"), c.cases[x].to_string(), case.to_string());
        // the claimed radius must match both the given and the rebuilt subset
        let given = radius(x, subsets.get(x));
        check(format!("radii[{id}]"), c.radii[x].to_string(), given.to_string());
        let actual = radius(x, set);
        check(format!("radii[{id}]"), c.radii[x].to_string(), actual.to_string());
        worst_radius = worst_radius.max(actual);
    }

    let mut pairs = Vec::new();
    for x in 0..space.len() {
        for y in x + 1..space.len() {
            if space.dist(x, y) <= *r {
                pairs.push((x, y));
            }
        }
    }
    check("pairs.len".into(), c.pairs.len().to_string(), pairs.len().to_string());
    let mut worst_ratio = VarRatio::ZERO;
    for (i, &(x, y)) in pairs.iter().enumerate() {
        let input = variation_ratio(chains.get(x), chains.get(y));
        let output = set_ratio(&rebuilt[x].0, &rebuilt[y].0);
        worst_ratio = worst_ratio.max(output);
        let Some(claimed) = c.pairs.get(i) else {
            continue;
        };
        check(
            format!("pairs[{i}]"),
            format!("({}, {})", space.id(claimed.x), space.id(claimed.y)),
            format!("({}, {})", space.id(x), space.id(y)),
        );
        check(format!("pairs[{i}].input_ratio"), claimed.input_ratio.to_string(), input.to_string());
        let given = set_ratio(subsets.get(x), subsets.get(y));
        check(format!("pairs[{i}].output_ratio"), claimed.output_ratio.to_string(), given.to_string());
        check(format!("pairs[{i}].output_ratio"), claimed.output_ratio.to_string(), output.to_string());
    }
    check("worst_ratio".into(), c.worst_ratio.to_string(), worst_ratio.to_string());
    check("worst_radius".into(), c.worst_radius.to_string(), worst_radius.to_string());

    for (x, (set, _)) in rebuilt.iter().enumerate() {
        if set != subsets.get(x) {
            let show = |s: &BTreeSet<PointIdx>| s.iter().map(|&p| space.id(p)).collect::<Vec<_>>().join(",");
            failures.push(format!(
                "subsets[{}]: given {{{}}}, recomputed {{{}}}",
                space.id(x),
                show(subsets.get(x)),
                show(set)
            ));
        }
    }

    Ok(VerifyReport {
        passed: failures.is_empty(),
        failures,
        worst_ratio,
        support_radius: Some(worst_radius),
        pairs_checked: pairs.len(),
    })
}

/// Bounds of an exhaustive flow enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonitorSpec {
    /// Points carrying input mass.
    pub points: usize,
    /// Largest entry of an input chain.
    pub max_value: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonitorReport {
    pub spec: MonitorSpec,
    pub chains: usize,
    pub pairs: usize,
    pub checks: u64,
    /// Counterexamples, at most [`MonitorReport::MAX_FAILURES`] of them.
    pub failures: Vec<String>,
}

impl MonitorReport {
    pub const MAX_FAILURES: usize = 20;

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `s_1(a)`, `s_inf(a)`, failures and the number of checks for one chain.
type ChainOutcome = (Chain<usize>, Chain<usize>, Vec<String>, u64);

/// Enumerates every chain on the first `points` vertices of a path with
/// entries at most `max_value`, and every ordered pair of them, asserting the
/// flow identities on each: mass preservation, fixed points are exactly the
/// `{0,1}`-valued chains, stabilization within `||a||_1 · ||t(a)||_1`
/// steps onto a support of size `||a||_1`, support drift of at most one
/// step, monotonicity, growth of meets, contraction of differences and no
/// increase of the variation ratio under stabilization.
pub fn flow_monitor(spec: MonitorSpec) -> MonitorReport {
    let p = spec.points;
    let v = spec.max_value;
    // long enough that no excess ever runs off the end
    let flow = FlowMap::path(p + p * v as usize + 1);
    let chains: Vec<Chain<usize>> = enumerate(p, v);

    let per_chain: Vec<ChainOutcome> = chains
        .par_iter()
        .map(|a| {
            let mut bad = Vec::new();
            let mut checks = 0;
            let mut expect = |ok: bool, what: &str| {
                checks += 1;
                if !ok {
                    bad.push(format!("{what} fails for {a:?}"));
                }
            };
            let s1 = match step(&flow, a) {
                Ok(c) => c,
                Err(e) => return (a.clone(), a.clone(), vec![format!("step failed for {a:?}: {e}")], 1),
            };
            expect(s1.l1_norm() == a.l1_norm(), "mass preservation");
            expect((s1 == *a) == a.is_binary(), "fixed points are binary");
            expect(
                s1.support().all(|&i| a.get(&i) > 0 || (i > 0 && a.get(&(i - 1)) > 1)),
                "support drift",
            );
            let (_, t) = split(a);
            let settled = match stabilize(&flow, a) {
                Ok(s) => s,
                Err(e) => return (s1, a.clone(), vec![format!("stabilize failed for {a:?}: {e}")], checks + 1),
            };
            expect(settled.iterations <= a.l1_norm() * t.l1_norm(), "stabilization bound");
            expect(settled.chain.is_binary(), "binary limit");
            expect(settled.chain.support_len() as u64 == a.l1_norm(), "support size");
            (s1, settled.chain, bad, checks)
        })
        .collect();

    let mut failures = Vec::new();
    let mut checks = 0;
    for (_, _, bad, n) in &per_chain {
        checks += n;
        failures.extend(bad.iter().cloned());
    }

    let pair_results: Vec<(Vec<String>, u64)> = (0..chains.len())
        .into_par_iter()
        .map(|i| {
            let mut bad = Vec::new();
            let mut checks = 0;
            let (a, (s1a, sinfa, _, _)) = (&chains[i], &per_chain[i]);
            for (j, b) in chains.iter().enumerate() {
                let (s1b, sinfb, _, _) = &per_chain[j];
                let mut expect = |ok: bool, what: &str| {
                    checks += 1;
                    if !ok && bad.len() < MonitorReport::MAX_FAILURES {
                        bad.push(format!("{what} fails for {a:?} and {b:?}"));
                    }
                };
                expect(!a.le(b) || s1a.le(s1b), "monotonicity");
                expect(s1a.meet(s1b).l1_norm() >= a.meet(b).l1_norm(), "meet growth");
                expect(s1a.diff_norm(s1b) <= a.diff_norm(b), "difference contraction");
                expect(sinfa.meet(sinfb).l1_norm() >= a.meet(b).l1_norm(), "limit meet growth");
                expect(sinfa.diff_norm(sinfb) <= a.diff_norm(b), "limit difference contraction");
                if !a.is_empty() && !b.is_empty() {
                    expect(
                        variation_ratio(sinfa, sinfb) <= variation_ratio(a, b),
                        "ratio does not grow",
                    );
                }
                if i == j {
                    expect(variation_ratio(sinfa, sinfb) == VarRatio::ZERO, "equal pair has ratio 0");
                }
            }
            (bad, checks)
        })
        .collect();
    for (bad, n) in pair_results {
        checks += n;
        failures.extend(bad);
    }
    failures.truncate(MonitorReport::MAX_FAILURES);

    MonitorReport {
        spec,
        chains: chains.len(),
        pairs: chains.len() * chains.len(),
        checks,
        failures,
    }
}

/// All chains on `0..p` with entries in `0..=v`, in counting order.
fn enumerate(p: usize, v: u64) -> Vec<Chain<usize>> {
    let mut out = Vec::new();
    let mut digits = vec![0u64; p];
    loop {
        out.push(Chain::from_entries(digits.iter().copied().enumerate()));
        let mut i = 0;
        loop {
            if i == p {
                return out;
            }
            if digits[i] < v {
                digits[i] += 1;
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}
