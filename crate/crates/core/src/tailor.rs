//! Classification of components, annulus points, the tailoring map and the
//! end-to-end construction of subset families with a certificate.
//!
//! Components come in three flavours:
//!
//! * emulated unbounded ones keep the flowed supports as they are (case 1);
//! * small bounded ones, contained in `B(x_λ, 3S + 4SN)`, are replaced
//!   wholesale by the component (case 2);
//! * large bounded ones map tail point `λ#i` to a designated point `z^(i)`
//!   of the annulus `3S + 3SN < d(x_λ, ·) <= 3S + 4SN` (cases 3a/3b).

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::augment::{augment, AugPoint, AugmentedSpace};
use crate::chains::{check_instance, set_ratio, variation_ratio, ChainFamily, InstanceParams, VarRatio};
use crate::error::{Error, Result};
use crate::flow::{build_flow, stabilize, stabilize_traced, FlowMap};
use crate::metric::{rips_components, Component, ComponentClass, Decomposition, PointIdx, Space};
use crate::scalar::{Quotient, Scalar};

/// Finalized classification plus the annulus points of large components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailorPlan<T> {
    pub decomposition: Decomposition<T>,
    /// `z^(1..=N)` for large components, empty otherwise.
    pub annulus: Vec<Vec<PointIdx>>,
    pub inner: T,
    pub outer: T,
    /// Rejected unbounded hints and similar non-fatal notes.
    pub warnings: Vec<String>,
}

impl<T: Scalar> TailorPlan<T> {
    pub fn component(&self, id: usize) -> &Component {
        &self.decomposition.components[id]
    }

    pub fn class_of(&self, x: PointIdx) -> ComponentClass {
        self.decomposition.component(x).class
    }
}

/// Labels every component and picks annulus points for the large ones.
///
/// A component carrying an unbounded hint is emulated only if its ray is a
/// valid Rips path from the basepoint and every chain of the component
/// stabilizes without pushing mass past the end of the ray. Otherwise the
/// hint is dropped with a warning and the component is treated as bounded.
pub fn classify<T: Scalar>(
    space: &Space<T>,
    decomposition: &Decomposition<T>,
    chains: &ChainFamily,
    params: &InstanceParams<T>,
) -> Result<TailorPlan<T>> {
    let mut decomposition = decomposition.clone();
    let mut warnings = Vec::new();
    let outer = params.outer_radius();
    let scale = decomposition.scale.clone();

    for c in decomposition.components.iter_mut() {
        if let Some(ray) = c.ray.clone() {
            match emulation_window(space, c, &ray, &scale, chains) {
                Ok(()) => {
                    c.class = ComponentClass::UnboundedEmulated;
                    continue;
                }
                Err(why) => {
                    warnings.push(format!(
                        "unbounded hint for the component of {} rejected: {why}; treating it as bounded",
                        space.id(c.points[0])
                    ));
                    c.ray = None;
                    c.basepoint = c.points[0];
                }
            }
        }
        let large = c
            .points
            .iter()
            .any(|&p| space.dist(c.basepoint, p) > outer);
        c.class = if large {
            ComponentClass::BoundedLarge
        } else {
            ComponentClass::BoundedSmall
        };
    }

    let annulus = decomposition
        .components
        .iter()
        .map(|c| match c.class {
            ComponentClass::BoundedLarge => annulus_points(space, c, &scale, params),
            _ => Ok(Vec::new()),
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(TailorPlan {
        decomposition,
        annulus,
        inner: params.inner_radius(),
        outer,
        warnings,
    })
}

fn emulation_window<T: Scalar>(
    space: &Space<T>,
    component: &Component,
    ray: &[PointIdx],
    scale: &T,
    chains: &ChainFamily,
) -> std::result::Result<(), String> {
    let mut flow = FlowMap::empty(space.len());
    flow.attach_ray(space, component, ray, scale)
        .map_err(|e| e.to_string())?;
    for &x in &component.points {
        stabilize(&flow, chains.get(x)).map_err(|_| {
            format!(
                "the flow of the chain of {} does not settle before the end of the ray",
                space.id(x)
            )
        })?;
    }
    Ok(())
}

/// `N` distinct points of the component in the annulus around the
/// basepoint, taken in order along the BFS path to the lexicographically
/// smallest point beyond the outer radius.
pub fn annulus_points<T: Scalar>(
    space: &Space<T>,
    component: &Component,
    scale: &T,
    params: &InstanceParams<T>,
) -> Result<Vec<PointIdx>> {
    let inner = params.inner_radius();
    let outer = params.outer_radius();
    let base = component.basepoint;
    let target = component
        .points
        .iter()
        .copied()
        .find(|&p| space.dist(base, p) > outer)
        .ok_or_else(|| {
            Error::invariant(
                "annulus",
                format!("component of {} does not leave the outer ball", space.id(base)),
            )
        })?;
    let tree = space.rips_bfs(&component.points, &[base], scale);
    let path = tree
        .path_to(target)
        .ok_or_else(|| Error::invariant("annulus", "target not reachable in the Rips graph"))?;
    let z: Vec<PointIdx> = path
        .into_iter()
        .filter(|&p| {
            let d = space.dist(base, p);
            inner < d && d <= outer
        })
        .take(params.n as usize)
        .collect();
    if z.len() < params.n as usize {
        return Err(Error::invariant(
            "annulus",
            format!(
                "only {} annulus points on the path from {} (need {})",
                z.len(),
                space.id(base),
                params.n
            ),
        ));
    }
    Ok(z)
}

/// The tailoring map of one component applied to a non-empty subset of its
/// truncated augmentation.
pub fn phi<T: Scalar>(
    plan: &TailorPlan<T>,
    component: usize,
    set: &BTreeSet<AugPoint>,
    tail_cap: u64,
) -> Result<BTreeSet<PointIdx>> {
    if set.is_empty() {
        return Err(Error::invariant("tailoring", "empty set"));
    }
    let c = plan.component(component);
    let mut out = BTreeSet::new();
    let mut tails = Vec::new();
    for &p in set {
        match p {
            AugPoint::Base(x) if plan.decomposition.component_of[x] == component => {
                out.insert(x);
            }
            AugPoint::Tail { component: l, index } if l == component && (1..=tail_cap).contains(&index) => {
                tails.push(index);
            }
            other => {
                return Err(Error::invariant(
                    "tailoring",
                    format!("{other} is outside the truncated component {component}"),
                ))
            }
        }
    }
    match c.class {
        ComponentClass::UnboundedEmulated => {
            if !tails.is_empty() {
                return Err(Error::invariant("tailoring", "tail point in an unbounded component"));
            }
            Ok(out)
        }
        ComponentClass::BoundedSmall => Ok(c.points.iter().copied().collect()),
        ComponentClass::BoundedLarge => {
            for i in tails {
                out.insert(plan.annulus[component][i as usize - 1]);
            }
            Ok(out)
        }
    }
}

/// Which branch of the case analysis a point falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Case {
    /// Emulated unbounded component.
    One,
    /// Small bounded component.
    Two,
    /// Large bounded component, flowed support stays off the tail.
    ThreeA,
    /// Large bounded component, flowed support reaches the tail.
    ThreeB,
}

impl Case {
    pub fn as_str(&self) -> &'static str {
        match self {
            Case::One => "1",
            Case::Two => "2",
            Case::ThreeA => "3a",
            Case::ThreeB => "3b",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "1" => Case::One,
            "2" => Case::Two,
            "3a" => Case::ThreeA,
            "3b" => Case::ThreeB,
            _ => return None,
        })
    }

    /// Which case applies to a point of class `class` whose flowed support
    /// does (`reaches_tail`) or does not meet the tail.
    pub fn of(class: ComponentClass, reaches_tail: bool) -> Self {
        match class {
            ComponentClass::UnboundedEmulated => Case::One,
            ComponentClass::BoundedSmall => Case::Two,
            ComponentClass::BoundedLarge if reaches_tail => Case::ThreeB,
            ComponentClass::BoundedLarge => Case::ThreeA,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A family of non-empty subsets of the space, one per point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetFamily {
    pub subsets: Vec<BTreeSet<PointIdx>>,
}

impl SubsetFamily {
    pub fn get(&self, x: PointIdx) -> &BTreeSet<PointIdx> {
        &self.subsets[x]
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairRecord {
    pub x: PointIdx,
    pub y: PointIdx,
    pub input_ratio: VarRatio,
    pub output_ratio: VarRatio,
}

/// The per-case radius bounds and the tail locality bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadiusBounds<T> {
    /// `S + S·L²`, case 1.
    pub flow: T,
    /// `6S + 8SN`, case 2.
    pub small: T,
    /// `4S + 6NS`, case 3.
    pub large: T,
    /// `S + 2NS`, distance to the basepoint in case 3b.
    pub locality: T,
}

impl<T: Scalar> RadiusBounds<T> {
    pub fn of(params: &InstanceParams<T>) -> Self {
        RadiusBounds {
            flow: params.flow_radius(),
            small: params.small_radius(),
            large: params.large_radius(),
            locality: params.locality_radius(),
        }
    }
}

/// Everything needed to re-check a run: per-point cases and radii, per-pair
/// ratios, and the bounds they are certified against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate<T> {
    pub params: InstanceParams<T>,
    pub cases: Vec<Case>,
    pub radii: Vec<T>,
    /// Pairs `x < y` with `d(x, y) <= R`, sorted.
    pub pairs: Vec<PairRecord>,
    pub worst_ratio: VarRatio,
    pub worst_radius: T,
    pub bound_radius: T,
    pub bounds: RadiusBounds<T>,
    pub warnings: Vec<String>,
}

/// Per-point data from a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointOutcome<T> {
    /// Support of the stabilized chain.
    pub support: BTreeSet<AugPoint>,
    pub iterations: u64,
    pub case: Case,
    pub radius: T,
    /// One line per flow iteration, when tracing was requested.
    pub trace: Vec<String>,
}

/// Counters for the guarantees asserted while running.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub case3b_pairs: usize,
    pub case3b_points: usize,
    pub locality_checks: usize,
    pub pairs_checked: usize,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput<T> {
    pub subsets: SubsetFamily,
    pub certificate: Certificate<T>,
    pub plan: TailorPlan<T>,
    pub points: Vec<PointOutcome<T>>,
    pub stats: RunStats,
}

#[derive(Clone, Debug, Default)]
pub struct PipelineOptions {
    /// Worker threads for per-point work; `None` uses the global pool.
    pub jobs: Option<usize>,
    pub trace: bool,
}

/// Runs the whole construction on a chain family and certifies the result.
///
/// Fails with [`Error::Precondition`] when the chains are not a witness for
/// `(R, eps, S)` and with [`Error::Invariant`] if any guarantee of the
/// construction is observed to break.
pub fn run_pipeline<T: Scalar>(
    space: &Space<T>,
    chains: &ChainFamily,
    r: &T,
    epsilon: &Quotient,
    s: &T,
    options: &PipelineOptions,
) -> Result<PipelineOutput<T>> {
    let report = check_instance(space, chains, r, epsilon, s)?;
    if !report.passed() {
        return Err(Error::Precondition(report.describe(space)));
    }
    let params = report.params;
    let decomposition = rips_components(space, s);
    let plan = classify(space, &decomposition, chains, &params)?;
    let aug = augment(space, &plan.decomposition, &params);
    let flow = build_flow(&aug)?;

    let work = |x: PointIdx| process_point(space, chains, &params, &plan, &aug, &flow, x, options.trace);
    let results: Vec<Result<(BTreeSet<PointIdx>, PointOutcome<T>)>> = match options.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| Error::Malformed(format!("cannot start worker pool: {e}")))?;
            pool.install(|| (0..space.len()).into_par_iter().map(work).collect())
        }
        None => (0..space.len()).into_par_iter().map(work).collect(),
    };
    let mut subsets = Vec::with_capacity(space.len());
    let mut points = Vec::with_capacity(space.len());
    for result in results {
        let (subset, outcome) = result?;
        subsets.push(subset);
        points.push(outcome);
    }
    let subsets = SubsetFamily { subsets };

    let mut stats = RunStats {
        case3b_points: points.iter().filter(|p| p.case == Case::ThreeB).count(),
        locality_checks: points.iter().filter(|p| p.case == Case::ThreeB).count(),
        ..RunStats::default()
    };
    let pairs = certify_pairs(space, chains, &params, &plan, &subsets, &points, &mut stats)?;

    let worst_ratio = pairs
        .iter()
        .map(|p| p.output_ratio)
        .max()
        .unwrap_or(VarRatio::ZERO);
    let worst_radius = points
        .iter()
        .map(|p| p.radius.clone())
        .max()
        .unwrap_or_else(T::zero);
    let certificate = Certificate {
        bound_radius: params.bound_radius(),
        bounds: RadiusBounds::of(&params),
        cases: points.iter().map(|p| p.case).collect(),
        radii: points.iter().map(|p| p.radius.clone()).collect(),
        pairs,
        worst_ratio,
        worst_radius,
        warnings: plan.warnings.clone(),
        params,
    };
    Ok(PipelineOutput {
        subsets,
        certificate,
        plan,
        points,
        stats,
    })
}

#[allow(clippy::too_many_arguments)]
fn process_point<T: Scalar>(
    space: &Space<T>,
    chains: &ChainFamily,
    params: &InstanceParams<T>,
    plan: &TailorPlan<T>,
    aug: &AugmentedSpace<'_, T>,
    flow: &FlowMap,
    x: PointIdx,
    trace: bool,
) -> Result<(BTreeSet<PointIdx>, PointOutcome<T>)> {
    let at = |what: &str| format!("{what} at {}", space.id(x));
    let component = plan.decomposition.component_of[x];
    let class = plan.decomposition.components[component].class;
    let a = chains.get(x);

    let mut lines = Vec::new();
    let settled = if trace {
        stabilize_traced(flow, a, |n, chain| {
            let body: Vec<String> = chain
                .iter()
                .map(|(&p, v)| format!("{}:{v}", aug.label(aug.point(p))))
                .collect();
            lines.push(format!("{}\t{n}\t{}", space.id(x), body.join(",")));
        })
    } else {
        stabilize(flow, a)
    }
    .map_err(|e| match e {
        Error::Invariant { invariant, detail } => Error::Invariant {
            invariant,
            detail: format!("{detail} ({})", at("flow")),
        },
        other => other,
    })?;

    let support: BTreeSet<AugPoint> = settled.chain.support().map(|&i| aug.point(i)).collect();
    let flow_radius = params.flow_radius();
    for &p in &support {
        let d = aug.dist(AugPoint::Base(x), p)?;
        if d > flow_radius {
            return Err(Error::invariant(
                "flow radius",
                format!("{} at distance {d} > S + S·L² ({})", aug.label(p), at("support")),
            ));
        }
        let inside = match p {
            AugPoint::Base(y) => plan.decomposition.component_of[y] == component,
            AugPoint::Tail { component: l, index } => l == component && index <= params.n,
        };
        if !inside {
            return Err(Error::invariant(
                "flow stays in component",
                format!("{} escaped ({})", aug.label(p), at("support")),
            ));
        }
    }

    let reaches_tail = support.iter().any(AugPoint::is_tail);
    let case = Case::of(class, reaches_tail);
    if case == Case::ThreeB {
        let base = plan.decomposition.components[component].basepoint;
        let d = space.dist(x, base);
        if d > params.locality_radius() {
            return Err(Error::invariant(
                "tail locality",
                format!("d(x, x_λ) = {d} > S + 2NS ({})", at("case 3b")),
            ));
        }
        let z: BTreeSet<PointIdx> = plan.annulus[component].iter().copied().collect();
        if let Some(p) = support.iter().filter_map(AugPoint::base).find(|p| z.contains(p)) {
            return Err(Error::invariant(
                "annulus disjointness",
                format!("flowed support contains annulus point {} ({})", space.id(p), at("case 3b")),
            ));
        }
    }

    let subset = phi(plan, component, &support, params.n)?;
    let radius = subset
        .iter()
        .map(|&y| space.dist(x, y))
        .max()
        .unwrap_or_else(T::zero);
    let bound = match case {
        Case::One => params.flow_radius(),
        Case::Two => params.small_radius(),
        Case::ThreeA | Case::ThreeB => params.large_radius(),
    };
    if radius > bound {
        return Err(Error::invariant(
            "support radius",
            format!("radius {radius} exceeds the case {case} bound {bound} ({})", at("output")),
        ));
    }
    Ok((
        subset,
        PointOutcome {
            support,
            iterations: settled.iterations,
            case,
            radius,
            trace: lines,
        },
    ))
}

fn certify_pairs<T: Scalar>(
    space: &Space<T>,
    chains: &ChainFamily,
    params: &InstanceParams<T>,
    plan: &TailorPlan<T>,
    subsets: &SubsetFamily,
    points: &[PointOutcome<T>],
    stats: &mut RunStats,
) -> Result<Vec<PairRecord>> {
    let mut pairs = Vec::new();
    for c in &plan.decomposition.components {
        let z: BTreeSet<PointIdx> = plan.annulus[c.id].iter().copied().collect();
        for (i, &x) in c.points.iter().enumerate() {
            for &y in &c.points[i + 1..] {
                if space.dist(x, y) > params.r {
                    continue;
                }
                stats.pairs_checked += 1;
                let label = || format!("({}, {})", space.id(x), space.id(y));
                let input = variation_ratio(chains.get(x), chains.get(y));
                let (sx, sy) = (&points[x].support, &points[y].support);
                let flowed = set_ratio(sx, sy);
                if flowed > input {
                    return Err(Error::invariant(
                        "flow contraction",
                        format!("flowed ratio {flowed} > input ratio {input} for {}", label()),
                    ));
                }
                let (ax, ay) = (subsets.get(x), subsets.get(y));
                let output = set_ratio(ax, ay);
                if points[x].case == Case::ThreeB || points[y].case == Case::ThreeB {
                    stats.case3b_pairs += 1;
                    for (p, s) in [(x, sx), (y, sy)] {
                        if let Some(q) = s.iter().filter_map(AugPoint::base).find(|q| z.contains(q)) {
                            return Err(Error::invariant(
                                "annulus disjointness",
                                format!(
                                    "support of {} contains annulus point {} in pair {}",
                                    space.id(p),
                                    space.id(q),
                                    label()
                                ),
                            ));
                        }
                    }
                    let sym_flowed = sx.symmetric_difference(sy).count();
                    let cap_flowed = sx.intersection(sy).count();
                    let sym_out = ax.symmetric_difference(ay).count();
                    let cap_out = ax.intersection(ay).count();
                    if sym_flowed != sym_out || cap_flowed != cap_out {
                        return Err(Error::invariant(
                            "case 3b cardinalities",
                            format!(
                                "|△| {sym_out} vs {sym_flowed}, |∩| {cap_out} vs {cap_flowed} for {}",
                                label()
                            ),
                        ));
                    }
                }
                if output > input || !output.less_than(&params.epsilon) {
                    return Err(Error::invariant(
                        "output ratio",
                        format!("output ratio {output} vs input {input} for {}", label()),
                    ));
                }
                pairs.push(PairRecord {
                    x,
                    y,
                    input_ratio: input,
                    output_ratio: output,
                });
            }
        }
    }
    pairs.sort_by_key(|p| (p.x, p.y));
    Ok(pairs)
}
