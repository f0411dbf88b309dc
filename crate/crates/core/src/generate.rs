//! Seeded instance generators.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chains::{Chain, ChainFamily};
use crate::error::{Error, Result};
use crate::io::Instance;
use crate::metric::{MetricGenerator, Space};
use crate::scalar::{Quotient, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Line,
    Grid,
    DisjointUnionPaths,
    CayleyCyclic,
    WeightedBall,
}

impl GenKind {
    pub const ALL: [GenKind; 5] = [
        GenKind::Line,
        GenKind::Grid,
        GenKind::DisjointUnionPaths,
        GenKind::CayleyCyclic,
        GenKind::WeightedBall,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            GenKind::Line => "line",
            GenKind::Grid => "grid",
            GenKind::DisjointUnionPaths => "disjoint_union_paths",
            GenKind::CayleyCyclic => "cayley_cyclic",
            GenKind::WeightedBall => "weighted_ball",
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GenKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Generator(format!("unknown generator kind {s:?}")))
    }
}

/// Knobs for [`gen_instance`]. Unset fields fall back to per-kind defaults.
#[derive(Clone, Debug)]
pub struct GenParams<T> {
    /// Points of a line, or the order of the cyclic group.
    pub n: Option<usize>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    /// Number of paths in a disjoint union.
    pub paths: Option<usize>,
    /// Inclusive range for random path lengths.
    pub min_len: usize,
    pub max_len: usize,
    /// Distance between path ends; defaults to `S + 1`.
    pub gap: Option<T>,
    pub generators: Vec<i64>,
    /// Radius of the Følner ball in the cyclic group.
    pub k: u64,
    /// Ball radii summed into each chain; defaults to `[S, S/2]`.
    pub radii: Option<Vec<T>>,
    pub r: T,
    /// Support radius; defaults to 12, or `max(k, R + 1)` for the cyclic group.
    pub s: Option<T>,
    pub epsilon: Quotient,
    /// Attach an unbounded hint along each line or path.
    pub unbounded: bool,
}

impl<T: Scalar> Default for GenParams<T> {
    fn default() -> Self {
        GenParams {
            n: None,
            width: None,
            height: None,
            paths: None,
            min_len: 5,
            max_len: 300,
            gap: None,
            generators: vec![1, -1],
            k: 3,
            radii: None,
            r: T::from_int(2),
            s: None,
            epsilon: Ratio::new(1, 2),
            unbounded: false,
        }
    }
}

enum Shape {
    Line(usize),
    Grid(usize, usize),
    Paths(usize),
}

/// Builds a deterministic instance; the seed only drives random path lengths.
///
/// Lines, grids and path unions carry weighted-ball chains. The cyclic group
/// carries translates of its `k`-ball and always comes with an unbounded
/// hint running around the cycle.
pub fn gen_instance<T: Scalar>(kind: GenKind, params: &GenParams<T>, seed: u64) -> Result<Instance<T>> {
    if params.r.is_negative() {
        return Err(Error::Generator("R must be nonnegative".into()));
    }
    if kind == GenKind::CayleyCyclic {
        return cayley_cyclic(params);
    }
    let shape = match kind {
        GenKind::Line => Shape::Line(params.n.unwrap_or(10)),
        GenKind::Grid => Shape::Grid(params.width.unwrap_or(10), params.height.unwrap_or(10)),
        GenKind::DisjointUnionPaths => Shape::Paths(params.paths.unwrap_or(20)),
        _ => match (params.paths, params.width, params.n) {
            (Some(p), _, _) => Shape::Paths(p),
            (None, Some(w), _) => Shape::Grid(w, params.height.unwrap_or(w)),
            (None, None, Some(n)) => Shape::Line(n),
            (None, None, None) => Shape::Paths(20),
        },
    };
    let s = params.s.clone().unwrap_or_else(|| T::from_int(12));
    let radii = params
        .radii
        .clone()
        .unwrap_or_else(|| vec![s.clone(), s.clone() / T::from_int(2)]);
    if radii.is_empty() {
        return Err(Error::Generator("weighted_ball needs at least one radius".into()));
    }
    if radii.iter().any(Scalar::is_negative) {
        return Err(Error::Generator("radii must be nonnegative".into()));
    }

    let mut rays: Vec<Vec<String>> = Vec::new();
    let generator = match shape {
        Shape::Line(n) => {
            rays.push((0..n).map(|i| format!("p{i}")).collect());
            MetricGenerator::Line { n }
        }
        Shape::Grid(width, height) => {
            if params.unbounded {
                return Err(Error::Generator("unbounded hints are only generated for lines and paths".into()));
            }
            MetricGenerator::Grid { width, height }
        }
        Shape::Paths(count) => {
            if count == 0 {
                return Err(Error::Generator("need at least one path".into()));
            }
            if params.min_len == 0 || params.min_len > params.max_len {
                return Err(Error::Generator(format!(
                    "invalid path length range {}..={}",
                    params.min_len, params.max_len
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lengths: Vec<usize> = (0..count)
                .map(|_| rng.gen_range(params.min_len..=params.max_len))
                .collect();
            let gap = params.gap.clone().unwrap_or_else(|| s.clone() + T::one());
            if gap <= s {
                return Err(Error::Generator(format!("path gap {gap} must exceed S = {s}")));
            }
            for (k, &len) in lengths.iter().enumerate() {
                rays.push((0..len).map(|i| format!("c{k}_p{i}")).collect());
            }
            MetricGenerator::Paths {
                lengths,
                gap,
                prefixes: None,
            }
        }
    };
    let mut space = Space::from_generator(generator)?;
    if params.unbounded {
        let hints = rays.into_iter().map(|ray| (ray[0].clone(), ray)).collect();
        space = space.with_hints(hints)?;
    }
    let chains = weighted_balls(&space, &radii)?;
    Ok(Instance {
        space,
        chains,
        r: params.r.clone(),
        epsilon: params.epsilon,
        s,
    })
}

/// `a_x = Σ_j 1_{B(x, r_j)}`.
pub fn weighted_balls<T: Scalar>(space: &Space<T>, radii: &[T]) -> Result<ChainFamily> {
    let outer = radii
        .iter()
        .max()
        .ok_or_else(|| Error::Generator("weighted_ball needs at least one radius".into()))?;
    let chains = (0..space.len())
        .map(|x| {
            space
                .ball(x, outer)
                .into_iter()
                .map(|y| {
                    let d = space.dist(x, y);
                    (y, radii.iter().filter(|r| d <= **r).count() as u64)
                })
                .collect::<Chain<_>>()
        })
        .collect();
    ChainFamily::from_vec(chains)
}

fn cayley_cyclic<T: Scalar>(params: &GenParams<T>) -> Result<Instance<T>> {
    let n = params.n.unwrap_or(12);
    let space = Space::from_generator(MetricGenerator::CayleyCyclic {
        n,
        generators: params.generators.clone(),
    })?;
    let pos = |i: usize| space.index_of(&format!("z{i}"));
    let k = T::from_count(params.k);
    let identity = pos(0)?;
    // the Følner set A = B(e, k), as residues
    let ball: Vec<usize> = (0..n)
        .filter(|&i| pos(i).is_ok_and(|z| space.dist(identity, z) <= k))
        .collect();
    let mut by_position = vec![Chain::new(); n];
    for (x, chain) in by_position.iter_mut().enumerate() {
        for &a in &ball {
            chain.add(pos((x + a) % n)?, 1);
        }
    }
    let mut chains = vec![Chain::new(); n];
    for (x, chain) in by_position.into_iter().enumerate() {
        chains[pos(x)?] = chain;
    }

    // walk the first positive generator around its cycle
    let g = params
        .generators
        .iter()
        .map(|g| g.rem_euclid(n as i64) as usize)
        .min()
        .expect("validated non-empty");
    let mut ray = vec!["z0".to_string()];
    let mut at = g;
    while at != 0 {
        ray.push(format!("z{at}"));
        at = (at + g) % n;
    }
    let space = space.with_hints(vec![("z0".into(), ray)])?;

    let s = params
        .s
        .clone()
        .unwrap_or_else(|| std::cmp::max(k.clone(), params.r.clone() + T::one()));
    Ok(Instance {
        space,
        chains: ChainFamily::from_vec(chains)?,
        r: params.r.clone(),
        epsilon: params.epsilon,
        s,
    })
}
