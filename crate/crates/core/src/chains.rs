//! `N`-valued 0-chains, set families, variation ratios and the validation of
//! a chain family as a Property A witness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::metric::{PointIdx, Space};
use crate::scalar::{Quotient, Scalar};

/// A finitely supported map to the positive integers. Zeros are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chain<K: Ord> {
    entries: BTreeMap<K, u64>,
}

impl<K: Ord> Default for Chain<K> {
    fn default() -> Self {
        Chain {
            entries: BTreeMap::new(),
        }
    }
}

impl<K: Ord + Clone> Chain<K> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sums repeated keys and drops zeros.
    pub fn from_entries(entries: impl IntoIterator<Item = (K, u64)>) -> Self {
        let mut chain = Self::new();
        for (k, v) in entries {
            chain.add(k, v);
        }
        chain
    }

    /// Characteristic chain of a set.
    pub fn indicator(points: impl IntoIterator<Item = K>) -> Self {
        Self {
            entries: points.into_iter().map(|k| (k, 1)).collect(),
        }
    }

    pub fn add(&mut self, k: K, v: u64) {
        if v > 0 {
            *self.entries.entry(k).or_insert(0) += v;
        }
    }

    pub fn get(&self, k: &K) -> u64 {
        self.entries.get(k).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, u64)> + '_ {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    pub fn support(&self) -> impl Iterator<Item = &K> + '_ {
        self.entries.keys()
    }

    pub fn support_set(&self) -> BTreeSet<K> {
        self.entries.keys().cloned().collect()
    }

    /// Number of support points.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `||a||_1`.
    pub fn l1_norm(&self) -> u64 {
        self.entries.values().sum()
    }

    /// True when every value is 1.
    pub fn is_binary(&self) -> bool {
        self.entries.values().all(|&v| v == 1)
    }

    pub fn max_value(&self) -> u64 {
        self.entries.values().copied().max().unwrap_or(0)
    }

    /// Pointwise minimum.
    pub fn meet(&self, other: &Self) -> Self {
        let (small, large) = if self.entries.len() <= other.entries.len() {
            (self, other)
        } else {
            (other, self)
        };
        Self {
            entries: small
                .entries
                .iter()
                .filter_map(|(k, &v)| {
                    let w = large.get(k);
                    (w > 0).then(|| (k.clone(), v.min(w)))
                })
                .collect(),
        }
    }

    /// `||a - b||_1 = sum |a(x) - b(x)|`.
    pub fn diff_norm(&self, other: &Self) -> u64 {
        let mut total: u64 = 0;
        for (k, &v) in &self.entries {
            total += v.abs_diff(other.get(k));
        }
        for (k, &w) in &other.entries {
            if !self.entries.contains_key(k) {
                total += w;
            }
        }
        total
    }

    /// Pointwise `a <= b`.
    pub fn le(&self, other: &Self) -> bool {
        self.entries.iter().all(|(k, &v)| v <= other.get(k))
    }

    pub fn map_keys<J: Ord + Clone>(&self, mut f: impl FnMut(&K) -> J) -> Chain<J> {
        Chain::from_entries(self.entries.iter().map(|(k, &v)| (f(k), v)))
    }
}

impl<K: Ord + Clone> FromIterator<(K, u64)> for Chain<K> {
    fn from_iter<I: IntoIterator<Item = (K, u64)>>(iter: I) -> Self {
        Self::from_entries(iter)
    }
}

/// A variation ratio; `Infinite` when the denominator vanishes on distinct
/// arguments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarRatio {
    Finite(Quotient),
    Infinite,
}

impl VarRatio {
    pub const ZERO: VarRatio = VarRatio::Finite(Ratio::new_raw(0, 1));

    fn of(num: u64, den: u64) -> Self {
        if num == 0 {
            Self::ZERO
        } else if den == 0 {
            VarRatio::Infinite
        } else {
            VarRatio::Finite(Ratio::new(num, den))
        }
    }

    /// Strict comparison against a threshold.
    pub fn less_than(&self, eps: &Quotient) -> bool {
        match self {
            VarRatio::Finite(r) => r < eps,
            VarRatio::Infinite => false,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "inf" => Some(VarRatio::Infinite),
            other => crate::scalar::parse_quotient(other).map(VarRatio::Finite),
        }
    }
}

impl fmt::Display for VarRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarRatio::Finite(r) => write!(f, "{r}"),
            VarRatio::Infinite => f.write_str("inf"),
        }
    }
}

/// `||a - b||_1 / ||a ∧ b||_1`.
pub fn variation_ratio<K: Ord + Clone>(a: &Chain<K>, b: &Chain<K>) -> VarRatio {
    VarRatio::of(a.diff_norm(b), a.meet(b).l1_norm())
}

/// `|A △ B| / |A ∩ B|`.
pub fn set_ratio<K: Ord>(a: &BTreeSet<K>, b: &BTreeSet<K>) -> VarRatio {
    let common = a.intersection(b).count();
    let sym = a.len() + b.len() - 2 * common;
    VarRatio::of(sym as u64, common as u64)
}

/// A Property A witness in its original form: finite subsets of `X × N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFamily {
    pub sets: BTreeMap<PointIdx, BTreeSet<(PointIdx, u64)>>,
    pub multiplicity_bound: u64,
}

impl SetFamily {
    /// Bound inferred as one more than the largest level used.
    pub fn new(sets: BTreeMap<PointIdx, BTreeSet<(PointIdx, u64)>>) -> Self {
        let multiplicity_bound = sets
            .values()
            .flat_map(|s| s.iter().map(|&(_, level)| level + 1))
            .max()
            .unwrap_or(1);
        SetFamily {
            sets,
            multiplicity_bound,
        }
    }
}

/// One chain per point of the space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainFamily {
    chains: Vec<Chain<PointIdx>>,
}

impl ChainFamily {
    /// The domain must be exactly `0..n` and every chain non-empty.
    pub fn new(n: usize, chains: BTreeMap<PointIdx, Chain<PointIdx>>) -> Result<Self> {
        let mut out = Vec::with_capacity(n);
        for x in 0..n {
            match chains.get(&x) {
                Some(c) if !c.is_empty() => out.push(c.clone()),
                Some(_) => return Err(Error::Precondition(format!("chain #{x} is empty"))),
                None => return Err(Error::Precondition(format!("no chain given for point #{x}"))),
            }
        }
        if chains.len() != n || chains.keys().any(|&x| x >= n) {
            return Err(Error::Malformed("chain family has points outside the space".into()));
        }
        Ok(ChainFamily { chains: out })
    }

    pub fn from_vec(chains: Vec<Chain<PointIdx>>) -> Result<Self> {
        let n = chains.len();
        Self::new(n, chains.into_iter().enumerate().collect())
    }

    pub fn get(&self, x: PointIdx) -> &Chain<PointIdx> {
        &self.chains[x]
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointIdx, &Chain<PointIdx>)> + '_ {
        self.chains.iter().enumerate()
    }

    pub fn max_mass(&self) -> u64 {
        self.chains.iter().map(Chain::l1_norm).max().unwrap_or(0)
    }
}

/// `a_x(z) = |A_x ∩ ({z} × N)|`.
pub fn from_sets(n: usize, family: &SetFamily) -> Result<ChainFamily> {
    let mut chains = BTreeMap::new();
    for (&x, set) in &family.sets {
        if set.is_empty() {
            return Err(Error::Precondition(format!("set for point #{x} is empty")));
        }
        if let Some(&(z, level)) = set.iter().find(|&&(_, l)| l >= family.multiplicity_bound) {
            return Err(Error::Precondition(format!(
                "level {level} at point #{z} exceeds multiplicity bound {}",
                family.multiplicity_bound
            )));
        }
        chains.insert(x, Chain::from_entries(set.iter().map(|&(z, _)| (z, 1))));
    }
    ChainFamily::new(n, chains)
}

/// Parameters of a witness: the scale `R`, tolerance `eps`, support radius
/// `S`, the mass bound `L` and the tail length `N = L^2 + 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceParams<T> {
    pub r: T,
    pub epsilon: Quotient,
    pub s: T,
    pub l: u64,
    pub n: u64,
}

impl<T: Scalar> InstanceParams<T> {
    /// Derives `N = L^2 + 2`; requires `S > R`, `eps > 0`, `L >= 1`.
    pub fn new(r: T, epsilon: Quotient, s: T, l: u64) -> Result<Self> {
        if s <= r {
            return Err(Error::Precondition(format!(
                "S = {s} must exceed R = {r} (the construction assumes S > R)"
            )));
        }
        if r.is_negative() {
            return Err(Error::Precondition(format!("R = {r} is negative")));
        }
        if epsilon == Ratio::from_integer(0) {
            return Err(Error::Precondition("epsilon must be positive".into()));
        }
        if l == 0 {
            return Err(Error::Precondition("L must be at least 1".into()));
        }
        Ok(InstanceParams {
            r,
            epsilon,
            s,
            l,
            n: l * l + 2,
        })
    }

    /// `S + S·L²`: how far the flow can carry mass from `x`.
    pub fn flow_radius(&self) -> T {
        self.s.clone() + self.s.times(self.l * self.l)
    }

    /// `3S + 3SN`.
    pub fn inner_radius(&self) -> T {
        self.s.times(3) + self.s.times(3 * self.n)
    }

    /// `3S + 4SN`.
    pub fn outer_radius(&self) -> T {
        self.s.times(3) + self.s.times(4 * self.n)
    }

    /// `6S + 8SN`.
    pub fn small_radius(&self) -> T {
        self.s.times(6) + self.s.times(8 * self.n)
    }

    /// `4S + 6NS`.
    pub fn large_radius(&self) -> T {
        self.s.times(4) + self.s.times(6 * self.n)
    }

    /// `S + 2NS`: how close to the basepoint a point whose flow enters the
    /// tail must be.
    pub fn locality_radius(&self) -> T {
        self.s.clone() + self.s.times(2 * self.n)
    }

    /// Largest of the per-case radius bounds.
    pub fn bound_radius(&self) -> T {
        [self.flow_radius(), self.small_radius(), self.large_radius()]
            .into_iter()
            .max()
            .expect("non-empty")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioViolation {
    pub x: PointIdx,
    pub y: PointIdx,
    pub ratio: VarRatio,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportViolation<T> {
    pub x: PointIdx,
    pub z: PointIdx,
    pub dist: T,
}

/// Outcome of [`check_instance`].
#[derive(Clone, Debug)]
pub struct InstanceReport<T> {
    pub params: InstanceParams<T>,
    /// Pairs with `d(x, y) <= R` whose variation ratio is not below `eps`.
    pub ratio_violations: Vec<RatioViolation>,
    /// Support points outside `B(x, S)`.
    pub support_violations: Vec<SupportViolation<T>>,
    pub worst_ratio: VarRatio,
    pub pairs_checked: usize,
}

impl<T: Scalar> InstanceReport<T> {
    pub fn passed(&self) -> bool {
        self.ratio_violations.is_empty() && self.support_violations.is_empty()
    }

    pub fn describe(&self, space: &Space<T>) -> String {
        let mut lines = Vec::new();
        for v in &self.ratio_violations {
            lines.push(format!(
                "condition (i): ratio({}, {}) = {} is not < {}",
                space.id(v.x),
                space.id(v.y),
                v.ratio,
                self.params.epsilon
            ));
        }
        for v in &self.support_violations {
            lines.push(format!(
                "condition (ii): support of {} contains {} at distance {} > S = {}",
                space.id(v.x),
                space.id(v.z),
                v.dist,
                self.params.s
            ));
        }
        lines.join("\n")
    }
}

/// Checks the three witness conditions: small variation for `R`-close pairs,
/// supports inside `B(x, S)`, and derives `L = 1 + max ||a_x||_1`.
pub fn check_instance<T: Scalar>(
    space: &Space<T>,
    family: &ChainFamily,
    r: &T,
    epsilon: &Quotient,
    s: &T,
) -> Result<InstanceReport<T>> {
    if family.len() != space.len() {
        return Err(Error::Precondition(format!(
            "chain family has {} chains for {} points",
            family.len(),
            space.len()
        )));
    }
    if let Some((x, _)) = family.iter().find(|(_, c)| c.is_empty()) {
        return Err(Error::Precondition(format!("chain of {} is empty", space.id(x))));
    }
    let params = InstanceParams::new(r.clone(), *epsilon, s.clone(), 1 + family.max_mass())?;

    let mut support_violations = Vec::new();
    for (x, chain) in family.iter() {
        for &z in chain.support() {
            let d = space.dist(x, z);
            if d > *s {
                support_violations.push(SupportViolation { x, z, dist: d });
            }
        }
    }

    let mut ratio_violations = Vec::new();
    let mut worst = VarRatio::ZERO;
    let mut pairs_checked = 0;
    for x in 0..space.len() {
        for y in x + 1..space.len() {
            if space.dist(x, y) > *r {
                continue;
            }
            pairs_checked += 1;
            let ratio = variation_ratio(family.get(x), family.get(y));
            if ratio > worst {
                worst = ratio;
            }
            if !ratio.less_than(epsilon) {
                ratio_violations.push(RatioViolation { x, y, ratio });
            }
        }
    }

    Ok(InstanceReport {
        params,
        ratio_violations,
        support_violations,
        worst_ratio: worst,
        pairs_checked,
    })
}
