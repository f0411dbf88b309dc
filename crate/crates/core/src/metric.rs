//! Finite metric spaces with exact distances, balls, Rips graphs and the
//! decomposition into components at a fixed scale.
//!
//! Points are stored sorted by id, so the index order of a [`Space`] is the
//! lexicographic order of the ids. Every tie-break in the crate relies on it.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Index of a point in a [`Space`]. Smaller index means smaller id.
pub type PointIdx = usize;

/// Distance oracle. Closed forms are used for generated families so that
/// large spaces do not need a dense matrix.
#[derive(Clone, Debug)]
enum Metric<T> {
    Matrix { n: usize, entries: Vec<T> },
    /// Unit-step paths hanging off a common hub: `|i - j|` within a path and
    /// `i + gap + j` across paths.
    Paths { path: Vec<usize>, offset: Vec<u64>, gap: T },
    /// Word metric of `Z^2` with the standard generators.
    Grid { coords: Vec<(i64, i64)> },
    /// Word metric of a cyclic group; `table[k]` is the length of `k`.
    Circulant { position: Vec<usize>, table: Vec<T> },
}

impl<T: Scalar> Metric<T> {
    fn dist(&self, x: PointIdx, y: PointIdx) -> T {
        match self {
            Metric::Matrix { n, entries } => entries[x * n + y].clone(),
            Metric::Paths { path, offset, gap } => {
                if path[x] == path[y] {
                    T::from_count(offset[x].abs_diff(offset[y]))
                } else {
                    T::from_count(offset[x] + offset[y]) + gap.clone()
                }
            }
            Metric::Grid { coords } => {
                let (a, b) = (coords[x], coords[y]);
                T::from_count(a.0.abs_diff(b.0) + a.1.abs_diff(b.1))
            }
            Metric::Circulant { position, table } => {
                let n = table.len();
                table[(position[y] + n - position[x]) % n].clone()
            }
        }
    }
}

/// Closed-form metric families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricGenerator<T> {
    /// Points `p0..p{n-1}` with `d(pi, pj) = |i - j|`.
    Line { n: usize },
    /// Points `g{i}_{j}` with the `l1` distance.
    Grid { width: usize, height: usize },
    /// Unit-step paths `{prefix_k}{i}`; paths are at least `gap` apart.
    Paths {
        lengths: Vec<usize>,
        gap: T,
        prefixes: Option<Vec<String>>,
    },
    /// Cayley graph of `Z/nZ` for a symmetric generating set; points `z{i}`.
    CayleyCyclic { n: usize, generators: Vec<i64> },
}

impl<T: Scalar> MetricGenerator<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            MetricGenerator::Line { .. } => "line",
            MetricGenerator::Grid { .. } => "grid",
            MetricGenerator::Paths { .. } => "paths",
            MetricGenerator::CayleyCyclic { .. } => "cayley_cyclic",
        }
    }

    fn path_prefix(prefixes: &Option<Vec<String>>, k: usize) -> String {
        match prefixes {
            Some(p) => p[k].clone(),
            None => format!("c{k}_p"),
        }
    }

    fn materialize(&self) -> Result<(Vec<String>, Metric<T>)> {
        match self {
            MetricGenerator::Line { n } => {
                if *n == 0 {
                    return Err(Error::Generator("line needs at least one point".into()));
                }
                let ids = (0..*n).map(|i| format!("p{i}")).collect();
                let metric = Metric::Paths {
                    path: vec![0; *n],
                    offset: (0..*n as u64).collect(),
                    gap: T::zero(),
                };
                Ok((ids, metric))
            }
            MetricGenerator::Grid { width, height } => {
                if *width == 0 || *height == 0 {
                    return Err(Error::Generator("grid dimensions must be positive".into()));
                }
                let mut ids = Vec::new();
                let mut coords = Vec::new();
                for i in 0..*width {
                    for j in 0..*height {
                        ids.push(format!("g{i}_{j}"));
                        coords.push((i as i64, j as i64));
                    }
                }
                Ok((ids, Metric::Grid { coords }))
            }
            MetricGenerator::Paths {
                lengths,
                gap,
                prefixes,
            } => {
                if lengths.is_empty() || lengths.contains(&0) {
                    return Err(Error::Generator("path lengths must be positive".into()));
                }
                if *gap <= T::zero() {
                    return Err(Error::Generator("gap between paths must be positive".into()));
                }
                if let Some(p) = prefixes {
                    if p.len() != lengths.len() {
                        return Err(Error::Generator(
                            "one prefix per path is required".into(),
                        ));
                    }
                }
                let mut ids = Vec::new();
                let mut path = Vec::new();
                let mut offset = Vec::new();
                for (k, &len) in lengths.iter().enumerate() {
                    let prefix = Self::path_prefix(prefixes, k);
                    for i in 0..len {
                        ids.push(format!("{prefix}{i}"));
                        path.push(k);
                        offset.push(i as u64);
                    }
                }
                Ok((
                    ids,
                    Metric::Paths {
                        path,
                        offset,
                        gap: gap.clone(),
                    },
                ))
            }
            MetricGenerator::CayleyCyclic { n, generators } => {
                if *n == 0 {
                    return Err(Error::Generator("cyclic group order must be positive".into()));
                }
                if generators.is_empty() {
                    return Err(Error::Generator("empty generating set".into()));
                }
                let m = *n as i64;
                let steps: Vec<usize> = generators
                    .iter()
                    .map(|g| g.rem_euclid(m) as usize)
                    .collect();
                if steps.contains(&0) {
                    return Err(Error::Generator("identity in generating set".into()));
                }
                for g in generators {
                    if !steps.contains(&((-g).rem_euclid(m) as usize)) {
                        return Err(Error::Generator(format!(
                            "generating set is not symmetric: missing inverse of {g}"
                        )));
                    }
                }
                // word lengths by BFS from the identity
                let mut len = vec![u64::MAX; *n];
                len[0] = 0;
                let mut queue = VecDeque::from([0usize]);
                while let Some(v) = queue.pop_front() {
                    for &s in &steps {
                        let w = (v + s) % n;
                        if len[w] == u64::MAX {
                            len[w] = len[v] + 1;
                            queue.push_back(w);
                        }
                    }
                }
                if len.contains(&u64::MAX) {
                    return Err(Error::Generator(format!(
                        "generators {generators:?} do not generate Z/{n}Z"
                    )));
                }
                let ids = (0..*n).map(|i| format!("z{i}")).collect();
                let table = len.into_iter().map(T::from_count).collect();
                Ok((
                    ids,
                    Metric::Circulant {
                        position: (0..*n).collect(),
                        table,
                    },
                ))
            }
        }
    }
}

/// Where the distances of a [`Space`] came from; kept for serialization.
#[derive(Clone, Debug)]
pub enum MetricSource<T> {
    /// Full matrix, rows and columns in the order of the given point list.
    Matrix(Vec<Vec<T>>),
    /// Weighted undirected edges; distances are shortest paths.
    Graph(Vec<(String, String, T)>),
    Generator(MetricGenerator<T>),
}

/// A designated ray through a component that should be treated as a window
/// into an unbounded component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnboundedHint {
    pub component_of: PointIdx,
    pub ray: Vec<PointIdx>,
}

/// A finite metric space with exact distances.
#[derive(Clone, Debug)]
pub struct Space<T> {
    ids: Vec<String>,
    index: HashMap<String, PointIdx>,
    metric: Metric<T>,
    source: MetricSource<T>,
    hints: Vec<UnboundedHint>,
}

impl<T: Scalar> Space<T> {
    /// Builds and validates a space from a distance matrix, a weighted graph
    /// or a generator. `points` is ignored for generators unless non-empty,
    /// in which case it must name exactly the generated points.
    pub fn build(points: Vec<String>, source: MetricSource<T>) -> Result<Self> {
        match source {
            MetricSource::Matrix(rows) => Self::from_matrix(points, rows),
            MetricSource::Graph(edges) => Self::from_graph(points, edges),
            MetricSource::Generator(gen) => {
                let space = Self::from_generator(gen)?;
                if !points.is_empty() {
                    let mut given = points.clone();
                    given.sort();
                    if given != space.ids {
                        return Err(Error::Malformed(
                            "point list does not match the generated points".into(),
                        ));
                    }
                }
                Ok(space)
            }
        }
    }

    pub fn from_generator(gen: MetricGenerator<T>) -> Result<Self> {
        let (ids, metric) = gen.materialize()?;
        Self::assemble(ids, metric, MetricSource::Generator(gen))
    }

    pub fn from_matrix(points: Vec<String>, rows: Vec<Vec<T>>) -> Result<Self> {
        let n = points.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed(format!(
                "distance matrix must be {n}x{n}"
            )));
        }
        let order = sorted_order(&points)?;
        let mut entries = Vec::with_capacity(n * n);
        for &i in &order {
            for &j in &order {
                entries.push(rows[i][j].clone());
            }
        }
        let ids = order.iter().map(|&i| points[i].clone()).collect();
        let space = Self::assemble(ids, Metric::Matrix { n, entries }, MetricSource::Matrix(rows))?;
        space.check_axioms()?;
        Ok(space)
    }

    pub fn from_graph(points: Vec<String>, edges: Vec<(String, String, T)>) -> Result<Self> {
        let n = points.len();
        let order = sorted_order(&points)?;
        let ids: Vec<String> = order.iter().map(|&i| points[i].clone()).collect();
        let index: HashMap<&str, usize> =
            ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut adj: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); n];
        for (u, v, w) in &edges {
            let a = *index.get(u.as_str()).ok_or_else(|| Error::UnknownPoint(u.clone()))?;
            let b = *index.get(v.as_str()).ok_or_else(|| Error::UnknownPoint(v.clone()))?;
            if *w <= T::zero() {
                return Err(Error::MetricAxiom(format!(
                    "edge {u}-{v} has non-positive weight {w}"
                )));
            }
            if a == b {
                continue;
            }
            for (p, q) in [(a, b), (b, a)] {
                let e = adj[p].entry(q).or_insert_with(|| w.clone());
                if *w < *e {
                    *e = w.clone();
                }
            }
        }
        let mut entries = vec![T::zero(); n * n];
        for src in 0..n {
            let dist = dijkstra(&adj, src);
            for (dst, d) in dist.into_iter().enumerate() {
                match d {
                    Some(d) => entries[src * n + dst] = d,
                    None => {
                        return Err(Error::MetricAxiom(format!(
                            "graph is disconnected: no path from {} to {}; all distances must be finite",
                            ids[src], ids[dst]
                        )))
                    }
                }
            }
        }
        Self::assemble(ids, Metric::Matrix { n, entries }, MetricSource::Graph(edges))
    }

    fn assemble(ids: Vec<String>, metric: Metric<T>, source: MetricSource<T>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::Malformed("a space needs at least one point".into()));
        }
        // generated ids are re-sorted lexicographically, permuting the closed form
        let perm = sorted_order(&ids)?;
        let metric = if perm.iter().enumerate().all(|(i, &p)| i == p) {
            metric
        } else {
            permute(metric, &perm)
        };
        let ids: Vec<String> = perm.iter().map(|&i| ids[i].clone()).collect();
        let index = ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Space {
            ids,
            index,
            metric,
            source,
            hints: Vec::new(),
        })
    }

    /// Attaches unbounded-component hints given as point ids.
    pub fn with_hints(mut self, hints: Vec<(String, Vec<String>)>) -> Result<Self> {
        for (anchor, ray) in hints {
            let component_of = self.index_of(&anchor)?;
            let ray = ray
                .iter()
                .map(|id| self.index_of(id))
                .collect::<Result<Vec<_>>>()?;
            self.hints.push(UnboundedHint { component_of, ray });
        }
        Ok(self)
    }

    pub fn hints(&self) -> &[UnboundedHint] {
        &self.hints
    }

    pub fn source(&self) -> &MetricSource<T> {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, x: PointIdx) -> &str {
        &self.ids[x]
    }

    pub fn index_of(&self, id: &str) -> Result<PointIdx> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownPoint(id.to_string()))
    }

    #[inline]
    pub fn dist(&self, x: PointIdx, y: PointIdx) -> T {
        if x == y {
            return T::zero();
        }
        self.metric.dist(x, y)
    }

    /// Closed ball `{y : d(x, y) <= r}`, in index order.
    pub fn ball(&self, x: PointIdx, r: &T) -> Vec<PointIdx> {
        (0..self.len()).filter(|&y| self.dist(x, y) <= *r).collect()
    }

    pub fn ball_by_id(&self, x: &str, r: &T) -> Result<Vec<&str>> {
        let x = self.index_of(x)?;
        Ok(self.ball(x, r).into_iter().map(|y| self.id(y)).collect())
    }

    /// `max_x |B(x, r)|`.
    pub fn growth_profile(&self, r: &T) -> usize {
        (0..self.len())
            .map(|x| (0..self.len()).filter(|&y| self.dist(x, y) <= *r).count())
            .max()
            .unwrap_or(0)
    }

    pub fn diameter(&self) -> T {
        let mut best = T::zero();
        for x in 0..self.len() {
            for y in x + 1..self.len() {
                let d = self.dist(x, y);
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    /// Exhaustive check of the metric axioms, reporting the first offending
    /// pair or triple.
    pub fn check_axioms(&self) -> Result<()> {
        let n = self.len();
        for x in 0..n {
            let dxx = self.metric.dist(x, x);
            if dxx != T::zero() {
                return Err(Error::MetricAxiom(format!(
                    "d({0},{0}) = {dxx}, expected 0",
                    self.ids[x]
                )));
            }
            for y in 0..n {
                if x == y {
                    continue;
                }
                let dxy = self.metric.dist(x, y);
                if dxy <= T::zero() {
                    return Err(Error::MetricAxiom(format!(
                        "d({},{}) = {dxy} must be positive",
                        self.ids[x], self.ids[y]
                    )));
                }
                if dxy != self.metric.dist(y, x) {
                    return Err(Error::MetricAxiom(format!(
                        "asymmetric pair ({},{})",
                        self.ids[x], self.ids[y]
                    )));
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                let dxy = self.dist(x, y);
                for z in 0..n {
                    if self.dist(x, z) > dxy.clone() + self.dist(y, z) {
                        return Err(Error::MetricAxiom(format!(
                            "triangle inequality fails for ({},{},{}): {} > {} + {}",
                            self.ids[x],
                            self.ids[y],
                            self.ids[z],
                            self.dist(x, z),
                            dxy,
                            self.dist(y, z)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Neighbours of `x` in the `scale`-Rips graph restricted to `members`
    /// (which must be sorted), in lexicographic order.
    pub fn rips_neighbors(&self, x: PointIdx, members: &[PointIdx], scale: &T) -> Vec<PointIdx> {
        members
            .iter()
            .copied()
            .filter(|&y| y != x && self.dist(x, y) <= *scale)
            .collect()
    }

    /// Breadth-first search of the `scale`-Rips graph on `members`, seeded
    /// with `roots` in the given order. Neighbours are explored in
    /// lexicographic order and a vertex's parent is its first discoverer.
    pub fn rips_bfs(&self, members: &[PointIdx], roots: &[PointIdx], scale: &T) -> BfsTree {
        let mut parent = BTreeMap::new();
        let mut depth = BTreeMap::new();
        let mut order = Vec::with_capacity(members.len());
        let mut queue = VecDeque::new();
        let mut unseen: Vec<PointIdx> = members.to_vec();
        for &r in roots {
            if depth.insert(r, 0usize).is_none() {
                order.push(r);
                queue.push_back(r);
            }
        }
        unseen.retain(|v| !depth.contains_key(v));
        while let Some(v) = queue.pop_front() {
            let dv = depth[&v];
            let mut kept = Vec::with_capacity(unseen.len());
            for &w in &unseen {
                if self.dist(v, w) <= *scale {
                    parent.insert(w, v);
                    depth.insert(w, dv + 1);
                    order.push(w);
                    queue.push_back(w);
                } else {
                    kept.push(w);
                }
            }
            unseen = kept;
        }
        BfsTree {
            parent,
            depth,
            order,
        }
    }
}

/// Output of [`Space::rips_bfs`].
#[derive(Clone, Debug, Default)]
pub struct BfsTree {
    /// Parent pointers; roots have none.
    pub parent: BTreeMap<PointIdx, PointIdx>,
    pub depth: BTreeMap<PointIdx, usize>,
    /// Discovery order.
    pub order: Vec<PointIdx>,
}

impl BfsTree {
    pub fn reaches(&self, v: PointIdx) -> bool {
        self.depth.contains_key(&v)
    }

    /// Tree path from a root to `v`.
    pub fn path_to(&self, v: PointIdx) -> Option<Vec<PointIdx>> {
        if !self.reaches(v) {
            return None;
        }
        let mut path = vec![v];
        let mut cur = v;
        while let Some(&p) = self.parent.get(&cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }
}

fn sorted_order(points: &[String]) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].cmp(&points[b]));
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(Error::Malformed(format!("duplicate point id `{}`", points[w[0]])));
        }
    }
    Ok(order)
}

fn permute<T: Scalar>(metric: Metric<T>, perm: &[usize]) -> Metric<T> {
    match metric {
        Metric::Matrix { n, entries } => {
            let mut out = Vec::with_capacity(n * n);
            for &i in perm {
                for &j in perm {
                    out.push(entries[i * n + j].clone());
                }
            }
            Metric::Matrix { n, entries: out }
        }
        Metric::Paths { path, offset, gap } => Metric::Paths {
            path: perm.iter().map(|&i| path[i]).collect(),
            offset: perm.iter().map(|&i| offset[i]).collect(),
            gap,
        },
        Metric::Grid { coords } => Metric::Grid {
            coords: perm.iter().map(|&i| coords[i]).collect(),
        },
        Metric::Circulant { position, table } => Metric::Circulant {
            position: perm.iter().map(|&i| position[i]).collect(),
            table,
        },
    }
}

fn dijkstra<T: Scalar>(adj: &[BTreeMap<usize, T>], src: usize) -> Vec<Option<T>> {
    let mut dist: Vec<Option<T>> = vec![None; adj.len()];
    let mut done = vec![false; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = Some(T::zero());
    heap.push(Reverse((T::zero(), src)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for (&w, weight) in &adj[v] {
            let nd = d.clone() + weight.clone();
            let better = match &dist[w] {
                Some(old) => nd < *old,
                None => true,
            };
            if better {
                dist[w] = Some(nd.clone());
                heap.push(Reverse((nd, w)));
            }
        }
    }
    dist
}

/// Class of an `S`-connected component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentClass {
    /// Treated as a finite window into an unbounded component (no tail).
    UnboundedEmulated,
    /// Bounded and contained in the outer ball around its basepoint.
    BoundedSmall,
    /// Bounded and reaching beyond the outer ball; gets annulus points.
    BoundedLarge,
}

impl ComponentClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ComponentClass::UnboundedEmulated => "UNBOUNDED_EMULATED",
            ComponentClass::BoundedSmall => "BOUNDED_SMALL",
            ComponentClass::BoundedLarge => "BOUNDED_LARGE",
        }
    }
}

impl fmt::Display for ComponentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub id: usize,
    /// Sorted point indices.
    pub points: Vec<PointIdx>,
    pub basepoint: PointIdx,
    pub class: ComponentClass,
    /// Ray from the unbounded hint, if one was attached to this component.
    pub ray: Option<Vec<PointIdx>>,
}

/// Partition of a space into its `S`-connected components.
///
/// Classes are provisional (`BoundedSmall`) until the tailoring plan is built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition<T> {
    pub scale: T,
    pub components: Vec<Component>,
    pub component_of: Vec<usize>,
}

impl<T: Scalar> Decomposition<T> {
    pub fn component(&self, x: PointIdx) -> &Component {
        &self.components[self.component_of[x]]
    }
}

/// Connected components of the `scale`-Rips graph. Components are numbered
/// by their lexicographically smallest point; the basepoint is that point
/// unless an unbounded hint supplies a ray start inside the component.
pub fn rips_components<T: Scalar>(space: &Space<T>, scale: &T) -> Decomposition<T> {
    let n = space.len();
    let mut component_of = vec![usize::MAX; n];
    let mut components = Vec::new();
    let mut unassigned: Vec<PointIdx> = (0..n).collect();
    while let Some(&seed) = unassigned.first() {
        let id = components.len();
        let mut members = vec![seed];
        let mut stack = vec![seed];
        component_of[seed] = id;
        unassigned.remove(0);
        while let Some(v) = stack.pop() {
            let mut kept = Vec::with_capacity(unassigned.len());
            for &w in &unassigned {
                if space.dist(v, w) <= *scale {
                    component_of[w] = id;
                    members.push(w);
                    stack.push(w);
                } else {
                    kept.push(w);
                }
            }
            unassigned = kept;
        }
        members.sort_unstable();
        components.push(Component {
            id,
            basepoint: members[0],
            points: members,
            class: ComponentClass::BoundedSmall,
            ray: None,
        });
    }
    for hint in space.hints() {
        let c = &mut components[component_of[hint.component_of]];
        if c.ray.is_some() {
            continue;
        }
        if let Some(&start) = hint.ray.first() {
            if component_of[start] == c.id {
                c.basepoint = start;
            }
        }
        c.ray = Some(hint.ray.clone());
    }
    Decomposition {
        scale: scale.clone(),
        components,
        component_of,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    type Q = Rational64;

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    fn line(n: usize) -> Space<Q> {
        Space::from_generator(MetricGenerator::Line { n }).unwrap()
    }

    fn two() -> Space<Q> {
        Space::from_generator(MetricGenerator::Paths {
            lengths: vec![5, 5],
            gap: q(100),
            prefixes: Some(vec!["q".into(), "r".into()]),
        })
        .unwrap()
    }

    fn ids<'a>(space: &'a Space<Q>, xs: &[PointIdx]) -> Vec<&'a str> {
        xs.iter().map(|&x| space.id(x)).collect()
    }

    #[test]
    fn two_point_matrix() {
        let s = Space::from_matrix(
            vec!["a".into(), "b".into()],
            vec![vec![q(0), q(1)], vec![q(1), q(0)]],
        )
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dist(0, 1), q(1));
    }

    #[test]
    fn matrix_rows_follow_given_order() {
        let s = Space::from_matrix(
            vec!["b".into(), "a".into(), "c".into()],
            vec![
                vec![q(0), q(1), q(2)],
                vec![q(1), q(0), q(3)],
                vec![q(2), q(3), q(0)],
            ],
        )
        .unwrap();
        let (a, b, c) = (s.index_of("a").unwrap(), s.index_of("b").unwrap(), s.index_of("c").unwrap());
        assert_eq!((a, b, c), (0, 1, 2));
        assert_eq!(s.dist(a, b), q(1));
        assert_eq!(s.dist(b, c), q(2));
        assert_eq!(s.dist(a, c), q(3));
    }

    #[test]
    fn triangle_violation_is_reported() {
        let err = Space::from_matrix(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![q(0), q(1), q(5)],
                vec![q(1), q(0), q(1)],
                vec![q(5), q(1), q(0)],
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::MetricAxiom(ref m) if m.contains("triangle")), "{err}");
    }

    #[test]
    fn asymmetric_and_zero_distances_rejected() {
        let asym = Space::from_matrix(
            vec!["a".into(), "b".into()],
            vec![vec![q(0), q(1)], vec![q(2), q(0)]],
        );
        assert!(matches!(asym, Err(Error::MetricAxiom(_))));
        let zero = Space::from_matrix(
            vec!["a".into(), "b".into()],
            vec![vec![q(0), q(0)], vec![q(0), q(0)]],
        );
        assert!(matches!(zero, Err(Error::MetricAxiom(_))));
        let dup = Space::from_matrix(
            vec!["a".into(), "a".into()],
            vec![vec![q(0), q(1)], vec![q(1), q(0)]],
        );
        assert!(matches!(dup, Err(Error::Malformed(_))));
    }

    #[test]
    fn graph_source_uses_shortest_paths() {
        let s = Space::from_graph(
            vec!["p0".into(), "p1".into(), "p2".into()],
            vec![
                ("p0".into(), "p1".into(), q(1)),
                ("p1".into(), "p2".into(), q(1)),
            ],
        )
        .unwrap();
        let (p0, p2) = (s.index_of("p0").unwrap(), s.index_of("p2").unwrap());
        assert_eq!(s.dist(p0, p2), q(2));
        s.check_axioms().unwrap();
    }

    #[test]
    fn disconnected_graph_rejected() {
        let err = Space::<Q>::from_graph(
            vec!["a".into(), "b".into(), "c".into()],
            vec![("a".into(), "b".into(), q(1))],
        )
        .unwrap_err();
        assert!(matches!(err, Error::MetricAxiom(ref m) if m.contains("disconnected")));
    }

    #[test]
    fn line_balls() {
        let l10 = line(10);
        assert_eq!(
            l10.ball_by_id("p3", &q(2)).unwrap(),
            vec!["p1", "p2", "p3", "p4", "p5"]
        );
        assert_eq!(l10.ball_by_id("p6", &q(0)).unwrap(), vec!["p6"]);
        assert_eq!(l10.ball_by_id("p0", &q(100)).unwrap().len(), 10);
        assert!(matches!(l10.ball_by_id("nope", &q(1)), Err(Error::UnknownPoint(_))));
    }

    #[test]
    fn growth_profile_of_line() {
        let l10 = line(10);
        assert_eq!(l10.growth_profile(&q(1)), 3);
        assert_eq!(l10.growth_profile(&q(0)), 1);
        assert_eq!(l10.growth_profile(&q(9)), 10);
    }

    #[test]
    fn rips_components_of_two() {
        let s = two();
        let d = rips_components(&s, &q(2));
        assert_eq!(d.components.len(), 2);
        assert_eq!(s.id(d.components[0].basepoint), "q0");
        assert_eq!(s.id(d.components[1].basepoint), "r0");
        assert_eq!(d.components[0].points.len(), 5);

        let l10 = line(10);
        assert_eq!(rips_components(&l10, &q(2)).components.len(), 1);
        assert_eq!(rips_components(&l10, &Q::new(1, 2)).components.len(), 10);
    }

    #[test]
    fn hint_overrides_basepoint() {
        let s = line(5)
            .with_hints(vec![("p2".into(), vec!["p4".into(), "p3".into()])])
            .unwrap();
        let d = rips_components(&s, &q(1));
        assert_eq!(s.id(d.components[0].basepoint), "p4");
        assert_eq!(d.components[0].ray.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn bfs_tie_break_is_lexicographic() {
        // q0, q1, q2 on a line at scale 2: both q1 and q2 are discovered from q0
        let s = Space::from_generator(MetricGenerator::Paths {
            lengths: vec![3],
            gap: q(10),
            prefixes: Some(vec!["q".into()]),
        })
        .unwrap();
        let all: Vec<_> = (0..3).collect();
        let t = s.rips_bfs(&all, &[0], &q(2));
        assert_eq!(t.parent[&1], 0);
        assert_eq!(t.parent[&2], 0);
        assert_eq!(ids(&s, &t.order), vec!["q0", "q1", "q2"]);
        assert_eq!(t.path_to(2).unwrap(), vec![0, 2]);
    }

    #[test]
    fn generated_metrics_satisfy_axioms() {
        line(12).check_axioms().unwrap();
        two().check_axioms().unwrap();
        Space::<Q>::from_generator(MetricGenerator::Grid { width: 4, height: 3 })
            .unwrap()
            .check_axioms()
            .unwrap();
        Space::<Q>::from_generator(MetricGenerator::CayleyCyclic {
            n: 15,
            generators: vec![1, -1, 4, -4],
        })
        .unwrap()
        .check_axioms()
        .unwrap();
    }

    #[test]
    fn cyclic_word_metric() {
        let s = Space::<Q>::from_generator(MetricGenerator::CayleyCyclic {
            n: 12,
            generators: vec![1, -1],
        })
        .unwrap();
        let z0 = s.index_of("z0").unwrap();
        let z6 = s.index_of("z6").unwrap();
        let z11 = s.index_of("z11").unwrap();
        assert_eq!(s.dist(z0, z6), q(6));
        assert_eq!(s.dist(z0, z11), q(1));
        assert_eq!(s.ball(z0, &q(3)).len(), 7);
    }

    #[test]
    fn cyclic_generators_must_be_symmetric() {
        let err = Space::<Q>::from_generator(MetricGenerator::CayleyCyclic {
            n: 12,
            generators: vec![1],
        });
        assert!(matches!(err, Err(Error::Generator(_))));
    }

    #[test]
    fn integer_and_big_scalars() {
        let s = Space::<i64>::from_generator(MetricGenerator::Line { n: 4 }).unwrap();
        assert_eq!(s.dist(0, 3), 3);
        let b = Space::<num_rational::BigRational>::from_generator(MetricGenerator::Line { n: 4 })
            .unwrap();
        b.check_axioms().unwrap();
    }
}
