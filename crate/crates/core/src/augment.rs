//! The augmented space: every bounded component gets a tail of points
//! spaced `S` apart, glued at its basepoint.
//!
//! Tails are infinite in principle but only indices `1..=N` are ever
//! reachable by the flow, so they are materialized up to `N` and anything
//! beyond is an error. `y^(0)` is represented by the basepoint itself.

use std::fmt;

use crate::chains::InstanceParams;
use crate::error::{Error, Result};
use crate::metric::{ComponentClass, Decomposition, PointIdx, Space};
use crate::scalar::Scalar;

/// A point of the augmented space.
///
/// The derived order puts base points first (in id order), then tails by
/// component and index, which is also the dense index order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AugPoint {
    Base(PointIdx),
    /// `index >= 1`.
    Tail { component: usize, index: u64 },
}

impl AugPoint {
    pub fn base(&self) -> Option<PointIdx> {
        match self {
            AugPoint::Base(x) => Some(*x),
            AugPoint::Tail { .. } => None,
        }
    }

    pub fn is_tail(&self) -> bool {
        matches!(self, AugPoint::Tail { .. })
    }
}

impl fmt::Display for AugPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AugPoint::Base(x) => write!(f, "#{x}"),
            AugPoint::Tail { component, index } => write!(f, "{component}#{index}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AugmentedSpace<'a, T> {
    base: &'a Space<T>,
    decomposition: &'a Decomposition<T>,
    scale: T,
    tail_cap: u64,
    /// Dense index of `Tail(λ, 1)` for components that carry a tail.
    tail_offset: Vec<Option<usize>>,
    len: usize,
}

/// Attaches tails of length `params.n` to every component not classified as
/// an emulated unbounded one.
pub fn augment<'a, T: Scalar>(
    space: &'a Space<T>,
    decomposition: &'a Decomposition<T>,
    params: &InstanceParams<T>,
) -> AugmentedSpace<'a, T> {
    let tail_cap = params.n;
    let mut next = space.len();
    let tail_offset = decomposition
        .components
        .iter()
        .map(|c| {
            if c.class == ComponentClass::UnboundedEmulated {
                None
            } else {
                let at = next;
                next += tail_cap as usize;
                Some(at)
            }
        })
        .collect();
    AugmentedSpace {
        base: space,
        decomposition,
        scale: decomposition.scale.clone(),
        tail_cap,
        tail_offset,
        len: next,
    }
}

impl<'a, T: Scalar> AugmentedSpace<'a, T> {
    pub fn base(&self) -> &'a Space<T> {
        self.base
    }

    pub fn decomposition(&self) -> &'a Decomposition<T> {
        self.decomposition
    }

    pub fn tail_cap(&self) -> u64 {
        self.tail_cap
    }

    pub fn has_tail(&self, component: usize) -> bool {
        self.tail_offset.get(component).is_some_and(Option::is_some)
    }

    /// Number of materialized points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn check(&self, p: AugPoint) -> Result<()> {
        if let AugPoint::Tail { component, index } = p {
            if !self.has_tail(component) {
                return Err(Error::invariant(
                    "tail",
                    format!("component {component} has no tail"),
                ));
            }
            if index == 0 || index > self.tail_cap {
                return Err(Error::invariant(
                    "tail window",
                    format!(
                        "tail index {index} of component {component} outside 1..={}",
                        self.tail_cap
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn dense_index(&self, p: AugPoint) -> Result<usize> {
        self.check(p)?;
        Ok(match p {
            AugPoint::Base(x) => x,
            AugPoint::Tail { component, index } => {
                self.tail_offset[component].expect("checked") + index as usize - 1
            }
        })
    }

    pub fn point(&self, i: usize) -> AugPoint {
        if i < self.base.len() {
            return AugPoint::Base(i);
        }
        let component = self
            .tail_offset
            .iter()
            .rposition(|o| o.is_some_and(|at| at <= i))
            .expect("dense index out of range");
        let at = self.tail_offset[component].expect("present");
        AugPoint::Tail {
            component,
            index: (i - at + 1) as u64,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = AugPoint> + '_ {
        (0..self.len).map(|i| self.point(i))
    }

    /// Distance from the basepoint of `component` to `Tail(component, j)`.
    fn leg(&self, index: u64) -> T {
        self.scale.times(index)
    }

    /// The extended metric. Tails hang off basepoints, so every path between
    /// a tail point and anything else runs through its basepoint.
    pub fn dist(&self, u: AugPoint, v: AugPoint) -> Result<T> {
        self.check(u)?;
        self.check(v)?;
        let basepoint = |c: usize| self.decomposition.components[c].basepoint;
        Ok(match (u, v) {
            (AugPoint::Base(x), AugPoint::Base(y)) => self.base.dist(x, y),
            (AugPoint::Base(x), AugPoint::Tail { component, index })
            | (AugPoint::Tail { component, index }, AugPoint::Base(x)) => {
                self.base.dist(x, basepoint(component)) + self.leg(index)
            }
            (
                AugPoint::Tail {
                    component: a,
                    index: i,
                },
                AugPoint::Tail {
                    component: b,
                    index: j,
                },
            ) => {
                if a == b {
                    self.leg(i.abs_diff(j))
                } else {
                    self.leg(i) + self.base.dist(basepoint(a), basepoint(b)) + self.leg(j)
                }
            }
        })
    }

    /// `X_λ` together with its tail points `1..=N`; just `X_λ` for an
    /// emulated unbounded component.
    pub fn truncate(&self, component: usize) -> Result<Vec<AugPoint>> {
        let c = self
            .decomposition
            .components
            .get(component)
            .ok_or_else(|| Error::Malformed(format!("unknown component {component}")))?;
        let mut out: Vec<AugPoint> = c.points.iter().map(|&x| AugPoint::Base(x)).collect();
        if self.has_tail(component) {
            out.extend((1..=self.tail_cap).map(|index| AugPoint::Tail { component, index }));
        }
        Ok(out)
    }

    /// Base points by id, tail points as `λ#j`.
    pub fn label(&self, p: AugPoint) -> String {
        match p {
            AugPoint::Base(x) => self.base.id(x).to_string(),
            AugPoint::Tail { component, index } => format!("{component}#{index}"),
        }
    }
}
