//! Exact scalar types used for distances.
//!
//! Every predicate in the construction is a threshold comparison (`d <= R`,
//! `d > S`, `ratio < eps`), so distances are kept in an exactly ordered type.
//! `Ord` rules out `f32`/`f64` at compile time.

use std::fmt;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num};

/// A count ratio such as `|A △ B| / |A ∩ B|`.
pub type Quotient = Ratio<u64>;

pub trait Scalar:
    Clone + Ord + Num + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Parses `"a/b"` or an integer string. Fails if the value is not
    /// exactly representable.
    fn parse_exact(s: &str) -> Option<Self> {
        // rational types only parse the `a/b` form
        let int = |t: &str| {
            let t = t.trim();
            Self::from_str_radix(t, 10)
                .or_else(|_| Self::from_str_radix(&format!("{t}/1"), 10))
                .ok()
        };
        match s.split_once('/') {
            None => int(s),
            Some((n, d)) => {
                let (n, d) = (int(n)?, int(d)?);
                if d.is_zero() {
                    return None;
                }
                let q = n.clone() / d.clone();
                (q.clone() * d == n).then_some(q)
            }
        }
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("scalar type cannot represent count")
    }

    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("scalar type cannot represent integer")
    }

    fn times(&self, n: u64) -> Self {
        self.clone() * Self::from_count(n)
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
}

impl<T> Scalar for T where
    T: Clone + Ord + Num + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

/// Parses an exact nonnegative count ratio such as `"1/3"` or `"2"`.
pub fn parse_quotient(s: &str) -> Option<Quotient> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: u64 = n.trim().parse().ok()?;
            let d: u64 = d.trim().parse().ok()?;
            (d != 0).then(|| Ratio::new(n, d))
        }
        None => s.parse().ok().map(Ratio::from_integer),
    }
}
