//! Families of invertible interval maps `f_1, …, f_|S|` with closed-form
//! integer powers.

use std::fmt;
use std::ops::Bound;

use crate::error::MapFault;
use crate::scalar::Scalar;
use crate::word::Gen;

/// An interval `X ⊂ ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<T> {
    pub lower: Bound<T>,
    pub upper: Bound<T>,
}

impl<T: Scalar> Interval<T> {
    pub fn closed(lo: T, hi: T) -> Self {
        Interval {
            lower: Bound::Included(lo),
            upper: Bound::Included(hi),
        }
    }

    pub fn half_open(lo: T, hi: T) -> Self {
        Interval {
            lower: Bound::Included(lo),
            upper: Bound::Excluded(hi),
        }
    }

    /// `(lo, +∞)`.
    pub fn open_above(lo: T) -> Self {
        Interval {
            lower: Bound::Excluded(lo),
            upper: Bound::Unbounded,
        }
    }

    pub fn real_line() -> Self {
        Interval {
            lower: Bound::Unbounded,
            upper: Bound::Unbounded,
        }
    }

    pub fn contains(&self, x: &T) -> bool {
        let above = match &self.lower {
            Bound::Included(lo) => x >= lo,
            Bound::Excluded(lo) => x > lo,
            Bound::Unbounded => true,
        };
        let below = match &self.upper {
            Bound::Included(hi) => x <= hi,
            Bound::Excluded(hi) => x < hi,
            Bound::Unbounded => true,
        };
        above && below
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.lower, Bound::Unbounded) && !matches!(self.upper, Bound::Unbounded)
    }
}

impl<T: Scalar> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lower {
            Bound::Included(lo) => write!(f, "[{}", lo.to_text())?,
            Bound::Excluded(lo) => write!(f, "({}", lo.to_text())?,
            Bound::Unbounded => f.write_str("(-inf")?,
        }
        match &self.upper {
            Bound::Included(hi) => write!(f, ", {}]", hi.to_text()),
            Bound::Excluded(hi) => write!(f, ", {})", hi.to_text()),
            Bound::Unbounded => f.write_str(", +inf)"),
        }
    }
}

/// The maps driving a multi-dimensional-time system.
pub trait MapFamily: Sync {
    type Scalar: Scalar;

    /// Number of generators `|S|`.
    fn rank(&self) -> usize;

    fn domain(&self) -> &Interval<Self::Scalar>;

    /// `f_gen^power(x)` for any integer power; `power = 0` is the identity.
    fn apply(&self, gen: Gen, x: &Self::Scalar, power: i64) -> Result<Self::Scalar, MapFault>;
}

impl<F: MapFamily + ?Sized> MapFamily for &F {
    type Scalar = F::Scalar;

    fn rank(&self) -> usize {
        (**self).rank()
    }

    fn domain(&self) -> &Interval<Self::Scalar> {
        (**self).domain()
    }

    fn apply(&self, gen: Gen, x: &Self::Scalar, power: i64) -> Result<Self::Scalar, MapFault> {
        (**self).apply(gen, x, power)
    }
}

/// Building blocks with closed-form powers.
#[derive(Debug, Clone, PartialEq)]
pub enum ElementaryMap<T> {
    /// `x ↦ a x + b`, `a ≠ 0`.
    Affine { a: T, b: T },
    /// `x ↦ x²` on a subset of `[0, ∞)`; negative powers take square roots.
    Square,
    /// `x ↦ (x + θ) mod 1`.
    Rotation { theta: T },
}

impl<T: Scalar> ElementaryMap<T> {
    pub fn identity() -> Self {
        ElementaryMap::Affine { a: T::one(), b: T::zero() }
    }

    pub fn apply(&self, gen: Gen, x: &T, power: i64) -> Result<T, MapFault> {
        let fault = |reason| MapFault {
            gen,
            power,
            value: x.to_text(),
            reason,
        };
        if power == 0 {
            return Ok(x.clone());
        }
        match self {
            ElementaryMap::Affine { a, b } => {
                if a.is_one() {
                    return Ok(x.clone() + b.clone() * T::from_int(power));
                }
                // f^k(x) = a^k (x - c) + c around the fixed point c = b / (1 - a)
                let c = b.clone() / (T::one() - a.clone());
                Ok(a.powi(power) * (x.clone() - c.clone()) + c)
            }
            ElementaryMap::Square => {
                if x.is_negative() {
                    return Err(fault("x² is only invertible on nonnegative values"));
                }
                let mut v = x.clone();
                for _ in 0..power.unsigned_abs() {
                    v = if power > 0 {
                        v.clone() * v
                    } else {
                        v.sqrt_checked().ok_or_else(|| fault("square root is not representable"))?
                    };
                }
                Ok(v)
            }
            ElementaryMap::Rotation { theta } => Ok(wrap_unit(x.clone() + theta.clone() * T::from_int(power))),
        }
    }
}

/// `x mod 1` in `[0, 1)`; floating values that land within tolerance of 1
/// are folded to 0.
pub fn wrap_unit<T: Scalar>(x: T) -> T {
    let v = x.frac();
    if !T::EXACT && (T::one() - v.clone()) <= T::default_tolerance() {
        T::zero()
    } else {
        v
    }
}

/// A family assembled from [`ElementaryMap`]s, one per generator.
#[derive(Debug, Clone)]
pub struct Family<T> {
    maps: Vec<ElementaryMap<T>>,
    domain: Interval<T>,
}

impl<T: Scalar> Family<T> {
    pub fn new(maps: Vec<ElementaryMap<T>>, domain: Interval<T>) -> Self {
        assert!(!maps.is_empty(), "a family needs at least one map");
        Family { maps, domain }
    }

    /// `f_1 = ¾x + ¼`, `f_2 = x²` on `[0, 1]`: common fixed point 1.
    pub fn quarter_square() -> Self {
        Family::new(
            vec![
                ElementaryMap::Affine {
                    a: T::from_ratio(3, 4),
                    b: T::from_ratio(1, 4),
                },
                ElementaryMap::Square,
            ],
            Interval::closed(T::zero(), T::one()),
        )
    }

    /// Every generator acts as the identity on `ℝ`.
    pub fn identity(rank: usize) -> Self {
        Family::new(vec![ElementaryMap::identity(); rank], Interval::real_line())
    }

    /// Every generator acts as `x ↦ -x` on `[-1, 1]`, so `D_t(1) = (-1)^|t|`.
    pub fn sign(rank: usize) -> Self {
        Family::new(
            vec![
                ElementaryMap::Affine {
                    a: -T::one(),
                    b: T::zero()
                };
                rank
            ],
            Interval::closed(-T::one(), T::one()),
        )
    }

    pub fn maps(&self) -> &[ElementaryMap<T>] {
        &self.maps
    }
}

impl<T: Scalar> MapFamily for Family<T> {
    type Scalar = T;

    fn rank(&self) -> usize {
        self.maps.len()
    }

    fn domain(&self) -> &Interval<T> {
        &self.domain
    }

    fn apply(&self, gen: Gen, x: &T, power: i64) -> Result<T, MapFault> {
        self.maps[gen.slot()].apply(gen, x, power)
    }
}
