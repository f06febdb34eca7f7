//! Rotations of the circle `[0, 1)`: generator `i` adds `θ_i` mod 1, so
//! `D_t(x) = (x + q(t)) mod 1` with `q(t) = Σ ε_j θ_{i_j}`.
//!
//! With exact rational angles every verdict below is a decision. Floating
//! angles stand in for irrational ones; integrality is then tested at the
//! default tolerance, which is evidence but never a certificate of fullness.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, MapFault, Result};
use crate::family::{wrap_unit, Interval, MapFamily};
use crate::scalar::Scalar;
use crate::subgroup::SubgroupSpec;
use crate::word::{Gen, Word};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CircleSet {
    FullCircle,
    /// `q(witness) ∉ ℤ` for this element of the subgroup.
    Empty { witness: Word },
    UndecidedUpTo { depth: usize, note: String },
}

impl fmt::Display for CircleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircleSet::FullCircle => f.write_str("[0, 1)"),
            CircleSet::Empty { witness } => write!(f, "empty, witness {witness}"),
            CircleSet::UndecidedUpTo { depth, note } => write!(f, "undecided up to radius {depth} ({note})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case", bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum Density<T> {
    Dense {
        #[serde(with = "crate::scalar::text")]
        max_gap: T,
    },
    MaxGap {
        #[serde(with = "crate::scalar::text")]
        max_gap: T,
    },
}

impl<T> Density<T> {
    pub fn max_gap(&self) -> &T {
        match self {
            Density::Dense { max_gap } | Density::MaxGap { max_gap } => max_gap,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Circle<T> {
    theta: Vec<T>,
    domain: Interval<T>,
}

impl<T: Scalar> Circle<T> {
    pub fn new(theta: Vec<T>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::invalid("a circle model needs at least one angle"));
        }
        if let Some((i, bad)) = theta.iter().enumerate().find(|(_, v)| !v.is_positive()) {
            return Err(Error::invalid(format!("θ_{} = {} must be positive", i + 1, bad.to_text())));
        }
        Ok(Circle {
            theta,
            domain: Interval::half_open(T::zero(), T::one()),
        })
    }

    pub fn angles(&self) -> &[T] {
        &self.theta
    }

    fn angle(&self, gen: Gen) -> Result<&T> {
        self.theta
            .get(gen.slot())
            .ok_or_else(|| Error::invalid(format!("{gen} is not a generator of a {}-angle circle", self.theta.len())))
    }

    fn integral(&self, v: &T) -> bool {
        v.is_integral(&T::default_tolerance())
    }

    /// `q(t)`.
    pub fn q_of_word(&self, t: &Word) -> Result<T> {
        t.runs()
            .iter()
            .try_fold(T::zero(), |acc, run| Ok(acc + self.angle(run.gen)?.clone() * T::from_int(run.exp)))
    }

    pub fn evaluate(&self, t: &Word, x: &T) -> Result<T> {
        if !self.domain.contains(x) {
            return Err(Error::Domain {
                word: Word::identity(),
                value: x.to_text(),
                domain: self.domain.to_string(),
            });
        }
        Ok(wrap_unit(x.clone() + self.q_of_word(t)?))
    }

    /// Common fixed points of all rotations: the whole circle when every
    /// angle is an integer, otherwise none.
    pub fn fixed_set(&self) -> CircleSet {
        match self.theta.iter().position(|v| !self.integral(v)) {
            Some(i) => CircleSet::Empty {
                witness: Word::generator(Gen::new(i as u32 + 1)),
            },
            None if T::EXACT => CircleSet::FullCircle,
            None => CircleSet::UndecidedUpTo {
                depth: 1,
                note: "angles are integral only within floating tolerance".into(),
            },
        }
    }

    /// `Per_H`: the whole circle when `q(t) ∈ ℤ` for every `t ∈ H`, empty
    /// otherwise. Balanced subgroups, cyclic subgroups and integer angles
    /// are decided outright; other subgroups are searched on `H ∩ V_depth`.
    pub fn periodic_set(&self, spec: &SubgroupSpec, depth: usize, cap: u64) -> Result<CircleSet> {
        if depth == 0 {
            return Err(Error::invalid("search depth must be at least 1"));
        }
        let rank = self.theta.len();
        spec.validate(rank)?;
        let full = || {
            if T::EXACT {
                CircleSet::FullCircle
            } else {
                CircleSet::UndecidedUpTo {
                    depth,
                    note: "q(t) is integral only within floating tolerance".into(),
                }
            }
        };
        if spec.is_within_balanced(rank) {
            return Ok(CircleSet::FullCircle);
        }
        if let SubgroupSpec::Cyclic(u) = spec {
            return Ok(if self.integral(&self.q_of_word(u)?) {
                full()
            } else {
                CircleSet::Empty { witness: u.clone() }
            });
        }
        for t in spec.ball(depth, rank, cap)? {
            if !self.integral(&self.q_of_word(&t)?) {
                return Ok(CircleSet::Empty { witness: t });
            }
        }
        if self.theta.iter().all(|v| self.integral(v)) {
            return Ok(full());
        }
        Ok(CircleSet::UndecidedUpTo {
            depth,
            note: format!("q(t) is an integer for every t in H within radius {depth}"),
        })
    }

    /// `H_u` with `u = s_i^m`, where `θ_i = p/m` in lowest terms; every
    /// point is periodic for it.
    pub fn rational_period_subgroup(&self, gen: Gen) -> Result<SubgroupSpec> {
        let theta = self.angle(gen)?;
        if !T::EXACT {
            return Err(Error::invalid(format!("θ_{} is not given as an exact rational", gen.index())));
        }
        let r = theta.to_rational().expect("exact scalars carry a rational value");
        let m: i64 = num_traits::ToPrimitive::to_i64(r.denom())
            .ok_or_else(|| Error::invalid("denominator of θ does not fit in 64 bits"))?;
        SubgroupSpec::cyclic(Word::power(gen, m))
    }

    /// Largest circular gap between `x + kθ_i mod 1`, `0 ≤ k < samples`.
    pub fn density_check(&self, gen: Gen, x: &T, samples: usize, eps: &T) -> Result<Density<T>> {
        if samples == 0 {
            return Err(Error::invalid("need at least one sample"));
        }
        if !(eps.is_positive() && *eps < T::one()) {
            return Err(Error::invalid("eps must lie in (0, 1)"));
        }
        let theta = self.angle(gen)?.clone();
        if !self.domain.contains(x) {
            return Err(Error::invalid(format!("x = {} is not in [0, 1)", x.to_text())));
        }
        let mut points = Vec::with_capacity(samples);
        let mut v = x.clone();
        for _ in 0..samples {
            points.push(v.clone());
            v = wrap_unit(v + theta.clone());
        }
        points.sort_by(|a, b| a.partial_cmp(b).expect("orbit points are comparable"));
        let wrap = T::one() - points[points.len() - 1].clone() + points[0].clone();
        let max_gap = points
            .windows(2)
            .map(|p| p[1].clone() - p[0].clone())
            .fold(wrap, |m, g| if g > m { g } else { m });
        Ok(if max_gap < *eps {
            Density::Dense { max_gap }
        } else {
            Density::MaxGap { max_gap }
        })
    }
}

impl<T: Scalar> MapFamily for Circle<T> {
    type Scalar = T;

    fn rank(&self) -> usize {
        self.theta.len()
    }

    fn domain(&self) -> &Interval<T> {
        &self.domain
    }

    fn apply(&self, gen: Gen, x: &T, power: i64) -> Result<T, MapFault> {
        Ok(wrap_unit(x.clone() + self.theta[gen.slot()].clone() * T::from_int(power)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::DEFAULT_NODE_CAP;
    use crate::engine::Mdtds;
    use crate::scalar::{ratio, Rational};

    fn circle(theta: &[(i64, i64)]) -> Circle<Rational> {
        Circle::new(theta.iter().map(|&(p, q)| ratio(p, q)).collect()).unwrap()
    }

    fn w(text: &str) -> Word {
        Word::parse(text, 3).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let c = circle(&[(1, 2), (1, 3)]);
        assert_eq!(c.evaluate(&Word::identity(), &ratio(2, 5)).unwrap(), ratio(2, 5));
        assert_eq!(c.evaluate(&w("s1 s2"), &ratio(0, 1)).unwrap(), ratio(5, 6));
        assert_eq!(c.evaluate(&w("s2^-2"), &ratio(1, 4)).unwrap(), ratio(7, 12));
        assert!(c.evaluate(&w("s1"), &ratio(1, 1)).is_err());
        assert!(Circle::new(vec![ratio(0, 1)]).is_err());
    }

    #[test]
    fn rotation_sums() {
        let c = circle(&[(1, 2), (1, 3)]);
        assert_eq!(c.q_of_word(&Word::identity()).unwrap(), ratio(0, 1));
        assert_eq!(c.q_of_word(&w("s1^2 s2^-3")).unwrap(), ratio(0, 1));
        assert_eq!(c.q_of_word(&w("s1")).unwrap(), ratio(1, 2));
        let t = w("s1 s2^-1 s1");
        assert_eq!(c.q_of_word(&t.inv()).unwrap(), -c.q_of_word(&t).unwrap());
    }

    #[test]
    fn fixed_set_examples() {
        assert_eq!(circle(&[(1, 1), (2, 1)]).fixed_set(), CircleSet::FullCircle);
        assert_eq!(circle(&[(1, 2), (1, 1)]).fixed_set(), CircleSet::Empty { witness: w("s1") });
        assert_eq!(circle(&[(2, 1), (3, 1), (5, 1)]).fixed_set(), CircleSet::FullCircle);
        let approx = Circle::new(vec![1.0f64, 2.0]).unwrap();
        assert!(matches!(approx.fixed_set(), CircleSet::UndecidedUpTo { .. }));
        let irrational = Circle::new(vec![std::f64::consts::SQRT_2]).unwrap();
        assert_eq!(irrational.fixed_set(), CircleSet::Empty { witness: w("s1") });
    }

    #[test]
    fn periodic_set_examples() {
        let c = circle(&[(1, 2), (1, 3)]);
        let cap = DEFAULT_NODE_CAP;
        assert_eq!(c.periodic_set(&SubgroupSpec::cyclic(w("s1^2")).unwrap(), 3, cap).unwrap(), CircleSet::FullCircle);
        assert_eq!(
            c.periodic_set(&SubgroupSpec::cyclic(w("s1")).unwrap(), 3, cap).unwrap(),
            CircleSet::Empty { witness: w("s1") }
        );
        assert_eq!(c.periodic_set(&SubgroupSpec::BalancedAll, 3, cap).unwrap(), CircleSet::FullCircle);
        assert_eq!(c.periodic_set(&SubgroupSpec::Full, 3, cap).unwrap(), CircleSet::Empty { witness: w("s1") });
        let even = SubgroupSpec::even(&[1, 2]).unwrap();
        match c.periodic_set(&even, 3, cap).unwrap() {
            CircleSet::Empty { witness } => assert!(even.member(&witness)),
            v => panic!("{v:?}"),
        }
        let integers = circle(&[(1, 1), (4, 1)]);
        assert_eq!(integers.periodic_set(&even, 2, cap).unwrap(), CircleSet::FullCircle);
        let approx = Circle::new(vec![0.5f64, 1.0 / 3.0]).unwrap();
        assert!(matches!(
            approx.periodic_set(&SubgroupSpec::cyclic(w("s1^2")).unwrap(), 3, cap).unwrap(),
            CircleSet::UndecidedUpTo { .. }
        ));
    }

    #[test]
    fn rational_period_subgroups() {
        let c = circle(&[(1, 2), (3, 7)]);
        let h = c.rational_period_subgroup(Gen::new(1)).unwrap();
        assert_eq!(h, SubgroupSpec::cyclic(w("s1^2")).unwrap());
        assert_eq!(c.periodic_set(&h, 3, DEFAULT_NODE_CAP).unwrap(), CircleSet::FullCircle);
        assert_eq!(c.rational_period_subgroup(Gen::new(2)).unwrap(), SubgroupSpec::cyclic(w("s2^7")).unwrap());
        let whole = circle(&[(2, 1)]);
        assert_eq!(whole.rational_period_subgroup(Gen::new(1)).unwrap(), SubgroupSpec::cyclic(w("s1")).unwrap());
        let approx = Circle::new(vec![0.5f64]).unwrap();
        assert!(approx.rational_period_subgroup(Gen::new(1)).is_err());
    }

    #[test]
    fn density_examples() {
        let c = circle(&[(1, 2), (1, 3)]);
        let half = c.density_check(Gen::new(1), &ratio(0, 1), 10, &ratio(1, 100)).unwrap();
        assert_eq!(half, Density::MaxGap { max_gap: ratio(1, 2) });
        let third = c.density_check(Gen::new(2), &ratio(0, 1), 10, &ratio(1, 100)).unwrap();
        assert_eq!(third.max_gap(), &ratio(1, 3));
        let irrational = Circle::new(vec![std::f64::consts::SQRT_2 - 1.0]).unwrap();
        let d = irrational.density_check(Gen::new(1), &0.0, 10_000, &0.01).unwrap();
        assert!(matches!(d, Density::Dense { .. }), "{d:?}");
        assert!(c.density_check(Gen::new(1), &ratio(0, 1), 0, &ratio(1, 2)).is_err());
    }

    #[test]
    fn agrees_with_generic_engine_and_commutes() {
        let c = circle(&[(1, 2), (2, 7), (5, 3)]);
        let sys = Mdtds::new(&c);
        let words = crate::ball::ball_words(2, 3).unwrap();
        let x = ratio(3, 11);
        for t in &words {
            assert_eq!(c.evaluate(t, &x).unwrap(), sys.evaluate(t, &x).unwrap());
            for y in words.iter().step_by(7) {
                assert_eq!(sys.evaluate(&t.mul(y), &x).unwrap(), sys.evaluate(&y.mul(t), &x).unwrap());
            }
        }
    }
}
