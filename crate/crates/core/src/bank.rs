//! The deposit model: generator `i` multiplies a balance by `q_i > 1` on
//! `(0, ∞)`, so `D_t(x) = x Π q_i^{exponent sum of s_i in t}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cesaro::cesaro_scan;
use crate::engine::Mdtds;
use crate::error::{Error, MapFault, Result};
use crate::family::{Interval, MapFamily};
use crate::scalar::Scalar;
use crate::subgroup::{GeneratorsInS, SubgroupSpec};
use crate::word::{Gen, Word};

/// Set of `H`-periodic points; it never depends on `x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BankPeriodicity {
    AllPositiveReals,
    /// `y ∈ H` has multiplier `≠ 1`, so no point is `H`-periodic.
    Empty { witness: Word },
    /// Every element of `H ∩ V_depth` has multiplier 1.
    UndecidedUpTo { depth: usize },
}

/// Limit of the Cesàro mean predicted by the closed-form ball sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case", bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum Trichotomy<T> {
    Zero,
    /// The limit is `coefficient · x`.
    Finite {
        #[serde(with = "crate::scalar::text")]
        coefficient: T,
    },
    Infinite,
}

impl fmt::Display for BankPeriodicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BankPeriodicity::AllPositiveReals => f.write_str("(0, +inf)"),
            BankPeriodicity::Empty { witness } => write!(f, "empty, witness {witness}"),
            BankPeriodicity::UndecidedUpTo { depth } => write!(f, "undecided up to radius {depth}"),
        }
    }
}

impl<T: Scalar> fmt::Display for Trichotomy<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trichotomy::Zero => f.write_str("0"),
            Trichotomy::Finite { coefficient } => write!(f, "{} x", coefficient.to_text()),
            Trichotomy::Infinite => f.write_str("+inf"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bank<T> {
    q: Vec<T>,
    domain: Interval<T>,
}

impl<T: Scalar> Bank<T> {
    pub fn new(q: Vec<T>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::invalid("a bank needs at least one rate"));
        }
        if let Some((i, bad)) = q.iter().enumerate().find(|(_, v)| **v <= T::one()) {
            return Err(Error::invalid(format!("q_{} = {} must exceed 1", i + 1, bad.to_text())));
        }
        Ok(Bank {
            q,
            domain: Interval::open_above(T::zero()),
        })
    }

    /// Rates from yearly percentages `p_i > 0`: `q_i = 1 + p_i/100`.
    pub fn from_percentages(p: &[T]) -> Result<Self> {
        let hundred = T::from_int(100);
        Bank::new(p.iter().map(|p| T::one() + p.clone() / hundred.clone()).collect())
    }

    pub fn rates(&self) -> &[T] {
        &self.q
    }

    fn rate(&self, gen: Gen) -> Result<&T> {
        self.q
            .get(gen.slot())
            .ok_or_else(|| Error::invalid(format!("{gen} is not a generator of a {}-rate bank", self.q.len())))
    }

    /// `Π q_i^{ε}` over the letters of `y`.
    pub fn word_multiplier(&self, y: &Word) -> Result<T> {
        y.runs()
            .iter()
            .try_fold(T::one(), |acc, run| Ok(acc * self.rate(run.gen)?.powi(run.exp)))
    }

    /// `D_t(x)` in closed form.
    pub fn evaluate(&self, t: &Word, x: &T) -> Result<T> {
        if !x.is_positive() {
            return Err(Error::Domain {
                word: Word::identity(),
                value: x.to_text(),
                domain: self.domain.to_string(),
            });
        }
        Ok(x.clone() * self.word_multiplier(t)?)
    }

    fn is_unit(&self, m: &T) -> bool {
        m.approx_eq(&T::one(), &T::default_tolerance())
    }

    /// Decides `Per_H`: a generator inside `H` empties it; subgroups of the
    /// balanced subgroup fill `(0, ∞)`; cyclic subgroups are decided by the
    /// multiplier of their generator; anything else is searched on
    /// `H ∩ V_depth`.
    pub fn classify_periodicity(&self, spec: &SubgroupSpec, depth: usize, cap: u64) -> Result<BankPeriodicity> {
        if depth == 0 {
            return Err(Error::invalid("search depth must be at least 1"));
        }
        let rank = self.q.len();
        spec.validate(rank)?;
        if let GeneratorsInS::Nonempty { witness } = spec.meta(rank).generators_in_s {
            return Ok(BankPeriodicity::Empty {
                witness: Word::generator(witness),
            });
        }
        if spec.is_within_balanced(rank) {
            return Ok(BankPeriodicity::AllPositiveReals);
        }
        if let SubgroupSpec::Cyclic(u) = spec {
            return Ok(if self.is_unit(&self.word_multiplier(u)?) {
                BankPeriodicity::AllPositiveReals
            } else {
                BankPeriodicity::Empty { witness: u.clone() }
            });
        }
        for y in spec.ball(depth, rank, cap)? {
            if !self.is_unit(&self.word_multiplier(&y)?) {
                return Ok(BankPeriodicity::Empty { witness: y });
            }
        }
        Ok(BankPeriodicity::UndecidedUpTo { depth })
    }

    /// `x Π_i (q_i^{n+1} - q_i^{-n}) / (q_i - 1)`: the product of one
    /// geometric sum per generator, as if the ball were the box
    /// `{-n, …, n}^|S|` of exponent vectors.
    pub fn ball_sum_paper(&self, x: &T, n: usize) -> T {
        let n = n as i64;
        self.q.iter().fold(x.clone(), |acc, q| {
            acc * (q.powi(n + 1) - q.powi(-n)) / (q.clone() - T::one())
        })
    }

    /// `x Π_i Σ_{|ε|≤n} q_i^ε`, summed term by term.
    pub fn box_sum(&self, x: &T, n: usize) -> T {
        let n = n as i64;
        self.q.iter().fold(x.clone(), |acc, q| {
            acc * (-n..=n).fold(T::zero(), |s, e| s + q.powi(e))
        })
    }

    /// `Σ_{t∈V_n} D_t(x)` over the free-group ball.
    pub fn ball_sum_brute(&self, x: &T, n: usize, cap: u64) -> Result<T> {
        let system = Mdtds::new(self).with_node_cap(cap);
        let report = cesaro_scan(&system, x, n)?;
        Ok(report.rows.into_iter().last().expect("scan has a row per radius").ball_sum)
    }

    /// Compares `Q = Π q_i` with `q - 1` and returns the limit of
    /// `ball_sum_paper / |V_n|`.
    pub fn cesaro_limit(&self) -> Result<Trichotomy<T>> {
        let rank = self.q.len();
        if rank < 2 {
            return Err(Error::invalid("the trichotomy needs at least two generators"));
        }
        let big_q = self.q.iter().fold(T::one(), |acc, q| acc * q.clone());
        let q = T::from_int(2 * rank as i64);
        let threshold = q.clone() - T::one();
        Ok(if big_q.approx_eq(&threshold, &T::default_tolerance()) {
            let denom = self
                .q
                .iter()
                .fold(q.clone(), |acc, qi| acc * (T::one() - T::one() / qi.clone()));
            Trichotomy::Finite {
                coefficient: (q - T::from_int(2)) / denom,
            }
        } else if big_q < threshold {
            Trichotomy::Zero
        } else {
            Trichotomy::Infinite
        })
    }
}

impl<T: Scalar> MapFamily for Bank<T> {
    type Scalar = T;

    fn rank(&self) -> usize {
        self.q.len()
    }

    fn domain(&self) -> &Interval<T> {
        &self.domain
    }

    fn apply(&self, gen: Gen, x: &T, power: i64) -> Result<T, MapFault> {
        Ok(x.clone() * self.q[gen.slot()].powi(power))
    }
}
