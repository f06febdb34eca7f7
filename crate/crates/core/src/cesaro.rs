//! Cesàro means `C_n(x) = Σ_{t∈V_n} D_t(x) / |V_n|` over growing balls.

use std::fmt::Write as _;
use std::sync::atomic::AtomicU64;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::ball::{ball_size, check_cap};
use crate::engine::Mdtds;
use crate::error::{Error, Result};
use crate::family::MapFamily;
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CesaroRow<T> {
    pub n: usize,
    pub ball_size: u64,
    #[serde(with = "crate::scalar::text")]
    pub ball_sum: T,
    #[serde(with = "crate::scalar::text")]
    pub mean: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CesaroReport<T> {
    pub rows: Vec<CesaroRow<T>>,
}

impl<T: Scalar> CesaroReport<T> {
    pub fn mean(&self, n: usize) -> Option<&T> {
        self.rows.get(n).map(|r| &r.mean)
    }

    /// Latest `C_n` with `n` even.
    pub fn even_tail(&self) -> Option<&T> {
        self.rows.iter().rev().find(|r| r.n % 2 == 0).map(|r| &r.mean)
    }

    /// Latest `C_n` with `n` odd.
    pub fn odd_tail(&self) -> Option<&T> {
        self.rows.iter().rev().find(|r| r.n % 2 == 1).map(|r| &r.mean)
    }

    /// `|C_n - C_{n-1}|` at the largest `n`.
    pub fn last_gap(&self) -> Option<T> {
        let k = self.rows.len();
        (k >= 2).then(|| (self.rows[k - 1].mean.clone() - self.rows[k - 2].mean.clone()).abs())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,ball_size,ball_sum,C_n\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.n, r.ball_size, r.ball_sum.to_text(), r.mean.to_text()).unwrap();
        }
        out
    }
}

/// `C_0(x), …, C_{n_max}(x)` from a single traversal of `V_{n_max}`.
///
/// Each subtree accumulates one sum per sphere and subtrees merge in
/// traversal order, so the result does not depend on the thread count, even
/// for floating scalars.
pub fn cesaro_scan<F: MapFamily>(system: &Mdtds<F>, x: &F::Scalar, n_max: usize) -> Result<CesaroReport<F::Scalar>> {
    let rank = system.rank();
    check_cap(n_max, rank, system.node_cap())?;
    // the fold follows the right action; reversal permutes every sphere, so
    // the left action has the same sums
    let zeros = || vec![F::Scalar::zero(); n_max + 1];
    let spheres = system.fold_orbit(
        x,
        n_max,
        &AtomicU64::new(0),
        zeros,
        |acc, path, v| acc[path.len()] = acc[path.len()].clone() + v.clone(),
        |acc, other| {
            for (a, b) in acc.iter_mut().zip(other) {
                *a = a.clone() + b;
            }
        },
    )?;
    let mut rows = Vec::with_capacity(n_max + 1);
    let mut total = F::Scalar::zero();
    for (n, sphere) in spheres.into_iter().enumerate() {
        total = total + sphere;
        let size = ball_size(n, rank);
        let size_u64 = u64::try_from(&size).map_err(|_| Error::invalid("ball size overflows u64"))?;
        let mean = total.clone() / F::Scalar::from_rational(&Rational::from_integer(size.into()));
        rows.push(CesaroRow {
            n,
            ball_size: size_u64,
            ball_sum: total.clone(),
            mean,
        });
    }
    Ok(CesaroReport { rows })
}

fn rank_of(q: u32) -> usize {
    assert!(q >= 4 && q.is_multiple_of(2), "q = 2|S| must be even and at least 4, got {q}");
    (q / 2) as usize
}

/// `Σ_{t∈V_n} (-1)^{|t|} = (-1)^n (q-1)^n`.
pub fn sign_ball_sum(n: usize, q: u32) -> BigInt {
    rank_of(q);
    let magnitude = BigInt::from(num_traits::pow(BigUint::from(q - 1), n));
    if n.is_multiple_of(2) {
        magnitude
    } else {
        -magnitude
    }
}

/// [`sign_ball_sum`] over `|V_n|`.
pub fn sign_cesaro(n: usize, q: u32) -> Rational {
    let size = ball_size(n, rank_of(q));
    Rational::new(sign_ball_sum(n, q), size.into())
}

/// The even-`n` limit `(q-2)/q` of [`sign_cesaro`]; the odd limit is its
/// negative.
pub fn sign_cesaro_limit(q: u32) -> Rational {
    rank_of(q);
    Rational::new(BigInt::from(q - 2), BigInt::from(q))
}

/// `Σ_{k=1}^n k x^k`.
pub fn geometric_k_sum<T: Scalar>(x: &T, n: u32) -> T {
    let n_t = T::from_int(n as i64);
    if x.is_one() {
        return n_t.clone() * (n_t + T::one()) / T::from_int(2);
    }
    let one_minus = T::one() - x.clone();
    let xn = x.powi(n as i64);
    x.clone() * (T::one() - xn.clone()) / (one_minus.clone() * one_minus.clone()) - n_t * xn * x.clone() / one_minus
}

/// Parameters of the asymptotic bound for families whose one-generator
/// averages behave like `α_j + a_j^n` forwards and `β_j + b_j^n` backwards.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams<T> {
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
    pub a: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Scalar> BoundParams<T> {
    pub fn rank(&self) -> usize {
        self.alpha.len()
    }

    /// `q = 2|S|`.
    pub fn q(&self) -> T {
        T::from_int(2 * self.rank() as i64)
    }

    /// `A = Σ (α_j + β_j)`.
    pub fn total(&self) -> T {
        self.alpha
            .iter()
            .zip(&self.beta)
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() + b.clone())
    }

    pub fn validate(&self) -> Result<()> {
        let rank = self.rank();
        if [self.beta.len(), self.a.len(), self.b.len()].iter().any(|&l| l != rank) {
            return Err(Error::invalid("alpha, beta, a and b need one entry per generator"));
        }
        if rank < 2 {
            return Err(Error::invalid("the bound needs at least two generators"));
        }
        let limit = self.q() - T::one();
        for (name, values) in [("a", &self.a), ("b", &self.b)] {
            for (j, v) in values.iter().enumerate() {
                if !(v.is_positive() && *v < limit) {
                    return Err(Error::invalid(format!(
                        "{name}_{} = {} must lie in (0, {})",
                        j + 1,
                        v.to_text(),
                        limit.to_text()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Lower and upper bounds on `lim C_n(x)`:
/// `(q-1)A/(q(q-2))` and that plus `(q-2) Σ (a_j/(q-a_j-1)² + b_j/(q-b_j-1)²)`.
pub fn cesaro_bounds<T: Scalar>(params: &BoundParams<T>) -> Result<(T, T)> {
    params.validate()?;
    let q = params.q();
    let one = T::one();
    let two = T::from_int(2);
    let lower = (q.clone() - one.clone()) * params.total() / (q.clone() * (q.clone() - two.clone()));
    let term = |c: &T| {
        let d = q.clone() - c.clone() - one.clone();
        c.clone() / (d.clone() * d)
    };
    let gap = params
        .a
        .iter()
        .zip(&params.b)
        .fold(T::zero(), |acc, (a, b)| acc + term(a) + term(b));
    let upper = lower.clone() + (q - two) * gap;
    Ok((lower, upper))
}
