use mdtds::bank::Bank;
use mdtds::circle::Circle;
use mdtds::error::MapFault;
use mdtds::family::{Family, Interval, MapFamily};
use mdtds::scalar::Scalar;
use mdtds::word::Gen;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelKind {
    /// x ↦ q_i x on (0, ∞); needs --q.
    Bank,
    /// x ↦ x + θ_i mod 1 on [0, 1); needs --theta.
    Circle,
    /// f1 = 3x/4 + 1/4, f2 = x² on [0, 1].
    Ex44,
    /// every generator maps x ↦ -x on [-1, 1].
    Sign,
    /// every generator is the identity on ℝ.
    Identity,
}

/// One of the built-in map families.
#[derive(Debug, Clone)]
pub enum Model<T> {
    Bank(Bank<T>),
    Circle(Circle<T>),
    Family(Family<T>),
}

impl<T: Scalar> MapFamily for Model<T> {
    type Scalar = T;

    fn rank(&self) -> usize {
        match self {
            Model::Bank(m) => m.rank(),
            Model::Circle(m) => m.rank(),
            Model::Family(m) => m.rank(),
        }
    }

    fn domain(&self) -> &Interval<T> {
        match self {
            Model::Bank(m) => m.domain(),
            Model::Circle(m) => m.domain(),
            Model::Family(m) => m.domain(),
        }
    }

    fn apply(&self, gen: Gen, x: &T, power: i64) -> Result<T, MapFault> {
        match self {
            Model::Bank(m) => m.apply(gen, x, power),
            Model::Circle(m) => m.apply(gen, x, power),
            Model::Family(m) => m.apply(gen, x, power),
        }
    }
}

pub fn parse_list<T: Scalar>(text: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|s| T::parse_text(s.trim()).map_err(|e| CliError::usage(e.to_string())))
        .collect()
}

/// Splits a trailing `:approx` marker off a parameter list.
pub fn strip_approx(text: &str) -> (&str, bool) {
    match text.strip_suffix(":approx") {
        Some(rest) => (rest, true),
        None => (text, false),
    }
}

pub fn build<T: Scalar>(kind: ModelKind, rank: Option<usize>, q: Option<&str>, theta: Option<&str>) -> Result<Model<T>, CliError> {
    let fixed_rank = |default: usize| -> Result<usize, CliError> {
        let r = rank.unwrap_or(default);
        if r == 0 {
            return Err(CliError::usage("--s must be at least 1"));
        }
        Ok(r)
    };
    let check_rank = |len: usize| -> Result<(), CliError> {
        match rank {
            Some(r) if r != len => Err(CliError::usage(format!("--s {r} does not match {len} model parameters"))),
            _ => Ok(()),
        }
    };
    let model = match kind {
        ModelKind::Bank => {
            let text = q.ok_or_else(|| CliError::usage("--model bank needs --q"))?;
            let rates = parse_list::<T>(strip_approx(text).0)?;
            check_rank(rates.len())?;
            Model::Bank(Bank::new(rates)?)
        }
        ModelKind::Circle => {
            let text = theta.ok_or_else(|| CliError::usage("--model circle needs --theta"))?;
            let angles = parse_list::<T>(strip_approx(text).0)?;
            check_rank(angles.len())?;
            Model::Circle(Circle::new(angles)?)
        }
        ModelKind::Ex44 => {
            check_rank(2)?;
            Model::Family(Family::quarter_square())
        }
        ModelKind::Sign => Model::Family(Family::sign(fixed_rank(2)?)),
        ModelKind::Identity => Model::Family(Family::identity(fixed_rank(2)?)),
    };
    Ok(model)
}
