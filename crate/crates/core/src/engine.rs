//! Evaluation of `D_t(x)` and bounded verification of fixed, periodic and
//! asymptotic behaviour.
//!
//! Statements quantified over all of `G` or `H` are checked on balls only;
//! a passing check returns [`PeriodicityVerdict::VerifiedUpTo`] with the
//! depths used, never a bare `true`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{self, check_cap, BallCursor, DEFAULT_NODE_CAP};
use crate::error::{Error, Result};
use crate::family::MapFamily;
use crate::scalar::Scalar;
use crate::subgroup::SubgroupSpec;
use crate::word::{Letter, Word};

/// Order in which the letters of a word act.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// `D_t = f_{i_n}^{ε_n} ∘ … ∘ f_{i_1}^{ε_1}`: the leftmost letter acts
    /// first and `D_{t1 t2} = D_{t2} ∘ D_{t1}`.
    #[default]
    Right,
    /// `D_t = f_{i_1}^{ε_1} ∘ … ∘ f_{i_n}^{ε_n}`: the rightmost letter acts
    /// first and `D_{t1 t2} = D_{t1} ∘ D_{t2}`.
    Left,
}

/// Outcome of a bounded periodicity search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case", bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum PeriodicityVerdict<T> {
    VerifiedUpTo { depth_t: usize, depth_r: usize },
    /// `r ∈ H` and `D_{rt}(x) = lhs` differs from `D_t(x) = rhs`.
    Counterexample {
        t: Word,
        r: Word,
        #[serde(with = "crate::scalar::text")]
        lhs: T,
        #[serde(with = "crate::scalar::text")]
        rhs: T,
    },
}

impl<T> PeriodicityVerdict<T> {
    pub fn is_verified(&self) -> bool {
        matches!(self, PeriodicityVerdict::VerifiedUpTo { .. })
    }
}

/// Values of `D_t(x)` over `V_n`.
#[derive(Debug, Clone)]
pub struct OrbitBall<T> {
    pub radius: usize,
    pub base: T,
    /// Every word of the ball once, parents before children.
    pub values: Vec<(Word, T)>,
    /// Single-letter map applications performed.
    pub applications: u64,
    index: HashMap<Word, usize>,
}

impl<T> OrbitBall<T> {
    pub fn get(&self, t: &Word) -> Option<&T> {
        self.index.get(t).map(|&i| &self.values[i].1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// An infinite strictly increasing sequence of times, sampled finitely.
#[derive(Debug, Clone, PartialEq)]
pub enum RaySpec {
    /// `t_k = prefix · step^k`, `k = 1, 2, …`.
    Powers { prefix: Word, step: Word },
    /// `t_k` = the first `k` letters of the stream.
    Letters(Vec<Letter>),
}

impl RaySpec {
    pub fn powers(step: Word) -> Self {
        RaySpec::Powers {
            prefix: Word::identity(),
            step,
        }
    }

    /// The first `n` times, checked to be strictly increasing in the prefix
    /// order.
    pub fn times(&self, n: usize) -> Result<Vec<Word>> {
        let times: Vec<Word> = match self {
            RaySpec::Powers { prefix, step } => {
                if step.is_identity() {
                    return Err(Error::invalid("ray step must not be the identity"));
                }
                let mut t = prefix.clone();
                (0..n)
                    .map(|_| {
                        t = t.mul(step);
                        t.clone()
                    })
                    .collect()
            }
            RaySpec::Letters(letters) => {
                if letters.len() < n {
                    return Err(Error::invalid(format!("letter stream has {} letters, {n} requested", letters.len())));
                }
                let mut t = Word::identity();
                letters[..n]
                    .iter()
                    .map(|&l| {
                        t.push_letter(l);
                        t.clone()
                    })
                    .collect()
            }
        };
        for (k, pair) in times.windows(2).enumerate() {
            if !(pair[0].is_prefix_of(&pair[1]) && pair[0] != pair[1]) {
                return Err(Error::invalid(format!(
                    "ray is not strictly increasing: t_{} = {} is not below t_{} = {}",
                    k + 1,
                    pair[0],
                    k + 2,
                    pair[1]
                )));
            }
        }
        Ok(times)
    }
}

/// Cluster representatives of the tail of a sampled ray.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaSample<T> {
    pub samples: usize,
    /// Latest sample of every cluster visited at least twice in the tail.
    pub clusters: Vec<T>,
    /// No recurrent cluster and the tail moves monotonically.
    pub escaping: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsymptoticWitness {
    /// The ray runs through the powers of this element (`e` for `y = x`).
    pub step: Word,
    /// First power at which the orbit is within tolerance.
    pub power: usize,
}

/// Depth of the subgroup ball whose elements seed rays in
/// [`Mdtds::stable_set_check`] for non-cyclic subgroups.
pub const STABLE_RAY_DEPTH: usize = 3;

/// A multi-dimensional-time system: a map family acted on by the free
/// group.
#[derive(Debug, Clone)]
pub struct Mdtds<F: MapFamily> {
    family: F,
    action: Action,
    tolerance: F::Scalar,
    node_cap: u64,
}

impl<F: MapFamily> Mdtds<F> {
    pub fn new(family: F) -> Self {
        Mdtds {
            family,
            action: Action::default(),
            tolerance: F::Scalar::default_tolerance(),
            node_cap: DEFAULT_NODE_CAP,
        }
    }

    pub fn with_action(mut self, action: Action) -> Self {
        self.action = action;
        self
    }

    pub fn with_tolerance(mut self, tolerance: F::Scalar) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_node_cap(mut self, cap: u64) -> Self {
        self.node_cap = cap;
        self
    }

    pub fn family(&self) -> &F {
        &self.family
    }

    pub fn action(&self) -> Action {
        self.action
    }

    pub fn tolerance(&self) -> &F::Scalar {
        &self.tolerance
    }

    pub fn node_cap(&self) -> u64 {
        self.node_cap
    }

    pub fn rank(&self) -> usize {
        self.family.rank()
    }

    fn same(&self, a: &F::Scalar, b: &F::Scalar) -> bool {
        a.approx_eq(b, &self.tolerance)
    }

    fn check_point(&self, x: &F::Scalar, word: &Word) -> Result<()> {
        if self.family.domain().contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                word: word.clone(),
                value: x.to_text(),
                domain: self.family.domain().to_string(),
            })
        }
    }

    fn check_word(&self, t: &Word) -> Result<()> {
        if t.max_gen() as usize > self.rank() {
            return Err(Error::invalid(format!("{t} uses generators beyond s{}", self.rank())));
        }
        Ok(())
    }

    /// `D_t(x)`.
    pub fn evaluate(&self, t: &Word, x: &F::Scalar) -> Result<F::Scalar> {
        self.check_word(t)?;
        self.check_point(x, &Word::identity())?;
        let runs: Box<dyn Iterator<Item = _>> = match self.action {
            Action::Right => Box::new(t.runs().iter()),
            Action::Left => Box::new(t.runs().iter().rev()),
        };
        let mut v = x.clone();
        let mut acted = Word::identity();
        for run in runs {
            match self.action {
                Action::Right => acted.push_power(run.gen, run.exp),
                Action::Left => acted = Word::power(run.gen, run.exp).mul(&acted),
            }
            v = self
                .family
                .apply(run.gen, &v, run.exp)
                .map_err(|fault| Error::Map { word: acted.clone(), fault })?;
            self.check_point(&v, &acted)?;
        }
        Ok(v)
    }

    fn step(&self, v: &F::Scalar, letter: Letter, path: &[Letter]) -> Result<F::Scalar> {
        let word = || Word::from_letters(path.iter().copied());
        let next = self
            .family
            .apply(letter.gen, v, letter.sign.as_i64())
            .map_err(|fault| Error::Map { word: word(), fault })?;
        if !self.family.domain().contains(&next) {
            return Err(Error::Domain {
                word: word(),
                value: next.to_text(),
                domain: self.family.domain().to_string(),
            });
        }
        Ok(next)
    }

    /// Folds `visit` over `(path, D_path(x))` for every node of `V_n` using
    /// one map application per tree edge. Only meaningful for the right
    /// action, where a child's value is one map away from its parent's.
    pub(crate) fn fold_orbit<A: Send>(
        &self,
        x: &F::Scalar,
        n: usize,
        applications: &AtomicU64,
        init: impl Fn() -> A + Sync,
        visit: impl Fn(&mut A, &[Letter], &F::Scalar) + Sync,
        merge: impl Fn(&mut A, A),
    ) -> Result<A> {
        check_cap(n, self.rank(), self.node_cap)?;
        self.check_point(x, &Word::identity())?;
        ball::fold_ball(
            self.rank(),
            n,
            x.clone(),
            |v, letter, path| {
                applications.fetch_add(1, Ordering::Relaxed);
                self.step(v, letter, path)
            },
            init,
            |acc, path, v| {
                visit(acc, path, v);
                Ok(())
            },
            merge,
        )
    }

    /// `D_t(x)` for every `t ∈ V_n`.
    pub fn orbit_ball(&self, x: &F::Scalar, n: usize) -> Result<OrbitBall<F::Scalar>> {
        let applications = AtomicU64::new(0);
        let right = self.fold_orbit(
            x,
            n,
            &applications,
            Vec::new,
            |acc, path, v| acc.push((Word::from_letters(path.iter().copied()), v.clone())),
            |a, b| a.extend(b),
        )?;
        let values = match self.action {
            Action::Right => right,
            Action::Left => {
                // D^left_t = D^right_{reverse(t)}, and reversal permutes V_n
                let by_word: HashMap<Word, F::Scalar> = right.into_iter().collect();
                let mut values: Vec<(Word, F::Scalar)> = Vec::with_capacity(by_word.len());
                for node in BallCursor::new(n, self.rank(), self.node_cap)? {
                    let v = by_word[&node.word.reversed()].clone();
                    values.push((node.word, v));
                }
                values
            }
        };
        let index = values.iter().enumerate().map(|(i, (w, _))| (w.clone(), i)).collect();
        Ok(OrbitBall {
            radius: n,
            base: x.clone(),
            values,
            applications: applications.into_inner(),
            index,
        })
    }

    /// `max_i |f_i(x) - x|`.
    pub fn fixed_point_residual(&self, x: &F::Scalar) -> Result<F::Scalar> {
        self.check_point(x, &Word::identity())?;
        let mut worst = F::Scalar::zero();
        for letter in Letter::all(self.rank()).filter(|l| l.sign == crate::word::Sign::Pos) {
            let fx = self.evaluate(&Word::letter(letter), x)?;
            let d = (fx - x.clone()).abs();
            if d > worst {
                worst = d;
            }
        }
        Ok(worst)
    }

    /// A point of the whole system is fixed iff every generator fixes it.
    pub fn is_fixed(&self, x: &F::Scalar) -> Result<bool> {
        Ok(self.fixed_point_residual(x)? <= self.tolerance)
    }

    /// Checks `D_y(x) = x` for every `y ∈ H ∩ V_depth`.
    pub fn is_h_fixed(&self, spec: &SubgroupSpec, x: &F::Scalar, depth: usize) -> Result<PeriodicityVerdict<F::Scalar>> {
        if depth == 0 {
            return Err(Error::invalid("depth must be at least 1"));
        }
        spec.validate(self.rank())?;
        self.check_point(x, &Word::identity())?;
        let subgroup = spec.ball(depth, self.rank(), self.node_cap)?;
        let found = subgroup.par_iter().find_map_first(|y| match self.evaluate(y, x) {
            Ok(v) if self.same(&v, x) => None,
            Ok(v) => Some(Ok(PeriodicityVerdict::Counterexample {
                t: Word::identity(),
                r: y.clone(),
                lhs: v,
                rhs: x.clone(),
            })),
            Err(e) => Some(Err(e)),
        });
        found.unwrap_or(Ok(PeriodicityVerdict::VerifiedUpTo {
            depth_t: 0,
            depth_r: depth,
        }))
    }

    /// Checks `D_{rt}(x) = D_t(x)` for `t ∈ V_{depth_t}` and
    /// `r ∈ H ∩ V_{depth_r}`. The first failure in traversal order of
    /// `(t, r)` is reported.
    pub fn is_h_periodic(
        &self,
        spec: &SubgroupSpec,
        x: &F::Scalar,
        depth_t: usize,
        depth_r: usize,
    ) -> Result<PeriodicityVerdict<F::Scalar>> {
        if depth_t == 0 || depth_r == 0 {
            return Err(Error::invalid("depths must be at least 1"));
        }
        spec.validate(self.rank())?;
        self.check_point(x, &Word::identity())?;
        let times = ball::BallCursor::new(depth_t, self.rank(), self.node_cap)?
            .map(|node| node.word)
            .collect::<Vec<_>>();
        let subgroup = spec.ball(depth_r, self.rank(), self.node_cap)?;
        let found = times.par_iter().find_map_first(|t| {
            let rhs = match self.evaluate(t, x) {
                Ok(v) => v,
                Err(e) => return Some(Err(e)),
            };
            subgroup.iter().find_map(|r| match self.evaluate(&r.mul(t), x) {
                Ok(lhs) if self.same(&lhs, &rhs) => None,
                Ok(lhs) => Some(Ok(PeriodicityVerdict::Counterexample {
                    t: t.clone(),
                    r: r.clone(),
                    lhs,
                    rhs: rhs.clone(),
                })),
                Err(e) => Some(Err(e)),
            })
        });
        found.unwrap_or(Ok(PeriodicityVerdict::VerifiedUpTo { depth_t, depth_r }))
    }

    /// `D_{t_k}(x)` along a ray, `k = 1..=n`.
    pub fn ray_values(&self, x: &F::Scalar, ray: &RaySpec, n: usize) -> Result<Vec<F::Scalar>> {
        let times = ray.times(n)?;
        match (self.action, ray) {
            (Action::Right, RaySpec::Powers { prefix, step }) => {
                // D_{t u} = D_u ∘ D_t, so each sample is one step from the last
                let mut v = self.evaluate(prefix, x)?;
                times
                    .iter()
                    .map(|t| {
                        v = self.evaluate(step, &v).map_err(|e| relabel(e, t))?;
                        Ok(v.clone())
                    })
                    .collect()
            }
            _ => times.iter().map(|t| self.evaluate(t, x)).collect(),
        }
    }

    /// Approximates part of the ω-limit set of `x` by clustering the second
    /// half of `n` samples along `ray` at radius `cluster_eps`.
    pub fn omega_sample(
        &self,
        x: &F::Scalar,
        ray: &RaySpec,
        n: usize,
        cluster_eps: &F::Scalar,
    ) -> Result<OmegaSample<F::Scalar>> {
        if n == 0 {
            return Err(Error::invalid("need at least one sample"));
        }
        let values = self.ray_values(x, ray, n)?;
        let tail = &values[n / 2..];
        let mut order: Vec<usize> = (0..tail.len()).collect();
        order.sort_by(|&a, &b| tail[a].partial_cmp(&tail[b]).unwrap_or(std::cmp::Ordering::Equal));
        let mut clusters = Vec::new();
        let mut group: Vec<usize> = Vec::new();
        let mut flush = |group: &mut Vec<usize>| {
            if group.len() >= 2 {
                let latest = *group.iter().max().unwrap();
                clusters.push(tail[latest].clone());
            }
            group.clear();
        };
        for &i in &order {
            if let Some(&prev) = group.last() {
                if (tail[i].clone() - tail[prev].clone()).abs() > *cluster_eps {
                    flush(&mut group);
                }
            }
            group.push(i);
        }
        flush(&mut group);
        let increasing = tail.windows(2).all(|p| p[1] > p[0]);
        let decreasing = tail.windows(2).all(|p| p[1] < p[0]);
        Ok(OmegaSample {
            samples: n,
            escaping: clusters.is_empty() && tail.len() >= 2 && (increasing || decreasing),
            clusters,
        })
    }

    /// Looks for a ray inside `H` along which `D_{t_k}(y)` comes within
    /// `eps` of `x_periodic` by power `n`. Cyclic subgroups try `u^k` and
    /// `u^-k`; other subgroups try the powers of every nontrivial element of
    /// `H ∩ V_STABLE_RAY_DEPTH`. Rays that are not strictly increasing or
    /// leave the domain are skipped. `None` means nothing was found within
    /// the bound, not that `y` is outside the stable set.
    pub fn stable_set_check(
        &self,
        spec: &SubgroupSpec,
        x_periodic: &F::Scalar,
        y: &F::Scalar,
        n: usize,
        eps: &F::Scalar,
    ) -> Result<Option<AsymptoticWitness>> {
        spec.validate(self.rank())?;
        let close = |v: &F::Scalar| (v.clone() - x_periodic.clone()).abs() <= *eps;
        if close(y) {
            return Ok(Some(AsymptoticWitness {
                step: Word::identity(),
                power: 0,
            }));
        }
        let steps: Vec<Word> = match spec {
            SubgroupSpec::Cyclic(u) => vec![u.clone(), u.inv()],
            _ => spec
                .ball(STABLE_RAY_DEPTH, self.rank(), self.node_cap)?
                .into_iter()
                .filter(|w| !w.is_identity())
                .collect(),
        };
        for step in steps {
            let ray = RaySpec::powers(step.clone());
            let Ok(values) = self.ray_values(y, &ray, n) else {
                continue;
            };
            if let Some(k) = values.iter().position(close) {
                return Ok(Some(AsymptoticWitness { step, power: k + 1 }));
            }
        }
        Ok(None)
    }
}

fn relabel(e: Error, t: &Word) -> Error {
    match e {
        Error::Map { fault, .. } => Error::Map { word: t.clone(), fault },
        Error::Domain { value, domain, .. } => Error::Domain {
            word: t.clone(),
            value,
            domain,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{ElementaryMap, Family, Interval};
    use crate::scalar::{ratio, Rational};
    use crate::word::Gen;

    fn w(text: &str) -> Word {
        Word::parse(text, 2).unwrap()
    }

    fn quarter_square() -> Mdtds<Family<Rational>> {
        Mdtds::new(Family::quarter_square())
    }

    fn bank23() -> Mdtds<Family<Rational>> {
        Mdtds::new(Family::new(
            vec![
                ElementaryMap::Affine { a: ratio(2, 1), b: ratio(0, 1) },
                ElementaryMap::Affine { a: ratio(3, 1), b: ratio(0, 1) },
            ],
            Interval::open_above(ratio(0, 1)),
        ))
    }

    #[test]
    fn evaluate_examples() {
        let sys = quarter_square();
        let x = ratio(1, 3);
        assert_eq!(sys.evaluate(&Word::identity(), &x).unwrap(), x);
        assert_eq!(sys.evaluate(&w("s1^2"), &x).unwrap(), ratio(5, 8));
        assert_eq!(sys.evaluate(&w("s1 s2 s1^2"), &x).unwrap(), ratio(37, 64));
    }

    #[test]
    fn left_action_reverses_the_order() {
        let sys = quarter_square().with_action(Action::Left);
        // f1(f2(1/3)) = 1/3
        assert_eq!(sys.evaluate(&w("s1 s2"), &ratio(1, 3)).unwrap(), ratio(1, 3));
        // f1(f2(f1(f1(1/3)))) = f1(25/64)
        assert_eq!(sys.evaluate(&w("s1 s2 s1^2"), &ratio(1, 3)).unwrap(), ratio(139, 256));
        let right = quarter_square();
        assert_eq!(right.evaluate(&w("s1 s2"), &ratio(1, 3)).unwrap(), ratio(1, 4));
    }

    #[test]
    fn domain_and_map_errors_name_the_word() {
        let sys = quarter_square();
        match sys.evaluate(&w("s1^-3"), &ratio(0, 1)) {
            Err(Error::Domain { word, .. }) => assert_eq!(word, w("s1^-3")),
            other => panic!("{other:?}"),
        }
        match sys.evaluate(&w("s1 s2^-1"), &ratio(1, 3)) {
            Err(Error::Map { word, fault }) => {
                assert_eq!(word, w("s1 s2^-1"));
                assert_eq!(fault.gen, Gen::new(2));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(sys.evaluate(&Word::identity(), &ratio(2, 1)), Err(Error::Domain { .. })));
        assert!(sys.evaluate(&Word::parse("s3", 3).unwrap(), &ratio(1, 2)).is_err());
    }

    #[test]
    fn orbit_ball_examples() {
        let sys = bank23();
        let x = ratio(1, 1);
        let zero = sys.orbit_ball(&x, 0).unwrap();
        assert_eq!(zero.values, vec![(Word::identity(), x.clone())]);
        let one = sys.orbit_ball(&x, 1).unwrap();
        assert_eq!(one.len(), 5);
        for (t, v) in [("e", ratio(1, 1)), ("s1", ratio(2, 1)), ("s1^-1", ratio(1, 2)), ("s2", ratio(3, 1)), ("s2^-1", ratio(1, 3))] {
            assert_eq!(one.get(&w(t)), Some(&v), "{t}");
        }
    }

    #[test]
    fn orbit_ball_agrees_with_evaluate_and_counts_edges() {
        for action in [Action::Right, Action::Left] {
            let sys = bank23().with_action(action);
            let x = ratio(5, 7);
            let orbit = sys.orbit_ball(&x, 5).unwrap();
            assert_eq!(orbit.len(), 485);
            assert_eq!(orbit.applications, 484);
            for (t, v) in &orbit.values {
                assert_eq!(&sys.evaluate(t, &x).unwrap(), v);
            }
        }
        let sys = Mdtds::new(Family::<Rational>::quarter_square());
        let orbit = sys.orbit_ball(&ratio(1, 2), 3);
        // x² has no rational inverse at 1/2
        assert!(matches!(orbit, Err(Error::Map { .. })));
    }

    #[test]
    fn orbit_ball_respects_node_cap() {
        let sys = bank23().with_node_cap(100);
        assert!(matches!(sys.orbit_ball(&ratio(1, 1), 4), Err(Error::NodeCap { .. })));
    }

    #[test]
    fn fixed_point_examples() {
        let sys = quarter_square();
        assert_eq!(sys.fixed_point_residual(&ratio(1, 1)).unwrap(), ratio(0, 1));
        assert!(sys.is_fixed(&ratio(1, 1)).unwrap());
        assert_eq!(sys.fixed_point_residual(&ratio(1, 3)).unwrap(), ratio(2, 9));
        assert!(!sys.is_fixed(&ratio(1, 3)).unwrap());
        let circle = Mdtds::new(Family::new(
            vec![ElementaryMap::Rotation { theta: ratio(1, 1) }, ElementaryMap::Rotation { theta: ratio(3, 1) }],
            Interval::half_open(ratio(0, 1), ratio(1, 1)),
        ));
        assert!(circle.is_fixed(&ratio(2, 5)).unwrap());
    }

    #[test]
    fn h_fixed_examples_left_action() {
        let sys = quarter_square().with_action(Action::Left);
        let h = SubgroupSpec::cyclic(w("s1 s2")).unwrap();
        assert!(sys.is_h_fixed(&h, &ratio(1, 3), 6).unwrap().is_verified());
        assert!(sys.is_h_fixed(&h, &ratio(1, 1), 6).unwrap().is_verified());
        match sys.is_h_fixed(&h, &ratio(1, 2), 4).unwrap() {
            PeriodicityVerdict::Counterexample { r, lhs, .. } => {
                assert_eq!(r, w("s1 s2"));
                assert_eq!(lhs, ratio(7, 16));
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn h_fixed_examples_right_action() {
        // under the right action D_{s1 s2} = f2 ∘ f1, fixed at 1/9 and 1
        let sys = quarter_square();
        let h = SubgroupSpec::cyclic(w("s1 s2")).unwrap();
        assert!(sys.is_h_fixed(&h, &ratio(1, 9), 6).unwrap().is_verified());
        assert!(!sys.is_h_fixed(&h, &ratio(1, 3), 6).unwrap().is_verified());
        match sys.is_h_fixed(&h, &ratio(1, 2), 4).unwrap() {
            PeriodicityVerdict::Counterexample { r, lhs, .. } => {
                assert_eq!(r, w("s1 s2"));
                assert_eq!(lhs, ratio(25, 64));
            }
            v => panic!("{v:?}"),
        }
        assert!(sys.is_h_fixed(&SubgroupSpec::Full, &ratio(1, 1), 3).unwrap().is_verified());
    }

    #[test]
    fn h_periodic_examples() {
        let h = SubgroupSpec::cyclic(w("s1 s2")).unwrap();
        for action in [Action::Right, Action::Left] {
            let sys = quarter_square().with_action(action);
            assert!(sys.is_h_periodic(&h, &ratio(1, 1), 4, 4).unwrap().is_verified());
            assert!(!sys.is_h_periodic(&h, &ratio(1, 3), 2, 2).unwrap().is_verified());
        }
        // the pair (t, r) = (s1², s1 s2) separates D_{rt}(1/3) from D_t(1/3)
        let right = quarter_square();
        let t = w("s1^2");
        let r = w("s1 s2");
        assert_eq!(right.evaluate(&t, &ratio(1, 3)).unwrap(), ratio(5, 8));
        assert_eq!(right.evaluate(&r.mul(&t), &ratio(1, 3)).unwrap(), ratio(37, 64));
        // left action: the first failure is already at t = s1
        let left = quarter_square().with_action(Action::Left);
        match left.is_h_periodic(&h, &ratio(1, 3), 2, 2).unwrap() {
            PeriodicityVerdict::Counterexample { t, r, lhs, rhs } => {
                assert_eq!((t, r), (w("s1"), w("s1 s2")));
                assert_eq!((lhs, rhs), (ratio(7, 16), ratio(1, 2)));
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn periodic_implies_fixed() {
        let h = SubgroupSpec::cyclic(w("s1 s2")).unwrap();
        for action in [Action::Right, Action::Left] {
            let sys = quarter_square().with_action(action);
            for x in [ratio(1, 1), ratio(1, 9), ratio(1, 3), ratio(1, 2), ratio(0, 1)] {
                let Ok(p) = sys.is_h_periodic(&h, &x, 3, 3) else { continue };
                if p.is_verified() {
                    assert!(sys.is_h_fixed(&h, &x, 3).unwrap().is_verified());
                }
            }
        }
    }

    #[test]
    fn verdict_json_round_trip() {
        let v: PeriodicityVerdict<Rational> = PeriodicityVerdict::Counterexample {
            t: w("s1^2"),
            r: w("s1 s2"),
            lhs: ratio(37, 64),
            rhs: ratio(5, 8),
        };
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"37/64\""), "{json}");
        assert_eq!(serde_json::from_str::<PeriodicityVerdict<Rational>>(&json).unwrap(), v);
        let ok: PeriodicityVerdict<f64> = PeriodicityVerdict::VerifiedUpTo { depth_t: 4, depth_r: 3 };
        let json = serde_json::to_string(&ok).unwrap();
        assert_eq!(serde_json::from_str::<PeriodicityVerdict<f64>>(&json).unwrap(), ok);
    }

    #[test]
    fn ray_validation() {
        assert!(RaySpec::powers(w("s1 s2 s1^-1")).times(3).is_err());
        assert_eq!(RaySpec::powers(w("s1 s2")).times(3).unwrap().len(), 3);
        let back = RaySpec::Powers { prefix: w("s1^2"), step: w("s1^-1") };
        assert!(back.times(2).is_err());
        assert!(RaySpec::Letters(vec![Letter::pos(1), Letter::neg(1)]).times(2).is_err());
        assert!(RaySpec::Letters(vec![Letter::pos(1)]).times(2).is_err());
        assert!(RaySpec::powers(Word::identity()).times(2).is_err());
    }

    #[test]
    fn omega_sample_bank_escapes() {
        let sys = bank23();
        let s = sys.omega_sample(&ratio(1, 1), &RaySpec::powers(w("s1")), 40, &ratio(1, 100)).unwrap();
        assert!(s.clusters.is_empty());
        assert!(s.escaping);
    }

    #[test]
    fn omega_sample_half_rotation_alternates() {
        let sys = Mdtds::new(Family::new(
            vec![ElementaryMap::Rotation { theta: ratio(1, 2) }],
            Interval::half_open(ratio(0, 1), ratio(1, 1)),
        ));
        let s = sys.omega_sample(&ratio(0, 1), &RaySpec::powers(Word::parse("s1", 1).unwrap()), 20, &ratio(1, 100)).unwrap();
        let mut c = s.clusters.clone();
        c.sort();
        assert_eq!(c, vec![ratio(0, 1), ratio(1, 2)]);
        assert!(!s.escaping);
    }

    #[test]
    fn omega_sample_follows_a_shifted_one_dimensional_limit() {
        // ω_{s1}(y) = {1} for y = D_{t'}(x); along t' s1^k the samples cluster at 1
        let sys = Mdtds::new(Family::<f64>::quarter_square());
        let ray = RaySpec::Powers { prefix: w("s2 s1 s2"), step: w("s1") };
        let s = sys.omega_sample(&0.3, &ray, 200, &1e-6).unwrap();
        assert_eq!(s.clusters.len(), 1);
        assert!((s.clusters[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn stable_set_examples() {
        let h = SubgroupSpec::cyclic(w("s1 s2")).unwrap();
        let sys = Mdtds::new(Family::<f64>::quarter_square());
        assert_eq!(
            sys.stable_set_check(&h, &1.0, &1.0, 10, &1e-6).unwrap(),
            Some(AsymptoticWitness { step: Word::identity(), power: 0 })
        );
        // 1 repels under D_{s1 s2} but attracts under its inverse
        let found = sys.stable_set_check(&h, &1.0, &0.9, 200, &1e-6).unwrap().unwrap();
        assert_eq!(found.step, w("s2^-1 s1^-1"));
        let rotation = Mdtds::new(Family::new(
            vec![ElementaryMap::Rotation { theta: ratio(1, 3) }, ElementaryMap::Rotation { theta: ratio(1, 2) }],
            Interval::half_open(ratio(0, 1), ratio(1, 1)),
        ));
        let bal = SubgroupSpec::BalancedAll;
        assert_eq!(rotation.stable_set_check(&bal, &ratio(0, 1), &ratio(1, 7), 50, &ratio(1, 100)).unwrap(), None);
    }
}
