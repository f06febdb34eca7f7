//! Spheres and balls of the Cayley tree around the identity.
//!
//! Traversal is a pre-order depth-first walk. Children of a node are visited
//! by generator index, `+` before `-`, skipping the letter that would step
//! back to the parent. Every emitted word is preceded by its parent.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::word::{Letter, Word};

/// Largest ball a traversal will agree to walk.
pub const DEFAULT_NODE_CAP: u64 = 100_000_000;

/// Vertex degree of the Cayley tree, `2|S|`.
pub fn degree(rank: usize) -> usize {
    2 * rank
}

/// `|W_n| = q (q-1)^(n-1)` for `n >= 1`.
pub fn sphere_size(n: usize, rank: usize) -> BigUint {
    if n == 0 {
        return BigUint::one();
    }
    if rank == 0 {
        return BigUint::from(0u32);
    }
    let q = degree(rank) as u64;
    BigUint::from(q) * num_traits::pow(BigUint::from(q - 1), n - 1)
}

/// `|V_n| = (q (q-1)^n - 2) / (q - 2)`, or `2n + 1` when `|S| = 1`.
pub fn ball_size(n: usize, rank: usize) -> BigUint {
    match rank {
        0 => BigUint::one(),
        1 => BigUint::from(2 * n as u64 + 1),
        _ => {
            let q = degree(rank) as u64;
            (BigUint::from(q) * num_traits::pow(BigUint::from(q - 1), n) - 2u32) / BigUint::from(q - 2)
        }
    }
}

/// Fails with [`Error::NodeCap`] when `V_n` is larger than `cap`.
pub fn check_cap(n: usize, rank: usize, cap: u64) -> Result<u64> {
    let size = ball_size(n, rank);
    match size.to_u64() {
        Some(s) if s <= cap => Ok(s),
        _ => Err(Error::NodeCap {
            radius: n,
            rank,
            size: size.to_string(),
            cap,
        }),
    }
}

/// One visited vertex of a ball walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallNode {
    pub word: Word,
    /// `None` only for the identity.
    pub parent: Option<Word>,
    pub appended: Option<Letter>,
}

struct Frame {
    word: Word,
    next: usize,
}

/// Streaming enumerator of `V_n`.
pub struct BallCursor {
    rank: usize,
    radius: usize,
    stack: Vec<Frame>,
    started: bool,
}

impl BallCursor {
    pub fn new(radius: usize, rank: usize, cap: u64) -> Result<Self> {
        if rank == 0 {
            return Err(Error::invalid("a free group needs at least one generator"));
        }
        check_cap(radius, rank, cap)?;
        Ok(BallCursor {
            rank,
            radius,
            stack: Vec::with_capacity(radius + 1),
            started: false,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }
}

impl Iterator for BallCursor {
    type Item = BallNode;

    fn next(&mut self) -> Option<BallNode> {
        if !self.started {
            self.started = true;
            self.stack.push(Frame {
                word: Word::identity(),
                next: 0,
            });
            return Some(BallNode {
                word: Word::identity(),
                parent: None,
                appended: None,
            });
        }
        loop {
            let top = self.stack.last_mut()?;
            if top.word.len() == self.radius || top.next == degree(self.rank) {
                self.stack.pop();
                continue;
            }
            let letter = Letter::from_code(top.next);
            top.next += 1;
            if top.word.nu() == Some(letter.inverse()) {
                continue;
            }
            let child = top.word.with_letter(letter);
            let parent = top.word.clone();
            self.stack.push(Frame {
                word: child.clone(),
                next: 0,
            });
            return Some(BallNode {
                word: child,
                parent: Some(parent),
                appended: Some(letter),
            });
        }
    }
}

/// Enumerates `V_n` with the default node cap.
pub fn ball_enumerate(n: usize, rank: usize) -> Result<BallCursor> {
    BallCursor::new(n, rank, DEFAULT_NODE_CAP)
}

/// Collects `V_n` into a vector, in traversal order.
pub fn ball_words(n: usize, rank: usize) -> Result<Vec<Word>> {
    Ok(ball_enumerate(n, rank)?.map(|node| node.word).collect())
}

/// `W_n` in traversal order.
pub fn sphere_words(n: usize, rank: usize) -> Result<Vec<Word>> {
    Ok(ball_enumerate(n, rank)?
        .map(|node| node.word)
        .filter(|w| w.len() == n)
        .collect())
}

/// `{base·s, base·s², …, base·s^len}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ray {
    pub base: Word,
    pub letter: Letter,
    pub len: usize,
}

impl Ray {
    pub fn words(&self) -> impl Iterator<Item = Word> + '_ {
        (1..=self.len as i64).map(move |k| {
            let mut w = self.base.clone();
            w.push_power(self.letter.gen, k * self.letter.sign.as_i64());
            w
        })
    }
}

/// `V_n` split into `{e}`, the axis rays `S_n(s)` and the side rays
/// `V_{n,t}(s)` hanging off every `t` with `|t| < n`.
#[derive(Debug, Clone)]
pub struct BallDecomposition {
    pub radius: usize,
    pub rank: usize,
    /// Axis rays first (base `e`), then side rays in traversal order of
    /// their bases.
    pub rays: Vec<Ray>,
}

impl BallDecomposition {
    /// `1 + Σ |ray|`.
    pub fn total_words(&self) -> usize {
        1 + self.rays.iter().map(|r| r.len).sum::<usize>()
    }

    pub fn axis_rays(&self) -> impl Iterator<Item = &Ray> {
        self.rays.iter().filter(|r| r.base.is_identity())
    }

    pub fn side_rays(&self) -> impl Iterator<Item = &Ray> {
        self.rays.iter().filter(|r| !r.base.is_identity())
    }

    pub fn words(&self) -> impl Iterator<Item = Word> + '_ {
        std::iter::once(Word::identity()).chain(self.rays.iter().flat_map(Ray::words))
    }
}

pub fn ball_decompose(n: usize, rank: usize) -> Result<BallDecomposition> {
    if n == 0 {
        return Err(Error::invalid("ball decomposition needs radius n >= 1"));
    }
    let mut rays: Vec<Ray> = Letter::all(rank)
        .map(|letter| Ray {
            base: Word::identity(),
            letter,
            len: n,
        })
        .collect();
    // bases with |t| = n would only contribute empty rays
    for node in ball_enumerate(n - 1, rank)? {
        let Some(last) = node.word.nu() else { continue };
        let len = n - node.word.len();
        rays.extend(
            Letter::all(rank)
                .filter(|s| s.gen != last.gen)
                .map(|letter| Ray {
                    base: node.word.clone(),
                    letter,
                    len,
                }),
        );
    }
    Ok(BallDecomposition { radius: n, rank, rays })
}

/// Walks the subtree below `path` (inclusive) down to depth `radius`,
/// deriving each child's state from its parent's with `step`.
pub(crate) fn walk<S, E>(
    rank: usize,
    path: &mut Vec<Letter>,
    state: &S,
    radius: usize,
    step: &(impl Fn(&S, Letter, &[Letter]) -> Result<S, E> + ?Sized),
    visit: &mut impl FnMut(&[Letter], &S) -> Result<(), E>,
) -> Result<(), E> {
    visit(path, state)?;
    if path.len() == radius {
        return Ok(());
    }
    let back = path.last().map(|l| l.inverse());
    for letter in Letter::all(rank) {
        if Some(letter) == back {
            continue;
        }
        path.push(letter);
        let child = step(state, letter, path);
        let result = child.and_then(|c| walk(rank, path, &c, radius, step, visit));
        path.pop();
        result?;
    }
    Ok(())
}

/// Depth at which a ball walk is cut into independent subtree tasks.
/// Depends only on the group and radius, never on the thread count.
pub(crate) fn split_depth(rank: usize, radius: usize) -> usize {
    let mut d = 0;
    while d < radius && d < 6 && sphere_size(d, rank) < BigUint::from(64u32) {
        d += 1;
    }
    d
}

/// Folds a per-node visitor over `V_radius` in parallel.
///
/// Nodes above the split depth are folded serially into the first
/// accumulator; each subtree rooted at the split depth gets its own
/// accumulator, and those are merged left to right in traversal order.
/// The combination tree is therefore fixed and the result does not depend
/// on the number of worker threads. `step` receives the parent state, the
/// appended letter and the child's full path.
pub(crate) fn fold_ball<S, A, E>(
    rank: usize,
    radius: usize,
    root: S,
    step: impl Fn(&S, Letter, &[Letter]) -> Result<S, E> + Sync,
    init: impl Fn() -> A + Sync,
    visit: impl Fn(&mut A, &[Letter], &S) -> Result<(), E> + Sync,
    merge: impl Fn(&mut A, A),
) -> Result<A, E>
where
    S: Clone + Send + Sync,
    A: Send,
    E: Send,
{
    let split = split_depth(rank, radius);
    let mut head = init();
    let mut frontier: Vec<(Vec<Letter>, S)> = Vec::new();
    walk(rank, &mut Vec::new(), &root, split, &step, &mut |path, state| {
        if path.len() < split {
            visit(&mut head, path, state)
        } else {
            frontier.push((path.to_vec(), state.clone()));
            Ok(())
        }
    })?;
    let parts: Vec<Result<A, E>> = frontier
        .into_par_iter()
        .map(|(mut path, state)| {
            let mut acc = init();
            walk(rank, &mut path, &state, radius, &step, &mut |p, s| visit(&mut acc, p, s))?;
            Ok(acc)
        })
        .collect();
    for part in parts {
        merge(&mut head, part?);
    }
    Ok(head)
}
