//! Subgroup families of the free group with exact membership tests.
//!
//! Each family is described symbolically and decided syntactically on the
//! reduced word; there is no general finitely generated subgroup
//! membership here.
//!
//! Text syntax: `full`, `cyclic:<word>`, `bal:<i,j,...>` (empty list means
//! every generator), `even:<i,j,...>`, `ker:<i,j,...>` and
//! `and(<spec>;<spec>;...)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ball::BallCursor;
use crate::error::{Error, Result};
use crate::word::{Gen, Word};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SubgroupSpec {
    /// `G` itself.
    Full,
    /// `H_u = {uⁿ : n ∈ ℤ}`, `u ≠ e`.
    Cyclic(Word),
    /// Words whose exponent sum in generator `i` is zero.
    BalancedOne(Gen),
    /// Balanced in every generator of the set.
    BalancedSet(BTreeSet<Gen>),
    /// Balanced in every generator.
    BalancedAll,
    /// Total occurrences of the generators in `A`, either sign, is even.
    EvenCount(BTreeSet<Gen>),
    Intersection(Vec<SubgroupSpec>),
    /// Kernel of the retraction onto the free factor generated by `M`,
    /// which deletes every generator outside `M`.
    Kernel(BTreeSet<Gen>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Index {
    Finite(u64),
    Infinite,
    Unknown,
}

/// Whether `H ∩ S` is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorsInS {
    Empty,
    Nonempty { witness: Gen },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupMeta {
    pub index: Index,
    pub generators_in_s: GeneratorsInS,
}

fn gen_set(indices: &[u32]) -> BTreeSet<Gen> {
    indices.iter().map(|&i| Gen::new(i)).collect()
}

impl SubgroupSpec {
    pub fn cyclic(u: Word) -> Result<Self> {
        if u.is_identity() {
            return Err(spec_error(&u.to_string(), "cyclic generator must not be the identity"));
        }
        Ok(SubgroupSpec::Cyclic(u))
    }

    /// `bal:` with the given indices; an empty list means all generators.
    pub fn balanced(indices: &[u32]) -> Self {
        match indices {
            [] => SubgroupSpec::BalancedAll,
            [i] => SubgroupSpec::BalancedOne(Gen::new(*i)),
            _ => SubgroupSpec::BalancedSet(gen_set(indices)),
        }
    }

    pub fn even(indices: &[u32]) -> Result<Self> {
        if indices.is_empty() {
            return Err(spec_error("even:", "the generator set must be nonempty"));
        }
        Ok(SubgroupSpec::EvenCount(gen_set(indices)))
    }

    pub fn kernel(indices: &[u32]) -> Result<Self> {
        let set = gen_set(indices);
        if set.len() < 2 {
            return Err(spec_error("ker:", "the kept generator set needs at least two elements"));
        }
        Ok(SubgroupSpec::Kernel(set))
    }

    pub fn intersection(parts: Vec<SubgroupSpec>) -> Result<Self> {
        if parts.is_empty() {
            return Err(spec_error("and()", "an intersection needs at least one part"));
        }
        Ok(SubgroupSpec::Intersection(parts))
    }

    /// Parses the text syntax and checks indices against `rank`.
    pub fn parse(text: &str, rank: usize) -> Result<Self> {
        let spec = parse_spec(text.trim(), rank)?;
        spec.validate(rank)?;
        Ok(spec)
    }

    /// Checks the structural invariants and that every generator index is
    /// at most `rank`.
    pub fn validate(&self, rank: usize) -> Result<()> {
        let check = |set: &BTreeSet<Gen>| -> Result<()> {
            match set.iter().find(|g| g.index() as usize > rank) {
                Some(g) => Err(spec_error(&self.to_string(), &format!("{g} is out of range for {rank} generators"))),
                None => Ok(()),
            }
        };
        match self {
            SubgroupSpec::Full | SubgroupSpec::BalancedAll => Ok(()),
            SubgroupSpec::Cyclic(u) => {
                if u.is_identity() {
                    return Err(spec_error("cyclic:e", "cyclic generator must not be the identity"));
                }
                if u.max_gen() as usize > rank {
                    return Err(spec_error(&self.to_string(), "generator out of range"));
                }
                Ok(())
            }
            SubgroupSpec::BalancedOne(g) => check(&BTreeSet::from([*g])),
            SubgroupSpec::BalancedSet(set) => check(set),
            SubgroupSpec::EvenCount(set) => {
                if set.is_empty() {
                    return Err(spec_error("even:", "the generator set must be nonempty"));
                }
                check(set)
            }
            SubgroupSpec::Kernel(set) => {
                if set.len() < 2 {
                    return Err(spec_error(&self.to_string(), "the kept generator set needs at least two elements"));
                }
                check(set)
            }
            SubgroupSpec::Intersection(parts) => {
                if parts.is_empty() {
                    return Err(spec_error("and()", "an intersection needs at least one part"));
                }
                parts.iter().try_for_each(|p| p.validate(rank))
            }
        }
    }

    pub fn member(&self, t: &Word) -> bool {
        match self {
            SubgroupSpec::Full => true,
            SubgroupSpec::Cyclic(u) => cyclic_exponent(u, t).is_some(),
            SubgroupSpec::BalancedOne(g) => t.exponent_sum(*g) == 0,
            SubgroupSpec::BalancedSet(set) => set.iter().all(|g| t.exponent_sum(*g) == 0),
            SubgroupSpec::BalancedAll => t.runs().iter().all(|r| t.exponent_sum(r.gen) == 0),
            SubgroupSpec::EvenCount(set) => set.iter().map(|g| t.occurrences(*g)).sum::<u64>() % 2 == 0,
            SubgroupSpec::Intersection(parts) => parts.iter().all(|p| p.member(t)),
            SubgroupSpec::Kernel(keep) => {
                Word::from_runs(t.runs().iter().filter(|r| keep.contains(&r.gen)).map(|r| (r.gen, r.exp)))
                    .is_identity()
            }
        }
    }

    /// Whether every element has zero exponent sum in every generator,
    /// decided from the description alone.
    pub fn is_within_balanced(&self, rank: usize) -> bool {
        match self {
            SubgroupSpec::BalancedAll => true,
            SubgroupSpec::BalancedOne(_) => rank == 1,
            SubgroupSpec::BalancedSet(set) => set.len() == rank,
            SubgroupSpec::Cyclic(u) => SubgroupSpec::BalancedAll.member(u),
            SubgroupSpec::Intersection(parts) => parts.iter().any(|p| p.is_within_balanced(rank)),
            SubgroupSpec::Full | SubgroupSpec::EvenCount(_) | SubgroupSpec::Kernel(_) => false,
        }
    }

    pub fn meta(&self, rank: usize) -> SubgroupMeta {
        let generators_in_s = Gen::all(rank)
            .find(|g| self.member(&Word::generator(*g)))
            .map_or(GeneratorsInS::Empty, |witness| GeneratorsInS::Nonempty { witness });
        SubgroupMeta {
            index: self.index(rank),
            generators_in_s,
        }
    }

    fn index(&self, rank: usize) -> Index {
        match self {
            SubgroupSpec::Full => Index::Finite(1),
            SubgroupSpec::Cyclic(u) if rank == 1 => Index::Finite(u.len() as u64),
            SubgroupSpec::EvenCount(_) => Index::Finite(2),
            SubgroupSpec::Cyclic(_)
            | SubgroupSpec::BalancedOne(_)
            | SubgroupSpec::BalancedSet(_)
            | SubgroupSpec::BalancedAll
            | SubgroupSpec::Kernel(_) => Index::Infinite,
            SubgroupSpec::Intersection(parts) => intersection_index(parts, rank),
        }
    }

    /// `H ∩ V_n` in traversal order.
    pub fn ball(&self, n: usize, rank: usize, cap: u64) -> Result<Vec<Word>> {
        Ok(BallCursor::new(n, rank, cap)?
            .map(|node| node.word)
            .filter(|w| self.member(w))
            .collect())
    }
}

/// `n` with `t = uⁿ`, if any.
pub fn cyclic_exponent(u: &Word, t: &Word) -> Option<i64> {
    if t.is_identity() {
        return Some(0);
    }
    if u.is_identity() {
        return None;
    }
    // |uⁿ| grows strictly with n, so |n| <= |t| bounds the search
    let inv = u.inv();
    let mut pos = Word::identity();
    let mut neg = Word::identity();
    for n in 1..=t.len() as i64 {
        pos = pos.mul(u);
        neg = neg.mul(&inv);
        if pos == *t {
            return Some(n);
        }
        if neg == *t {
            return Some(-n);
        }
        if pos.len() > t.len() {
            return None;
        }
    }
    None
}

/// Intersections of index-2 parity subgroups are kernels of a map onto
/// `(ℤ/2)^r`, where `r` is the GF(2) rank of the parity vectors.
fn intersection_index(parts: &[SubgroupSpec], rank: usize) -> Index {
    let mut flat = Vec::new();
    flatten(parts, &mut flat);
    let mut vectors: Vec<u64> = Vec::new();
    let mut unknown = false;
    for part in flat {
        match part {
            SubgroupSpec::Full => {}
            SubgroupSpec::EvenCount(set) if rank <= 64 => {
                vectors.push(set.iter().fold(0u64, |acc, g| acc | 1 << g.slot()));
            }
            other => match other.index(rank) {
                Index::Infinite => return Index::Infinite,
                _ => unknown = true,
            },
        }
    }
    if unknown {
        return Index::Unknown;
    }
    Index::Finite(1u64 << gf2_rank(vectors))
}

fn flatten<'a>(parts: &'a [SubgroupSpec], out: &mut Vec<&'a SubgroupSpec>) {
    for p in parts {
        match p {
            SubgroupSpec::Intersection(inner) => flatten(inner, out),
            other => out.push(other),
        }
    }
}

fn gf2_rank(mut rows: Vec<u64>) -> u32 {
    let mut rank = 0;
    for bit in 0..64 {
        let mask = 1u64 << bit;
        let Some(pivot) = rows.iter().position(|r| r & mask != 0) else {
            continue;
        };
        let p = rows.swap_remove(pivot);
        for r in rows.iter_mut() {
            if *r & mask != 0 {
                *r ^= p;
            }
        }
        rank += 1;
    }
    rank
}

fn spec_error(text: &str, reason: &str) -> Error {
    Error::Spec {
        text: text.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_indices(list: &str, whole: &str) -> Result<Vec<u32>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.trim_start_matches('s')
                .parse::<u32>()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| spec_error(whole, &format!("bad generator index {s:?}")))
        })
        .collect()
}

fn split_top_level(body: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in body.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ';' if depth == 0 => {
                parts.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&body[start..]);
    parts
}

fn parse_spec(text: &str, rank: usize) -> Result<SubgroupSpec> {
    if text == "full" {
        return Ok(SubgroupSpec::Full);
    }
    if let Some(body) = text.strip_prefix("and(").and_then(|b| b.strip_suffix(')')) {
        let parts = split_top_level(body)
            .into_iter()
            .map(|p| parse_spec(p.trim(), rank))
            .collect::<Result<Vec<_>>>()?;
        return SubgroupSpec::intersection(parts);
    }
    let Some((kind, rest)) = text.split_once(':') else {
        return Err(spec_error(text, "expected full, cyclic:, bal:, even:, ker: or and(...)"));
    };
    match kind.trim() {
        "cyclic" => SubgroupSpec::cyclic(Word::parse(rest, rank)?),
        "bal" => Ok(SubgroupSpec::balanced(&parse_indices(rest, text)?)),
        "even" => SubgroupSpec::even(&parse_indices(rest, text)?),
        "ker" => SubgroupSpec::kernel(&parse_indices(rest, text)?),
        _ => Err(spec_error(text, "unknown subgroup family")),
    }
}

fn write_set(f: &mut fmt::Formatter<'_>, set: &BTreeSet<Gen>) -> fmt::Result {
    let list: Vec<String> = set.iter().map(|g| g.index().to_string()).collect();
    f.write_str(&list.join(","))
}

impl fmt::Display for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupSpec::Full => f.write_str("full"),
            SubgroupSpec::Cyclic(u) => write!(f, "cyclic:{}", u.to_string().replace(' ', "*")),
            SubgroupSpec::BalancedOne(g) => write!(f, "bal:{}", g.index()),
            SubgroupSpec::BalancedSet(set) => {
                f.write_str("bal:")?;
                write_set(f, set)
            }
            SubgroupSpec::BalancedAll => f.write_str("bal:"),
            SubgroupSpec::EvenCount(set) => {
                f.write_str("even:")?;
                write_set(f, set)
            }
            SubgroupSpec::Kernel(set) => {
                f.write_str("ker:")?;
                write_set(f, set)
            }
            SubgroupSpec::Intersection(parts) => {
                let inner: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "and({})", inner.join(";"))
            }
        }
    }
}

impl Serialize for SubgroupSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::{ball_words, DEFAULT_NODE_CAP};
    use std::collections::HashSet;

    fn w(text: &str, rank: usize) -> Word {
        Word::parse(text, rank).unwrap()
    }

    fn spec(text: &str, rank: usize) -> SubgroupSpec {
        SubgroupSpec::parse(text, rank).unwrap()
    }

    /// f_M evaluated letter by letter as a homomorphism into the free
    /// factor on M: each letter maps to itself or to e, and the images are
    /// multiplied in order.
    fn retraction(keep: &[u32], t: &Word) -> Word {
        t.letters().fold(Word::identity(), |acc, l| {
            if keep.contains(&l.gen.index()) {
                acc.mul(&Word::letter(l))
            } else {
                acc
            }
        })
    }

    fn all_specs(rank: usize) -> Vec<SubgroupSpec> {
        let mut specs = vec![
            spec("full", rank),
            spec("cyclic:s1*s2", rank),
            spec("cyclic:s1^2", rank),
            spec("cyclic:s1*s2*s1^-1*s2^-1", rank),
            spec("bal:", rank),
            spec("bal:1", rank),
            spec("bal:1,2", rank),
            spec("even:1", rank),
            spec("even:1,2", rank),
            spec("ker:1,2", rank),
            spec("and(even:1;even:2)", rank),
            spec("and(bal:1;even:2)", rank),
        ];
        if rank == 3 {
            specs.push(spec("even:2,3", rank));
            specs.push(spec("ker:1,3", rank));
            specs.push(spec("and(ker:1,2;even:3)", rank));
        }
        specs
    }

    #[test]
    fn membership_examples() {
        assert!(spec("bal:", 2).member(&w("s1 s2 s1^-1 s2^-1", 2)));
        assert!(spec("even:1", 2).member(&w("s1^2 s2", 2)));
        // f_M(s3 s1 s3⁻¹ s1⁻¹) = e·s1·e·s1⁻¹ = e
        let t = w("s3 s1 s3^-1 s1^-1", 3);
        assert!(spec("ker:1,2", 3).member(&t));
        assert!(retraction(&[1, 2], &t).is_identity());
        let u = w("s1 s2", 2);
        assert!(SubgroupSpec::Cyclic(u.clone()).member(&u.pow(3)));
        assert!(SubgroupSpec::Cyclic(u.clone()).member(&u.pow(-2)));
        assert!(!SubgroupSpec::Cyclic(u).member(&w("s1 s2 s1", 2)));
    }

    #[test]
    fn cyclic_exponent_search() {
        let u = w("s1 s2 s1^-1", 2);
        assert_eq!(cyclic_exponent(&u, &u.pow(5)), Some(5));
        assert_eq!(cyclic_exponent(&u, &u.pow(-4)), Some(-4));
        assert_eq!(cyclic_exponent(&u, &Word::identity()), Some(0));
        assert_eq!(cyclic_exponent(&u, &w("s2^3", 2)), None);
        assert_eq!(cyclic_exponent(&w("s1^2", 2), &w("s1^3", 2)), None);
    }

    #[test]
    fn meta_examples() {
        assert_eq!(spec("even:1", 2).meta(2).index, Index::Finite(2));
        assert_eq!(
            spec("ker:1,2", 3).meta(3).generators_in_s,
            GeneratorsInS::Nonempty { witness: Gen::new(3) }
        );
        assert_eq!(spec("bal:", 2).meta(2).generators_in_s, GeneratorsInS::Empty);
        assert_eq!(spec("ker:1,2", 2).meta(2).generators_in_s, GeneratorsInS::Empty);
        assert_eq!(spec("full", 2).meta(2).index, Index::Finite(1));
        assert_eq!(spec("ker:1,2", 3).meta(3).index, Index::Infinite);
        assert_eq!(spec("cyclic:s1*s2", 2).meta(2).index, Index::Infinite);
        assert_eq!(spec("cyclic:s1^-3", 1).meta(1).index, Index::Finite(3));
        assert_eq!(
            spec("cyclic:s1^-1", 2).meta(2).generators_in_s,
            GeneratorsInS::Nonempty { witness: Gen::new(1) }
        );
        assert_eq!(
            spec("even:1", 2).meta(2).generators_in_s,
            GeneratorsInS::Nonempty { witness: Gen::new(2) }
        );
        assert_eq!(spec("even:1,2", 2).meta(2).generators_in_s, GeneratorsInS::Empty);
        // one generator balanced leaves the others free
        assert_eq!(
            spec("bal:1", 2).meta(2).generators_in_s,
            GeneratorsInS::Nonempty { witness: Gen::new(2) }
        );
    }

    #[test]
    fn intersection_index_uses_gf2_rank() {
        assert_eq!(spec("and(even:1;even:2)", 2).meta(2).index, Index::Finite(4));
        assert_eq!(spec("and(even:1;even:2;even:1,2)", 2).meta(2).index, Index::Finite(4));
        assert_eq!(spec("and(even:1;even:1)", 2).meta(2).index, Index::Finite(2));
        assert_eq!(spec("and(even:1;bal:)", 2).meta(2).index, Index::Infinite);
        assert_eq!(spec("and(full;even:1;and(even:2;even:3))", 3).meta(3).index, Index::Finite(8));
    }

    #[test]
    fn intersection_index_counts_cosets() {
        // |G:H| equals the number of right-congruence classes, visible on V_3
        let h = spec("and(even:1;even:2)", 2);
        let ball = ball_words(3, 2).unwrap();
        let mut reps: Vec<Word> = Vec::new();
        for t in &ball {
            if !reps.iter().any(|r| h.member(&t.mul(&r.inv()))) {
                reps.push(t.clone());
            }
        }
        assert_eq!(reps.len(), 4);
    }

    #[test]
    fn subgroup_ball_examples() {
        assert_eq!(spec("full", 2).ball(1, 2, DEFAULT_NODE_CAP).unwrap(), ball_words(1, 2).unwrap());
        let cyc: HashSet<String> = spec("cyclic:s1*s2", 2)
            .ball(4, 2, DEFAULT_NODE_CAP)
            .unwrap()
            .iter()
            .map(|w| w.to_string())
            .collect();
        let expected: HashSet<String> = ["e", "s1 s2", "s1 s2 s1 s2", "s2^-1 s1^-1", "s2^-1 s1^-1 s2^-1 s1^-1"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(cyc, expected);
        assert_eq!(spec("bal:", 2).ball(1, 2, DEFAULT_NODE_CAP).unwrap(), vec![Word::identity()]);
    }

    #[test]
    fn every_family_contains_identity_and_is_closed() {
        for rank in [2, 3] {
            for h in all_specs(rank) {
                assert!(h.member(&Word::identity()), "{h}");
                let elems = h.ball(3, rank, DEFAULT_NODE_CAP).unwrap();
                for a in &elems {
                    assert!(h.member(&a.inv()), "{h}: inverse of {a}");
                    for b in &elems {
                        assert!(h.member(&a.mul(b)), "{h}: {a} * {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn parity_subgroup_has_two_right_cosets() {
        for text in ["even:1", "even:1,2"] {
            let h = spec(text, 2);
            let ball = ball_words(4, 2).unwrap();
            let mut classes: Vec<Vec<&Word>> = Vec::new();
            for t in &ball {
                match classes.iter_mut().find(|c| h.member(&t.mul(&c[0].inv()))) {
                    Some(class) => class.push(t),
                    None => classes.push(vec![t]),
                }
            }
            assert_eq!(classes.len(), 2, "{text}");
            // the relation is an equivalence: members of a class are pairwise related
            for class in &classes {
                for a in class.iter().take(20) {
                    for b in class.iter().take(20) {
                        assert!(h.member(&a.mul(&b.inv())));
                    }
                }
            }
        }
    }

    #[test]
    fn kernel_matches_homomorphism_oracle() {
        for (keep, rank) in [(vec![1, 2], 3), (vec![1, 3], 3), (vec![1, 2], 2)] {
            let h = SubgroupSpec::kernel(&keep).unwrap();
            for t in ball_words(5, rank).unwrap() {
                assert_eq!(h.member(&t), retraction(&keep, &t).is_identity(), "{t}");
            }
        }
    }

    #[test]
    fn balanced_words_have_even_counts_everywhere() {
        let balanced = spec("bal:", 3).ball(4, 3, DEFAULT_NODE_CAP).unwrap();
        assert!(balanced.len() > 1);
        for a in ["even:1", "even:2", "even:1,3", "even:1,2,3"] {
            let h = spec(a, 3);
            assert!(balanced.iter().all(|t| h.member(t)), "{a}");
        }
    }

    #[test]
    fn parse_display_round_trip() {
        for rank in [2, 3] {
            for h in all_specs(rank) {
                assert_eq!(SubgroupSpec::parse(&h.to_string(), rank).unwrap(), h);
            }
        }
        assert_eq!(spec("bal:", 2), SubgroupSpec::BalancedAll);
        assert_eq!(spec("bal:2", 2), SubgroupSpec::BalancedOne(Gen::new(2)));
    }

    #[test]
    fn parse_errors() {
        for bad in ["cyclic:e", "even:", "ker:1", "ker:1,4", "bal:0", "and()", "nope", "even:x"] {
            assert!(SubgroupSpec::parse(bad, 3).is_err(), "{bad}");
        }
        assert!(SubgroupSpec::parse("cyclic:s3", 2).is_err());
        assert!(SubgroupSpec::parse("and(even:1;ker:1)", 2).is_err());
    }

    #[test]
    fn within_balanced_detection() {
        assert!(spec("bal:", 2).is_within_balanced(2));
        assert!(spec("bal:1,2", 2).is_within_balanced(2));
        assert!(!spec("bal:1", 2).is_within_balanced(2));
        assert!(spec("cyclic:s1*s2*s1^-1*s2^-1", 2).is_within_balanced(2));
        assert!(!spec("cyclic:s1*s2", 2).is_within_balanced(2));
        assert!(spec("and(even:1;bal:)", 2).is_within_balanced(2));
    }
}
