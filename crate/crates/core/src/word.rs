//! Reduced words of the free group on `rank` generators.
//!
//! A word is stored as runs of signed generator powers, `s1^2 s2^-1`, with
//! adjacent runs on distinct generators. The empty run list is the identity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A generator `s_i`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gen(u32);

impl Gen {
    /// # Panics
    /// If `index` is zero.
    pub fn new(index: u32) -> Self {
        assert!(index >= 1, "generator indices start at 1");
        Gen(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// 0-based position, for indexing parameter vectors.
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all(rank: usize) -> impl Iterator<Item = Gen> {
        (1..=rank as u32).map(Gen)
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn of(exp: i64) -> Sign {
        if exp < 0 {
            Sign::Neg
        } else {
            Sign::Pos
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

/// An element of `S ∪ S⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub gen: Gen,
    pub sign: Sign,
}

impl Letter {
    pub fn new(gen: Gen, sign: Sign) -> Self {
        Letter { gen, sign }
    }

    pub fn pos(index: u32) -> Self {
        Letter::new(Gen::new(index), Sign::Pos)
    }

    pub fn neg(index: u32) -> Self {
        Letter::new(Gen::new(index), Sign::Neg)
    }

    pub fn inverse(self) -> Self {
        Letter::new(self.gen, self.sign.flip())
    }

    /// All `2 * rank` letters in traversal order: by generator, `+` before `-`.
    pub fn all(rank: usize) -> impl Iterator<Item = Letter> {
        (0..2 * rank).map(Letter::from_code)
    }

    /// Dense code in `0..2*rank`; inverse letters differ in the low bit.
    pub fn code(self) -> usize {
        2 * self.gen.slot() + usize::from(self.sign == Sign::Neg)
    }

    pub fn from_code(code: usize) -> Self {
        let sign = if code.is_multiple_of(2) { Sign::Pos } else { Sign::Neg };
        Letter::new(Gen(code as u32 / 2 + 1), sign)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Pos => write!(f, "{}", self.gen),
            Sign::Neg => write!(f, "{}^-1", self.gen),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Run {
    pub gen: Gen,
    /// Never zero.
    pub exp: i64,
}

impl Run {
    pub fn new(gen: Gen, exp: i64) -> Self {
        debug_assert!(exp != 0);
        Run { gen, exp }
    }

    pub fn letter(self) -> Letter {
        Letter::new(self.gen, Sign::of(self.exp))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordParseError {
    #[error("malformed token {0:?}; expected s<i> or s<i>^<k>")]
    Syntax(String),
    #[error("generator s{index} is out of range for {rank} generators")]
    GeneratorOutOfRange { index: u64, rank: usize },
    #[error("zero exponent in token {0:?}")]
    ZeroExponent(String),
    #[error("empty word; write `e` for the identity")]
    Empty,
}

/// A reduced word; equality of values is equality of group elements.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    runs: Vec<Run>,
}

impl Word {
    pub fn identity() -> Self {
        Word { runs: Vec::new() }
    }

    pub fn is_identity(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn generator(gen: Gen) -> Self {
        Word::power(gen, 1)
    }

    pub fn letter(letter: Letter) -> Self {
        Word::power(letter.gen, letter.sign.as_i64())
    }

    pub fn power(gen: Gen, exp: i64) -> Self {
        if exp == 0 {
            Word::identity()
        } else {
            Word {
                runs: vec![Run::new(gen, exp)],
            }
        }
    }

    /// Reduces an arbitrary run sequence (zero exponents allowed).
    pub fn from_runs(runs: impl IntoIterator<Item = (Gen, i64)>) -> Self {
        let mut word = Word::identity();
        for (gen, exp) in runs {
            word.push_power(gen, exp);
        }
        word
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        Word::from_runs(letters.into_iter().map(|l| (l.gen, l.sign.as_i64())))
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    /// The fully expanded letter sequence.
    pub fn letters(&self) -> impl DoubleEndedIterator<Item = Letter> + '_ {
        self.runs
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.letter(), r.exp.unsigned_abs() as usize))
    }

    /// Right-multiplies by `gen^exp`, cancelling at the seam.
    pub fn push_power(&mut self, gen: Gen, exp: i64) {
        if exp == 0 {
            return;
        }
        match self.runs.last_mut() {
            Some(last) if last.gen == gen => {
                last.exp += exp;
                if last.exp == 0 {
                    self.runs.pop();
                }
            }
            _ => self.runs.push(Run::new(gen, exp)),
        }
    }

    pub fn push_letter(&mut self, letter: Letter) {
        self.push_power(letter.gen, letter.sign.as_i64());
    }

    pub fn with_letter(&self, letter: Letter) -> Word {
        let mut w = self.clone();
        w.push_letter(letter);
        w
    }

    /// Reduced product `self · other`. Only the seam is touched.
    pub fn mul(&self, other: &Word) -> Word {
        let mut runs = self.runs.clone();
        let mut rest = other.runs.iter();
        let mut pending = rest.next();
        while let Some(r) = pending {
            match runs.last_mut() {
                Some(last) if last.gen == r.gen => {
                    let exp = last.exp + r.exp;
                    pending = rest.next();
                    if exp == 0 {
                        runs.pop();
                        continue;
                    }
                    last.exp = exp;
                }
                _ => {}
            }
            break;
        }
        runs.extend(pending.into_iter().chain(rest).copied());
        Word { runs }
    }

    pub fn inv(&self) -> Word {
        Word {
            runs: self.runs.iter().rev().map(|r| Run::new(r.gen, -r.exp)).collect(),
        }
    }

    /// `self^n` for any integer `n`.
    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inv() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// The word with its letter sequence read backwards (no inversion).
    pub fn reversed(&self) -> Word {
        Word {
            runs: self.runs.iter().rev().copied().collect(),
        }
    }

    /// Geodesic length from the identity in the Cayley tree.
    pub fn len(&self) -> usize {
        self.runs.iter().map(|r| r.exp.unsigned_abs() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    /// Last signed letter; `None` for the identity.
    pub fn nu(&self) -> Option<Letter> {
        self.runs.last().map(|r| r.letter())
    }

    pub fn first_letter(&self) -> Option<Letter> {
        self.runs.first().map(|r| r.letter())
    }

    /// The word with its last letter removed (the tree parent).
    pub fn parent(&self) -> Option<Word> {
        let last = self.nu()?;
        Some(self.with_letter(last.inverse()))
    }

    pub fn letter_count(&self, letter: Letter) -> u64 {
        self.runs
            .iter()
            .filter(|r| r.letter() == letter)
            .map(|r| r.exp.unsigned_abs())
            .sum()
    }

    pub fn exponent_sum(&self, gen: Gen) -> i64 {
        self.runs.iter().filter(|r| r.gen == gen).map(|r| r.exp).sum()
    }

    /// `n_t(s) + n_t(s⁻¹)`.
    pub fn occurrences(&self, gen: Gen) -> u64 {
        self.runs
            .iter()
            .filter(|r| r.gen == gen)
            .map(|r| r.exp.unsigned_abs())
            .sum()
    }

    /// Prefix order: `self` lies on the geodesic from `e` to `other`.
    pub fn is_prefix_of(&self, other: &Word) -> bool {
        let Some((last, init)) = self.runs.split_last() else {
            return true;
        };
        if init.len() >= other.runs.len() || other.runs[..init.len()] != *init {
            return false;
        }
        let there = other.runs[init.len()];
        there.gen == last.gen
            && (there.exp > 0) == (last.exp > 0)
            && there.exp.unsigned_abs() >= last.exp.unsigned_abs()
    }

    /// Largest generator index used, 0 for the identity.
    pub fn max_gen(&self) -> u32 {
        self.runs.iter().map(|r| r.gen.index()).max().unwrap_or(0)
    }

    /// Parses the text form, checking indices against `rank`.
    pub fn parse(text: &str, rank: usize) -> Result<Word, WordParseError> {
        let word: Word = text.parse()?;
        let max = word.max_gen();
        if max as usize > rank {
            return Err(WordParseError::GeneratorOutOfRange {
                index: max as u64,
                rank,
            });
        }
        Ok(word)
    }
}

fn parse_token(token: &str) -> Result<(Gen, i64), WordParseError> {
    let syntax = || WordParseError::Syntax(token.to_string());
    let body = token.strip_prefix('s').ok_or_else(syntax)?;
    let (index, exp) = match body.split_once('^') {
        Some((i, k)) => (i, k.parse::<i64>().map_err(|_| syntax())?),
        None => (body, 1),
    };
    if index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) {
        return Err(syntax());
    }
    let index: u64 = index.parse().map_err(|_| syntax())?;
    if index == 0 || index > u32::MAX as u64 {
        return Err(WordParseError::GeneratorOutOfRange { index, rank: 0 });
    }
    if exp == 0 {
        return Err(WordParseError::ZeroExponent(token.to_string()));
    }
    Ok((Gen(index as u32), exp))
}

impl FromStr for Word {
    type Err = WordParseError;

    /// Parses without a rank bound; see [`Word::parse`].
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        if text == "e" {
            return Ok(Word::identity());
        }
        let tokens: Vec<&str> = text
            .split(|c: char| c.is_whitespace() || c == '*')
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            return Err(WordParseError::Empty);
        }
        let runs = tokens.into_iter().map(parse_token).collect::<Result<Vec<_>, _>>()?;
        Ok(Word::from_runs(runs))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.runs.is_empty() {
            return f.write_str("e");
        }
        for (i, r) in self.runs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if r.exp == 1 {
                write!(f, "{}", r.gen)?;
            } else {
                write!(f, "{}^{}", r.gen, r.exp)?;
            }
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let w: Word = text.parse().map_err(serde::de::Error::custom)?;
        match w.runs() {
            [r] if r.exp.abs() == 1 => Ok(r.letter()),
            _ => Err(serde::de::Error::custom(format!("{text:?} is not a single letter"))),
        }
    }
}

impl Serialize for Gen {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(self.0)
    }
}

impl<'de> Deserialize<'de> for Gen {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match u32::deserialize(d)? {
            0 => Err(serde::de::Error::custom("generator indices start at 1")),
            i => Ok(Gen(i)),
        }
    }
}
