//! Permutation arrays and words in the adjacent transpositions `s_j = (j, j+1)`.
//!
//! A word `(a_1, ..., a_L)` denotes the product `s_{a_1} s_{a_2} ... s_{a_L}`.
//! Evaluation starts from the identity array and, letter by letter from the
//! left, swaps the entries at positions `a` and `a + 1`; this is right
//! multiplication, so the result is the composition `s_{a_1} ∘ ... ∘ s_{a_L}`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `N` accepted by [`enumerate_sn`] unless a different cap is given.
pub const DEFAULT_ENUMERATION_CAP: usize = 10;

/// A permutation of `{0, ..., N-1}` in array notation: entry `i` is `π(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "PermutationJson", into = "PermutationJson")]
pub struct Permutation {
    entries: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PermutationJson {
    n: usize,
    perm: Vec<usize>,
}

impl TryFrom<PermutationJson> for Permutation {
    type Error = Error;

    fn try_from(value: PermutationJson) -> Result<Self> {
        if value.n != value.perm.len() {
            return Err(Error::SizeMismatch { expected: value.n, found: value.perm.len() });
        }
        Permutation::new(value.perm)
    }
}

impl From<Permutation> for PermutationJson {
    fn from(p: Permutation) -> Self {
        PermutationJson { n: p.len(), perm: p.entries }
    }
}

impl Permutation {
    /// Validates that `entries` is a bijection on `{0, ..., len-1}`.
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty array".into()));
        }
        let mut seen = vec![false; n];
        for (i, &x) in entries.iter().enumerate() {
            if x >= n {
                return Err(Error::InvalidPermutation(format!(
                    "entry {x} at position {i} is out of range for {n} symbols"
                )));
            }
            if std::mem::replace(&mut seen[x], true) {
                return Err(Error::InvalidPermutation(format!("entry {x} appears twice")));
            }
        }
        Ok(Permutation { entries })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { entries: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.entries
    }

    /// `π(i)`.
    pub fn apply(&self, i: usize) -> usize {
        self.entries[i]
    }

    pub fn is_identity(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// Function composition `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch { expected: self.len(), found: other.len() });
        }
        Ok(Permutation { entries: other.entries.iter().map(|&i| self.entries[i]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &x) in self.entries.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { entries: inv }
    }

    /// Right-multiplies by `s_j`, swapping the entries at positions `j` and `j+1`.
    pub fn swap_adjacent(&mut self, j: usize) -> Result<()> {
        if j + 1 >= self.len() {
            return Err(Error::LetterOutOfRange { letter: j, n_symbols: self.len() });
        }
        self.entries.swap(j, j + 1);
        Ok(())
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

/// An ordered product of adjacent transpositions on `n_symbols` symbols.
///
/// Words are kept verbatim and never reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "WordJson", into = "WordJson")]
pub struct Word {
    n_symbols: usize,
    letters: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct WordJson {
    n: usize,
    word: Vec<usize>,
}

impl TryFrom<WordJson> for Word {
    type Error = Error;

    fn try_from(value: WordJson) -> Result<Self> {
        Word::new(value.n, value.word)
    }
}

impl From<Word> for WordJson {
    fn from(w: Word) -> Self {
        WordJson { n: w.n_symbols, word: w.letters }
    }
}

impl Word {
    pub fn new(n_symbols: usize, letters: Vec<usize>) -> Result<Self> {
        if n_symbols == 0 {
            return Err(Error::Domain("a word needs at least one symbol".into()));
        }
        if let Some(&letter) = letters.iter().find(|&&l| l + 1 >= n_symbols) {
            return Err(Error::LetterOutOfRange { letter, n_symbols });
        }
        Ok(Word { n_symbols, letters })
    }

    pub fn empty(n_symbols: usize) -> Self {
        Word { n_symbols, letters: Vec::new() }
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Appends the letters of `other`, i.e. forms the product `self · other`.
    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.n_symbols != other.n_symbols {
            return Err(Error::SizeMismatch { expected: self.n_symbols, found: other.n_symbols });
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(Word { n_symbols: self.n_symbols, letters })
    }

    /// Same letters read on a different number of symbols.
    pub fn with_symbols(&self, n_symbols: usize) -> Result<Word> {
        Word::new(n_symbols, self.letters.clone())
    }

    pub fn evaluate(&self) -> Permutation {
        let mut perm = Permutation::identity(self.n_symbols);
        for &j in &self.letters {
            perm.entries.swap(j, j + 1);
        }
        perm
    }

    /// Parses the token form produced by `Display` (`"s1 s0"`, `"I"` for the
    /// empty word). Tokens may also be bare integers.
    pub fn parse_tokens(n_symbols: usize, text: &str) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() || text == "I" {
            return Ok(Word::empty(n_symbols));
        }
        let letters = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                let digits = t.strip_prefix('s').unwrap_or(t);
                usize::from_str(digits).map_err(|_| Error::Domain(format!("bad word token `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(n_symbols, letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "I");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "s{l}")?;
        }
        Ok(())
    }
}

/// Which of the two coset-representative sets is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PiVariant {
    /// `Π_k = {I, s_k, s_k s_{k-1}, ..., s_k ... s_0}`, `k + 2` elements.
    Full,
    /// `Π̄_k = Π_k \ {I}`, `k + 1` elements.
    Barred,
}

/// The ordered set `Π_k` (or `Π̄_k`) of descending runs `s_k s_{k-1} ... s_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PiSet {
    k: usize,
    variant: PiVariant,
}

impl PiSet {
    pub fn full(k: usize) -> Self {
        PiSet { k, variant: PiVariant::Full }
    }

    pub fn barred(k: usize) -> Self {
        PiSet { k, variant: PiVariant::Barred }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn variant(&self) -> PiVariant {
        self.variant
    }

    pub fn len(&self) -> usize {
        match self.variant {
            PiVariant::Full => self.k + 2,
            PiVariant::Barred => self.k + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Letters of the element at 0-based `index`.
    ///
    /// For the full set, index `i` is the run `s_k ... s_{k-i+1}` of length `i`;
    /// the barred set drops the identity, so its index `i` has length `i + 1`.
    pub fn letters(&self, index: usize) -> Option<Vec<usize>> {
        if index >= self.len() {
            return None;
        }
        let length = match self.variant {
            PiVariant::Full => index,
            PiVariant::Barred => index + 1,
        };
        Some((0..length).map(|t| self.k - t).collect())
    }

    /// The element at 0-based `index` as a word on `n_symbols` symbols.
    pub fn word(&self, index: usize, n_symbols: usize) -> Result<Word> {
        let letters = self
            .letters(index)
            .ok_or_else(|| Error::Domain(format!("index {index} out of range for a set of {} elements", self.len())))?;
        Word::new(n_symbols, letters)
    }

    pub fn words(&self, n_symbols: usize) -> Result<Vec<Word>> {
        (0..self.len()).map(|i| self.word(i, n_symbols)).collect()
    }
}

/// Mixed-radix digits `(k_1, ..., k_{N-1})` with `k_j ∈ {0, ..., j}`.
///
/// Digit `k_j` selects element `k_j` (0-based) of `Π_{j-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DigitsJson", into = "DigitsJson")]
pub struct RankDigits {
    n_symbols: usize,
    digits: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct DigitsJson {
    n: usize,
    digits: Vec<usize>,
}

impl TryFrom<DigitsJson> for RankDigits {
    type Error = Error;

    fn try_from(value: DigitsJson) -> Result<Self> {
        RankDigits::new(value.n, value.digits)
    }
}

impl From<RankDigits> for DigitsJson {
    fn from(d: RankDigits) -> Self {
        DigitsJson { n: d.n_symbols, digits: d.digits }
    }
}

impl RankDigits {
    pub fn new(n_symbols: usize, digits: Vec<usize>) -> Result<Self> {
        if n_symbols < 1 {
            return Err(Error::Domain("need at least one symbol".into()));
        }
        if digits.len() != n_symbols - 1 {
            return Err(Error::SizeMismatch { expected: n_symbols - 1, found: digits.len() });
        }
        for (idx, &value) in digits.iter().enumerate() {
            let position = idx + 1;
            if value > position {
                return Err(Error::DigitOutOfRange { position, value });
            }
        }
        Ok(RankDigits { n_symbols, digits })
    }

    pub fn zero(n_symbols: usize) -> Self {
        RankDigits { n_symbols, digits: vec![0; n_symbols.saturating_sub(1)] }
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    /// Mixed-radix value `Σ k_j · j!`, a bijection onto `{0, ..., N! - 1}`.
    pub fn rank(&self) -> Result<u64> {
        let mut rank: u64 = 0;
        let mut place: u64 = 1;
        for (idx, &k) in self.digits.iter().enumerate() {
            let j = idx as u64 + 1;
            place = place
                .checked_mul(j)
                .ok_or_else(|| Error::Resource(format!("rank overflows u64 at N = {}", self.n_symbols)))?;
            rank = rank
                .checked_add(k as u64 * place)
                .ok_or_else(|| Error::Resource(format!("rank overflows u64 at N = {}", self.n_symbols)))?;
        }
        Ok(rank)
    }

    pub fn from_rank(n_symbols: usize, mut rank: u64) -> Result<Self> {
        if n_symbols < 1 {
            return Err(Error::Domain("need at least one symbol".into()));
        }
        let total = factorial(n_symbols).ok_or_else(|| Error::Resource(format!("{n_symbols}! overflows u64")))?;
        if rank >= total {
            return Err(Error::Domain(format!("rank {rank} is not below {n_symbols}! = {total}")));
        }
        // Place value of k_j is j!, so peel digits from the most significant end.
        let mut digits = vec![0; n_symbols - 1];
        let mut place = total / n_symbols as u64;
        for j in (1..n_symbols).rev() {
            digits[j - 1] = (rank / place) as usize;
            rank %= place;
            place /= j as u64;
        }
        RankDigits::new(n_symbols, digits)
    }
}

pub fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, x| acc.checked_mul(x))
}

pub fn evaluate_word(word: &Word) -> Permutation {
    word.evaluate()
}

/// Canonical word `Π_0(·) Π_1(·) ... Π_{N-2}(·)` of a permutation.
///
/// Symbols `α = N-1, ..., 1` are located and removed in turn; the position
/// `l_α` of `α` in the shrinking array picks element `(α+1) - l_α` (1-based)
/// of `Π_{α-1}`, that is the run of length `α - l_α`.
pub fn decompose(perm: &Permutation) -> Word {
    let n = perm.len();
    let mut remaining = perm.entries.clone();
    let mut run_lengths = vec![0; n];
    for alpha in (1..n).rev() {
        let pos = remaining.iter().position(|&x| x == alpha).expect("validated permutation contains every symbol");
        remaining.remove(pos);
        run_lengths[alpha] = alpha - pos;
    }
    let mut letters = Vec::with_capacity(n * (n - 1) / 2);
    for (alpha, &len) in run_lengths.iter().enumerate().skip(1) {
        letters.extend((0..len).map(|t| alpha - 1 - t));
    }
    Word { n_symbols: n, letters }
}

/// Number of pairs `i < j` with `π(i) > π(j)`.
pub fn inversion_count(perm: &Permutation) -> usize {
    let e = &perm.entries;
    (0..e.len()).map(|i| e[i + 1..].iter().filter(|&&y| y < e[i]).count()).sum()
}

/// `Π_0(k_1 + 1) Π_1(k_2 + 1) ... Π_{N-2}(k_{N-1} + 1)`.
pub fn digits_to_word(digits: &RankDigits) -> Word {
    let n = digits.n_symbols;
    let mut letters = Vec::new();
    for (idx, &k) in digits.digits.iter().enumerate() {
        letters.extend((0..k).map(|t| idx - t));
    }
    Word { n_symbols: n, letters }
}

/// Draws a uniformly random permutation of `n` symbols by choosing each digit
/// `k_j` uniformly from `{0, ..., j}`.
pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(RankDigits, Word, Permutation)> {
    sample_with(n, |j| rng.gen_range(0..=j))
}

/// Like [`sample_uniform`] but with digits supplied by `choose(j)`, which must
/// return a value in `{0, ..., j}`.
pub fn sample_with(n: usize, mut choose: impl FnMut(usize) -> usize) -> Result<(RankDigits, Word, Permutation)> {
    if n < 2 {
        return Err(Error::Domain(format!("sampling needs N >= 2, got {n}")));
    }
    let digits = RankDigits::new(n, (1..n).map(&mut choose).collect())?;
    let word = digits_to_word(&digits);
    let perm = word.evaluate();
    Ok((digits, word, perm))
}

/// Lazily enumerates `S_N` in the order of the generation tree:
/// `S_k = ∪_{π ∈ S_{k-1}} π Π_{k-2}`, parents in order, children in `Π` order.
pub fn enumerate_sn(n: usize) -> Result<SnEnumerator> {
    enumerate_sn_capped(n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_sn_capped(n: usize, cap: usize) -> Result<SnEnumerator> {
    if n < 2 {
        return Err(Error::Domain(format!("enumeration needs N >= 2, got {n}")));
    }
    if n > cap {
        return Err(Error::Resource(format!("N = {n} exceeds the enumeration cap {cap}")));
    }
    Ok(SnEnumerator { n, digits: Some(vec![0; n - 1]) })
}

/// Iterator returned by [`enumerate_sn`].
#[derive(Clone, Debug)]
pub struct SnEnumerator {
    n: usize,
    digits: Option<Vec<usize>>,
}

impl Iterator for SnEnumerator {
    type Item = (Permutation, Word);

    fn next(&mut self) -> Option<Self::Item> {
        let digits = self.digits.as_mut()?;
        let current = RankDigits { n_symbols: self.n, digits: digits.clone() };
        // Tree order is an odometer with Π_0 most significant.
        let mut idx = digits.len();
        loop {
            if idx == 0 {
                self.digits = None;
                break;
            }
            idx -= 1;
            if digits[idx] < idx + 1 {
                digits[idx] += 1;
                break;
            }
            digits[idx] = 0;
        }
        let word = digits_to_word(&current);
        Some((word.evaluate(), word))
    }
}
