//! Measurement-driven permutation sampling.
//!
//! Slot `k` of the ancilla register is a qudit whose measured level selects
//! one element of `Π_k` (or `Π̄_k`); the selected runs, concatenated in slot
//! order, form the sampled word.
//!
//! Pin indices: at slot 0 a pin indexes `Π_0 = {I, s_0}`; at slot `k ≥ 1` it
//! indexes `Π̄_k`, so index 0 is `s_k`. Choosing the identity at a slot `k ≥ 1`
//! is expressed by skipping it.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{Permutation, PiSet, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlotMode {
    /// Uniform over `Π_k`, dimension `k + 2`.
    Full,
    /// Uniform over `Π̄_k`, dimension `k + 1`.
    Barred,
    /// Prepared in a basis state.
    Pinned(usize),
    /// Not measured; contributes the identity.
    Skipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Slot {
    pub k: usize,
    pub mode: SlotMode,
}

impl Slot {
    /// The set the slot's level indexes, or `None` for a skipped slot.
    pub fn pi_set(&self) -> Option<PiSet> {
        match self.mode {
            SlotMode::Full => Some(PiSet::full(self.k)),
            SlotMode::Barred => Some(PiSet::barred(self.k)),
            SlotMode::Pinned(_) => Some(pin_set(self.k)),
            SlotMode::Skipped => None,
        }
    }

    /// Qudit dimension; 0 for skipped slots.
    pub fn dim(&self) -> usize {
        self.pi_set().map_or(0, |s| s.len())
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.mode, SlotMode::Full | SlotMode::Barred)
    }
}

/// The set a pin at slot `k` indexes.
pub fn pin_set(k: usize) -> PiSet {
    if k == 0 {
        PiSet::full(0)
    } else {
        PiSet::barred(k)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    n_symbols: usize,
    slots: Vec<Slot>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    /// One uniform integer per slot.
    #[default]
    Shortcut,
    /// Builds each qudit's amplitude vector and measures it.
    Amplitude,
}

/// Literal qudit state with real amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditState {
    amps: Vec<f64>,
}

impl QuditState {
    pub fn uniform(dim: usize) -> Self {
        QuditState { amps: vec![1.0 / (dim as f64).sqrt(); dim] }
    }

    pub fn basis(dim: usize, level: usize) -> Self {
        let mut amps = vec![0.0; dim];
        amps[level] = 1.0;
        QuditState { amps }
    }

    pub fn for_slot(slot: &Slot) -> Option<Self> {
        match slot.mode {
            SlotMode::Full | SlotMode::Barred => Some(QuditState::uniform(slot.dim())),
            SlotMode::Pinned(l) => Some(QuditState::basis(slot.dim(), l)),
            SlotMode::Skipped => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a * a).collect()
    }

    /// Computational-basis measurement.
    pub fn measure<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = 0;
        for (level, p) in self.probabilities().into_iter().enumerate() {
            if p > 0.0 {
                last = level;
            }
            acc += p;
            if u < acc {
                return level;
            }
        }
        last
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleOutcome {
    /// Measured level per slot; `None` for skipped slots.
    pub outcomes: Vec<Option<usize>>,
    pub word: Word,
    pub perm: Permutation,
}

#[derive(Serialize)]
struct OutcomeJson<'a> {
    outcomes: &'a [Option<usize>],
    word: &'a [usize],
    label: String,
    perm: &'a [usize],
}

impl Serialize for SampleOutcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OutcomeJson {
            outcomes: &self.outcomes,
            word: self.word.letters(),
            label: self.word.to_string(),
            perm: self.perm.as_slice(),
        }
        .serialize(s)
    }
}

impl fmt::Display for SampleOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.word, self.perm)
    }
}

impl Register {
    /// Checks slot modes against the index rules above.
    pub fn new(n_symbols: usize, slots: Vec<Slot>) -> Result<Self> {
        if n_symbols < 2 {
            return Err(Error::Domain(format!("register needs N >= 2, got {n_symbols}")));
        }
        if slots.len() != n_symbols - 1 {
            return Err(Error::SizeMismatch { expected: n_symbols - 1, found: slots.len() });
        }
        for (k, slot) in slots.iter().enumerate() {
            if slot.k != k {
                return Err(Error::InvalidRestriction(format!("slot {} listed at position {k}", slot.k)));
            }
            match slot.mode {
                SlotMode::Barred if k == 0 => {
                    return Err(Error::InvalidRestriction("slot 0 cannot be barred; pin it to 1 to force s0".into()))
                }
                SlotMode::Pinned(l) if l >= pin_set(k).len() => {
                    return Err(Error::InvalidRestriction(format!(
                        "pin {l} at slot {k} is outside 0..{}",
                        pin_set(k).len()
                    )))
                }
                _ => {}
            }
        }
        Ok(Register { n_symbols, slots })
    }

    /// Every slot uniform over its full `Π_k`: samples `S_N` uniformly.
    pub fn full(n_symbols: usize) -> Result<Self> {
        let slots = (0..n_symbols.saturating_sub(1)).map(|k| Slot { k, mode: SlotMode::Full }).collect();
        Register::new(n_symbols, slots)
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn dims(&self) -> Vec<usize> {
        self.slots.iter().map(Slot::dim).collect()
    }

    /// Number of equiprobable joint outcomes.
    pub fn support_size(&self) -> usize {
        self.slots.iter().filter(|s| s.is_uniform()).map(Slot::dim).product()
    }

    /// Assembles the outcome for the given per-slot levels. Uniform slots need
    /// a level; pinned slots may omit theirs; skipped slots must be `None`.
    pub fn outcome_for(&self, levels: &[Option<usize>]) -> Result<SampleOutcome> {
        if levels.len() != self.slots.len() {
            return Err(Error::SizeMismatch { expected: self.slots.len(), found: levels.len() });
        }
        let mut outcomes = Vec::with_capacity(levels.len());
        let mut letters = Vec::new();
        for (slot, &level) in self.slots.iter().zip(levels) {
            let level = match (slot.mode, level) {
                (SlotMode::Skipped, None) => None,
                (SlotMode::Skipped, Some(l)) => {
                    return Err(Error::Domain(format!("slot {} is skipped but got level {l}", slot.k)))
                }
                (SlotMode::Pinned(p), None) => Some(p),
                (SlotMode::Pinned(p), Some(l)) if l != p => {
                    return Err(Error::Domain(format!("slot {} is pinned to {p} but got level {l}", slot.k)))
                }
                (_, None) => return Err(Error::Domain(format!("slot {} needs a level", slot.k))),
                (_, Some(l)) => Some(l),
            };
            if let (Some(set), Some(l)) = (slot.pi_set(), level) {
                let run = set.letters(l).ok_or_else(|| {
                    Error::Domain(format!("level {l} out of range at slot {} (dimension {})", slot.k, set.len()))
                })?;
                letters.extend(run);
            }
            outcomes.push(level);
        }
        let word = Word::new(self.n_symbols, letters)?;
        let perm = word.evaluate();
        Ok(SampleOutcome { outcomes, word, perm })
    }

    pub fn measure<R: Rng + ?Sized>(&self, rng: &mut R) -> SampleOutcome {
        self.measure_with(Backend::Shortcut, rng)
    }

    /// Slots are measured in ascending order.
    pub fn measure_with<R: Rng + ?Sized>(&self, backend: Backend, rng: &mut R) -> SampleOutcome {
        let levels: Vec<Option<usize>> = self
            .slots
            .iter()
            .map(|slot| match (slot.mode, backend) {
                (SlotMode::Skipped, _) => None,
                (SlotMode::Pinned(p), Backend::Shortcut) => Some(p),
                (_, Backend::Shortcut) => Some(rng.gen_range(0..slot.dim())),
                (_, Backend::Amplitude) => QuditState::for_slot(slot).map(|q| q.measure(rng)),
            })
            .collect();
        self.outcome_for(&levels).expect("levels drawn within slot dimensions")
    }

    /// Level probabilities of slot `k`, read off its amplitude vector.
    pub fn slot_probabilities(&self, k: usize) -> Result<Vec<f64>> {
        let slot = self
            .slots
            .get(k)
            .ok_or_else(|| Error::Domain(format!("no slot {k} in a register of {}", self.slots.len())))?;
        Ok(QuditState::for_slot(slot).map_or_else(Vec::new, |q| q.probabilities()))
    }

    /// Every joint outcome with its probability, in odometer order
    /// (slot 0 most significant).
    pub fn exact_distribution(&self) -> Vec<(SampleOutcome, f64)> {
        let probs: Vec<Vec<f64>> = self
            .slots
            .iter()
            .map(|s| QuditState::for_slot(s).map_or_else(|| vec![1.0], |q| q.probabilities()))
            .collect();
        let mut result = Vec::new();
        let mut idx = vec![0usize; probs.len()];
        loop {
            let p: f64 = idx.iter().zip(&probs).map(|(&i, ps)| ps[i]).product();
            if p > 0.0 {
                let levels: Vec<Option<usize>> =
                    self.slots.iter().zip(&idx).map(|(s, &i)| (s.mode != SlotMode::Skipped).then_some(i)).collect();
                result.push((self.outcome_for(&levels).expect("in-range levels"), p));
            }
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    return result;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < probs[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Full,
    Barred,
    Pinned,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotSpec {
    pub k: usize,
    pub mode: ModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pin: Option<usize>,
}

/// Restriction file: unlisted slots stay full.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionSpec {
    #[serde(rename = "N")]
    pub n_symbols: usize,
    #[serde(default)]
    pub slots: Vec<SlotSpec>,
}

impl RestrictionSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidRestriction(e.to_string()))
    }
}

/// Builds the register for `N` symbols, by default uniform on all of `S_N`.
pub fn prepare_register(n_symbols: usize, restriction: Option<&RestrictionSpec>) -> Result<Register> {
    if n_symbols < 3 {
        return Err(Error::Domain(format!("sampling register needs N >= 3, got {n_symbols}")));
    }
    let mut modes: BTreeMap<usize, SlotMode> = BTreeMap::new();
    if let Some(spec) = restriction {
        if spec.n_symbols != n_symbols {
            return Err(Error::InvalidRestriction(format!(
                "restriction is for N = {}, register has N = {n_symbols}",
                spec.n_symbols
            )));
        }
        for s in &spec.slots {
            if s.k + 2 > n_symbols {
                return Err(Error::InvalidRestriction(format!("slot {} does not exist for N = {n_symbols}", s.k)));
            }
            let mode = match (s.mode, s.pin) {
                (ModeName::Pinned, Some(l)) => SlotMode::Pinned(l),
                (ModeName::Pinned, None) => {
                    return Err(Error::InvalidRestriction(format!("slot {} is pinned without a pin", s.k)))
                }
                (_, Some(_)) => {
                    return Err(Error::InvalidRestriction(format!("slot {} has a pin but is not pinned", s.k)))
                }
                (ModeName::Full, None) => SlotMode::Full,
                (ModeName::Barred, None) => SlotMode::Barred,
                (ModeName::Skipped, None) => SlotMode::Skipped,
            };
            if modes.insert(s.k, mode).is_some() {
                return Err(Error::InvalidRestriction(format!("slot {} listed twice", s.k)));
            }
        }
    }
    let slots =
        (0..n_symbols - 1).map(|k| Slot { k, mode: modes.get(&k).copied().unwrap_or(SlotMode::Full) }).collect();
    Register::new(n_symbols, slots)
}

/// Register for `Π̄_l Π̄_m`: slot 0 pinned to `I`, slots `l` and `m` barred.
pub fn product_set_register(l: usize, m: usize, n_symbols: usize) -> Result<Register> {
    if !(1 <= l && l < m && m + 2 <= n_symbols) {
        return Err(Error::Domain(format!("need 1 <= l < m <= N-2, got l = {l}, m = {m}, N = {n_symbols}")));
    }
    let slots = (0..n_symbols - 1)
        .map(|k| {
            let mode = match k {
                0 => SlotMode::Pinned(0),
                _ if k == l || k == m => SlotMode::Barred,
                _ => SlotMode::Skipped,
            };
            Slot { k, mode }
        })
        .collect();
    Register::new(n_symbols, slots)
}

pub fn sample_product_set<R: Rng + ?Sized>(l: usize, m: usize, n_symbols: usize, rng: &mut R) -> Result<SampleOutcome> {
    Ok(product_set_register(l, m, n_symbols)?.measure(rng))
}

/// Register for the `Π̄_j` copy hanging off the vertex given by `pins`.
///
/// With `j = 0` there are no pins and slot 0 is the root edge `{I, s_0}`.
/// Otherwise an absent slot-0 pin means `I`, pinned slots must lie below `j`,
/// and every other slot is skipped.
pub fn copy_register(pins: &[(usize, usize)], j: usize, n_symbols: usize) -> Result<Register> {
    if n_symbols < 2 || j + 2 > n_symbols {
        return Err(Error::Domain(format!("copy slot {j} does not exist for N = {n_symbols}")));
    }
    let mut modes = vec![SlotMode::Skipped; n_symbols - 1];
    if j == 0 {
        if !pins.is_empty() {
            return Err(Error::InvalidRestriction("the root copy takes no pins".into()));
        }
        modes[0] = SlotMode::Full;
    } else {
        modes[0] = SlotMode::Pinned(0);
        let mut seen = vec![false; n_symbols - 1];
        for &(slot, index) in pins {
            if slot >= j {
                return Err(Error::InvalidRestriction(format!("pin at slot {slot} is not before slot {j}")));
            }
            if std::mem::replace(&mut seen[slot], true) {
                return Err(Error::InvalidRestriction(format!("slot {slot} pinned twice")));
            }
            modes[slot] = SlotMode::Pinned(index);
        }
        modes[j] = SlotMode::Barred;
    }
    let slots = modes.into_iter().enumerate().map(|(k, mode)| Slot { k, mode }).collect();
    Register::new(n_symbols, slots)
}

pub fn sample_copy<R: Rng + ?Sized>(
    pins: &[(usize, usize)],
    j: usize,
    n_symbols: usize,
    rng: &mut R,
) -> Result<SampleOutcome> {
    Ok(copy_register(pins, j, n_symbols)?.measure(rng))
}
