//! Two-sample randomization test driven by simulated permutations.
//!
//! The dataset `a_0, ..., a_{N-1}` (`N = 2^n`) is amplitude encoded, a random
//! permutation relabels the amplitudes, and a Toffoli with controls on the low
//! `m` qubits marks the `K = 2^{n-m}` basis states whose low `m` bits are all
//! one. Measuring the ancilla gives 1 with probability
//! `p = Σ_{k ∈ K} a_{π(k)} / Σ a`, from which the sample mean `p Σa / K` of the
//! class `{π(k) : k ∈ K}` is recovered.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::rng::StreamFamily;
use crate::sampling::{prepare_register, Register};
use crate::sim::{amplitude_encode, StateVector};

pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 1_000_000;
const CHUNK: u64 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n_qubits: usize,
}

impl Dataset {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidDataset(format!("length {len} is not a power of two >= 2")));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidDataset(format!("entry {bad} is not a nonnegative number")));
        }
        if values.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidDataset("data sum to zero".into()));
        }
        Ok(Dataset { n_qubits: len.trailing_zeros() as usize, values })
    }

    /// One value per line; blank lines are ignored.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut values = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::InvalidDataset(e.to_string()))?;
            if record.len() != 1 {
                return Err(Error::InvalidDataset(format!("expected one value per line, got {record:?}")));
            }
            let field = &record[0];
            if field.is_empty() {
                continue;
            }
            values.push(field.parse().map_err(|_| Error::InvalidDataset(format!("not a number: {field:?}")))?);
        }
        Dataset::new(values)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let values: Vec<f64> = serde_json::from_str(text).map_err(|e| Error::InvalidDataset(e.to_string()))?;
        Dataset::new(values)
    }

    /// JSON if the content starts with `[`, CSV otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('[') {
            Dataset::from_json(text)
        } else {
            Dataset::from_csv(text)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::InvalidDataset(format!("{}: {e}", path.display())))?;
        Dataset::parse(&text)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn encode(&self) -> Result<StateVector> {
        amplitude_encode(&self.values, self.n_qubits)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    /// `P(T ≤ t*)`.
    #[default]
    Le,
    /// `P(T ≥ t*)`.
    Ge,
    /// `P(|T| ≥ |t*|)`.
    TwoSided,
}

impl FromStr for Tail {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "le" => Ok(Tail::Le),
            "ge" => Ok(Tail::Ge),
            "two-sided" | "two_sided" | "twosided" => Ok(Tail::TwoSided),
            _ => Err(Error::Domain(format!("unknown tail {s:?}; expected le, ge or two-sided"))),
        }
    }
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tail::Le => "le",
            Tail::Ge => "ge",
            Tail::TwoSided => "two-sided",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestConfig {
    pub m: usize,
    pub shots: u64,
    pub seed: u64,
    /// Replace the measured frequency of each class by its exact probability.
    pub exact: bool,
    pub tail: Tail,
    /// Observed statistic; defaults to the split given by the control set.
    pub t_star: Option<f64>,
}

impl TestConfig {
    pub fn new(m: usize, shots: u64, seed: u64) -> Self {
        TestConfig { m, shots, seed, exact: false, tail: Tail::Le, t_star: None }
    }
}

/// Sorted image `{π(k) : k ∈ K}` of the control index set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassKey(pub Vec<usize>);

impl fmt::Display for ClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassStats {
    pub key: ClassKey,
    /// Permutations sampled into this class (one per shot).
    pub samples: u64,
    pub ones: u64,
    pub zeros: u64,
    pub p_hat: f64,
    pub mean_hat: f64,
    /// `X̄ - Ȳ` estimated from `p_hat`.
    pub statistic: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub n_points: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub shots: u64,
    pub seed: u64,
    pub exact: bool,
    pub tail: Tail,
    pub t_star: f64,
    pub p_value: f64,
    pub n_classes: usize,
    pub min_class_samples: u64,
    pub classes: Vec<ClassStats>,
}

impl TestReport {
    pub fn class(&self, key: &[usize]) -> Option<&ClassStats> {
        self.classes.iter().find(|c| c.key.0 == key)
    }
}

pub fn control_index_set(n: usize, m: usize) -> Result<Vec<usize>> {
    if m < 1 || m >= n {
        return Err(Error::Domain(format!("need 1 <= m < n, got m = {m}, n = {n}")));
    }
    if n >= usize::BITS as usize {
        return Err(Error::Resource(format!("{n} qubits")));
    }
    let low = (1usize << m) - 1;
    Ok((0..1usize << n).filter(|q| q & low == low).collect())
}

pub fn class_key(perm: &Permutation, n: usize, m: usize) -> Result<ClassKey> {
    let controls = control_index_set(n, m)?;
    if perm.len() != 1 << n {
        return Err(Error::SizeMismatch { expected: 1 << n, found: perm.len() });
    }
    let mut key: Vec<usize> = controls.iter().map(|&k| perm.apply(k)).collect();
    key.sort_unstable();
    Ok(ClassKey(key))
}

/// `Σ_{k ∈ K} a_{π(k)} / Σ a`.
pub fn exact_prob(dataset: &Dataset, perm: &Permutation, m: usize) -> Result<f64> {
    if perm.len() != dataset.len() {
        return Err(Error::SizeMismatch { expected: dataset.len(), found: perm.len() });
    }
    let total = dataset.sum();
    let controls = control_index_set(dataset.n_qubits(), m)?;
    Ok(controls.iter().map(|&k| dataset.values[perm.apply(k)] / total).sum())
}

/// `mean(a|S) - mean(a|complement)`.
pub fn split_statistic(dataset: &Dataset, subset: &[usize]) -> Result<f64> {
    let k = subset.len();
    let n = dataset.len();
    if k == 0 || k >= n {
        return Err(Error::Domain(format!("split size {k} must be in 1..{n}")));
    }
    if subset.iter().any(|&i| i >= n) {
        return Err(Error::Domain(format!("split {subset:?} has indices outside 0..{n}")));
    }
    let inside: f64 = subset.iter().map(|&i| dataset.values[i]).sum();
    Ok(inside / k as f64 - (dataset.sum() - inside) / (n - k) as f64)
}

/// `X̄ - Ȳ` given the probability mass `p` of the `K`-sample.
pub fn statistic_from_prob(p: f64, total: f64, k: usize, n_points: usize) -> f64 {
    p * total / k as f64 - (1.0 - p) * total / (n_points - k) as f64
}

/// The statistic of the split selected by the identity permutation.
pub fn observed_statistic(dataset: &Dataset, m: usize) -> Result<f64> {
    split_statistic(dataset, &control_index_set(dataset.n_qubits(), m)?)
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    (0..k).try_fold(1u64, |acc, i| acc.checked_mul(n - i).map(|v| v / (i + 1)))
}

/// `T(S)` for every `K`-subset `S`, in lexicographic subset order.
pub fn classical_exhaustive(dataset: &Dataset, k: usize) -> Result<Vec<f64>> {
    classical_exhaustive_capped(dataset, k, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn classical_exhaustive_capped(dataset: &Dataset, k: usize, cap: u64) -> Result<Vec<f64>> {
    let n = dataset.len();
    if k == 0 || k >= n {
        return Err(Error::Domain(format!("K = {k} must be in 1..{n}")));
    }
    match binomial(n as u64, k as u64) {
        Some(c) if c <= cap => {}
        _ => return Err(Error::Resource(format!("C({n}, {k}) exceeds the cap {cap}"))),
    }
    (0..n).combinations(k).map(|s| split_statistic(dataset, &s)).collect()
}

/// Fraction of `distribution` at least as extreme as `t_star`. Values within
/// `1e-9 · max(1, |t*|)` of the threshold count as ties and are included.
pub fn p_value(distribution: &[f64], t_star: f64, tail: Tail) -> Result<f64> {
    if distribution.is_empty() {
        return Err(Error::Domain("empty distribution".into()));
    }
    if t_star.is_nan() {
        return Err(Error::Domain("t* is NaN".into()));
    }
    let eps = 1e-9 * t_star.abs().max(1.0);
    let hits = distribution
        .iter()
        .filter(|&&t| match tail {
            Tail::Le => t <= t_star + eps,
            Tail::Ge => t >= t_star - eps,
            Tail::TwoSided => t.abs() >= t_star.abs() - eps,
        })
        .count();
    Ok(hits as f64 / distribution.len() as f64)
}

/// The Toffoli of the pipeline: controls on qubits `0..m`, target the ancilla
/// at index `n`.
pub fn marking_gate(n: usize, m: usize) -> Gate {
    Gate::toffoli((0..m).collect(), n)
}

/// Ancilla `P(1)` read from the simulator after relabeling and marking.
pub fn simulated_prob(base: &StateVector, perm: &Permutation, m: usize) -> Result<f64> {
    let n = base.n_qubits();
    let mut state = base.permutation_action(perm)?.with_ancilla()?;
    state.apply_gate(&marking_gate(n, m))?;
    state.exact_prob_one(n)
}

#[derive(Clone, Debug, Default)]
struct Tally {
    samples: u64,
    ones: u64,
    /// Exact mode: probability from the lowest-numbered shot in the class.
    exact: Option<(u64, f64)>,
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        self.samples += other.samples;
        self.ones += other.ones;
        self.exact = match (self.exact, other.exact) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
    }
}

struct Pipeline<'a> {
    base: StateVector,
    register: Register,
    streams: StreamFamily,
    config: &'a TestConfig,
    n: usize,
}

impl Pipeline<'_> {
    fn shot(&self, index: u64, tallies: &mut BTreeMap<ClassKey, Tally>) -> Result<()> {
        let mut rng = self.streams.rng(index);
        let perm = self.register.measure(&mut rng).perm;
        let key = class_key(&perm, self.n, self.config.m)?;
        let tally = tallies.entry(key).or_default();
        tally.samples += 1;
        if self.config.exact {
            if tally.exact.is_none() {
                tally.exact = Some((index, simulated_prob(&self.base, &perm, self.config.m)?));
            }
            return Ok(());
        }
        let mut state = self.base.permutation_action(&perm)?.with_ancilla()?;
        state.apply_gate(&marking_gate(self.n, self.config.m))?;
        let (bit, _) = state.measure_z(self.n, &mut rng)?;
        tally.ones += u64::from(bit);
        Ok(())
    }
}

/// Runs `config.shots` shots. Shot `i` draws from its own stream, so the
/// report does not depend on the thread count.
pub fn run_quantum_sim(dataset: &Dataset, config: &TestConfig) -> Result<TestReport> {
    let n = dataset.n_qubits();
    if config.shots == 0 {
        return Err(Error::Domain("shots must be positive".into()));
    }
    control_index_set(n, config.m)?;
    let n_points = dataset.len();
    let k = n_points >> config.m;
    let pipeline = Pipeline {
        base: dataset.encode()?,
        register: prepare_register(n_points, None)?,
        streams: StreamFamily::new(config.seed, "randtest/shot"),
        config,
        n,
    };

    let n_chunks = config.shots.div_ceil(CHUNK);
    let tallies = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut local = BTreeMap::new();
            for i in c * CHUNK..((c + 1) * CHUNK).min(config.shots) {
                pipeline.shot(i, &mut local)?;
            }
            Ok(local)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (key, t) in b {
                a.entry(key).or_insert_with(Tally::default).merge(t);
            }
            Ok(a)
        })?;

    let total = dataset.sum();
    let classes: Vec<ClassStats> = tallies
        .into_iter()
        .map(|(key, t)| {
            let p_hat = match t.exact {
                Some((_, p)) => p,
                None => t.ones as f64 / t.samples as f64,
            };
            ClassStats {
                key,
                samples: t.samples,
                ones: t.ones,
                zeros: if config.exact { 0 } else { t.samples - t.ones },
                p_hat,
                mean_hat: p_hat * total / k as f64,
                statistic: statistic_from_prob(p_hat, total, k, n_points),
            }
        })
        .collect();

    let t_star = match config.t_star {
        Some(t) => t,
        None => observed_statistic(dataset, config.m)?,
    };
    let stats: Vec<f64> = classes.iter().map(|c| c.statistic).collect();
    Ok(TestReport {
        n,
        m: config.m,
        n_points,
        k,
        shots: config.shots,
        seed: config.seed,
        exact: config.exact,
        tail: config.tail,
        t_star,
        p_value: p_value(&stats, t_star, config.tail)?,
        n_classes: classes.len(),
        min_class_samples: classes.iter().map(|c| c.samples).min().unwrap_or(0),
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::enumerate_sn;
    use std::collections::HashMap;

    fn one_to_eight() -> Dataset {
        Dataset::new((1..=8).map(f64::from).collect()).unwrap()
    }

    #[test]
    fn control_sets() {
        assert_eq!(control_index_set(3, 2).unwrap(), vec![3, 7]);
        assert_eq!(control_index_set(3, 1).unwrap(), vec![1, 3, 5, 7]);
        assert_eq!(control_index_set(4, 2).unwrap(), vec![3, 7, 11, 15]);
        assert!(control_index_set(3, 0).is_err());
        assert!(control_index_set(3, 3).is_err());
    }

    #[test]
    fn exact_probabilities() {
        let uniform = Dataset::new(vec![1.0; 8]).unwrap();
        let perm = Permutation::new(vec![5, 2, 7, 0, 1, 3, 6, 4]).unwrap();
        assert!((exact_prob(&uniform, &perm, 2).unwrap() - 0.25).abs() < 1e-15);

        let d = one_to_eight();
        let p = exact_prob(&d, &Permutation::identity(8), 2).unwrap();
        assert!((p - 1.0 / 3.0).abs() < 1e-15);
        assert!((p * d.sum() / 2.0 - 6.0).abs() < 1e-12);
        assert!(exact_prob(&d, &Permutation::identity(4), 2).is_err());

        let base = d.encode().unwrap();
        assert!((simulated_prob(&base, &Permutation::identity(8), 2).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn class_keys() {
        assert_eq!(class_key(&Permutation::identity(8), 3, 2).unwrap(), ClassKey(vec![3, 7]));
        let p = Permutation::new(vec![3, 2, 0, 1]).unwrap();
        assert_eq!(class_key(&p, 2, 1).unwrap(), ClassKey(vec![1, 2]));
        let swap_controls = Permutation::new(vec![0, 3, 2, 1]).unwrap();
        assert_eq!(class_key(&p.compose(&swap_controls).unwrap(), 2, 1).unwrap(), class_key(&p, 2, 1).unwrap());
        assert!(class_key(&p, 3, 1).is_err());
    }

    #[test]
    fn class_preimages_at_n4() {
        let mut counts: HashMap<ClassKey, usize> = HashMap::new();
        for (perm, _) in enumerate_sn(4).unwrap() {
            *counts.entry(class_key(&perm, 2, 1).unwrap()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        assert!(counts.values().all(|&c| c == 4));
    }

    #[test]
    fn exhaustive_examples() {
        let d = Dataset::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let dist = classical_exhaustive(&d, 2).unwrap();
        assert_eq!(dist.len(), 6);
        assert_eq!(split_statistic(&d, &[2, 3]).unwrap(), 2.0);
        assert_eq!(p_value(&dist, -2.0, Tail::Le).unwrap(), 1.0 / 6.0);

        let flat = Dataset::new(vec![5.0; 4]).unwrap();
        assert!(classical_exhaustive(&flat, 2).unwrap().iter().all(|&t| t == 0.0));
        assert_eq!(classical_exhaustive(&one_to_eight(), 2).unwrap().len(), 28);
        assert!(matches!(classical_exhaustive_capped(&one_to_eight(), 4, 10), Err(Error::Resource(_))));
    }

    #[test]
    fn p_value_edges() {
        let dist = [3.0, 1.0, 2.0, 2.0];
        assert_eq!(p_value(&dist, 1.0, Tail::Le).unwrap(), 0.25);
        assert_eq!(p_value(&dist, f64::INFINITY, Tail::Le).unwrap(), 1.0);
        assert_eq!(p_value(&dist, 2.0, Tail::Ge).unwrap(), 0.75);
        assert_eq!(p_value(&[-3.0, 0.5, 3.0], -3.0, Tail::TwoSided).unwrap(), 2.0 / 3.0);
        assert!(p_value(&[], 0.0, Tail::Le).is_err());
        assert!(p_value(&dist, f64::NAN, Tail::Le).is_err());
        assert_eq!("two-sided".parse::<Tail>().unwrap(), Tail::TwoSided);
        assert!("up".parse::<Tail>().is_err());
    }

    #[test]
    fn datasets() {
        assert_eq!(Dataset::parse("1\n2\n\n3\n4\n").unwrap().values(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(Dataset::parse("[1, 2]").unwrap().n_qubits(), 1);
        assert!(Dataset::parse("1\n2\n3\n").is_err());
        assert!(Dataset::parse("1\n-2\n").is_err());
        assert!(Dataset::parse("0\n0\n").is_err());
        assert!(Dataset::parse("1\nx\n").is_err());
    }

    #[test]
    fn small_runs_are_deterministic() {
        let d = one_to_eight();
        let cfg = TestConfig::new(2, 5000, 11);
        let a = run_quantum_sim(&d, &cfg).unwrap();
        let b = run_quantum_sim(&d, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.classes.iter().map(|c| c.samples).sum::<u64>(), 5000);
        assert!(a.n_classes <= 28);

        let mut exact = cfg.clone();
        exact.exact = true;
        let r = run_quantum_sim(&d, &exact).unwrap();
        let c = r.class(&[3, 7]).unwrap();
        assert!((c.mean_hat - 6.0).abs() < 1e-12);

        let mut bad = cfg.clone();
        bad.shots = 0;
        assert!(run_quantum_sim(&d, &bad).is_err());
        bad = cfg;
        bad.m = 3;
        assert!(run_quantum_sim(&d, &bad).is_err());
    }
}
