use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use permq::circuit::{emit_qasm, synth_word};
use permq::corona::build_sym_group_graph;
use permq::perm::{decompose, enumerate_sn, inversion_count, Permutation, Word};
use permq::randtest::{run_quantum_sim, Dataset, Tail, TestConfig};
use permq::rng::StreamFamily;
use permq::sampling::{prepare_register, RestrictionSpec};
use permq::Error;

#[derive(Parser)]
#[command(
    name = "permq",
    version,
    about = "Permutations as adjacent transpositions: enumeration, sampling, circuits, randomization tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream every permutation of N symbols with its word, one JSON line each.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Write a permutation as a product of adjacent transpositions.
    Decompose {
        /// JSON array such as [3,2,0,1], or {"n":..,"perm":[..]}.
        #[arg(long)]
        perm: String,
    },
    /// Draw random permutations from the ancilla-register sampler.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count: u64,
        #[arg(long)]
        seed: u64,
        /// Restriction file: {"N":..,"slots":[{"k":..,"mode":"full|barred|pinned|skipped","pin":..}]}.
        #[arg(long)]
        restrict: Option<PathBuf>,
    },
    /// Build the circuit of a word on 2^qubits basis states.
    Synth {
        /// JSON letter array such as [1,0], {"n":..,"word":[..]}, or tokens "s1 s0".
        #[arg(long)]
        word: String,
        #[arg(long)]
        qubits: usize,
        /// Rewrite pattern-controlled gates with X conjugations.
        #[arg(long)]
        lower: bool,
        /// Emit OpenQASM 3 instead of JSON.
        #[arg(long)]
        qasm: bool,
    },
    /// Two-sample randomization test on a dataset of 2^n values.
    Randtest {
        /// CSV (one value per line) or JSON array.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        shots: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        exact: bool,
        /// le, ge or two-sided.
        #[arg(long, default_value = "le")]
        tail: Tail,
        /// Expected number of qubits; checked against the dataset length.
        #[arg(long)]
        n: Option<usize>,
        /// Observed statistic; defaults to the split picked by the identity.
        #[arg(long, allow_negative_numbers = true)]
        t_star: Option<f64>,
    },
    /// Build the labeled nested-corona graph of S_N.
    Corona {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dot: bool,
    },
}

enum CliError {
    Lib(Error),
    Io(io::Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl CliError {
    fn to_json(&self) -> serde_json::Value {
        match self {
            CliError::Lib(e) => json!({ "error": e.to_string(), "kind": e.kind() }),
            CliError::Io(e) => json!({ "error": e.to_string(), "kind": "io" }),
            CliError::Usage(msg) => json!({ "error": msg, "kind": "usage" }),
        }
    }
}

fn parse_perm(text: &str) -> Result<Permutation, CliError> {
    let text = text.trim();
    if text.starts_with('{') {
        return serde_json::from_str(text).map_err(|e| Error::InvalidPermutation(e.to_string()).into());
    }
    let entries: Vec<usize> =
        serde_json::from_str(text).map_err(|e| Error::InvalidPermutation(format!("{text:?}: {e}")))?;
    Ok(Permutation::new(entries)?)
}

fn parse_word(text: &str, n_symbols: usize) -> Result<Word, CliError> {
    let text = text.trim();
    if text.starts_with('{') {
        let word: Word = serde_json::from_str(text).map_err(|e| Error::Domain(e.to_string()))?;
        return Ok(word);
    }
    if text.starts_with('[') {
        let letters: Vec<usize> = serde_json::from_str(text).map_err(|e| Error::Domain(format!("{text:?}: {e}")))?;
        return Ok(Word::new(n_symbols, letters)?);
    }
    Ok(Word::parse_tokens(n_symbols, text)?)
}

fn word_json(word: &Word, perm: &Permutation) -> serde_json::Value {
    json!({ "perm": perm.as_slice(), "word": word.letters(), "label": word.to_string() })
}

fn run(command: Command, out: &mut impl Write) -> Result<(), CliError> {
    match command {
        Command::Enumerate { n, limit } => {
            for (perm, word) in enumerate_sn(n)?.take(limit.unwrap_or(usize::MAX)) {
                writeln!(out, "{}", word_json(&word, &perm))?;
            }
        }
        Command::Decompose { perm } => {
            let perm = parse_perm(&perm)?;
            let word = decompose(&perm);
            let mut v = word_json(&word, &perm);
            v["length"] = json!(word.len());
            v["inversions"] = json!(inversion_count(&perm));
            writeln!(out, "{v}")?;
        }
        Command::Sample { n, count, seed, restrict } => {
            let spec = match restrict {
                Some(path) => Some(RestrictionSpec::from_json(&std::fs::read_to_string(path)?)?),
                None => None,
            };
            let register = prepare_register(n, spec.as_ref())?;
            let streams = StreamFamily::new(seed, "cli/sample");
            for i in 0..count {
                let outcome = register.measure(&mut streams.rng(i));
                writeln!(out, "{}", serde_json::to_string(&outcome)?)?;
            }
        }
        Command::Synth { word, qubits, lower, qasm } => {
            let word = parse_word(&word, 1usize.checked_shl(qubits as u32).unwrap_or(0).max(2))?;
            let mut circuit = synth_word(&word, qubits)?;
            if lower {
                circuit = circuit.lowered();
            }
            if qasm {
                write!(out, "{}", emit_qasm(&circuit)?)?;
            } else {
                writeln!(out, "{}", serde_json::to_string(&circuit)?)?;
            }
        }
        Command::Randtest { data, m, shots, seed, exact, tail, n, t_star } => {
            let dataset = Dataset::load(&data)?;
            if let Some(n) = n {
                if dataset.n_qubits() != n {
                    return Err(Error::SizeMismatch { expected: 1 << n, found: dataset.len() }.into());
                }
            }
            let config = TestConfig { m, shots, seed, exact, tail, t_star };
            let report = run_quantum_sim(&dataset, &config)?;
            writeln!(out, "{}", serde_json::to_string(&report)?)?;
        }
        Command::Corona { n, dot } => {
            let graph = build_sym_group_graph(n)?;
            if dot {
                write!(out, "{}", graph.to_dot())?;
            } else {
                writeln!(out, "{}", graph.to_json())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", CliError::Usage(e.to_string().trim().to_string()).to_json());
            return ExitCode::from(2);
        }
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli.command, &mut out).and_then(|()| out.flush().map_err(CliError::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
