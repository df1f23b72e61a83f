//! Command-line front end.
//!
//! Exit codes: `0`/`1` for yes/no answers, `2` when generic conjugacy is
//! inconclusive, `3` for an unsupported fixed element, `64` for usage
//! errors and `65` for malformed words.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baumslag::{
    parse_tokens, random_tokens, tower_tokens, ConjugacyAnswer, Group, GroupError, Letter, PcWord, Token,
};
use crate::oracle::{exact_word, fixed_conjugacy_reference, ExactGroup, Strategy, DEFAULT_BIT_CAP};
use crate::powercircuit::Marking;

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_UNSUPPORTED: i32 = 3;
const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Parser)]
#[command(name = "powcirc", version, about = "Word and conjugacy problems in BG(1,q) via power circuits")]
pub struct CliConfig {
    /// Worker threads for independent jobs in bench and selftest.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Seed for random suites; falls back to POWCIRC_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// The base q, with |q| >= 2.
    #[arg(short = 'q', allow_negative_numbers = true)]
    pub q: i64,
    /// Print `n=.. gamma=.. chains=.. support=.. ms=..` to stderr.
    #[arg(long)]
    pub stats: bool,
    /// Write the final circuit and result markings to this file.
    #[arg(long)]
    pub dump_circuit: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exit 0 if WORD is the identity, 1 otherwise.
    Wp {
        #[command(flatten)]
        common: Common,
        word: String,
    },
    /// Print the element of BS(1,q) that WORD denotes (exit 0), or exit 1.
    Member {
        #[command(flatten)]
        common: Common,
        word: String,
    },
    /// Print the Britton-reduced word and the circuit it lives on.
    Reduce {
        #[command(flatten)]
        common: Common,
        word: String,
    },
    /// Generic conjugacy: exit 0 conjugate, 1 not, 2 inconclusive.
    Conj {
        #[command(flatten)]
        common: Common,
        u: String,
        v: String,
    },
    /// Conjugacy to a fixed element G: exit 0 conjugate, 1 not.
    ConjFixed {
        #[command(flatten)]
        common: Common,
        /// Accept q < 0, where the criterion is not established.
        #[arg(long)]
        allow_negative: bool,
        g: String,
        w: String,
    },
    /// CSV timings for tower words and random words.
    Bench {
        /// Bases to run.
        #[arg(short = 'q', allow_negative_numbers = true, value_delimiter = ',', default_value = "2,3")]
        q: Vec<i64>,
        /// Largest tower index.
        #[arg(long, default_value_t = 12)]
        tower_max: u32,
        /// Random word lengths.
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512,1024,2048,4096")]
        lengths: Vec<usize>,
    },
    /// Run the property suites against the exact oracle.
    Selftest {
        /// Random words per base.
        #[arg(long, default_value_t = 2000)]
        cases: usize,
        /// Bit cap for the oracle.
        #[arg(long, default_value_t = DEFAULT_BIT_CAP)]
        size_cap: u64,
    },
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match CliConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let seed = cfg
        .seed
        .or_else(|| std::env::var("POWCIRC_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(DEFAULT_SEED);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let result = dispatch(cfg.command, seed, &pool, out, err);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                GroupError::BadBase(_) => EXIT_USAGE,
                GroupError::UnsupportedFixed(_) => EXIT_UNSUPPORTED,
                _ => EXIT_DATA,
            }
        }
    }
}

fn dispatch(
    cmd: Command,
    seed: u64,
    pool: &rayon::ThreadPool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, GroupError> {
    match cmd {
        Command::Wp { common, word } => {
            let mut job = Job::new(&common)?;
            let w = job.reduce(&word)?;
            let yes = w.is_identity();
            let _ = writeln!(out, "{}", if yes { "identity" } else { "not identity" });
            job.finish(&common, &w, err)?;
            Ok(if yes { 0 } else { 1 })
        }
        Command::Member { common, word } => {
            let mut job = Job::new(&common)?;
            let w = job.reduce(&word)?;
            let code = match w.as_bs() {
                Some(x) => {
                    let _ = writeln!(out, "{}", job.group.describe(x));
                    0
                }
                None => {
                    let _ = writeln!(out, "not in BS");
                    1
                }
            };
            job.finish(&common, &w, err)?;
            Ok(code)
        }
        Command::Reduce { common, word } => {
            let mut job = Job::new(&common)?;
            let w = job.reduce(&word)?;
            let (line, names) = word_line(&w);
            let _ = writeln!(out, "word: {line}");
            let _ = write!(out, "{}", dump_word(&job.group, &w, &names));
            job.finish(&common, &w, err)?;
            Ok(0)
        }
        Command::Conj { common, u, v } => {
            let mut job = Job::new(&common)?;
            let ans = job.group.conjugacy_generic(&u, &v)?;
            let (text, code) = match ans {
                ConjugacyAnswer::Conjugate => ("conjugate", 0),
                ConjugacyAnswer::NotConjugate => ("not conjugate", 1),
                ConjugacyAnswer::InconclusiveInBs => ("inconclusive: conjugate into BS", 2),
            };
            let _ = writeln!(out, "{text}");
            job.letters = count_letters(&u)? + count_letters(&v)?;
            job.finish(&common, &PcWord::identity(), err)?;
            Ok(code)
        }
        Command::ConjFixed { common, allow_negative, g, w } => {
            let mut job = Job::new(&common)?;
            job.group.allow_negative_fixed = allow_negative;
            let yes = job.group.conjugate_to_fixed(&g, &w)?;
            let _ = writeln!(out, "{}", if yes { "conjugate" } else { "not conjugate" });
            job.letters = count_letters(&g)? + count_letters(&w)?;
            job.finish(&common, &PcWord::identity(), err)?;
            Ok(if yes { 0 } else { 1 })
        }
        Command::Bench { q, tower_max, lengths } => {
            for &qq in &q {
                Group::new(qq)?;
            }
            let mut jobs: Vec<(i64, &'static str, usize, Vec<Token>)> = Vec::new();
            for &qq in &q {
                for n in 0..=tower_max {
                    jobs.push((qq, "tower", n as usize, tower_tokens(n)));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ qq as u64);
                for &len in &lengths {
                    jobs.push((qq, "random", len, random_tokens(&mut rng, len)));
                }
            }
            let rows: Vec<String> = pool.install(|| {
                jobs.par_iter()
                .map(|(qq, family, param, tokens)| {
                    let mut g = Group::new(*qq).expect("checked base");
                    let start = Instant::now();
                    let letters = g.letters_from_tokens(tokens);
                    let w = g.britton_reduce(&letters);
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    let exp_support: usize = w.elems.iter().map(|x| x.r.exponent.support()).sum();
                    format!(
                        "{family},{qq},{param},{},{},{},{},{},{},{ms:.3}",
                        tokens.len(),
                        g.circuit().len(),
                        g.circuit().chain_count(),
                        w.norm(),
                        exp_support,
                        w.beta_len(),
                    )
                })
                .collect()
            });
            let _ = writeln!(out, "family,q,param,n,gamma,chains,norm,exp_support,beta,ms");
            for r in rows {
                let _ = writeln!(out, "{r}");
            }
            Ok(0)
        }
        Command::Selftest { cases, size_cap } => {
            let results = pool.install(|| selftest(seed, cases, size_cap));
            let mut ok = true;
            for (name, pass, detail) in results {
                ok &= pass;
                let _ = writeln!(out, "{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
            }
            Ok(if ok { 0 } else { 1 })
        }
    }
}

fn count_letters(text: &str) -> Result<usize, GroupError> {
    Ok(parse_tokens(text)?.len())
}

/// One decision on one group, with timing for the stats line.
struct Job {
    group: Group,
    start: Instant,
    letters: usize,
}

impl Job {
    fn new(common: &Common) -> Result<Self, GroupError> {
        Ok(Self {
            group: Group::new(common.q)?,
            start: Instant::now(),
            letters: 0,
        })
    }

    fn reduce(&mut self, text: &str) -> Result<PcWord, GroupError> {
        let letters: Vec<Letter> = self.group.parse_word(text)?;
        self.letters = letters.len();
        Ok(self.group.britton_reduce(&letters))
    }

    fn finish(&self, common: &Common, w: &PcWord, err: &mut dyn Write) -> Result<(), GroupError> {
        if common.stats {
            let pc = self.group.circuit();
            let _ = writeln!(
                err,
                "n={} gamma={} chains={} support={} ms={:.3}",
                self.letters,
                pc.len(),
                pc.chain_count(),
                w.norm(),
                self.start.elapsed().as_secs_f64() * 1e3
            );
        }
        if let Some(path) = &common.dump_circuit {
            let (_, names) = word_line(w);
            std::fs::write(path, dump_word(&self.group, w, &names))
                .map_err(|e| GroupError::Malformed(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

/// The word with its elements named `x0, x1, ..`, and those names.
fn word_line(w: &PcWord) -> (String, Vec<Option<String>>) {
    let mut parts = Vec::new();
    let mut names = Vec::new();
    for (i, x) in w.elems.iter().enumerate() {
        if i > 0 {
            parts.push(w.stables[i - 1].to_string());
        }
        if x.is_identity() {
            names.push(None);
        } else {
            let name = format!("x{}", names.iter().flatten().count());
            parts.push(name.clone());
            names.push(Some(name));
        }
    }
    if parts.is_empty() {
        parts.push("1".into());
    }
    (parts.join(" "), names)
}

fn dump_word(g: &Group, w: &PcWord, names: &[Option<String>]) -> String {
    let mut labelled: Vec<(String, &Marking)> = Vec::new();
    for (x, name) in w.elems.iter().zip(names) {
        if let Some(name) = name {
            labelled.push((format!("{name}.mantissa"), &x.r.mantissa));
            labelled.push((format!("{name}.exponent"), &x.r.exponent));
            labelled.push((format!("{name}.m"), &x.m));
        }
    }
    let refs: Vec<(&str, &Marking)> = labelled.iter().map(|(n, m)| (n.as_str(), *m)).collect();
    g.circuit().dump(&refs)
}

type Outcome = (&'static str, bool, String);

/// Smaller versions of the acceptance properties, one line each.
pub fn selftest(seed: u64, cases: usize, size_cap: u64) -> Vec<Outcome> {
    let mut out: Vec<Outcome> = [2i64, 3, -2]
        .par_iter()
        .map(|&q| differential(q, seed, cases, size_cap))
        .collect();
    out.push(tower_check());
    out.push(fixed_check());
    out
}

fn differential(q: i64, seed: u64, cases: usize, size_cap: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (q as u64).wrapping_mul(0x9e37_79b9));
    let eg = ExactGroup::new(q, size_cap);
    let (mut agree, mut skipped) = (0usize, 0usize);
    let mut bad = None;
    for _ in 0..cases {
        let len = rand::Rng::gen_range(&mut rng, 0..=14);
        let tokens = random_tokens(&mut rng, len);
        let mut g = Group::new(q).expect("valid base");
        let letters = g.letters_from_tokens(&tokens);
        let w = g.britton_reduce(&letters);
        let Ok(reference) = eg.britton_reduce_exact(&eg.letters(&tokens), Strategy::Leftmost) else {
            skipped += 1;
            continue;
        };
        let same = w.is_identity() == reference.is_empty()
            && match exact_word(&g, &w, size_cap) {
                Ok(ours) => eg.equal(&ours, &reference).unwrap_or(true),
                Err(_) => true,
            };
        if same {
            agree += 1;
        } else if bad.is_none() {
            bad = Some(crate::baumslag::tokens_to_text(&tokens));
        }
    }
    let name = match q {
        2 => "word problem vs oracle, q=2",
        3 => "word problem vs oracle, q=3",
        _ => "word problem vs oracle, q=-2",
    };
    let detail = match &bad {
        None => format!("{agree} agree, {skipped} skipped"),
        Some(w) => format!("mismatch on \"{w}\""),
    };
    (name, bad.is_none(), detail)
}

fn tower_check() -> Outcome {
    let mut failures = Vec::new();
    for q in [2i64, 3] {
        for n in 0..=8 {
            let mut g = Group::new(q).expect("valid base");
            let letters = g.letters_from_tokens(&tower_tokens(n));
            let w = g.britton_reduce(&letters);
            if !crate::baumslag::is_tower_result(&g, &w, n) {
                failures.push(format!("q={q} n={n}"));
            }
        }
    }
    let pass = failures.is_empty();
    ("tower words reduce to t^tow(n)", pass, if pass { "n <= 8, q in {2,3}".into() } else { failures.join(", ") })
}

fn fixed_check() -> Outcome {
    let mut checked = 0;
    let mut bad = None;
    for r in -6i64..=6 {
        for m in 1..=3 {
            for s in -6i64..=6 {
                for n in 1..=3 {
                    let mut g = Group::new(2).expect("valid base");
                    let ours = g.conjugate_to_fixed(&format!("a^{r} t^{m}"), &format!("a^{s} t^{n}"));
                    let want = fixed_conjugacy_reference(2, (r, m), (s, n));
                    checked += 1;
                    if ours != Ok(want) && bad.is_none() {
                        bad = Some(format!("g=({r},{m}) w=({s},{n})"));
                    }
                }
            }
        }
    }
    let detail = bad.clone().unwrap_or_else(|| format!("{checked} pairs agree"));
    ("fixed-element conjugacy vs congruences, q=2", bad.is_none(), detail)
}
