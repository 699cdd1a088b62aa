//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 for data errors (unreadable or invalid
//! games, off-simplex profiles, failed analyses), 2 for usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::document::{format_number, parse_game, parse_table, write_game};
use crate::equilibrium::{
    find_equilibrium, pure_equilibria, pure_equilibrium_reports, support_enumeration_2p,
    EquilibriumReport, SearchConfig, MAX_SUPPORT_STRATEGIES,
};
use crate::error::Error;
use crate::fiber::{generic_rank, trace_fiber, TraceConfig, DEFAULT_GENERIC_SAMPLES};
use crate::game::{validate_game, GameSpec, EVAL_TOL, SIMPLEX_TOL};
use crate::generate::{gen_builtin, gen_random};
use crate::linear::{dimension_bound, extract_affine, test_joint_affinity, DimensionBound};
use crate::payoff::{is_zero_sum, total_payoff};
use crate::profile::StrategyProfile;

#[derive(Debug, Parser)]
#[command(
    name = "gamefibers",
    version,
    about = "Normal-form games: payoffs, level sets and equilibria"
)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a game document; lists defects one per line.
    Validate {
        /// Game document; standard input when omitted or `-`.
        file: Option<PathBuf>,
    },
    /// Expected payoff of every player at a profile.
    Eval {
        file: Option<PathBuf>,
        /// Probabilities per player separated by ';', entries by ',', or `uniform`.
        #[arg(long, allow_hyphen_values = true)]
        profile: String,
    },
    /// Dimensions, generic rank and level-set structure.
    Analyze {
        file: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_GENERIC_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Pure equilibria, support enumeration (two players) and Nash-map search.
    Equilibria {
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Follow a level set from a start profile.
    Trace {
        file: Option<PathBuf>,
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 0)]
        direction: usize,
        #[arg(long, default_value_t = 0.02)]
        step: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_GENERIC_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a game document to standard output.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// `rps` or `bar`.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    builtin: Option<String>,
    /// `n=<players> m=<counts, comma-separated> seed=<seed>`.
    #[arg(long, num_args = 1..)]
    random: Option<Vec<String>>,
    #[arg(long, requires = "random")]
    zero_sum: bool,
    #[arg(long, requires = "random")]
    affine: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    /// A report that belongs on stdout but still signals failure.
    Rejected(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = Result<String, Failure>;

/// Runs the CLI with the given arguments and streams; returns the exit code.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let outcome = dispatch(&cli, stdin);
    match outcome {
        Ok(text) => {
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(Failure::Rejected(text)) => {
            let _ = stdout.write_all(text.as_bytes());
            1
        }
    }
}

fn dispatch(cli: &Cli, stdin: &mut dyn Read) -> CmdResult {
    let json = cli.json;
    match &cli.command {
        Command::Validate { file } => validate(&read_input(file.as_ref(), stdin)?, json),
        Command::Eval { file, profile } => {
            let g = load(file.as_ref(), stdin)?;
            eval(&g, profile, json)
        }
        Command::Analyze {
            file,
            samples,
            seed,
        } => {
            let g = load(file.as_ref(), stdin)?;
            let report = analyze(&g, *samples, *seed)?;
            Ok(if json {
                to_json(&report)
            } else {
                report.to_text()
            })
        }
        Command::Equilibria { file, eps, seed } => {
            let g = load(file.as_ref(), stdin)?;
            equilibria(&g, *eps, *seed, json)
        }
        Command::Trace {
            file,
            start,
            direction,
            step,
            steps,
            tol,
            samples,
            seed,
        } => {
            let g = load(file.as_ref(), stdin)?;
            let s0 = parse_profile(&g, start)?;
            let config = TraceConfig {
                direction: *direction,
                step: *step,
                max_steps: *steps,
                tol: *tol,
                generic_rank: Some(generic_rank(&g, *samples, *seed)),
            };
            trace(&g, &s0, &config, json)
        }
        Command::Gen(args) => gen(args),
    }
}

fn read_input(file: Option<&PathBuf>, stdin: &mut dyn Read) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    match file {
        Some(path) if path.as_os_str() != "-" => {
            buf = std::fs::read(path)
                .map_err(|e| Failure::Data(format!("cannot read {}: {e}", path.display())))?;
        }
        _ => {
            stdin
                .read_to_end(&mut buf)
                .map_err(|e| Failure::Data(format!("cannot read standard input: {e}")))?;
        }
    }
    Ok(buf)
}

fn load(file: Option<&PathBuf>, stdin: &mut dyn Read) -> Result<GameSpec, Failure> {
    Ok(parse_game(&read_input(file, stdin)?)?)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Parses `uniform` or `a,b,c;x,y,z`. Blocks must be on their simplices
/// within the default tolerance; they are never silently rescaled beyond it.
fn parse_profile(g: &GameSpec, text: &str) -> Result<StrategyProfile, Failure> {
    let text = text.trim();
    if text == "uniform" {
        return Ok(StrategyProfile::uniform(g.strategy_counts()));
    }
    let blocks = text
        .split(';')
        .map(|block| {
            block
                .split(',')
                .map(|x| {
                    x.trim().parse::<f64>().map_err(|_| {
                        Failure::Usage(format!("malformed probability '{}'", x.trim()))
                    })
                })
                .collect::<Result<Vec<f64>, Failure>>()
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let s = StrategyProfile::with_tolerance(blocks, SIMPLEX_TOL)?;
    s.check_shape(g)?;
    Ok(s)
}

fn validate(doc: &[u8], json: bool) -> CmdResult {
    let table = parse_table(doc)?;
    let defects = validate_game(&table);
    let text = if json {
        to_json(&json!({ "valid": defects.is_empty(), "defects": defects }))
    } else if defects.is_empty() {
        "valid\n".to_string()
    } else {
        defects.iter().map(|d| format!("{d}\n")).collect()
    };
    if defects.is_empty() {
        Ok(text)
    } else {
        Err(Failure::Rejected(text))
    }
}

fn eval(g: &GameSpec, profile: &str, json: bool) -> CmdResult {
    let s = parse_profile(g, profile)?;
    let payoff = total_payoff(g, &s)?;
    if json {
        return Ok(to_json(&json!({
            "profile": s,
            "payoffs": payoff,
        })));
    }
    let mut out = String::new();
    for (name, v) in g.player_names().iter().zip(payoff.values()) {
        let _ = writeln!(out, "{name}: {}", format_number(*v));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub players: usize,
    pub strategy_counts: Vec<usize>,
    pub total_strategies: usize,
    pub pure_profiles: usize,
    pub zero_sum: bool,
    pub jointly_affine: bool,
    pub samples: usize,
    pub seed: u64,
    pub generic_rank: usize,
    pub generic_fiber_dimension: usize,
    pub affine: Option<AffineSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AffineSummary {
    pub rows: usize,
    pub zero_sum_reduced: bool,
    #[serde(flatten)]
    pub bound: DimensionBound,
}

pub fn analyze(g: &GameSpec, samples: usize, seed: u64) -> Result<AnalyzeReport, Error> {
    let zero_sum = is_zero_sum(g, EVAL_TOL);
    let jointly_affine = test_joint_affinity(g, EVAL_TOL);
    let k = generic_rank(g, samples, seed);
    let affine = if jointly_affine {
        let rep = extract_affine(g, zero_sum)?;
        Some(AffineSummary {
            rows: rep.rows(),
            zero_sum_reduced: rep.zero_sum_reduced,
            bound: dimension_bound(g, &rep),
        })
    } else {
        None
    };
    Ok(AnalyzeReport {
        players: g.players(),
        strategy_counts: g.strategy_counts().to_vec(),
        total_strategies: g.total_strategies(),
        pure_profiles: g.profile_count(),
        zero_sum,
        jointly_affine,
        samples,
        seed,
        generic_rank: k,
        generic_fiber_dimension: g.reduced_dim() - k,
        affine,
    })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

impl AnalyzeReport {
    pub fn to_text(&self) -> String {
        let counts: Vec<String> = self.strategy_counts.iter().map(|m| m.to_string()).collect();
        let mut out = String::new();
        let _ = writeln!(out, "players n: {}", self.players);
        let _ = writeln!(out, "strategy counts: {}", counts.join(" "));
        let _ = writeln!(out, "total strategies N: {}", self.total_strategies);
        let _ = writeln!(out, "pure profiles M: {}", self.pure_profiles);
        let _ = writeln!(out, "zero-sum: {}", yes_no(self.zero_sum));
        let _ = writeln!(out, "jointly affine: {}", yes_no(self.jointly_affine));
        let _ = writeln!(
            out,
            "generic rank k: {} (samples {}, seed {})",
            self.generic_rank, self.samples, self.seed
        );
        let _ = writeln!(
            out,
            "generic fiber dimension N-n-k: {}",
            self.generic_fiber_dimension
        );
        match &self.affine {
            None => out.push_str("affine level sets: not applicable\n"),
            Some(a) => {
                let b = &a.bound;
                let _ = writeln!(
                    out,
                    "affine payoff rows: {}{}",
                    a.rows,
                    if a.zero_sum_reduced {
                        " (last component dropped, zero-sum)"
                    } else {
                        ""
                    }
                );
                let _ = writeln!(out, "affine rank: {}", b.rank);
                let _ = writeln!(out, "affine nullity (level-set dimension): {}", b.nullity);
                let _ = writeln!(
                    out,
                    "condition: every player has 2+ strategies: {}",
                    yes_no(b.all_players_have_two)
                );
                let _ = writeln!(
                    out,
                    "condition: some player has 3+ strategies: {}",
                    yes_no(b.many_strategies)
                );
                let _ = writeln!(out, "condition: zero-sum: {}", yes_no(b.zero_sum));
                match b.bound {
                    Some(k) => {
                        let formula = if b.zero_sum && a.zero_sum_reduced {
                            "N-2n+1"
                        } else {
                            "N-2n"
                        };
                        let _ = writeln!(out, "level-set dimension bound: {k} ({formula})");
                        let _ = writeln!(out, "bound satisfied: {}", yes_no(b.satisfied));
                    }
                    None => out.push_str("level-set dimension bound: none (conditions not met)\n"),
                }
            }
        }
        out
    }
}

fn equilibrium_line(prefix: &str, report: &EquilibriumReport) -> String {
    format!(
        "{prefix} profile {} epsilon {}\n",
        report.profile,
        format_number(report.epsilon)
    )
}

fn equilibria(g: &GameSpec, eps: f64, seed: u64, json: bool) -> CmdResult {
    let pure = pure_equilibrium_reports(g, eps)?;
    let support = if g.players() != 2 {
        Err(format!("{} players", g.players()))
    } else if g
        .strategy_counts()
        .iter()
        .any(|&m| m > MAX_SUPPORT_STRATEGIES)
    {
        Err(format!("more than {MAX_SUPPORT_STRATEGIES} strategies"))
    } else {
        Ok(support_enumeration_2p(g, eps)?)
    };
    let config = SearchConfig {
        seed,
        eps,
        ..SearchConfig::default()
    };
    let search = find_equilibrium(g, &config)?;

    if json {
        return Ok(to_json(&json!({
            "pure": pure,
            "support": support.as_ref().ok(),
            "nash_map": search,
        })));
    }
    let mut out = String::new();
    if pure.is_empty() {
        out.push_str("pure: none\n");
    }
    for (vertex, report) in pure_equilibria(g).iter().zip(&pure) {
        out.push_str(&equilibrium_line(
            &format!("pure {}", g.profile_label(vertex)),
            report,
        ));
    }
    match &support {
        Ok(found) if found.is_empty() => out.push_str("support: none\n"),
        Ok(found) => {
            for report in found {
                out.push_str(&equilibrium_line("support", report));
            }
        }
        Err(reason) => {
            let _ = writeln!(out, "support: skipped ({reason})");
        }
    }
    let status = if search.converged {
        "converged"
    } else {
        "not converged"
    };
    out.push_str(&equilibrium_line(&format!("nash_map {status}"), &search));
    Ok(out)
}

fn trace(g: &GameSpec, s0: &StrategyProfile, config: &TraceConfig, json: bool) -> CmdResult {
    let path = trace_fiber(g, s0, config)?;
    if json {
        return Ok(to_json(&path));
    }
    let mut out = String::new();
    for p in &path.points {
        let coords: Vec<String> = p.coords().iter().map(|&x| format_number(x)).collect();
        let _ = writeln!(out, "{}", coords.join(" "));
    }
    let target: Vec<String> = path
        .target_payoff
        .values()
        .iter()
        .map(|&x| format_number(x))
        .collect();
    let _ = writeln!(out, "points: {}", path.points.len());
    let _ = writeln!(out, "target: {}", target.join(" "));
    let _ = writeln!(out, "drift: {}", format_number(path.max_payoff_drift));
    let _ = writeln!(out, "terminated: {}", path.terminated_by);
    Ok(out)
}

fn gen(args: &GenArgs) -> CmdResult {
    if let Some(name) = &args.builtin {
        return Ok(write_game(&gen_builtin(name)?));
    }
    let tokens = args.random.as_deref().unwrap_or_default();
    let mut players: Option<usize> = None;
    let mut counts: Option<Vec<usize>> = None;
    let mut seed = 0u64;
    for token in tokens {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("expected key=value, got '{token}'")))?;
        let bad = || Failure::Usage(format!("malformed value in '{token}'"));
        match key {
            "n" => players = Some(value.parse().map_err(|_| bad())?),
            "m" => {
                counts = Some(
                    value
                        .split(',')
                        .map(|x| x.trim().parse().map_err(|_| bad()))
                        .collect::<Result<_, _>>()?,
                )
            }
            "seed" => seed = value.parse().map_err(|_| bad())?,
            other => return Err(Failure::Usage(format!("unknown key '{other}'"))),
        }
    }
    let counts = counts.ok_or_else(|| Failure::Usage("missing m=<counts>".into()))?;
    let players = players.unwrap_or(counts.len());
    // a single count applies to every player
    let counts = if counts.len() == 1 {
        vec![counts[0]; players]
    } else {
        counts
    };
    let g = gen_random(players, &counts, seed, args.zero_sum, args.affine)?;
    Ok(write_game(&g))
}
