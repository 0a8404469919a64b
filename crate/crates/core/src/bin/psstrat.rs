use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use psstrat::best_response::{
    brute_force_best_response, dl_best_response, eu_best_response_2agents, Objective, DEFAULT_BOUND,
};
use psstrat::experiments::{render_csv, run_experiment, ExperimentConfig, PrefModel, UtilityModel};
use psstrat::format::{
    assignment_to_json, parse_profile, parse_utilities, render_assignment, render_profile,
};
use psstrat::nash::{
    best_response_dynamics, crossout_profile, is_nash_equilibrium, parse_trace, render_trace,
    threat_profile, verify_dynamics_trace, DeviationSearch, DeviatorRule, Relation,
};
use psstrat::ps::{run_ps, share_row};
use psstrat::scalar::to_fixed;
use psstrat::{Assignment, PreferenceList, Profile, Rational, UtilityProfile};

#[derive(Parser)]
#[command(
    name = "psstrat",
    version,
    about = "Probabilistic Serial assignment and strategic analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run PS on a profile and print the assignment.
    Ps {
        #[arg(long)]
        profile: PathBuf,
        /// Also print the eating stages.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
        /// Aligned decimal rendering for reading.
        #[arg(long)]
        pretty: bool,
    },
    /// Best response of one agent (1-based) against the others' lists.
    BestResponse {
        #[arg(long, value_enum)]
        mode: BrMode,
        #[arg(long)]
        agent: usize,
        #[arg(long)]
        profile: PathBuf,
        /// Utilities for `brute` (EU objective); DL is used without them.
        #[arg(long)]
        utilities: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Two-agent equilibrium constructions and equilibrium checks.
    Nash {
        #[arg(long, value_enum)]
        mode: NashMode,
        /// Input of `threat` and `crossout`.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        reported: Option<PathBuf>,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        utilities: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RelationArg::Dl)]
        relation: RelationArg,
        #[arg(long, value_enum, default_value_t = SearchArg::Exhaustive)]
        search: SearchArg,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Expected-utility best-response dynamics, or a check of a saved trace.
    Dynamics {
        /// Starting profile; also the truth unless `--truth` is given.
        #[arg(long, required_unless_present = "check")]
        profile: Option<PathBuf>,
        #[arg(long)]
        utilities: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Comma separated 1-based deviators, e.g. "3,1,3".
        #[arg(long)]
        script: Option<String>,
        #[arg(long, value_enum, default_value_t = RuleArg::Rotation)]
        rule: RuleArg,
        #[arg(long, default_value_t = 100)]
        max_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Verify this trace file instead of running.
        #[arg(long)]
        check: Option<PathBuf>,
        /// With `--check`, also require every step to be an optimal response.
        #[arg(long)]
        strict: bool,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Monte-Carlo manipulability experiment; writes CSV.
    Experiment {
        #[arg(long, value_enum, default_value_t = PrefArg::Ic)]
        pref_model: PrefArg,
        #[arg(long, value_enum, default_value_t = UtilArg::Random)]
        utility_model: UtilArg,
        /// `A..B` or a single count.
        #[arg(long, default_value = "1..5", value_parser = parse_range)]
        agents: RangeInclusive<usize>,
        #[arg(long, default_value = "1..5", value_parser = parse_range)]
        houses: RangeInclusive<usize>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        bound: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BrMode {
    Dl,
    Eu2,
    Brute,
}

#[derive(Clone, Copy, ValueEnum)]
enum NashMode {
    Threat,
    Crossout,
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationArg {
    Dl,
    Eu,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchArg {
    Exhaustive,
    Polynomial,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Rotation,
    FirstFound,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrefArg {
    Ic,
    Usp,
}

#[derive(Clone, Copy, ValueEnum)]
enum UtilArg {
    Random,
    Borda,
    Exp,
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad count `{t}`"))
    };
    match s.split_once("..") {
        Some((a, b)) => Ok(num(a)?..=num(b.trim_start_matches('='))?),
        None => {
            let v = num(s)?;
            Ok(v..=v)
        }
    }
}

type Failure = Box<dyn std::error::Error>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn load_profile(path: &Path) -> Result<Profile, Failure> {
    parse_profile(&read(path)?).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn load_utilities(path: &Path) -> Result<UtilityProfile, Failure> {
    parse_utilities(&read(path)?).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn agent_index(agent: usize, profile: &Profile) -> Result<usize, Failure> {
    if agent == 0 || agent > profile.agents() {
        return Err(format!("agent {agent} is not in 1..={}", profile.agents()).into());
    }
    Ok(agent - 1)
}

fn row_line(row: &[Rational]) -> String {
    row.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("\t")
}

fn list_line(list: &PreferenceList) -> String {
    list.to_string()
}

fn pretty(a: &Assignment) -> String {
    let mut out = String::new();
    for (i, row) in a.rows().iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .map(|x| format!("{:>8}", to_fixed(x, 4)))
            .collect();
        out.push_str(&format!("agent {:>2}:{}\n", i + 1, cells.concat()));
    }
    out
}

fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, Failure> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build()?;
            Ok(pool.install(f))
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()).into()),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_ps(profile: &Path, trace: bool, json: bool, pretty_out: bool) -> Result<String, Failure> {
    let p = load_profile(profile)?;
    let (a, t) = run_ps::<Rational>(&p);
    let mut out = if json {
        assignment_to_json(&a) + "\n"
    } else if pretty_out {
        pretty(&a)
    } else {
        render_assignment(&a)
    };
    if trace {
        for s in &t.stages {
            let targets: Vec<String> = s
                .targets
                .iter()
                .map(|t| t.map_or_else(|| "-".to_string(), |h| (h + 1).to_string()))
                .collect();
            out.push_str(&format!(
                "# stage {} {} {}\n",
                s.start,
                s.end,
                targets.join(" ")
            ));
        }
        let est: Vec<String> = t
            .eating_start
            .iter()
            .map(|e| {
                e.as_ref()
                    .map_or_else(|| "-".to_string(), |x| x.to_string())
            })
            .collect();
        out.push_str(&format!("# est {}\n", est.join(" ")));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Ps {
            profile,
            trace,
            json,
            pretty,
        } => emit(None, &cmd_ps(&profile, trace, json, pretty)?),
        Command::BestResponse {
            mode,
            agent,
            profile,
            utilities,
            bound,
            threads,
        } => {
            let p = load_profile(&profile)?;
            let agent = agent_index(agent, &p)?;
            let report = match mode {
                BrMode::Dl => dl_best_response::<Rational>(&p, agent)?.report,
                BrMode::Eu2 => eu_best_response_2agents(&p, agent)?,
                BrMode::Brute => {
                    let u = utilities.as_deref().map(load_utilities).transpose()?;
                    let objective = match &u {
                        Some(u) => {
                            if u.agents() != p.agents() {
                                return Err("utilities and profile differ in agent count".into());
                            }
                            Objective::Eu(u.row(agent))
                        }
                        None => Objective::Dl,
                    };
                    with_threads(threads, || {
                        brute_force_best_response(&p, agent, objective, bound)
                    })??
                    .report
                }
            };
            let row = share_row::<Rational>(&p, agent, &report);
            emit(
                None,
                &format!("{}\n{}\n", list_line(&report), row_line(&row)),
            )
        }
        Command::Nash {
            mode,
            profile,
            reported,
            truth,
            utilities,
            relation,
            search,
            bound,
            threads,
        } => match mode {
            NashMode::Threat | NashMode::Crossout => {
                let path = profile.ok_or("--profile is required for this mode")?;
                let p = load_profile(&path)?;
                let q = match mode {
                    NashMode::Threat => threat_profile(&p)?,
                    _ => crossout_profile(&p)?,
                };
                let a = run_ps::<Rational>(&q).0;
                emit(
                    None,
                    &format!("{}\n{}", render_profile(&q), render_assignment(&a)),
                )
            }
            NashMode::Verify => {
                let reported = load_profile(&reported.ok_or("--reported is required")?)?;
                let truth = load_profile(&truth.ok_or("--truth is required")?)?;
                let u = utilities.as_deref().map(load_utilities).transpose()?;
                let relation = match relation {
                    RelationArg::Dl => Relation::Dl,
                    RelationArg::Eu => {
                        Relation::Eu(u.as_ref().ok_or("--utilities is required for eu")?)
                    }
                };
                let search = match search {
                    SearchArg::Exhaustive => DeviationSearch::Exhaustive,
                    SearchArg::Polynomial => DeviationSearch::Polynomial,
                };
                let w = with_threads(threads, || {
                    is_nash_equilibrium(&reported, &truth, relation, search, bound)
                })??;
                let text = match w {
                    None => "OK\n".to_string(),
                    Some(w) => {
                        let mut s = format!(
                            "DEVIATION agent={} report={}\nbefore\t{}\nafter\t{}\n",
                            w.agent + 1,
                            list_line(&w.report).replace(' ', ","),
                            row_line(&w.before),
                            row_line(&w.after)
                        );
                        if let Some((b, a)) = w.utilities {
                            s.push_str(&format!("eu\t{b}\t{a}\n"));
                        }
                        s
                    }
                };
                emit(None, &text)
            }
        },
        Command::Dynamics {
            profile,
            utilities,
            truth,
            script,
            rule,
            max_steps,
            out,
            check,
            strict,
            bound,
            threads,
        } => {
            let u = load_utilities(&utilities)?;
            if let Some(trace_path) = check {
                let entries = parse_trace(&read(&trace_path)?)?;
                let truth = match truth.or(profile) {
                    Some(t) => load_profile(&t)?,
                    None => entries[0].profile.clone(),
                };
                let rep = with_threads(threads, || {
                    verify_dynamics_trace(&entries, &truth, &u, strict, bound)
                })??;
                let cycle = rep
                    .cycle
                    .map_or_else(|| "-".to_string(), |(a, b)| format!("{a},{b}"));
                return match rep.violation {
                    None => emit(
                        None,
                        &format!("VALID steps={} cycle={cycle}\n", entries.len() - 1),
                    ),
                    Some(v) => emit(None, &format!("INVALID {v:?}\n")),
                };
            }
            let start = load_profile(&profile.ok_or("--profile is required")?)?;
            let truth = match truth {
                Some(t) => load_profile(&t)?,
                None => start.clone(),
            };
            let rule = match script {
                Some(s) => DeviatorRule::Scripted(
                    s.split(',')
                        .map(|t| match t.trim().parse::<usize>() {
                            Ok(a) if a >= 1 => Ok(a - 1),
                            _ => Err(format!("bad deviator `{t}` in script")),
                        })
                        .collect::<Result<_, _>>()?,
                ),
                None => match rule {
                    RuleArg::Rotation => DeviatorRule::Rotation,
                    RuleArg::FirstFound => DeviatorRule::FirstFound,
                },
            };
            let trace = with_threads(threads, || {
                best_response_dynamics(&start, &truth, &u, &rule, max_steps, bound)
            })??;
            let cycle = trace
                .cycle
                .map_or_else(|| "-".to_string(), |(a, b)| format!("{a},{b}"));
            let summary = format!(
                "steps={} stop={:?} cycle={cycle}\n",
                trace.len(),
                trace.stop
            );
            match out {
                Some(path) => {
                    emit(Some(&path), &render_trace(&trace))?;
                    emit(None, &summary)
                }
                None => emit(None, &format!("{}\n# {summary}", render_trace(&trace))),
            }
        }
        Command::Experiment {
            pref_model,
            utility_model,
            agents,
            houses,
            samples,
            seed,
            bound,
            out,
            threads,
        } => {
            let config = ExperimentConfig {
                pref_model: match pref_model {
                    PrefArg::Ic => PrefModel::Ic,
                    PrefArg::Usp => PrefModel::Usp,
                },
                utility_model: match utility_model {
                    UtilArg::Random => UtilityModel::Random,
                    UtilArg::Borda => UtilityModel::Borda,
                    UtilArg::Exp => UtilityModel::Exp,
                },
                agents,
                houses,
                samples,
                seed,
                bound,
            };
            let rows = with_threads(threads, || run_experiment(&config))??;
            emit(out.as_deref(), &render_csv(&rows))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
