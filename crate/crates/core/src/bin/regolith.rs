use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use regolith::campaign::{ExportKind, Session, SessionSpec, SiteConfig, Store};
use regolith::intrusion::io::read_curve;
use regolith::intrusion::{classify_regime, fit_stiffness, strength_summary};
use regolith::leg::GaitKind;
use regolith::sampler::{Feedback, Hypothesis, HypothesisShape, Objective, Outcome};

#[derive(Parser)]
#[command(
    name = "regolith",
    version,
    about = "Regolith strength campaigns from the command line"
)]
struct Cli {
    /// Directory holding one subdirectory per session.
    #[arg(long, env = "REGOLITH_STORE", default_value = "sessions", global = true)]
    store: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a session from a site preset or site file.
    New {
        /// `white_sands_transect`, `mt_hood_patchy`, or a path to a TOML file.
        #[arg(long, default_value = "white_sands_transect")]
        site: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// increasing | decreasing | unimodal:<peak> | knots:<x,t;x,t;...>
        #[arg(long)]
        hypothesis: Option<String>,
        #[arg(long, value_parser = parse_gait)]
        gait: Option<GaitKind>,
        #[arg(long)]
        id: Option<String>,
    },
    /// Measure an initial list of locations.
    Plan {
        id: String,
        /// Normalized path coordinates (metres with --metres).
        #[arg(required_unless_present = "flags", allow_negative_numbers = true)]
        locations: Vec<f64>,
        #[arg(long)]
        metres: bool,
        /// Measure the site's flags first.
        #[arg(long)]
        flags: bool,
        #[arg(long, value_parser = parse_gait)]
        gait: Option<GaitKind>,
    },
    /// Show the current suggestion round.
    Suggest {
        id: String,
        #[arg(short, default_value_t = 3)]
        k: usize,
    },
    /// Answer the latest suggestion round and measure the result.
    Decide {
        id: String,
        #[command(subcommand)]
        action: Action,
        /// Which suggestion of the round, counting from 1.
        #[arg(long, default_value_t = 1, global = true)]
        rank: usize,
        /// objective=explore | objective=verify | location
        #[arg(long, value_parser = parse_feedback, global = true)]
        feedback: Option<Feedback>,
        /// Record the decision without measuring.
        #[arg(long, global = true)]
        no_measure: bool,
    },
    /// Summarize a session.
    Status {
        id: String,
        #[arg(long)]
        json: bool,
    },
    /// Write curve, measurement and decision tables to the session's exports/.
    Export {
        id: String,
        #[arg(long, value_delimiter = ',', default_value = "curves,measurements,decisions")]
        what: Vec<String>,
    },
    /// Rebuild a session from its event log and print its canonical state.
    Replay {
        /// Session id, or a path to an events.jsonl file.
        source: String,
        /// Replay only the first N events.
        #[arg(long)]
        upto: Option<usize>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
    /// Analyze force-depth curve tables (files or directories of .csv).
    Analyze {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Action {
    Accept,
    /// Reject and measure somewhere else instead.
    RejectAlt {
        #[arg(allow_negative_numbers = true)]
        location: f64,
    },
    Reject,
}

fn parse_gait(s: &str) -> Result<GaitKind, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| format!("unknown gait {s:?} (standalone_penetrate, crawl_n_sense, trot_walk)"))
}

fn parse_feedback(s: &str) -> Result<Feedback, String> {
    match s {
        "objective=explore" | "objective=exploration" => Ok(Feedback::ObjectiveMismatch {
            stated: Objective::Exploration,
        }),
        "objective=verify" | "objective=verification" => Ok(Feedback::ObjectiveMismatch {
            stated: Objective::Verification,
        }),
        "location" => Ok(Feedback::LocationMismatch),
        "none" => Ok(Feedback::None),
        _ => Err(format!("unknown feedback {s:?}")),
    }
}

fn parse_hypothesis(s: &str) -> Result<Hypothesis, String> {
    let shape = match s.split_once(':') {
        None if s == "increasing" => HypothesisShape::MonotoneIncreasing,
        None if s == "decreasing" => HypothesisShape::MonotoneDecreasing,
        Some(("unimodal", peak)) => HypothesisShape::Unimodal {
            peak: peak.parse().map_err(|e| format!("peak: {e}"))?,
        },
        Some(("knots", list)) => HypothesisShape::PiecewiseLinear {
            knots: list
                .split(';')
                .map(|pair| {
                    let (x, t) = pair.split_once(',').ok_or(format!("knot {pair:?} is not x,t"))?;
                    Ok([
                        x.trim().parse().map_err(|e| format!("{e}"))?,
                        t.trim().parse().map_err(|e| format!("{e}"))?,
                    ])
                })
                .collect::<Result<_, String>>()?,
        },
        _ => return Err(format!("unknown hypothesis {s:?}")),
    };
    let h = Hypothesis::new(shape, s);
    h.validate().map_err(|e| e.to_string())?;
    Ok(h)
}

type CliResult = Result<(), Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> CliResult {
    if let Command::Analyze { paths } = &cli.command {
        return analyze(paths);
    }
    let store = Store::open(&cli.store)?;
    match cli.command {
        Command::New {
            site,
            seed,
            hypothesis,
            gait,
            id,
        } => {
            let site = SiteConfig::resolve(&site)?;
            let mut spec = SessionSpec::new(&site, seed)?;
            if let Some(h) = hypothesis {
                spec = spec.with_hypothesis(parse_hypothesis(&h)?);
            }
            if let Some(g) = gait {
                spec = spec.with_gait(g);
            }
            if let Some(id) = id {
                spec = spec.with_id(id);
            }
            let session = Session::create(spec, Default::default())?;
            store.create(&session)?;
            println!("{}", session.id());
        }
        Command::Plan {
            id,
            locations,
            metres,
            flags,
            gait,
        } => {
            let mut s = store.load(&id)?;
            let length = s.state().spec.geometry.length_m;
            let mut xs: Vec<f64> = if flags { s.flags().to_vec() } else { Vec::new() };
            if metres {
                xs.extend(locations.iter().map(|m| m / length));
            } else {
                xs.extend(locations);
            }
            let ids = s.run_initial_plan(&xs, gait)?;
            store.save(&s)?;
            for id in ids {
                let m = &s.state().measurements[id as usize];
                println!(
                    "#{id:<3} s={:.3} ({:.1} m)  strength {:>8.1} N/m{}",
                    m.location,
                    m.location * length,
                    m.strength,
                    if m.valid { "" } else { "  [aborted]" }
                );
            }
        }
        Command::Suggest { id, k } => {
            let mut s = store.load(&id)?;
            let round = s.suggestions(k)?;
            store.save(&s)?;
            println!("round {}  weight w = {:.3}", round.round, round.weight);
            for (i, sug) in round.suggestions.iter().enumerate() {
                println!(
                    "{}. s={:.3}  combined {:.3}  explore {:.3}  verify {:.3}\n   {}",
                    i + 1,
                    sug.location,
                    sug.combined,
                    sug.explore_reward,
                    sug.verify_reward,
                    sug.explanation
                );
            }
        }
        Command::Decide {
            id,
            action,
            rank,
            feedback,
            no_measure,
        } => {
            let mut s = store.load(&id)?;
            let round = s
                .state()
                .autonomy
                .open_round()
                .map(|r| r.round)
                .ok_or("no open suggestion round; run `suggest` first")?;
            let outcome = match action {
                Action::Accept => Outcome::Accepted,
                Action::RejectAlt { location } => Outcome::RejectedWithAlternative { location },
                Action::Reject => Outcome::RejectedNoAlternative,
            };
            s.decide_rank(round, rank.saturating_sub(1), outcome, feedback.unwrap_or_default())?;
            let ids = if no_measure { vec![] } else { s.measure_pending(None)? };
            store.save(&s)?;
            println!(
                "recorded decision on round {round}; weight now {:.3}",
                s.effective_weight()
            );
            for id in ids {
                let m = &s.state().measurements[id as usize];
                println!("measured #{id} at s={:.3}: {:.1} N/m", m.location, m.strength);
            }
        }
        Command::Status { id, json } => {
            let s = store.load(&id)?;
            if json {
                println!("{}", s.canonical_json());
            } else {
                print_status(&s);
            }
        }
        Command::Export { id, what } => {
            let kinds = what
                .iter()
                .map(|w| w.parse::<ExportKind>())
                .collect::<Result<Vec<_>, _>>()?;
            for path in store.export(&id, &kinds)? {
                println!("{}", path.display());
            }
        }
        Command::Replay { source, upto } => {
            let text = if Path::new(&source).is_file() {
                std::fs::read_to_string(&source)?
            } else {
                store.read_log(&source)?
            };
            let text: String = match upto {
                Some(n) => text.lines().take(n).map(|l| format!("{l}\n")).collect(),
                None => text,
            };
            let s = Session::from_jsonl(&text)?;
            println!("{}", s.canonical_json());
        }
        Command::Serve { port, host } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(regolith::campaign::serve(store, SocketAddr::new(host, port)))?;
        }
        Command::Analyze { .. } => unreachable!(),
    }
    Ok(())
}

fn print_status(s: &Session) {
    let st = s.state();
    let length = st.spec.geometry.length_m;
    println!("session {}  ({:?}, {} events)", s.id(), st.status, st.event_count);
    println!("hypothesis: {}", st.spec.hypothesis.description);
    println!("weight w = {:.3}", s.effective_weight());
    if let Some(c) = s.confidence() {
        println!(
            "hypothesis confidence {:.3}{}",
            c.value,
            if c.degenerate { " (degenerate)" } else { "" }
        );
    }
    println!("measurements:");
    for m in &st.measurements {
        println!(
            "  #{:<3} s={:.3} ({:>5.1} m)  {:>8.1} N/m  {}{}",
            m.id,
            m.location,
            m.location * length,
            m.strength,
            m.gait,
            if m.valid { "" } else { "  [aborted]" }
        );
    }
    if !st.autonomy.queue.is_empty() {
        println!("queued: {:?}", st.autonomy.queue);
    }
    println!(
        "rounds: {}, decisions: {}",
        st.autonomy.rounds.len(),
        st.autonomy.decisions.len()
    );
}

fn analyze(paths: &[PathBuf]) -> CliResult {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    println!("file,samples,stiffness_n_per_m,regime,confidence,ruptures,depth_at_10n_m,depth_at_20n_m,depth_at_30n_m,terminal_force_n");
    let opt = |d: Option<f64>| d.map(|d| d.to_string()).unwrap_or_default();
    for f in files {
        let curve = match read_curve(&f) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("skipping {}: {e}", f.display());
                continue;
            }
        };
        let k = fit_stiffness(&curve).map(|k| k.to_string()).unwrap_or_default();
        let (label, conf, ruptures) = match classify_regime(&curve) {
            Ok(v) => (
                format!("{:?}", v.label),
                v.confidence.to_string(),
                v.rupture_count.to_string(),
            ),
            Err(_) => Default::default(),
        };
        let s = strength_summary(&curve);
        println!(
            "{},{},{k},{label},{conf},{ruptures},{},{},{},{}",
            f.display(),
            curve.len(),
            opt(s.depth_at_10n),
            opt(s.depth_at_20n),
            opt(s.depth_at_30n),
            s.terminal_force
        );
    }
    Ok(())
}
