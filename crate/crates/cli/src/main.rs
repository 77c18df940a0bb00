//! `ssm`: stable matching mechanisms, equilibrium checks and experiments.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ssm_core::college::{
    college_nash, enumerate_college_stable, parse_college, Assignment, CollegeInstance, CollegeMechanism,
};
use ssm_core::experiments::{run_repro, run_sweep, SelfPolicy, SweepConfig, SweepKind, SweepReport, CASES};
use ssm_core::format::{parse_any, profile_to_json, serialize_profile};
use ssm_core::game::{check, render_distribution, GameConfig, LocalSwaps, Notion, Profitability};
use ssm_core::honesty::HonestyMode;
use ssm_core::mechanisms::{enumerate_stable_bounded, Builtin};
use ssm_core::model::DEFAULT_MAX_SIDE;
use ssm_core::properties::{check_profile, property_exhaustive, property_sweep, FlipDouble, Property, PropertyVerdict};
use ssm_core::search::{enumerate_equilibria, equilibrium_find, Prune};
use ssm_core::{AgentId, Entry, Matching, Mechanism, PreferenceList, Profile, Side};

#[derive(Parser)]
#[command(name = "ssm", version, about = "Strategic stable matching: mechanisms, equilibria and experiments")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for sweeps, property samples and sampled coalitions.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Largest accepted side.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_SIDE)]
    max_n: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism on an instance.
    Stable {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "gs-man")]
        mechanism: String,
        /// Read a college instance (`c1(2): s1 s2 @`); mechanisms are
        /// student-da, college-da and uniform.
        #[arg(long)]
        many_to_one: bool,
    },
    /// List every stable matching.
    Enumerate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        many_to_one: bool,
    },
    /// Equilibrium search and certification.
    #[command(subcommand)]
    Eq(EqCommand),
    /// Check a mechanism property on random or all small profiles.
    Props {
        /// A built-in mechanism or `flip-double`.
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        property: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Every profile with n ≤ 2.
        #[arg(long)]
        exhaustive: bool,
        /// Check one instance file instead of sampling.
        #[arg(long, conflicts_with = "exhaustive")]
        instance: Option<PathBuf>,
        #[arg(long, default_value = "always-last")]
        policy: String,
    },
    /// Reproduce a bundled case, or all of them.
    Repro {
        /// Case id; omit with --all.
        case: Option<String>,
        #[arg(long, conflicts_with = "case")]
        all: bool,
        /// List case ids.
        #[arg(long)]
        list: bool,
    },
    /// Seeded sweep over random instances.
    Sweep {
        /// sincere-stability, stable-targets, woman-optimal, placement or
        /// lottery-marginals.
        #[arg(long)]
        kind: String,
        #[arg(long, default_value = "uniform")]
        mechanism: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Defaults to guaranteed for placement and lottery-marginals,
        /// optimistic otherwise.
        #[arg(long)]
        profitability: Option<String>,
        #[arg(long, default_value = "always-last")]
        policy: String,
    },
}

#[derive(Args)]
struct GameArgs {
    #[arg(long, default_value = "uniform")]
    mechanism: String,
    #[arg(long, default_value = "optimistic")]
    profitability: String,
    /// full (Kendall tau), trunc (with --penalty) or hausdorff.
    #[arg(long, default_value = "full")]
    honesty: String,
    /// Penalty for pairs ranked by only one list, e.g. `1/2`.
    #[arg(long, default_value = "1/2")]
    penalty: String,
    #[arg(long, default_value = "any")]
    local_swaps: String,
    /// Largest coalition in the strong check.
    #[arg(long, default_value_t = 2)]
    coalition_bound: usize,
    /// Agents pinned to their sincere lists: names, `men` or `women`,
    /// comma separated.
    #[arg(long, value_delimiter = ',')]
    truth_tellers: Vec<String>,
}

#[derive(Subcommand)]
enum EqCommand {
    /// Build a minimally dishonest equilibrium with a given outcome.
    Find {
        #[arg(long)]
        sincere: PathBuf,
        /// `m1:w2,m2:w3,...`; unlisted agents are single.
        #[arg(long)]
        target: String,
        /// Write the iteration trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Certify a submitted profile against the requested notions.
    Check {
        #[arg(long)]
        sincere: PathBuf,
        #[arg(long)]
        putative: PathBuf,
        #[arg(long, default_value = "nash,mindis")]
        notions: String,
        #[arg(long)]
        many_to_one: bool,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Every equilibrium of an instance.
    Enumerate {
        #[arg(long)]
        sincere: PathBuf,
        #[arg(long, default_value = "nash,localmindis")]
        notions: String,
        /// prefix or none.
        #[arg(long, default_value = "prefix")]
        prune: String,
        #[command(flatten)]
        game: GameArgs,
    },
}

/// Outcome of a command: what to print and whether checks passed.
struct Outcome {
    text: String,
    json: serde_json::Value,
    passed: bool,
}

impl Outcome {
    fn new(text: String, json: impl Serialize, passed: bool) -> Result<Self> {
        Ok(Outcome { text, json: serde_json::to_value(json)?, passed })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = if cli.json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&out.json).expect("serializable"))
            } else {
                write!(stdout, "{}", out.text)
            };
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Stable { instance, mechanism, many_to_one } => {
            if *many_to_one {
                let inst = load_college(instance, cli.max_n)?;
                let mech = college_mechanism(mechanism)?;
                return college_outcome(&inst, &mech.evaluate(&inst));
            }
            let p = load_profile(instance, cli.max_n)?;
            let mech: Builtin = mechanism.parse()?;
            let d = mech.evaluate(&p);
            let rows = render_distribution(&p, &d);
            let text = rows.iter().map(|(m, pr)| format!("{pr}\t{m}\n")).collect();
            Outcome::new(text, serde_json::json!({ "mechanism": mech.as_str(), "outcome": rows }), true)
        }
        Command::Enumerate { instance, many_to_one } => {
            if *many_to_one {
                let inst = load_college(instance, cli.max_n)?;
                let all = enumerate_college_stable(&inst, cli.max_n)?;
                let rows: Vec<String> = all.iter().map(|a| a.render(&inst)).collect();
                return Outcome::new(lines(&rows), serde_json::json!({ "stable": rows }), true);
            }
            let p = load_profile(instance, cli.max_n)?;
            let rows: Vec<String> =
                enumerate_stable_bounded(&p, cli.max_n)?.iter().map(|m| m.render(p.instance())).collect();
            Outcome::new(lines(&rows), serde_json::json!({ "stable": rows }), true)
        }
        Command::Eq(eq) => run_eq(cli, eq),
        Command::Props { mechanism, property, n, trials, exhaustive, instance, policy } => {
            let property: Property = property.parse()?;
            let policy: SelfPolicy = policy.parse()?;
            let mech: Box<dyn Mechanism> =
                if mechanism == "flip-double" { Box::new(FlipDouble) } else { Box::new(mechanism.parse::<Builtin>()?) };
            let v = if let Some(path) = instance {
                check_profile(mech.as_ref(), property, &load_profile(path, cli.max_n)?)?
            } else if *exhaustive {
                property_exhaustive(mech.as_ref(), property, *n)?
            } else {
                if *n > cli.max_n {
                    bail!("--n {n} exceeds --max-n {}", cli.max_n);
                }
                property_sweep(mech.as_ref(), property, *n, *trials, cli.seed, policy)?
            };
            let text = property_text(&v);
            let passed = !v.violated();
            Outcome::new(text, v, passed)
        }
        Command::Repro { case, all, list } => {
            if *list {
                let text = CASES.iter().map(|c| format!("{}\t{}\n", c.id, c.description)).collect();
                return Outcome::new(text, CASES, true);
            }
            let ids: Vec<&str> = match (case, all) {
                (Some(c), false) => vec![c.as_str()],
                (None, true) => CASES.iter().map(|c| c.id).collect(),
                _ => bail!("give a case id or --all (see --list)"),
            };
            let reports = ids.iter().map(|id| run_repro(id)).collect::<ssm_core::Result<Vec<SweepReport>>>()?;
            reports_outcome(reports)
        }
        Command::Sweep { kind, mechanism, n, trials, profitability, policy } => {
            let kind: SweepKind = kind.parse()?;
            if *n > cli.max_n {
                bail!("--n {n} exceeds --max-n {}", cli.max_n);
            }
            let mut cfg =
                SweepConfig::new(kind, mechanism.parse()?, *n, *trials, cli.seed).with_policy(policy.parse()?);
            if let Some(p) = profitability {
                cfg = cfg.with_profitability(p.parse()?);
            }
            reports_outcome(vec![run_sweep(&cfg)?])
        }
    }
}

fn run_eq(cli: &Cli, eq: &EqCommand) -> Result<Outcome> {
    match eq {
        EqCommand::Find { sincere, target, trace, game } => {
            let s = load_profile(sincere, cli.max_n)?;
            let cfg = game_config(cli, game, &s)?;
            let target = Matching::parse(target, s.instance())?;
            let (p, tr) = equilibrium_find(&cfg, &s, &target)?;
            if let Some(path) = trace {
                fs::write(path, serde_json::to_string_pretty(&tr)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let clean = tr.invariant_failures.is_empty();
            let text = format!(
                "{}# iterations: {} (bound {})\n{}",
                serialize_profile(&p),
                tr.iterations,
                tr.bound,
                tr.invariant_failures.iter().map(|f| format!("# invariant failure: {f}\n")).collect::<String>()
            );
            let json = serde_json::json!({ "profile": profile_to_json(&p), "trace": tr });
            Outcome::new(text, json, clean)
        }
        EqCommand::Check { sincere, putative, notions, many_to_one, game } => {
            if *many_to_one {
                return college_check(cli, sincere, putative, notions, game);
            }
            let s = load_profile(sincere, cli.max_n)?;
            let p = load_profile(putative, cli.max_n)?;
            let cfg = game_config(cli, game, &s)?;
            let notions = Notion::parse_list(notions)?;
            let r = check(&cfg, &s, &p, &notions)?;
            let passed = notions.iter().all(|n| r.holds(*n));
            let mut text = format!("mechanism {} | honesty {}\n", r.mechanism, r.honesty);
            text.push_str(&format!("outcome: {}\n", pairs_text(&r.outcome)));
            for n in &notions {
                text.push_str(&format!("{}: {}\n", n.as_str(), if r.holds(*n) { "holds" } else { "fails" }));
            }
            for a in &r.agents {
                for (n, v) in &a.verdicts {
                    if !v.passed() {
                        text.push_str(&format!("  {} fails {}: {}\n", a.agent, n.as_str(), serde_json::to_string(v)?));
                    }
                }
            }
            text.push_str(&format!("sincerely stable: {}\n", r.sincerely_stable));
            for (m, bp) in &r.blocking_pairs {
                let pairs: Vec<String> = bp.iter().map(|(a, b)| format!("{{{a}, {b}}}")).collect();
                text.push_str(&format!("  {m} blocked by {}\n", pairs.join(" ")));
            }
            Outcome::new(text, r, passed)
        }
        EqCommand::Enumerate { sincere, notions, prune, game } => {
            let s = load_profile(sincere, cli.max_n)?;
            let cfg = game_config(cli, game, &s)?;
            let notions = Notion::parse_list(notions)?;
            let prune: Prune = prune.parse()?;
            let e = enumerate_equilibria(&cfg, &s, &notions, prune)?;
            let found: Vec<serde_json::Value> = e
                .equilibria
                .iter()
                .map(|q| serde_json::json!({ "profile": profile_to_json(&q.profile), "outcome": render_distribution(&q.profile, &q.outcome) }))
                .collect();
            let mut text = format!("{} equilibria among {} candidates\n", e.equilibria.len(), e.candidates);
            if !e.complete {
                text.push_str("# prefix pruning lists only equilibria with a deterministic outcome\n");
            }
            for q in &e.equilibria {
                text.push_str(&format!(
                    "\n# outcome: {}\n{}",
                    pairs_text(&render_distribution(&q.profile, &q.outcome)),
                    serialize_profile(&q.profile)
                ));
            }
            let json = serde_json::json!({ "candidates": e.candidates, "prune": e.prune, "complete": e.complete, "equilibria": found });
            Outcome::new(text, json, true)
        }
    }
}

fn college_check(cli: &Cli, sincere: &Path, putative: &Path, notions: &str, game: &GameArgs) -> Result<Outcome> {
    if Notion::parse_list(notions)? != [Notion::Nash] {
        bail!("--many-to-one supports only --notions nash");
    }
    let s = load_college(sincere, cli.max_n)?;
    let p = load_college(putative, cli.max_n)?;
    let mech = college_mechanism(&game.mechanism)?;
    let prof: Profitability = game.profitability.parse()?;
    let found = college_nash(mech, &s, &p, prof);
    let devs: Vec<serde_json::Value> = found
        .iter()
        .map(|d| {
            serde_json::json!({
                "agent": p.name(d.agent),
                "list": named_list(&p, d.agent.side, &d.list),
                "outcome": d.outcome.iter().map(|(a, pr)| (a.render(&p), pr.to_string())).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut text = format!("nash: {}\n", if found.is_empty() { "holds" } else { "fails" });
    for d in &devs {
        let outcome: Vec<String> = d["outcome"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|r| format!("{} {}", r[0].as_str().unwrap_or(""), r[1].as_str().unwrap_or("")))
            .collect();
        text.push_str(&format!(
            "  {} deviates to {} -> {}\n",
            d["agent"].as_str().unwrap_or(""),
            d["list"].as_str().unwrap_or(""),
            outcome.join(", ")
        ));
    }
    let json = serde_json::json!({ "mechanism": mech.as_str(), "nash": found.is_empty(), "deviations": devs });
    Outcome::new(text, json, found.is_empty())
}

fn college_outcome(inst: &CollegeInstance, d: &[(Assignment, num_rational::Rational64)]) -> Result<Outcome> {
    let rows: Vec<(String, String)> = d.iter().map(|(a, p)| (a.render(inst), p.to_string())).collect();
    let text = rows.iter().map(|(a, p)| format!("{p}\t{a}\n")).collect();
    Outcome::new(text, serde_json::json!({ "outcome": rows }), true)
}

fn college_mechanism(name: &str) -> Result<CollegeMechanism> {
    CollegeMechanism::ALL
        .into_iter()
        .find(|m| m.as_str() == name)
        .ok_or_else(|| anyhow!("unknown college mechanism `{name}` (expected student-da, college-da or uniform)"))
}

fn game_config(cli: &Cli, g: &GameArgs, sincere: &Profile) -> Result<GameConfig> {
    let mech: Builtin = g.mechanism.parse()?;
    let honesty = match g.honesty.as_str() {
        "full" => HonestyMode::FullOrder,
        "trunc" => HonestyMode::truncated(g.penalty.parse().map_err(|_| anyhow!("bad penalty `{}`", g.penalty))?)?,
        "hausdorff" => HonestyMode::Hausdorff,
        h => bail!("unknown honesty mode `{h}` (expected full, trunc or hausdorff)"),
    };
    let swaps: LocalSwaps = g.local_swaps.parse()?;
    let mut truth = Vec::new();
    for t in &g.truth_tellers {
        match t.as_str() {
            "men" => truth.extend((0..sincere.n_men()).map(AgentId::man)),
            "women" => truth.extend((0..sincere.n_women()).map(AgentId::woman)),
            name => truth.push(sincere.instance().lookup(name).ok_or_else(|| anyhow!("unknown agent `{name}`"))?),
        }
    }
    let mut cfg = GameConfig::new(mech)
        .with_profitability(g.profitability.parse()?)
        .with_honesty(honesty)
        .with_local_swaps(swaps)
        .with_coalition_bound(g.coalition_bound)
        .with_truth_tellers(truth);
    cfg.seed = cli.seed;
    cfg.max_side = cli.max_n;
    Ok(cfg)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_profile(path: &Path, max_n: usize) -> Result<Profile> {
    let p = parse_any(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let size = p.n_men().max(p.n_women());
    if size > max_n {
        bail!(ssm_core::Error::SizeBound { size, max: max_n });
    }
    Ok(p)
}

fn load_college(path: &Path, max_n: usize) -> Result<CollegeInstance> {
    let inst = parse_college(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let size = inst.n_students().max(inst.n_colleges());
    if size > max_n {
        bail!(ssm_core::Error::SizeBound { size, max: max_n });
    }
    Ok(inst)
}

fn lines(rows: &[String]) -> String {
    rows.iter().map(|r| format!("{r}\n")).collect()
}

fn pairs_text<A: std::fmt::Display, B: std::fmt::Display>(rows: &[(A, B)]) -> String {
    rows.iter().map(|(a, b)| format!("{a} {b}")).collect::<Vec<_>>().join(", ")
}

fn property_text(v: &PropertyVerdict) -> String {
    let mut t = format!(
        "{} {}: {} ({} profiles, {} checks)\n",
        v.mechanism,
        v.property.as_str(),
        if v.violated() { "violated" } else { "no violation found" },
        v.profiles_checked,
        v.checks
    );
    if let Some(w) = &v.witness {
        t.push_str(&format!("agent {}\n", w.agent));
        if let Some(m) = &w.swap {
            t.push_str(&format!("move: {}\n", m));
        }
        for (e, before, after) in &w.marginals {
            t.push_str(&format!("  p({}, {e}): {before} -> {after}\n", w.agent));
        }
        t.push_str(&w.profile);
    }
    t
}

fn reports_outcome(reports: Vec<SweepReport>) -> Result<Outcome> {
    let passed = reports.iter().all(SweepReport::passed);
    let text = reports.iter().map(SweepReport::render_text).collect();
    if reports.len() == 1 {
        let r = reports.into_iter().next().expect("one report");
        Outcome::new(text, r, passed)
    } else {
        Outcome::new(text, reports, passed)
    }
}

/// A list rendered with the instance's own agent names.
fn named_list(inst: &CollegeInstance, owner: Side, list: &PreferenceList) -> String {
    list.entries()
        .map(|e| match e {
            Entry::Agent(k) => inst.name(AgentId { side: owner.opposite(), index: k }).to_string(),
            Entry::Single => "@".to_string(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}
