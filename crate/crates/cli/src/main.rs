use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use idvfair::counterexamples::{
    impossibility_audit, subadditive_incompatibility_check, xos_mms_gap_check, ImpossibilityVariant,
};
use idvfair::equilibrium::{audit_equilibria, verify_pne_with};
use idvfair::fairness::{audit, share_value};
use idvfair::io::{parse_instance, parse_reports};
use idvfair::mechanisms::MechanismRunner;
use idvfair::rational::format as fmt_rational;
use idvfair::{Budget, Error, FairnessNotion, Instance, Mechanism, SignalProfile};

/// Fair division under interdependent values, in exact arithmetic.
///
/// Structured output goes to stdout as one JSON document, a short summary
/// to stderr. Exit status: 0 if the checked property holds, 1 if it is
/// violated or not reproduced, 2 on input or resource errors.
#[derive(Parser)]
#[command(name = "idvfair", version)]
struct Cli {
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BudgetArgs {
    /// Largest item count whose 2^m bundles may be enumerated.
    #[arg(long, global = true, default_value_t = 10)]
    budget_items: usize,
    /// Largest number of partitions or allocations to scan.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget_partitions: u64,
    /// Largest report-profile space (and per-agent deviation space).
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget_reports: u64,
    /// Largest number of bundle pairs for subadditivity checks.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    budget_pairs: u64,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget {
            max_subset_items: self.budget_items,
            max_partitions: self.budget_partitions,
            max_reports: self.budget_reports,
            max_pairs: self.budget_pairs,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// PROP, MMS and APS of each agent at one signal profile.
    Shares {
        #[arg(long)]
        instance: PathBuf,
        /// Only this agent (0-based).
        #[arg(long)]
        agent: Option<usize>,
        /// Comma-separated signal indices; defaults to the first signal of
        /// every agent.
        #[arg(long)]
        profile: Option<String>,
        #[arg(long, default_value = "prop,mms,aps")]
        notions: String,
    },
    /// Run a mechanism on a report profile.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        reports: PathBuf,
        /// Audit the allocation at these signals (overrides the report file).
        #[arg(long)]
        true_signals: Option<String>,
        #[arg(long)]
        notions: Option<String>,
    },
    /// Verify or enumerate pure Nash equilibria.
    Pne {
        #[command(subcommand)]
        command: PneCommand,
    },
    /// Reproduce one of the negative results end to end.
    Repro {
        #[command(subcommand)]
        target: ReproTarget,
    },
}

#[derive(Subcommand)]
enum PneCommand {
    /// Check every unilateral deviation from a report profile.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        reports: PathBuf,
        #[arg(long)]
        true_signals: Option<String>,
        #[arg(long)]
        notions: Option<String>,
    },
    /// List every equilibrium and audit its allocation at the true signals.
    Enumerate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        true_signals: String,
        #[arg(long)]
        notions: Option<String>,
    },
}

#[derive(Subcommand)]
enum ReproTarget {
    /// Fair equilibrium at all-ones stays an equilibrium but loses MMS.
    MmsImpossibility {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value = "blackbox-mms")]
        mechanism: String,
    },
    /// The same chain for EF1 with 2n goods.
    Ef1Impossibility {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value = "blackbox-rr")]
        mechanism: String,
    },
    /// Two XOS valuations with no allocation meeting both maximin shares.
    XosGap,
    /// Checks behind the subadditive PROP and APS incompatibility.
    SubadditiveAps {
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        bundles: usize,
        #[arg(long, default_value_t = 1_000)]
        prices: usize,
    },
}

struct Output {
    doc: Value,
    summary: String,
    code: u8,
}

impl Output {
    fn new(doc: Value, summary: String, holds: bool) -> Self {
        Output {
            doc,
            summary,
            code: if holds { 0 } else { 1 },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match dispatch(&cli) {
        Ok(out) => {
            let text = serde_json::to_string_pretty(&out.doc).expect("JSON values serialize");
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(io::stdout().lock(), "{text}");
            eprintln!("{} ({:.2?})", out.summary, start.elapsed());
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<Output> {
    let budget = cli.budget.budget();
    match &cli.command {
        Command::Shares {
            instance,
            agent,
            profile,
            notions,
        } => shares(&load_instance(instance)?, *agent, profile.as_deref(), notions, &budget),
        Command::Run {
            instance,
            mechanism,
            reports,
            true_signals,
            notions,
        } => run(
            &load_instance(instance)?,
            mechanism,
            reports,
            true_signals.as_deref(),
            notions.as_deref(),
            &budget,
        ),
        Command::Pne {
            command:
                PneCommand::Verify {
                    instance,
                    mechanism,
                    reports,
                    true_signals,
                    notions,
                },
        } => pne_verify(
            &load_instance(instance)?,
            mechanism,
            reports,
            true_signals.as_deref(),
            notions.as_deref(),
            &budget,
        ),
        Command::Pne {
            command:
                PneCommand::Enumerate {
                    instance,
                    mechanism,
                    true_signals,
                    notions,
                },
        } => pne_enumerate(&load_instance(instance)?, mechanism, true_signals, notions.as_deref(), &budget),
        Command::Repro { target } => repro(target, &budget),
    }
}

fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("in {}", path.display()))
}

fn parse_profile(text: &str) -> anyhow::Result<SignalProfile> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| anyhow!("bad signal index {s:?} in {text:?}")))
        .collect::<anyhow::Result<Vec<_>>>()
        .map(SignalProfile)
}

fn parse_notions(text: &str) -> anyhow::Result<Vec<FairnessNotion>> {
    let notions = text
        .split(',')
        .map(|s| s.parse::<FairnessNotion>())
        .collect::<Result<Vec<_>, _>>()?;
    if notions.is_empty() {
        bail!("no fairness notions given");
    }
    Ok(notions)
}

/// The requested notions, or every notion the instance supports.
fn audit_notions(text: Option<&str>, instance: &Instance) -> anyhow::Result<Vec<FairnessNotion>> {
    match text {
        Some(t) => parse_notions(t),
        None => Ok(FairnessNotion::ALL
            .into_iter()
            .filter(|&n| n != FairnessNotion::MMS || instance.has_equal_entitlements())
            .collect()),
    }
}

fn parse_mechanism(name: &str) -> anyhow::Result<Mechanism> {
    Ok(name.parse::<Mechanism>()?)
}

fn shares(
    instance: &Instance,
    agent: Option<usize>,
    profile: Option<&str>,
    notions: &str,
    budget: &Budget,
) -> anyhow::Result<Output> {
    let notions = parse_notions(notions)?;
    if let Some(n) = notions.iter().find(|n| n.is_envy_based()) {
        bail!("{n} is not a share-based notion");
    }
    let profile = match profile {
        Some(p) => parse_profile(p)?,
        None => SignalProfile(vec![0; instance.num_agents()]),
    };
    instance.check_profile(&profile)?;
    let agents: Vec<usize> = match agent {
        Some(a) => {
            instance.check_agent(a)?;
            vec![a]
        }
        None => (0..instance.num_agents()).collect(),
    };
    let mut refusals = 0;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &i in &agents {
        let v = instance.valuation_at(i, &profile)?;
        let alpha = instance.entitlement(i);
        let mut values = Map::new();
        let mut refused = Map::new();
        for &notion in &notions {
            if notion == FairnessNotion::MMS && !instance.has_equal_entitlements() {
                refused.insert(notion.to_string(), json!("maximin share needs equal entitlements"));
                continue;
            }
            match share_value(&v, notion, alpha, instance.num_agents(), budget) {
                Ok(x) => {
                    summary.push(format!("agent {i} {notion}={}", fmt_rational(&x)));
                    values.insert(notion.to_string(), json!(fmt_rational(&x)));
                }
                Err(e @ (Error::Budget { .. } | Error::Domain(_))) => {
                    summary.push(format!("agent {i} {notion} refused"));
                    refused.insert(notion.to_string(), json!(e.to_string()));
                }
                Err(e) => return Err(e.into()),
            }
        }
        refusals += refused.len();
        let mut row = json!({ "agent": i, "entitlement": fmt_rational(alpha), "shares": values });
        if !refused.is_empty() {
            row["refused"] = Value::Object(refused);
        }
        rows.push(row);
    }
    let doc = json!({ "command": "shares", "profile": profile, "agents": rows });
    Ok(Output {
        doc,
        summary: summary.join(", "),
        code: if refusals == 0 { 0 } else { 2 },
    })
}

fn run(
    instance: &Instance,
    mechanism: &str,
    reports: &Path,
    true_signals: Option<&str>,
    notions: Option<&str>,
    budget: &Budget,
) -> anyhow::Result<Output> {
    let mechanism = parse_mechanism(mechanism)?;
    let file = load_reports(reports)?;
    let runner = MechanismRunner::new(&mechanism, instance, budget)?;
    let outcome = runner.run(&file.reports)?;
    let truth = match true_signals {
        Some(t) => Some(parse_profile(t)?),
        None => file.true_signals.clone(),
    };
    let mut doc = json!({
        "command": "run",
        "mechanism": mechanism.name(),
        "reports": file.reports,
        "allocation": outcome.allocation,
        "trace": outcome.trace,
    });
    let mut summary = format!("{}: allocation {}", mechanism.name(), outcome.allocation);
    let mut holds = true;
    if truth.is_some() || notions.is_some() {
        let truth = truth.ok_or_else(|| anyhow!("--notions needs --true-signals or true_signals in the report file"))?;
        let notions = audit_notions(notions, instance)?;
        let report = audit(
            &outcome.allocation,
            &vec![truth.clone(); instance.num_agents()],
            &notions,
            instance,
            budget,
        )?;
        holds = report.all_hold();
        summary.push_str(if holds { ", fair" } else { ", not fair" });
        doc["true_signals"] = json!(truth);
        doc["fairness"] = json!(report);
        doc["fair"] = json!(holds);
    }
    Ok(Output::new(doc, summary, holds))
}

fn load_reports(path: &Path) -> anyhow::Result<idvfair::io::ReportFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_reports(&text).with_context(|| format!("in {}", path.display()))
}

fn pne_verify(
    instance: &Instance,
    mechanism: &str,
    reports: &Path,
    true_signals: Option<&str>,
    notions: Option<&str>,
    budget: &Budget,
) -> anyhow::Result<Output> {
    let mechanism = parse_mechanism(mechanism)?;
    let file = load_reports(reports)?;
    let truth = match true_signals {
        Some(t) => parse_profile(t)?,
        None => file
            .true_signals
            .clone()
            .ok_or_else(|| anyhow!("true signals needed: pass --true-signals or add true_signals to the report file"))?,
    };
    let runner = MechanismRunner::new(&mechanism, instance, budget)?;
    let certificate = verify_pne_with(&runner, &truth, &file.reports)?;
    let allocation = runner.allocation(&file.reports)?;
    let notions = audit_notions(notions, instance)?;
    let fairness = audit(&allocation, &vec![truth.clone(); instance.num_agents()], &notions, instance, budget)?;
    let summary = match &certificate.deviation {
        None => format!("equilibrium ({} deviations checked)", certificate.deviations_checked),
        Some(d) => format!("not an equilibrium: agent {} gains {}", d.agent, fmt_rational(&d.gap)),
    };
    let doc = json!({
        "command": "pne verify",
        "mechanism": mechanism.name(),
        "true_signals": truth,
        "reports": file.reports,
        "certificate": certificate,
        "allocation": allocation,
        "fairness": fairness,
    });
    Ok(Output::new(doc, summary, certificate.is_pne))
}

fn pne_enumerate(
    instance: &Instance,
    mechanism: &str,
    true_signals: &str,
    notions: Option<&str>,
    budget: &Budget,
) -> anyhow::Result<Output> {
    let mechanism = parse_mechanism(mechanism)?;
    let truth = parse_profile(true_signals)?;
    let notions = audit_notions(notions, instance)?;
    let result = audit_equilibria(&mechanism, instance, &truth, &notions, budget)?;
    let summary = format!(
        "{} equilibria, fair one exists: {}, all fair: {}",
        result.equilibria.len(),
        result.exists_fair_pne,
        result.all_pne_fair
    );
    let found = !result.equilibria.is_empty();
    let doc = json!({
        "command": "pne enumerate",
        "mechanism": mechanism.name(),
        "count": result.equilibria.len(),
        "audit": result,
    });
    Ok(Output::new(doc, summary, found))
}

fn repro(target: &ReproTarget, budget: &Budget) -> anyhow::Result<Output> {
    match target {
        ReproTarget::MmsImpossibility { n, mechanism } => impossibility(*n, mechanism, ImpossibilityVariant::Mms, budget),
        ReproTarget::Ef1Impossibility { n, mechanism } => impossibility(*n, mechanism, ImpossibilityVariant::Ef1, budget),
        ReproTarget::XosGap => {
            let report = xos_mms_gap_check()?;
            let summary = if report.holds {
                "no allocation gives both agents their maximin share of 2".to_string()
            } else {
                format!("gap not reproduced: {} double-MMS allocations", report.double_mms.len())
            };
            Ok(Output::new(json!({ "command": "repro xos-gap", "report": report }), summary, report.holds))
        }
        ReproTarget::SubadditiveAps {
            k,
            seed,
            bundles,
            prices,
        } => {
            let report = subadditive_incompatibility_check(*k, *bundles, *prices, *seed)?;
            let summary = format!(
                "complement identity failures {}/{}, averaging failures {}/{}, witness failures {}/{}, separation {}",
                report.complement_failures,
                report.bundles_checked,
                report.averaging_failures,
                report.prices_checked,
                report.witness_failures,
                report.prices_checked,
                report.separation
            );
            Ok(Output::new(
                json!({ "command": "repro subadditive-aps", "report": report }),
                summary,
                report.passed,
            ))
        }
    }
}

fn impossibility(n: usize, mechanism: &str, variant: ImpossibilityVariant, budget: &Budget) -> anyhow::Result<Output> {
    let mechanism = parse_mechanism(mechanism)?;
    let result = impossibility_audit(&mechanism, n, variant, budget)?;
    let summary = match &result.failed_step {
        None => format!("{} chain reproduced for {} with n = {n}", variant, mechanism.name()),
        Some(step) => format!("not reproduced: {step}"),
    };
    let holds = result.reproduced;
    Ok(Output::new(
        json!({ "command": format!("repro {variant}-impossibility"), "audit": result }),
        summary,
        holds,
    ))
}
