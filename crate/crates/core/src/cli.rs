//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a domain error (invariant violation, empty
//! memory, failed verification), 2 on a usage error (bad arguments, missing
//! input file).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::axiom_verifier::{
    check_metric, check_representation, check_similarity_superadditivity, check_symmetry_product,
    CheckConfig, CheckResult,
};
use crate::case_memory::{load_memory, save_memory, ActionId, Case, Memory, Outcome};
use crate::decision::{
    decide, decide_restricted, evolve_then_decide, DecisionReport, RawQuery, UtilityFunction,
};
use crate::error::Error;
use crate::feature_space::{Feature, FeatureId, FeatureSpace, NewValue, Problem, SubspaceSelector};
use crate::learning::{
    estimate_rates, evaluate_wait, evaluate_wait_with_probability, LotteryValuation, RateModel,
    Recommendation, WaitScenario,
};
use crate::numeric::{decimal_string, fraction_string, parse_rational, to_f64, Rational};
use crate::similarity_graph::{distance_report, DistanceReport, SimilarityTable};

#[derive(Debug, Parser)]
#[command(
    name = "cbdt",
    version,
    about = "Case-based decisions on a discrete feature lattice"
)]
pub struct Cli {
    /// Emit JSON documents instead of text tables.
    #[arg(long, global = true)]
    pub machine: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the resulting memory here.
    #[arg(long, conflicts_with = "in_place")]
    pub out: Option<PathBuf>,
    /// Overwrite the input memory file.
    #[arg(long)]
    pub in_place: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create an empty memory.
    Init {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Feature as `id=v1,v2,...` in increasing order.
        #[arg(long = "feature", required = true)]
        features: Vec<String>,
        #[arg(long = "action", required = true)]
        actions: Vec<String>,
    },
    /// Append a case to a memory.
    AddCase {
        #[arg(long)]
        memory: PathBuf,
        /// Coordinates as `f1=v1,f2=v2`; omitted features take their default.
        #[arg(long)]
        problem: String,
        #[arg(long)]
        action: String,
        #[arg(long, allow_hyphen_values = true)]
        result: String,
        #[command(flatten)]
        output: Output,
    },
    /// Choose an action for a query problem.
    Decide {
        #[arg(long)]
        memory: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long, default_value = "identity")]
        utility: String,
        /// New value carried by the query, as `feature=label[@position]`.
        #[arg(long = "new-value")]
        new_values: Vec<String>,
        /// New feature carried by the query, as `id=v1,v2,...`.
        #[arg(long = "new-feature")]
        new_features: Vec<String>,
        /// Where to write the evolved memory when the query is novel.
        #[arg(long)]
        evolved_out: Option<PathBuf>,
    },
    /// Choose an action comparing only a subset of features.
    DecideRestricted {
        #[arg(long)]
        memory: PathBuf,
        #[arg(long)]
        query: String,
        /// Comma-separated feature ids.
        #[arg(long)]
        subspace: String,
        #[arg(long)]
        delta: String,
        #[arg(long, default_value = "identity")]
        utility: String,
    },
    /// Add a value to a feature's range.
    ExtendValue {
        #[arg(long)]
        memory: PathBuf,
        #[arg(long)]
        feature: String,
        #[arg(long)]
        value: String,
        /// Insertion index; defaults to after the current maximum.
        #[arg(long)]
        position: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Add a feature; remembered problems take its default value.
    ExtendFeature {
        #[arg(long)]
        memory: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long)]
        name: Option<String>,
        /// Comma-separated values in increasing order.
        #[arg(long)]
        values: String,
        #[arg(long, default_value_t = 0)]
        default_rank: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Estimate arrival rates of new values and features.
    Rates {
        /// Memory at the previous estimate.
        #[arg(long)]
        memory: PathBuf,
        /// Memory now; its cases must extend the old ones.
        #[arg(long)]
        new: PathBuf,
        /// Existing rate snapshot to update.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        batch_size: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare acting now against waiting for an anticipated problem.
    Wait {
        #[arg(long)]
        memory: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long)]
        scenario: PathBuf,
        /// Rate snapshot used for the event probability.
        #[arg(long, required_unless_present = "event_probability")]
        rates: Option<PathBuf>,
        /// Use this event probability instead of computing it from rates.
        #[arg(long, conflicts_with = "rates")]
        event_probability: Option<f64>,
        #[arg(long, default_value = "identity")]
        utility: String,
    },
    /// Run the property checks on a memory.
    Verify {
        #[arg(long)]
        memory: PathBuf,
        #[arg(long)]
        query: Option<String>,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "identity")]
        utility: String,
    },
    /// Print pairwise distances and similarities.
    DumpSimilarity {
        #[arg(long)]
        memory: PathBuf,
        #[arg(long)]
        query: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> CliOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CliOutcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                CliOutcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match execute(&cli) {
        Ok(stdout) => CliOutcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(Failure::Usage(msg)) => CliOutcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("usage error: {msg}\n"),
        },
        Err(Failure::Domain(msg)) => CliOutcome {
            code: 1,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn read_memory(path: &Path) -> CliResult<Memory> {
    Ok(load_memory(&read_input(path)?)?)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text)
        .map_err(|e| Failure::Domain(format!("cannot write {}: {e}", path.display())))
}

/// Writes an evolved memory per `--out` / `--in-place`, or returns it for
/// standard output.
fn emit_memory(memory: &Memory, input: &Path, output: &Output) -> CliResult<String> {
    let text = save_memory(memory);
    let target = match (&output.out, output.in_place) {
        (Some(p), _) => p.as_path(),
        (None, true) => input,
        (None, false) => return Ok(text),
    };
    write_file(target, &text)?;
    Ok(format!("wrote {}\n", target.display()))
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn parse_problem(text: &str) -> CliResult<Problem> {
    let mut p = Problem::default();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| usage(format!("expected feature=value, got `{part}`")))?;
        p = p.with(k.trim(), v.trim());
    }
    Ok(p)
}

fn parse_feature(text: &str) -> CliResult<Feature> {
    let (id, values) = text
        .split_once('=')
        .ok_or_else(|| usage(format!("expected id=v1,v2,..., got `{text}`")))?;
    let values: Vec<&str> = values.split(',').map(str::trim).collect();
    Ok(Feature::simple(id.trim(), &values)?)
}

fn parse_new_value(text: &str) -> CliResult<NewValue> {
    let (feature, rest) = text
        .split_once('=')
        .ok_or_else(|| usage(format!("expected feature=label[@position], got `{text}`")))?;
    let (label, position) = match rest.rsplit_once('@') {
        Some((label, pos)) => (
            label,
            Some(
                pos.parse::<usize>()
                    .map_err(|e| usage(format!("bad position: {e}")))?,
            ),
        ),
        None => (rest, None),
    };
    Ok(NewValue {
        feature: FeatureId::new(feature.trim()),
        label: label.trim().to_string(),
        position,
    })
}

fn parse_utility(text: &str) -> CliResult<UtilityFunction> {
    UtilityFunction::parse(text).map_err(usage)
}

fn action(text: &str) -> CliResult<ActionId> {
    ActionId::new(text).map_err(usage)
}

fn execute(cli: &Cli) -> CliResult<String> {
    let machine = cli.machine;
    match &cli.command {
        Command::Init {
            out,
            features,
            actions,
        } => {
            let features = features
                .iter()
                .map(|f| parse_feature(f))
                .collect::<CliResult<Vec<_>>>()?;
            let actions = actions
                .iter()
                .map(|a| action(a))
                .collect::<CliResult<Vec<_>>>()?;
            let memory = Memory::new(FeatureSpace::new(features)?, actions);
            let text = save_memory(&memory);
            match out {
                Some(p) => {
                    write_file(p, &text)?;
                    Ok(format!("wrote {}\n", p.display()))
                }
                None => Ok(text),
            }
        }
        Command::AddCase {
            memory: path,
            problem,
            action: act,
            result,
            output,
        } => {
            let memory = read_memory(path)?;
            let result = parse_rational(result).map_err(usage)?;
            let case = Case::new(parse_problem(problem)?, action(act)?, Outcome(result))?;
            emit_memory(&memory.add_case(case)?, path, output)
        }
        Command::Decide {
            memory: path,
            query,
            utility,
            new_values,
            new_features,
            evolved_out,
        } => {
            let memory = read_memory(path)?;
            let u = parse_utility(utility)?;
            let query = parse_problem(query)?;
            let mut out = String::new();
            let report = if new_values.is_empty() && new_features.is_empty() {
                decide(&memory, &query, &u)?
            } else {
                let raw = RawQuery {
                    coordinates: query.coordinates().clone(),
                    new_values: new_values
                        .iter()
                        .map(|v| parse_new_value(v))
                        .collect::<CliResult<_>>()?,
                    new_features: new_features
                        .iter()
                        .map(|f| parse_feature(f))
                        .collect::<CliResult<_>>()?,
                };
                let (evolved, report) = evolve_then_decide(&memory, &raw, &u)?;
                if let Some(p) = evolved_out {
                    write_file(p, &save_memory(&evolved))?;
                    if !machine {
                        out.push_str(&format!("evolved memory written to {}\n", p.display()));
                    }
                }
                return Ok(out + &render_decision(&evolved, &report, machine));
            };
            Ok(render_decision(&memory, &report, machine))
        }
        Command::DecideRestricted {
            memory: path,
            query,
            subspace,
            delta,
            utility,
        } => {
            let memory = read_memory(path)?;
            let u = parse_utility(utility)?;
            let query = parse_problem(query)?;
            let ids: Vec<&str> = subspace.split(',').map(str::trim).collect();
            let selector = SubspaceSelector::new(memory.space(), ids)?;
            let delta: Rational = parse_rational(delta).map_err(usage)?;
            let report = decide_restricted(&memory, &query, &u, &selector, delta)?;
            Ok(render_decision(&memory, &report, machine))
        }
        Command::ExtendValue {
            memory: path,
            feature,
            value,
            position,
            output,
        } => {
            let memory = read_memory(path)?;
            let new = NewValue {
                feature: FeatureId::new(feature.as_str()),
                label: value.clone(),
                position: *position,
            };
            let space = memory.space().apply_new_value(&new)?;
            emit_memory(&memory.with_space(space)?, path, output)
        }
        Command::ExtendFeature {
            memory: path,
            id,
            name,
            values,
            default_rank,
            output,
        } => {
            let memory = read_memory(path)?;
            let values = values.split(',').map(|v| v.trim().to_string()).collect();
            let feature = Feature::new(
                id.as_str(),
                name.clone().unwrap_or_else(|| id.clone()),
                values,
                *default_rank,
            )?;
            let space = memory.space().extend_with_feature(feature)?;
            emit_memory(&memory.with_space(space)?, path, output)
        }
        Command::Rates {
            memory: old_path,
            new,
            model,
            batch_size,
            out,
        } => {
            let old = read_memory(old_path)?;
            let new = read_memory(new)?;
            let model = match model {
                Some(p) => serde_json::from_str(&read_input(p)?)
                    .map_err(|e| Failure::Usage(format!("bad rate snapshot: {e}")))?,
                None => RateModel::new(*batch_size)?,
            };
            let model = estimate_rates(&model, &old, &new)?;
            let doc = serde_json::to_string_pretty(&model).expect("rate models serialize") + "\n";
            if let Some(p) = out {
                write_file(p, &doc)?;
            }
            if machine {
                Ok(doc)
            } else {
                Ok(render_rates(&model))
            }
        }
        Command::Wait {
            memory: path,
            query,
            scenario,
            rates,
            event_probability,
            utility,
        } => {
            let memory = read_memory(path)?;
            let u = parse_utility(utility)?;
            let query = parse_problem(query)?;
            let scenario: WaitScenario = serde_json::from_str(&read_input(scenario)?)
                .map_err(|e| Failure::Usage(format!("bad scenario: {e}")))?;
            let valuation = match (rates, event_probability) {
                (_, Some(p)) => evaluate_wait_with_probability(&memory, &query, &scenario, &u, *p)?,
                (Some(r), None) => {
                    let model: RateModel = serde_json::from_str(&read_input(r)?)
                        .map_err(|e| Failure::Usage(format!("bad rate snapshot: {e}")))?;
                    evaluate_wait(&memory, &query, &scenario, &model, &u)?
                }
                (None, None) => {
                    return Err(usage("either --rates or --event-probability is required"))
                }
            };
            Ok(render_wait(&memory, &valuation, machine))
        }
        Command::Verify {
            memory: path,
            query,
            samples,
            seed,
            utility,
        } => {
            let memory = read_memory(path)?;
            let u = parse_utility(utility)?;
            let config = CheckConfig::new(*samples, *seed);
            let mut required = vec![check_metric(memory.space(), &config)?];
            if memory.space().lattice_size() >= 3 {
                required.push(check_symmetry_product(memory.space(), &memory, &config)?);
            }
            if let Some(q) = query {
                let q = memory.space().complete_problem(&parse_problem(q)?)?;
                required.push(check_representation(&memory, &q, &u, &config)?);
            }
            let informational = check_similarity_superadditivity(&memory, &config)?;
            let text = render_checks(&memory, &required, &informational, machine);
            if required.iter().all(CheckResult::passed) {
                Ok(text)
            } else {
                Err(Failure::Domain(format!("verification failed\n{text}")))
            }
        }
        Command::DumpSimilarity {
            memory: path,
            query,
        } => {
            let memory = read_memory(path)?;
            let query = query.as_deref().map(parse_problem).transpose()?;
            let report = distance_report(memory.space(), &memory, query.as_ref())?;
            Ok(render_distances(&memory, &report, machine))
        }
    }
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::from(" ");
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            s.push(' ');
            if i + 1 == widths.len() {
                s.push_str(cell);
            } else {
                s.push_str(&format!("{cell:<w$}"));
                s.push(' ');
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

fn rational_json(r: &Rational) -> Value {
    json!({ "exact": fraction_string_exact(r), "decimal": to_f64(r) })
}

fn fraction_string_exact(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn similarity_rows(space: &FeatureSpace, t: &SimilarityTable) -> Vec<Vec<String>> {
    t.entries
        .iter()
        .map(|e| {
            vec![
                e.problem.display_in(space),
                e.distance.to_string(),
                fraction_string(&e.similarity),
                decimal_string(&e.similarity),
            ]
        })
        .collect()
}

fn similarity_json(t: &SimilarityTable) -> Value {
    json!({
        "query": t.query.coordinates(),
        "diameter": t.diameter_used,
        "degenerate": t.is_degenerate(),
        "entries": t.entries.iter().map(|e| json!({
            "problem": e.problem.coordinates(),
            "distance": e.distance,
            "similarity": rational_json(&e.similarity),
        })).collect::<Vec<_>>(),
    })
}

fn decision_json(r: &DecisionReport) -> Value {
    json!({
        "query": r.query.coordinates(),
        "scores": r.scores.iter().map(|(a, s)| json!({
            "action": a.as_str(),
            "utility": rational_json(s),
        })).collect::<Vec<_>>(),
        "chosen": r.chosen.as_str(),
        "ties": r.ties.iter().map(ActionId::as_str).collect::<Vec<_>>(),
        "similarity": similarity_json(&r.similarity),
        "restricted_history": r.restricted_history.as_ref().map(|h| {
            h.iter().map(Problem::coordinates).collect::<Vec<_>>()
        }),
        "fallback_used": r.fallback_used,
    })
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

fn render_decision(memory: &Memory, r: &DecisionReport, machine: bool) -> String {
    if machine {
        return pretty(&decision_json(r));
    }
    let space = memory.space();
    let mut out = format!("query: {}\n", r.query.display_in(space));
    out.push_str(&format!("diameter: {}", r.similarity.diameter_used));
    if r.similarity.is_degenerate() {
        out.push_str(" (degenerate: all similarities set to 1)");
    }
    out.push('\n');
    out.push_str("similarity:\n");
    out.push_str(&table(
        &["problem", "d", "s", "s (decimal)"],
        &similarity_rows(space, &r.similarity),
    ));
    if let Some(h) = &r.restricted_history {
        let shown: Vec<String> = h.iter().map(|q| q.display_in(space)).collect();
        out.push_str(&format!("restricted history: {}\n", shown.join(" ")));
        if r.fallback_used {
            out.push_str("restriction empty: full history used\n");
        }
    }
    out.push_str("scores:\n");
    let rows: Vec<Vec<String>> = r
        .scores
        .iter()
        .map(|(a, s)| vec![a.to_string(), fraction_string(s), decimal_string(s)])
        .collect();
    out.push_str(&table(&["action", "U", "U (decimal)"], &rows));
    out.push_str(&format!("chosen: {}\n", r.chosen));
    let ties: Vec<&str> = r.ties.iter().map(ActionId::as_str).collect();
    out.push_str(&format!("ties: {}\n", ties.join(" ")));
    out
}

fn render_distances(memory: &Memory, r: &DistanceReport, machine: bool) -> String {
    let space = memory.space();
    if machine {
        return pretty(&json!({
            "diameter": r.diameter,
            "pairs": r.pairwise.iter().map(|p| json!({
                "left": r.problems[p.left].coordinates(),
                "right": r.problems[p.right].coordinates(),
                "distance": p.distance,
                "similarity": rational_json(&p.similarity),
            })).collect::<Vec<_>>(),
            "query": r.query.as_ref().map(similarity_json),
        }));
    }
    let mut out = format!("diameter: {}\n", r.diameter);
    let rows: Vec<Vec<String>> = r
        .pairwise
        .iter()
        .map(|p| {
            vec![
                r.problems[p.left].display_in(space),
                r.problems[p.right].display_in(space),
                p.distance.to_string(),
                fraction_string(&p.similarity),
                decimal_string(&p.similarity),
            ]
        })
        .collect();
    out.push_str("pairs:\n");
    out.push_str(&table(&["left", "right", "d", "s", "s (decimal)"], &rows));
    if let Some(t) = &r.query {
        out.push_str(&format!("query {}:\n", t.query.display_in(space)));
        out.push_str(&table(
            &["problem", "d", "s", "s (decimal)"],
            &similarity_rows(space, t),
        ));
    }
    out
}

fn render_rates(model: &RateModel) -> String {
    let mut out = format!(
        "observations: {} (batch size {}, pending {})\n",
        model.observations(),
        model.batch_size(),
        model.pending_problems()
    );
    let rows: Vec<Vec<String>> = model
        .lambda_values()
        .iter()
        .map(|(id, l)| vec![id.to_string(), format!("{l:.6}")])
        .collect();
    out.push_str(&table(&["feature", "new-value rate"], &rows));
    out.push_str(&format!(
        "new-feature rate: {:.6}\n",
        model.lambda_features()
    ));
    out
}

fn recommendation_str(r: Recommendation) -> &'static str {
    match r {
        Recommendation::ActNow => "act-now",
        Recommendation::Wait => "wait",
        Recommendation::Indifferent => "indifferent",
    }
}

fn render_wait(memory: &Memory, v: &LotteryValuation, machine: bool) -> String {
    if machine {
        return pretty(&json!({
            "horizon": v.horizon,
            "event_probability": v.event_probability,
            "act_now": {
                "utility": rational_json(&v.act_now_utility),
                "value": v.act_now_value,
                "decision": decision_json(&v.now_report),
            },
            "wait": {
                "utility": rational_json(&v.future_utility),
                "value": v.wait_value,
                "decision": decision_json(&v.future_report),
            },
            "threshold_discount": v.threshold_discount,
            "recommendation": recommendation_str(v.recommendation),
        }));
    }
    let mut out = String::new();
    out.push_str(&format!(
        "act now on {}: U = {} ({})\n",
        v.now_report.query.display_in(memory.space()),
        fraction_string(&v.act_now_utility),
        decimal_string(&v.act_now_utility)
    ));
    out.push_str(&format!(
        "anticipated {} after {} interval(s), diameter {}:\n",
        v.future_report.query.display_in(&v.hypothetical_space),
        v.horizon,
        v.future_report.similarity.diameter_used
    ));
    out.push_str(&table(
        &["problem", "d", "s", "s (decimal)"],
        &similarity_rows(&v.hypothetical_space, &v.future_report.similarity),
    ));
    out.push_str(&format!(
        "future U = {} ({})\n",
        fraction_string(&v.future_utility),
        decimal_string(&v.future_utility)
    ));
    out.push_str(&format!("event probability: {:.6e}\n", v.event_probability));
    out.push_str(&format!("value of acting now: {:.6}\n", v.act_now_value));
    out.push_str(&format!("value of waiting: {:.6e}\n", v.wait_value));
    match v.threshold_discount {
        Some(k) => out.push_str(&format!("break-even discount: {k:.6e}\n")),
        None => out.push_str("break-even discount: undefined\n"),
    }
    out.push_str(&format!(
        "recommendation: {}\n",
        recommendation_str(v.recommendation)
    ));
    out
}

fn check_json(c: &CheckResult) -> Value {
    json!({
        "check": c.check_name,
        "instances": c.instances_tested,
        "exhaustive": c.exhaustive,
        "passed": c.passed(),
        "failure_count": c.failure_count,
        "failures": c.failures.iter().map(|f| json!({
            "witness": f.witness.iter().map(Problem::coordinates).collect::<Vec<_>>(),
            "expected": f.expected,
            "observed": f.observed,
        })).collect::<Vec<_>>(),
    })
}

fn render_checks(
    memory: &Memory,
    required: &[CheckResult],
    informational: &CheckResult,
    machine: bool,
) -> String {
    if machine {
        return pretty(&json!({
            "checks": required.iter().map(check_json).collect::<Vec<_>>(),
            "informational": [check_json(informational)],
        }));
    }
    let mut rows: Vec<Vec<String>> = required
        .iter()
        .map(|c| {
            vec![
                c.check_name.clone(),
                c.instances_tested.to_string(),
                if c.exhaustive {
                    "exhaustive"
                } else {
                    "sampled"
                }
                .to_string(),
                if c.passed() { "pass" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    rows.push(vec![
        informational.check_name.clone(),
        informational.instances_tested.to_string(),
        "history".to_string(),
        format!("{} counterexample(s)", informational.failure_count),
    ]);
    let mut out = table(&["check", "instances", "mode", "status"], &rows);
    for c in required.iter().chain(std::iter::once(informational)) {
        for f in c.failures.iter().take(3) {
            let w: Vec<String> = f
                .witness
                .iter()
                .map(|p| p.display_in(memory.space()))
                .collect();
            out.push_str(&format!(
                "  {}: {} [{}] witness {}\n",
                c.check_name,
                f.expected,
                f.observed,
                w.join(" ")
            ));
        }
    }
    out
}
