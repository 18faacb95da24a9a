//! Command-line surface. [`run_command`] does all the work and returns the
//! would-be process output, so the binary is a thin shell around it.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use iradic_core::bbn::{bahamas_configured, infer_marginal};
use iradic_core::cutset::exact_probability_at;
use iradic_core::etree::count_sequence_cutsets;
use iradic_core::{
    attach_software_ccf, attach_software_failures, compare_event_trees, expand_ccf_groups,
    filter_applicable_ucas, find_spofs, fussell_vesely, hazard_report, mcub_probability,
    minimal_cut_sets_at, quantify_event_tree, rare_event_probability, sequence_cutsets,
    validate_model, AnalysisConfig, CcfGroup, CutSetList, Error, EtResult, EventKind, FaultTree,
    Method, Model, State,
};

use crate::format::{parse_model, parse_real, render_model};
use crate::report::{
    BahamasDoc, CompareDoc, CutSetDoc, EtDoc, ExpansionDoc, FindingDoc, HazardDoc, ImportanceDoc,
    MarginalDoc, MethodResult, QuantifyDoc, Report, SpofDoc, ValidationDoc,
};

/// Environment variable capping the rows held by cut-set expansion.
pub const MAX_SETS_VAR: &str = "IRADIC_MAX_SETS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Process environment inputs, separated out so tests can supply them.
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub max_sets: Option<String>,
}

impl Env {
    pub fn from_process() -> Self {
        Self {
            max_sets: std::env::var(MAX_SETS_VAR).ok(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "iradic",
    version,
    about = "Integrated hardware/software risk analysis"
)]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, global = true, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    RareEvent,
    Mcub,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => Method::Exact,
            MethodArg::RareEvent => Method::RareEvent,
            MethodArg::Mcub => Method::Mcub,
        }
    }
}

#[derive(Args, Debug)]
struct Quantification {
    /// Drop cut sets below this probability [default: the model's, 1E-12].
    #[arg(long, value_name = "P")]
    truncate: Option<String>,
    /// Drop cut sets above this order.
    #[arg(long, value_name = "N")]
    order: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
}

#[derive(Args, Debug)]
struct TopArgs {
    model: PathBuf,
    /// Fault tree id or gate id.
    #[arg(long)]
    top: String,
    #[command(flatten)]
    q: Quantification,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a model file and list findings.
    Validate { model: PathBuf },
    /// Minimal cut sets of a top event.
    Cutsets(TopArgs),
    /// Top-event probability.
    QuantifyFt {
        #[command(flatten)]
        top: TopArgs,
        /// Report all three methods.
        #[arg(long)]
        all: bool,
    },
    /// Single points of failure (order-1 cut sets).
    Spof(TopArgs),
    /// Fussell-Vesely importance of every basic event in the cut sets.
    Importance(TopArgs),
    /// Replace hardware CCF group members by their beta-factor expansion.
    ExpandCcf {
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Attach software failures and software CCFs, then report hazards.
    Integrate {
        #[command(flatten)]
        top: TopArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Marginal failure probability of a BBN node.
    BbnInfer {
        model: PathBuf,
        #[arg(long)]
        bbn: String,
        /// Node to query [default: the network's first query].
        #[arg(long)]
        query: Option<String>,
        /// Observations such as `REQ=fail,TEST=ok`.
        #[arg(long, value_delimiter = ',')]
        evidence: Vec<String>,
    },
    /// Generic, specific, individual and CCF software failure probabilities.
    Bahamas {
        model: PathBuf,
        #[arg(long)]
        bbn: String,
    },
    /// Sequence frequencies of an event tree.
    QuantifyEt {
        model: PathBuf,
        #[arg(long)]
        et: String,
        #[arg(long)]
        end_state: Option<String>,
        /// Also list zero-frequency sequences.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        q: Quantification,
    },
    /// Minimal cut sets of one event tree sequence.
    SeqCutsets {
        model: PathBuf,
        #[arg(long)]
        et: String,
        #[arg(long)]
        sequence: String,
        #[command(flatten)]
        q: Quantification,
    },
    /// Compare one event tree across two models.
    Compare {
        original: PathBuf,
        improved: PathBuf,
        #[arg(long)]
        et: String,
        #[arg(long)]
        end_state: Option<String>,
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        q: Quantification,
    },
}

enum Failure {
    Usage(String),
    Invalid(String),
    Findings(ValidationDoc),
    Resource(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceLimit { .. }
            | Error::TooManyEvents { .. }
            | Error::GateTooWide { .. } => Failure::Resource(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

type Outcome = Result<(String, String), Failure>;

/// Runs one command line (program name first) with the process environment.
pub fn run_command<I, T>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_command_with(args, &Env::from_process())
}

pub fn run_command_with<I, T>(args: I, env: &Env) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandOutcome {
                    exit_code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                CommandOutcome {
                    exit_code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let format = cli.format;
    match dispatch(cli.command, format, env) {
        Ok((stdout, stderr)) => CommandOutcome {
            exit_code: EXIT_OK,
            stdout,
            stderr,
        },
        Err(f) => {
            let (exit_code, stdout, stderr) = match f {
                Failure::Usage(msg) => (EXIT_USAGE, String::new(), format!("error: {msg}\n")),
                Failure::Invalid(msg) => (EXIT_INVALID, String::new(), format!("error: {msg}\n")),
                Failure::Resource(msg) => (EXIT_RESOURCE, String::new(), format!("error: {msg}\n")),
                Failure::Findings(doc) => (EXIT_INVALID, render(&doc, format), String::new()),
            };
            CommandOutcome {
                exit_code,
                stdout,
                stderr,
            }
        }
    }
}

fn render<R: Report>(r: &R, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => r.to_text(),
        OutputFormat::Json => r.to_json(),
    }
}

/// A validated model plus the warnings found on the way.
struct Loaded {
    model: Model,
    warnings: String,
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let model =
        parse_model(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    let report = validate_model(&model);
    if report.has_errors() {
        return Err(Failure::Findings(ValidationDoc::new(&report)));
    }
    let mut warnings = String::new();
    for f in &report.findings {
        let f = FindingDoc::from(f);
        warnings.push_str(&format!("{}\t{}\t{}\n", f.severity, f.location, f.message));
    }
    Ok(Loaded { model, warnings })
}

/// Applies command-line and environment overrides to the model's settings.
fn configure(m: &mut Model, q: &Quantification, env: &Env) -> Result<(), Failure> {
    if let Some(t) = &q.truncate {
        let p = parse_real(t).map_err(|e| Failure::Usage(format!("--truncate: {e}")))?;
        if p < 0.0 {
            return Err(Failure::Usage("--truncate must not be negative".into()));
        }
        m.config.truncation_probability = p;
    }
    if let Some(o) = q.order {
        if o == 0 {
            return Err(Failure::Usage("--order must be at least 1".into()));
        }
        m.config.max_cutset_order = Some(o);
    }
    if let Some(method) = q.method {
        m.config.quantification_method = method.into();
    }
    if let Some(v) = &env.max_sets {
        m.config.max_intermediate_sets = v
            .trim()
            .parse()
            .ok()
            .filter(|n: &usize| *n > 0)
            .ok_or_else(|| {
                Failure::Usage(format!(
                    "{MAX_SETS_VAR}: expected a positive integer, got `{v}`"
                ))
            })?;
    }
    Ok(())
}

fn locate<'a>(m: &'a Model, top: &'a str) -> Result<(&'a FaultTree, &'a str), Failure> {
    m.locate(top)
        .ok_or_else(|| Failure::Usage(format!("unknown top `{top}`")))
}

fn probability_from(
    list: &CutSetList,
    method: Method,
    exact: impl FnOnce() -> Result<f64, Error>,
) -> Result<f64, Failure> {
    Ok(match method {
        Method::RareEvent => rare_event_probability(list),
        Method::Mcub => mcub_probability(list),
        Method::Exact => exact()?,
    })
}

fn write_atomic(path: &Path, text: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Usage(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn dispatch(command: Command, format: OutputFormat, env: &Env) -> Outcome {
    match command {
        Command::Validate { model } => {
            let text = std::fs::read_to_string(&model)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", model.display())))?;
            let m = parse_model(&text)
                .map_err(|e| Failure::Invalid(format!("{}: {e}", model.display())))?;
            let doc = ValidationDoc::new(&validate_model(&m));
            if doc.errors > 0 {
                return Err(Failure::Findings(doc));
            }
            Ok((render(&doc, format), String::new()))
        }
        Command::Cutsets(args) => {
            let Loaded {
                mut model,
                warnings,
            } = load(&args.model)?;
            configure(&mut model, &args.q, env)?;
            let cfg = &model.config;
            let (ft, top) = locate(&model, &args.top)?;
            let list = minimal_cut_sets_at(ft, top, cfg)?;
            let method = cfg.quantification_method;
            let p = probability_from(&list, method, || exact_probability_at(ft, top, cfg))?;
            Ok((render(&CutSetDoc::new(&list, method, p), format), warnings))
        }
        Command::QuantifyFt { top: args, all } => {
            let Loaded {
                mut model,
                warnings,
            } = load(&args.model)?;
            configure(&mut model, &args.q, env)?;
            let cfg = &model.config;
            let (ft, top) = locate(&model, &args.top)?;
            let methods = if all {
                vec![Method::Exact, Method::Mcub, Method::RareEvent]
            } else {
                vec![cfg.quantification_method]
            };
            let needs_cut_sets = methods.iter().any(|m| *m != Method::Exact);
            let list = if needs_cut_sets {
                Some(minimal_cut_sets_at(ft, top, cfg)?)
            } else {
                None
            };
            let mut results = Vec::new();
            for method in methods {
                let result = match (method, &list) {
                    (Method::Exact, _) => match exact_probability_at(ft, top, cfg) {
                        Ok(p) => MethodResult {
                            method: method.as_str(),
                            probability: Some(p),
                            note: None,
                        },
                        Err(e @ Error::TooManyEvents { .. }) if all => MethodResult {
                            method: method.as_str(),
                            probability: None,
                            note: Some(e.to_string()),
                        },
                        Err(e) => return Err(e.into()),
                    },
                    (_, Some(list)) => MethodResult {
                        method: method.as_str(),
                        probability: Some(probability_from(list, method, || unreachable!())?),
                        note: None,
                    },
                    (_, None) => unreachable!("cut sets computed for non-exact methods"),
                };
                results.push(result);
            }
            let doc = QuantifyDoc {
                top: top.to_string(),
                results,
            };
            Ok((render(&doc, format), warnings))
        }
        Command::Spof(args) => {
            let Loaded {
                mut model,
                warnings,
            } = load(&args.model)?;
            configure(&mut model, &args.q, env)?;
            let (ft, top) = locate(&model, &args.top)?;
            let list = minimal_cut_sets_at(ft, top, &model.config)?;
            let doc = SpofDoc {
                top: top.to_string(),
                spofs: find_spofs(&list),
            };
            Ok((render(&doc, format), warnings))
        }
        Command::Importance(args) => {
            let Loaded {
                mut model,
                warnings,
            } = load(&args.model)?;
            configure(&mut model, &args.q, env)?;
            let (ft, top) = locate(&model, &args.top)?;
            let list = minimal_cut_sets_at(ft, top, &model.config)?;
            let rows = fussell_vesely(&list)?;
            Ok((render(&ImportanceDoc::new(top, &rows), format), warnings))
        }
        Command::ExpandCcf { model: path, out } => {
            let Loaded { model, warnings } = load(&path)?;
            let expanded = expand_ccf_groups(&model)?;
            let before: BTreeSet<(&str, &str)> = model
                .fault_trees
                .values()
                .flat_map(|ft| ft.events().map(move |e| (ft.id.as_str(), e.id.as_str())))
                .collect();
            let mut ccf_events: Vec<String> = expanded
                .fault_trees
                .values()
                .flat_map(|ft| {
                    ft.events()
                        .filter(|e| e.kind == EventKind::Ccf)
                        .filter(|e| !before.contains(&(ft.id.as_str(), e.id.as_str())))
                        .map(|e| e.id.clone())
                })
                .collect();
            ccf_events.sort();
            ccf_events.dedup();
            let groups = model
                .ccf_groups
                .values()
                .filter(|g| !g.is_software(&model.uca_catalog))
                .map(|g| g.id.clone())
                .collect();
            let written_to = match &out {
                Some(p) => {
                    let text =
                        render_model(&expanded).map_err(|e| Failure::Invalid(e.to_string()))?;
                    write_atomic(p, &text)?;
                    Some(p.display().to_string())
                }
                None => None,
            };
            let doc = ExpansionDoc {
                groups,
                ccf_events,
                written_to,
            };
            Ok((render(&doc, format), warnings))
        }
        Command::Integrate { top: args, out } => {
            let Loaded {
                mut model,
                warnings,
            } = load(&args.model)?;
            configure(&mut model, &args.q, env)?;
            let (doc, integrated) = integrate(&model, &args.top)?;
            if let Some(p) = &out {
                let text =
                    render_model(&integrated).map_err(|e| Failure::Invalid(e.to_string()))?;
                write_atomic(p, &text)?;
            }
            Ok((render(&doc, format), warnings))
        }
        Command::BbnInfer {
            model: path,
            bbn,
            query,
            evidence,
        } => {
            let Loaded { model, warnings } = load(&path)?;
            let b = model
                .bbns
                .get(&bbn)
                .ok_or_else(|| Failure::Usage(format!("unknown bbn `{bbn}`")))?;
            let query = match query.or_else(|| b.queries.first().cloned()) {
                Some(q) => q,
                None => {
                    return Err(Failure::Usage(format!(
                        "bbn `{bbn}` has no query; pass --query"
                    )))
                }
            };
            let mut observed = BTreeMap::new();
            for item in evidence.iter().filter(|s| !s.is_empty()) {
                let (node, state) = item.split_once('=').ok_or_else(|| {
                    Failure::Usage(format!("--evidence: expected NODE=fail|ok, got `{item}`"))
                })?;
                let state = match state {
                    "fail" => State::Fail,
                    "ok" => State::Ok,
                    other => {
                        return Err(Failure::Usage(format!(
                            "--evidence: unknown state `{other}`"
                        )))
                    }
                };
                if !b.nodes.contains_key(node) {
                    return Err(Failure::Usage(format!("--evidence: unknown node `{node}`")));
                }
                observed.insert(node.to_string(), state);
            }
            if !b.nodes.contains_key(&query) {
                return Err(Failure::Usage(format!("unknown node `{query}`")));
            }
            let p = infer_marginal(b, &query, &observed)?;
            let doc = MarginalDoc {
                bbn,
                query,
                evidence: observed
                    .into_iter()
                    .map(|(k, s)| (k, if s == State::Fail { "fail" } else { "ok" }))
                    .collect(),
                probability: p,
            };
            Ok((render(&doc, format), warnings))
        }
        Command::Bahamas { model: path, bbn } => {
            let Loaded { model, warnings } = load(&path)?;
            let b = model
                .bbns
                .get(&bbn)
                .ok_or_else(|| Failure::Usage(format!("unknown bbn `{bbn}`")))?;
            let result = bahamas_configured(b)?;
            let query = b.bahamas.as_ref().map_or("", |c| c.query.as_str());
            Ok((
                render(&BahamasDoc::new(&bbn, query, &result), format),
                warnings,
            ))
        }
        Command::QuantifyEt {
            model: path,
            et,
            end_state,
            all,
            q,
        } => {
            let Loaded {
                mut model,
                warnings,
            } = load(&path)?;
            configure(&mut model, &q, env)?;
            let result = quantify(&model, &et, end_state.as_deref())?;
            Ok((render(&EtDoc::new(&result, all), format), warnings))
        }
        Command::SeqCutsets {
            model: path,
            et,
            sequence,
            q,
        } => {
            let Loaded {
                mut model,
                warnings,
            } = load(&path)?;
            configure(&mut model, &q, env)?;
            if !model.event_trees.contains_key(&et) {
                return Err(Failure::Usage(format!("unknown event tree `{et}`")));
            }
            if model.event_trees[&et].sequence(&sequence).is_none() {
                return Err(Failure::Usage(format!("unknown sequence `{sequence}`")));
            }
            let seq = sequence_cutsets(&model, &et, &sequence, &model.config)?;
            // Sequence frequencies from cut sets use a cut-set method.
            let method = match model.config.quantification_method {
                Method::Exact => Method::Mcub,
                m => m,
            };
            let p = probability_from(&seq.cutsets, method, || unreachable!())?;
            Ok((
                render(&CutSetDoc::for_sequence(&seq, method, p), format),
                warnings,
            ))
        }
        Command::Compare {
            original,
            improved,
            et,
            end_state,
            all,
            q,
        } => {
            let Loaded {
                model: mut a,
                warnings: wa,
            } = load(&original)?;
            let Loaded {
                model: mut b,
                warnings: wb,
            } = load(&improved)?;
            configure(&mut a, &q, env)?;
            configure(&mut b, &q, env)?;
            let ra = quantify(&a, &et, end_state.as_deref())?;
            let rb = quantify(&b, &et, end_state.as_deref())?;
            let report = compare_event_trees(&ra, &rb)?;
            Ok((render(&CompareDoc::new(&report, all), format), wa + &wb))
        }
    }
}

fn quantify(m: &Model, et: &str, end_state: Option<&str>) -> Result<EtResult, Failure> {
    if !m.event_trees.contains_key(et) {
        return Err(Failure::Usage(format!("unknown event tree `{et}`")));
    }
    let mut result = quantify_event_tree(m, et, end_state)?;
    count_sequence_cutsets(m, &mut result, &m.config)?;
    Ok(result)
}

/// The integration pipeline for the fault tree holding `top`: hardware CCF
/// expansion, applicable UCAs attached as software events, software CCF
/// groups expanded, then the hazard report. Also returns the model with the
/// integrated tree in place.
fn integrate(model: &Model, top: &str) -> Result<(HazardDoc, Model), Failure> {
    let expanded = expand_ccf_groups(model)?;
    let (ft, gate) = locate(&expanded, top)?;
    let mut tree = ft.clone();
    tree.top = gate.to_string();

    let cfg: &AnalysisConfig = &expanded.config;
    let ucas: Vec<_> =
        filter_applicable_ucas(&expanded.uca_catalog, tree.top_kind, &cfg.applicability)
            .into_iter()
            .filter(|u| tree.nodes.contains_key(&u.controller))
            .collect();
    let ift = attach_software_failures(&tree, &ucas)?;
    let groups: Vec<CcfGroup> = expanded
        .ccf_groups
        .values()
        .filter(|g| g.is_software(&expanded.uca_catalog))
        .filter(|g| g.members.iter().all(|mbr| ift.tree.nodes.contains_key(mbr)))
        .cloned()
        .collect();
    let ift = attach_software_ccf(&ift, &groups, &expanded.uca_catalog)?;
    let report = hazard_report(&ift, cfg)?;
    let method = cfg.quantification_method;
    let p = probability_from(&report.cutsets, method, || {
        iradic_core::exact_top_probability(&ift.tree, cfg)
    })?;
    let software: Vec<String> = ift.software_events().map(str::to_string).collect();
    let doc = HazardDoc::new(&report, software, method, p);

    let mut out = expanded.clone();
    let mut integrated_tree = ift.tree;
    integrated_tree.top = ft.top.clone();
    out.fault_trees
        .insert(integrated_tree.id.clone(), integrated_tree);
    Ok((doc, out))
}
