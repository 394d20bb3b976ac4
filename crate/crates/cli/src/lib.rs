//! The `bg` command line: analysis, counting, verification against the
//! exhaustive oracle, enumeration and sampling of balanced labelings.
//!
//! Exit codes: 0 success or PASS, 1 usage or parse error, 2 verification
//! FAIL, 3 oracle budget exceeded.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use balanced_core::balance::{candidate_count, Oracle};
use balanced_core::{
    analyze, count, enumerate_all, load_graph, make_group, sample_uniform, Digraph, FiniteGroup,
    Labeling, Mode, OracleError, Target, DEFAULT_ORACLE_BUDGET,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Environment variable overriding the default oracle budget.
pub const BUDGET_ENV: &str = "BG_ORACLE_BUDGET";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bg",
    version,
    about = "Balanced group-valued labelings of directed graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural report: connectivity, bipartiteness, strongly connected components.
    Analyze { graph: PathBuf },
    /// Closed-form number of balanced labelings.
    Count {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        json: bool,
    },
    /// Compare the closed-form count with exhaustive enumeration.
    Verify {
        #[command(flatten)]
        problem: Problem,
        /// Maximum number of candidate labelings the oracle may visit.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// List every balanced labeling, one per line.
    Enumerate {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        limit: Option<u64>,
        #[arg(long)]
        show_elements: bool,
    },
    /// Draw one balanced labeling uniformly at random.
    Sample {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        show_elements: bool,
    },
    /// Order, number of involutions, and commutativity of a group.
    GroupInfo {
        #[arg(long)]
        group: String,
    },
}

#[derive(Debug, Args)]
pub struct Problem {
    pub graph: PathBuf,
    /// Group spec: cyclic:n, dihedral:n, symmetric:n, quaternion:8,
    /// product:<spec>,<spec>, table:<path>.
    #[arg(long)]
    pub group: String,
    #[arg(long, default_value = "edges")]
    pub target: Target,
    #[arg(long, default_value = "flexible")]
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub mode: String,
    pub target: String,
    pub group_spec: String,
    pub group_order: usize,
    pub involution_count: usize,
    pub vertices: usize,
    pub edges: usize,
    pub bipartite: bool,
    pub scc_count: usize,
    pub cross_scc_edges: usize,
    pub s_exponent: u32,
    pub t_exponent: u32,
    pub count_decimal: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub mode: String,
    pub target: String,
    pub group_spec: String,
    pub formula: String,
    pub oracle: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupInfo {
    pub order: usize,
    pub involution_count: usize,
    pub abelian: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Budget(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Budget(m) => f.write_str(m),
        }
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Budget(_) => EXIT_BUDGET,
        }
    }
}

fn usage(e: impl fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read_graph(path: &Path) -> Result<Digraph, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    load_graph(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load(problem: &Problem) -> Result<(FiniteGroup, Digraph), Failure> {
    let g = make_group(&problem.group).map_err(usage)?;
    let d = read_graph(&problem.graph)?;
    Ok((g, d))
}

fn budget_from_env() -> Result<u64, Failure> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{BUDGET_ENV}={v} is not a non-negative integer"))),
        Err(_) => Ok(DEFAULT_ORACLE_BUDGET),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

fn build_count_report(problem: &Problem) -> Result<CountReport, Failure> {
    let (g, d) = load(problem)?;
    let c = count(&g, &d, problem.target, problem.mode).map_err(usage)?;
    let report = analyze(&d);
    Ok(CountReport {
        mode: problem.mode.to_string(),
        target: problem.target.to_string(),
        group_spec: problem.group.clone(),
        group_order: g.order(),
        involution_count: g.involutions().len(),
        vertices: d.n_vertices(),
        edges: d.n_edges(),
        bipartite: report.bipartite,
        scc_count: report.scc_count,
        cross_scc_edges: report.cross_scc_edges,
        s_exponent: c.s,
        t_exponent: c.t,
        count_decimal: c.value.to_string(),
    })
}

fn render_count_text(r: &CountReport) -> String {
    let rows: [(&str, String); 13] = [
        ("mode", r.mode.clone()),
        ("target", r.target.clone()),
        ("group", r.group_spec.clone()),
        ("group order", r.group_order.to_string()),
        ("involutions", r.involution_count.to_string()),
        ("vertices", r.vertices.to_string()),
        ("edges", r.edges.to_string()),
        ("bipartite", r.bipartite.to_string()),
        ("scc count", r.scc_count.to_string()),
        ("cross-scc edges", r.cross_scc_edges.to_string()),
        ("s exponent", r.s_exponent.to_string()),
        ("t exponent", r.t_exponent.to_string()),
        ("count", r.count_decimal.clone()),
    ];
    rows.iter().map(|(k, v)| format!("{k:<16} {v}\n")).collect()
}

/// One output line: vertex values, ` | `, edge values for full labelings;
/// edge values alone otherwise.
pub fn format_labeling(g: &FiniteGroup, l: &Labeling, show_elements: bool) -> String {
    let render = |xs: &[balanced_core::ElementIndex]| {
        xs.iter()
            .map(|&x| {
                if show_elements {
                    g.element_name(x).to_string()
                } else {
                    x.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    match l {
        Labeling::Edges(f) => render(&f.values),
        Labeling::Full(h) => format!("{} | {}", render(&h.vertex_values), render(&h.edge_values)),
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| usage(format!("write error: {e}"));
    match cli.command {
        Command::Analyze { graph } => {
            let d = read_graph(&graph)?;
            writeln!(out, "{}", to_json(&analyze(&d))).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Count { problem, json } => {
            let r = build_count_report(&problem)?;
            if json {
                writeln!(out, "{}", to_json(&r)).map_err(io)?;
            } else {
                write!(out, "{}", render_count_text(&r)).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            problem,
            budget,
            json,
        } => {
            let budget = match budget {
                Some(b) => b,
                None => budget_from_env()?,
            };
            let (g, d) = load(&problem)?;
            let formula = count(&g, &d, problem.target, problem.mode).map_err(usage)?;
            let oracle = Oracle::with_budget(budget)
                .count(&g, &d, problem.target, problem.mode)
                .map_err(|e| match e {
                    OracleError::BudgetExceeded { .. } => Failure::Budget(format!(
                        "{e}; rerun with --budget {} or set {BUDGET_ENV}",
                        candidate_count(&g, &d, problem.target)
                    )),
                })?;
            let pass = formula.value == oracle;
            let report = VerifyReport {
                mode: problem.mode.to_string(),
                target: problem.target.to_string(),
                group_spec: problem.group.clone(),
                formula: formula.value.to_string(),
                oracle: oracle.to_string(),
                pass,
            };
            if json {
                writeln!(out, "{}", to_json(&report)).map_err(io)?;
            } else {
                writeln!(out, "formula {}", report.formula).map_err(io)?;
                writeln!(out, "oracle  {}", report.oracle).map_err(io)?;
                let (verdict, rel) = if pass { ("PASS", "=") } else { ("FAIL", "!=") };
                writeln!(
                    out,
                    "{verdict} ({} {rel} {})",
                    report.formula, report.oracle
                )
                .map_err(io)?;
            }
            Ok(if pass { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Enumerate {
            problem,
            limit,
            show_elements,
        } => {
            let (g, d) = load(&problem)?;
            let mut stream = enumerate_all(&g, &d, problem.target, problem.mode).map_err(usage)?;
            let mut emitted = 0u64;
            loop {
                if limit.is_some_and(|n| emitted >= n) {
                    if stream.next().is_some() {
                        writeln!(out, "# truncated after {emitted} labelings").map_err(io)?;
                    }
                    break;
                }
                let Some(l) = stream.next() else { break };
                writeln!(out, "{}", format_labeling(&g, &l, show_elements)).map_err(io)?;
                emitted += 1;
            }
            Ok(EXIT_OK)
        }
        Command::Sample {
            problem,
            seed,
            show_elements,
        } => {
            let (g, d) = load(&problem)?;
            let l = sample_uniform(&g, &d, problem.target, problem.mode, seed).map_err(usage)?;
            writeln!(out, "{}", format_labeling(&g, &l, show_elements)).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::GroupInfo { group } => {
            let g = make_group(&group).map_err(usage)?;
            let info = GroupInfo {
                order: g.order(),
                involution_count: g.involutions().len(),
                abelian: g.is_abelian(),
            };
            writeln!(out, "{}", to_json(&info)).map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.code()
        }
    }
}
