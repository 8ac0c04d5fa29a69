//! Report structures and their text and machine renderings.

use std::fmt::Write as _;
use std::io;

use bvpkit::characteristic::{kernel_directions, CharacteristicMatrix, SolvabilityReport};
use bvpkit::limits::{AssumptionReport, Direction, LimitReport};
use bvpkit::prelude::*;
use bvpkit::solver::{Residuals, Solution};
use serde::Serialize;

use crate::oracle::OracleReport;
use crate::Format;

pub type Pair = [f64; 2];

pub fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

pub fn pairs(v: &CVector) -> Vec<Pair> {
    v.iter().map(|&z| pair(z)).collect()
}

pub fn rows(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect()).collect()
}

/// Writes every float with 17 significant digits.
struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write!(w, "{:.16e}", v as f64)
    }
}

pub fn to_machine<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats);
    value.serialize(&mut ser).expect("reports always serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemSummary {
    pub a: f64,
    pub b: f64,
    pub r: usize,
    pub m: usize,
    pub n: usize,
    pub q: usize,
    pub p: LebesgueExponent,
    pub nodes: usize,
}

impl ProblemSummary {
    fn text(&self) -> String {
        let p = if self.p.is_infinite() { "inf".to_string() } else { format!("{}", self.p.value()) };
        format!(
            "problem    r={} m={} n={} q={} p={} on [{}, {}], {} nodes\n",
            self.r, self.m, self.n, self.q, p, self.a, self.b, self.nodes
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub command: &'static str,
    pub problem: ProblemSummary,
    pub report: SolvabilityReport,
    pub condition_number: f64,
    pub characteristic_matrix: Vec<Vec<Pair>>,
    pub kernel_directions: Vec<Vec<Pair>>,
}

impl AnalyzeReport {
    pub fn new(problem: ProblemSummary, cm: &CharacteristicMatrix, report: SolvabilityReport) -> Self {
        Self {
            command: "analyze",
            problem,
            report,
            condition_number: cm.condition_number(),
            characteristic_matrix: rows(cm.entries()),
            kernel_directions: kernel_directions(cm).iter().map(pairs).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeSample {
    pub t: f64,
    /// `orders[k]` is `y^(k)(t)`.
    pub orders: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub command: &'static str,
    pub problem: ProblemSummary,
    pub xi: Vec<Pair>,
    pub condition_number: f64,
    pub residuals: Residuals,
    pub diagnostics: Vec<Diagnostic>,
    pub samples: Vec<NodeSample>,
}

impl SolveReport {
    pub fn new(problem: ProblemSummary, sol: &Solution) -> Self {
        let grid = sol.stack.grid();
        let samples = (0..grid.len())
            .map(|i| NodeSample { t: grid.node(i), orders: (0..=sol.stack.max_order()).map(|k| pairs(sol.stack.at(k, i))).collect() })
            .collect();
        let mut diagnostics = sol.report.diagnostics.clone();
        diagnostics.extend(sol.diagnostics.iter().cloned());
        Self {
            command: "solve",
            problem,
            xi: pairs(&sol.xi),
            condition_number: sol.condition_number,
            residuals: sol.residuals,
            diagnostics,
            samples,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyReport {
    #[serde(rename = "problem")]
    pub summary: ProblemSummary,
    pub limit: LimitReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assumptions: Option<AssumptionReport>,
}

#[derive(Serialize)]
struct TaggedFamily<'a> {
    command: &'static str,
    #[serde(flatten)]
    inner: &'a FamilyReport,
}

#[derive(Debug, Clone)]
pub enum Output {
    Analyze(AnalyzeReport),
    Solve(SolveReport),
    Family(FamilyReport),
    Oracle(OracleReport),
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Machine => match self {
                Output::Analyze(r) => to_machine(r),
                Output::Solve(r) => to_machine(r),
                Output::Family(r) => to_machine(&TaggedFamily { command: "family", inner: r }),
                Output::Oracle(r) => to_machine(r),
            },
            Format::Text => match self {
                Output::Analyze(r) => analyze_text(r),
                Output::Solve(r) => solve_text(r),
                Output::Family(r) => family_text(r),
                Output::Oracle(r) => r.text(),
            },
        }
    }
}

pub fn fmt_complex(z: Pair) -> String {
    format!("{:+.6e}{:+.6e}i", z[0], z[1])
}

fn diagnostics_text(out: &mut String, diags: &[Diagnostic]) {
    if diags.is_empty() {
        return;
    }
    out.push_str("diagnostics\n");
    for d in diags {
        let _ = writeln!(out, "  {d}");
    }
}

fn analyze_text(r: &AnalyzeReport) -> String {
    let rep = &r.report;
    let mut out = r.problem.text();
    let _ = writeln!(
        out,
        "index {}    dim ker {}    dim coker {}    rank {} (tol {:.3e})    {}",
        rep.index,
        rep.dim_ker,
        rep.dim_coker,
        rep.numerical_rank,
        rep.rank_tolerance,
        if rep.well_posed { "well posed" } else { "NOT well posed" }
    );
    let _ = writeln!(out, "condition number {:.6e}", r.condition_number);
    out.push_str("singular values\n");
    for (i, s) in rep.singular_values.iter().enumerate() {
        let _ = writeln!(out, "  {:>3}  {s:.6e}", i + 1);
    }
    if r.kernel_directions.is_empty() {
        out.push_str("kernel directions: none\n");
    } else {
        out.push_str("kernel directions\n");
        for (i, v) in r.kernel_directions.iter().enumerate() {
            let _ = writeln!(out, "  {:>3}  {}", i + 1, v.iter().map(|&z| fmt_complex(z)).collect::<Vec<_>>().join("  "));
        }
    }
    diagnostics_text(&mut out, &rep.diagnostics);
    out
}

const TEXT_NODES: usize = 11;

fn solve_text(r: &SolveReport) -> String {
    let mut out = r.problem.text();
    let _ = writeln!(out, "condition number {:.6e}", r.condition_number);
    let _ = writeln!(out, "residuals  equation {:.3e}    boundary {:.3e}", r.residuals.equation, r.residuals.boundary);
    let _ = writeln!(out, "xi  {}", r.xi.iter().map(|&z| fmt_complex(z)).collect::<Vec<_>>().join("  "));
    diagnostics_text(&mut out, &r.diagnostics);
    let n = r.samples.len();
    let shown: Vec<usize> = if n <= TEXT_NODES { (0..n).collect() } else { (0..TEXT_NODES).map(|k| k * (n - 1) / (TEXT_NODES - 1)).collect() };
    let _ = writeln!(out, "y(t) at {} of {} nodes (machine format lists every node and order)", shown.len(), n);
    let _ = writeln!(out, "  {:>12}  components", "t");
    for i in shown {
        let s = &r.samples[i];
        let _ = writeln!(out, "  {:>12.6}  {}", s.t, s.orders[0].iter().map(|&z| fmt_complex(z)).collect::<Vec<_>>().join("  "));
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"))
}

fn family_text(r: &FamilyReport) -> String {
    let mut out = r.summary.text();
    let lim = &r.limit;
    let direction = match lim.direction {
        Direction::EpsilonToZero => "eps -> 0",
        Direction::IndexToInfinity => "k -> inf (eps = 1/k)",
    };
    let _ = writeln!(out, "direction {direction}");
    let _ = writeln!(
        out,
        "{:>10}  {:>10}  {:>10}  {:>7}  {:>10}  {:>10}  {:>10}  note",
        "eps", "max |dA|", "|dM|", "ker/cok", "error", "discrep.", "ratio"
    );
    for row in &lim.rows {
        let da = row.coefficient_distances.iter().copied().fold(0.0, f64::max);
        let _ = writeln!(
            out,
            "{:>10.3e}  {:>10.3e}  {:>10.3e}  {:>7}  {:>10}  {:>10}  {:>10}  {}",
            row.eps,
            da,
            row.characteristic_distance,
            format!("{}/{}", row.dim_ker, row.dim_coker),
            opt(row.solution_error),
            opt(row.discrepancy),
            opt(row.ratio),
            row.note.as_deref().unwrap_or("")
        );
    }
    if let Some([lo, hi]) = lim.ratio_bracket {
        let _ = writeln!(out, "ratio bracket [{lo:.3e}, {hi:.3e}]");
    }
    out.push_str("verdicts\n");
    for v in &lim.verdicts {
        let _ = writeln!(out, "  {:<16} {}  {}", v.name, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if let Some(a) = &r.assumptions {
        let _ = writeln!(out, "multipoint assumptions ({})", if a.pass { "PASS" } else { "FAIL" });
        for row in &a.rows {
            let vals = row.values.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join("  ");
            let _ = writeln!(
                out,
                "  {:<8} {:<8} {}  {}",
                row.name,
                if row.required { "required" } else { "info" },
                if row.pass { "PASS" } else { "FAIL" },
                vals
            );
        }
    }
    out
}
