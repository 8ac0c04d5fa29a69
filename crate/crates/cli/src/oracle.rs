//! Numerical characteristic matrices against the closed forms.

use std::fmt::Write as _;

use bvpkit::closed_forms::{oracle_characteristic, ExampleProblem, OracleForm};
use bvpkit::prelude::*;
use serde::Serialize;

use crate::report::{rows, Output, Pair};
use crate::{CliError, ProblemDocument, Settings, Status};

/// Relative deviation below which the derived closed form counts as matched.
pub const ORACLE_TOL: f64 = 1e-6;

pub const BUILTINS: [(&str, &str); 5] = [
    ("example1", include_str!("../builtin/example1.json")),
    ("example2", include_str!("../builtin/example2.json")),
    ("example3", include_str!("../builtin/example3.json")),
    ("example4", include_str!("../builtin/example4.json")),
    ("example5", include_str!("../builtin/example5.json")),
];

pub fn builtin(name: &str) -> Option<ProblemDocument> {
    BUILTINS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ProblemDocument::from_json(text).expect("builtin documents are valid"))
}

fn constant(f: &MatrixFunction) -> Option<&CMatrix> {
    match f {
        MatrixFunction::Constant(a) => Some(a),
        _ => None,
    }
}

fn by_order(points: &[PointTerm], len: usize, q: usize, m: usize) -> Vec<CMatrix> {
    let mut out = vec![CMatrix::zeros(q, m); len];
    for p in points {
        out[p.order] += &p.matrix;
    }
    out
}

fn unsupported() -> CliError {
    CliError::Usage(
        "document does not match a reference configuration (constant coefficients; r = 1, or r = 2 with one of A_0, A_1 zero and points only at the ends)".into(),
    )
}

/// Recognizes which reference problem a document describes.
pub fn classify(spec: &ProblemSpec) -> Result<ExampleProblem, CliError> {
    let (q, m) = (spec.q(), spec.m());
    let top = spec.top_order();
    let b = spec.boundary();
    let coeffs: Vec<&CMatrix> = spec.coeffs().coefficients().iter().map(constant).collect::<Option<_>>().ok_or_else(unsupported)?;
    let is_zero = |a: &CMatrix| a.iter().all(|z| *z == Complex64::new(0.0, 0.0));
    let (a, bend) = (spec.interval().a(), spec.interval().b());
    match spec.r() {
        1 if is_zero(coeffs[0]) => {
            if b.integral().is_some() {
                Ok(ExampleProblem::Five { alpha0: by_order(b.points(), top, q, m).swap_remove(0) })
            } else {
                Ok(ExampleProblem::Two { terms: b.points().iter().map(|p| (p.order, p.matrix.clone())).collect() })
            }
        }
        1 if b.integral().is_none() && b.points().iter().all(|p| p.t == a) => {
            Ok(ExampleProblem::One { a: coeffs[0].clone(), alpha: by_order(b.points(), top, q, m) })
        }
        2 if b.integral().is_none() && b.points().iter().all(|p| p.t == a || p.t == bend) => {
            let (left, right): (Vec<PointTerm>, Vec<PointTerm>) = b.points().iter().cloned().partition(|p| p.t == a);
            let alpha = by_order(&left, top, q, m);
            let beta = by_order(&right, top, q, m);
            let length = spec.interval().length();
            if is_zero(coeffs[0]) {
                Ok(ExampleProblem::Three { a: coeffs[1].clone(), alpha, beta, length })
            } else if is_zero(coeffs[1]) {
                Ok(ExampleProblem::Four { a: coeffs[0].clone(), alpha, beta, length })
            } else {
                Err(unsupported())
            }
        }
        _ => Err(unsupported()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCase {
    pub source: String,
    pub example: &'static str,
    pub nodes: usize,
    pub numerical: Vec<Vec<Pair>>,
    pub derived: Vec<Vec<Pair>>,
    pub printed: Vec<Vec<Pair>>,
    /// Max entrywise deviation relative to the largest oracle entry.
    pub deviation_derived: f64,
    pub deviation_printed: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub command: &'static str,
    pub tolerance: f64,
    pub cases: Vec<OracleCase>,
}

fn deviation(got: &CMatrix, want: &CMatrix) -> f64 {
    let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    got.iter().zip(want.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

pub fn check(source: &str, doc: &ProblemDocument, settings: &Settings) -> Result<OracleCase, CliError> {
    let spec = doc.spec_at(0.0)?;
    let example = classify(&spec)?;
    let grid = Grid::uniform(spec.interval(), settings.nodes)?;
    let numerical = build_characteristic_matrix(&spec, &grid, &settings.policy())?.entries().clone();
    let derived = oracle_characteristic(&example, OracleForm::Derived)?;
    let printed = oracle_characteristic(&example, OracleForm::Printed)?;
    let deviation_derived = deviation(&numerical, &derived);
    Ok(OracleCase {
        source: source.to_string(),
        example: example.name(),
        nodes: settings.nodes,
        deviation_printed: deviation(&numerical, &printed),
        numerical: rows(&numerical),
        derived: rows(&derived),
        printed: rows(&printed),
        deviation_derived,
        pass: deviation_derived <= ORACLE_TOL,
    })
}

/// `target` is a file path or a builtin name `example1`..`example5`.
pub fn run(target: &str, settings: &Settings) -> Result<(Output, Status), CliError> {
    let doc = match builtin(target) {
        Some(doc) => doc,
        None => crate::load(std::path::Path::new(target))?,
    };
    let case = check(target, &doc, settings)?;
    Ok((Output::Oracle(OracleReport { command: "oracle-check", tolerance: ORACLE_TOL, cases: vec![case] }), Status::Ok))
}

impl OracleReport {
    pub fn text(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            let _ = writeln!(out, "{} ({}), {} nodes", c.source, c.example, c.nodes);
            let _ = writeln!(out, "  derived closed form   max relative deviation {:.3e}  {}", c.deviation_derived, if c.pass { "PASS" } else { "FAIL" });
            let _ = writeln!(out, "  printed closed form   max relative deviation {:.3e}", c.deviation_printed);
            for (label, m) in [("numerical", &c.numerical), ("derived", &c.derived), ("printed", &c.printed)] {
                let _ = writeln!(out, "  {label}");
                for row in m {
                    let _ = writeln!(out, "    {}", row.iter().map(|&z| crate::report::fmt_complex(z)).collect::<Vec<_>>().join("  "));
                }
            }
        }
        out
    }
}
