//! Command implementations behind the `bvpkit` binary.

pub mod document;
pub mod oracle;
pub mod report;

use bvpkit::characteristic::solvability_report;
use bvpkit::grid::DEFAULT_NODES;
use bvpkit::limits::multipoint::DEFAULT_SERIES_CAP;
use bvpkit::limits::{check_multipoint_assumptions, convergence_experiment, ExperimentConfig};
use bvpkit::prelude::*;
use bvpkit::solver::solve_with_matrix;
use clap::ValueEnum;

pub use document::ProblemDocument;
use report::{AnalyzeReport, FamilyReport, Output, ProblemSummary, SolveReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("{0}")]
    Diagnostic(Diagnostic),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] BvpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

/// Numeric policy shared by all commands.
#[derive(Debug, Clone)]
pub struct Settings {
    pub nodes: usize,
    pub rank_tol: Option<f64>,
    pub schedule: Option<Vec<f64>>,
    pub series_cap: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self { nodes: DEFAULT_NODES, rank_tol: None, schedule: None, series_cap: DEFAULT_SERIES_CAP }
    }
}

impl Settings {
    pub fn policy(&self) -> RankPolicy {
        match self.rank_tol {
            Some(tol) => RankPolicy::absolute(tol),
            None => RankPolicy::default(),
        }
    }
}

/// Whether the command finished normally or found a problem that is not well posed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    NotWellPosed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::NotWellPosed => 2,
        }
    }
}

pub fn load(path: &std::path::Path) -> Result<ProblemDocument, CliError> {
    ProblemDocument::from_json(&std::fs::read_to_string(path)?)
}

fn summary(spec: &ProblemSpec, settings: &Settings) -> ProblemSummary {
    ProblemSummary {
        a: spec.interval().a(),
        b: spec.interval().b(),
        r: spec.r(),
        m: spec.m(),
        n: spec.n(),
        q: spec.q(),
        p: spec.p(),
        nodes: settings.nodes,
    }
}

pub fn analyze(doc: &ProblemDocument, settings: &Settings) -> Result<(Output, Status), CliError> {
    let spec = doc.spec_at(0.0)?;
    let grid = Grid::uniform(spec.interval(), settings.nodes)?;
    let cm = build_characteristic_matrix(&spec, &grid, &settings.policy())?;
    let rep = solvability_report(&cm, &spec);
    let status = if rep.well_posed { Status::Ok } else { Status::NotWellPosed };
    let out = AnalyzeReport::new(summary(&spec, settings), &cm, rep);
    Ok((Output::Analyze(out), status))
}

pub fn solve(doc: &ProblemDocument, settings: &Settings) -> Result<(Output, Status), CliError> {
    if doc.rhs.is_none() {
        return Err(CliError::Usage("the solve command needs an rhs section".into()));
    }
    let spec = doc.spec_at(0.0)?;
    let grid = Grid::uniform(spec.interval(), settings.nodes)?;
    let cm = build_characteristic_matrix(&spec, &grid, &settings.policy())?;
    match solve_with_matrix(&spec, &cm, &CVector::zeros(spec.r() * spec.m())) {
        Ok(sol) => Ok((Output::Solve(SolveReport::new(summary(&spec, settings), &sol)), Status::Ok)),
        Err(BvpError::NotWellPosed(rep)) => Ok((Output::Analyze(AnalyzeReport::new(summary(&spec, settings), &cm, *rep)), Status::NotWellPosed)),
        Err(e) => Err(e.into()),
    }
}

pub fn family(doc: &ProblemDocument, settings: &Settings) -> Result<(Output, Status), CliError> {
    let fam = doc.problem_family(settings.schedule.clone(), settings.series_cap)?;
    let cfg = ExperimentConfig { nodes: settings.nodes, policy: settings.policy() };
    let spec = fam.at_zero().clone();
    let assumptions = match doc.multipoint_family_of(settings.series_cap)? {
        Some(mf) => Some(check_multipoint_assumptions(&mf, spec.p(), fam.schedule())?),
        None => None,
    };
    match convergence_experiment(&fam, &cfg) {
        Ok(limit) => Ok((Output::Family(FamilyReport { summary: summary(&spec, settings), limit, assumptions }), Status::Ok)),
        Err(BvpError::NotWellPosed(rep)) => {
            let cm = build_characteristic_matrix(&spec, &Grid::uniform(spec.interval(), settings.nodes)?, &settings.policy())?;
            Ok((Output::Analyze(AnalyzeReport::new(summary(&spec, settings), &cm, *rep)), Status::NotWellPosed))
        }
        Err(e) => Err(e.into()),
    }
}
