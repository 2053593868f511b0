//! Benchmark test functions, L¹ errors and the classical-vs-enriched sweep.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{friedrichs_keller, Mesh, Point2};
use crate::histopolation::{reconstruct_global, GlobalReconstruction, LocalOperatorSpec};
use crate::quadrature::{integrate_triangle_barycentric, TriRule};

/// CSV header written by [`ErrorReport::to_csv`].
pub const CSV_HEADER: &str = "function,n,triangles,operator,l1_error";

/// Which form of the second Franke term to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FrankeVariant {
    /// `−(9(x+1)/2+1)²/49 − (9(y+1)/2+1)/10`, the usual Franke function.
    #[default]
    Standard,
    /// The same term with the `y` part squared.
    SquaredY,
}

/// One of the six benchmark functions on `[−1, 1]²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TestFunction {
    index: u8,
    franke: FrankeVariant,
}

impl TestFunction {
    /// `f₁ … f₆` for `index` in `1..=6`.
    pub fn new(index: u8) -> Result<Self> {
        if !(1..=6).contains(&index) {
            return Err(Error::Domain(format!(
                "test function index must be 1..6, got {index}"
            )));
        }
        Ok(Self {
            index,
            franke: FrankeVariant::Standard,
        })
    }

    pub fn all() -> Vec<TestFunction> {
        (1..=6).map(|i| TestFunction::new(i).unwrap()).collect()
    }

    pub fn with_franke_variant(self, franke: FrankeVariant) -> Self {
        Self { franke, ..self }
    }

    pub fn index(&self) -> u8 {
        self.index
    }

    pub fn name(&self) -> String {
        format!("f{}", self.index)
    }

    /// Whether the function is smooth on the whole square (all but `f₁`).
    pub fn is_smooth(&self) -> bool {
        self.index != 1
    }

    pub fn eval(&self, p: Point2) -> f64 {
        use std::f64::consts::PI;
        let Point2 { x, y } = p;
        match self.index {
            1 => x.hypot(y),
            2 => (-4.0 * (x * x + y * y)).exp() * (PI * (x + y)).sin(),
            3 => (2.0 * PI * x).sin() * (2.0 * PI * y).sin(),
            4 => (4.0 * PI * (x + y)).sin(),
            5 => 1.0 / (25.0 * (x * x + y * y) + 1.0),
            _ => franke(x, y, self.franke),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.index)
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    /// Accepts `f3`, `F3` or `3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let digits = s.strip_prefix(['f', 'F']).unwrap_or(s);
        let index: u8 = digits
            .parse()
            .map_err(|_| Error::Parse(format!("unknown test function {s:?}")))?;
        TestFunction::new(index).map_err(|_| Error::Parse(format!("unknown test function {s:?}")))
    }
}

/// Franke's function on `[−1, 1]²`, i.e. the classical one on `[0, 1]²`
/// composed with `x ↦ (x+1)/2`.
pub fn franke(x: f64, y: f64, variant: FrankeVariant) -> f64 {
    let u = 4.5 * (x + 1.0);
    let v = 4.5 * (y + 1.0);
    let second_y = match variant {
        FrankeVariant::Standard => (v + 1.0) / 10.0,
        FrankeVariant::SquaredY => (v + 1.0).powi(2) / 10.0,
    };
    0.75 * (-(u - 2.0).powi(2) / 4.0 - (v - 2.0).powi(2) / 4.0).exp()
        + 0.75 * (-(u + 1.0).powi(2) / 49.0 - second_y).exp()
        + 0.5 * (-(u - 7.0).powi(2) / 4.0 - (v - 3.0).powi(2) / 4.0).exp()
        - 0.2 * (-(u - 4.0).powi(2) - (v - 7.0).powi(2)).exp()
}

/// `Σ_T ∫_T |f − recon|` with `rule` on every triangle.
///
/// Triangles are integrated in parallel and summed in mesh order, so the
/// result does not depend on scheduling.
pub fn l1_error<F>(f: F, recon: &GlobalReconstruction<'_>, rule: &TriRule) -> Result<f64>
where
    F: Fn(Point2) -> f64 + Sync,
{
    let parts: Vec<f64> = recon
        .locals()
        .par_iter()
        .map(|local| {
            integrate_triangle_barycentric(
                |l, p| (f(p) - local.eval_barycentric(l)).abs(),
                &local.triangle,
                rule,
            )
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

/// One row of an [`ErrorReport`].
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub function: String,
    pub level: usize,
    pub triangles: usize,
    pub operator: String,
    pub l1_error: f64,
}

/// Results of a sweep, in input order: function-major, then level, then
/// classical before enriched.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    /// CSV with 15 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.14e}\n",
                r.function, r.level, r.triangles, r.operator, r.l1_error
            ));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// The error of `operator` on `function` at level `n`, if present.
    pub fn error(&self, function: &str, level: usize, operator: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.function == function && r.level == level && r.operator == operator)
            .map(|r| r.l1_error)
    }
}

/// Inputs of [`run_workflow`].
#[derive(Clone, Debug)]
pub struct WorkflowConfig {
    pub functions: Vec<TestFunction>,
    pub levels: Vec<usize>,
    pub classical: LocalOperatorSpec,
    pub enriched: LocalOperatorSpec,
    pub tri_rule: TriRule,
}

impl WorkflowConfig {
    /// Classical vs `enriched` with the default edge and L¹ rules.
    pub fn new(
        functions: Vec<TestFunction>,
        levels: Vec<usize>,
        enriched: LocalOperatorSpec,
    ) -> Self {
        Self {
            functions,
            levels,
            classical: LocalOperatorSpec::classical(),
            enriched,
            tri_rule: TriRule::l1_default(),
        }
    }
}

/// For every function and level: build the Friedrichs–Keller mesh,
/// reconstruct with both operators and record the L¹ errors.
pub fn run_workflow(config: &WorkflowConfig) -> Result<ErrorReport> {
    if config.functions.is_empty() || config.levels.is_empty() {
        return Err(Error::Domain(
            "workflow needs at least one function and one level".into(),
        ));
    }
    let meshes: Vec<Mesh> = config
        .levels
        .iter()
        .map(|&n| friedrichs_keller(n))
        .collect();
    let mut report = ErrorReport::default();
    for tf in &config.functions {
        let f = |p: Point2| tf.eval(p);
        for (&n, mesh) in config.levels.iter().zip(&meshes) {
            for spec in [&config.classical, &config.enriched] {
                let recon = reconstruct_global(f, mesh, spec)?;
                let err = l1_error(f, &recon, &config.tri_rule)?;
                report.rows.push(ErrorRow {
                    function: tf.name(),
                    level: n,
                    triangles: mesh.len(),
                    operator: spec.kind_name().to_string(),
                    l1_error: err,
                });
            }
        }
    }
    Ok(report)
}

/// [`run_workflow`], then write the CSV to `path`.
pub fn run_workflow_to(config: &WorkflowConfig, path: impl AsRef<Path>) -> Result<ErrorReport> {
    let report = run_workflow(config)?;
    report.write_csv(path)?;
    Ok(report)
}
