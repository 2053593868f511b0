//! Global `(μ, σ)` selection by exhaustive grid search on summed L¹ errors.

use std::path::Path;

use rayon::prelude::*;

use crate::bench::l1_error;
use crate::error::{Error, Result};
use crate::geometry::{Mesh, Point2};
use crate::histopolation::{reconstruct_global, LocalOperatorSpec};
use crate::quadrature::{TriRule, DEFAULT_EDGE_NODES};

/// A validation function usable from several threads.
pub type ValidationFn<'a> = &'a (dyn Fn(Point2) -> f64 + Sync);

/// Density family being tuned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityFamily {
    First,
    Second,
}

impl DensityFamily {
    /// The enriched operator of this family at `(μ, σ)`.
    pub fn operator(self, mu: f64, sigma: f64) -> Result<LocalOperatorSpec> {
        match self {
            DensityFamily::First => LocalOperatorSpec::enriched1(sigma, mu),
            DensityFamily::Second => LocalOperatorSpec::enriched2(sigma, mu),
        }
    }
}

/// Fixed settings of a grid search.
#[derive(Clone, Debug)]
pub struct TuningConfig {
    pub family: DensityFamily,
    /// Gauss nodes per half edge.
    pub edge_nodes: usize,
    pub tri_rule: TriRule,
}

impl TuningConfig {
    /// Default edge and L¹ rules.
    pub fn new(family: DensityFamily) -> Self {
        Self {
            family,
            edge_nodes: DEFAULT_EDGE_NODES,
            tri_rule: TriRule::l1_default(),
        }
    }

    fn operator(&self, mu: f64, sigma: f64) -> Result<LocalOperatorSpec> {
        let spec = self.family.operator(mu, sigma)?;
        if self.edge_nodes == spec.edge_nodes() {
            Ok(spec)
        } else {
            spec.with_edge_nodes(self.edge_nodes)
        }
    }
}

/// Candidate `(μ, σ)` pairs, visited μ-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterGrid {
    candidates: Vec<(f64, f64)>,
}

fn check_candidate(mu: f64, sigma: f64) -> Result<()> {
    if !(mu >= 1.0) || !mu.is_finite() {
        return Err(Error::Domain(format!("grid value mu = {mu} must be >= 1")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!(
            "grid value sigma = {sigma} must be positive"
        )));
    }
    Ok(())
}

impl ParameterGrid {
    /// Cartesian product of the two axes, each sorted ascending and deduplicated.
    pub fn new(mu_values: &[f64], sigma_values: &[f64]) -> Result<Self> {
        if mu_values.is_empty() || sigma_values.is_empty() {
            return Err(Error::Domain("parameter grid axes must be nonempty".into()));
        }
        let axis = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let (mus, sigmas) = (axis(mu_values), axis(sigma_values));
        let mut candidates = Vec::with_capacity(mus.len() * sigmas.len());
        for &mu in &mus {
            for &sigma in &sigmas {
                check_candidate(mu, sigma)?;
                candidates.push((mu, sigma));
            }
        }
        Ok(Self { candidates })
    }

    /// Explicit candidate list in the given order; repeats are kept.
    pub fn from_candidates(candidates: Vec<(f64, f64)>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::Domain("parameter grid must be nonempty".into()));
        }
        for &(mu, sigma) in &candidates {
            check_candidate(mu, sigma)?;
        }
        Ok(Self { candidates })
    }

    pub fn candidates(&self) -> &[(f64, f64)] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// One evaluated grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub mu: f64,
    pub sigma: f64,
    pub total_error: f64,
}

/// Winner of a grid search plus the whole error surface, in grid order.
#[derive(Clone, Debug, PartialEq)]
pub struct TuningResult {
    pub best_mu: f64,
    pub best_sigma: f64,
    pub best_total_error: f64,
    /// Position of the winner in the grid.
    pub best_index: usize,
    pub surface: Vec<SurfacePoint>,
}

impl TuningResult {
    /// Rows `mu,sigma,total_l1_error`.
    pub fn surface_csv(&self) -> String {
        let mut out = String::from("mu,sigma,total_l1_error\n");
        for s in &self.surface {
            out.push_str(&format!("{},{},{:.14e}\n", s.mu, s.sigma, s.total_error));
        }
        out
    }

    pub fn write_surface(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.surface_csv())?;
        Ok(())
    }
}

/// `Σ_r Σ_n ‖f_r − π[f_r; T_n]‖_{L¹}`, summed function-major.
pub fn total_error(
    functions: &[ValidationFn<'_>],
    meshes: &[Mesh],
    spec: &LocalOperatorSpec,
    rule: &TriRule,
) -> Result<f64> {
    let mut total = 0.0;
    for f in functions {
        for mesh in meshes {
            let recon = reconstruct_global(f, mesh, spec)?;
            total += l1_error(f, &recon, rule)?;
        }
    }
    Ok(total)
}

/// Evaluates every grid point and keeps the first strict minimum, so ties
/// go to the earliest candidate.
pub fn grid_search(
    functions: &[ValidationFn<'_>],
    meshes: &[Mesh],
    grid: &ParameterGrid,
    config: &TuningConfig,
) -> Result<TuningResult> {
    if functions.is_empty() || meshes.is_empty() {
        return Err(Error::Domain(
            "grid search needs validation functions and meshes".into(),
        ));
    }
    let surface: Vec<SurfacePoint> = grid
        .candidates()
        .par_iter()
        .map(|&(mu, sigma)| {
            let wrap = |e: Error| Error::GridPoint {
                mu,
                sigma,
                source: Box::new(e),
            };
            let spec = config.operator(mu, sigma).map_err(wrap)?;
            let total_error =
                total_error(functions, meshes, &spec, &config.tri_rule).map_err(wrap)?;
            Ok(SurfacePoint {
                mu,
                sigma,
                total_error,
            })
        })
        .collect::<Result<_>>()?;
    let mut best_index = 0;
    for (k, s) in surface.iter().enumerate() {
        if s.total_error < surface[best_index].total_error {
            best_index = k;
        }
    }
    let best = surface[best_index];
    Ok(TuningResult {
        best_mu: best.mu,
        best_sigma: best.sigma,
        best_total_error: best.total_error,
        best_index,
        surface,
    })
}
