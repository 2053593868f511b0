//! Edge functionals, dual bases and the local and global reconstruction
//! operators.
//!
//! On a triangle with vertices `v₀, v₁, v₂`, edge `j` is the side opposite
//! `vⱼ`, traversed as `t ↦ ((1+t)/2) v_{j+1} + ((1−t)/2) v_{j+2}` (indices
//! mod 3, all 0-based). For an edge density `ω` and a quadratic `q`
//! orthogonal to linears under `ω` the functionals are
//!
//! * `I_j(f) = ∫₋₁¹ f(edge_j(t)) ω(t) dt`,
//! * `L_j(f) = ∫₋₁¹ q(t) f(edge_j(t)) ω(t) dt`.
//!
//! The six functionals are unisolvent on `P₂`. Reconstructions are stored as
//! `Σ aᵢλᵢ + Σ bᵢλᵢ²` in the barycentric coordinates of their triangle.

use std::fmt;

use nalgebra::{Matrix3, Matrix6, Vector6};
use rayon::prelude::*;

use crate::densities::{
    ortho_quadratic_closed_form, EdgeDensity, Family1Density, Family2Density, LimitBetaDensity,
    OrthoQuadratic,
};
use crate::error::{check_finite, domain, Error, Result};
use crate::geometry::{Barycentric, Mesh, Point2, Triangle};
use crate::quadrature::{Rule1D, DEFAULT_EDGE_NODES};

/// Largest allowed `|∫qω|`, `|∫tqω|` for a user-supplied quadratic.
const Q_RESIDUAL_TOL: f64 = 1e-8;

/// Threshold on the row-scaled determinant certifying unisolvency.
pub const UNISOLVENCY_THRESHOLD: f64 = 1e-10;

fn check_edge(j: usize) -> Result<()> {
    if j > 2 {
        return domain(format!("edge index must be 0, 1 or 2, got {j}"));
    }
    Ok(())
}

fn edge_sum(
    f: impl Fn(Point2) -> f64,
    tri: &Triangle,
    j: usize,
    nodes: &[f64],
    weights: impl Iterator<Item = f64>,
) -> Result<f64> {
    let mut acc = 0.0;
    for (&t, w) in nodes.iter().zip(weights) {
        let p = tri.edge_point_unchecked(j, t);
        let v = check_finite(f(p), || format!("at edge {j} point ({}, {})", p.x, p.y))?;
        acc += w * v;
    }
    Ok(acc)
}

/// `∫₋₁¹ f(edge_j(t)) ω(t) dt`.
pub fn functional_i(
    f: impl Fn(Point2) -> f64,
    tri: &Triangle,
    j: usize,
    density: &EdgeDensity,
    rule: &Rule1D,
) -> Result<f64> {
    check_edge(j)?;
    let w = rule.iter().map(|(t, w)| w * density.pdf(t));
    edge_sum(f, tri, j, rule.nodes(), w)
}

/// `∫₋₁¹ q(t) f(edge_j(t)) ω(t) dt`.
pub fn functional_l(
    f: impl Fn(Point2) -> f64,
    tri: &Triangle,
    j: usize,
    density: &EdgeDensity,
    q: &OrthoQuadratic,
    rule: &Rule1D,
) -> Result<f64> {
    check_edge(j)?;
    let w = rule.iter().map(|(t, w)| w * q.eval(t) * density.pdf(t));
    edge_sum(f, tri, j, rule.nodes(), w)
}

/// Edge average `½ ∫₋₁¹ f(edge_j(t)) dt`.
pub fn classical_functional(
    f: impl Fn(Point2) -> f64,
    tri: &Triangle,
    j: usize,
    rule: &Rule1D,
) -> Result<f64> {
    check_edge(j)?;
    let w = rule.weights().iter().map(|w| 0.5 * w);
    edge_sum(f, tri, j, rule.nodes(), w)
}

/// `φᵢ = 1 − 2λᵢ`, dual to the `I` functionals for every even density.
#[inline]
pub fn basis_phi(i: usize, l: &Barycentric) -> f64 {
    1.0 - 2.0 * l[i]
}

/// `ψᵢ = −A φᵢ + (2/κ)(−λᵢ² + λ_{i+1}² + λ_{i+2}²)` with `κ = ∫t²qω`
/// (equal to `‖q‖²` for monic `q`) and `A = (1 + m₂)/κ`.
///
/// For non-even densities this returns the fourth to sixth columns of the
/// inverse functional matrix instead.
pub fn basis_psi(i: usize, l: &Barycentric, spec: &LocalOperatorSpec) -> Result<f64> {
    if spec.is_classical() {
        return domain("the classical operator has no psi basis functions");
    }
    if i > 2 {
        return domain(format!("basis index must be 0, 1 or 2, got {i}"));
    }
    Ok(spec.basis.functions[3 + i].eval(l))
}

/// What a [`LocalOperatorSpec`] was built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorKind {
    Classical,
    Enriched1 { sigma: f64, mu: f64 },
    Enriched2 { sigma: f64, mu: f64 },
    Generic,
}

/// A polynomial `Σ aᵢλᵢ + Σ bᵢλᵢ²` in barycentric coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct BarycentricQuadratic {
    pub a: [f64; 3],
    pub b: [f64; 3],
}

impl BarycentricQuadratic {
    #[inline]
    pub fn eval(&self, l: &Barycentric) -> f64 {
        (0..3).map(|k| (self.a[k] + self.b[k] * l[k]) * l[k]).sum()
    }

    fn from_vector(c: &Vector6<f64>) -> Self {
        Self {
            a: [c[0], c[1], c[2]],
            b: [c[3], c[4], c[5]],
        }
    }

    fn add_scaled(&mut self, s: f64, other: &BarycentricQuadratic) {
        for k in 0..3 {
            self.a[k] += s * other.a[k];
            self.b[k] += s * other.b[k];
        }
    }
}

/// Basis functions dual to `(I₀, I₁, I₂, L₀, L₁, L₂)` (first three only for
/// the classical operator).
#[derive(Clone, Debug, PartialEq)]
struct DualBasis {
    functions: Vec<BarycentricQuadratic>,
}

/// Matrix of the six functionals applied to `{λ₀, λ₁, λ₂, λ₀², λ₁², λ₂²}`
/// from the first three `ω`-moments and `q`-moments. Independent of the
/// triangle. Row `r` is functional `r`, column `c` is monomial `c`.
fn functional_matrix(mu: [f64; 3], qm: [f64; 3]) -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    for (row_offset, mom) in [(0, mu), (3, qm)] {
        let [m0, m1, m2] = mom;
        for j in 0..3 {
            let (jp, jpp) = ((j + 1) % 3, (j + 2) % 3);
            let r = row_offset + j;
            // λ_{j+1} = (1+t)/2, λ_{j+2} = (1−t)/2 on edge j
            m[(r, jp)] = 0.5 * (m0 + m1);
            m[(r, jpp)] = 0.5 * (m0 - m1);
            m[(r, 3 + jp)] = 0.25 * (m0 + 2.0 * m1 + m2);
            m[(r, 3 + jpp)] = 0.25 * (m0 - 2.0 * m1 + m2);
        }
    }
    m
}

impl DualBasis {
    fn classical() -> Self {
        let functions = (0..3)
            .map(|i| {
                let mut f = BarycentricQuadratic::default();
                for k in 0..3 {
                    f.a[k] = if k == i { -1.0 } else { 1.0 };
                }
                f
            })
            .collect();
        Self { functions }
    }

    /// Closed-form `φᵢ`, `ψᵢ` for even densities.
    fn even(a_coef: f64, kappa: f64) -> Self {
        let mut functions = Self::classical().functions;
        for i in 0..3 {
            let mut psi = BarycentricQuadratic::default();
            for k in 0..3 {
                let s = if k == i { -1.0 } else { 1.0 };
                psi.a[k] = -a_coef * s;
                psi.b[k] = 2.0 / kappa * s;
            }
            functions.push(psi);
        }
        Self { functions }
    }

    /// Columns of the inverse functional matrix.
    fn general(m: &Matrix6<f64>) -> Result<Self> {
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("edge functionals are not unisolvent on P2".into()))?;
        let functions = (0..6)
            .map(|s| BarycentricQuadratic::from_vector(&inv.column(s).into_owned()))
            .collect();
        Ok(Self { functions })
    }
}

/// A fully prepared local operator: density, quadratic, quadrature weights
/// on the edge and the dual basis.
#[derive(Clone)]
pub struct LocalOperatorSpec {
    kind: OperatorKind,
    density: Option<EdgeDensity>,
    q: Option<OrthoQuadratic>,
    edge_nodes: usize,
    nodes: Vec<f64>,
    // w·ω at each node, and w·q·ω (empty for classical)
    weights_i: Vec<f64>,
    weights_l: Vec<f64>,
    m2: f64,
    norm_sq: f64,
    kappa: f64,
    a_coef: f64,
    functional_matrix: Option<Matrix6<f64>>,
    basis: DualBasis,
    symmetric: bool,
}

impl fmt::Debug for LocalOperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalOperatorSpec")
            .field("kind", &self.kind)
            .field("edge_nodes", &self.edge_nodes)
            .field("m2", &self.m2)
            .field("norm_sq", &self.norm_sq)
            .field("a_coef", &self.a_coef)
            .finish()
    }
}

impl LocalOperatorSpec {
    /// Classical histopolation onto `P₁` with unweighted edge averages.
    pub fn classical() -> Self {
        Self::classical_with_nodes(DEFAULT_EDGE_NODES)
    }

    fn classical_with_nodes(m: usize) -> Self {
        let rule = Rule1D::split_at_origin(m);
        Self {
            kind: OperatorKind::Classical,
            density: None,
            q: None,
            edge_nodes: m,
            nodes: rule.nodes().to_vec(),
            weights_i: rule.weights().iter().map(|w| 0.5 * w).collect(),
            weights_l: Vec::new(),
            m2: 1.0 / 3.0,
            norm_sq: f64::NAN,
            kappa: f64::NAN,
            a_coef: f64::NAN,
            functional_matrix: None,
            basis: DualBasis::classical(),
            symmetric: true,
        }
    }

    /// Enriched operator with the first density family.
    pub fn enriched1(sigma: f64, mu: f64) -> Result<Self> {
        let d = Family1Density::new(sigma, mu)?;
        let q = ortho_quadratic_closed_form(&d.into())?;
        Self::build(
            OperatorKind::Enriched1 { sigma, mu },
            d.into(),
            q,
            DEFAULT_EDGE_NODES,
        )
    }

    /// Enriched operator with the second density family.
    pub fn enriched2(sigma: f64, mu: f64) -> Result<Self> {
        let d = Family2Density::new(sigma, mu)?;
        let q = ortho_quadratic_closed_form(&d.into())?;
        Self::build(
            OperatorKind::Enriched2 { sigma, mu },
            d.into(),
            q,
            DEFAULT_EDGE_NODES,
        )
    }

    /// Enriched operator built on a σ → ∞ limit density.
    pub fn limit(density: LimitBetaDensity) -> Result<Self> {
        let d = EdgeDensity::Limit(density);
        let q = ortho_quadratic_closed_form(&d)?;
        Self::build(OperatorKind::Generic, d, q, DEFAULT_EDGE_NODES)
    }

    /// Enriched operator for an arbitrary density and orthogonal quadratic.
    pub fn generic(density: EdgeDensity, q: OrthoQuadratic) -> Result<Self> {
        Self::build(OperatorKind::Generic, density, q, DEFAULT_EDGE_NODES)
    }

    /// The same operator with `m` Gauss nodes per half edge.
    pub fn with_edge_nodes(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return domain("edge rule needs at least one node");
        }
        match (&self.density, &self.q) {
            (Some(d), Some(q)) => Self::build(self.kind, d.clone(), *q, m),
            _ => Ok(Self::classical_with_nodes(m)),
        }
    }

    fn build(
        kind: OperatorKind,
        density: EdgeDensity,
        q: OrthoQuadratic,
        m: usize,
    ) -> Result<Self> {
        let [r0, r1] = q.residuals();
        if r0.abs() > Q_RESIDUAL_TOL || r1.abs() > Q_RESIDUAL_TOL {
            return Err(Error::Degenerate(format!(
                "quadratic is not orthogonal to linears (residuals {r0:e}, {r1:e})"
            )));
        }
        let kappa = q.second_moment_value();
        let norm_sq = q.norm_sq();
        if !(norm_sq > 0.0) || !(kappa.abs() > 1e-300) || !kappa.is_finite() {
            return Err(Error::Degenerate(format!(
                "quadratic has norm {norm_sq:e} and second-moment value {kappa:e}"
            )));
        }
        let rule = density.edge_rule(m);
        let weights_i: Vec<f64> = rule.iter().map(|(t, w)| w * density.pdf(t)).collect();
        let weights_l: Vec<f64> = rule
            .iter()
            .zip(&weights_i)
            .map(|((t, _), wi)| wi * q.eval(t))
            .collect();
        let m1 = density.moment(1)?;
        let m2 = density.moment(2)?;
        let a_coef = (1.0 + m2) / kappa;
        if !a_coef.is_finite() {
            return Err(Error::Degenerate(format!("dual coefficient A = {a_coef}")));
        }
        let qm = [r0, r1, kappa];
        let fm = functional_matrix([density.moment(0)?, m1, m2], qm);
        let [c0, c1, c2] = q.coefficients();
        let symmetric = density.is_even() && c1.abs() <= 1e-14 * c0.abs().max(c2.abs());
        let basis = if symmetric {
            DualBasis::even(a_coef, kappa)
        } else {
            DualBasis::general(&fm)?
        };
        Ok(Self {
            kind,
            density: Some(density),
            q: Some(q),
            edge_nodes: m,
            nodes: rule.nodes().to_vec(),
            weights_i,
            weights_l,
            m2,
            norm_sq,
            kappa,
            a_coef,
            functional_matrix: Some(fm),
            basis,
            symmetric,
        })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn is_classical(&self) -> bool {
        self.kind == OperatorKind::Classical
    }

    /// Number of edge functionals: 3 for classical, 6 otherwise.
    pub fn dimension(&self) -> usize {
        self.basis.functions.len()
    }

    pub fn density(&self) -> Option<&EdgeDensity> {
        self.density.as_ref()
    }

    pub fn quadratic(&self) -> Option<&OrthoQuadratic> {
        self.q.as_ref()
    }

    pub fn edge_nodes(&self) -> usize {
        self.edge_nodes
    }

    /// Second moment `m₂` of the edge density.
    pub fn second_moment(&self) -> f64 {
        self.m2
    }

    /// `‖q‖²` (NaN for classical).
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `∫ t² q ω` (NaN for classical).
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `A = (1 + m₂)/κ` (NaN for classical).
    pub fn dual_coefficient(&self) -> f64 {
        self.a_coef
    }

    /// Whether `ω` and `q` are both even, so shared edges can be evaluated
    /// once for both neighbours.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Monomial functional matrix, if the operator is enriched.
    pub fn functional_matrix(&self) -> Option<&Matrix6<f64>> {
        self.functional_matrix.as_ref()
    }

    /// Dual basis function `s` (`0..3` → φ, `3..6` → ψ).
    pub fn basis_function(&self, s: usize) -> Option<&BarycentricQuadratic> {
        self.basis.functions.get(s)
    }

    /// Short operator name: `classical`, `enriched1`, `enriched2` or `generic`.
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            OperatorKind::Classical => "classical",
            OperatorKind::Enriched1 { .. } => "enriched1",
            OperatorKind::Enriched2 { .. } => "enriched2",
            OperatorKind::Generic => "generic",
        }
    }

    /// Operator name with its parameters, e.g. `enriched1(mu=2 sigma=1)`.
    pub fn label(&self) -> String {
        match self.kind {
            OperatorKind::Enriched1 { sigma, mu } | OperatorKind::Enriched2 { sigma, mu } => {
                format!("{}(mu={mu} sigma={sigma})", self.kind_name())
            }
            OperatorKind::Generic => match &self.density {
                Some(EdgeDensity::Limit(d)) => format!("limit(mu={})", d.mu()),
                _ => "generic".into(),
            },
            OperatorKind::Classical => "classical".into(),
        }
    }

    /// `(I_j(f), L_j(f))` on one edge; `L` is zero for classical.
    pub fn edge_values(
        &self,
        f: impl Fn(Point2) -> f64,
        tri: &Triangle,
        j: usize,
    ) -> Result<(f64, f64)> {
        check_edge(j)?;
        let mut i_acc = 0.0;
        let mut l_acc = 0.0;
        let enriched = !self.weights_l.is_empty();
        for (k, &t) in self.nodes.iter().enumerate() {
            let p = tri.edge_point_unchecked(j, t);
            let v = check_finite(f(p), || format!("at edge {j} point ({}, {})", p.x, p.y))?;
            i_acc += self.weights_i[k] * v;
            if enriched {
                l_acc += self.weights_l[k] * v;
            }
        }
        Ok((i_acc, l_acc))
    }

    /// All functional values on a triangle: `[I₀, I₁, I₂]` and `[L₀, L₁, L₂]`.
    pub fn functional_values(
        &self,
        f: impl Fn(Point2) -> f64,
        tri: &Triangle,
    ) -> Result<([f64; 3], [f64; 3])> {
        let mut iv = [0.0; 3];
        let mut lv = [0.0; 3];
        for j in 0..3 {
            (iv[j], lv[j]) = self.edge_values(&f, tri, j)?;
        }
        Ok((iv, lv))
    }

    /// Combines functional values with the dual basis.
    pub fn assemble(&self, iv: [f64; 3], lv: [f64; 3]) -> BarycentricQuadratic {
        let mut r = BarycentricQuadratic::default();
        for (v, phi) in iv.iter().zip(&self.basis.functions[..3]) {
            r.add_scaled(*v, phi);
        }
        if self.dimension() == 6 {
            for (v, psi) in lv.iter().zip(&self.basis.functions[3..]) {
                r.add_scaled(*v, psi);
            }
        }
        r
    }
}

/// A reconstruction on one triangle.
#[derive(Clone, Copy, Debug)]
pub struct LocalReconstruction {
    pub triangle: Triangle,
    pub poly: BarycentricQuadratic,
}

impl LocalReconstruction {
    pub fn a(&self) -> [f64; 3] {
        self.poly.a
    }

    pub fn b(&self) -> [f64; 3] {
        self.poly.b
    }

    #[inline]
    pub fn eval_barycentric(&self, l: &Barycentric) -> f64 {
        self.poly.eval(l)
    }

    #[inline]
    pub fn eval(&self, p: Point2) -> f64 {
        self.poly.eval(&self.triangle.barycentric(p))
    }
}

/// `Σ I_j(f) φ_j (+ Σ L_j(f) ψ_j)` on one triangle.
pub fn reconstruct_local(
    f: impl Fn(Point2) -> f64,
    tri: &Triangle,
    spec: &LocalOperatorSpec,
) -> Result<LocalReconstruction> {
    let (iv, lv) = spec.functional_values(f, tri)?;
    Ok(LocalReconstruction {
        triangle: *tri,
        poly: spec.assemble(iv, lv),
    })
}

/// Piecewise reconstruction over a mesh, one local polynomial per triangle.
/// Not continuous across edges in general.
#[derive(Clone, Debug)]
pub struct GlobalReconstruction<'m> {
    mesh: &'m Mesh,
    locals: Vec<LocalReconstruction>,
}

impl<'m> GlobalReconstruction<'m> {
    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn locals(&self) -> &[LocalReconstruction] {
        &self.locals
    }

    pub fn local(&self, k: usize) -> &LocalReconstruction {
        &self.locals[k]
    }

    /// Value at `p`, from the lowest-index triangle containing it.
    pub fn eval(&self, p: Point2) -> Result<f64> {
        let k = self
            .mesh
            .locate(p)
            .ok_or(Error::OutsideDomain { x: p.x, y: p.y })?;
        Ok(self.locals[k].eval(p))
    }

    /// Rows `index,a1,a2,a3,b1,b2,b3`, full precision.
    pub fn to_text(&self) -> String {
        let mut out = String::from("triangle,a1,a2,a3,b1,b2,b3\n");
        for (k, r) in self.locals.iter().enumerate() {
            let [a1, a2, a3] = r.poly.a;
            let [b1, b2, b3] = r.poly.b;
            out.push_str(&format!(
                "{k},{a1:.17e},{a2:.17e},{a3:.17e},{b1:.17e},{b2:.17e},{b3:.17e}\n"
            ));
        }
        out
    }
}

/// Reconstructs `f` on every triangle of `mesh`, in parallel.
///
/// When the operator is symmetric, each mesh edge is integrated once from
/// its first adjacent triangle and the values are reused by the neighbour.
pub fn reconstruct_global<'m, F>(
    f: F,
    mesh: &'m Mesh,
    spec: &LocalOperatorSpec,
) -> Result<GlobalReconstruction<'m>>
where
    F: Fn(Point2) -> f64 + Sync,
{
    let elements = mesh.elements();
    let locals: Vec<LocalReconstruction> = if spec.is_symmetric() {
        let edge_values: Vec<(f64, f64)> = mesh
            .edges()
            .par_iter()
            .map(|e| {
                let (t, j) = e.adjacent[0];
                spec.edge_values(&f, &elements[t], j)
            })
            .collect::<Result<_>>()?;
        elements
            .par_iter()
            .zip(mesh.triangle_edges().par_iter())
            .map(|(tri, edges)| {
                let mut iv = [0.0; 3];
                let mut lv = [0.0; 3];
                for j in 0..3 {
                    (iv[j], lv[j]) = edge_values[edges[j]];
                }
                LocalReconstruction {
                    triangle: *tri,
                    poly: spec.assemble(iv, lv),
                }
            })
            .collect()
    } else {
        elements
            .par_iter()
            .map(|tri| reconstruct_local(&f, tri, spec))
            .collect::<Result<_>>()?
    };
    Ok(GlobalReconstruction { mesh, locals })
}

/// The matrix `[[0,1,1],[1,0,1],[1,1,0]]` (determinant 2) underlying both
/// diagonal blocks of the functional matrix for even densities.
pub fn incidence_matrix() -> Matrix3<f64> {
    Matrix3::new(0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0)
}

/// Evidence that the six functionals are unisolvent on `P₂` for a triangle.
#[derive(Clone, Copy, Debug)]
pub struct UnisolvencyCertificate {
    /// Functional `r` applied to monomial `c` of `{λ₀, λ₁, λ₂, λ₀², λ₁², λ₂²}`,
    /// by quadrature on the triangle's own edges.
    pub matrix: Matrix6<f64>,
    /// `|det|` after scaling each row to unit max-norm.
    pub scaled_determinant: f64,
    pub raw_determinant: f64,
}

impl UnisolvencyCertificate {
    pub fn is_unisolvent(&self) -> bool {
        self.scaled_determinant > UNISOLVENCY_THRESHOLD
    }

    /// `I_j(λᵢ)` for `i, j ∈ 0..3`, row `j`.
    pub fn i_linear_block(&self) -> Matrix3<f64> {
        self.matrix.fixed_view::<3, 3>(0, 0).into_owned()
    }

    /// `L_j(λᵢ²)`, row `j`.
    pub fn l_quadratic_block(&self) -> Matrix3<f64> {
        self.matrix.fixed_view::<3, 3>(3, 3).into_owned()
    }
}

/// Assembles the functional-on-monomial matrix on `tri` and measures its
/// row-scaled determinant.
pub fn unisolvency_certificate(
    tri: &Triangle,
    spec: &LocalOperatorSpec,
) -> Result<UnisolvencyCertificate> {
    if spec.is_classical() {
        return domain("unisolvency certificate needs an enriched operator");
    }
    let mut matrix = Matrix6::zeros();
    for c in 0..6 {
        let monomial = |p: Point2| {
            let l = tri.barycentric(p);
            if c < 3 {
                l[c]
            } else {
                l[c - 3] * l[c - 3]
            }
        };
        for j in 0..3 {
            let (iv, lv) = spec.edge_values(monomial, tri, j)?;
            matrix[(j, c)] = iv;
            matrix[(3 + j, c)] = lv;
        }
    }
    let raw_determinant = matrix.determinant().abs();
    let mut scaled = matrix;
    for r in 0..6 {
        let peak = scaled.row(r).amax();
        if peak > 0.0 {
            scaled.row_mut(r).scale_mut(1.0 / peak);
        }
    }
    Ok(UnisolvencyCertificate {
        matrix,
        scaled_determinant: scaled.determinant().abs(),
        raw_determinant,
    })
}
