//! Triangles, barycentric coordinates, edge parametrizations and structured meshes.
//!
//! Edges are indexed by the vertex they are opposite to: local edge `j`
//! (0-based) joins `v_{j+1}` and `v_{j+2}` (indices mod 3) and is traversed
//! as `t ∈ [−1, 1] ↦ ((1+t)/2) v_{j+1} + ((1−t)/2) v_{j+2}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{domain, Error, Result};

const MIN_AREA: f64 = 1e-14;

/// A point in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Affine combination `a·self + b·other`.
    #[inline]
    pub fn combine(self, a: f64, other: Point2, b: f64) -> Point2 {
        Point2::new(a * self.x + b * other.x, a * self.y + b * other.y)
    }
}

/// Barycentric coordinates `(λ₁, λ₂, λ₃)`.
pub type Barycentric = [f64; 3];

/// A nondegenerate triangle with its affine barycentric map cached.
#[derive(Clone, Copy, Debug)]
pub struct Triangle {
    vertices: [Point2; 3],
    signed_area: f64,
    // λ₂ = c[0] + c[1] x + c[2] y, λ₃ = c[3] + c[4] x + c[5] y
    map: [f64; 6],
}

impl Triangle {
    pub fn new(v1: Point2, v2: Point2, v3: Point2) -> Result<Self> {
        if !(v1.is_finite() && v2.is_finite() && v3.is_finite()) {
            return domain("triangle vertices must be finite");
        }
        let (ex, ey) = (v2.x - v1.x, v2.y - v1.y);
        let (fx, fy) = (v3.x - v1.x, v3.y - v1.y);
        let det = ex * fy - ey * fx;
        let signed_area = 0.5 * det;
        if signed_area.abs() <= MIN_AREA {
            return Err(Error::DegenerateTriangle { area: signed_area });
        }
        // Invert [e f] once: (λ₂, λ₃) = J⁻¹ (p − v1).
        let inv = 1.0 / det;
        let (a, b) = (fy * inv, -fx * inv);
        let (c, d) = (-ey * inv, ex * inv);
        let map = [-(a * v1.x + b * v1.y), a, b, -(c * v1.x + d * v1.y), c, d];
        Ok(Self {
            vertices: [v1, v2, v3],
            signed_area,
            map,
        })
    }

    pub fn vertices(&self) -> &[Point2; 3] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Point2 {
        self.vertices[i % 3]
    }

    pub fn signed_area(&self) -> f64 {
        self.signed_area
    }

    pub fn area(&self) -> f64 {
        self.signed_area.abs()
    }

    pub fn centroid(&self) -> Point2 {
        let [a, b, c] = self.vertices;
        Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    /// Barycentric coordinates of `p`; they sum to one up to round-off.
    #[inline]
    pub fn barycentric(&self, p: Point2) -> Barycentric {
        let m = &self.map;
        let l2 = m[0] + m[1] * p.x + m[2] * p.y;
        let l3 = m[3] + m[4] * p.x + m[5] * p.y;
        [1.0 - l2 - l3, l2, l3]
    }

    /// Cartesian point with barycentric coordinates `l`.
    #[inline]
    pub fn point_at(&self, l: &Barycentric) -> Point2 {
        let [a, b, c] = self.vertices;
        Point2::new(
            l[0] * a.x + l[1] * b.x + l[2] * c.x,
            l[0] * a.y + l[1] * b.y + l[2] * c.y,
        )
    }

    /// Point of edge `j` (0-based, opposite vertex `j`) at parameter `t ∈ [−1, 1]`.
    pub fn edge_point(&self, j: usize, t: f64) -> Result<Point2> {
        if j > 2 {
            return domain(format!("edge index must be 0, 1 or 2, got {j}"));
        }
        if !(-1.0..=1.0).contains(&t) {
            return domain(format!("edge parameter must lie in [-1, 1], got {t}"));
        }
        Ok(self.edge_point_unchecked(j, t))
    }

    #[inline]
    pub(crate) fn edge_point_unchecked(&self, j: usize, t: f64) -> Point2 {
        let head = self.vertices[(j + 1) % 3];
        let tail = self.vertices[(j + 2) % 3];
        head.combine(0.5 * (1.0 + t), tail, 0.5 * (1.0 - t))
    }

    /// Euclidean length of edge `j`.
    pub fn edge_length(&self, j: usize) -> f64 {
        let a = self.vertices[(j + 1) % 3];
        let b = self.vertices[(j + 2) % 3];
        (a.x - b.x).hypot(a.y - b.y)
    }

    /// `H(p) = 2(λ₁² + λ₂² + λ₃²) − 1`; equals `t²` on every edge at parameter `t`.
    pub fn h_function(&self, p: Point2) -> f64 {
        h_from_barycentric(&self.barycentric(p))
    }

    /// Whether `p` lies in the closed triangle, with tolerance `tol` on each λ.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        self.barycentric(p).iter().all(|&l| l >= -tol)
    }
}

/// `H` written directly in barycentric coordinates.
#[inline]
pub fn h_from_barycentric(l: &Barycentric) -> f64 {
    2.0 * (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]) - 1.0
}

/// An undirected mesh edge with the triangles that share it.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshEdge {
    /// Vertex indices, smaller first.
    pub vertices: [usize; 2],
    /// `(triangle, local edge index)` pairs; one entry on the boundary, two inside.
    pub adjacent: Vec<(usize, usize)>,
}

impl MeshEdge {
    pub fn is_boundary(&self) -> bool {
        self.adjacent.len() == 1
    }
}

/// Uniform square-grid layout, used for bucket point location.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridLayout {
    pub cells_per_side: usize,
    pub lower: f64,
    pub cell_size: f64,
}

/// A conforming triangle mesh.
#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    elements: Vec<Triangle>,
    edges: Vec<MeshEdge>,
    /// `triangle_edges[t][j]` is the global edge opposite local vertex `j`.
    triangle_edges: Vec<[usize; 3]>,
    layout: Option<GridLayout>,
    /// Friedrichs–Keller refinement level, when generated as one.
    level: Option<usize>,
}

impl Mesh {
    /// Builds a mesh and its edge adjacency. Fails on degenerate triangles and
    /// on edges shared by more than two triangles.
    pub fn new(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut elements = Vec::with_capacity(triangles.len());
        for (k, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return domain(format!("triangle {k} references a missing vertex"));
            }
            elements.push(Triangle::new(
                vertices[tri[0]],
                vertices[tri[1]],
                vertices[tri[2]],
            )?);
        }

        let mut index: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        let mut edges: Vec<MeshEdge> = Vec::new();
        let mut triangle_edges = vec![[0usize; 3]; triangles.len()];
        for (k, tri) in triangles.iter().enumerate() {
            for j in 0..3 {
                let a = tri[(j + 1) % 3];
                let b = tri[(j + 2) % 3];
                let key = if a < b { [a, b] } else { [b, a] };
                let id = *index.entry(key).or_insert_with(|| {
                    edges.push(MeshEdge {
                        vertices: key,
                        adjacent: Vec::with_capacity(2),
                    });
                    edges.len() - 1
                });
                if edges[id].adjacent.len() == 2 {
                    return domain(format!(
                        "edge ({}, {}) is shared by more than two triangles",
                        key[0], key[1]
                    ));
                }
                edges[id].adjacent.push((k, j));
                triangle_edges[k][j] = id;
            }
        }

        Ok(Self {
            vertices,
            triangles,
            elements,
            edges,
            triangle_edges,
            layout: None,
            level: None,
        })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn elements(&self) -> &[Triangle] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &Triangle {
        &self.elements[k]
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn layout(&self) -> Option<&GridLayout> {
        self.layout.as_ref()
    }

    pub fn level(&self) -> Option<usize> {
        self.level
    }

    pub fn total_area(&self) -> f64 {
        self.elements.iter().map(Triangle::area).sum()
    }

    /// Lowest-index triangle containing `p`, if any.
    ///
    /// Grid-generated meshes use bucket lookup, other meshes a linear scan.
    pub fn locate(&self, p: Point2) -> Option<usize> {
        const TOL: f64 = 1e-12;
        match self.layout {
            Some(g) => {
                let n = g.cells_per_side;
                let cell = |c: f64| -> (usize, usize) {
                    let u = (c - g.lower) / g.cell_size;
                    let lo = (u - 1e-9).floor().max(0.0) as usize;
                    let hi = ((u + 1e-9).floor().max(0.0) as usize).min(n - 1);
                    (lo.min(n - 1), hi)
                };
                let (ix0, ix1) = cell(p.x);
                let (iy0, iy1) = cell(p.y);
                let mut best: Option<usize> = None;
                for iy in iy0..=iy1 {
                    for ix in ix0..=ix1 {
                        let base = 2 * (iy * n + ix);
                        for k in [base, base + 1] {
                            if self.elements[k].contains(p, TOL) {
                                best = Some(best.map_or(k, |b| b.min(k)));
                            }
                        }
                    }
                }
                best
            }
            None => self.elements.iter().position(|t| t.contains(p, TOL)),
        }
    }

    /// Plain-text dump: vertex count, vertices, triangle count, index triples.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(out, "{:.17e} {:.17e}", v.x, v.y);
        }
        let _ = writeln!(out, "{}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        out
    }
}

/// Friedrichs–Keller triangulation of `[−1, 1]²` at level `n`.
///
/// `(n+1) × (n+1)` squares, each cut along its bottom-left to top-right
/// diagonal, giving `2(n+1)²` counter-clockwise triangles. Square `(ix, iy)`
/// owns triangles `2(iy(n+1)+ix)` (below the diagonal) and the next one.
pub fn friedrichs_keller(n: usize) -> Mesh {
    let cells = n + 1;
    let per_row = cells + 1;
    let h = 2.0 / cells as f64;
    let coord = |i: usize| if i == cells { 1.0 } else { -1.0 + i as f64 * h };

    let mut vertices = Vec::with_capacity(per_row * per_row);
    for iy in 0..per_row {
        for ix in 0..per_row {
            vertices.push(Point2::new(coord(ix), coord(iy)));
        }
    }
    let id = |ix: usize, iy: usize| iy * per_row + ix;
    let mut triangles = Vec::with_capacity(2 * cells * cells);
    for iy in 0..cells {
        for ix in 0..cells {
            let bl = id(ix, iy);
            let br = id(ix + 1, iy);
            let tl = id(ix, iy + 1);
            let tr = id(ix + 1, iy + 1);
            triangles.push([bl, br, tr]);
            triangles.push([bl, tr, tl]);
        }
    }
    let mut mesh = Mesh::new(vertices, triangles).expect("structured mesh is valid");
    mesh.layout = Some(GridLayout {
        cells_per_side: cells,
        lower: -1.0,
        cell_size: h,
    });
    mesh.level = Some(n);
    mesh
}
