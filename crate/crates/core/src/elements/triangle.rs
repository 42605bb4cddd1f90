//! Lagrange, discontinuous, Raviart-Thomas and Nédélec (first kind) elements
//! on triangles.
//!
//! Basis functions are built per physical cell: a polynomial spanning set in
//! scaled local coordinates is combined through the inverse of the matrix of
//! DOF functionals applied to it, so the basis is dual to the functionals on
//! that cell. Local edge `i` is the edge opposite vertex `i`, running from
//! vertex `i+1` to vertex `i+2` unless its orientation flag says otherwise.

use nalgebra::DMatrix;

use super::legendre;
use super::poly::{homogeneous, monomials_upto, VecPoly};
use super::quadrature::{gauss_legendre, quadrature, QuadratureDomain, QuadratureRule};
use crate::error::{Error, Result};

pub const REFERENCE_TRIANGLE: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TriangleFamily {
    /// Continuous Lagrange.
    Cg,
    /// Discontinuous Lagrange.
    Dg,
    Rt,
    Ned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TriangleElement {
    pub family: TriangleFamily,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DofFunctional {
    Point([f64; 2]),
    /// `∫_e (v·n) P_j(2s-1) ds` along the edge from `a` to `b`, with `n` the
    /// tangent rotated clockwise.
    EdgeNormal {
        a: [f64; 2],
        b: [f64; 2],
        j: usize,
    },
    /// `∫_e (v·t) P_j(2s-1) ds`
    EdgeTangent {
        a: [f64; 2],
        b: [f64; 2],
        j: usize,
    },
    /// `∫_T v_comp ξ^a η^b dx` in scaled local coordinates.
    Interior {
        comp: usize,
        a: i32,
        b: i32,
    },
}

impl TriangleElement {
    pub fn new(family: TriangleFamily, degree: usize) -> Result<Self> {
        let ok = match family {
            TriangleFamily::Cg | TriangleFamily::Rt | TriangleFamily::Ned => {
                (1..=3).contains(&degree)
            }
            TriangleFamily::Dg => degree <= 2,
        };
        if !ok {
            return Err(Error::invalid(format!(
                "{family:?} of degree {degree} is not supported"
            )));
        }
        Ok(TriangleElement { family, degree })
    }

    pub fn is_vector(&self) -> bool {
        matches!(self.family, TriangleFamily::Rt | TriangleFamily::Ned)
    }

    pub fn dofs_per_vertex(&self) -> usize {
        usize::from(self.family == TriangleFamily::Cg)
    }

    pub fn dofs_per_edge(&self) -> usize {
        match self.family {
            TriangleFamily::Cg => self.degree - 1,
            TriangleFamily::Dg => 0,
            TriangleFamily::Rt | TriangleFamily::Ned => self.degree,
        }
    }

    pub fn dofs_interior(&self) -> usize {
        let k = self.degree;
        match self.family {
            TriangleFamily::Cg => (k.saturating_sub(1) * k.saturating_sub(2)) / 2,
            TriangleFamily::Dg => (k + 1) * (k + 2) / 2,
            TriangleFamily::Rt | TriangleFamily::Ned => k * (k - 1),
        }
    }

    pub fn num_dofs(&self) -> usize {
        3 * self.dofs_per_vertex() + 3 * self.dofs_per_edge() + self.dofs_interior()
    }

    fn spanning_set(&self) -> Vec<VecPoly> {
        let k = self.degree as i32;
        match self.family {
            TriangleFamily::Cg | TriangleFamily::Dg => monomials_upto(k)
                .into_iter()
                .map(|(a, b)| VecPoly::scalar_monomial(a, b))
                .collect(),
            TriangleFamily::Rt | TriangleFamily::Ned => {
                let mut s = Vec::new();
                for comp in 0..2 {
                    for (a, b) in monomials_upto(k - 1) {
                        s.push(VecPoly::component_monomial(a, b, comp));
                    }
                }
                for (a, b) in homogeneous(k - 1) {
                    let mut p = VecPoly::default();
                    if self.family == TriangleFamily::Rt {
                        p.push(a + 1, b, [1.0, 0.0]);
                        p.push(a, b + 1, [0.0, 1.0]);
                    } else {
                        p.push(a, b + 1, [-1.0, 0.0]);
                        p.push(a + 1, b, [0.0, 1.0]);
                    }
                    s.push(p);
                }
                s
            }
        }
    }

    fn functionals(&self, p: &[[f64; 2]; 3], forward: [bool; 3]) -> Vec<DofFunctional> {
        let k = self.degree;
        let lerp =
            |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
        let oriented = |i: usize| {
            let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
            if forward[i] {
                (a, b)
            } else {
                (b, a)
            }
        };
        let mut out = Vec::with_capacity(self.num_dofs());
        match self.family {
            TriangleFamily::Cg => {
                out.extend(p.iter().map(|&v| DofFunctional::Point(v)));
                for i in 0..3 {
                    let (a, b) = oriented(i);
                    for m in 1..k {
                        out.push(DofFunctional::Point(lerp(a, b, m as f64 / k as f64)));
                    }
                }
                out.extend(interior_lattice(p, k).into_iter().map(DofFunctional::Point));
            }
            TriangleFamily::Dg => {
                if k == 0 {
                    let c = [
                        (p[0][0] + p[1][0] + p[2][0]) / 3.0,
                        (p[0][1] + p[1][1] + p[2][1]) / 3.0,
                    ];
                    out.push(DofFunctional::Point(c));
                } else {
                    out.extend(p.iter().map(|&v| DofFunctional::Point(v)));
                    for i in 0..3 {
                        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                        for m in 1..k {
                            out.push(DofFunctional::Point(lerp(a, b, m as f64 / k as f64)));
                        }
                    }
                    out.extend(interior_lattice(p, k).into_iter().map(DofFunctional::Point));
                }
            }
            TriangleFamily::Rt | TriangleFamily::Ned => {
                for i in 0..3 {
                    let (a, b) = oriented(i);
                    for j in 0..k {
                        out.push(if self.family == TriangleFamily::Rt {
                            DofFunctional::EdgeNormal { a, b, j }
                        } else {
                            DofFunctional::EdgeTangent { a, b, j }
                        });
                    }
                }
                if k >= 2 {
                    for comp in 0..2 {
                        for (a, b) in monomials_upto(k as i32 - 2) {
                            out.push(DofFunctional::Interior { comp, a, b });
                        }
                    }
                }
            }
        }
        out
    }

    /// Basis on the physical triangle `coords` (counterclockwise). `forward[i]`
    /// is true when local edge `i` keeps its local direction globally.
    pub fn local_basis(&self, coords: [[f64; 2]; 3], forward: [bool; 3]) -> Result<LocalBasis> {
        let [p0, p1, p2] = coords;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        if det <= 0.0 {
            return Err(Error::invalid(
                "triangle must be counterclockwise with positive area",
            ));
        }
        let mut basis = LocalBasis {
            element: *self,
            coords,
            origin: p0,
            scale: det.sqrt(),
            area: 0.5 * det,
            span: self.spanning_set(),
            coeffs: Vec::new(),
            functionals: self.functionals(&coords, forward),
            edge_rule: gauss_legendre(self.degree + 8),
            cell_rule: quadrature(QuadratureDomain::Triangle, 2 * self.degree + 14)?,
        };
        let n = basis.span.len();
        debug_assert_eq!(n, basis.functionals.len());
        let mut a = DMatrix::zeros(n, n);
        for (i, f) in basis.functionals.iter().enumerate() {
            for (j, s) in basis.span.iter().enumerate() {
                a[(i, j)] = basis.apply_functional(f, &|x| s.eval(basis.local(x)));
            }
        }
        let inv = a
            .transpose()
            .try_inverse()
            .ok_or_else(|| Error::invalid("degenerate DOF matrix"))?;
        basis.coeffs = (0..n)
            .map(|i| inv.row(i).iter().copied().collect())
            .collect();
        Ok(basis)
    }
}

fn interior_lattice(p: &[[f64; 2]; 3], k: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for i in 1..k {
        for j in 1..k {
            if i + j < k {
                let (l1, l2) = (i as f64 / k as f64, j as f64 / k as f64);
                let l0 = 1.0 - l1 - l2;
                out.push([
                    l0 * p[0][0] + l1 * p[1][0] + l2 * p[2][0],
                    l0 * p[0][1] + l1 * p[1][1] + l2 * p[2][1],
                ]);
            }
        }
    }
    out
}

/// Basis of one element on one physical triangle.
#[derive(Clone, Debug)]
pub struct LocalBasis {
    element: TriangleElement,
    coords: [[f64; 2]; 3],
    origin: [f64; 2],
    scale: f64,
    area: f64,
    span: Vec<VecPoly>,
    /// `coeffs[i][j]`: weight of spanning function `j` in basis function `i`
    coeffs: Vec<Vec<f64>>,
    functionals: Vec<DofFunctional>,
    edge_rule: (Vec<f64>, Vec<f64>),
    cell_rule: QuadratureRule,
}

impl LocalBasis {
    fn local(&self, x: [f64; 2]) -> [f64; 2] {
        [
            (x[0] - self.origin[0]) / self.scale,
            (x[1] - self.origin[1]) / self.scale,
        ]
    }

    pub fn element(&self) -> TriangleElement {
        self.element
    }

    pub fn num_dofs(&self) -> usize {
        self.span.len()
    }

    pub fn coords(&self) -> [[f64; 2]; 3] {
        self.coords
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn functionals(&self) -> &[DofFunctional] {
        &self.functionals
    }

    /// Maps a point of the reference triangle onto this cell.
    pub fn map_reference(&self, r: [f64; 2]) -> [f64; 2] {
        let [p0, p1, p2] = self.coords;
        [
            p0[0] + (p1[0] - p0[0]) * r[0] + (p2[0] - p0[0]) * r[1],
            p0[1] + (p1[1] - p0[1]) * r[0] + (p2[1] - p0[1]) * r[1],
        ]
    }

    /// Physical quadrature points and weights of the given order.
    pub fn quadrature(&self, order: usize) -> Result<Vec<([f64; 2], f64)>> {
        let q = quadrature(QuadratureDomain::Triangle, order)?;
        Ok(q.iter()
            .map(|(r, w)| (self.map_reference(r), 2.0 * self.area * w))
            .collect())
    }

    /// Values of all basis functions at `x`; scalar families use component 0.
    pub fn eval(&self, x: [f64; 2]) -> Vec<[f64; 2]> {
        let xi = self.local(x);
        let sv: Vec<[f64; 2]> = self.span.iter().map(|s| s.eval(xi)).collect();
        self.coeffs
            .iter()
            .map(|c| {
                let mut v = [0.0; 2];
                for (w, s) in c.iter().zip(&sv) {
                    v[0] += w * s[0];
                    v[1] += w * s[1];
                }
                v
            })
            .collect()
    }

    pub fn eval_scalar(&self, x: [f64; 2]) -> Vec<f64> {
        self.eval(x).into_iter().map(|v| v[0]).collect()
    }

    /// Physical Jacobians `jac[c][d] = ∂_d φ_c` of all basis functions.
    pub fn jacobians(&self, x: [f64; 2]) -> Vec<[[f64; 2]; 2]> {
        let xi = self.local(x);
        let sj: Vec<[[f64; 2]; 2]> = self.span.iter().map(|s| s.jacobian(xi)).collect();
        self.coeffs
            .iter()
            .map(|c| {
                let mut j = [[0.0; 2]; 2];
                for (w, s) in c.iter().zip(&sj) {
                    for r in 0..2 {
                        for d in 0..2 {
                            j[r][d] += w * s[r][d] / self.scale;
                        }
                    }
                }
                j
            })
            .collect()
    }

    pub fn gradients(&self, x: [f64; 2]) -> Vec<[f64; 2]> {
        self.jacobians(x).into_iter().map(|j| j[0]).collect()
    }

    pub fn divergences(&self, x: [f64; 2]) -> Vec<f64> {
        self.jacobians(x)
            .into_iter()
            .map(|j| j[0][0] + j[1][1])
            .collect()
    }

    /// Scalar curl `∂_x v_y - ∂_y v_x`.
    pub fn curls(&self, x: [f64; 2]) -> Vec<f64> {
        self.jacobians(x)
            .into_iter()
            .map(|j| j[1][0] - j[0][1])
            .collect()
    }

    pub fn apply_functional(&self, f: &DofFunctional, v: &dyn Fn([f64; 2]) -> [f64; 2]) -> f64 {
        match *f {
            DofFunctional::Point(x) => v(x)[0],
            DofFunctional::EdgeNormal { a, b, j } | DofFunctional::EdgeTangent { a, b, j } => {
                let d = [b[0] - a[0], b[1] - a[1]];
                let len = d[0].hypot(d[1]);
                let t = [d[0] / len, d[1] / len];
                let dir = if matches!(f, DofFunctional::EdgeNormal { .. }) {
                    [t[1], -t[0]]
                } else {
                    t
                };
                let (xs, ws) = &self.edge_rule;
                xs.iter()
                    .zip(ws)
                    .map(|(&s, &w)| {
                        let val = v([a[0] + s * d[0], a[1] + s * d[1]]);
                        w * len * (val[0] * dir[0] + val[1] * dir[1]) * legendre(j, 2.0 * s - 1.0)
                    })
                    .sum()
            }
            DofFunctional::Interior { comp, a, b } => self
                .cell_rule
                .iter()
                .map(|(r, w)| {
                    let x = self.map_reference(r);
                    let xi = self.local(x);
                    2.0 * self.area * w * v(x)[comp] * xi[0].powi(a) * xi[1].powi(b)
                })
                .sum(),
        }
    }

    /// DOF-functional interpolation of `v`.
    pub fn interpolate(&self, v: &dyn Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        self.functionals
            .iter()
            .map(|f| self.apply_functional(f, v))
            .collect()
    }
}

fn reference(family: TriangleFamily, k: usize) -> Result<LocalBasis> {
    TriangleElement::new(family, k)?.local_basis(REFERENCE_TRIANGLE, [true; 3])
}

/// Continuous Lagrange basis on the reference triangle: values and gradients.
pub fn lagrange_eval(k: usize, point: [f64; 2]) -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
    let b = reference(TriangleFamily::Cg, k)?;
    Ok((b.eval_scalar(point), b.gradients(point)))
}

pub fn dg_eval(k: usize, point: [f64; 2]) -> Result<Vec<f64>> {
    Ok(reference(TriangleFamily::Dg, k)?.eval_scalar(point))
}

/// Raviart-Thomas basis on the reference triangle with counterclockwise
/// edges, so the unit fluxes point outward.
pub fn rt_eval(k: usize, point: [f64; 2]) -> Result<Vec<[f64; 2]>> {
    Ok(reference(TriangleFamily::Rt, k)?.eval(point))
}

pub fn ned_eval(k: usize, point: [f64; 2]) -> Result<Vec<[f64; 2]>> {
    Ok(reference(TriangleFamily::Ned, k)?.eval(point))
}
