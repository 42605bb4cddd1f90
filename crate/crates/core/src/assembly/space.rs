use std::collections::BTreeMap;
use std::sync::Arc;

use crate::elements::{dg1d_eval, hermite_eval, LocalBasis, TriangleElement, TriangleFamily};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh1D, Mesh2D, Subdomain};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// Cubic Hermite on intervals (value and slope at each vertex).
    Hermite,
    /// Discontinuous linears on intervals.
    Dg1d,
    Cg(usize),
    Dg(usize),
    Rt(usize),
    Ned(usize),
}

impl Family {
    pub fn is_interval(self) -> bool {
        matches!(self, Family::Hermite | Family::Dg1d)
    }

    fn triangle_element(self) -> Option<Result<TriangleElement>> {
        let (f, k) = match self {
            Family::Cg(k) => (TriangleFamily::Cg, k),
            Family::Dg(k) => (TriangleFamily::Dg, k),
            Family::Rt(k) => (TriangleFamily::Rt, k),
            Family::Ned(k) => (TriangleFamily::Ned, k),
            _ => return None,
        };
        Some(TriangleElement::new(f, k))
    }

    /// Polynomial degree used to pick quadrature orders.
    pub fn degree(self) -> usize {
        match self {
            Family::Hermite => 3,
            Family::Dg1d => 1,
            Family::Cg(k) | Family::Dg(k) | Family::Rt(k) | Family::Ned(k) => k,
        }
    }
}

#[derive(Clone, Debug)]
pub enum MeshRef {
    Interval(Arc<Mesh1D>),
    Triangle(Arc<Mesh2D>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffOp {
    /// Second derivative in 1D.
    Dxx,
    Div,
    Grad,
    /// Scalar curl `∂_x v_y - ∂_y v_x`.
    Curl,
    /// Vector rotation `(∂_y f, -∂_x f)` of a scalar field.
    Rot,
}

/// A finite element space over the cells of one subdomain.
///
/// Values are returned as 2-vectors throughout; scalar fields use the first
/// component. In 1D a point is `[x, 0]`.
#[derive(Clone, Debug)]
pub struct FunctionSpace {
    mesh: MeshRef,
    sub: Subdomain,
    family: Family,
    cells: Vec<usize>,
    cell_dofs: Vec<Vec<usize>>,
    bases: Vec<LocalBasis>,
    ndofs: usize,
}

impl FunctionSpace {
    pub fn interval(mesh: Arc<Mesh1D>, sub: Subdomain, family: Family) -> Result<Self> {
        if !family.is_interval() {
            return Err(Error::invalid(format!(
                "{family:?} is not an interval family"
            )));
        }
        let cells = mesh.cells_of(sub);
        if cells.is_empty() {
            return Err(Error::invalid("subdomain has no cells"));
        }
        let cell_dofs: Vec<Vec<usize>> = (0..cells.len())
            .map(|c| match family {
                Family::Hermite => vec![2 * c, 2 * c + 1, 2 * c + 2, 2 * c + 3],
                _ => vec![2 * c, 2 * c + 1],
            })
            .collect();
        let ndofs = match family {
            Family::Hermite => 2 * (cells.len() + 1),
            _ => 2 * cells.len(),
        };
        Ok(FunctionSpace {
            mesh: MeshRef::Interval(mesh),
            sub,
            family,
            cells,
            cell_dofs,
            bases: Vec::new(),
            ndofs,
        })
    }

    pub fn triangle(mesh: Arc<Mesh2D>, sub: Subdomain, family: Family) -> Result<Self> {
        let element = family
            .triangle_element()
            .ok_or_else(|| Error::invalid(format!("{family:?} is not a triangle family")))??;
        let cells = mesh.triangles_of(sub);
        if cells.is_empty() {
            return Err(Error::invalid("subdomain has no triangles"));
        }
        let (nv, ne, ni) = (
            element.dofs_per_vertex(),
            element.dofs_per_edge(),
            element.dofs_interior(),
        );
        let mut vmap = BTreeMap::new();
        let mut emap = BTreeMap::new();
        for &t in &cells {
            for v in mesh.triangle(t) {
                vmap.insert(v, 0);
            }
            for e in mesh.triangle_edges(t) {
                emap.insert(e, 0);
            }
        }
        let mut next = 0;
        if nv > 0 {
            for slot in vmap.values_mut() {
                *slot = next;
                next += nv;
            }
        }
        if ne > 0 {
            for slot in emap.values_mut() {
                *slot = next;
                next += ne;
            }
        }
        let mut cell_dofs = Vec::with_capacity(cells.len());
        let mut bases = Vec::with_capacity(cells.len());
        for &t in &cells {
            let tri = mesh.triangle(t);
            let edges = mesh.triangle_edges(t);
            let mut dofs = Vec::with_capacity(element.num_dofs());
            if nv > 0 {
                dofs.extend(tri.iter().map(|v| vmap[v]));
            }
            for e in edges {
                dofs.extend((0..ne).map(|m| emap[&e] + m));
            }
            dofs.extend(next..next + ni);
            next += ni;
            let forward = [0, 1, 2].map(|i| tri[(i + 1) % 3] < tri[(i + 2) % 3]);
            bases.push(element.local_basis(mesh.triangle_coords(t), forward)?);
            cell_dofs.push(dofs);
        }
        Ok(FunctionSpace {
            mesh: MeshRef::Triangle(mesh),
            sub,
            family,
            cells,
            cell_dofs,
            bases,
            ndofs: next,
        })
    }

    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn subdomain(&self) -> Subdomain {
        self.sub
    }

    pub fn mesh(&self) -> &MeshRef {
        &self.mesh
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Global mesh index of local cell `c`.
    pub fn cell(&self, c: usize) -> usize {
        self.cells[c]
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.cell_dofs[c]
    }

    pub fn is_discontinuous(&self) -> bool {
        matches!(self.family, Family::Dg1d | Family::Dg(_))
    }

    fn interval_cell(&self, c: usize) -> (f64, f64) {
        match &self.mesh {
            MeshRef::Interval(m) => m.cell_bounds(self.cells[c]),
            MeshRef::Triangle(_) => unreachable!("interval cell on a triangle mesh"),
        }
    }

    /// Physical quadrature on local cell `c` exact to polynomial `order`.
    pub fn cell_quadrature(&self, c: usize, order: usize) -> Result<Vec<([f64; 2], f64)>> {
        match &self.mesh {
            MeshRef::Interval(_) => {
                let (a, b) = self.interval_cell(c);
                let (x, w) = crate::elements::gauss_legendre((order + 1).div_ceil(2).max(1));
                Ok(x.iter()
                    .zip(&w)
                    .map(|(&t, &wt)| ([a + t * (b - a), 0.0], wt * (b - a)))
                    .collect())
            }
            MeshRef::Triangle(_) => self.bases[c].quadrature(order),
        }
    }

    fn interval_derivs(&self, c: usize, x: f64, deriv: usize) -> Vec<f64> {
        let (a, b) = self.interval_cell(c);
        let h = b - a;
        let t = (x - a) / h;
        let s = h.powi(-(deriv as i32));
        match self.family {
            Family::Hermite => {
                let v = hermite_eval(t, deriv).expect("supported derivative");
                vec![v[0] * s, v[1] * h * s, v[2] * s, v[3] * h * s]
            }
            _ => {
                let v = dg1d_eval(t, deriv).expect("supported derivative");
                vec![v[0] * s, v[1] * s]
            }
        }
    }

    /// Basis values of local cell `c` at `x`.
    pub fn cell_values(&self, c: usize, x: [f64; 2]) -> Vec<[f64; 2]> {
        match &self.mesh {
            MeshRef::Interval(_) => self
                .interval_derivs(c, x[0], 0)
                .into_iter()
                .map(|v| [v, 0.0])
                .collect(),
            MeshRef::Triangle(_) => self.bases[c].eval(x),
        }
    }

    /// `op` applied to every basis function of local cell `c` at `x`.
    pub fn cell_op(&self, c: usize, x: [f64; 2], op: DiffOp) -> Result<Vec<[f64; 2]>> {
        let fam = self.family;
        match (op, fam) {
            (DiffOp::Dxx, Family::Hermite | Family::Dg1d) => Ok(self
                .interval_derivs(c, x[0], 2)
                .into_iter()
                .map(|v| [v, 0.0])
                .collect()),
            (DiffOp::Div, Family::Rt(_) | Family::Ned(_)) => Ok(self.bases[c]
                .divergences(x)
                .into_iter()
                .map(|v| [v, 0.0])
                .collect()),
            (DiffOp::Curl, Family::Rt(_) | Family::Ned(_)) => Ok(self.bases[c]
                .curls(x)
                .into_iter()
                .map(|v| [v, 0.0])
                .collect()),
            (DiffOp::Grad, Family::Cg(_) | Family::Dg(_)) => Ok(self.bases[c].gradients(x)),
            (DiffOp::Rot, Family::Cg(_) | Family::Dg(_)) => Ok(self.bases[c]
                .gradients(x)
                .into_iter()
                .map(|g| [g[1], -g[0]])
                .collect()),
            _ => Err(Error::invalid(format!("{op:?} is not defined on {fam:?}"))),
        }
    }

    /// Value of the field with coefficients `u` at `x` in local cell `c`.
    pub fn evaluate(&self, u: &[f64], c: usize, x: [f64; 2]) -> [f64; 2] {
        let vals = self.cell_values(c, x);
        let mut s = [0.0; 2];
        for (&d, v) in self.cell_dofs[c].iter().zip(&vals) {
            s[0] += u[d] * v[0];
            s[1] += u[d] * v[1];
        }
        s
    }

    /// `op` of the field with coefficients `u` at `x` in local cell `c`.
    pub fn evaluate_op(&self, u: &[f64], c: usize, x: [f64; 2], op: DiffOp) -> Result<[f64; 2]> {
        let vals = self.cell_op(c, x, op)?;
        let mut s = [0.0; 2];
        for (&d, v) in self.cell_dofs[c].iter().zip(&vals) {
            s[0] += u[d] * v[0];
            s[1] += u[d] * v[1];
        }
        Ok(s)
    }

    /// DOF-functional interpolation. In 1D `f` returns `[value, derivative]`.
    pub fn interpolate(&self, f: &dyn Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let mut u = vec![0.0; self.ndofs];
        for c in 0..self.num_cells() {
            let local = match &self.mesh {
                MeshRef::Interval(_) => {
                    let (a, b) = self.interval_cell(c);
                    let (fa, fb) = (f([a, 0.0]), f([b, 0.0]));
                    match self.family {
                        Family::Hermite => vec![fa[0], fa[1], fb[0], fb[1]],
                        _ => vec![fa[0], fb[0]],
                    }
                }
                MeshRef::Triangle(_) => self.bases[c].interpolate(f),
            };
            for (&d, v) in self.cell_dofs[c].iter().zip(local) {
                u[d] = v;
            }
        }
        u
    }

    /// Facets of `tag` on the boundary of this subdomain, with the local cell
    /// adjacent to each.
    pub fn facets(&self, tag: BoundaryTag) -> Vec<(usize, usize)> {
        match &self.mesh {
            MeshRef::Interval(m) => m
                .facets_by_tag(tag)
                .into_iter()
                .filter_map(|v| {
                    (0..self.cells.len())
                        .find(|&c| m.cell(self.cells[c]).contains(&v))
                        .map(|c| (v, c))
                })
                .collect(),
            MeshRef::Triangle(m) => m
                .facets_by_tag(tag)
                .into_iter()
                .filter_map(|e| {
                    let t = m.edge_triangle_in(e, self.sub)?;
                    self.cells.binary_search(&t).ok().map(|c| (e, c))
                })
                .collect(),
        }
    }

    /// Quadrature points on a facet: the vertex itself in 1D, Gauss points
    /// running from the lower to the higher vertex index in 2D.
    pub fn facet_points(&self, facet: usize) -> Vec<([f64; 2], f64)> {
        match &self.mesh {
            MeshRef::Interval(m) => vec![([m.vertices()[facet], 0.0], 1.0)],
            MeshRef::Triangle(m) => {
                let [a, b] = m.edge(facet).map(|v| m.vertex(v));
                let len = m.edge_length(facet);
                let (x, w) = crate::elements::gauss_legendre(5);
                x.iter()
                    .zip(&w)
                    .map(|(&s, &ws)| {
                        (
                            [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])],
                            ws * len,
                        )
                    })
                    .collect()
            }
        }
    }

    /// Outward unit normal of this subdomain at `facet` (adjacent to local
    /// cell `c`); `[±1, 0]` in 1D.
    pub fn outward_normal(&self, c: usize, facet: usize) -> [f64; 2] {
        match &self.mesh {
            MeshRef::Interval(m) => {
                let (a, _) = self.interval_cell(c);
                if (m.vertices()[facet] - a).abs() < 1e-14 * m.length() {
                    [-1.0, 0.0]
                } else {
                    [1.0, 0.0]
                }
            }
            MeshRef::Triangle(m) => m.outward_normal(facet, self.cells[c]),
        }
    }

    /// Trace operator applied to each basis function of local cell `c` at a
    /// point of `facet`.
    ///
    /// In 1D the result holds the two components of the four-component
    /// endpoint trace that belong to that endpoint. On Ω₁ the trace is
    /// `(-f'(b), f'(a), f(b), -f(a))`, on Ω₂ it is `(f(b), f(a), f'(b), f'(a))`.
    /// In 2D it is the value (CG), outward normal component (RT) or
    /// tangential component along the edge direction (NED).
    pub fn trace_op(&self, c: usize, facet: usize, x: [f64; 2]) -> Result<Vec<[f64; 2]>> {
        match &self.mesh {
            MeshRef::Interval(m) => {
                if self.family != Family::Hermite {
                    return Err(Error::invalid("discontinuous spaces carry no trace"));
                }
                let (a, _) = self.interval_cell(c);
                let at_left = (m.vertices()[facet] - a).abs() < 1e-14 * m.length();
                let v = self.interval_derivs(c, x[0], 0);
                let d = self.interval_derivs(c, x[0], 1);
                Ok(v.iter()
                    .zip(&d)
                    .map(|(&f, &df)| match (self.sub, at_left) {
                        (Subdomain::Omega1, false) => [-df, f],
                        (Subdomain::Omega1, true) => [df, -f],
                        (Subdomain::Omega2, _) => [f, df],
                    })
                    .collect())
            }
            MeshRef::Triangle(m) => {
                let vals = self.bases[c].eval(x);
                match self.family {
                    Family::Cg(_) => Ok(vals.into_iter().map(|v| [v[0], 0.0]).collect()),
                    Family::Rt(_) => {
                        let n = m.outward_normal(facet, self.cells[c]);
                        Ok(vals
                            .into_iter()
                            .map(|v| [v[0] * n[0] + v[1] * n[1], 0.0])
                            .collect())
                    }
                    Family::Ned(_) => {
                        let [a, b] = m.edge(facet).map(|v| m.vertex(v));
                        let len = m.edge_length(facet);
                        let t = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
                        Ok(vals
                            .into_iter()
                            .map(|v| [v[0] * t[0] + v[1] * t[1], 0.0])
                            .collect())
                    }
                    _ => Err(Error::invalid("discontinuous spaces carry no trace")),
                }
            }
        }
    }

    /// Trace DOFs on `tag` as `(parent dof, sign)`, ordered by facet midpoint
    /// then local DOF. RT signs turn the stored flux into the outward flux.
    pub fn trace_dofs(&self, tag: BoundaryTag) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        let mut push = |d: usize, s: f64| {
            if !out.iter().any(|&(e, _)| e == d) {
                out.push((d, s));
            }
        };
        for (facet, c) in self.facets(tag) {
            let dofs = &self.cell_dofs[c];
            match (&self.mesh, self.family) {
                (MeshRef::Interval(_), Family::Hermite) => {
                    let (a, _) = self.interval_cell(c);
                    let left = match &self.mesh {
                        MeshRef::Interval(m) => {
                            (m.vertices()[facet] - a).abs() < 1e-14 * m.length()
                        }
                        _ => unreachable!(),
                    };
                    let base = if left { 0 } else { 2 };
                    push(dofs[base], 1.0);
                    push(dofs[base + 1], 1.0);
                }
                (MeshRef::Triangle(m), Family::Cg(k)) => {
                    let i = local_edge(m, self.cells[c], facet);
                    let tri = m.triangle(self.cells[c]);
                    let (p, q) = ((i + 1) % 3, (i + 2) % 3);
                    let (lo, hi) = if tri[p] < tri[q] { (p, q) } else { (q, p) };
                    push(dofs[lo], 1.0);
                    push(dofs[hi], 1.0);
                    for j in 0..k - 1 {
                        push(dofs[3 + (k - 1) * i + j], 1.0);
                    }
                }
                (MeshRef::Triangle(m), Family::Rt(k) | Family::Ned(k)) => {
                    let t = self.cells[c];
                    let i = local_edge(m, t, facet);
                    let sign = if matches!(self.family, Family::Rt(_)) {
                        let [a, b] = m.edge(facet).map(|v| m.vertex(v));
                        let ne = [b[1] - a[1], -(b[0] - a[0])];
                        let no = m.outward_normal(facet, t);
                        (ne[0] * no[0] + ne[1] * no[1]).signum()
                    } else {
                        1.0
                    };
                    for j in 0..k {
                        push(dofs[k * i + j], sign);
                    }
                }
                _ => {}
            }
        }
        out
    }
}

fn local_edge(m: &Mesh2D, t: usize, e: usize) -> usize {
    m.triangle_edges(t)
        .iter()
        .position(|&x| x == e)
        .expect("facet belongs to triangle")
}
