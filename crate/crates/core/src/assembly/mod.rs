//! Matrix assembly: mass matrices, differential operators, trace matrices,
//! boundary port spaces and their pairings.

mod space;

use std::collections::HashMap;

pub use space::{DiffOp, Family, FunctionSpace, MeshRef};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, LuFactorization};
use crate::mesh::{BoundaryTag, Subdomain};

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn quad_order(a: &FunctionSpace, b: &FunctionSpace) -> usize {
    a.family().degree() + b.family().degree() + 2
}

/// Mass matrix with a positive coefficient.
pub fn weighted_mass(space: &FunctionSpace, coef: &dyn Fn([f64; 2]) -> f64) -> Result<CsrMatrix> {
    let order = quad_order(space, space);
    let mut t = Vec::new();
    for c in 0..space.num_cells() {
        let dofs = space.cell_dofs(c);
        let n = dofs.len();
        let mut local = vec![0.0; n * n];
        for (x, w) in space.cell_quadrature(c, order)? {
            let k = coef(x);
            if !(k > 0.0) {
                return Err(Error::invalid(format!(
                    "mass coefficient {k} is not positive"
                )));
            }
            let v = space.cell_values(c, x);
            for i in 0..n {
                for j in 0..n {
                    local[i * n + j] += w * k * dot2(v[i], v[j]);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                t.push((dofs[i], dofs[j], local[i * n + j]));
            }
        }
    }
    CsrMatrix::from_triplets(space.ndofs(), space.ndofs(), &t)
}

pub fn mass(space: &FunctionSpace) -> Result<CsrMatrix> {
    weighted_mass(space, &|_| 1.0)
}

/// `D[i, m] = ∫ v_i · op(u_m)` over the shared subdomain.
pub fn differential(rows: &FunctionSpace, cols: &FunctionSpace, op: DiffOp) -> Result<CsrMatrix> {
    if rows.subdomain() != cols.subdomain() || rows.num_cells() != cols.num_cells() {
        return Err(Error::invalid(
            "operator spaces must live on the same subdomain",
        ));
    }
    let order = quad_order(rows, cols);
    let mut t = Vec::new();
    for c in 0..rows.num_cells() {
        let (rd, cd) = (rows.cell_dofs(c), cols.cell_dofs(c));
        let mut local = vec![0.0; rd.len() * cd.len()];
        for (x, w) in rows.cell_quadrature(c, order)? {
            let v = rows.cell_values(c, x);
            let d = cols.cell_op(c, x, op)?;
            for i in 0..rd.len() {
                for m in 0..cd.len() {
                    local[i * cd.len() + m] += w * dot2(v[i], d[m]);
                }
            }
        }
        for i in 0..rd.len() {
            for m in 0..cd.len() {
                t.push((rd[i], cd[m], local[i * cd.len() + m]));
            }
        }
    }
    CsrMatrix::from_triplets(rows.ndofs(), cols.ndofs(), &t)
}

/// Matrix sending parent coefficients to trace coefficients on `tag`.
pub fn trace_matrix(space: &FunctionSpace, tag: BoundaryTag) -> Result<CsrMatrix> {
    let dofs = space.trace_dofs(tag);
    let t: Vec<_> = dofs
        .iter()
        .enumerate()
        .map(|(r, &(d, s))| (r, d, s))
        .collect();
    CsrMatrix::from_triplets(dofs.len(), space.ndofs(), &t)
}

#[derive(Clone, Debug)]
struct FacetSamples {
    facet: usize,
    normal: [f64; 2],
    points: Vec<([f64; 2], f64)>,
    // per point: (trace index, trace basis value)
    values: Vec<Vec<(usize, [f64; 2])>>,
}

/// Trace space of a parent space on one boundary part, sampled at facet
/// quadrature points. Its basis is the signed trace of the parent basis
/// functions listed in [`FunctionSpace::trace_dofs`].
#[derive(Clone, Debug)]
pub struct BoundarySpace {
    tag: BoundaryTag,
    sub: Subdomain,
    dofs: Vec<(usize, f64)>,
    parent_ndofs: usize,
    facets: Vec<FacetSamples>,
    gram: Option<LuFactorization>,
}

impl BoundarySpace {
    pub fn new(space: &FunctionSpace, tag: BoundaryTag) -> Result<Self> {
        let dofs = space.trace_dofs(tag);
        if dofs.is_empty() {
            return Err(Error::invalid(format!(
                "{:?} has no trace on {tag:?}",
                space.family()
            )));
        }
        let index: HashMap<usize, usize> =
            dofs.iter().enumerate().map(|(r, &(d, _))| (d, r)).collect();
        let mut facets = Vec::new();
        for (facet, c) in space.facets(tag) {
            let points = space.facet_points(facet);
            let mut values = Vec::with_capacity(points.len());
            for &(x, _) in &points {
                let ops = space.trace_op(c, facet, x)?;
                let mut at = Vec::new();
                for (l, &d) in space.cell_dofs(c).iter().enumerate() {
                    if let Some(&r) = index.get(&d) {
                        let s = dofs[r].1;
                        at.push((r, [s * ops[l][0], s * ops[l][1]]));
                    }
                }
                values.push(at);
            }
            facets.push(FacetSamples {
                facet,
                normal: space.outward_normal(c, facet),
                points,
                values,
            });
        }
        let mut bs = BoundarySpace {
            tag,
            sub: space.subdomain(),
            dofs,
            parent_ndofs: space.ndofs(),
            facets,
            gram: None,
        };
        bs.gram = Some(LuFactorization::new(&gram(&bs, &bs)?)?);
        Ok(bs)
    }

    pub fn tag(&self) -> BoundaryTag {
        self.tag
    }

    pub fn subdomain(&self) -> Subdomain {
        self.sub
    }

    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    /// `(parent dof, sign)` of each trace basis function.
    pub fn dofs(&self) -> &[(usize, f64)] {
        &self.dofs
    }

    pub fn parent_ndofs(&self) -> usize {
        self.parent_ndofs
    }

    pub fn facets(&self) -> Vec<usize> {
        self.facets.iter().map(|f| f.facet).collect()
    }

    /// L² projection of boundary data onto this trace space. The datum
    /// receives the point and the outward normal of the parent subdomain.
    pub fn project(&self, datum: &dyn Fn([f64; 2], [f64; 2]) -> [f64; 2]) -> Result<Vec<f64>> {
        let mut load = vec![0.0; self.dim()];
        for f in &self.facets {
            for (&(x, w), vals) in f.points.iter().zip(&f.values) {
                let g = datum(x, f.normal);
                for &(r, v) in vals {
                    load[r] += w * dot2(v, g);
                }
            }
        }
        self.gram
            .as_ref()
            .expect("gram factored at construction")
            .solve(&load)
    }

    /// Boundary field with trace coefficients `coeffs` at every sample
    /// point, as `(point, weight, value)`.
    pub fn sample(&self, coeffs: &[f64]) -> Vec<([f64; 2], f64, [f64; 2])> {
        let mut out = Vec::new();
        for f in &self.facets {
            for (&(x, w), vals) in f.points.iter().zip(&f.values) {
                let mut s = [0.0; 2];
                for &(r, v) in vals {
                    s[0] += coeffs[r] * v[0];
                    s[1] += coeffs[r] * v[1];
                }
                out.push((x, w, s));
            }
        }
        out
    }
}

/// `G[l, k] = ∫ a_l · b_k` over the common facets.
pub fn gram(a: &BoundarySpace, b: &BoundarySpace) -> Result<CsrMatrix> {
    if a.facets() != b.facets() {
        return Err(Error::invalid("boundary spaces live on different facets"));
    }
    let mut t = Vec::new();
    for (fa, fb) in a.facets.iter().zip(&b.facets) {
        for ((&(_, w), va), vb) in fa.points.iter().zip(&fa.values).zip(&fb.values) {
            for &(l, x) in va {
                for &(k, y) in vb {
                    t.push((l, k, w * dot2(x, y)));
                }
            }
        }
    }
    CsrMatrix::from_triplets(a.dim(), b.dim(), &t)
}

/// Interface pairing `Ψ[l, k] = ∫_Γ a_l · b_k`.
pub fn psi(a: &BoundarySpace, b: &BoundarySpace) -> Result<CsrMatrix> {
    gram(a, b)
}

/// Boundary port matrix `B[i, k] = ∫ trace(φ_i) · χ_k` for a space whose
/// subdomain touches every facet of `bs`.
pub fn port_matrix(space: &FunctionSpace, bs: &BoundarySpace) -> Result<CsrMatrix> {
    let cells: HashMap<usize, usize> = space.facets(bs.tag).into_iter().collect();
    let mut t = Vec::new();
    for f in &bs.facets {
        let &c = cells
            .get(&f.facet)
            .ok_or_else(|| Error::invalid("port facet not adjacent to the space"))?;
        let dofs = space.cell_dofs(c);
        for (&(x, w), vals) in f.points.iter().zip(&f.values) {
            let ops = space.trace_op(c, f.facet, x)?;
            for (l, &d) in dofs.iter().enumerate() {
                for &(k, v) in vals {
                    let p = w * dot2(ops[l], v);
                    if p != 0.0 {
                        t.push((d, k, p));
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(space.ndofs(), bs.dim(), &t)
}

/// Interface coupling `L = (Ψ T_β)ᵀ T_α`.
pub fn interface_coupling(
    psi: &CsrMatrix,
    t_beta: &CsrMatrix,
    t_alpha: &CsrMatrix,
) -> Result<CsrMatrix> {
    psi.matmul(t_beta)?.transpose().matmul(t_alpha)
}

/// Squared L² error of a discrete field against `exact` on its subdomain.
pub fn l2_error_sq(
    space: &FunctionSpace,
    u: &[f64],
    exact: &dyn Fn([f64; 2]) -> [f64; 2],
) -> Result<f64> {
    let order = 2 * space.family().degree() + 4;
    let mut s = 0.0;
    for c in 0..space.num_cells() {
        for (x, w) in space.cell_quadrature(c, order)? {
            let v = space.evaluate(u, c, x);
            let e = exact(x);
            s += w * ((v[0] - e[0]).powi(2) + (v[1] - e[1]).powi(2));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests;
