//! Decomposed meshes: an interval split at an interface vertex and the unit
//! square split along its main diagonal.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subdomain {
    /// Dirichlet side.
    Omega1,
    /// Neumann side.
    Omega2,
}

impl Subdomain {
    pub fn code(self) -> u8 {
        match self {
            Subdomain::Omega1 => 1,
            Subdomain::Omega2 => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            1 => Some(Subdomain::Omega1),
            2 => Some(Subdomain::Omega2),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    /// Dirichlet boundary of Ω₁.
    Gamma1,
    /// Neumann boundary of Ω₂.
    Gamma2,
    Interface,
}

impl BoundaryTag {
    pub fn code(self) -> u8 {
        match self {
            BoundaryTag::Gamma1 => 1,
            BoundaryTag::Gamma2 => 2,
            BoundaryTag::Interface => 3,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            1 => Some(BoundaryTag::Gamma1),
            2 => Some(BoundaryTag::Gamma2),
            3 => Some(BoundaryTag::Interface),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh1D {
    vertices: Vec<f64>,
    cell_tags: Vec<Subdomain>,
    interface: usize,
}

impl Mesh1D {
    /// Ω₂ = [0, x_int] carries `n2` uniform cells, Ω₁ = [x_int, length]
    /// carries `n1`.
    pub fn build_interval_decomposed(
        length: f64,
        n1: usize,
        n2: usize,
        x_int: f64,
    ) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::invalid("cell counts must be positive"));
        }
        if !(length > 0.0 && x_int > 0.0 && x_int < length) {
            return Err(Error::invalid(format!(
                "interface {x_int} must lie strictly inside (0, {length})"
            )));
        }
        let mut vertices = Vec::with_capacity(n1 + n2 + 1);
        for i in 0..n2 {
            vertices.push(x_int * i as f64 / n2 as f64);
        }
        for i in 0..n1 {
            vertices.push(x_int + (length - x_int) * i as f64 / n1 as f64);
        }
        vertices.push(length);
        let mut cell_tags = vec![Subdomain::Omega2; n2];
        cell_tags.extend(std::iter::repeat_n(Subdomain::Omega1, n1));
        Ok(Mesh1D {
            vertices,
            cell_tags,
            interface: n2,
        })
    }

    pub fn vertices(&self) -> &[f64] {
        &self.vertices
    }

    pub fn num_cells(&self) -> usize {
        self.cell_tags.len()
    }

    pub fn cell(&self, c: usize) -> [usize; 2] {
        [c, c + 1]
    }

    pub fn cell_tag(&self, c: usize) -> Subdomain {
        self.cell_tags[c]
    }

    pub fn cell_bounds(&self, c: usize) -> (f64, f64) {
        (self.vertices[c], self.vertices[c + 1])
    }

    /// Cells of one subdomain, left to right.
    pub fn cells_of(&self, sub: Subdomain) -> Vec<usize> {
        (0..self.num_cells())
            .filter(|&c| self.cell_tags[c] == sub)
            .collect()
    }

    pub fn length(&self) -> f64 {
        *self.vertices.last().unwrap()
    }

    pub fn interface_vertex(&self) -> usize {
        self.interface
    }

    /// Boundary vertices carrying `tag`: Γ₂ at x = 0, Γ₁ at x = L.
    pub fn facets_by_tag(&self, tag: BoundaryTag) -> Vec<usize> {
        match tag {
            BoundaryTag::Gamma1 => vec![self.vertices.len() - 1],
            BoundaryTag::Gamma2 => vec![0],
            BoundaryTag::Interface => vec![self.interface],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh2D {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    tri_tags: Vec<Subdomain>,
    boundary: Vec<([usize; 2], BoundaryTag)>,
    // derived topology
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[usize; 3]>,
    edge_tris: Vec<Vec<usize>>,
    edge_tags: Vec<Option<BoundaryTag>>,
}

fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

impl Mesh2D {
    /// Validates the raw arrays and derives edge topology. Local edge `i` of a
    /// triangle is the edge opposite its vertex `i`.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        tri_tags: Vec<Subdomain>,
        boundary: Vec<([usize; 2], BoundaryTag)>,
    ) -> Result<Self> {
        if tri_tags.len() != triangles.len() {
            return Err(Error::DimensionMismatch {
                context: "triangle tags",
                expected: triangles.len(),
                got: tri_tags.len(),
            });
        }
        let nv = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::invalid(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            let a = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if a <= 0.0 {
                return Err(Error::invalid(format!(
                    "triangle {t} has non-positive area {a}"
                )));
            }
        }
        let mut index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut all: Vec<[usize; 2]> = Vec::new();
        for tri in &triangles {
            for i in 0..3 {
                let (a, b) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                all.push([a.min(b), a.max(b)]);
            }
        }
        all.sort_unstable();
        all.dedup();
        for (e, &key) in all.iter().enumerate() {
            index.insert(key, e);
        }
        let mut tri_edges = Vec::with_capacity(triangles.len());
        let mut edge_tris = vec![Vec::new(); all.len()];
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0; 3];
            for (i, slot) in te.iter_mut().enumerate() {
                let (a, b) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                let e = index[&[a.min(b), a.max(b)]];
                *slot = e;
                edge_tris[e].push(t);
            }
            tri_edges.push(te);
        }
        let mut edge_tags = vec![None; all.len()];
        for (k, &(pair, tag)) in boundary.iter().enumerate() {
            let key = [pair[0].min(pair[1]), pair[0].max(pair[1])];
            let Some(&e) = index.get(&key) else {
                return Err(Error::invalid(format!(
                    "boundary edge {k} is not a mesh edge"
                )));
            };
            edge_tags[e] = Some(tag);
        }
        Ok(Mesh2D {
            vertices,
            triangles,
            tri_tags,
            boundary,
            edges: all,
            tri_edges,
            edge_tris,
            edge_tags,
        })
    }

    /// Unit square with `n` cells per side. Each cell is cut along its
    /// lower-left to upper-right diagonal, so `y = x` is a union of edges.
    /// Triangles below the diagonal form Ω₁, above form Ω₂.
    pub fn build_square_decomposed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid(
                "square mesh needs at least one cell per side",
            ));
        }
        let h = 1.0 / n as f64;
        let vid = |i: usize, j: usize| j * (n + 1) + i;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                let x = if i == n { 1.0 } else { i as f64 * h };
                let y = if j == n { 1.0 } else { j as f64 * h };
                vertices.push([x, y]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        let mut tags = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v11, v01) =
                    (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
                let (lower, upper) = match i.cmp(&j) {
                    std::cmp::Ordering::Greater => (Subdomain::Omega1, Subdomain::Omega1),
                    std::cmp::Ordering::Equal => (Subdomain::Omega1, Subdomain::Omega2),
                    std::cmp::Ordering::Less => (Subdomain::Omega2, Subdomain::Omega2),
                };
                triangles.push([v00, v10, v11]);
                tags.push(lower);
                triangles.push([v00, v11, v01]);
                tags.push(upper);
            }
        }
        let mut boundary = Vec::with_capacity(5 * n);
        for i in 0..n {
            boundary.push(([vid(i, 0), vid(i + 1, 0)], BoundaryTag::Gamma1));
        }
        for j in 0..n {
            boundary.push(([vid(n, j), vid(n, j + 1)], BoundaryTag::Gamma1));
        }
        for i in 0..n {
            boundary.push(([vid(i + 1, n), vid(i, n)], BoundaryTag::Gamma2));
        }
        for j in 0..n {
            boundary.push(([vid(0, j + 1), vid(0, j)], BoundaryTag::Gamma2));
        }
        for i in 0..n {
            boundary.push(([vid(i, i), vid(i + 1, i + 1)], BoundaryTag::Interface));
        }
        Mesh2D::new(vertices, triangles, tags, boundary)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, v: usize) -> [f64; 2] {
        self.vertices[v]
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn triangle_tag(&self, t: usize) -> Subdomain {
        self.tri_tags[t]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [p, q, r] = self.triangle_coords(t);
        signed_area(p, q, r)
    }

    pub fn triangles_of(&self, sub: Subdomain) -> Vec<usize> {
        (0..self.num_triangles())
            .filter(|&t| self.tri_tags[t] == sub)
            .collect()
    }

    /// Global edges as `[low, high]` vertex pairs, sorted.
    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn edge_triangles(&self, e: usize) -> &[usize] {
        &self.edge_tris[e]
    }

    pub fn edge_tag(&self, e: usize) -> Option<BoundaryTag> {
        self.edge_tags[e]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].map(|v| self.vertices[v]);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    pub fn edge_midpoint(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.edges[e].map(|v| self.vertices[v]);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Unit normal of edge `e` pointing out of triangle `t`.
    pub fn outward_normal(&self, e: usize, t: usize) -> [f64; 2] {
        let [a, b] = self.edges[e].map(|v| self.vertices[v]);
        let len = self.edge_length(e);
        let mut n = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
        let opposite = self.triangles[t]
            .iter()
            .copied()
            .find(|v| !self.edges[e].contains(v))
            .expect("edge belongs to triangle");
        let c = self.vertices[opposite];
        if (c[0] - a[0]) * n[0] + (c[1] - a[1]) * n[1] > 0.0 {
            n = [-n[0], -n[1]];
        }
        n
    }

    /// The adjacent triangle of edge `e` lying in `sub`, if any.
    pub fn edge_triangle_in(&self, e: usize, sub: Subdomain) -> Option<usize> {
        self.edge_tris[e]
            .iter()
            .copied()
            .find(|&t| self.tri_tags[t] == sub)
    }

    /// Edges carrying `tag`, ordered lexicographically by midpoint.
    pub fn facets_by_tag(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.num_edges())
            .filter(|&e| self.edge_tags[e] == Some(tag))
            .collect();
        out.sort_by(|&a, &b| {
            let (p, q) = (self.edge_midpoint(a), self.edge_midpoint(b));
            p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1]))
        });
        out
    }

    pub fn boundary_edges(&self) -> &[([usize; 2], BoundaryTag)] {
        &self.boundary
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ph-mesh 2d 1");
        let _ = writeln!(
            s,
            "{} {} {}",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary.len()
        );
        for v in &self.vertices {
            let _ = writeln!(s, "{:.16e} {:.16e}", v[0], v[1]);
        }
        for (t, tag) in self.triangles.iter().zip(&self.tri_tags) {
            let _ = writeln!(s, "{} {} {} {}", t[0], t[1], t[2], tag.code());
        }
        for (e, tag) in &self.boundary {
            let _ = writeln!(s, "{} {} {}", e[0], e[1], tag.code());
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut next = |what: &str| -> Result<(usize, &str)> {
            lines.next().ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("unexpected end of file, expected {what}"),
            })
        };
        let (ln, header) = next("header")?;
        if header != "ph-mesh 2d 1" {
            return Err(Error::Parse {
                line: ln,
                msg: format!("bad header {header:?}"),
            });
        }
        fn fields<T: std::str::FromStr>(ln: usize, l: &str, n: usize) -> Result<Vec<T>> {
            let v: Vec<T> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    line: ln,
                    msg: format!("cannot parse {l:?}"),
                })?;
            if v.len() != n {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {n} fields, found {}", v.len()),
                });
            }
            Ok(v)
        }
        let (ln, counts) = next("counts")?;
        let c: Vec<usize> = fields(ln, counts, 3)?;
        let mut vertices = Vec::with_capacity(c[0]);
        for _ in 0..c[0] {
            let (ln, l) = next("vertex")?;
            let xy: Vec<f64> = fields(ln, l, 2)?;
            vertices.push([xy[0], xy[1]]);
        }
        let mut triangles = Vec::with_capacity(c[1]);
        let mut tags = Vec::with_capacity(c[1]);
        for _ in 0..c[1] {
            let (ln, l) = next("triangle")?;
            let f: Vec<usize> = fields(ln, l, 4)?;
            if f[..3].iter().any(|&v| v >= c[0]) {
                return Err(Error::Parse {
                    line: ln,
                    msg: "vertex index out of range".into(),
                });
            }
            let tri = [f[0], f[1], f[2]];
            if signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) <= 0.0 {
                return Err(Error::Parse {
                    line: ln,
                    msg: "triangle has non-positive signed area".into(),
                });
            }
            triangles.push(tri);
            tags.push(
                Subdomain::from_code(f[3] as u8)
                    .filter(|_| f[3] <= 2)
                    .ok_or(Error::Parse {
                        line: ln,
                        msg: format!("unknown subdomain tag {}", f[3]),
                    })?,
            );
        }
        let mut boundary = Vec::with_capacity(c[2]);
        for _ in 0..c[2] {
            let (ln, l) = next("boundary edge")?;
            let f: Vec<usize> = fields(ln, l, 3)?;
            let tag = BoundaryTag::from_code(f[2] as u8)
                .filter(|_| f[2] <= 3)
                .ok_or(Error::Parse {
                    line: ln,
                    msg: format!("unknown boundary tag {}", f[2]),
                })?;
            boundary.push(([f[0], f[1]], tag));
        }
        Mesh2D::new(vertices, triangles, tags, boundary)
    }

    pub fn write_mesh(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_text().as_bytes())?;
        f.flush()?;
        Ok(())
    }

    pub fn read_mesh(path: &Path) -> Result<Self> {
        let mut text = String::new();
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        loop {
            let n = r.read_line(&mut text)?;
            if n == 0 {
                break;
            }
        }
        Mesh2D::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_three_plus_three() {
        let m = Mesh1D::build_interval_decomposed(1.0, 3, 3, 0.5).unwrap();
        assert_eq!(m.num_cells(), 6);
        let expect = [0.0, 1.0 / 6.0, 2.0 / 6.0, 0.5, 4.0 / 6.0, 5.0 / 6.0, 1.0];
        for (a, b) in m.vertices().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(m.vertices()[m.interface_vertex()], 0.5);
        assert_eq!(m.facets_by_tag(BoundaryTag::Interface), vec![3]);
    }

    #[test]
    fn interval_minimal_and_uneven() {
        let m = Mesh1D::build_interval_decomposed(1.0, 1, 1, 0.5).unwrap();
        assert_eq!((m.num_cells(), m.vertices().len()), (2, 3));
        let m = Mesh1D::build_interval_decomposed(2.0, 2, 4, 1.0).unwrap();
        for c in m.cells_of(Subdomain::Omega2) {
            let (a, b) = m.cell_bounds(c);
            assert!((b - a - 0.25).abs() < 1e-15);
        }
        for c in m.cells_of(Subdomain::Omega1) {
            let (a, b) = m.cell_bounds(c);
            assert!((b - a - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn interval_rejects_bad_input() {
        assert!(Mesh1D::build_interval_decomposed(1.0, 0, 1, 0.5).is_err());
        assert!(Mesh1D::build_interval_decomposed(1.0, 1, 1, 1.0).is_err());
        assert!(Mesh1D::build_interval_decomposed(1.0, 1, 1, 0.0).is_err());
    }

    #[test]
    fn square_counts() {
        let m = Mesh2D::build_square_decomposed(1).unwrap();
        assert_eq!(m.num_triangles(), 2);
        assert_eq!(m.facets_by_tag(BoundaryTag::Interface).len(), 1);
        let m = Mesh2D::build_square_decomposed(2).unwrap();
        assert_eq!(m.num_triangles(), 8);
        assert_eq!(m.triangles_of(Subdomain::Omega1).len(), 4);
        assert_eq!(m.facets_by_tag(BoundaryTag::Interface).len(), 2);
        assert_eq!(m.facets_by_tag(BoundaryTag::Gamma1).len(), 4);
        let m = Mesh2D::build_square_decomposed(30).unwrap();
        assert_eq!(m.num_triangles(), 1800);
        assert_eq!(m.triangles_of(Subdomain::Omega2).len(), 900);
        assert_eq!(m.facets_by_tag(BoundaryTag::Interface).len(), 30);
        assert!(Mesh2D::build_square_decomposed(0).is_err());
    }

    #[test]
    fn omega1_lies_below_diagonal() {
        let m = Mesh2D::build_square_decomposed(4).unwrap();
        for t in 0..m.num_triangles() {
            let c = m.triangle_coords(t);
            let (cx, cy) = (
                (c[0][0] + c[1][0] + c[2][0]) / 3.0,
                (c[0][1] + c[1][1] + c[2][1]) / 3.0,
            );
            assert_eq!(m.triangle_tag(t) == Subdomain::Omega1, cy < cx);
        }
    }

    #[test]
    fn interface_normal_and_adjacency() {
        let m = Mesh2D::build_square_decomposed(3).unwrap();
        for e in m.facets_by_tag(BoundaryTag::Interface) {
            let t1 = m.edge_triangle_in(e, Subdomain::Omega1).unwrap();
            let t2 = m.edge_triangle_in(e, Subdomain::Omega2).unwrap();
            assert_eq!(m.edge_triangles(e).len(), 2);
            let n1 = m.outward_normal(e, t1);
            let n2 = m.outward_normal(e, t2);
            assert!((n1[0] + 0.5f64.sqrt()).abs() < 1e-15 && (n1[1] - 0.5f64.sqrt()).abs() < 1e-15);
            assert!((n1[0] + n2[0]).abs() < 1e-15 && (n1[1] + n2[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn text_round_trip() {
        for n in [1, 3] {
            let m = Mesh2D::build_square_decomposed(n).unwrap();
            assert_eq!(Mesh2D::parse(&m.to_text()).unwrap(), m);
        }
    }

    #[test]
    fn negative_area_rejected_with_line() {
        let text = "ph-mesh 2d 1\n3 1 0\n0 0\n1 0\n0 1\n0 2 1 1\n";
        match Mesh2D::parse(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
    }
}
