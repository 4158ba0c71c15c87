//! Nested uniform triangulations of the unit square.
//!
//! Level `k` places vertices at `(i*2^-k, j*2^-k)` and splits every cell
//! along the lower-left to upper-right diagonal (Friedrichs-Keller mesh).
//! Consecutive levels are nested: every level-`k` vertex is a level-`k+1`
//! vertex and every coarse triangle is the union of four fine triangles,
//! which makes coarse-to-fine prolongation exact on the coarse P1 space.
//!
//! Homogeneous Dirichlet conditions are built in: degrees of freedom live
//! only on interior vertices, numbered lexicographically by (row, column)
//! of the interior grid.

use crate::error::{Error, Result};
use std::io::Write;

/// Largest supported refinement level; memory grows as `4^k`.
pub const MAX_LEVEL: u32 = 8;

/// One level of the nested triangulation hierarchy.
#[derive(Debug, Clone)]
pub struct MeshLevel {
    level: u32,
    h: f64,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    /// vertex index -> interior DOF index (None on the boundary)
    interior_map: Vec<Option<usize>>,
    /// interior DOF index -> vertex index
    interior_vertices: Vec<usize>,
    boundary: Vec<bool>,
}

impl MeshLevel {
    /// Build the uniform level-`k` triangulation, `1 <= k <= 8`.
    pub fn build_uniform(k: u32) -> Result<MeshLevel> {
        if k < 1 || k > MAX_LEVEL {
            return Err(Error::Config(format!(
                "mesh level must be in 1..={MAX_LEVEL}, got {k}"
            )));
        }
        let m = 1usize << k; // cells per side
        let np = m + 1; // grid points per side
        let h = 0.5f64.powi(k as i32);

        let mut vertices = Vec::with_capacity(np * np);
        let mut boundary = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                // i*2^-k is exact in binary floating point
                vertices.push([i as f64 * h, j as f64 * h]);
                boundary.push(i == 0 || j == 0 || i == m || j == m);
            }
        }

        let vid = |i: usize, j: usize| j * np + i;
        let mut triangles = Vec::with_capacity(2 * m * m);
        for j in 0..m {
            for i in 0..m {
                let v00 = vid(i, j);
                let v10 = vid(i + 1, j);
                let v01 = vid(i, j + 1);
                let v11 = vid(i + 1, j + 1);
                // diagonal from (i,j) to (i+1,j+1); both triangles CCW
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }

        let mut interior_map = vec![None; np * np];
        let mut interior_vertices = Vec::with_capacity((m - 1) * (m - 1));
        for j in 1..m {
            for i in 1..m {
                let v = vid(i, j);
                interior_map[v] = Some(interior_vertices.len());
                interior_vertices.push(v);
            }
        }

        Ok(MeshLevel {
            level: k,
            h,
            vertices,
            triangles,
            interior_map,
            interior_vertices,
            boundary,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Mesh size `h = 2^-k`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Number of interior DOFs, `(2^k - 1)^2`.
    pub fn num_interior(&self) -> usize {
        self.interior_vertices.len()
    }

    pub fn vertex(&self, v: usize) -> [f64; 2] {
        self.vertices[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    /// Interior DOF index of a vertex, if it has one.
    pub fn dof_of_vertex(&self, v: usize) -> Option<usize> {
        self.interior_map[v]
    }

    pub fn vertex_of_dof(&self, dof: usize) -> usize {
        self.interior_vertices[dof]
    }

    /// Coordinates of the three vertices of triangle `t`.
    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area of triangle `t`; positive for this mesh's orientation.
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.triangle_coords(t);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    /// Plain-text dump: vertex count, then `x y boundary_flag` per vertex,
    /// then `i j k` per triangle.
    pub fn dump<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{}", self.num_vertices())?;
        for (v, p) in self.vertices.iter().enumerate() {
            writeln!(w, "{} {} {}", p[0], p[1], u8::from(self.boundary[v]))?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    /// DOF values of the P1 interpolant of `f(x1, x2, t)` at interior
    /// vertices (nodal interpolation, not L2 projection).
    pub fn interpolate(&self, f: &crate::expr::Expr, t: f64) -> Result<DofVector> {
        let mut values = Vec::with_capacity(self.num_interior());
        for &v in &self.interior_vertices {
            let p = self.vertices[v];
            values.push(f.eval(p[0], p[1], t)?);
        }
        Ok(DofVector {
            level: self.level,
            values,
        })
    }
}

/// Coefficient vector over the interior DOFs of one mesh level; implicitly
/// zero on boundary vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct DofVector {
    pub level: u32,
    pub values: Vec<f64>,
}

impl DofVector {
    pub fn zeros(mesh: &MeshLevel) -> DofVector {
        DofVector {
            level: mesh.level(),
            values: vec![0.0; mesh.num_interior()],
        }
    }

    pub fn from_values(mesh: &MeshLevel, values: Vec<f64>) -> Result<DofVector> {
        if values.len() != mesh.num_interior() {
            return Err(Error::Argument(format!(
                "DOF vector length {} does not match mesh level {} ({} interior DOFs)",
                values.len(),
                mesh.level(),
                mesh.num_interior()
            )));
        }
        Ok(DofVector {
            level: mesh.level(),
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// P1 prolongation of a coarse DOF vector to the next finer level.
///
/// Fine vertices are either coarse vertices (value copied), midpoints of
/// coarse horizontal/vertical edges, or cell centers, which lie on the
/// coarse diagonal edge; in all midpoint cases the P1 interpolant is the
/// mean of the two coarse endpoint values.
pub fn prolongate(
    coarse: &DofVector,
    coarse_mesh: &MeshLevel,
    fine_mesh: &MeshLevel,
) -> Result<DofVector> {
    if coarse.level != coarse_mesh.level() {
        return Err(Error::Argument(format!(
            "DOF vector is at level {} but coarse mesh is level {}",
            coarse.level,
            coarse_mesh.level()
        )));
    }
    if fine_mesh.level() != coarse_mesh.level() + 1 {
        return Err(Error::Argument(format!(
            "prolongation requires consecutive levels, got {} -> {}",
            coarse_mesh.level(),
            fine_mesh.level()
        )));
    }
    let mc = 1usize << coarse_mesh.level(); // coarse cells per side
    let npc = mc + 1;
    let npf = 2 * mc + 1;

    // coarse nodal value at grid point (i, j), zero on the boundary
    let coarse_val = |i: usize, j: usize| -> f64 {
        match coarse_mesh.dof_of_vertex(j * npc + i) {
            Some(d) => coarse.values[d],
            None => 0.0,
        }
    };

    let mut values = vec![0.0; fine_mesh.num_interior()];
    for d in 0..fine_mesh.num_interior() {
        let v = fine_mesh.vertex_of_dof(d);
        let (fi, fj) = (v % npf, v / npf);
        values[d] = match (fi % 2, fj % 2) {
            (0, 0) => coarse_val(fi / 2, fj / 2),
            (1, 0) => 0.5 * (coarse_val(fi / 2, fj / 2) + coarse_val(fi / 2 + 1, fj / 2)),
            (0, 1) => 0.5 * (coarse_val(fi / 2, fj / 2) + coarse_val(fi / 2, fj / 2 + 1)),
            // cell center: on the coarse diagonal from (i,j) to (i+1,j+1)
            _ => 0.5 * (coarse_val(fi / 2, fj / 2) + coarse_val(fi / 2 + 1, fj / 2 + 1)),
        };
    }
    Ok(DofVector {
        level: fine_mesh.level(),
        values,
    })
}

/// Prolongate across any number of levels by chaining one-level steps.
pub fn prolongate_to(
    coarse: &DofVector,
    coarse_mesh: &MeshLevel,
    fine_mesh: &MeshLevel,
) -> Result<DofVector> {
    if fine_mesh.level() < coarse_mesh.level() {
        return Err(Error::Argument(
            "prolongate_to requires fine level >= coarse level".into(),
        ));
    }
    let mut current = coarse.clone();
    let mut current_mesh = coarse_mesh.clone();
    while current_mesh.level() < fine_mesh.level() {
        let next_mesh = MeshLevel::build_uniform(current_mesh.level() + 1)?;
        current = prolongate(&current, &current_mesh, &next_mesh)?;
        current_mesh = next_mesh;
    }
    Ok(current)
}

/// Barycentric P1 evaluation of a DOF field at a point of the closed unit
/// square; zero on the boundary by construction.
pub fn eval_p1(field: &DofVector, mesh: &MeshLevel, point: [f64; 2]) -> Result<f64> {
    let [x, y] = point;
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::Argument(format!(
            "point ({x}, {y}) lies outside the unit square"
        )));
    }
    if field.level != mesh.level() {
        return Err(Error::Argument(format!(
            "field level {} does not match mesh level {}",
            field.level,
            mesh.level()
        )));
    }
    let m = 1usize << mesh.level();
    let h = mesh.h();
    let np = m + 1;
    let i = ((x / h).floor() as usize).min(m - 1);
    let j = ((y / h).floor() as usize).min(m - 1);
    let fx = x / h - i as f64;
    let fy = y / h - j as f64;

    let nodal = |ii: usize, jj: usize| -> f64 {
        match mesh.dof_of_vertex(jj * np + ii) {
            Some(d) => field.values[d],
            None => 0.0,
        }
    };

    // cell diagonal runs from (i,j) to (i+1,j+1); fx >= fy selects the
    // lower-right triangle
    let value = if fx >= fy {
        let v00 = nodal(i, j);
        let v10 = nodal(i + 1, j);
        let v11 = nodal(i + 1, j + 1);
        v00 * (1.0 - fx) + v10 * (fx - fy) + v11 * fy
    } else {
        let v00 = nodal(i, j);
        let v11 = nodal(i + 1, j + 1);
        let v01 = nodal(i, j + 1);
        v00 * (1.0 - fy) + v11 * fx + v01 * (fy - fx)
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn counting_formulas() {
        // (2^k+1)^2 vertices, 2*4^k triangles, (2^k-1)^2 interior DOFs
        for (k, nv, nt, ni) in [(1u32, 9, 8, 1), (2, 25, 32, 9), (3, 81, 128, 49)] {
            let mesh = MeshLevel::build_uniform(k).unwrap();
            assert_eq!(mesh.num_vertices(), nv);
            assert_eq!(mesh.num_triangles(), nt);
            assert_eq!(mesh.num_interior(), ni);
        }
    }

    #[test]
    fn level_bounds_are_enforced() {
        assert!(MeshLevel::build_uniform(0).is_err());
        assert!(MeshLevel::build_uniform(9).is_err());
    }

    #[test]
    fn areas_positive_and_sum_to_one() {
        for k in 1..=4 {
            let mesh = MeshLevel::build_uniform(k).unwrap();
            let mut total = 0.0;
            for t in 0..mesh.num_triangles() {
                let a = mesh.triangle_area(t);
                assert!(a > 0.0);
                total += a;
            }
            assert!((total - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn node_coordinates_are_exact_dyadics() {
        let mesh = MeshLevel::build_uniform(3).unwrap();
        let h = 0.125;
        for v in 0..mesh.num_vertices() {
            let [x, y] = mesh.vertex(v);
            assert_eq!(x, (x / h).round() * h);
            assert_eq!(y, (y / h).round() * h);
        }
    }

    #[test]
    fn meshes_are_nested() {
        let coarse = MeshLevel::build_uniform(2).unwrap();
        let fine = MeshLevel::build_uniform(3).unwrap();
        for v in 0..coarse.num_vertices() {
            let p = coarse.vertex(v);
            // exact equality: dyadic coordinates are representable
            let found = (0..fine.num_vertices()).any(|w| fine.vertex(w) == p);
            assert!(found, "coarse vertex {p:?} missing at the fine level");
        }
    }

    #[test]
    fn prolongation_is_identity_at_coarse_nodes() {
        let coarse = MeshLevel::build_uniform(2).unwrap();
        let fine = MeshLevel::build_uniform(3).unwrap();
        let f = expr::parse("x1*(1-x1)*x2*(1-x2)").unwrap();
        let zc = coarse.interpolate(&f, 0.0).unwrap();
        let zf = prolongate(&zc, &coarse, &fine).unwrap();
        for d in 0..coarse.num_interior() {
            let p = coarse.vertex(coarse.vertex_of_dof(d));
            let vf = eval_p1(&zf, &fine, p).unwrap();
            assert!((vf - zc.values[d]).abs() < 1e-15);
        }
    }

    #[test]
    fn prolongation_matches_p1_evaluation_at_fine_nodes() {
        let coarse = MeshLevel::build_uniform(2).unwrap();
        let fine = MeshLevel::build_uniform(3).unwrap();
        let f = expr::parse("x1*(1-x1)*x2*(1-x2)").unwrap();
        let zc = coarse.interpolate(&f, 0.0).unwrap();
        let zf = prolongate(&zc, &coarse, &fine).unwrap();
        for d in 0..fine.num_interior() {
            let p = fine.vertex(fine.vertex_of_dof(d));
            let direct = eval_p1(&zc, &coarse, p).unwrap();
            assert!((zf.values[d] - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn prolongation_of_zero_is_zero() {
        let coarse = MeshLevel::build_uniform(2).unwrap();
        let fine = MeshLevel::build_uniform(3).unwrap();
        let zf = prolongate(&DofVector::zeros(&coarse), &coarse, &fine).unwrap();
        assert!(zf.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hat_function_prolongation_stencil() {
        let coarse = MeshLevel::build_uniform(2).unwrap();
        let fine = MeshLevel::build_uniform(3).unwrap();
        // hat at the coarse center vertex (0.5, 0.5)
        let mut zc = DofVector::zeros(&coarse);
        let center = (0..coarse.num_interior())
            .find(|&d| coarse.vertex(coarse.vertex_of_dof(d)) == [0.5, 0.5])
            .unwrap();
        zc.values[center] = 1.0;
        let zf = prolongate(&zc, &coarse, &fine).unwrap();
        // value 1 at the node itself
        assert_eq!(eval_p1(&zf, &fine, [0.5, 0.5]).unwrap(), 1.0);
        // value 1/2 at fine edge midpoints inside the hat's support:
        // axis neighbors and the two diagonal (cell-center) neighbors
        for p in [
            [0.375, 0.5],
            [0.625, 0.5],
            [0.5, 0.375],
            [0.5, 0.625],
            [0.375, 0.375],
            [0.625, 0.625],
        ] {
            assert_eq!(eval_p1(&zf, &fine, p).unwrap(), 0.5, "at {p:?}");
        }
        // zero along the off-diagonal direction, outside the hat support
        assert_eq!(eval_p1(&zf, &fine, [0.625, 0.375]).unwrap(), 0.0);
    }

    #[test]
    fn prolongation_agrees_with_coarse_eval_at_random_points() {
        let coarse = MeshLevel::build_uniform(3).unwrap();
        let fine = MeshLevel::build_uniform(4).unwrap();
        let f = expr::parse("sin(pi*x1)*sin(pi*x2)").unwrap();
        let zc = coarse.interpolate(&f, 0.0).unwrap();
        let zf = prolongate(&zc, &coarse, &fine).unwrap();
        let mut rng = StdRng::seed_from_u64(123);
        for _ in 0..100 {
            let p = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let a = eval_p1(&zc, &coarse, p).unwrap();
            let b = eval_p1(&zf, &fine, p).unwrap();
            assert!((a - b).abs() < 1e-13, "mismatch at {p:?}: {a} vs {b}");
        }
    }

    #[test]
    fn eval_p1_nodal_and_boundary_behavior() {
        let mesh = MeshLevel::build_uniform(2).unwrap();
        let f = expr::parse("x1+2*x2").unwrap();
        let z = mesh.interpolate(&f, 0.0).unwrap();
        // interior vertex reproduces its DOF value
        let d = 4; // center of the 3x3 interior grid
        let p = mesh.vertex(mesh.vertex_of_dof(d));
        assert_eq!(eval_p1(&z, &mesh, p).unwrap(), z.values[d]);
        // boundary points evaluate to zero
        for p in [[0.0, 0.3], [1.0, 0.7], [0.4, 0.0], [0.6, 1.0], [1.0, 1.0]] {
            assert_eq!(eval_p1(&z, &mesh, p).unwrap(), 0.0);
        }
        // outside the domain is an argument error
        assert!(eval_p1(&z, &mesh, [1.2, 0.5]).is_err());
    }

    #[test]
    fn eval_p1_at_centroid_is_mean_of_nodal_values() {
        let mesh = MeshLevel::build_uniform(2).unwrap();
        let f = expr::parse("x1*x2*(1-x1)*(1-x2)").unwrap();
        let z = mesh.interpolate(&f, 0.0).unwrap();
        for t in 0..mesh.num_triangles() {
            let [a, b, c] = mesh.triangles()[t];
            let nodal = |v: usize| mesh.dof_of_vertex(v).map_or(0.0, |d| z.values[d]);
            let centroid = [
                (mesh.vertex(a)[0] + mesh.vertex(b)[0] + mesh.vertex(c)[0]) / 3.0,
                (mesh.vertex(a)[1] + mesh.vertex(b)[1] + mesh.vertex(c)[1]) / 3.0,
            ];
            let expected = (nodal(a) + nodal(b) + nodal(c)) / 3.0;
            let got = eval_p1(&z, &mesh, centroid).unwrap();
            assert!((got - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn dump_format() {
        let mesh = MeshLevel::build_uniform(1).unwrap();
        let mut buf = Vec::new();
        mesh.dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "9");
        assert_eq!(lines.len(), 1 + 9 + 8);
        // first vertex: origin, boundary
        assert_eq!(lines[1], "0 0 1");
        // triangle lines have three indices
        assert_eq!(lines[10].split_whitespace().count(), 3);
    }
}
