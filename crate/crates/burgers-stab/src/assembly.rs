//! P1 finite element assembly over interior DOFs.
//!
//! Everything the semidiscrete systems need is built here: the mass matrix
//! `M = (<phi_i, phi_j>)`, stiffness `K = (<grad phi_i, grad phi_j>)`, the
//! convection matrix `A1 = (<y_s v.grad phi_i, phi_j>)` and reaction matrix
//! `A2 = (<v.grad y_s phi_i, phi_j>)` linearized around the steady state,
//! the control localization `B = (<chi_O phi_i, phi_j>)`, and the combined
//! drift `A = -eta K - A1 - A2 - nu0 M`. The convective nonlinearity
//! `N(Z)` with entries `N_k = sum_ij z_i z_j <phi_i v.grad phi_j, phi_k>`
//! and its Jacobian are assembled per call since they depend on the state.
//!
//! Row indices are test functions, column indices trial functions. The
//! gradient of the steady state enters symbolically (exact derivatives),
//! never by numerical differentiation.
//!
//! Integration by parts gives the structural identity
//! `A1 + A1^T + A2 = 0`: the integrands satisfy it pointwise, so with a
//! quadrature rule exact for the integrands it holds to rounding error.
//! The default rule is degree-6 exact (enough for a quartic steady state
//! against P1 pairs); trigonometric steady states use degree 8.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::mesh::{DofVector, MeshLevel};
use crate::quadrature::{QuadDegree, TriangleRule};
use crate::sparse::CsrMatrix;

/// Physical data of the shifted Burgers system.
#[derive(Debug, Clone)]
pub struct PhysicsParams {
    /// viscosity, must be positive
    pub eta: f64,
    /// reaction coefficient
    pub nu0: f64,
    /// fixed convection direction
    pub v: [f64; 2],
    /// exponential shift rate
    pub omega: f64,
}

impl PhysicsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::Config(format!(
                "viscosity eta must be positive, got {}",
                self.eta
            )));
        }
        if self.omega < 0.0 {
            return Err(Error::Config(format!(
                "shift rate omega must be nonnegative, got {}",
                self.omega
            )));
        }
        Ok(())
    }
}

/// Control localization: the full square or an axis-aligned rectangle.
/// A triangle contributes to `B` when its centroid lies in the region.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlRegion {
    Full,
    Rect { x1: [f64; 2], x2: [f64; 2] },
}

impl ControlRegion {
    fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            ControlRegion::Full => true,
            ControlRegion::Rect { x1, x2 } => {
                p[0] >= x1[0] && p[0] <= x1[1] && p[1] >= x2[0] && p[1] <= x2[1]
            }
        }
    }
}

/// Assembled matrices of the linearized semidiscrete system.
#[derive(Debug, Clone)]
pub struct SystemMatrices {
    pub level: u32,
    pub n: usize,
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    /// `<y_s v.grad phi_col, phi_row>`
    pub conv_steady: CsrMatrix,
    /// `<(v.grad y_s) phi_col, phi_row>`
    pub react_steady: CsrMatrix,
    pub control: CsrMatrix,
    /// drift `A = -eta K - A1 - A2 - nu0 M`
    pub drift: CsrMatrix,
    /// quadrature degree used for the steady-state terms
    pub quad_degree: usize,
}

/// Geometry of one P1 triangle: area and constant basis gradients.
struct TriGeometry {
    area: f64,
    /// grad phi_a for the three local basis functions
    grads: [[f64; 2]; 3],
}

fn tri_geometry(coords: [[f64; 2]; 3]) -> Result<TriGeometry> {
    let [p0, p1, p2] = coords;
    let d1 = [p1[0] - p0[0], p1[1] - p0[1]];
    let d2 = [p2[0] - p0[0], p2[1] - p0[1]];
    let det = d1[0] * d2[1] - d2[0] * d1[1];
    if det <= 0.0 {
        return Err(Error::Numerical(format!(
            "degenerate or inverted triangle, det = {det}"
        )));
    }
    let area = 0.5 * det;
    // gradients of barycentric coordinates
    let g1 = [d2[1] / det, -d2[0] / det];
    let g2 = [-d1[1] / det, d1[0] / det];
    let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
    Ok(TriGeometry {
        area,
        grads: [g0, g1, g2],
    })
}

/// Local P1 mass and stiffness matrices of a triangle.
///
/// Mass is the exact `(area/12) * (1 + delta_ij)` matrix; stiffness comes
/// from the constant gradients.
pub fn local_element_matrices(coords: [[f64; 2]; 3]) -> Result<([[f64; 3]; 3], [[f64; 3]; 3])> {
    let geo = tri_geometry(coords)?;
    let mut mass = [[0.0; 3]; 3];
    let mut stiff = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            mass[a][b] = geo.area / 12.0 * if a == b { 2.0 } else { 1.0 };
            stiff[a][b] =
                geo.area * (geo.grads[a][0] * geo.grads[b][0] + geo.grads[a][1] * geo.grads[b][1]);
        }
    }
    Ok((mass, stiff))
}

/// Quadrature degree for a steady state: 8 for trigonometric fields,
/// 6 otherwise.
pub fn quad_degree_for(ys: &Expr) -> QuadDegree {
    if ys.has_transcendental() {
        QuadDegree::TRIG
    } else {
        QuadDegree::DEFAULT
    }
}

/// Assemble all state-independent matrices with an explicit quadrature
/// degree for the steady-state terms.
pub fn assemble_static_with_degree(
    mesh: &MeshLevel,
    params: &PhysicsParams,
    ys: &Expr,
    region: &ControlRegion,
    degree: QuadDegree,
) -> Result<SystemMatrices> {
    params.validate()?;
    let n = mesh.num_interior();
    let rule = TriangleRule::cached(degree);
    let grad_ys = ys.gradient();
    let v = params.v;

    let mut trip_m = Vec::new();
    let mut trip_k = Vec::new();
    let mut trip_a1 = Vec::new();
    let mut trip_a2 = Vec::new();
    let mut trip_b = Vec::new();

    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangles()[t];
        let coords = mesh.triangle_coords(t);
        let geo = tri_geometry(coords)?;
        let (mass_loc, stiff_loc) = local_element_matrices(coords)?;

        let centroid = [
            (coords[0][0] + coords[1][0] + coords[2][0]) / 3.0,
            (coords[0][1] + coords[1][1] + coords[2][1]) / 3.0,
        ];
        let in_region = region.contains(centroid);

        // steady-state coefficient terms by quadrature
        let mut a1_loc = [[0.0; 3]; 3];
        let mut a2_loc = [[0.0; 3]; 3];
        let [p0, p1, p2] = coords;
        for q in &rule.points {
            // map reference point to physical coordinates
            let x = p0[0] + (p1[0] - p0[0]) * q.x + (p2[0] - p0[0]) * q.y;
            let y = p0[1] + (p1[1] - p0[1]) * q.x + (p2[1] - p0[1]) * q.y;
            let bary = [1.0 - q.x - q.y, q.x, q.y];
            let w = q.w * 2.0 * geo.area; // reference weights sum to 1/2
            let ys_val = ys.eval(x, y, 0.0)?;
            let vgys = v[0] * grad_ys[0].eval(x, y, 0.0)? + v[1] * grad_ys[1].eval(x, y, 0.0)?;
            for col in 0..3 {
                let vgphi = v[0] * geo.grads[col][0] + v[1] * geo.grads[col][1];
                for row in 0..3 {
                    // A1[row][col] = <y_s v.grad phi_col, phi_row>
                    a1_loc[row][col] += w * ys_val * vgphi * bary[row];
                    // A2[row][col] = <(v.grad y_s) phi_col, phi_row>
                    a2_loc[row][col] += w * vgys * bary[col] * bary[row];
                }
            }
        }

        for a in 0..3 {
            let Some(ra) = mesh.dof_of_vertex(tri[a]) else {
                continue;
            };
            for b in 0..3 {
                let Some(cb) = mesh.dof_of_vertex(tri[b]) else {
                    continue;
                };
                trip_m.push((ra, cb, mass_loc[a][b]));
                trip_k.push((ra, cb, stiff_loc[a][b]));
                trip_a1.push((ra, cb, a1_loc[a][b]));
                trip_a2.push((ra, cb, a2_loc[a][b]));
                trip_b.push((ra, cb, if in_region { mass_loc[a][b] } else { 0.0 }));
            }
        }
    }

    let mass = CsrMatrix::from_triplets(n, n, trip_m);
    let stiffness = CsrMatrix::from_triplets(n, n, trip_k);
    let conv_steady = CsrMatrix::from_triplets(n, n, trip_a1);
    let react_steady = CsrMatrix::from_triplets(n, n, trip_a2);
    let control = CsrMatrix::from_triplets(n, n, trip_b);
    let drift = CsrMatrix::linear_combination(&[
        (-params.eta, &stiffness),
        (-1.0, &conv_steady),
        (-1.0, &react_steady),
        (-params.nu0, &mass),
    ])?;

    Ok(SystemMatrices {
        level: mesh.level(),
        n,
        mass,
        stiffness,
        conv_steady,
        react_steady,
        control,
        drift,
        quad_degree: degree.0,
    })
}

/// Assemble with the quadrature degree chosen from the steady state.
pub fn assemble_static(
    mesh: &MeshLevel,
    params: &PhysicsParams,
    ys: &Expr,
    region: &ControlRegion,
) -> Result<SystemMatrices> {
    assemble_static_with_degree(mesh, params, ys, region, quad_degree_for(ys))
}

/// Convective vector `N(Z)` with `N_k = sum_ij z_i z_j
/// <phi_i v.grad phi_j, phi_k>`.
///
/// Per triangle `z_h` is linear and `v.grad z_h` constant, so the entry is
/// `(v.grad z_h) * (M_loc z_loc)_k` exactly.
pub fn assemble_nonlinear(mesh: &MeshLevel, z: &DofVector, v: [f64; 2]) -> Result<DofVector> {
    check_field(mesh, z)?;
    let mut out = vec![0.0; mesh.num_interior()];
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangles()[t];
        let coords = mesh.triangle_coords(t);
        let geo = tri_geometry(coords)?;
        let z_loc: [f64; 3] = std::array::from_fn(|a| {
            mesh.dof_of_vertex(tri[a]).map_or(0.0, |d| z.values[d])
        });
        let vgz: f64 = (0..3)
            .map(|a| z_loc[a] * (v[0] * geo.grads[a][0] + v[1] * geo.grads[a][1]))
            .sum();
        let (mass_loc, _) = local_element_matrices(coords)?;
        for k in 0..3 {
            let Some(row) = mesh.dof_of_vertex(tri[k]) else {
                continue;
            };
            let mz: f64 = (0..3).map(|a| mass_loc[k][a] * z_loc[a]).sum();
            out[row] += vgz * mz;
        }
    }
    DofVector::from_values(mesh, out)
}

/// Jacobian of `Z -> N(Z)`:
/// `dN_k/dz_l = sum_j z_j <phi_l v.grad phi_j, phi_k>
///            + sum_i z_i <phi_i v.grad phi_l, phi_k>`.
pub fn assemble_nonlinear_jacobian(
    mesh: &MeshLevel,
    z: &DofVector,
    v: [f64; 2],
) -> Result<CsrMatrix> {
    check_field(mesh, z)?;
    let n = mesh.num_interior();
    let mut triplets = Vec::new();
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangles()[t];
        let coords = mesh.triangle_coords(t);
        let geo = tri_geometry(coords)?;
        let z_loc: [f64; 3] = std::array::from_fn(|a| {
            mesh.dof_of_vertex(tri[a]).map_or(0.0, |d| z.values[d])
        });
        let vgz: f64 = (0..3)
            .map(|a| z_loc[a] * (v[0] * geo.grads[a][0] + v[1] * geo.grads[a][1]))
            .sum();
        let (mass_loc, _) = local_element_matrices(coords)?;
        let mz: [f64; 3] = std::array::from_fn(|k| (0..3).map(|a| mass_loc[k][a] * z_loc[a]).sum());
        for k in 0..3 {
            let Some(row) = mesh.dof_of_vertex(tri[k]) else {
                continue;
            };
            for l in 0..3 {
                let Some(col) = mesh.dof_of_vertex(tri[l]) else {
                    continue;
                };
                let vgphi_l = v[0] * geo.grads[l][0] + v[1] * geo.grads[l][1];
                // first sum: phi_l times v.grad z_h; second: z_h times
                // v.grad phi_l
                triplets.push((row, col, vgphi_l * mz[k] + vgz * mass_loc[k][l]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(n, n, triplets))
}

/// Load vector `<f(., t), phi_k>` by quadrature.
pub fn load_vector(
    mesh: &MeshLevel,
    f: &Expr,
    t: f64,
    degree: QuadDegree,
) -> Result<DofVector> {
    let rule = TriangleRule::cached(degree);
    let mut out = vec![0.0; mesh.num_interior()];
    for ti in 0..mesh.num_triangles() {
        let tri = mesh.triangles()[ti];
        let coords = mesh.triangle_coords(ti);
        let geo = tri_geometry(coords)?;
        let [p0, p1, p2] = coords;
        let mut acc = [0.0; 3];
        for q in &rule.points {
            let x = p0[0] + (p1[0] - p0[0]) * q.x + (p2[0] - p0[0]) * q.y;
            let y = p0[1] + (p1[1] - p0[1]) * q.x + (p2[1] - p0[1]) * q.y;
            let bary = [1.0 - q.x - q.y, q.x, q.y];
            let w = q.w * 2.0 * geo.area;
            let fv = f.eval(x, y, t)?;
            for k in 0..3 {
                acc[k] += w * fv * bary[k];
            }
        }
        for k in 0..3 {
            if let Some(row) = mesh.dof_of_vertex(tri[k]) {
                out[row] += acc[k];
            }
        }
    }
    DofVector::from_values(mesh, out)
}

/// L2 projection onto the P1 space: solve `M c = <f(., t), phi>`.
pub fn l2_project(mesh: &MeshLevel, f: &Expr, t: f64) -> Result<DofVector> {
    let degree = if f.has_transcendental() {
        QuadDegree::TRIG
    } else {
        QuadDegree::DEFAULT
    };
    let load = load_vector(mesh, f, t, degree)?;
    // assemble the mass matrix alone
    let n = mesh.num_interior();
    let mut trip_m = Vec::new();
    for ti in 0..mesh.num_triangles() {
        let tri = mesh.triangles()[ti];
        let (mass_loc, _) = local_element_matrices(mesh.triangle_coords(ti))?;
        for a in 0..3 {
            let Some(ra) = mesh.dof_of_vertex(tri[a]) else {
                continue;
            };
            for b in 0..3 {
                if let Some(cb) = mesh.dof_of_vertex(tri[b]) {
                    trip_m.push((ra, cb, mass_loc[a][b]));
                }
            }
        }
    }
    let mass = CsrMatrix::from_triplets(n, n, trip_m);
    let dense = crate::linalg::DenseMatrix::from_csr(&mass);
    let chol = crate::linalg::cholesky(&dense)?;
    let c = chol.solve_vec(&load.values);
    DofVector::from_values(mesh, c)
}

/// Discrete norms `(||Z||_M, sqrt(Z^T M Z + Z^T K Z))`.
pub fn discrete_norms(matrices: &SystemMatrices, z: &DofVector) -> (f64, f64) {
    let l2sq = matrices.mass.bilinear(&z.values, &z.values);
    let h1sq = l2sq + matrices.stiffness.bilinear(&z.values, &z.values);
    (l2sq.max(0.0).sqrt(), h1sq.max(0.0).sqrt())
}

/// Continuum L2 and full H1 errors of a P1 field against a closed-form
/// exact solution, integrated per element with the given quadrature
/// degree; the gradient of the exact field is exact (symbolic).
pub fn continuum_error(
    mesh: &MeshLevel,
    z: &DofVector,
    exact: &Expr,
    t: f64,
    degree: QuadDegree,
) -> Result<(f64, f64)> {
    check_field(mesh, z)?;
    let rule = TriangleRule::cached(degree);
    let grad = exact.gradient();
    let mut l2sq = 0.0;
    let mut h1semisq = 0.0;
    for ti in 0..mesh.num_triangles() {
        let tri = mesh.triangles()[ti];
        let coords = mesh.triangle_coords(ti);
        let geo = tri_geometry(coords)?;
        let z_loc: [f64; 3] = std::array::from_fn(|a| {
            mesh.dof_of_vertex(tri[a]).map_or(0.0, |d| z.values[d])
        });
        let gz = [
            (0..3).map(|a| z_loc[a] * geo.grads[a][0]).sum::<f64>(),
            (0..3).map(|a| z_loc[a] * geo.grads[a][1]).sum::<f64>(),
        ];
        let [p0, p1, p2] = coords;
        for q in &rule.points {
            let x = p0[0] + (p1[0] - p0[0]) * q.x + (p2[0] - p0[0]) * q.y;
            let y = p0[1] + (p1[1] - p0[1]) * q.x + (p2[1] - p0[1]) * q.y;
            let bary = [1.0 - q.x - q.y, q.x, q.y];
            let w = q.w * 2.0 * geo.area;
            let zh: f64 = (0..3).map(|a| z_loc[a] * bary[a]).sum();
            let diff = zh - exact.eval(x, y, t)?;
            l2sq += w * diff * diff;
            let dgx = gz[0] - grad[0].eval(x, y, t)?;
            let dgy = gz[1] - grad[1].eval(x, y, t)?;
            h1semisq += w * (dgx * dgx + dgy * dgy);
        }
    }
    Ok((l2sq.sqrt(), (l2sq + h1semisq).sqrt()))
}

fn check_field(mesh: &MeshLevel, z: &DofVector) -> Result<()> {
    if z.level != mesh.level() || z.len() != mesh.num_interior() {
        return Err(Error::Argument(format!(
            "field (level {}, len {}) does not match mesh level {} with {} DOFs",
            z.level,
            z.len(),
            mesh.level(),
            mesh.num_interior()
        )));
    }
    Ok(())
}
