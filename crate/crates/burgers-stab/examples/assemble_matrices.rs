//! Assemble the P1 system matrices and verify the structural identities
//! that pin down the discretization: the integration-by-parts identity
//! `A1 + A1^T + A2 = 0`, energy neutrality of the convective term, and
//! `B = M` for full-square control.
//!
//! ```bash
//! cargo run --release --example assemble_matrices
//! ```

use burgers_stab::assembly::{
    assemble_nonlinear, assemble_static, ControlRegion, PhysicsParams,
};
use burgers_stab::expr;
use burgers_stab::mesh::{DofVector, MeshLevel};
use burgers_stab::sparse::CsrMatrix;

fn main() -> burgers_stab::Result<()> {
    let params = PhysicsParams {
        eta: 1.0,
        nu0: 0.0,
        v: [1.0, 1.0],
        omega: 24.0,
    };
    let ys = expr::parse("x1*x2*(1-x1)*(1-x2)")?;
    let mesh = MeshLevel::build_uniform(3)?;
    let m = assemble_static(&mesh, &params, &ys, &ControlRegion::Full)?;

    println!(
        "level 3: n = {}, mass nnz = {}, quadrature degree = {}",
        m.n,
        m.mass.nnz(),
        m.quad_degree
    );
    println!("mass asymmetry       = {:.2e}", m.mass.asymmetry());
    println!("stiffness asymmetry  = {:.2e}", m.stiffness.asymmetry());

    let skew = CsrMatrix::linear_combination(&[
        (1.0, &m.conv_steady),
        (1.0, &m.conv_steady.transpose()),
        (1.0, &m.react_steady),
    ])?;
    println!("|A1 + A1' + A2|_max  = {:.2e}", skew.max_abs());

    let b_minus_m = CsrMatrix::linear_combination(&[(1.0, &m.control), (-1.0, &m.mass)])?;
    println!("|B - M|_max (O = Omega) = {:.2e}", b_minus_m.max_abs());

    // Z' N(Z) Z = 0: the convective term moves energy around, never
    // creates it
    let z = mesh.interpolate(&expr::parse("sin(pi*x1)*sin(2*pi*x2)")?, 0.0)?;
    let n = assemble_nonlinear(&mesh, &z, params.v)?;
    let dot: f64 = z.values.iter().zip(&n.values).map(|(a, b)| a * b).sum();
    println!("Z' N(Z) Z            = {dot:.2e}");

    let zero = DofVector::zeros(&mesh);
    let n0 = assemble_nonlinear(&mesh, &zero, params.v)?;
    println!(
        "|N(0)|_max           = {:.2e}",
        n0.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    );

    // Matrix Market export of the drift
    let mut buf = Vec::new();
    m.drift.write_matrix_market(&mut buf)?;
    let text = String::from_utf8_lossy(&buf);
    println!("\ndrift matrix export, first lines:");
    for line in text.lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
