//! Solve the generalized algebraic Riccati equation for the shifted
//! linearized system and print the feedback certificates: residual,
//! closed-loop spectral abscissa, decay margin omega_P and gradient
//! margin alpha.
//!
//! ```bash
//! cargo run --release --example solve_riccati
//! ```

use burgers_stab::assembly::{assemble_static, ControlRegion, PhysicsParams};
use burgers_stab::expr;
use burgers_stab::mesh::MeshLevel;
use burgers_stab::riccati::{
    certify_closed_loop, psd_margin, solve_generalized_care, CareProblem,
};

fn main() -> burgers_stab::Result<()> {
    let params = PhysicsParams {
        eta: 1.0,
        nu0: 0.0,
        v: [1.0, 1.0],
        omega: 24.0,
    };
    let ys = expr::parse("x1*x2*(1-x1)*(1-x2)")?;
    for k in 2..=4 {
        let mesh = MeshLevel::build_uniform(k)?;
        let m = assemble_static(&mesh, &params, &ys, &ControlRegion::Full)?;
        let problem = CareProblem::from_matrices(&m, &params);
        let mut sol = solve_generalized_care(&problem)?;
        let (abscissa, omega_p, alpha) = certify_closed_loop(&problem, &mut sol)?;
        let (lmin, pnorm) = psd_margin(&sol.p)?;
        println!("level {k} (n = {}):", problem.n());
        println!("  relative ARE residual = {:.3e}", sol.relative_residual);
        println!("  refinement history    = {:?}", sol.refinement_history);
        println!("  lambda_min(P)/||P||   = {:.3e}", lmin / pnorm);
        println!("  closed-loop abscissa  = {abscissa:.4}");
        println!("  omega_P               = {omega_p:.4}");
        println!("  alpha                 = {alpha:.3e}");
    }
    Ok(())
}
