//! Solve the stationary Burgers equation by Picard iteration against a
//! manufactured forcing and report the discretization error and the
//! discrete coercivity margins.
//!
//! ```bash
//! cargo run --release --example steady_picard
//! ```

use burgers_stab::assembly::{
    assemble_static, continuum_error, load_vector, ControlRegion, PhysicsParams,
};
use burgers_stab::expr;
use burgers_stab::mesh::MeshLevel;
use burgers_stab::quadrature::QuadDegree;
use burgers_stab::steady::{self, SteadyProfile};

fn main() -> burgers_stab::Result<()> {
    let params = PhysicsParams {
        eta: 1.0,
        nu0: 0.0,
        v: [1.0, 1.0],
        omega: 0.0,
    };
    let profile = SteadyProfile::new(expr::parse("x1*x2*(1-x1)*(1-x2)")?, &params);
    println!("manufactured steady solve, y_s = {}", profile.ys);
    println!("level |  ||y_h - y_s||_L2  | order");
    let mut prev: Option<f64> = None;
    for k in 2..=5 {
        let mesh = MeshLevel::build_uniform(k)?;
        let load = load_vector(&mesh, &profile.fs, 0.0, QuadDegree::DEFAULT)?;
        let y = steady::solve_steady_picard(&mesh, &load, &params, 1e-12, 50)?;
        let (l2, _) = continuum_error(&mesh, &y, &profile.ys, 0.0, QuadDegree::DEFAULT)?;
        let order = prev
            .map(|p| (l2 / p).ln() / 0.5f64.ln())
            .map_or(String::new(), |o| format!("{o:.3}"));
        println!("{k:5} | {l2:18.6e} | {order}");
        prev = Some(l2);
    }

    // discrete coercivity margins of the linearized form
    println!("\ncoercivity margins (2 pi^2 = {:.4}):", 2.0 * std::f64::consts::PI.powi(2));
    for k in 2..=4 {
        let mesh = MeshLevel::build_uniform(k)?;
        let m = assemble_static(&mesh, &params, &profile.ys, &ControlRegion::Full)?;
        let report = steady::coercivity_margin(&m, &params)?;
        println!(
            "level {k}: margin = {:.4}, gradient margin = {:.4}",
            report.margin, report.grad_margin
        );
    }
    Ok(())
}
