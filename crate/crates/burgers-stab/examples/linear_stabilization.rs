//! The instability/stability dichotomy for the linearized system: the
//! uncontrolled shifted state grows, the Riccati feedback makes it decay
//! at the certified rate.
//!
//! ```bash
//! cargo run --release --example linear_stabilization
//! ```

use burgers_stab::assembly::{assemble_static, l2_project, ControlRegion, PhysicsParams};
use burgers_stab::expr;
use burgers_stab::mesh::MeshLevel;
use burgers_stab::riccati::{certify_closed_loop, solve_generalized_care, CareProblem};
use burgers_stab::timestepping::{simulate_linear, unshift, TimeGrid};

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
    let z0 = l2_project(
        &mesh,
        &expr::parse("sin(pi*x1)*sin(pi*x2) - x1*x2*(1-x1)*(1-x2)")?,
        0.0,
    )?;

    let problem = CareProblem::from_matrices(&m, &params);
    let mut sol = solve_generalized_care(&problem)?;
    let (abscissa, omega_p, _) = certify_closed_loop(&problem, &mut sol)?;
    println!("certificates: abscissa = {abscissa:.4}, omega_P = {omega_p:.4}\n");

    let grid = TimeGrid::new(0.005, 1.0)?;
    let open = simulate_linear(&m, &params, None, &z0, &grid)?;
    let closed = simulate_linear(&m, &params, Some(&sol), &z0, &grid)?;

    println!("   t    | uncontrolled ||z~|| | stabilized ||z~|| | bound e^(-w_P t)||z0||");
    for i in (0..open.times.len()).step_by(20) {
        let bound = (-omega_p * open.times[i]).exp() * closed.l2_norms[0];
        println!(
            "{:6.2}  | {:19.6e} | {:17.6e} | {:21.6e}",
            open.times[i], open.l2_norms[i], closed.l2_norms[i], bound
        );
    }
    println!(
        "\ngrowth factor (uncontrolled): {:.2}x, decay factor (stabilized): {:.4}",
        open.l2_norms.last().unwrap() / open.l2_norms[0],
        closed.l2_norms.last().unwrap() / closed.l2_norms[0]
    );

    // physical variables: y approaches the steady state under feedback
    let ys_nodes = mesh.interpolate(&ys, 0.0)?;
    let physical = unshift(&closed, &params, &ys_nodes, &m)?;
    let (ys_l2, _) = burgers_stab::assembly::discrete_norms(&m, &ys_nodes);
    println!(
        "physical state: ||y(T)|| = {:.6e} vs ||y_s|| = {:.6e}",
        physical.l2_norms.last().unwrap(),
        ys_l2
    );
    Ok(())
}
