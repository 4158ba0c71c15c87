//! Parse scalar-field expressions, differentiate them symbolically, and
//! build the consistent and manufactured forcings used by the examples.
//!
//! ```bash
//! cargo run --release --example symbolic_fields
//! ```

use burgers_stab::assembly::PhysicsParams;
use burgers_stab::expr::{self, Var};
use burgers_stab::steady;

fn main() -> burgers_stab::Result<()> {
    let bubble = expr::parse("x1*x2*(1-x1)*(1-x2)")?;
    println!("steady state  y_s = {bubble}");
    println!("  y_s(0.5, 0.5)      = {}", bubble.eval(0.5, 0.5, 0.0)?);
    let dx1 = bubble.diff(Var::X1);
    println!("  d y_s / d x1       = {dx1}");
    println!("  value at (0.3,0.7) = {:.6}", dx1.eval(0.3, 0.7, 0.0)?);
    println!(
        "  Laplacian at center = {:.6}",
        bubble.laplacian().eval(0.5, 0.5, 0.0)?
    );

    // consistent forcing of the stationary Burgers equation
    let params = PhysicsParams {
        eta: 1.0,
        nu0: 0.0,
        v: [1.0, 1.0],
        omega: 24.0,
    };
    let fs = steady::forcing_from_steady(&bubble, &params);
    println!("\nconsistent steady forcing f_s(0.5, 0.5) = {}", fs.eval(0.5, 0.5, 0.0)?);

    // manufactured forcing so that z = e^t sin(pi x1) sin(pi x2) solves
    // the shifted nonlinear system
    let z_exact = expr::parse("exp(t)*sin(pi*x1)*sin(pi*x2)")?;
    let params2 = PhysicsParams {
        eta: 5.0,
        nu0: 0.0,
        v: [1.0, 1.0],
        omega: 0.0,
    };
    let g = steady::manufactured_forcing(&z_exact, &bubble, &params2);
    println!(
        "manufactured forcing g(0.3, 0.7, t=0.5) = {:.10}",
        g.eval(0.3, 0.7, 0.5)?
    );

    // derivative vs central difference at a sample point
    let d = z_exact.diff(Var::T);
    let h = 1e-6;
    let fd = (z_exact.eval(0.3, 0.7, 0.5 + h)? - z_exact.eval(0.3, 0.7, 0.5 - h)?) / (2.0 * h);
    println!(
        "\nd z/dt at (0.3, 0.7, 0.5): symbolic {:.10}, central difference {:.10}",
        d.eval(0.3, 0.7, 0.5)?,
        fd
    );
    Ok(())
}
