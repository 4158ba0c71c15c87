//! Build nested uniform triangulations, inspect their counts, and check
//! that coarse-to-fine prolongation reproduces P1 fields exactly.
//!
//! ```bash
//! cargo run --release --example build_mesh
//! ```

use burgers_stab::expr;
use burgers_stab::mesh::{eval_p1, prolongate, MeshLevel};

fn main() -> burgers_stab::Result<()> {
    println!("level |    h     | vertices | triangles | interior DOFs");
    for k in 1..=5 {
        let mesh = MeshLevel::build_uniform(k)?;
        println!(
            "{:5} | {:8.5} | {:8} | {:9} | {:13}",
            k,
            mesh.h(),
            mesh.num_vertices(),
            mesh.num_triangles(),
            mesh.num_interior()
        );
    }

    // prolongation is exact on the coarse P1 space
    let coarse = MeshLevel::build_uniform(3)?;
    let fine = MeshLevel::build_uniform(4)?;
    let field = expr::parse("sin(pi*x1)*sin(pi*x2)")?;
    let zc = coarse.interpolate(&field, 0.0)?;
    let zf = prolongate(&zc, &coarse, &fine)?;
    let mut worst = 0.0f64;
    for i in 0..20 {
        for j in 0..20 {
            let p = [i as f64 / 19.0, j as f64 / 19.0];
            let a = eval_p1(&zc, &coarse, p)?;
            let b = eval_p1(&zf, &fine, p)?;
            worst = worst.max((a - b).abs());
        }
    }
    println!("\nmax |coarse - prolonged| over a 20x20 sample grid: {worst:.2e}");

    // plain-text dump of the coarsest mesh
    println!("\nlevel-1 mesh dump:");
    let mut buf = Vec::new();
    MeshLevel::build_uniform(1)?.dump(&mut buf)?;
    print!("{}", String::from_utf8_lossy(&buf));
    Ok(())
}
