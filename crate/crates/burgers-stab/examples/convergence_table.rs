//! Drive a full experiment from a configuration and print the resulting
//! convergence table in both plain-text and CSV form.
//!
//! ```bash
//! cargo run --release --example convergence_table
//! ```

use burgers_stab::config::parse_config;
use burgers_stab::convergence::run_experiment;
use burgers_stab::report;

const CONFIG: &str = "\
[experiment]
id = demo
mode = nonlinear
tables = uncontrolled

[physics]
eta = 5
nu0 = 0
v = 1, 1
omega = 0

[steady_state]
ys = x1*x2*(1-x1)*(1-x2)

[initial]
z0 = sin(pi*x1)*sin(pi*x2)

[control]
enabled = false
region = full

[time]
dt_rule = h_over_2
T = 0.1

[mesh]
levels = 2, 3, 4

[forcing]
kind = manufactured
exact = exp(t)*sin(pi*x1)*sin(pi*x2)

[output]
directory = out/demo
";

fn main() -> burgers_stab::Result<()> {
    let config = parse_config(CONFIG)?;
    let output = run_experiment(&config)?;
    for table in &output.tables {
        print!("{}", report::format_table(table));
        println!("\nCSV:");
        let mut buf = Vec::new();
        report::write_table_csv(table, &mut buf)?;
        print!("{}", String::from_utf8_lossy(&buf));
    }
    for run in &output.levels {
        println!(
            "level {}: dt = {:.6}, {} time levels",
            run.level,
            run.dt,
            run.uncontrolled.as_ref().map_or(0, |t| t.times.len())
        );
    }
    Ok(())
}
