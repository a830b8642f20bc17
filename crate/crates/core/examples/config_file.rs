//! Load a run configuration from TOML, override a field, and run `solve`.

use fracpar::harness::commands::{run_solve, write_solve};
use fracpar::harness::config::{RunConfig, SolverKind};

const CONFIG: &str = r#"
problem = "constant-D"
alpha = 0.7
nt = 8
m = 4
n = 10

[solve]
solver = "coarse"
"#;

fn main() -> fracpar::Result<()> {
    let mut cfg = RunConfig::from_toml(CONFIG)?;
    cfg.solve.solver = SolverKind::Fine;
    let rows = run_solve(&cfg)?;
    write_solve(&rows, &mut std::io::stdout())?;
    println!("\n{}", cfg.to_toml()?);
    Ok(())
}
