//! Ground-state hits versus the one-hot weight on the 18-variable coloring
//! problem, next to each point's dynamic range. Writes CSV to stdout.

use qubotune::anneal::SaConfig;
use qubotune::problem::gcp::gen_complete_kpartite;
use qubotune::sweep::{run_sweep, write_sweep_csv, Axis, Grid, Spacing, SweepSpec};

fn main() -> qubotune::Result<()> {
    let grid = Grid::Product {
        a: Axis::Range {
            start: 1.0,
            stop: 360.0,
            steps: 16,
            spacing: Spacing::Log,
        },
        b: Axis::Value(10.0),
    };
    let cfg = SaConfig {
        n_reads: 2000,
        seed: 1,
        ..SaConfig::default()
    };
    let spec = SweepSpec::new(gen_complete_kpartite(6, 3)?.into(), grid, cfg);
    let records = run_sweep(&spec)?;
    write_sweep_csv(&records, false, std::io::stdout().lock())
}
