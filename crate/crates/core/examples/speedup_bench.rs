//! A small runtime, speedup and allocation sweep.

use fracpar::harness::alloc::TrackingAllocator;
use fracpar::harness::commands::{run_bench, write_bench};
use fracpar::harness::config::{BenchConfig, RunConfig};

#[global_allocator]
static GLOBAL: TrackingAllocator = TrackingAllocator;

fn main() -> fracpar::Result<()> {
    let cfg = RunConfig {
        n: 8,
        bench: BenchConfig {
            sweep: vec![64, 256],
            reps: 3,
        },
        ..RunConfig::default()
    };
    println!("threads: {}", cfg.threads);
    let records = run_bench(&cfg)?;
    write_bench(&records, &mut std::io::stdout())
}
