use std::process::ExitCode;

use fracpar::harness::alloc::TrackingAllocator;

#[global_allocator]
static GLOBAL: TrackingAllocator = TrackingAllocator;

fn main() -> ExitCode {
    fracpar::harness::cli::main_entry()
}
