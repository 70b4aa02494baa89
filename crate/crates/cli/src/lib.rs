//! Library surface of the command-line runner, exposed so integration tests
//! can drive the commands in-process.

pub mod commands;
pub mod config;
pub mod output;

/// Reads `FLUXLIM_THREADS` and builds the compute pool accordingly.
/// Reductions are deterministic regardless of the thread count.
pub fn init_threads_from_env() {
    let cap = std::env::var("FLUXLIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    fluxlim_core::init_thread_pool(cap);
}
