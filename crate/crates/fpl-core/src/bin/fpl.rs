//! `fpl` — precompute collision tensors, run scenarios, verify coefficients.

fn main() {
    std::process::exit(fpl_core::cli::run());
}
