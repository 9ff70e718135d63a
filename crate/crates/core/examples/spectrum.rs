//! Singular spectrum of the one-body matrix and its root-exponential decay.
//!
//! ```bash
//! cargo run --release --example spectrum
//! ```

use stokes_mfs::adaptive::SolverParams;
use stokes_mfs::system::{fit_spectrum, singular_spectrum};

fn main() -> stokes_mfs::Result<()> {
    println!("{:>6} {:>6} {:>8} {:>12} {:>6}", "N", "R_p", "c", "cond", "used");
    for (n, rp) in [(200, 0.63), (400, 0.63), (686, 0.63), (686, 0.7)] {
        let params = SolverParams { n_proxy: n, r_proxy: rp, ..Default::default() };
        let sigma = singular_spectrum(&params, 1.0)?;
        let fit = fit_spectrum(&sigma, rp)?;
        println!("{n:>6} {rp:>6} {:>8.3} {:>12.3e} {:>6}", fit.decay, fit.condition, fit.used);
    }
    Ok(())
}
