//! Extra MSE of the least-favorable law over a range of radii.
//!
//! Run: `cargo run --example delta_mse_sweep`

use nalgebra::DMatrix;
use taurob::static_robust::{delta_mse_sweep, log_spaced, DEFAULT_REL_TOL};

fn main() -> taurob::Result<()> {
    let p = DMatrix::from_row_slice(2, 2, &[0.15, 0.05, 0.05, 0.1]);
    let cs = log_spaced(0.001, 0.1, 9);
    let rows = delta_mse_sweep(&p, &[0.0, 0.5, 1.0], &cs, DEFAULT_REL_TOL)?;
    println!("{:>8}  {:>9}  {:>9}  {:>9}", "c", "tau=0", "tau=0.5", "tau=1");
    for (i, c) in cs.iter().enumerate() {
        println!(
            "{c:>8.4}  {:>9.5}  {:>9.5}  {:>9.5}",
            rows[i].delta_mse,
            rows[cs.len() + i].delta_mse,
            rows[2 * cs.len() + i].delta_mse
        );
    }
    Ok(())
}
