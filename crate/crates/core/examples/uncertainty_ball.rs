//! Boundary of two scalar balls in the (mean, variance) plane, as CSV.
//!
//! Run: `cargo run --example uncertainty_ball > ball.csv`

use taurob::static_robust::ball_boundary_scalar;

fn main() -> taurob::Result<()> {
    println!("tau,c,mean,var");
    for (tau, c) in [(0.0, 0.2), (0.8, 0.454)] {
        for (m, k) in ball_boundary_scalar(0.5, 0.03, tau, c, 101)? {
            println!("{tau},{c},{m},{k}");
        }
    }
    Ok(())
}
