//! Soft-constraint mode: fix the multiplier, read off the implied radius.
//!
//! Run: `cargo run --example soft_constraint`

use taurob::io::{self, Model};
use taurob::static_robust::{worst_case_static, DEFAULT_REL_TOL};
use taurob::{Error, TauBall};

fn main() -> taurob::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/reference_static.json");
    let Model::Static(model) = io::load_model(path)? else {
        unreachable!("the bundled model is static");
    };
    let tau = 0.5;
    for lambda in [0.2, 0.5, 1.0, 5.0] {
        let soft = worst_case_static(&model, &TauBall::soft(tau, lambda)?, DEFAULT_REL_TOL)?;
        // the same law as a hard ball with the implied radius
        let hard = worst_case_static(&model, &TauBall::hard(tau, soft.implied_c)?, 1e-12)?;
        println!(
            "lambda = {lambda:>4}: implied c = {:.6}, delta MSE = {:.6}, hard-mode lambda = {:.6}",
            soft.implied_c, soft.delta_mse, hard.lambda
        );
    }
    match worst_case_static(&model, &TauBall::soft(tau, 0.05)?, DEFAULT_REL_TOL) {
        Err(e @ Error::InfeasibleMultiplier { .. }) => println!("lambda = 0.05: {e}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
