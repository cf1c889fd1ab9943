//! Least-favorable error covariance for a static model at three τ values.
//!
//! Run: `cargo run --example static_worst_case`

use taurob::io::{self, Model};
use taurob::static_robust::{calibrate_tolerance, worst_case_static, DEFAULT_REL_TOL};
use taurob::TauBall;

fn main() -> taurob::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/reference_static.json");
    let Model::Static(model) = io::load_model(path)? else {
        unreachable!("the bundled model is static");
    };
    let g = taurob::bayes_estimator(&model)?;
    println!(
        "Bayes gain: {:?}, offset {:?}",
        g.gain.as_slice(),
        g.offset.as_slice()
    );

    for tau in [0.0, 0.5, 1.0] {
        // pick the radius that costs exactly 0.08 of extra MSE
        let p = taurob::static_robust::nominal_error_cov(&model)?;
        let (c, _) = calibrate_tolerance(&p, tau, 0.08, 1e-12)?;
        let w = worst_case_static(&model, &TauBall::hard(tau, c)?, DEFAULT_REL_TOL)?;
        println!(
            "tau = {tau}: c = {c:.4}, lambda = {:.5}, delta MSE = {:.5}\n  worst P = {:.4?}",
            w.lambda,
            w.delta_mse,
            w.worst_p.as_slice()
        );
    }
    Ok(())
}
