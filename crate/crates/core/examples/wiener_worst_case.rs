//! Least-favorable spectrum for a noisy AR(1) observed through a Wiener filter.
//!
//! Run: `cargo run --release --example wiener_worst_case`

use taurob::dynamic::{calibrate_tolerance, wiener_filter, worst_case_spectral};
use taurob::io::{self, Model};
use taurob::static_robust::DEFAULT_REL_TOL;
use taurob::TauBall;

fn main() -> taurob::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/peaked_spectral.json");
    let Model::Spectral(model) = io::load_model(path)? else {
        unreachable!("the bundled model is spectral");
    };
    let half = model.grid_size() / 2;
    let f = wiener_filter(&model)?;
    println!(
        "Wiener gain at theta = 0: {:.4}, at theta = pi: {:.4}",
        f.gains[0][(0, 0)].re,
        f.gains[half][(0, 0)].re
    );

    for tau in [0.0, 0.5, 1.0] {
        let (c, _) = calibrate_tolerance(&model, tau, 0.2, 1e-10)?;
        let w = worst_case_spectral(&model, &TauBall::hard(tau, c)?, DEFAULT_REL_TOL)?;
        let gap = |k: usize| (w.worst_se[k][(0, 0)] - w.nominal_se[k][(0, 0)]).re;
        println!(
            "tau = {tau}: c = {c:.5}, lambda = {:.5}, extra error at peak {:.4}, at theta = pi {:.6}",
            w.lambda,
            gap(0),
            gap(half)
        );
    }
    Ok(())
}
