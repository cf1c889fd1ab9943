//! τ entropy of the Bayes error and the closed-form inner maximizer.
//!
//! Run: `cargo run --example tau_entropy`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use taurob::entropy::{entropy_equivalence_check, error_moments, tau_entropy};
use taurob::io::{self, Model};

fn main() -> taurob::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/reference_static.json");
    let Model::Static(model) = io::load_model(path)? else {
        unreachable!("the bundled model is static");
    };
    let g = taurob::bayes_estimator(&model)?;
    let e = error_moments(&model, &g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    for tau in [0.0, 0.5, 1.0] {
        let curve: Vec<String> = [0.3, 0.5, 1.0, 2.0]
            .iter()
            .map(|&l| {
                format!(
                    "{:.5}",
                    tau_entropy(&e, l, tau).map(|h| h.value).unwrap_or(f64::NAN)
                )
            })
            .collect();
        let r = entropy_equivalence_check(&model, 0.5, tau, 0.05, 500, &mut rng)?;
        println!(
            "tau = {tau}: H at lambda 0.3/0.5/1/2 = [{}]; bound {:.6}, at maximizer {:.6}, best of {} random laws {:.6}",
            curve.join(", "),
            r.bound,
            r.at_maximizer,
            r.samples,
            r.max_sampled
        );
    }
    Ok(())
}
