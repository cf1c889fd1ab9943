//! τ divergence between two Gaussian laws across the whole family.
//!
//! Run: `cargo run --example divergence_family`

use nalgebra::{DMatrix, DVector};
use taurob::{tau_divergence, GaussianPair, JointGaussian};

fn main() -> taurob::Result<()> {
    let nominal = JointGaussian::new(
        1,
        1,
        DVector::from_vec(vec![0.0, 0.0]),
        DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]),
    )?;
    let scaled = nominal.with_moments(nominal.mean().clone(), nominal.cov() * 1.5)?;
    let shifted = nominal.with_moments(DVector::from_vec(vec![0.2, 0.0]), nominal.cov().clone())?;

    println!("{:>6}  {:>12}  {:>12}", "tau", "scaled cov", "shifted mean");
    for tau in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let a = tau_divergence(&GaussianPair::new(nominal.clone(), scaled.clone())?, tau)?;
        let b = tau_divergence(&GaussianPair::new(nominal.clone(), shifted.clone())?, tau)?;
        let shift = if b.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:.6}", b.value())
        };
        println!("{tau:>6.2}  {:>12.6}  {shift:>12}", a.value());
    }
    // at τ = 1 any mean shift is infinitely far away
    Ok(())
}
