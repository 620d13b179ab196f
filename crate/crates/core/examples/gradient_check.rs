//! Compares backpropagated gradients with central finite differences for both
//! network shapes and all four losses.

use rand::Rng;
use rand_distr::StandardNormal;
use thermocal::nn::gradcheck::{finite_diff_gradient, max_relative_error};
use thermocal::nn::{init_params, sample_gradient, LossKind, MlpArchitecture};
use thermocal::seed::{rng_for, stream};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = 1e-5;
    for hidden in [vec![20], vec![20, 12]] {
        let arch = MlpArchitecture::new(32, hidden);
        for kind in LossKind::ALL {
            let mut worst = 0.0f64;
            for draw in 0..20u64 {
                let params = init_params(&arch, 1000 + draw);
                let mut rng = rng_for(draw, stream::SAMPLE, 0);
                let x: Vec<f64> = (0..32).map(|_| rng.sample(StandardNormal)).collect();
                let label = rng.random_range(-0.9..0.9);
                let analytic = sample_gradient(&params, &x, label, kind)?;
                let numeric = finite_diff_gradient(&params, &x, label, kind, h)?;
                worst = worst.max(max_relative_error(&analytic, &numeric));
            }
            println!("{:?} {:>5}: max relative error {worst:.2e}", arch.layer_dims(), kind.name());
        }
    }
    Ok(())
}
