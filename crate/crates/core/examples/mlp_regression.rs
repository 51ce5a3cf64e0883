//! Uses the neural-network engine directly: a small SELU network fitted to a noisy
//! sine with Adam and the mean-squared-error loss.
//!
//! `cargo run --release --example mlp_regression`

use htce::nn::{mse_loss, rng_from_seed, Activation, AdamConfig, AdamState, GradStore, Matrix, Mlp, ParamStore};
use rand::RngExt;

fn main() -> htce::Result<()> {
    let mut rng = rng_from_seed(5);
    let n = 256;
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|x: &f64| x.sin() + 0.05 * rng.random_range(-1.0..1.0)).collect();
    let x = Matrix::column(&xs);

    let mut store = ParamStore::new();
    let net = Mlp::build(&mut store, "sine", &[1, 32, 32, 1], Activation::Selu, Activation::Linear, &mut rng);
    let mut adam = AdamState::new(&store, AdamConfig { learning_rate: 1e-2, ..AdamConfig::default() });
    let mut grads = GradStore::zeros_like(&store);

    for step in 0..=2000 {
        let (pred, cache) = net.forward(&store, &x)?;
        let loss = mse_loss(pred.data(), &ys)?;
        grads.clear();
        net.backward(&store, &cache, &Matrix::column(&loss.grad), &mut grads)?;
        adam.step(&mut store, &grads)?;
        if step % 500 == 0 {
            println!("step {step:>4}  mse {:.5}", loss.value);
        }
    }
    let probe = Matrix::column(&[-2.0, 0.0, 1.5]);
    for (x, y) in probe.data().iter().zip(net.infer(&store, &probe)?.data()) {
        println!("f({x:>4}) = {y:>7.4}   sin = {:>7.4}", x.sin());
    }
    Ok(())
}
