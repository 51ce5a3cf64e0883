//! Builds the shared/private encoders for two domains with different feature sets
//! and reports how the orthogonality penalty between shared and private codes
//! behaves on random inputs.
//!
//! `cargo run --release --example shared_private_encoders`

use htce::blocks::{orth_feature_loss, EncoderSpec, EncoderTriple};
use htce::nn::{rng_from_seed, Matrix, ParamStore};
use htce::Domain;
use rand::RngExt;

fn random(rows: usize, cols: usize, rng: &mut htce::nn::Rng) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random::<f64>()).collect()).expect("sized")
}

fn main() -> htce::Result<()> {
    let mut rng = rng_from_seed(9);
    let spec = EncoderSpec::new(10, 16, 13);
    let mut store = ParamStore::new();
    let enc = EncoderTriple::build(&mut store, "demo", None, spec.clone(), &mut rng)?;
    println!(
        "shared encoder in {} -> {}, private encoders {} / {} -> {}, {} parameters",
        spec.d_shared, spec.width_shared, spec.d_source, spec.d_target, spec.width_private,
        store.num_params()
    );

    let xs = random(64, spec.d_source, &mut rng);
    let xt = random(32, spec.d_target, &mut rng);
    let rs = enc.infer(&store, &xs, Domain::Source, None)?;
    let rt = enc.infer(&store, &xt, Domain::Target, None)?;
    println!("representation widths: source {} target {}", rs.width(), rt.width());
    let orth = orth_feature_loss(&rs.z_shared, &rs.z_private, &rt.z_shared, &rt.z_private)?;
    println!("orthogonality penalty at initialisation: {orth:.3e}");
    let zero_private = Matrix::zeros(rs.rows(), spec.width_private);
    let zero_private_t = Matrix::zeros(rt.rows(), spec.width_private);
    println!(
        "with private codes zeroed:               {:.3e}",
        orth_feature_loss(&rs.z_shared, &zero_private, &rt.z_shared, &zero_private_t)?
    );
    Ok(())
}
