//! Verify the analytical gradient of the full training loss against
//! central finite differences, parameter tensor by parameter tensor, on a
//! 6-node toy instance.
//!
//! ```bash
//! cargo run --release -p agcn --example gradient_check
//! ```

use std::sync::Arc;

use agcn::dataset::generate_synthetic;
use agcn::gradcheck::{fd_grad, max_rel_err};
use agcn::model::{self, AgcnConfig, AgcnParams};
use agcn::rng::Rng;

fn main() {
    let cfg = AgcnConfig {
        layer_dims: vec![4, 5, 3],
        k: 2,
        alpha: 1.0,
        lambda1: 0.5,
        lambda2: 0.3,
        use_agcnh: true,
        use_agcns_concat: true,
        use_agcns_attention: true,
        leaky_slope: 0.2,
        seed: 61,
    };
    let ds = generate_synthetic(2, 3, 0.8, 0.3, 4, 2.0, 61).unwrap();
    let adj = Arc::new(ds.adjacency.as_ref().unwrap().normalize().unwrap());
    let mut params = AgcnParams::init(&cfg).unwrap();
    let mut rng = Rng::new(62);
    for v in params.centroids.data_mut() {
        *v = rng.uniform(-1.0, 1.0);
    }

    // base pass fixes the target distribution for all perturbed evaluations
    let (mut tape, nodes, pass) = model::evaluate(&ds.features, &adj, &params, &cfg, None).unwrap();
    let p0 = pass.p.clone();
    tape.backward(pass.total_loss).unwrap();

    let names: Vec<String> = params.tensors().into_iter().map(|(n, _)| n).collect();
    let mut worst: f64 = 0.0;
    for (idx, node) in nodes.ids().into_iter().enumerate() {
        let analytic = tape.grad_or_zeros(node);
        let at = params.tensors()[idx].1.clone();
        let numeric = fd_grad(
            |t| {
                let mut perturbed = params.clone();
                *perturbed.tensors_mut()[idx].1 = t.clone();
                let (tape, _, pass) =
                    model::evaluate(&ds.features, &adj, &perturbed, &cfg, Some(&p0)).unwrap();
                tape.value(pass.total_loss).get(0, 0)
            },
            &at,
            1e-5,
        );
        let err = max_rel_err(&analytic, &numeric);
        worst = worst.max(err);
        println!("{:<14} rel err {:.3e}", names[idx], err);
    }
    println!("worst tensor: {worst:.3e} (gate: 1e-4)");
}
