//! Record a small computation on the tape, run the backward pass, and
//! compare one gradient against central finite differences.
//!
//! ```bash
//! cargo run -p agcn --example autodiff_basics
//! ```

use agcn::gradcheck::{fd_grad, max_rel_err};
use agcn::matrix::DenseMatrix;
use agcn::tape::Tape;

fn main() {
    let w0 = DenseMatrix::from_rows(&[vec![0.4, -0.3], vec![0.1, 0.8], vec![-0.5, 0.2]]).unwrap();
    let x0 = DenseMatrix::from_rows(&[vec![1.0, 2.0, -1.0], vec![0.5, -0.25, 0.75]]).unwrap();
    let target = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();

    // forward: softmax(relu(x · w)) against a fixed target
    let loss_of = |w: &DenseMatrix| {
        let mut tape = Tape::new();
        let x = tape.constant(x0.clone());
        let w = tape.parameter(w.clone());
        let t = tape.constant(target.clone());
        let lin = tape.matmul(x, w).unwrap();
        let act = tape.relu(lin);
        let prob = tape.softmax_rows(act);
        let loss = tape.frobenius_sq_loss(prob, t).unwrap();
        (tape, w, loss)
    };

    let (mut tape, w, loss) = loss_of(&w0);
    println!("loss = {:.6}", tape.value(loss).get(0, 0));

    tape.backward(loss).unwrap();
    let analytic = tape.grad_or_zeros(w);
    println!("analytic dL/dw:");
    for i in 0..analytic.rows() {
        println!("  {:?}", analytic.row(i));
    }

    let numeric = fd_grad(
        |w| {
            let (tape, _, loss) = loss_of(w);
            tape.value(loss).get(0, 0)
        },
        &w0,
        1e-5,
    );
    println!(
        "max relative error vs central differences: {:.3e}",
        max_rel_err(&analytic, &numeric)
    );
}
