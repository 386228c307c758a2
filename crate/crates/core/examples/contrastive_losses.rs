//! Both losses on the reference interaction matrices, then a few gradient
//! steps on a random batch to show each loss going down.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revrank::contrastive::{InteractionMatrix, LossKind};
use revrank::matrix::Matrix;

fn main() -> revrank::Result<()> {
    let zeros = InteractionMatrix::new(Matrix::zeros(2, 3), Matrix::zeros(2, 3))?;
    let eye = InteractionMatrix::new(Matrix::identity(2), Matrix::identity(2))?;
    for kind in [LossKind::InfoNce, LossKind::Bce] {
        println!(
            "{:8} uniform 0.5: {:.9}  identity: {:.6}",
            kind.name(),
            kind.compute(&zeros)?.loss,
            kind.compute(&eye)?.loss
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let random = |rng: &mut ChaCha8Rng| {
        let data = (0..6 * 8).map(|_| rng.gen_range(-0.5..0.5)).collect();
        Matrix::from_vec(6, 8, data).unwrap()
    };
    for kind in [LossKind::InfoNce, LossKind::Bce] {
        let (mut c, mut r) = (random(&mut rng), random(&mut rng));
        let mut trace = Vec::new();
        for _ in 0..5 {
            let out = kind.compute(&InteractionMatrix::new(c.clone(), r.clone())?)?;
            trace.push(format!("{:.4}", out.loss));
            for (p, g) in c
                .as_mut_slice()
                .iter_mut()
                .zip(out.grad_contexts.as_slice())
            {
                *p -= 0.5 * g;
            }
            for (p, g) in r.as_mut_slice().iter_mut().zip(out.grad_reviews.as_slice()) {
                *p -= 0.5 * g;
            }
        }
        println!("{:8} descent: {}", kind.name(), trace.join(" -> "));
    }
    Ok(())
}
