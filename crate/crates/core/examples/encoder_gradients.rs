//! Encodes two token bags with one tower and checks a few analytic
//! gradients against central differences.

use revrank::encoder::EncoderParams;

fn main() -> revrank::Result<()> {
    let params = EncoderParams::init(4, 6, 12, 3)?;
    let ids = [1, 5, 5, 9];
    let upstream = [0.5, -1.0, 0.25, 2.0];
    let e = params.encode(&ids)?;
    println!("embedding {:?}", e.as_slice());

    let objective = |p: &EncoderParams| -> f64 {
        let v = p.encode(&ids).unwrap();
        v.as_slice().iter().zip(&upstream).map(|(a, b)| a * b).sum()
    };
    let grads = params.encode_backward(&ids, &upstream)?;
    let h = 1e-5;
    for (row, col) in [(5, 0), (9, 3), (0, 0)] {
        let mut plus = params.clone();
        plus.embeddings[(row, col)] += h;
        let mut minus = params.clone();
        minus.embeddings[(row, col)] -= h;
        let numeric = (objective(&plus) - objective(&minus)) / (2.0 * h);
        println!(
            "d/d embeddings[{row},{col}]: analytic {:+.8} numeric {numeric:+.8}",
            grads.embeddings[(row, col)]
        );
    }
    println!("bias gradient equals upstream: {:?}", grads.bias);
    Ok(())
}
