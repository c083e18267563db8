//! Total-variation denoising of a synthetic image.
//!
//! Run with `cargo run --release --example rof_denoising`.

use flexsolve::apps::{denoise, ROF_ALPHA};
use flexsolve::io::{write_pgm, PgmImage};
use flexsolve::StopConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> flexsolve::Result<()> {
    let (w, h) = (64, 48);
    let clean: Vec<f64> = (0..w * h)
        .map(|p| {
            let (x, y) = ((p % w) as f64, (p / w) as f64);
            let disc = (x - 40.0).hypot(y - 24.0) < 12.0;
            let bar = (8.0..20.0).contains(&x) && (6.0..42.0).contains(&y);
            if disc || bar { 0.8 } else { 0.2 }
        })
        .collect();
    let noise = Normal::new(0.0, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noisy: Vec<f64> = clean.iter().map(|v| v + noise.sample(&mut rng)).collect();

    let input = PgmImage::from_samples(w, h, 255, noisy.clone())?;
    let (output, summary) = denoise(&input, ROF_ALPHA, &StopConfig::default())?;

    let rmse = |a: &[f64]| (a.iter().zip(&clean).map(|(u, c)| (u - c).powi(2)).sum::<f64>() / a.len() as f64).sqrt();
    println!(
        "stopped after {} iterations (converged: {}, residual {:.2e})",
        summary.iterations, summary.converged, summary.final_report.scaled_total
    );
    println!("rmse noisy    {:.4}", rmse(&noisy));
    println!("rmse denoised {:.4}", rmse(&output.samples));

    let dir = std::env::temp_dir();
    write_pgm(&input, dir.join("rof_noisy.pgm"))?;
    write_pgm(&output, dir.join("rof_denoised.pgm"))?;
    println!("images written to {}", dir.display());
    Ok(())
}
