//! TV-L1 optical flow between two frames of a moving smooth pattern.
//!
//! Run with `cargo run --release --example optical_flow`.

use flexsolve::apps::{estimate_flow, FLOW_ALPHA};
use flexsolve::io::{write_flo, FlowField, PgmImage};
use flexsolve::StopConfig;

fn frame(w: usize, h: usize, shift: f64) -> PgmImage {
    let samples = (0..w * h)
        .map(|p| {
            let (x, y) = ((p % w) as f64 - shift, (p / w) as f64);
            0.5 + 0.2 * (x / 6.0).sin() + 0.2 * (y / 9.0).cos()
        })
        .collect();
    PgmImage::from_samples(w, h, 255, samples).unwrap()
}

fn main() -> flexsolve::Result<()> {
    let (w, h) = (48, 32);
    let (first, second) = (frame(w, h, 0.0), frame(w, h, 0.5));
    let (flow, summary) = estimate_flow(&first, &second, FLOW_ALPHA, FLOW_ALPHA, &StopConfig::default())?;

    let truth = FlowField::new(w, h, vec![0.5; w * h], vec![0.0; w * h])?;
    let mean = |c: &[f64]| c.iter().sum::<f64>() / c.len() as f64;
    println!("iterations: {}, converged: {}", summary.iterations, summary.converged);
    println!("mean flow: ({:.3}, {:.3}) px", mean(&flow.u), mean(&flow.v));
    println!("mean endpoint error: {:.3} px", flow.mean_endpoint_error(&truth)?);

    let path = std::env::temp_dir().join("flow.flo");
    write_flo(&flow, &path)?;
    println!("flow written to {}", path.display());
    Ok(())
}
