//! Three-region segmentation with the convex multi-label relaxation.
//!
//! Run with `cargo run --release --example segmentation`.

use flexsolve::apps::{random_labels, segment, SEGMENT_ALPHA};
use flexsolve::io::PgmImage;
use flexsolve::StopConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> flexsolve::Result<()> {
    let (w, h) = (40, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples: Vec<f64> = (0..w * h)
        .map(|p| {
            let (x, y) = (p % w, p / w);
            let base = if x < 14 { 0.15 } else if y < 10 { 0.55 } else { 0.9 };
            base + rng.random_range(-0.08..0.08)
        })
        .collect();
    let img = PgmImage::from_samples(w, h, 255, samples)?;

    let cfg = StopConfig::default();
    for (name, labels) in [("given", vec![0.15, 0.55, 0.9]), ("random", random_labels(3, 11))] {
        let seg = segment(&img, &labels, SEGMENT_ALPHA, &cfg)?;
        let rounded: Vec<String> = labels.iter().map(|l| format!("{l:.2}")).collect();
        let used = (0..labels.len()).filter(|i| seg.label_map.contains(i)).count();
        println!(
            "{name} labels [{}]: {} iterations, {used} regions in use",
            rounded.join(", "),
            seg.summary.iterations
        );
        for row in seg.label_map.chunks(w).step_by(2) {
            println!("  {}", row.iter().map(|l| char::from(b'a' + *l as u8)).collect::<String>());
        }
    }
    Ok(())
}
