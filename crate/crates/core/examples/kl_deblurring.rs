//! Poisson deblurring: Kullback-Leibler data fit through a separable blur
//! built with a Kronecker product, regularized by total variation.
//!
//! Run with `cargo run --release --example kl_deblurring`.

use flexsolve::{data_term, gradient_term, DataNorm, GradientNorm, GridDims, Problem, SparseOp, StopConfig};

fn blur_1d(n: usize) -> flexsolve::Result<SparseOp> {
    let mut triplets = Vec::new();
    for i in 0..n {
        let lo = i.saturating_sub(2);
        let hi = (i + 2).min(n - 1);
        let weight = 1.0 / (hi - lo + 1) as f64;
        triplets.extend((lo..=hi).map(|j| (i, j, weight)));
    }
    SparseOp::from_triplets(n, n, triplets)
}

fn main() -> flexsolve::Result<()> {
    let n = 24;
    let dims = GridDims::new(&[n, n])?;
    let blur = SparseOp::kron(&blur_1d(n)?, &blur_1d(n)?)?;
    let clean: Vec<f64> = (0..n * n)
        .map(|p| {
            let (x, y) = (p % n, p / n);
            if (6..12).contains(&x) && (4..20).contains(&y) || (15..20).contains(&x) && (9..14).contains(&y) {
                20.0
            } else {
                2.0
            }
        })
        .collect();
    let observed = blur.apply(&clean)?;

    let mut problem = Problem::new();
    let u = problem.add_primal_var(dims.clone());
    problem.add_term(data_term(DataNorm::Kl, 1.0, observed.clone(), Some(blur))?, &[u])?;
    problem.add_term(gradient_term(GradientNorm::L1Iso, 0.05, &dims, None)?, &[u])?;
    let summary = problem.run(&StopConfig::new(20_000, 100, 1e-6)?)?;

    let err = |a: &[f64]| a.iter().zip(&clean).map(|(x, c)| (x - c).abs()).sum::<f64>() / a.len() as f64;
    println!("iterations: {}, converged: {}", summary.iterations, summary.converged);
    println!("mean abs error of the blurred data: {:.3}", err(&observed));
    println!("mean abs error of the reconstruction: {:.3}", err(problem.primal(u)?));
    Ok(())
}
