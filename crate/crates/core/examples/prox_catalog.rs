//! Every closed-form proximal kernel next to its brute-force reference.
//!
//! Run with `cargo run --release --example prox_catalog`.

use flexsolve::prox::*;
use flexsolve::verification::{oracle_prox, oracle_prox_conjugate, Functional};

fn show(name: &str, closed: Vec<f64>, reference: Vec<f64>) {
    let gap = closed.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:+.4}")).collect::<Vec<_>>().join(" ");
    println!("{name:<15} {}   (reference gap {gap:.1e})", fmt(&closed));
}

fn main() -> flexsolve::Result<()> {
    let y = [2.5, -0.4, 1.1, -3.0];
    let (s, alpha) = (0.7, 1.2);
    let b = [0.5, 0.0, -0.5, 1.0];
    let steps = [s; 4];
    println!("input           {}", y.iter().map(|x| format!("{x:+.4}")).collect::<Vec<_>>().join(" "));

    show(
        "clamp",
        prox_dual_clamp(&y, &steps, alpha, &b)?,
        oracle_prox_conjugate(&Functional::Abs { alpha, f: b.to_vec() }, s, &y)?,
    );
    show(
        "quadratic",
        prox_dual_quadratic(&y, &steps, alpha, &b)?,
        oracle_prox_conjugate(&Functional::HalfSquare { alpha, f: b.to_vec() }, s, &y)?,
    );
    show(
        "ball pointwise",
        prox_dual_ball_pointwise(&y, alpha, 2)?,
        oracle_prox(&Functional::BallIndicator { alpha, groups: 2 }, s, &y)?,
    );
    show(
        "ball global",
        prox_dual_ball_global(&y, alpha)?,
        oracle_prox(&Functional::BallIndicator { alpha, groups: 4 }, s, &y)?,
    );
    let f = [1.0, 2.0, 0.0, 0.5];
    show("kl", prox_dual_kl(&y, &steps, &f)?, oracle_prox(&Functional::KlConjugate { f: f.to_vec() }, s, &y)?);
    show(
        "huber",
        prox_dual_huber(&y, &steps, alpha, 0.3, 2)?,
        oracle_prox(&Functional::HuberConjugate { alpha, epsilon: 0.3, groups: 2 }, s, &y)?,
    );
    show(
        "l2 data",
        prox_primal_l2_data(&y, &steps, alpha, &b)?,
        oracle_prox(&Functional::HalfSquare { alpha, f: b.to_vec() }, s, &y)?,
    );
    show(
        "l1 data",
        prox_primal_l1_data(&y, &steps, alpha, &b)?,
        oracle_prox(&Functional::Abs { alpha, f: b.to_vec() }, s, &y)?,
    );
    let costs = [0.1, 0.9, 0.4, 0.2];
    show(
        "simplex",
        prox_simplex_linear(&y, &steps, alpha, &costs, 2)?,
        oracle_prox(&Functional::SimplexLinear { alpha, costs: costs.to_vec(), labels: 2 }, s, &y)?,
    );
    show("free", prox_primal_free(&y), oracle_prox(&Functional::Zero, s, &y)?);
    Ok(())
}
