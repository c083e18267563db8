//! Brute-force reference implementations used to check the solver.
//!
//! Nothing here shares code with the closed-form kernels or the
//! preconditioned iteration: proximal maps are found by direct numerical
//! minimization, and the reference solver uses dense matrices with one scalar
//! step size for all variables.

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::prox::ProxKind;

/// A functional whose proximal map [`oracle_prox`] can minimize numerically.
///
/// Scalar variants act componentwise; group variants act on pixel groups laid
/// out like the kernels expect (`groups` equal blocks, group `p` is the `p`-th
/// entry of every block).
#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    /// `α|x − f|`
    Abs { alpha: f64, f: Vec<f64> },
    /// `(α/2)(x − f)²`
    HalfSquare { alpha: f64, f: Vec<f64> },
    Zero,
    /// Conjugate of `α|· − b|`: `b·v` on `|v| ≤ α`.
    ClampConjugate { alpha: f64, b: Vec<f64> },
    /// Conjugate of `(α/2)(· − b)²`: `v²/(2α) + b·v`.
    QuadraticConjugate { alpha: f64, b: Vec<f64> },
    /// Conjugate of the Kullback-Leibler divergence: `−f log(1 − v)` on `v < 1`.
    KlConjugate { f: Vec<f64> },
    /// Indicator of `‖v_p‖ ≤ α` for every group.
    BallIndicator { alpha: f64, groups: usize },
    /// Conjugate of `α H_ε(‖·‖)`: `(ε/2α)‖v_p‖²` on `‖v_p‖ ≤ α`.
    HuberConjugate { alpha: f64, epsilon: f64, groups: usize },
    /// `α⟨x, c⟩` on the per-pixel probability simplex over `labels` blocks.
    SimplexLinear { alpha: f64, costs: Vec<f64>, labels: usize },
}

const MAX_GROUP: usize = 5;
const GROUP_ITERS: usize = 100_000;

/// `argmin_v ½‖v − y‖² + τ G(v)`, found numerically.
pub fn oracle_prox(g: &Functional, tau: f64, y: &[f64]) -> Result<Vec<f64>> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Parameter(format!("step must be positive, got {tau}")));
    }
    let n = y.len();
    let need = |len: usize| -> Result<()> {
        if len == n {
            Ok(())
        } else {
            Err(Error::Dimension(format!("parameter has length {len}, input {n}")))
        }
    };
    match g {
        Functional::Zero => Ok(y.to_vec()),
        Functional::Abs { f, .. }
        | Functional::HalfSquare { f, .. }
        | Functional::ClampConjugate { b: f, .. }
        | Functional::QuadraticConjugate { b: f, .. }
        | Functional::KlConjugate { f } => {
            need(f.len())?;
            Ok((0..n).map(|i| scalar_prox(g, i, tau, y[i])).collect())
        }
        Functional::BallIndicator { alpha, groups } => group_prox(y, *groups, |z, v| {
            projected_gradient(z, v, tau, *alpha, 0.0);
        }),
        Functional::HuberConjugate { alpha, epsilon, groups } => group_prox(y, *groups, |z, v| {
            projected_gradient(z, v, tau, *alpha, epsilon / alpha);
        }),
        Functional::SimplexLinear { alpha, costs, labels } => {
            need(costs.len())?;
            if *labels == 0 || *labels > MAX_GROUP || !n.is_multiple_of(*labels) {
                return Err(Error::Unsupported(format!(
                    "simplex oracle needs 1..={MAX_GROUP} labels dividing the input, got {labels}"
                )));
            }
            let block = n / labels;
            let mut out = vec![0.0; n];
            for p in 0..block {
                let z: Vec<f64> = (0..*labels).map(|i| y[i * block + p] - tau * alpha * costs[i * block + p]).collect();
                for (i, v) in simplex_by_enumeration(&z).into_iter().enumerate() {
                    out[i * block + p] = v;
                }
            }
            Ok(out)
        }
    }
}

/// `argmin_v ½‖v − y‖² + σ F*(v)` for a scalar functional `F`, through
/// `y − σ prox_{F/σ}(y/σ)` with the inner prox from [`oracle_prox`].
pub fn oracle_prox_conjugate(f: &Functional, sigma: f64, y: &[f64]) -> Result<Vec<f64>> {
    if !matches!(f, Functional::Abs { .. } | Functional::HalfSquare { .. } | Functional::Zero) {
        return Err(Error::Unsupported("Moreau route only covers scalar primal functionals".into()));
    }
    let scaled: Vec<f64> = y.iter().map(|v| v / sigma).collect();
    let inner = oracle_prox(f, 1.0 / sigma, &scaled)?;
    Ok(y.iter().zip(inner).map(|(v, z)| v - sigma * z).collect())
}

// Value of τG at a scalar point (+∞ outside the domain).
fn scalar_value(g: &Functional, i: usize, tau: f64, v: f64) -> f64 {
    match g {
        Functional::Abs { alpha, f } => tau * alpha * (v - f[i]).abs(),
        Functional::HalfSquare { alpha, f } => 0.5 * tau * alpha * (v - f[i]).powi(2),
        Functional::ClampConjugate { alpha, b } => {
            if v.abs() <= *alpha {
                tau * b[i] * v
            } else {
                f64::INFINITY
            }
        }
        Functional::QuadraticConjugate { alpha, b } => tau * (v * v / (2.0 * alpha) + b[i] * v),
        Functional::KlConjugate { f } => {
            if v > 1.0 || (v == 1.0 && f[i] > 0.0) {
                f64::INFINITY
            } else if f[i] == 0.0 {
                0.0
            } else {
                -tau * f[i] * (-v).ln_1p()
            }
        }
        _ => 0.0,
    }
}

// τG(a) − τG(b), written to avoid cancellation between nearby points.
fn scalar_diff(g: &Functional, i: usize, tau: f64, a: f64, b: f64) -> f64 {
    match g {
        Functional::HalfSquare { alpha, f } => 0.5 * tau * alpha * (a - b) * (a + b - 2.0 * f[i]),
        Functional::QuadraticConjugate { alpha, b: c } => tau * (a - b) * ((a + b) / (2.0 * alpha) + c[i]),
        Functional::KlConjugate { f } if f[i] > 0.0 && a < 1.0 && b < 1.0 => {
            tau * f[i] * ((a - b) / (1.0 - a)).ln_1p()
        }
        _ => scalar_value(g, i, tau, a) - scalar_value(g, i, tau, b),
    }
}

// Objective difference φ(a) − φ(b) with φ(v) = ½(v − y)² + τG(v).
fn objective_diff(g: &Functional, i: usize, tau: f64, y: f64, a: f64, b: f64) -> f64 {
    let (ga, gb) = (scalar_value(g, i, tau, a), scalar_value(g, i, tau, b));
    if ga.is_infinite() || gb.is_infinite() {
        return if ga == gb { 0.0 } else { ga - gb };
    }
    0.5 * (a - b) * (a + b - 2.0 * y) + scalar_diff(g, i, tau, a, b)
}

fn scalar_domain(g: &Functional, i: usize) -> (f64, f64) {
    match g {
        Functional::ClampConjugate { alpha, .. } => (-alpha, *alpha),
        Functional::KlConjugate { f } => {
            if f[i] > 0.0 {
                (f64::NEG_INFINITY, 1.0f64.next_down())
            } else {
                (f64::NEG_INFINITY, 1.0)
            }
        }
        _ => (f64::NEG_INFINITY, f64::INFINITY),
    }
}

// Golden-section search after growing a bracket around y inside the domain.
fn scalar_prox(g: &Functional, i: usize, tau: f64, y: f64) -> f64 {
    let (dlo, dhi) = scalar_domain(g, i);
    let less = |a: f64, b: f64| objective_diff(g, i, tau, y, a, b) < 0.0;
    let start = y.clamp(dlo, dhi);

    let mut width = 1.0;
    let mut lo = (start - width).max(dlo);
    while lo > dlo && less(lo, lo + 0.5 * width) {
        width *= 2.0;
        lo = (start - width).max(dlo);
    }
    width = 1.0;
    let mut hi = (start + width).min(dhi);
    while hi < dhi && less(hi, hi - 0.5 * width) {
        width *= 2.0;
        hi = (start + width).min(dhi);
    }

    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    for _ in 0..400 {
        if b - a <= 1e-13 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if less(c, d) {
            b = d;
            d = c;
            c = b - ratio * (b - a);
        } else {
            a = c;
            c = d;
            d = a + ratio * (b - a);
        }
    }
    // the endpoints themselves may be the minimizer when it sits on the domain boundary
    let mid = 0.5 * (a + b);
    [lo, hi, mid]
        .into_iter()
        .reduce(|best, v| if less(v, best) { v } else { best })
        .unwrap_or(mid)
}

fn group_prox(y: &[f64], groups: usize, solve: impl Fn(&mut [f64], &[f64])) -> Result<Vec<f64>> {
    if groups == 0 || groups > MAX_GROUP || !y.len().is_multiple_of(groups) {
        return Err(Error::Unsupported(format!(
            "group oracle needs 1..={MAX_GROUP} groups dividing the input, got {groups}"
        )));
    }
    let block = y.len() / groups;
    let mut out = vec![0.0; y.len()];
    for p in 0..block {
        let v: Vec<f64> = (0..groups).map(|g| y[g * block + p]).collect();
        let mut z = vec![0.0; groups];
        solve(&mut z, &v);
        for (g, zi) in z.into_iter().enumerate() {
            out[g * block + p] = zi;
        }
    }
    Ok(out)
}

// Projected gradient for ½‖z − v‖² + τ(κ/2)‖z‖² over ‖z‖ ≤ radius.
fn projected_gradient(z: &mut [f64], v: &[f64], tau: f64, radius: f64, kappa: f64) {
    let step = 1.0 / (1.0 + tau * kappa);
    for _ in 0..GROUP_ITERS {
        let mut moved = 0.0f64;
        let mut next: Vec<f64> = z
            .iter()
            .zip(v)
            .map(|(zi, vi)| zi - step * ((zi - vi) + tau * kappa * zi))
            .collect();
        let norm = next.iter().map(|e| e * e).sum::<f64>().sqrt();
        if norm > radius {
            next.iter_mut().for_each(|e| *e *= radius / norm);
        }
        for (zi, ni) in z.iter_mut().zip(&next) {
            moved = moved.max((*zi - ni).abs());
            *zi = *ni;
        }
        if moved == 0.0 {
            break;
        }
    }
}

/// Euclidean projection onto the probability simplex by trying every support
/// set and keeping the feasible candidate closest to `z`.
pub fn simplex_by_enumeration(z: &[f64]) -> Vec<f64> {
    let k = z.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << k) {
        let support: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let shift = (support.iter().map(|&i| z[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut cand = vec![0.0; k];
        for &i in &support {
            cand[i] = z[i] - shift;
        }
        if cand.iter().any(|&v| v < -1e-15) {
            continue;
        }
        cand.iter_mut().for_each(|v| *v = v.max(0.0));
        let dist: f64 = cand.iter().zip(z).map(|(c, zi)| (c - zi).powi(2)).sum();
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, cand));
        }
    }
    best.map(|(_, c)| c).unwrap_or_default()
}

const DENSE_CAP: usize = 10_000;

/// Runs `iters` unpreconditioned primal-dual iterations on dense matrices,
/// starting from zero, and returns one vector per primal variable.
pub fn oracle_dense_solve(problem: &Problem, iters: usize) -> Result<Vec<Vec<f64>>> {
    oracle_dense_solve_traced(problem, iters, 0, |_, _| {})
}

/// [`oracle_dense_solve`] calling `trace(k, xs)` every `every` iterations
/// (never when `every` is zero).
pub fn oracle_dense_solve_traced<F>(problem: &Problem, iters: usize, every: usize, mut trace: F) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(usize, &[Vec<f64>]),
{
    let n = problem.primal_len();
    let m = problem.dual_len();
    if n + m > DENSE_CAP {
        return Err(Error::Capacity(format!(
            "dense reference handles at most {DENSE_CAP} elements, problem has {}",
            n + m
        )));
    }
    let a = problem.stacked_operator()?.to_dense();
    let norm = operator_norm(&a, n);
    let step = if norm > 0.0 { 0.99 / norm } else { 1.0 };
    let (tau, sigma) = (step, step);

    let offsets = problem.primal_offsets();
    let layout = problem.dual_layout();
    let mut x = vec![0.0; n];
    let mut x_bar = vec![0.0; n];
    let mut y = vec![0.0; m];

    let split = |x: &[f64]| -> Vec<Vec<f64>> {
        (0..problem.num_vars())
            .map(|v| {
                let len = problem.var_dims(v).map_or(0, |d| d.len());
                x[offsets[v]..offsets[v] + len].to_vec()
            })
            .collect()
    };

    for k in 1..=iters {
        for i in 0..m {
            let ax: f64 = a[i].iter().zip(&x_bar).map(|(aij, xj)| aij * xj).sum();
            y[i] += sigma * ax;
        }
        for bt in problem.terms() {
            if let Some(slot) = bt.dual_slot() {
                let s = &layout[slot];
                dense_dual_prox(bt.term(), sigma, &mut y[s.offset..s.offset + s.len]);
            }
        }
        let old = x.clone();
        for j in 0..n {
            let aty: f64 = (0..m).map(|i| a[i][j] * y[i]).sum();
            x[j] -= tau * aty;
        }
        for bt in problem.terms().iter().filter(|t| !t.term().is_dual()) {
            let ranges: Vec<(usize, usize)> = bt
                .vars()
                .iter()
                .map(|&v| (offsets[v], problem.var_dims(v).map_or(0, |d| d.len())))
                .collect();
            let mut stacked: Vec<f64> = ranges.iter().flat_map(|&(o, l)| x[o..o + l].to_vec()).collect();
            dense_primal_prox(bt.term(), tau, &mut stacked);
            let mut at = 0;
            for (o, l) in ranges {
                x[o..o + l].copy_from_slice(&stacked[at..at + l]);
                at += l;
            }
        }
        for j in 0..n {
            x_bar[j] = 2.0 * x[j] - old[j];
        }
        if every > 0 && k % every == 0 {
            trace(k, &split(&x));
        }
    }
    Ok(split(&x))
}

fn operator_norm(a: &[Vec<f64>], n: usize) -> f64 {
    if a.is_empty() || n == 0 {
        return 0.0;
    }
    let mut v: Vec<f64> = (0..n).map(|j| 1.0 + (j % 7) as f64 * 0.1).collect();
    let mut estimate = 0.0;
    for _ in 0..1000 {
        let av: Vec<f64> = a.iter().map(|row| row.iter().zip(&v).map(|(r, x)| r * x).sum()).collect();
        let mut atav = vec![0.0; n];
        for (row, s) in a.iter().zip(&av) {
            for (t, r) in atav.iter_mut().zip(row) {
                *t += r * s;
            }
        }
        let norm = atav.iter().map(|e| e * e).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        estimate = norm.sqrt();
        v = atav.into_iter().map(|e| e / norm).collect();
    }
    // power iteration approaches from below; keep a small margin
    estimate * (1.0 + 1e-6)
}

fn shrink(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

// prox_{σF*}(y) = y − σ prox_{F/σ}(y/σ), with the inner map in closed form.
fn dense_dual_prox(term: &crate::terms::Term, sigma: f64, y: &mut [f64]) {
    let alpha = term.weight();
    let zeros = vec![0.0; y.len()];
    let b = term.data().unwrap_or(&zeros);
    let lam = 1.0 / sigma;
    let w: Vec<f64> = y.iter().map(|v| v / sigma).collect();
    let inner: Vec<f64> = match term.kind() {
        ProxKind::DualClampShifted => w.iter().zip(b).map(|(wi, bi)| bi + shrink(wi - bi, alpha * lam)).collect(),
        ProxKind::DualQuadraticShifted => {
            w.iter().zip(b).map(|(wi, bi)| (wi + alpha * lam * bi) / (1.0 + alpha * lam)).collect()
        }
        ProxKind::DualKl => w
            .iter()
            .zip(b)
            .map(|(wi, fi)| {
                let c = wi - lam;
                0.5 * (c + (c * c + 4.0 * lam * fi).sqrt())
            })
            .collect(),
        ProxKind::DualBallPointwise | ProxKind::DualBallGlobal | ProxKind::DualHuber => {
            let groups = match term.kind() {
                ProxKind::DualBallGlobal => y.len(),
                _ => term.groups(),
            };
            let block = y.len() / groups;
            let eps = term.epsilon().unwrap_or(0.0);
            let mut out = vec![0.0; y.len()];
            for p in 0..block {
                let idx: Vec<usize> = (0..groups).map(|g| g * block + p).collect();
                let t = idx.iter().map(|&i| (w[i] - b[i]).powi(2)).sum::<f64>().sqrt();
                let l = alpha * lam;
                let r = if term.kind() == ProxKind::DualHuber && t < eps + l {
                    t / (1.0 + l / eps)
                } else {
                    (t - l).max(0.0)
                };
                for &i in &idx {
                    out[i] = b[i] + if t > 0.0 { (w[i] - b[i]) * r / t } else { 0.0 };
                }
            }
            out
        }
        _ => unreachable!("primal kinds are not dualized"),
    };
    for (yi, zi) in y.iter_mut().zip(inner) {
        *yi -= sigma * zi;
    }
}

fn dense_primal_prox(term: &crate::terms::Term, tau: f64, x: &mut [f64]) {
    let alpha = term.weight();
    let data = term.data().unwrap_or(&[]);
    match term.kind() {
        ProxKind::PrimalL2Data => {
            for (v, f) in x.iter_mut().zip(data) {
                *v = (*v + tau * alpha * f) / (1.0 + tau * alpha);
            }
        }
        ProxKind::PrimalL1Data => {
            for (v, f) in x.iter_mut().zip(data) {
                *v = f + shrink(*v - f, tau * alpha);
            }
        }
        ProxKind::PrimalSimplexLinear => {
            let labels = term.groups();
            let block = x.len() / labels;
            for p in 0..block {
                let z: Vec<f64> = (0..labels).map(|i| x[i * block + p] - tau * alpha * data[i * block + p]).collect();
                for (i, v) in project_simplex_bisection(&z).into_iter().enumerate() {
                    x[i * block + p] = v;
                }
            }
        }
        _ => {}
    }
}

// Finds θ with Σ max(z − θ, 0) = 1 by bisection.
fn project_simplex_bisection(z: &[f64]) -> Vec<f64> {
    let mass = |t: f64| z.iter().map(|v| (v - t).max(0.0)).sum::<f64>();
    let top = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = (top - 1.0, top);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    z.iter().map(|v| (v - theta).max(0.0)).collect()
}
