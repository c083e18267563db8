//! Closed-form proximal kernels.
//!
//! Dual kernels evaluate `prox_{σF*}` for the conjugate of a term's
//! functional `F`, primal kernels evaluate `prox_{τG}`. Step sizes are
//! per-element vectors; the scalar case is a constant vector.
//!
//! Conventions fixed here:
//! * squared-L2 terms carry `α/2`, i.e. `F(z) = (α/2)‖z − b‖²`;
//! * the Huber function is `H_ε(t) = t²/(2ε)` for `t < ε` and `t − ε/2`
//!   otherwise, applied to the Euclidean norm of each group;
//! * the Kullback-Leibler kernel is unweighted, `F(z) = Σ z − f + f log(f/z)`.

use crate::error::{Error, Result};

/// Which closed-form kernel a term resolves to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProxKind {
    /// Dual of `α‖z − b‖₁`.
    DualClampShifted,
    /// Dual of `α Σ_p ‖z_p − b_p‖₂` over pixel groups.
    DualBallPointwise,
    /// Dual of `α‖z − b‖₂` over the whole vector.
    DualBallGlobal,
    /// Dual of `(α/2)‖z − b‖²`.
    DualQuadraticShifted,
    /// Dual of the Kullback-Leibler divergence to `f`.
    DualKl,
    /// Dual of `α Σ_p H_ε(‖z_p‖₂)`.
    DualHuber,
    /// `(α/2)‖x − f‖²`.
    PrimalL2Data,
    /// `α‖x − f‖₁`.
    PrimalL1Data,
    /// `α Σ_i ⟨x_i, c_i⟩` restricted to the per-pixel probability simplex.
    PrimalSimplexLinear,
    /// `G = 0`.
    PrimalFree,
}

impl ProxKind {
    pub fn is_dual(self) -> bool {
        matches!(
            self,
            ProxKind::DualClampShifted
                | ProxKind::DualBallPointwise
                | ProxKind::DualBallGlobal
                | ProxKind::DualQuadraticShifted
                | ProxKind::DualKl
                | ProxKind::DualHuber
        )
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("weight must be positive, got {alpha}")))
    }
}

fn check_len(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what} has length {got}, expected {expected}"
        )))
    }
}

fn check_groups(len: usize, groups: usize) -> Result<()> {
    if groups == 0 || !len.is_multiple_of(groups) {
        return Err(Error::Dimension(format!(
            "length {len} cannot be split into {groups} groups"
        )));
    }
    Ok(())
}

/// `clamp(ỹ − σ∘b, −α, α)`.
pub fn prox_dual_clamp(y_t: &[f64], sigma: &[f64], alpha: f64, b: &[f64]) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_len("sigma", y_t.len(), sigma.len())?;
    check_len("shift", y_t.len(), b.len())?;
    let mut y = y_t.to_vec();
    clamp_in_place(&mut y, sigma, alpha, Some(b));
    Ok(y)
}

pub(crate) fn clamp_in_place(y: &mut [f64], sigma: &[f64], alpha: f64, b: Option<&[f64]>) {
    if let Some(b) = b {
        shift_in_place(y, sigma, b);
    }
    for v in y.iter_mut() {
        *v = v.clamp(-alpha, alpha);
    }
}

fn shift_in_place(y: &mut [f64], sigma: &[f64], b: &[f64]) {
    for ((v, s), bi) in y.iter_mut().zip(sigma).zip(b) {
        *v -= s * bi;
    }
}

/// Projects each pixel group onto the Euclidean ball of radius `alpha`.
///
/// The vector is `groups` equally long blocks; group `p` holds the `p`-th
/// entry of every block.
pub fn prox_dual_ball_pointwise(y_t: &[f64], alpha: f64, groups: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_groups(y_t.len(), groups)?;
    let mut y = y_t.to_vec();
    ball_pointwise_in_place(&mut y, alpha, groups);
    Ok(y)
}

pub(crate) fn ball_pointwise_in_place(y: &mut [f64], alpha: f64, groups: usize) {
    let block = y.len() / groups;
    for p in 0..block {
        let norm = (0..groups)
            .map(|g| y[g * block + p] * y[g * block + p])
            .sum::<f64>()
            .sqrt();
        if norm > alpha {
            let scale = alpha / norm;
            for g in 0..groups {
                y[g * block + p] *= scale;
            }
        }
    }
}

/// Projects the whole vector onto the Euclidean ball of radius `alpha`.
pub fn prox_dual_ball_global(y_t: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let mut y = y_t.to_vec();
    ball_global_in_place(&mut y, alpha);
    Ok(y)
}

pub(crate) fn ball_global_in_place(y: &mut [f64], alpha: f64) {
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > alpha {
        let scale = alpha / norm;
        y.iter_mut().for_each(|v| *v *= scale);
    }
}

/// `(ỹ − σ∘b) / (1 + σ/α)`.
pub fn prox_dual_quadratic(
    y_t: &[f64],
    sigma: &[f64],
    alpha: f64,
    b: &[f64],
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_len("sigma", y_t.len(), sigma.len())?;
    check_len("shift", y_t.len(), b.len())?;
    let mut y = y_t.to_vec();
    quadratic_in_place(&mut y, sigma, alpha, Some(b));
    Ok(y)
}

pub(crate) fn quadratic_in_place(y: &mut [f64], sigma: &[f64], alpha: f64, b: Option<&[f64]>) {
    if let Some(b) = b {
        shift_in_place(y, sigma, b);
    }
    for (v, s) in y.iter_mut().zip(sigma) {
        *v /= 1.0 + s / alpha;
    }
}

/// `(1 + ỹ − sqrt((ỹ − 1)² + 4σf)) / 2`, always `≤ 1`.
pub fn prox_dual_kl(y_t: &[f64], sigma: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    check_len("sigma", y_t.len(), sigma.len())?;
    check_len("data", y_t.len(), f.len())?;
    if let Some(i) = f.iter().position(|&v| v.is_nan() || v < 0.0) {
        return Err(Error::Data(format!(
            "Kullback-Leibler data must be nonnegative, entry {i} is {}",
            f[i]
        )));
    }
    let mut y = y_t.to_vec();
    kl_in_place(&mut y, sigma, f);
    Ok(y)
}

pub(crate) fn kl_in_place(y: &mut [f64], sigma: &[f64], f: &[f64]) {
    for ((v, s), fi) in y.iter_mut().zip(sigma).zip(f) {
        let d = *v - 1.0;
        let sf = s * fi;
        let root = (d * d + 4.0 * sf).sqrt();
        // both branches are (1 + ỹ - root) / 2 rationalized to avoid cancellation
        if d <= 0.0 {
            let denom = root - d;
            if denom > 0.0 {
                *v -= 2.0 * sf / denom;
            }
        } else {
            *v = 1.0 - 2.0 * sf / (d + root);
        }
    }
}

/// Scales by `1/(1 + σε/α)` and projects pixel groups onto the `alpha` ball.
pub fn prox_dual_huber(
    y_t: &[f64],
    sigma: &[f64],
    alpha: f64,
    epsilon: f64,
    groups: usize,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_len("sigma", y_t.len(), sigma.len())?;
    check_groups(y_t.len(), groups)?;
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::Parameter(format!(
            "Huber smoothing must be nonnegative, got {epsilon}"
        )));
    }
    let mut y = y_t.to_vec();
    huber_in_place(&mut y, sigma, alpha, epsilon, groups);
    Ok(y)
}

pub(crate) fn huber_in_place(y: &mut [f64], sigma: &[f64], alpha: f64, epsilon: f64, groups: usize) {
    if epsilon > 0.0 {
        for (v, s) in y.iter_mut().zip(sigma) {
            *v /= 1.0 + s * epsilon / alpha;
        }
    }
    ball_pointwise_in_place(y, alpha, groups);
}

/// `(x̃ + τα f) / (1 + τα)`, evaluated as `x̃ + τα (f − x̃) / (1 + τα)` so
/// that `x̃ = f` is reproduced exactly.
pub fn prox_primal_l2_data(x_t: &[f64], tau: &[f64], alpha: f64, f: &[f64]) -> Result<Vec<f64>> {
    check_len("tau", x_t.len(), tau.len())?;
    check_len("data", x_t.len(), f.len())?;
    let mut x = x_t.to_vec();
    l2_data_in_place(&mut x, tau, alpha, f);
    Ok(x)
}

pub(crate) fn l2_data_in_place(x: &mut [f64], tau: &[f64], alpha: f64, f: &[f64]) {
    for ((v, t), fi) in x.iter_mut().zip(tau).zip(f) {
        let ta = t * alpha;
        *v += ta * (fi - *v) / (1.0 + ta);
    }
}

/// `f + shrink(x̃ − f, τα)`.
pub fn prox_primal_l1_data(x_t: &[f64], tau: &[f64], alpha: f64, f: &[f64]) -> Result<Vec<f64>> {
    check_len("tau", x_t.len(), tau.len())?;
    check_len("data", x_t.len(), f.len())?;
    let mut x = x_t.to_vec();
    l1_data_in_place(&mut x, tau, alpha, f);
    Ok(x)
}

pub(crate) fn l1_data_in_place(x: &mut [f64], tau: &[f64], alpha: f64, f: &[f64]) {
    for ((v, t), fi) in x.iter_mut().zip(tau).zip(f) {
        let z = *v - fi;
        let thresh = t * alpha;
        *v = if z > thresh {
            fi + (z - thresh)
        } else if z < -thresh {
            fi + (z + thresh)
        } else {
            *fi
        };
    }
}

/// Per pixel, projects `x̃ − τα c` onto the probability simplex.
///
/// `x_t`, `tau` and `costs` are `labels` stacked blocks of one pixel grid each.
pub fn prox_simplex_linear(
    x_t: &[f64],
    tau: &[f64],
    alpha: f64,
    costs: &[f64],
    labels: usize,
) -> Result<Vec<f64>> {
    if labels < 1 {
        return Err(Error::Parameter("at least one label is required".into()));
    }
    check_len("tau", x_t.len(), tau.len())?;
    check_len("costs", x_t.len(), costs.len())?;
    check_groups(x_t.len(), labels)?;
    let mut x = x_t.to_vec();
    simplex_linear_in_place(&mut x, tau, alpha, costs, labels);
    Ok(x)
}

pub(crate) fn simplex_linear_in_place(
    x: &mut [f64],
    tau: &[f64],
    alpha: f64,
    costs: &[f64],
    labels: usize,
) {
    let block = x.len() / labels;
    let mut z = vec![0.0; labels];
    let mut sorted = vec![0.0; labels];
    for p in 0..block {
        for (i, zi) in z.iter_mut().enumerate() {
            let k = i * block + p;
            *zi = x[k] - tau[k] * alpha * costs[k];
        }
        let theta = simplex_threshold(&z, &mut sorted);
        for i in 0..labels {
            x[i * block + p] = (z[i] - theta).max(0.0);
        }
    }
}

// Sort-and-threshold projection onto {v ≥ 0, Σ v = 1}: returns θ such that
// the projection is max(z − θ, 0).
fn simplex_threshold(z: &[f64], scratch: &mut [f64]) -> f64 {
    scratch.copy_from_slice(z);
    scratch.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &s) in scratch.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if s - candidate > 0.0 {
            theta = candidate;
        }
    }
    theta
}

/// Identity, the prox of `G = 0`.
pub fn prox_primal_free(x_t: &[f64]) -> Vec<f64> {
    x_t.to_vec()
}
