//! Diagonally preconditioned primal-dual iteration.
//!
//! One iteration performs, with per-element steps `τ` and `σ`:
//!
//! ```text
//! y⁺ = prox_{σF*}(y + σ A x̂)
//! x⁺ = prox_{τG}(x − τ Aᵀ y⁺)
//! x̂⁺ = 2 x⁺ − x
//! ```
//!
//! where every dualized term contributes its own block of `A` and `F*`, and
//! every primal term its own `G`. Steps are `σ_i = 1 / Σ_j |A_ij|` and
//! `τ_j = 1 / Σ_i |A_ij|`, with 1 used where the sum vanishes.
//!
//! Convergence is measured by the primal-dual residual
//!
//! ```text
//! p = Σ |(x − x⁺)/τ − Aᵀ(y − y⁺)|
//! d = Σ |(y − y⁺)/σ − A(x − x⁺)|
//! ```
//!
//! divided by the total number of primal and dual entries.

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::prox;
use crate::prox::ProxKind;

/// Iterates, steps and counter of a solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverState {
    pub x: Vec<Vec<f64>>,
    pub x_prev: Vec<Vec<f64>>,
    pub x_bar: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub y_prev: Vec<Vec<f64>>,
    pub tau: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
    pub k: usize,
}

/// When to stop. `max_iters` is the iteration budget of one call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopConfig {
    pub max_iters: usize,
    pub check_every: usize,
    pub tolerance: f64,
}

impl Default for StopConfig {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            check_every: 100,
            tolerance: 1e-5,
        }
    }
}

impl StopConfig {
    pub fn new(max_iters: usize, check_every: usize, tolerance: f64) -> Result<Self> {
        let cfg = Self {
            max_iters,
            check_every,
            tolerance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be at least 1".into()));
        }
        if self.check_every == 0 {
            return Err(Error::Parameter("check_every must be at least 1".into()));
        }
        if self.tolerance.is_nan() {
            return Err(Error::Parameter("tolerance is NaN".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub primal: f64,
    pub dual: f64,
    pub scaled_total: f64,
    pub at_iteration: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    /// Iterations performed by this call.
    pub iterations: usize,
    pub final_report: ResidualReport,
    pub converged: bool,
}

/// Per-element step sizes, indexed like the primal variables and dual slots.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSizes {
    pub tau: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
}

// 1/s, moved by an ulp when that makes the product with s exactly one.
fn step_from_sum(s: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    let r = 1.0 / s;
    if r * s == 1.0 {
        return r;
    }
    [r.next_up(), r.next_down()]
        .into_iter()
        .find(|c| c * s == 1.0)
        .unwrap_or(r)
}

/// Row and column absolute sums of the stacked operator, inverted.
pub fn compute_step_sizes(problem: &Problem) -> Result<StepSizes> {
    let op = problem.stacked_operator()?;
    let rows = op.row_abs_sums();
    let cols = op.col_abs_sums();

    let tau = problem
        .primal_offsets()
        .iter()
        .enumerate()
        .map(|(v, &o)| {
            let n = problem.var_dims(v).map_or(0, |d| d.len());
            cols[o..o + n].iter().map(|&s| step_from_sum(s)).collect()
        })
        .collect();
    let sigma = problem
        .dual_layout()
        .iter()
        .map(|slot| {
            rows[slot.offset..slot.offset + slot.len]
                .iter()
                .map(|&s| step_from_sum(s))
                .collect()
        })
        .collect();
    Ok(StepSizes { tau, sigma })
}

fn check_state(problem: &Problem, state: &SolverState) -> Result<()> {
    let vars_ok = state.x.len() == problem.num_vars()
        && state.tau.len() == state.x.len()
        && state.x_bar.len() == state.x.len()
        && state.x_prev.len() == state.x.len()
        && (0..problem.num_vars()).all(|v| {
            let n = problem.var_dims(v).map_or(0, |d| d.len());
            state.x[v].len() == n && state.tau[v].len() == n && state.x_bar[v].len() == n
        });
    let layout = problem.dual_layout();
    let duals_ok = state.y.len() == layout.len()
        && state.sigma.len() == layout.len()
        && state.y_prev.len() == layout.len()
        && layout
            .iter()
            .enumerate()
            .all(|(s, slot)| state.y[s].len() == slot.len && state.sigma[s].len() == slot.len);
    if vars_ok && duals_ok {
        Ok(())
    } else {
        Err(Error::Layout("solver state does not match the problem layout".into()))
    }
}

fn first_non_finite(v: &[Vec<f64>]) -> Option<usize> {
    v.iter().position(|x| x.iter().any(|e| !e.is_finite()))
}

/// One primal-dual step on `state`.
pub fn iterate_once(problem: &Problem, state: &mut SolverState) -> Result<()> {
    check_state(problem, state)?;
    let terms = problem.terms();

    // dual ascent: ỹ = y + σ∘(A x̂), then the term's conjugate prox
    for bt in terms {
        let Some(slot) = bt.dual_slot() else { continue };
        let term = bt.term();
        let sigma = &state.sigma[slot];
        let mut y_t = vec![0.0; term.dual_len()];
        let mut row0 = 0;
        for row in term.blocks() {
            let h = row[0].rows();
            for (c, block) in row.iter().enumerate() {
                block.apply_acc(&state.x_bar[bt.vars()[c]], &mut y_t[row0..row0 + h]);
            }
            row0 += h;
        }
        for ((t, y), s) in y_t.iter_mut().zip(&state.y[slot]).zip(sigma) {
            *t = y + s * *t;
        }
        let alpha = term.weight();
        let data = term.data();
        match term.kind() {
            ProxKind::DualClampShifted => prox::clamp_in_place(&mut y_t, sigma, alpha, data),
            ProxKind::DualQuadraticShifted => prox::quadratic_in_place(&mut y_t, sigma, alpha, data),
            ProxKind::DualBallPointwise => {
                if let Some(b) = data {
                    for ((t, s), bi) in y_t.iter_mut().zip(sigma).zip(b) {
                        *t -= s * bi;
                    }
                }
                prox::ball_pointwise_in_place(&mut y_t, alpha, term.groups());
            }
            ProxKind::DualBallGlobal => {
                if let Some(b) = data {
                    for ((t, s), bi) in y_t.iter_mut().zip(sigma).zip(b) {
                        *t -= s * bi;
                    }
                }
                prox::ball_global_in_place(&mut y_t, alpha);
            }
            ProxKind::DualKl => prox::kl_in_place(&mut y_t, sigma, data.unwrap_or(&[])),
            ProxKind::DualHuber => {
                prox::huber_in_place(&mut y_t, sigma, alpha, term.epsilon().unwrap_or(0.0), term.groups())
            }
            kind => unreachable!("{kind:?} is not a dual kernel"),
        }
        state.y_prev[slot] = std::mem::replace(&mut state.y[slot], y_t);
    }
    if let Some(s) = first_non_finite(&state.y) {
        return Err(Error::Divergence {
            iteration: state.k + 1,
            location: format!("dual variable {s}"),
        });
    }

    // primal descent: x̃ = x − τ∘(Aᵀ y⁺)
    let mut adj: Vec<Vec<f64>> = state.x.iter().map(|x| vec![0.0; x.len()]).collect();
    for bt in terms {
        let Some(slot) = bt.dual_slot() else { continue };
        let y = &state.y[slot];
        let mut row0 = 0;
        for row in bt.term().blocks() {
            let h = row[0].rows();
            for (c, block) in row.iter().enumerate() {
                block.apply_adjoint_acc(&y[row0..row0 + h], &mut adj[bt.vars()[c]]);
            }
            row0 += h;
        }
    }
    let mut x_new: Vec<Vec<f64>> = state
        .x
        .iter()
        .zip(&adj)
        .zip(&state.tau)
        .map(|((x, a), t)| x.iter().zip(a).zip(t).map(|((xi, ai), ti)| xi - ti * ai).collect())
        .collect();

    // primal proxes, in insertion order
    for bt in terms.iter().filter(|t| !t.term().is_dual()) {
        let term = bt.term();
        let alpha = term.weight();
        let data = term.data().unwrap_or(&[]);
        match term.kind() {
            ProxKind::PrimalL2Data => {
                let v = bt.vars()[0];
                prox::l2_data_in_place(&mut x_new[v], &state.tau[v], alpha, data);
            }
            ProxKind::PrimalL1Data => {
                let v = bt.vars()[0];
                prox::l1_data_in_place(&mut x_new[v], &state.tau[v], alpha, data);
            }
            ProxKind::PrimalSimplexLinear => {
                let mut stacked: Vec<f64> = bt.vars().iter().flat_map(|&v| x_new[v].iter().copied()).collect();
                let tau: Vec<f64> = bt.vars().iter().flat_map(|&v| state.tau[v].iter().copied()).collect();
                prox::simplex_linear_in_place(&mut stacked, &tau, alpha, data, term.groups());
                let mut chunks = stacked.chunks(stacked.len() / bt.vars().len());
                for &v in bt.vars() {
                    x_new[v].copy_from_slice(chunks.next().expect("one chunk per label"));
                }
            }
            ProxKind::PrimalFree => {}
            kind => unreachable!("{kind:?} is not a primal kernel"),
        }
    }
    if let Some(v) = first_non_finite(&x_new) {
        return Err(Error::Divergence {
            iteration: state.k + 1,
            location: format!("primal variable {v}"),
        });
    }

    for ((bar, new), old) in state.x_bar.iter_mut().zip(&x_new).zip(&state.x) {
        for ((b, n), o) in bar.iter_mut().zip(new).zip(old) {
            *b = 2.0 * n - o;
        }
    }
    state.x_prev = std::mem::replace(&mut state.x, x_new);
    state.k += 1;
    Ok(())
}

/// Primal-dual residual between two consecutive states.
pub fn compute_residual(problem: &Problem, prev: &SolverState, cur: &SolverState) -> ResidualReport {
    residual_between(problem, &prev.x, &cur.x, &prev.y, &cur.y, &cur.tau, &cur.sigma, cur.k)
}

#[allow(clippy::too_many_arguments)]
fn residual_between(
    problem: &Problem,
    x_old: &[Vec<f64>],
    x_new: &[Vec<f64>],
    y_old: &[Vec<f64>],
    y_new: &[Vec<f64>],
    tau: &[Vec<f64>],
    sigma: &[Vec<f64>],
    k: usize,
) -> ResidualReport {
    let dx: Vec<Vec<f64>> = x_old
        .iter()
        .zip(x_new)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u - v).collect())
        .collect();
    let dy: Vec<Vec<f64>> = y_old
        .iter()
        .zip(y_new)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u - v).collect())
        .collect();

    let mut adj: Vec<Vec<f64>> = dx.iter().map(|x| vec![0.0; x.len()]).collect();
    let mut fwd: Vec<Vec<f64>> = dy.iter().map(|y| vec![0.0; y.len()]).collect();
    for bt in problem.terms() {
        let Some(slot) = bt.dual_slot() else { continue };
        let mut row0 = 0;
        for row in bt.term().blocks() {
            let h = row[0].rows();
            for (c, block) in row.iter().enumerate() {
                let v = bt.vars()[c];
                block.apply_adjoint_acc(&dy[slot][row0..row0 + h], &mut adj[v]);
                block.apply_acc(&dx[v], &mut fwd[slot][row0..row0 + h]);
            }
            row0 += h;
        }
    }

    let primal: f64 = dx
        .iter()
        .zip(&adj)
        .zip(tau)
        .flat_map(|((d, a), t)| d.iter().zip(a).zip(t).map(|((di, ai), ti)| (di / ti - ai).abs()))
        .sum();
    let dual: f64 = dy
        .iter()
        .zip(&fwd)
        .zip(sigma)
        .flat_map(|((d, a), s)| d.iter().zip(a).zip(s).map(|((di, ai), si)| (di / si - ai).abs()))
        .sum();
    let count = problem.primal_len() + problem.dual_len();
    ResidualReport {
        primal,
        dual,
        scaled_total: (primal + dual) / count.max(1) as f64,
        at_iteration: k,
    }
}

impl Problem {
    /// Recomputes step sizes if terms changed since the last computation.
    pub fn refresh_steps(&mut self) -> Result<()> {
        if self.steps_stale {
            let steps = compute_step_sizes(self)?;
            self.state.tau = steps.tau;
            self.state.sigma = steps.sigma;
            self.steps_stale = false;
        }
        Ok(())
    }

    /// Runs exactly `n` iterations without residual checks.
    pub fn iterate(&mut self, n: usize) -> Result<()> {
        self.refresh_steps()?;
        if n > 0 {
            self.last_report = None;
        }
        let mut state = std::mem::take(&mut self.state);
        let mut out = Ok(());
        for _ in 0..n {
            out = iterate_once(self, &mut state);
            if out.is_err() {
                break;
            }
        }
        self.state = state;
        out
    }

    /// Residual between the current iterate and the one before it.
    pub fn residual(&self) -> ResidualReport {
        let s = &self.state;
        residual_between(self, &s.x_prev, &s.x, &s.y_prev, &s.y, &s.tau, &s.sigma, s.k)
    }

    /// Iterates from the current state until the scaled residual drops below
    /// the tolerance at a check, or the budget of this call is spent.
    pub fn run(&mut self, cfg: &StopConfig) -> Result<RunSummary> {
        self.run_with_progress(cfg, |_, _| {})
    }

    /// [`Problem::run`] with a callback invoked at every residual check.
    pub fn run_with_progress<F>(&mut self, cfg: &StopConfig, mut progress: F) -> Result<RunSummary>
    where
        F: FnMut(usize, &ResidualReport),
    {
        cfg.validate()?;
        if self.num_vars() == 0 || self.terms().is_empty() {
            return Err(Error::Shape(
                "a problem needs at least one primal variable and one term".into(),
            ));
        }
        self.refresh_steps()?;
        self.has_run = true;

        if let Some(report) = self.last_report {
            if report.at_iteration == self.state.k
                && report.at_iteration % cfg.check_every == 0
                && report.scaled_total < cfg.tolerance
            {
                return Ok(RunSummary {
                    iterations: 0,
                    final_report: report,
                    converged: true,
                });
            }
        }

        let mut state = std::mem::take(&mut self.state);
        let mut iterations = 0;
        let mut converged = false;
        let mut last = None;
        let mut failure = None;
        while iterations < cfg.max_iters {
            if let Err(e) = iterate_once(self, &mut state) {
                failure = Some(e);
                break;
            }
            iterations += 1;
            if state.k.is_multiple_of(cfg.check_every) {
                let report =
                    residual_between(self, &state.x_prev, &state.x, &state.y_prev, &state.y, &state.tau, &state.sigma, state.k);
                progress(state.k, &report);
                last = Some(report);
                if report.scaled_total < cfg.tolerance {
                    converged = true;
                    break;
                }
            }
        }
        self.state = state;
        if let Some(e) = failure {
            self.last_report = None;
            return Err(e);
        }
        let final_report = match last {
            Some(r) if r.at_iteration == self.state.k => r,
            _ => self.residual(),
        };
        self.last_report = Some(final_report);
        Ok(RunSummary {
            iterations,
            final_report,
            converged,
        })
    }

    /// Continues a previous run from its retained state.
    pub fn resume(&mut self, cfg: &StopConfig) -> Result<RunSummary> {
        if !self.has_run {
            return Err(Error::Layout("there is no previous run to resume".into()));
        }
        self.run(cfg)
    }
}
