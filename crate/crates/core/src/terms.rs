//! Catalog of functional terms.
//!
//! A [`Term`] binds a weight, optional data and a block operator to one of
//! the [`ProxKind`] kernels. Terms whose operator is the identity on a single
//! variable, and the labeling term, are handled directly through their
//! primal prox; every other term is dualized and owns a dual variable with
//! one entry per row of its stacked operator.
//!
//! Terms of the wider catalog that have no dedicated constructor here can be
//! assembled with [`operator_term`]:
//!
//! * `α‖∇(u − w)‖` over two variables: blocks `[[∂x, −∂x], [∂y, −∂y]]`;
//! * `α‖∇u − w‖` with a vector field `w = (w1, w2)`: blocks
//!   `[[∂x, −I, 0], [∂y, 0, −I]]`.

use crate::error::{Error, Result};
use crate::linalg::{GridDims, SparseOp};
use crate::operators::{build_diagonal, build_partial, build_partials, curl_blocks, divergence_blocks};
use crate::prox::ProxKind;

/// Norms available for data terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataNorm {
    L1,
    L2,
    Kl,
}

/// Norms available for gradient regularizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientNorm {
    L1Aniso,
    L1Iso,
    L2,
    Huber,
    Frobenius,
}

/// Norms available for user operator terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorNorm {
    L1Aniso,
    L1Iso,
    L2,
    Frobenius,
}

/// `L1` is `α‖·‖₁`, `L2` is `(α/2)‖·‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorFieldOp {
    Curl,
    Divergence,
}

/// One functional term of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    kind: ProxKind,
    weight: f64,
    blocks: Vec<Vec<SparseOp>>,
    var_lens: Vec<usize>,
    data: Option<Vec<f64>>,
    epsilon: Option<f64>,
    groups: usize,
}

fn check_weight(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("term weight must be positive, got {alpha}")))
    }
}

fn check_finite(what: &str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::Data(format!("{what} has a non-finite entry at {i}"))),
        None => Ok(()),
    }
}

impl Term {
    fn primal(kind: ProxKind, weight: f64, var_lens: Vec<usize>, data: Option<Vec<f64>>, groups: usize) -> Self {
        Self {
            kind,
            weight,
            blocks: Vec::new(),
            var_lens,
            data,
            epsilon: None,
            groups,
        }
    }

    // Validates a dual-rows x arity block grid and builds a dualized term.
    fn dual(
        kind: ProxKind,
        weight: f64,
        blocks: Vec<Vec<SparseOp>>,
        data: Option<Vec<f64>>,
        epsilon: Option<f64>,
        groups: usize,
    ) -> Result<Self> {
        let arity = blocks.first().map_or(0, Vec::len);
        if arity == 0 {
            return Err(Error::Shape("operator term needs at least one block".into()));
        }
        if let Some(r) = blocks.iter().position(|row| row.len() != arity) {
            return Err(Error::Shape(format!(
                "block row {r} has {} blocks, row 0 has {arity}",
                blocks[r].len()
            )));
        }
        let var_lens: Vec<usize> = blocks[0].iter().map(SparseOp::cols).collect();
        for (r, row) in blocks.iter().enumerate() {
            let height = row[0].rows();
            for (c, block) in row.iter().enumerate() {
                if block.rows() != height {
                    return Err(Error::Shape(format!(
                        "block ({r}, {c}) has {} rows, block ({r}, 0) has {height}",
                        block.rows()
                    )));
                }
                if block.cols() != var_lens[c] {
                    return Err(Error::Shape(format!(
                        "block ({r}, {c}) has {} columns, block (0, {c}) has {}",
                        block.cols(),
                        var_lens[c]
                    )));
                }
            }
        }
        let term = Self {
            kind,
            weight,
            blocks,
            var_lens,
            data,
            epsilon,
            groups,
        };
        if let Some(d) = &term.data {
            if d.len() != term.dual_len() {
                return Err(Error::Shape(format!(
                    "data of length {} for an operator with {} rows",
                    d.len(),
                    term.dual_len()
                )));
            }
        }
        if !term.dual_len().is_multiple_of(groups) {
            return Err(Error::Shape(format!(
                "{} dual entries cannot form {groups} groups",
                term.dual_len()
            )));
        }
        Ok(term)
    }

    pub fn kind(&self) -> ProxKind {
        self.kind
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Operator blocks, indexed `[dual row][bound variable]`. Empty for primal terms.
    pub fn blocks(&self) -> &[Vec<SparseOp>] {
        &self.blocks
    }

    /// Number of primal variables the term binds.
    pub fn arity(&self) -> usize {
        self.var_lens.len()
    }

    /// Required vector length of each bound variable.
    pub fn var_lens(&self) -> &[usize] {
        &self.var_lens
    }

    /// Length of the dual variable; zero for primal terms.
    pub fn dual_len(&self) -> usize {
        self.blocks.iter().map(|row| row[0].rows()).sum()
    }

    /// Data vector `f` (primal and KL terms) or shift `b` (other dual terms).
    pub fn data(&self) -> Option<&[f64]> {
        self.data.as_deref()
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    /// Group count for pointwise kernels (axes for gradients, labels for labeling).
    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn is_dual(&self) -> bool {
        self.kind.is_dual()
    }

    /// The full operator `[[B00, B01, ...], [B10, ...]]` as one sparse matrix.
    pub fn stacked_operator(&self) -> Result<SparseOp> {
        let rows: Vec<SparseOp> = self
            .blocks
            .iter()
            .map(|row| SparseOp::hstack(&row.iter().collect::<Vec<_>>()))
            .collect::<Result<_>>()?;
        SparseOp::vstack(&rows.iter().collect::<Vec<_>>())
    }

    /// Returns a copy with a different weight. Kullback-Leibler terms keep
    /// their weight folded into operator and data, so both are rescaled.
    pub fn with_weight(&self, alpha: f64) -> Result<Self> {
        check_weight(alpha)?;
        let mut out = self.clone();
        if self.kind == ProxKind::DualKl {
            let ratio = alpha / self.weight;
            out.blocks = self
                .blocks
                .iter()
                .map(|row| row.iter().map(|b| b.scaled(ratio)).collect())
                .collect();
            out.data = self.data.as_ref().map(|d| d.iter().map(|v| v * ratio).collect());
        }
        out.weight = alpha;
        Ok(out)
    }
}

/// `α‖u − f‖₁`, `(α/2)‖u − f‖²` or a Kullback-Leibler fit, optionally through
/// an operator `A`. Without `A`, L1 and L2 fits are primal terms; KL terms are
/// always dualized (with the identity when `A` is absent).
pub fn data_term(norm: DataNorm, alpha: f64, f: Vec<f64>, op: Option<SparseOp>) -> Result<Term> {
    check_weight(alpha)?;
    check_finite("data", &f)?;
    if let Some(a) = &op {
        if a.rows() != f.len() {
            return Err(Error::Shape(format!(
                "operator has {} rows but data has length {}",
                a.rows(),
                f.len()
            )));
        }
    }
    match (norm, op) {
        (DataNorm::L1, None) => Ok(Term::primal(ProxKind::PrimalL1Data, alpha, vec![f.len()], Some(f), 1)),
        (DataNorm::L2, None) => Ok(Term::primal(ProxKind::PrimalL2Data, alpha, vec![f.len()], Some(f), 1)),
        (DataNorm::L1, Some(a)) => Term::dual(ProxKind::DualClampShifted, alpha, vec![vec![a]], Some(f), None, 1),
        (DataNorm::L2, Some(a)) => {
            Term::dual(ProxKind::DualQuadraticShifted, alpha, vec![vec![a]], Some(f), None, 1)
        }
        (DataNorm::Kl, op) => {
            if let Some(i) = f.iter().position(|&v| v < 0.0) {
                return Err(Error::Data(format!(
                    "Kullback-Leibler data must be nonnegative, entry {i} is {}",
                    f[i]
                )));
            }
            let a = op.unwrap_or_else(|| SparseOp::identity(f.len()));
            // α KL(Au, f) = KL(αAu, αf)
            let scaled_f = f.iter().map(|v| v * alpha).collect();
            Term::dual(ProxKind::DualKl, alpha, vec![vec![a.scaled(alpha)]], Some(scaled_f), None, 1)
        }
    }
}

/// Gradient regularizer on one variable. The gradient is stored as one dual
/// row per axis so that the isotropic group of a pixel spans the rows.
pub fn gradient_term(norm: GradientNorm, alpha: f64, dims: &GridDims, epsilon: Option<f64>) -> Result<Term> {
    check_weight(alpha)?;
    let blocks: Vec<Vec<SparseOp>> = build_partials(dims)?.into_iter().map(|p| vec![p]).collect();
    let d = dims.ndim();
    match norm {
        GradientNorm::L1Aniso => Term::dual(ProxKind::DualClampShifted, alpha, blocks, None, None, 1),
        GradientNorm::L1Iso => Term::dual(ProxKind::DualBallPointwise, alpha, blocks, None, None, d),
        GradientNorm::L2 => Term::dual(ProxKind::DualQuadraticShifted, alpha, blocks, None, None, 1),
        GradientNorm::Frobenius => Term::dual(ProxKind::DualBallGlobal, alpha, blocks, None, None, 1),
        GradientNorm::Huber => {
            let eps = epsilon.ok_or_else(|| {
                Error::Parameter("the Huber gradient term needs a smoothing epsilon".into())
            })?;
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(Error::Parameter(format!(
                    "Huber smoothing must be nonnegative, got {eps}"
                )));
            }
            Term::dual(ProxKind::DualHuber, alpha, blocks, None, Some(eps), d)
        }
    }
}

/// Regularizer `α‖A u‖` for a user block operator. `blocks[r][c]` maps bound
/// variable `c` into dual row `r`; for the isotropic norm every dual row is
/// one component of the per-pixel group.
pub fn operator_term(
    norm: OperatorNorm,
    alpha: f64,
    num_primals: usize,
    blocks: Vec<Vec<SparseOp>>,
) -> Result<Term> {
    check_weight(alpha)?;
    if let Some(r) = blocks.iter().position(|row| row.len() != num_primals) {
        return Err(Error::Shape(format!(
            "block row {r} has {} blocks for {num_primals} primal variables",
            blocks[r].len()
        )));
    }
    match norm {
        OperatorNorm::L1Aniso => Term::dual(ProxKind::DualClampShifted, alpha, blocks, None, None, 1),
        OperatorNorm::L2 => Term::dual(ProxKind::DualQuadraticShifted, alpha, blocks, None, None, 1),
        OperatorNorm::Frobenius => Term::dual(ProxKind::DualBallGlobal, alpha, blocks, None, None, 1),
        OperatorNorm::L1Iso => {
            let groups = blocks.len();
            if let Some(row) = blocks.first() {
                let height = row.first().map_or(0, SparseOp::rows);
                if blocks.iter().any(|r| r.first().map_or(0, SparseOp::rows) != height) {
                    return Err(Error::Shape(
                        "isotropic operator terms need dual rows of equal height".into(),
                    ));
                }
            }
            Term::dual(ProxKind::DualBallPointwise, alpha, blocks, None, None, groups.max(1))
        }
    }
}

/// Linearized brightness constancy `α‖∇f2·v + f2 − f1‖` over the two flow
/// components `(v1, v2)` along axes 0 and 1.
pub fn optical_flow_term(norm: Norm, alpha: f64, f1: &[f64], f2: &[f64], dims: &GridDims) -> Result<Term> {
    check_weight(alpha)?;
    if dims.ndim() != 2 {
        return Err(Error::Unsupported(format!(
            "optical flow needs a 2-d grid, got {} axes",
            dims.ndim()
        )));
    }
    if f1.len() != dims.len() || f2.len() != dims.len() {
        return Err(Error::Shape(format!(
            "images of length {} and {} on a grid of {} pixels",
            f1.len(),
            f2.len(),
            dims.len()
        )));
    }
    check_finite("first image", f1)?;
    check_finite("second image", f2)?;
    let dx = build_partial(dims, 0)?.apply(f2)?;
    let dy = build_partial(dims, 1)?.apply(f2)?;
    let blocks = vec![vec![build_diagonal(&dx)?, build_diagonal(&dy)?]];
    // z - b with b = f1 - f2 is ∇f2·v + f2 - f1
    let shift: Vec<f64> = f1.iter().zip(f2).map(|(a, b)| a - b).collect();
    let kind = match norm {
        Norm::L1 => ProxKind::DualClampShifted,
        Norm::L2 => ProxKind::DualQuadraticShifted,
    };
    Term::dual(kind, alpha, blocks, Some(shift), None, 1)
}

/// Multi-label assignment `α Σ_i ⟨u_i, (f − l_i)²⟩` with `u` on the per-pixel
/// probability simplex. Binds one variable per label.
pub fn labeling_term(alpha: f64, f: &[f64], labels: &[f64], dims: &GridDims) -> Result<Term> {
    check_weight(alpha)?;
    if labels.is_empty() {
        return Err(Error::Parameter("labeling needs at least one label".into()));
    }
    if f.len() != dims.len() {
        return Err(Error::Shape(format!(
            "image of length {} on a grid of {} pixels",
            f.len(),
            dims.len()
        )));
    }
    check_finite("image", f)?;
    check_finite("labels", labels)?;
    let costs: Vec<f64> = labels
        .iter()
        .flat_map(|&l| f.iter().map(move |&v| (v - l) * (v - l)))
        .collect();
    Ok(Term::primal(
        ProxKind::PrimalSimplexLinear,
        alpha,
        vec![dims.len(); labels.len()],
        Some(costs),
        labels.len(),
    ))
}

/// `α‖curl v‖` or `α‖div v‖` (L1), or the squared L2 variants, over a planar
/// field `(v1, v2)`.
pub fn vectorfield_term(op: VectorFieldOp, norm: Norm, alpha: f64, dims: &GridDims) -> Result<Term> {
    check_weight(alpha)?;
    if dims.ndim() != 2 {
        return Err(Error::Unsupported(format!(
            "vector-field terms need a 2-d grid, got {} axes",
            dims.ndim()
        )));
    }
    let row = match op {
        VectorFieldOp::Curl => curl_blocks(dims)?.to_vec(),
        VectorFieldOp::Divergence => divergence_blocks(dims)?,
    };
    let kind = match norm {
        Norm::L1 => ProxKind::DualClampShifted,
        Norm::L2 => ProxKind::DualQuadraticShifted,
    };
    Term::dual(kind, alpha, vec![row], None, None, 1)
}

/// `α‖u‖₁` or `(α/2)‖u‖²`, the data term with `f = 0`.
pub fn identity_term(norm: Norm, alpha: f64, dims: &GridDims) -> Result<Term> {
    let data_norm = match norm {
        Norm::L1 => DataNorm::L1,
        Norm::L2 => DataNorm::L2,
    };
    data_term(data_norm, alpha, vec![0.0; dims.len()], None)
}

/// Value of the term's primal functional at `xs` (one slice per bound
/// variable). Constrained terms return `+∞` outside their domain.
pub fn eval_energy(term: &Term, xs: &[&[f64]]) -> Result<f64> {
    if xs.len() != term.arity() {
        return Err(Error::Shape(format!(
            "term binds {} variables, {} given",
            term.arity(),
            xs.len()
        )));
    }
    for (c, (x, &n)) in xs.iter().zip(term.var_lens()).enumerate() {
        if x.len() != n {
            return Err(Error::Shape(format!(
                "variable {c} has length {}, term expects {n}",
                x.len()
            )));
        }
    }
    let alpha = term.weight;
    if !term.is_dual() {
        let data = term.data.as_deref().unwrap_or(&[]);
        return Ok(match term.kind {
            ProxKind::PrimalL2Data => {
                0.5 * alpha * xs[0].iter().zip(data).map(|(x, f)| (x - f) * (x - f)).sum::<f64>()
            }
            ProxKind::PrimalL1Data => alpha * xs[0].iter().zip(data).map(|(x, f)| (x - f).abs()).sum::<f64>(),
            ProxKind::PrimalSimplexLinear => simplex_energy(alpha, xs, data),
            _ => 0.0,
        });
    }

    let mut z = Vec::with_capacity(term.dual_len());
    for row in &term.blocks {
        let mut out = vec![0.0; row[0].rows()];
        for (block, x) in row.iter().zip(xs) {
            block.apply_acc(x, &mut out);
        }
        z.extend(out);
    }
    if term.kind == ProxKind::DualKl {
        let f = term.data.as_deref().unwrap_or(&[]);
        return Ok(kl_energy(&z, f));
    }
    if let Some(b) = &term.data {
        z.iter_mut().zip(b).for_each(|(v, s)| *v -= s);
    }
    Ok(match term.kind {
        ProxKind::DualClampShifted => alpha * z.iter().map(|v| v.abs()).sum::<f64>(),
        ProxKind::DualQuadraticShifted => 0.5 * alpha * z.iter().map(|v| v * v).sum::<f64>(),
        ProxKind::DualBallGlobal => alpha * z.iter().map(|v| v * v).sum::<f64>().sqrt(),
        ProxKind::DualBallPointwise => alpha * group_norms(&z, term.groups).sum::<f64>(),
        ProxKind::DualHuber => {
            let eps = term.epsilon.unwrap_or(0.0);
            alpha * group_norms(&z, term.groups).map(|t| huber(t, eps)).sum::<f64>()
        }
        _ => unreachable!("primal kinds handled above"),
    })
}

fn group_norms(z: &[f64], groups: usize) -> impl Iterator<Item = f64> + '_ {
    let block = z.len() / groups;
    (0..block).map(move |p| (0..groups).map(|g| z[g * block + p].powi(2)).sum::<f64>().sqrt())
}

pub(crate) fn huber(t: f64, eps: f64) -> f64 {
    if t >= eps {
        t - eps / 2.0
    } else {
        t * t / (2.0 * eps)
    }
}

fn kl_energy(z: &[f64], f: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&zi, &fi) in z.iter().zip(f) {
        if zi < 0.0 || (zi == 0.0 && fi > 0.0) {
            return f64::INFINITY;
        }
        total += zi - fi;
        if fi > 0.0 {
            total += fi * (fi / zi).ln();
        }
    }
    total
}

const SIMPLEX_TOL: f64 = 1e-9;

fn simplex_energy(alpha: f64, xs: &[&[f64]], costs: &[f64]) -> f64 {
    let n = xs[0].len();
    for p in 0..n {
        let mut sum = 0.0;
        for x in xs {
            if x[p] < -SIMPLEX_TOL {
                return f64::INFINITY;
            }
            sum += x[p];
        }
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return f64::INFINITY;
        }
    }
    alpha
        * xs
            .iter()
            .enumerate()
            .map(|(i, x)| x.iter().zip(&costs[i * n..(i + 1) * n]).map(|(u, c)| u * c).sum::<f64>())
            .sum::<f64>()
}
