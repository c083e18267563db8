//! Problem builder: primal variables, bound terms and their dual slots.
//!
//! The problem owns the iteration state, so a solve can be stopped, its
//! parameters changed and the iteration continued from where it left off.

use ndarray::{ArrayBase, ArrayD, Data, Dimension};

use crate::error::{Error, Result};
use crate::linalg::{devectorize, vectorize, GridDims, SparseOp};
use crate::solver::{ResidualReport, SolverState};
use crate::terms::{eval_energy, Term};

/// A term together with the primal variables it is bound to.
#[derive(Debug, Clone)]
pub struct BoundTerm {
    pub(crate) term: Term,
    pub(crate) vars: Vec<usize>,
    pub(crate) dual_slot: Option<usize>,
}

impl BoundTerm {
    pub fn term(&self) -> &Term {
        &self.term
    }

    /// Indices of the bound primal variables, in the term's column order.
    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    /// Index of the term's dual variable, `None` for primal terms.
    pub fn dual_slot(&self) -> Option<usize> {
        self.dual_slot
    }
}

/// Position of one dual variable inside the concatenated dual vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualSlot {
    pub term_id: usize,
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Problem {
    vars: Vec<GridDims>,
    terms: Vec<BoundTerm>,
    pub(crate) state: SolverState,
    pub(crate) steps_stale: bool,
    pub(crate) last_report: Option<ResidualReport>,
    pub(crate) has_run: bool,
}

impl Problem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a primal variable initialized to zero and returns its index.
    pub fn add_primal_var(&mut self, dims: GridDims) -> usize {
        let n = dims.len();
        self.vars.push(dims);
        self.state.x.push(vec![0.0; n]);
        self.state.x_prev.push(vec![0.0; n]);
        self.state.x_bar.push(vec![0.0; n]);
        self.state.tau.push(vec![1.0; n]);
        self.steps_stale = true;
        self.vars.len() - 1
    }

    /// Binds `term` to the variables `bound` and returns the term id.
    /// Dualized terms get a zero-initialized dual variable of their own.
    pub fn add_term(&mut self, term: Term, bound: &[usize]) -> Result<usize> {
        let id = self.terms.len();
        self.check_binding(id, &term, bound)?;
        let dual_slot = if term.is_dual() {
            let len = term.dual_len();
            self.state.y.push(vec![0.0; len]);
            self.state.y_prev.push(vec![0.0; len]);
            self.state.sigma.push(vec![1.0; len]);
            Some(self.state.y.len() - 1)
        } else {
            None
        };
        self.terms.push(BoundTerm {
            term,
            vars: bound.to_vec(),
            dual_slot,
        });
        self.invalidate();
        self.steps_stale = true;
        Ok(id)
    }

    fn check_binding(&self, id: usize, term: &Term, bound: &[usize]) -> Result<()> {
        if bound.len() != term.arity() {
            return Err(Error::Shape(format!(
                "term {id} ({:?}) binds {} variables but {} were given",
                term.kind(),
                term.arity(),
                bound.len()
            )));
        }
        for (c, (&v, &need)) in bound.iter().zip(term.var_lens()).enumerate() {
            let dims = self.vars.get(v).ok_or_else(|| {
                Error::Shape(format!(
                    "term {id} ({:?}): variable {v} does not exist ({} registered)",
                    term.kind(),
                    self.vars.len()
                ))
            })?;
            if dims.len() != need {
                return Err(Error::Shape(format!(
                    "term {id} ({:?}): column {c} expects length {need}, variable {v} has {} elements",
                    term.kind(),
                    dims.len()
                )));
            }
        }
        Ok(())
    }

    /// Swaps in a new term with the same binding and dual layout, e.g. after
    /// changing its weight or data. The iteration state is kept.
    pub fn replace_term(&mut self, id: usize, term: Term) -> Result<()> {
        let old = self
            .terms
            .get(id)
            .ok_or_else(|| Error::Layout(format!("no term with id {id}")))?;
        if term.is_dual() != old.term.is_dual() || term.dual_len() != old.term.dual_len() {
            return Err(Error::Layout(format!(
                "term {id}: replacement changes the dual layout ({} -> {} entries)",
                old.term.dual_len(),
                term.dual_len()
            )));
        }
        let bound = old.vars.clone();
        self.check_binding(id, &term, &bound).map_err(|e| Error::Layout(e.to_string()))?;
        self.terms[id].term = term;
        self.invalidate();
        self.steps_stale = true;
        Ok(())
    }

    /// Changes the weight of term `id`.
    pub fn set_term_weight(&mut self, id: usize, alpha: f64) -> Result<()> {
        let term = self
            .terms
            .get(id)
            .ok_or_else(|| Error::Layout(format!("no term with id {id}")))?
            .term
            .with_weight(alpha)?;
        self.replace_term(id, term)
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_dims(&self, i: usize) -> Option<&GridDims> {
        self.vars.get(i)
    }

    pub fn terms(&self) -> &[BoundTerm] {
        &self.terms
    }

    /// Offsets of every dual variable in the concatenated dual vector.
    pub fn dual_layout(&self) -> Vec<DualSlot> {
        let mut offset = 0;
        self.terms
            .iter()
            .enumerate()
            .filter(|(_, t)| t.dual_slot.is_some())
            .map(|(term_id, t)| {
                let len = t.term.dual_len();
                let slot = DualSlot { term_id, offset, len };
                offset += len;
                slot
            })
            .collect()
    }

    pub fn primal_len(&self) -> usize {
        self.vars.iter().map(GridDims::len).sum()
    }

    pub fn dual_len(&self) -> usize {
        self.terms.iter().map(|t| t.term.dual_len()).sum()
    }

    /// Offset of each primal variable in the concatenated primal vector.
    pub fn primal_offsets(&self) -> Vec<usize> {
        self.vars
            .iter()
            .scan(0, |acc, d| {
                let o = *acc;
                *acc += d.len();
                Some(o)
            })
            .collect()
    }

    /// All dualized terms as one operator from the concatenated primal
    /// vector to the concatenated dual vector.
    pub fn stacked_operator(&self) -> Result<SparseOp> {
        let offsets = self.primal_offsets();
        let mut triplets = Vec::new();
        let mut row0 = 0;
        for bt in self.terms.iter().filter(|t| t.term.is_dual()) {
            for row in bt.term.blocks() {
                for (c, block) in row.iter().enumerate() {
                    let col0 = offsets[bt.vars[c]];
                    triplets.extend(block.triplets().map(|(r, j, v)| (row0 + r, col0 + j, v)));
                }
                row0 += row[0].rows();
            }
        }
        SparseOp::from_triplets(row0, self.primal_len(), triplets)
    }

    fn var_index(&self, i: usize) -> Result<&GridDims> {
        self.vars.get(i).ok_or_else(|| {
            Error::Shape(format!(
                "primal variable {i} does not exist ({} registered)",
                self.vars.len()
            ))
        })
    }

    /// Current value of primal variable `i`, shaped like its grid.
    pub fn get_primal(&self, i: usize) -> Result<ArrayD<f64>> {
        let dims = self.var_index(i)?;
        devectorize(&self.state.x[i], dims)
    }

    /// Current value of primal variable `i` in vectorized layout.
    pub fn primal(&self, i: usize) -> Result<&[f64]> {
        self.var_index(i)?;
        Ok(&self.state.x[i])
    }

    /// Warm-starts variable `i` (both the iterate and its extrapolation).
    pub fn set_primal<S, D>(&mut self, i: usize, data: &ArrayBase<S, D>) -> Result<()>
    where
        S: Data<Elem = f64>,
        D: Dimension,
    {
        let v = vectorize(data, self.var_index(i)?)?;
        self.set_primal_vec(i, &v)
    }

    pub fn set_primal_vec(&mut self, i: usize, data: &[f64]) -> Result<()> {
        let n = self.var_index(i)?.len();
        if data.len() != n {
            return Err(Error::Shape(format!(
                "variable {i} has {n} elements, got {}",
                data.len()
            )));
        }
        self.state.x[i].copy_from_slice(data);
        self.state.x_prev[i].copy_from_slice(data);
        self.state.x_bar[i].copy_from_slice(data);
        self.invalidate();
        Ok(())
    }

    /// Dual variable of term `id`, `None` for primal terms.
    pub fn dual(&self, id: usize) -> Option<&[f64]> {
        let slot = self.terms.get(id)?.dual_slot?;
        Some(&self.state.y[slot])
    }

    pub fn set_dual(&mut self, id: usize, data: &[f64]) -> Result<()> {
        let slot = self
            .terms
            .get(id)
            .and_then(|t| t.dual_slot)
            .ok_or_else(|| Error::Layout(format!("term {id} has no dual variable")))?;
        if data.len() != self.state.y[slot].len() {
            return Err(Error::Shape(format!(
                "dual variable of term {id} has {} elements, got {}",
                self.state.y[slot].len(),
                data.len()
            )));
        }
        self.state.y[slot].copy_from_slice(data);
        self.state.y_prev[slot].copy_from_slice(data);
        self.invalidate();
        Ok(())
    }

    /// Sum of all term energies at the current primal values.
    pub fn total_energy(&self) -> f64 {
        self.energy_at(&self.state.x)
    }

    /// Sum of all term energies at the given per-variable values.
    pub fn energy_at(&self, xs: &[Vec<f64>]) -> f64 {
        self.terms
            .iter()
            .map(|bt| {
                let bound: Vec<&[f64]> = bt.vars.iter().map(|&v| xs[v].as_slice()).collect();
                eval_energy(&bt.term, &bound).unwrap_or(f64::INFINITY)
            })
            .sum()
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    /// Zeroes all primal and dual variables and the iteration counter.
    pub fn reset(&mut self) {
        for v in self
            .state
            .x
            .iter_mut()
            .chain(&mut self.state.x_prev)
            .chain(&mut self.state.x_bar)
            .chain(&mut self.state.y)
            .chain(&mut self.state.y_prev)
        {
            v.iter_mut().for_each(|e| *e = 0.0);
        }
        self.state.k = 0;
        self.has_run = false;
        self.invalidate();
    }

    fn invalidate(&mut self) {
        self.last_report = None;
    }
}
