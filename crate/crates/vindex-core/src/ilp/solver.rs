//! Depth-first branch and bound over the binary level variables, with
//! bound-consistency propagation on the linear rows.
//!
//! Branching tries the `y[m][0]` block first (these carry the whole
//! objective), value 0 before 1, so cheap supports are explored early. The
//! lower bound of a subtree is simply the number of objective variables
//! already fixed to 1; everything else is handled by propagation: a row
//! whose activity interval leaves a variable only one feasible value fixes
//! that variable, and an empty interval fails the subtree.

use alloc::vec;
use alloc::vec::Vec;

use super::{IlpModel, IlpSolution};

/// Outcome of one solve call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// The node budget ran out before the search space was exhausted.
    Capped,
}

struct CapHit;

struct Search<'m> {
    model: &'m IlpModel,
    node_cap: u64,
    nodes: u64,
    /// -1 unfixed, else 0/1.
    vals: Vec<i8>,
    /// Rows containing each variable.
    var_rows: Vec<Vec<u32>>,
    /// Activity interval per row given the currently fixed variables.
    row_min: Vec<i64>,
    row_max: Vec<i64>,
    trail: Vec<(usize, i8)>,
    dirty: Vec<u32>,
    dirty_flag: Vec<bool>,
    is_obj_var: Vec<bool>,
    cur_obj: u64,
    branch_order: Vec<usize>,
    best_obj: Option<u64>,
    best_vals: Vec<i8>,
}

impl<'m> Search<'m> {
    fn new(model: &'m IlpModel, node_cap: u64) -> Self {
        let n = model.var_count();
        let mut var_rows = vec![Vec::new(); n];
        let mut row_min = Vec::with_capacity(model.rows.len());
        let mut row_max = Vec::with_capacity(model.rows.len());
        for (ri, row) in model.rows.iter().enumerate() {
            let mut lo = 0i64;
            let mut hi = 0i64;
            for &(v, c) in &row.terms {
                var_rows[v].push(ri as u32);
                lo += c.min(0);
                hi += c.max(0);
            }
            row_min.push(lo);
            row_max.push(hi);
        }
        let mut is_obj_var = vec![false; n];
        for &v in &model.objective {
            is_obj_var[v] = true;
        }
        let mut branch_order: Vec<usize> = model.objective.clone();
        let mut in_order = vec![false; n];
        for &v in &branch_order {
            in_order[v] = true;
        }
        branch_order.extend((0..n).filter(|&v| !in_order[v]));
        Search {
            model,
            node_cap,
            nodes: 0,
            vals: vec![-1; n],
            var_rows,
            row_min,
            row_max,
            trail: Vec::new(),
            dirty: Vec::new(),
            dirty_flag: vec![false; model.rows.len()],
            is_obj_var,
            cur_obj: 0,
            branch_order,
            best_obj: None,
            best_vals: Vec::new(),
        }
    }

    fn mark_dirty(&mut self, row: u32) {
        if !self.dirty_flag[row as usize] {
            self.dirty_flag[row as usize] = true;
            self.dirty.push(row);
        }
    }

    fn fix(&mut self, var: usize, val: i8) {
        debug_assert_eq!(self.vals[var], -1);
        self.vals[var] = val;
        self.trail.push((var, val));
        if self.is_obj_var[var] && val == 1 {
            self.cur_obj += 1;
        }
        for i in 0..self.var_rows[var].len() {
            let ri = self.var_rows[var][i];
            let row = &self.model.rows[ri as usize];
            let c = row
                .terms
                .iter()
                .find(|&&(v, _)| v == var)
                .map(|&(_, c)| c)
                .unwrap();
            self.row_min[ri as usize] += c * val as i64 - c.min(0);
            self.row_max[ri as usize] += c * val as i64 - c.max(0);
            self.mark_dirty(ri);
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (var, val) = self.trail.pop().unwrap();
            self.vals[var] = -1;
            if self.is_obj_var[var] && val == 1 {
                self.cur_obj -= 1;
            }
            for &ri in &self.var_rows[var] {
                let row = &self.model.rows[ri as usize];
                let c = row
                    .terms
                    .iter()
                    .find(|&&(v, _)| v == var)
                    .map(|&(_, c)| c)
                    .unwrap();
                self.row_min[ri as usize] -= c * val as i64 - c.min(0);
                self.row_max[ri as usize] -= c * val as i64 - c.max(0);
            }
        }
        for &ri in &self.dirty {
            self.dirty_flag[ri as usize] = false;
        }
        self.dirty.clear();
    }

    /// Propagates the dirty rows to a fixed point. Returns false on conflict,
    /// leaving the trail for the caller to unwind.
    fn propagate(&mut self) -> bool {
        while let Some(ri) = self.dirty.pop() {
            self.dirty_flag[ri as usize] = false;
            let row = &self.model.rows[ri as usize];
            let (lo, hi) = (row.lo, row.hi);
            let min = self.row_min[ri as usize];
            let max = self.row_max[ri as usize];
            if min > hi || max < lo {
                self.clear_dirty();
                return false;
            }
            // A variable whose value would push the interval out gets fixed
            // to the other value.
            let mut forced: Vec<(usize, i8)> = Vec::new();
            for &(v, c) in &row.terms {
                if self.vals[v] != -1 {
                    continue;
                }
                let min_if_one = min + c.max(0);
                let max_if_one = max + c.min(0);
                let one_ok = min_if_one <= hi && max_if_one >= lo;
                let min_if_zero = min - c.min(0);
                let max_if_zero = max - c.max(0);
                let zero_ok = min_if_zero <= hi && max_if_zero >= lo;
                match (zero_ok, one_ok) {
                    (false, false) => {
                        self.clear_dirty();
                        return false;
                    }
                    (true, false) => forced.push((v, 0)),
                    (false, true) => forced.push((v, 1)),
                    (true, true) => {}
                }
            }
            for (v, val) in forced {
                if self.vals[v] == -1 {
                    self.fix(v, val);
                } else if self.vals[v] != val {
                    self.clear_dirty();
                    return false;
                }
            }
        }
        true
    }

    fn clear_dirty(&mut self) {
        for &ri in &self.dirty {
            self.dirty_flag[ri as usize] = false;
        }
        self.dirty.clear();
    }

    fn dfs(&mut self, order_from: usize) -> Result<(), CapHit> {
        if let Some(best) = self.best_obj {
            // All objective coefficients sit on already-branched variables,
            // so the current count is the subtree's lower bound.
            if self.cur_obj >= best {
                return Ok(());
            }
        }
        let pos = (order_from..self.branch_order.len())
            .find(|&p| self.vals[self.branch_order[p]] == -1);
        let pos = match pos {
            Some(p) => p,
            None => {
                // Full assignment with no conflicting row: a new incumbent.
                self.best_obj = Some(self.cur_obj);
                self.best_vals.clear();
                self.best_vals.extend_from_slice(&self.vals);
                return Ok(());
            }
        };
        let var = self.branch_order[pos];
        self.nodes += 1;
        if self.nodes > self.node_cap {
            return Err(CapHit);
        }
        for val in [0i8, 1i8] {
            let mark = self.trail.len();
            self.fix(var, val);
            if self.propagate() {
                self.dfs(pos + 1)?;
            }
            self.undo_to(mark);
        }
        Ok(())
    }
}

/// Minimizes the model's objective. Returns the optimum, infeasibility, or
/// `Capped` when the node budget ran out first.
pub fn solve(model: &IlpModel, node_cap: u64) -> IlpSolution {
    let mut search = Search::new(model, node_cap);
    // Root propagation: every row starts dirty.
    for ri in 0..model.rows.len() {
        search.mark_dirty(ri as u32);
    }
    if !search.propagate() {
        return IlpSolution {
            status: SolveStatus::Infeasible,
            objective: None,
            assignment: None,
        };
    }
    search.clear_dirty();
    let capped = search.dfs(0).is_err();
    match (capped, search.best_obj) {
        (true, _) => IlpSolution {
            status: SolveStatus::Capped,
            objective: search.best_obj,
            assignment: None,
        },
        (false, None) => IlpSolution {
            status: SolveStatus::Infeasible,
            objective: None,
            assignment: None,
        },
        (false, Some(obj)) => IlpSolution {
            status: SolveStatus::Optimal,
            objective: Some(obj),
            assignment: Some(search.best_vals.iter().map(|&v| v == 1).collect()),
        },
    }
}
