//! Branch-and-bound for convex quadratic programs with binary variables.
//!
//! Each node fixes a subset of the binaries. Fixed variables are substituted
//! out of the relaxation before it reaches [`solve_qp`], so the interior-point
//! solver only ever sees the free part of the problem. Nodes are selected by
//! best bound, except that the search dives depth-first until the first
//! incumbent exists.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qp::{
    is_finite_bound, solve_qp, QpError, QpSettings, QpStatus, QuadraticProgram, SparseMatrix,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BnbError {
    #[error("binary index {0} is out of range")]
    BadBinaryIndex(usize),
    #[error("binary variable {0} is listed twice")]
    DuplicateBinary(usize),
    #[error("binary variable {index} has bounds [{lower}, {upper}] that exclude both 0 and 1")]
    EmptyBinaryDomain { index: usize, lower: f64, upper: f64 },
    #[error("warm start has {got} entries, problem has {expected} variables")]
    WarmStartDimension { expected: usize, got: usize },
    #[error("tolerances and time limit must be positive")]
    BadParams,
    #[error("no fractional binary to branch on")]
    NothingToBranch,
    #[error(transparent)]
    Qp(#[from] QpError),
}

/// A convex QP in which the variables listed in `binary_vars` must be 0 or 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedIntegerQp {
    pub base: QuadraticProgram,
    pub binary_vars: Vec<usize>,
}

impl MixedIntegerQp {
    /// Validates the base problem and clamps binary bounds to `[0, 1]`.
    pub fn new(mut base: QuadraticProgram, mut binary_vars: Vec<usize>) -> Result<Self, BnbError> {
        base.validate()?;
        binary_vars.sort_unstable();
        for pair in binary_vars.windows(2) {
            if pair[0] == pair[1] {
                return Err(BnbError::DuplicateBinary(pair[0]));
            }
        }
        for &j in &binary_vars {
            if j >= base.num_vars() {
                return Err(BnbError::BadBinaryIndex(j));
            }
            let (lower, upper) = (base.lb[j].max(0.0).ceil(), base.ub[j].min(1.0).floor());
            if lower > upper {
                return Err(BnbError::EmptyBinaryDomain {
                    index: j,
                    lower: base.lb[j],
                    upper: base.ub[j],
                });
            }
            base.lb[j] = lower;
            base.ub[j] = upper;
        }
        Ok(MixedIntegerQp { base, binary_vars })
    }

    pub fn num_vars(&self) -> usize {
        self.base.num_vars()
    }

    /// Largest violation of any row, bound or integrality requirement.
    pub fn violation(&self, x: &[f64]) -> (f64, f64) {
        let mut primal = 0.0f64;
        for (ax, (&lo, &hi)) in self
            .base
            .a
            .mul_vec(x)
            .iter()
            .zip(self.base.lower.iter().zip(&self.base.upper))
        {
            primal = primal.max(lo - ax).max(ax - hi);
        }
        for (&v, (&lo, &hi)) in x.iter().zip(self.base.lb.iter().zip(&self.base.ub)) {
            primal = primal.max(lo - v).max(v - hi);
        }
        let integrality = self
            .binary_vars
            .iter()
            .map(|&j| (x[j] - x[j].round()).abs())
            .fold(0.0f64, f64::max);
        if x.iter().any(|v| !v.is_finite()) {
            return (f64::INFINITY, f64::INFINITY);
        }
        (primal, integrality)
    }

    pub fn is_feasible(&self, x: &[f64], feas_tol: f64, int_tol: f64) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        let (primal, integrality) = self.violation(x);
        primal <= feas_tol && integrality <= int_tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnbParams {
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    pub int_tol: f64,
    pub feas_tol: f64,
    pub gap_tol: f64,
    /// Recorded for provenance; node selection and branching have no random choices.
    pub seed: u64,
    pub node_limit: Option<u64>,
    /// Keep search-log lines in the result.
    pub log: bool,
}

impl Default for BnbParams {
    fn default() -> Self {
        BnbParams {
            time_limit: 600.0,
            int_tol: 1e-5,
            feas_tol: 1e-6,
            gap_tol: 1e-6,
            seed: 0,
            node_limit: None,
            log: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BnbStatus {
    Optimal,
    TimeLimit,
    NodeLimit,
    Infeasible,
    /// The tree was exhausted but some relaxations could not be solved, so the
    /// bound is left open at their parents' values.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct BnbStats {
    pub nodes: u64,
    /// First incumbent value.
    pub f0: Option<f64>,
    /// Incumbent value once the root node has been processed.
    pub f1: Option<f64>,
    pub warm_start_accepted: bool,
    pub max_depth: usize,
    pub failed_relaxations: u64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnbResult {
    pub x: Option<Vec<f64>>,
    /// Upper bound (incumbent value), `+∞` without incumbent.
    pub objective: f64,
    /// Best proven lower bound.
    pub bound: f64,
    pub gap: f64,
    pub status: BnbStatus,
    pub stats: BnbStats,
    pub log: Vec<String>,
}

/// `(UB − LB) / max(|UB|, 1e−10)`
pub fn mip_gap(ub: f64, lb: f64) -> f64 {
    if !ub.is_finite() {
        return f64::INFINITY;
    }
    ((ub - lb) / ub.abs().max(1e-10)).max(0.0)
}

/// Picks the binary closest to ½ among those farther than `int_tol` from an
/// integer. Ties go to the lowest position in `binary_vars`.
pub fn most_fractional(x: &[f64], binary_vars: &[usize], int_tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in binary_vars {
        let frac = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
        if frac <= int_tol {
            continue;
        }
        let distance = (x[j] - 0.5).abs();
        if best.map_or(true, |(_, d)| distance < d) {
            best = Some((j, distance));
        }
    }
    best.map(|(j, _)| j)
}

const FREE: u8 = 2;

#[derive(Debug, Clone)]
struct Node {
    id: u64,
    depth: usize,
    bound: f64,
    /// Per binary (in `binary_vars` order): 0, 1 or [`FREE`].
    fixing: Vec<u8>,
}

/// Branching result: the chosen variable and the two child fixings.
#[derive(Debug, Clone)]
pub struct Branch {
    pub var: usize,
    pub down: Vec<(usize, f64)>,
    pub up: Vec<(usize, f64)>,
}

/// Splits on the most fractional binary of `relaxation`, appending `x_j = 0`
/// and `x_j = 1` to the parent's fixings.
pub fn branch(
    fixed: &[(usize, f64)],
    relaxation: &[f64],
    binary_vars: &[usize],
    int_tol: f64,
) -> Result<Branch, BnbError> {
    let var = most_fractional(relaxation, binary_vars, int_tol).ok_or(BnbError::NothingToBranch)?;
    let mut down = fixed.to_vec();
    down.push((var, 0.0));
    let mut up = fixed.to_vec();
    up.push((var, 1.0));
    Ok(Branch { var, down, up })
}

struct Queued(Node);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    // max-heap: smallest bound first, then deepest, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .bound
            .total_cmp(&self.0.bound)
            .then(self.0.depth.cmp(&other.0.depth))
            .then(other.0.id.cmp(&self.0.id))
    }
}

/// Relaxation with some variables substituted by constants.
struct Reduced {
    qp: QuadraticProgram,
    free: Vec<usize>,
    constant: f64,
}

enum Relaxation {
    Solved { x: Vec<f64>, objective: f64 },
    Infeasible,
    Failed,
}

/// Search state shared by [`solve_miqp`] and warm-start injection.
pub struct BnbState<'a> {
    prob: &'a MixedIntegerQp,
    params: BnbParams,
    rows: Vec<Vec<(usize, f64)>>,
    position: Vec<Option<usize>>,
    open: BinaryHeap<Queued>,
    dive: Vec<Node>,
    incumbent: Option<Vec<f64>>,
    ub: f64,
    lb: f64,
    /// Bounds of nodes whose relaxation could not be solved.
    lost: Vec<f64>,
    next_id: u64,
    stats: BnbStats,
    log: Vec<String>,
    qp_settings: QpSettings,
}

impl<'a> BnbState<'a> {
    pub fn new(prob: &'a MixedIntegerQp, params: BnbParams) -> Result<Self, BnbError> {
        let tols = [params.int_tol, params.feas_tol, params.gap_tol, params.time_limit];
        if tols.iter().any(|&v| !(v > 0.0)) {
            return Err(BnbError::BadParams);
        }
        prob.base.check_psd()?;
        let mut position = vec![None; prob.num_vars()];
        for (k, &j) in prob.binary_vars.iter().enumerate() {
            position[j] = Some(k);
        }
        Ok(BnbState {
            prob,
            rows: prob.base.a.rows(),
            position,
            open: BinaryHeap::new(),
            dive: Vec::new(),
            incumbent: None,
            ub: f64::INFINITY,
            lb: f64::NEG_INFINITY,
            lost: Vec::new(),
            next_id: 0,
            stats: BnbStats::default(),
            log: Vec::new(),
            qp_settings: QpSettings {
                tol: params.feas_tol.min(1e-6),
                validate_psd: false,
                ..QpSettings::default()
            },
            params,
        })
    }

    pub fn upper_bound(&self) -> f64 {
        self.ub
    }

    pub fn incumbent(&self) -> Option<&[f64]> {
        self.incumbent.as_deref()
    }

    /// Accepts `x` as the new incumbent iff it is feasible and strictly better
    /// than the current one. Open nodes that can no longer improve are dropped.
    pub fn inject_incumbent(&mut self, x: &[f64]) -> bool {
        if !self
            .prob
            .is_feasible(x, self.params.feas_tol, self.params.int_tol)
        {
            return false;
        }
        let mut x = x.to_vec();
        for &j in &self.prob.binary_vars {
            x[j] = x[j].round();
        }
        let value = self.prob.base.objective(&x);
        if !(value < self.ub) {
            return false;
        }
        self.ub = value;
        self.incumbent = Some(x);
        if self.stats.f0.is_none() {
            self.stats.f0 = Some(value);
        }
        let gap_tol = self.params.gap_tol;
        let ub = self.ub;
        let kept: Vec<Queued> = self
            .open
            .drain()
            .filter(|q| !prunable(ub, q.0.bound, gap_tol))
            .collect();
        self.open = kept.into_iter().collect();
        self.dive.retain(|n| !prunable(ub, n.bound, gap_tol));
        true
    }

    fn reduce(&self, fixed: &[(usize, f64)]) -> Option<Reduced> {
        let base = &self.prob.base;
        let n = base.num_vars();
        let mut value: Vec<Option<f64>> = vec![None; n];
        for &(j, v) in fixed {
            if v < base.lb[j] - self.params.feas_tol || v > base.ub[j] + self.params.feas_tol {
                return None;
            }
            value[j] = Some(v);
        }
        let mut new_index = vec![usize::MAX; n];
        let mut free = Vec::with_capacity(n - fixed.len());
        for j in 0..n {
            if value[j].is_none() {
                new_index[j] = free.len();
                free.push(j);
            }
        }
        let mut qp = QuadraticProgram::new(free.len());
        qp.p = SparseMatrix::zeros(free.len(), free.len());
        let mut constant = 0.0;
        for (jj, &j) in free.iter().enumerate() {
            qp.q[jj] = base.q[j];
            qp.lb[jj] = base.lb[j];
            qp.ub[jj] = base.ub[j];
        }
        for &(j, v) in fixed {
            constant += base.q[j] * v;
        }
        for &(r, c, p) in &base.p.entries {
            match (value[r], value[c]) {
                (None, None) => qp.p.push(new_index[r], new_index[c], p),
                (None, Some(vc)) => qp.q[new_index[r]] += p * vc,
                (Some(vr), Some(vc)) => constant += 0.5 * p * vr * vc,
                (Some(_), None) => {}
            }
        }
        for (r, coefs) in self.rows.iter().enumerate() {
            let mut shift = 0.0;
            let mut kept = Vec::with_capacity(coefs.len());
            for &(j, a) in coefs {
                match value[j] {
                    Some(v) => shift += a * v,
                    None => kept.push((new_index[j], a)),
                }
            }
            let (lo, hi) = (base.lower[r], base.upper[r]);
            let lo = if is_finite_bound(lo) { lo - shift } else { lo };
            let hi = if is_finite_bound(hi) { hi - shift } else { hi };
            if kept.is_empty() {
                if lo > self.params.feas_tol || hi < -self.params.feas_tol {
                    return None;
                }
                continue;
            }
            qp.add_row(&kept, lo, hi);
        }
        Some(Reduced { qp, free, constant })
    }

    fn relax(&self, fixed: &[(usize, f64)]) -> Result<Relaxation, BnbError> {
        let Some(reduced) = self.reduce(fixed) else {
            return Ok(Relaxation::Infeasible);
        };
        let mut sol = solve_qp(&reduced.qp, &self.qp_settings)?;
        if sol.status == QpStatus::MaxIterations {
            let retry = QpSettings {
                max_iter: 1000,
                tol: self.qp_settings.tol * 10.0,
                ..self.qp_settings.clone()
            };
            sol = solve_qp(&reduced.qp, &retry)?;
        }
        match sol.status {
            QpStatus::Infeasible => Ok(Relaxation::Infeasible),
            QpStatus::MaxIterations => Ok(Relaxation::Failed),
            QpStatus::Optimal => {
                let mut x = vec![0.0; self.prob.num_vars()];
                for (jj, &j) in reduced.free.iter().enumerate() {
                    x[j] = sol.x[jj];
                }
                for &(j, v) in fixed {
                    x[j] = v;
                }
                Ok(Relaxation::Solved {
                    objective: sol.objective + reduced.constant,
                    x,
                })
            }
        }
    }

    fn fixings(&self, node: &Node) -> Vec<(usize, f64)> {
        self.prob
            .binary_vars
            .iter()
            .zip(&node.fixing)
            .filter(|(_, &f)| f != FREE)
            .map(|(&j, &f)| (j, f as f64))
            .collect()
    }

    /// Fixes binaries at `fixing`, rounds the rest of `x`'s binaries and
    /// re-solves the continuous part.
    fn polish(&mut self, x: &[f64]) -> Result<(), BnbError> {
        let fixed: Vec<(usize, f64)> = self
            .prob
            .binary_vars
            .iter()
            .map(|&j| (j, x[j].round()))
            .collect();
        if let Relaxation::Solved { x, .. } = self.relax(&fixed)? {
            self.inject_incumbent(&x);
        }
        Ok(())
    }

    fn global_lb(&self) -> f64 {
        let open = self
            .open
            .peek()
            .map(|q| q.0.bound)
            .into_iter()
            .chain(self.dive.iter().map(|n| n.bound))
            .chain(self.lost.iter().copied())
            .fold(f64::INFINITY, f64::min);
        open.min(self.ub)
    }

    fn push(&mut self, node: Node) {
        if self.incumbent.is_none() {
            self.dive.push(node);
        } else {
            self.open.push(Queued(node));
        }
    }

    fn pop(&mut self) -> Option<Node> {
        if let Some(node) = self.dive.pop() {
            if self.incumbent.is_none() || self.dive.is_empty() {
                return Some(node);
            }
            // first incumbent found: hand the rest of the dive to the heap
            self.open.push(Queued(node));
            for n in self.dive.drain(..) {
                self.open.push(Queued(n));
            }
        }
        self.open.pop().map(|q| q.0)
    }

    fn child(&mut self, parent: &Node, k: usize, value: u8, bound: f64) -> Node {
        let mut fixing = parent.fixing.clone();
        fixing[k] = value;
        self.next_id += 1;
        Node {
            id: self.next_id,
            depth: parent.depth + 1,
            bound,
            fixing,
        }
    }

    fn record(&mut self, id: u64, depth: usize) {
        let lb = self.global_lb();
        if lb > self.lb {
            self.lb = lb;
        }
        let line = format!(
            "node {id} lb={} ub={} gap={} depth={depth}",
            fmt_value(self.lb),
            fmt_value(self.ub),
            fmt_value(mip_gap(self.ub, self.lb)),
        );
        log::debug!("{line}");
        if self.params.log {
            self.log.push(line);
        }
    }

    fn process(&mut self, node: Node) -> Result<(), BnbError> {
        if prunable(self.ub, node.bound, self.params.gap_tol) {
            return Ok(());
        }
        self.stats.nodes += 1;
        self.stats.max_depth = self.stats.max_depth.max(node.depth);
        let fixed = self.fixings(&node);
        let (x, objective) = match self.relax(&fixed)? {
            Relaxation::Infeasible => return Ok(()),
            Relaxation::Failed => {
                self.stats.failed_relaxations += 1;
                match node.fixing.iter().position(|&f| f == FREE) {
                    Some(k) => {
                        let down = self.child(&node, k, 0, node.bound);
                        let up = self.child(&node, k, 1, node.bound);
                        self.push(down);
                        self.push(up);
                    }
                    None => self.lost.push(node.bound),
                }
                return Ok(());
            }
            Relaxation::Solved { x, objective } => (x, objective),
        };
        let bound = objective.max(node.bound);
        if prunable(self.ub, bound, self.params.gap_tol) {
            return Ok(());
        }
        let Some(var) = most_fractional(&x, &self.prob.binary_vars, self.params.int_tol) else {
            return self.polish(&x);
        };
        let k = self.position[var].expect("branching variable is binary");
        let down = self.child(&node, k, 0, bound);
        let up = self.child(&node, k, 1, bound);
        // the child on the rounding side of x_j is explored first while diving
        if x[var] >= 0.5 {
            self.push(down);
            self.push(up);
        } else {
            self.push(up);
            self.push(down);
        }
        Ok(())
    }

    /// Runs the search from the root until it is exhausted or a limit hits.
    pub fn run(mut self) -> Result<BnbResult, BnbError> {
        let start = Instant::now();
        let root = Node {
            id: 0,
            depth: 0,
            bound: f64::NEG_INFINITY,
            fixing: self
                .prob
                .binary_vars
                .iter()
                .map(|&j| {
                    let (lo, hi) = (self.prob.base.lb[j], self.prob.base.ub[j]);
                    if lo == hi {
                        lo as u8
                    } else {
                        FREE
                    }
                })
                .collect(),
        };
        let mut stopped = None;
        self.process(root)?;
        self.stats.f1 = self.incumbent.as_ref().map(|_| self.ub);
        self.record(0, 0);
        while let Some(node) = self.pop() {
            if start.elapsed().as_secs_f64() >= self.params.time_limit {
                self.push(node);
                stopped = Some(BnbStatus::TimeLimit);
                break;
            }
            if self
                .params
                .node_limit
                .is_some_and(|limit| self.stats.nodes >= limit)
            {
                self.push(node);
                stopped = Some(BnbStatus::NodeLimit);
                break;
            }
            let (id, depth) = (node.id, node.depth);
            self.process(node)?;
            self.record(id, depth);
        }
        self.record(self.next_id, 0);
        self.stats.wall_time = start.elapsed().as_secs_f64();
        let gap = mip_gap(self.ub, self.lb);
        let status = match (stopped, &self.incumbent) {
            (_, Some(_)) if gap <= self.params.gap_tol => BnbStatus::Optimal,
            (Some(s), _) => s,
            (None, None) if self.lost.is_empty() => BnbStatus::Infeasible,
            (None, _) => BnbStatus::Stalled,
        };
        Ok(BnbResult {
            x: self.incumbent,
            objective: self.ub,
            bound: self.lb,
            gap,
            status,
            stats: self.stats,
            log: self.log,
        })
    }
}

fn prunable(ub: f64, bound: f64, gap_tol: f64) -> bool {
    ub.is_finite() && mip_gap(ub, bound) <= gap_tol
}

fn fmt_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6e}")
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Solves `prob` to the gap tolerance in `params`, starting from `warm_start`
/// when it is feasible.
pub fn solve_miqp(
    prob: &MixedIntegerQp,
    params: &BnbParams,
    warm_start: Option<&[f64]>,
) -> Result<BnbResult, BnbError> {
    let mut state = BnbState::new(prob, params.clone())?;
    if let Some(x) = warm_start {
        if x.len() != prob.num_vars() {
            return Err(BnbError::WarmStartDimension {
                expected: prob.num_vars(),
                got: x.len(),
            });
        }
        state.stats.warm_start_accepted = state.inject_incumbent(x);
    }
    state.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_binary(target: f64) -> MixedIntegerQp {
        // min (x − target)² = x² − 2·target·x + target²; constant dropped
        let mut qp = QuadraticProgram::new(1);
        qp.p = SparseMatrix::from_dense(&[vec![2.0]]);
        qp.q = vec![-2.0 * target];
        MixedIntegerQp::new(qp, vec![0]).unwrap()
    }

    #[test]
    fn rounds_to_nearest_binary() {
        for (target, expected_x, expected_value) in [(0.4, 0.0, 0.16), (0.7, 1.0, 0.09)] {
            let res = solve_miqp(&scalar_binary(target), &BnbParams::default(), None).unwrap();
            assert_eq!(res.status, BnbStatus::Optimal);
            assert_eq!(res.x.unwrap()[0], expected_x);
            let value = res.objective + target * target;
            assert!((value - expected_value).abs() < 1e-9);
        }
    }

    #[test]
    fn pure_qp_needs_no_branching() {
        let mut qp = QuadraticProgram::new(2);
        qp.p = SparseMatrix::identity(2);
        qp.q = vec![-1.0, -2.0];
        let prob = MixedIntegerQp::new(qp.clone(), vec![]).unwrap();
        let res = solve_miqp(&prob, &BnbParams::default(), None).unwrap();
        assert_eq!(res.status, BnbStatus::Optimal);
        assert_eq!(res.stats.nodes, 1);
        let direct = solve_qp(&qp, &QpSettings::default()).unwrap();
        assert!((res.objective - direct.objective).abs() < 1e-9);
    }

    #[test]
    fn branching_rule() {
        let bins = [0, 1, 2];
        assert_eq!(most_fractional(&[0.2, 0.5, 0.9], &bins, 1e-5), Some(1));
        assert_eq!(most_fractional(&[0.5, 0.5, 0.0], &bins, 1e-5), Some(0));
        assert_eq!(most_fractional(&[0.0, 1.0, 1.0], &bins, 1e-5), None);
        assert!(matches!(
            branch(&[], &[0.0, 1.0, 1.0], &bins, 1e-5),
            Err(BnbError::NothingToBranch)
        ));
        let b = branch(&[(2, 1.0)], &[0.3, 0.5, 1.0], &bins, 1e-5).unwrap();
        assert_eq!(b.var, 1);
        assert_eq!(b.down, vec![(2, 1.0), (1, 0.0)]);
        assert_eq!(b.up, vec![(2, 1.0), (1, 1.0)]);
    }

    #[test]
    fn incumbent_injection() {
        // min ½x² + ½y² − y, x + y ≥ 1, y binary
        let mut qp = QuadraticProgram::new(2);
        qp.p = SparseMatrix::identity(2);
        qp.q = vec![0.0, -1.0];
        qp.add_row(&[(0, 1.0), (1, 1.0)], 1.0, f64::INFINITY);
        let prob = MixedIntegerQp::new(qp, vec![1]).unwrap();
        let mut state = BnbState::new(&prob, BnbParams::default()).unwrap();
        assert!(!state.inject_incumbent(&[0.0, 0.0]));
        assert!(state.inject_incumbent(&[1.0, 0.0]));
        assert_eq!(state.upper_bound(), 0.5);
        assert!(!state.inject_incumbent(&[2.0, 0.0]));
        assert_eq!(state.upper_bound(), 0.5);
        assert!(!state.inject_incumbent(&[0.0, 0.5]));
        assert!(state.inject_incumbent(&[0.0, 1.0]));
        assert_eq!(state.upper_bound(), -0.5);
    }

    #[test]
    fn infeasible_problem() {
        let mut qp = QuadraticProgram::new(2);
        qp.p = SparseMatrix::identity(2);
        qp.add_row(&[(0, 1.0), (1, 1.0)], 1.5, 1.5);
        qp.add_row(&[(0, 1.0), (1, -1.0)], 0.2, 0.3);
        let prob = MixedIntegerQp::new(qp, vec![0, 1]).unwrap();
        let res = solve_miqp(&prob, &BnbParams::default(), None).unwrap();
        assert_eq!(res.status, BnbStatus::Infeasible);
        assert!(res.x.is_none());
    }

    #[test]
    fn log_lines_have_stable_format() {
        let params = BnbParams {
            log: true,
            ..BnbParams::default()
        };
        let res = solve_miqp(&scalar_binary(0.4), &params, None).unwrap();
        let re = |s: &str| {
            let parts: Vec<&str> = s.split(' ').collect();
            parts.len() == 6
                && parts[0] == "node"
                && parts[2].starts_with("lb=")
                && parts[3].starts_with("ub=")
                && parts[4].starts_with("gap=")
                && parts[5].starts_with("depth=")
        };
        assert!(!res.log.is_empty());
        assert!(res.log.iter().all(|l| re(l)), "{:?}", res.log);
    }

    #[test]
    fn gap_formula() {
        assert_eq!(mip_gap(10.0, 9.0), 0.1);
        assert_eq!(mip_gap(0.0, 0.0), 0.0);
        assert!(mip_gap(f64::INFINITY, 0.0).is_infinite());
    }
}
