//! Greedy top-down warm start: one soft-margin SVM per branch node, solved on
//! the samples the ancestors route there.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bnb::{solve_miqp, BnbParams, BnbStatus, MixedIntegerQp};
use crate::dataset::Dataset;
use crate::margot::{Hyperparameters, MargotError, ModelSolution, Variant, VariableMap};
use crate::qp::{solve_svm, solve_svm_bounded, QuadraticProgram, SparseMatrix};
use crate::tree::TreeTopology;

/// Feature-mask enumeration is used while the number of masks stays at or
/// below this; larger subproblems go to branch-and-bound.
pub const MAX_ENUMERATED_MASKS: u128 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub variant: Variant,
    pub hp: Hyperparameters,
    /// Total budget in seconds, shared by all node subproblems.
    pub time_limit: f64,
}

impl HeuristicConfig {
    pub fn new(variant: Variant, hp: Hyperparameters) -> Self {
        HeuristicConfig {
            variant,
            hp,
            time_limit: 30.0,
        }
    }
}

/// Per-node subproblem settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeProblem {
    pub variant: Variant,
    pub c: f64,
    pub budget: Option<usize>,
    pub alpha: Option<f64>,
    pub m_w: f64,
    pub time_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeFit {
    pub w: Vec<f64>,
    pub b: f64,
    /// Hinge slacks of the node's samples, in input order.
    pub xi: Vec<f64>,
    /// Selected features (all `false` in MARGOT mode).
    pub s: Vec<bool>,
    pub objective: f64,
    pub timed_out: bool,
}

fn hinge(w: &[f64], b: f64, points: &[Vec<f64>], labels: &[f64]) -> Vec<f64> {
    points
        .iter()
        .zip(labels)
        .map(|(x, &y)| (1.0 - y * (dot(w, x) + b)).max(0.0))
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `k`-subsets of `0..n` in lexicographic order, calling `f` until it
/// returns `false`.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + n - k) else {
            return;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Solves the node subproblem on `points`/`labels`.
pub fn ws_svm_node(
    points: &[Vec<f64>],
    labels: &[f64],
    n: usize,
    problem: &NodeProblem,
) -> Result<NodeFit, MargotError> {
    if points.is_empty() {
        return Ok(NodeFit {
            w: vec![0.0; n],
            b: 1.0,
            xi: Vec::new(),
            s: vec![false; n],
            objective: 0.0,
            timed_out: false,
        });
    }
    if labels.iter().all(|&y| y == labels[0]) {
        return Ok(NodeFit {
            w: vec![0.0; n],
            b: labels[0],
            xi: vec![0.0; labels.len()],
            s: vec![false; n],
            objective: 0.0,
            timed_out: false,
        });
    }
    let c = vec![problem.c; points.len()];
    if problem.variant == Variant::Margot {
        let sol = solve_svm(points, labels, &c, None)?;
        return Ok(NodeFit {
            xi: sol.xi,
            objective: sol.objective,
            w: sol.w,
            b: sol.b,
            s: vec![false; n],
            timed_out: false,
        });
    }
    let budget = problem.budget.unwrap_or(n).min(n);
    let (sizes, penalty) = match problem.variant {
        Variant::Hfs => (budget..=budget, 0.0),
        _ => (budget..=n, problem.alpha.unwrap_or(0.0)),
    };
    let masks: u128 = sizes.clone().map(|k| binomial(n, k)).sum();
    if masks > MAX_ENUMERATED_MASKS {
        return node_miqp(points, labels, n, budget, problem);
    }
    let start = Instant::now();
    let mut best: Option<NodeFit> = None;
    let mut timed_out = false;
    let mut failure = None;
    for k in sizes {
        let excess = penalty * k.saturating_sub(budget) as f64;
        for_each_subset(n, k, |subset| {
            if best.is_some() && start.elapsed().as_secs_f64() > problem.time_limit {
                timed_out = true;
                return false;
            }
            let mut masked = vec![true; n];
            subset.iter().for_each(|&j| masked[j] = false);
            match solve_svm_bounded(points, labels, &c, Some(&masked), Some(problem.m_w)) {
                Ok(sol) => {
                    let objective = sol.objective + excess;
                    if best.as_ref().map_or(true, |b| objective < b.objective) {
                        best = Some(NodeFit {
                            xi: sol.xi,
                            w: sol.w,
                            b: sol.b,
                            s: masked.iter().map(|&m| !m).collect(),
                            objective,
                            timed_out: false,
                        });
                    }
                    true
                }
                Err(e) => {
                    failure = Some(e);
                    false
                }
            }
        });
        if timed_out || failure.is_some() {
            break;
        }
    }
    if let Some(e) = failure {
        return Err(e.into());
    }
    let mut fit = best.expect("at least one mask is enumerated");
    fit.timed_out = timed_out;
    Ok(fit)
}

/// Node subproblem as a small MIQP over `(w, b, ξ, s, u)`.
fn node_miqp(
    points: &[Vec<f64>],
    labels: &[f64],
    n: usize,
    budget: usize,
    problem: &NodeProblem,
) -> Result<NodeFit, MargotError> {
    let k = points.len();
    let (b_var, xi0, s0) = (n, n + 1, n + 1 + k);
    let u_var = s0 + n;
    let soft = problem.variant == Variant::Sfs;
    let nvars = u_var + usize::from(soft);
    let mut qp = QuadraticProgram::new(nvars);
    qp.p = SparseMatrix::zeros(nvars, nvars);
    for j in 0..n {
        qp.p.push(j, j, 1.0);
        qp.lb[s0 + j] = 0.0;
        qp.ub[s0 + j] = 1.0;
        qp.add_row(&[(j, 1.0), (s0 + j, -problem.m_w)], f64::NEG_INFINITY, 0.0);
        qp.add_row(&[(j, 1.0), (s0 + j, problem.m_w)], 0.0, f64::INFINITY);
    }
    for i in 0..k {
        qp.q[xi0 + i] = problem.c;
        qp.lb[xi0 + i] = 0.0;
        let y = labels[i];
        let mut row: Vec<(usize, f64)> = (0..n).map(|j| (j, y * points[i][j])).collect();
        row.push((b_var, y));
        row.push((xi0 + i, 1.0));
        qp.add_row(&row, 1.0, f64::INFINITY);
    }
    let selection: Vec<(usize, f64)> = (0..n).map(|j| (s0 + j, 1.0)).collect();
    if soft {
        qp.q[u_var] = problem.alpha.unwrap_or(0.0);
        qp.lb[u_var] = 0.0;
        let mut row: Vec<(usize, f64)> = selection.iter().map(|&(j, _)| (j, -1.0)).collect();
        row.push((u_var, 1.0));
        qp.add_row(&row, -(budget as f64), f64::INFINITY);
    } else {
        qp.add_row(&selection, f64::NEG_INFINITY, budget as f64);
    }
    let prob = MixedIntegerQp::new(qp, (s0..s0 + n).collect())?;
    let params = BnbParams {
        time_limit: problem.time_limit.max(1e-3),
        ..BnbParams::default()
    };
    let res = solve_miqp(&prob, &params, None)?;
    let Some(x) = res.x else {
        return Err(MargotError::InfeasibleSolution(format!(
            "node subproblem returned no incumbent ({:?})",
            res.status
        )));
    };
    let w = x[..n].to_vec();
    let b = x[b_var];
    let xi = hinge(&w, b, points, labels);
    let s: Vec<bool> = x[s0..s0 + n].iter().map(|&v| v > 0.5).collect();
    let excess = s.iter().filter(|&&v| v).count().saturating_sub(budget) as f64;
    let objective = 0.5 * dot(&w, &w)
        + problem.c * xi.iter().sum::<f64>()
        + if soft { problem.alpha.unwrap_or(0.0) * excess } else { 0.0 };
    Ok(NodeFit {
        w,
        b,
        xi,
        s,
        objective,
        timed_out: res.status != BnbStatus::Optimal,
    })
}

/// Smallest shift of `b` after which no value of `h` lies strictly between
/// `−ε` and `0`.
fn dead_zone_shift(h: &[f64], epsilon: f64) -> f64 {
    let clean = |d: f64| h.iter().all(|&v| !(v + d > -epsilon && v + d < 0.0));
    if clean(0.0) {
        return 0.0;
    }
    let mut candidates: Vec<f64> = h
        .iter()
        .flat_map(|&v| [-v, (-v).next_up(), -epsilon - v, (-epsilon - v).next_down()])
        .collect();
    candidates.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(b.total_cmp(a)));
    candidates
        .into_iter()
        .find(|&d| clean(d))
        .expect("shifting every sample to one side is always clean")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicResult {
    pub solution: ModelSolution,
    pub map: VariableMap,
    /// Branch nodes whose intercept was shifted to empty the `ε` dead zone.
    pub nudged_nodes: Vec<usize>,
    /// Branch nodes whose subproblem hit its share of the time budget.
    pub timed_out_nodes: Vec<usize>,
    /// Samples whose slack at a node they do not reach had to be raised above
    /// zero to satisfy the big-M margin constraint.
    pub big_m_slacks: usize,
    pub wall_time: f64,
}

impl HeuristicResult {
    pub fn to_vector(&self) -> Vec<f64> {
        self.solution.to_vector(&self.map)
    }
}

/// Runs the heuristic level by level and assembles a full model solution.
pub fn local_svm(data: &Dataset, config: &HeuristicConfig) -> Result<HeuristicResult, MargotError> {
    let hp = &config.hp;
    let n = data.num_features();
    let m = data.num_samples();
    hp.validate(config.variant, n)?;
    let topo = TreeTopology::new(hp.depth)?;
    let map = VariableMap::new(config.variant, hp.depth, n, m);
    let nb = topo.num_branch_nodes();
    let first_last = topo.last_level_nodes().start;
    let start = Instant::now();

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nb];
    members[0] = (0..m).collect();
    let mut sol = ModelSolution {
        w: vec![vec![0.0; n]; nb],
        b: vec![0.0; nb],
        xi: vec![vec![0.0; m]; nb],
        z: vec![vec![0.0; map.num_last_level()]; m],
        s: (config.variant != Variant::Margot).then(|| vec![vec![0.0; n]; nb]),
        u: (config.variant == Variant::Sfs).then(|| vec![0.0; nb]),
        objective: 0.0,
    };
    let mut nudged_nodes = Vec::new();
    let mut timed_out_nodes = Vec::new();
    let mut big_m_slacks = 0;

    for t in topo.branch_nodes() {
        let remaining = (config.time_limit - start.elapsed().as_secs_f64()).max(0.0);
        let problem = NodeProblem {
            variant: config.variant,
            c: hp.c[t],
            budget: hp.budgets.as_ref().map(|b| b[t]),
            alpha: hp.alpha,
            m_w: hp.m_w,
            time_limit: remaining / (nb - t) as f64,
        };
        let idx = members[t].clone();
        let idx = &idx;
        let points: Vec<Vec<f64>> = idx.iter().map(|&i| data.features[i].clone()).collect();
        let labels: Vec<f64> = idx.iter().map(|&i| data.labels[i]).collect();
        let fit = ws_svm_node(&points, &labels, n, &problem)?;
        if fit.timed_out {
            timed_out_nodes.push(t);
        }
        let mut b = fit.b;
        let h: Vec<f64> = points.iter().map(|x| dot(&fit.w, x) + b).collect();
        if !topo.is_last_level(t) {
            let shift = dead_zone_shift(&h, hp.epsilon);
            if shift != 0.0 {
                b += shift;
                nudged_nodes.push(t);
            }
            let (mut left, mut right) = (Vec::new(), Vec::new());
            for &i in idx {
                if dot(&fit.w, &data.features[i]) + b >= 0.0 {
                    right.push(i);
                } else {
                    left.push(i);
                }
            }
            members[TreeTopology::left_child(t)] = left;
            members[TreeTopology::right_child(t)] = right;
        } else {
            for &i in idx {
                sol.z[i][t - first_last] = 1.0;
            }
        }
        let mut inside = vec![false; m];
        idx.iter().for_each(|&i| inside[i] = true);
        for i in 0..m {
            let yh = data.labels[i] * (dot(&fit.w, &data.features[i]) + b);
            sol.xi[t][i] = if inside[i] {
                (1.0 - yh).max(0.0)
            } else {
                let needed = (1.0 - hp.m_xi - yh).max(0.0);
                if needed > 0.0 {
                    big_m_slacks += 1;
                }
                needed
            };
        }
        if let Some(s) = sol.s.as_mut() {
            s[t] = fit.s.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect();
        }
        if let (Some(u), Some(budget)) = (sol.u.as_mut(), problem.budget) {
            u[t] = fit.s.iter().filter(|&&v| v).count().saturating_sub(budget) as f64;
        }
        sol.w[t] = fit.w;
        sol.b[t] = b;
    }
    sol.objective = sol.compute_objective(hp);
    Ok(HeuristicResult {
        solution: sol,
        map,
        nudged_nodes,
        timed_out_nodes,
        big_m_slacks,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
