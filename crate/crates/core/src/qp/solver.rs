use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus, ZeroConeT,
};

use super::{
    is_finite_bound, kkt_residual, Duals, QpError, QpSettings, QpSolution, QpStatus,
    QuadraticProgram,
};

/// Where a constraint side of the original problem landed in the stacked
/// cone form `A_c x + s = b_c`.
#[derive(Clone, Copy)]
enum SideMap {
    Equality(usize),
    Ineq {
        upper: Option<usize>,
        lower: Option<usize>,
    },
}

struct Stacked {
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    rhs: Vec<f64>,
    n_eq: usize,
    maps: Vec<SideMap>,
}

fn stack(prob: &QuadraticProgram) -> Stacked {
    let a_rows = prob.a.rows();
    let n = prob.num_vars();
    // (coefficients, lower, upper) for every row then every variable bound
    let sides = a_rows
        .iter()
        .zip(prob.lower.iter().zip(&prob.upper))
        .map(|(coefs, (&lo, &hi))| (coefs.clone(), lo, hi))
        .chain((0..n).map(|j| (vec![(j, 1.0)], prob.lb[j], prob.ub[j])));

    let mut eq_rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    let mut ineq_rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    let mut maps = Vec::with_capacity(prob.num_rows() + n);
    for (coefs, lo, hi) in sides {
        if is_finite_bound(lo) && lo == hi {
            maps.push(SideMap::Equality(eq_rows.len()));
            eq_rows.push((coefs, hi));
            continue;
        }
        let upper = is_finite_bound(hi).then(|| {
            ineq_rows.push((coefs.clone(), hi));
            ineq_rows.len() - 1
        });
        let lower = is_finite_bound(lo).then(|| {
            let neg = coefs.iter().map(|&(j, v)| (j, -v)).collect();
            ineq_rows.push((neg, -lo));
            ineq_rows.len() - 1
        });
        maps.push(SideMap::Ineq { upper, lower });
    }
    let n_eq = eq_rows.len();
    let mut out = Stacked {
        rows: Vec::new(),
        cols: Vec::new(),
        vals: Vec::new(),
        rhs: Vec::with_capacity(n_eq + ineq_rows.len()),
        n_eq,
        maps,
    };
    for (r, (coefs, b)) in eq_rows.into_iter().chain(ineq_rows).enumerate() {
        for (j, v) in coefs {
            out.rows.push(r);
            out.cols.push(j);
            out.vals.push(v);
        }
        out.rhs.push(b);
    }
    out
}

fn empty_solution(prob: &QuadraticProgram) -> QpSolution {
    let feasible = prob
        .lower
        .iter()
        .zip(&prob.upper)
        .all(|(&lo, &hi)| lo <= 0.0 && hi >= 0.0);
    QpSolution {
        x: Vec::new(),
        objective: if feasible { 0.0 } else { f64::INFINITY },
        status: if feasible {
            QpStatus::Optimal
        } else {
            QpStatus::Infeasible
        },
        duals: Duals {
            rows: vec![0.0; prob.num_rows()],
            bounds: Vec::new(),
        },
        residuals: Default::default(),
        iterations: 0,
    }
}

/// Solves a convex QP to the tolerances in `settings`.
///
/// Infeasibility and iteration limits are reported through
/// [`QpSolution::status`]; only malformed input and unbounded problems are
/// errors.
pub fn solve_qp(prob: &QuadraticProgram, settings: &QpSettings) -> Result<QpSolution, QpError> {
    prob.validate()?;
    if settings.validate_psd {
        prob.check_psd()?;
    }
    let n = prob.num_vars();
    if n == 0 {
        return Ok(empty_solution(prob));
    }
    let stacked = stack(prob);
    let m = stacked.rhs.len();

    let (mut pi, mut pj, mut pv) = (Vec::new(), Vec::new(), Vec::new());
    for &(i, j, v) in &prob.p.entries {
        if i <= j {
            pi.push(i);
            pj.push(j);
            pv.push(v);
        }
    }
    let p = CscMatrix::new_from_triplets(n, n, pi, pj, pv);
    let a = CscMatrix::new_from_triplets(m, n, stacked.rows, stacked.cols, stacked.vals);
    let mut cones = Vec::new();
    if stacked.n_eq > 0 {
        cones.push(ZeroConeT(stacked.n_eq));
    }
    if m > stacked.n_eq {
        cones.push(NonnegativeConeT(m - stacked.n_eq));
    }

    let inner_tol = (settings.tol * 1e-3).max(1e-12);
    let clarabel_settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(settings.max_iter)
        .tol_gap_abs(inner_tol)
        .tol_gap_rel(inner_tol)
        .tol_feas(inner_tol)
        .tol_ktratio(1e-8)
        .tol_infeas_abs(settings.infeasibility_tol)
        .tol_infeas_rel(settings.infeasibility_tol)
        .presolve_enable(false)
        .max_threads(1)
        .build()
        .map_err(|e| QpError::Backend(format!("{e:?}")))?;
    let mut solver = DefaultSolver::new(&p, &prob.q, &a, &stacked.rhs, &cones, clarabel_settings)
        .map_err(|e| QpError::Backend(format!("{e:?}")))?;
    solver.solve();
    let sol = &solver.solution;

    let status = match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => QpStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            QpStatus::Infeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            return Err(QpError::Unbounded)
        }
        _ => QpStatus::MaxIterations,
    };

    let z = &sol.z;
    let mult = |map: SideMap| -> f64 {
        match map {
            SideMap::Equality(r) => z[r],
            SideMap::Ineq { upper, lower } => {
                upper.map_or(0.0, |r| z[stacked.n_eq + r])
                    - lower.map_or(0.0, |r| z[stacked.n_eq + r])
            }
        }
    };
    let r = prob.num_rows();
    let duals = Duals {
        rows: stacked.maps[..r].iter().map(|&s| mult(s)).collect(),
        bounds: stacked.maps[r..].iter().map(|&s| mult(s)).collect(),
    };

    let x = if status == QpStatus::Infeasible {
        vec![f64::NAN; n]
    } else {
        sol.x.clone()
    };
    let (objective, residuals) = if status == QpStatus::Infeasible {
        (f64::INFINITY, Default::default())
    } else {
        (prob.objective(&x), kkt_residual(prob, &x, &duals)?)
    };
    let status = if status == QpStatus::Optimal
        && (residuals.primal > settings.tol || residuals.dual > settings.tol)
    {
        log::debug!(
            "qp: backend reported {:?} but residuals are primal={:e} dual={:e}",
            sol.status,
            residuals.primal,
            residuals.dual
        );
        QpStatus::MaxIterations
    } else {
        status
    };
    Ok(QpSolution {
        x,
        objective,
        status,
        duals,
        residuals,
        iterations: sol.iterations,
    })
}
