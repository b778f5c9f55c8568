use serde::{Deserialize, Serialize};

use super::{dot, is_finite_bound, Duals, QpError, QuadraticProgram};

/// Infinity norms of the KKT conditions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktResiduals {
    /// Largest bound or row violation.
    pub primal: f64,
    /// Stationarity `‖P x + q + Aᵀ y + v‖∞`, plus any multiplier sitting on an absent side.
    pub dual: f64,
    /// Largest `|multiplier · slack|` over active sides.
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.complementarity)
    }
}

fn side_terms(activity: f64, lo: f64, hi: f64, mult: f64) -> (f64, f64, f64) {
    let mut primal = 0.0f64;
    if is_finite_bound(lo) {
        primal = primal.max(lo - activity);
    }
    if is_finite_bound(hi) {
        primal = primal.max(activity - hi);
    }
    let (sign_violation, comp) = if mult > 0.0 {
        if is_finite_bound(hi) {
            (0.0, mult * (hi - activity).abs())
        } else {
            (mult, 0.0)
        }
    } else if mult < 0.0 {
        if is_finite_bound(lo) {
            (0.0, -mult * (activity - lo).abs())
        } else {
            (-mult, 0.0)
        }
    } else {
        (0.0, 0.0)
    };
    (primal, sign_violation, comp)
}

pub fn kkt_residual(
    prob: &QuadraticProgram,
    x: &[f64],
    duals: &Duals,
) -> Result<KktResiduals, QpError> {
    let n = prob.num_vars();
    let r = prob.num_rows();
    if x.len() != n || duals.bounds.len() != n || duals.rows.len() != r {
        return Err(QpError::DimensionMismatch(format!(
            "x/bound duals/row duals have lengths {}/{}/{}, expected {n}/{n}/{r}",
            x.len(),
            duals.bounds.len(),
            duals.rows.len()
        )));
    }
    let mut grad = prob.p.mul_vec(x);
    for (g, (q, v)) in grad.iter_mut().zip(prob.q.iter().zip(&duals.bounds)) {
        *g += q + v;
    }
    for (g, aty) in grad.iter_mut().zip(prob.a.tr_mul_vec(&duals.rows)) {
        *g += aty;
    }
    let mut res = KktResiduals {
        dual: grad.iter().fold(0.0f64, |m, g| m.max(g.abs())),
        ..Default::default()
    };
    let activity = prob.a.mul_vec(x);
    let rows = activity
        .iter()
        .zip(prob.lower.iter().zip(&prob.upper))
        .zip(&duals.rows)
        .map(|((&ax, (&lo, &hi)), &y)| side_terms(ax, lo, hi, y));
    let vars = x
        .iter()
        .zip(prob.lb.iter().zip(&prob.ub))
        .zip(&duals.bounds)
        .map(|((&xj, (&lo, &hi)), &v)| side_terms(xj, lo, hi, v));
    for (primal, sign, comp) in rows.chain(vars) {
        res.primal = res.primal.max(primal);
        res.dual = res.dual.max(sign);
        res.complementarity = res.complementarity.max(comp);
    }
    Ok(res)
}

/// Lagrangian dual value at a stationary pair `(x, duals)`.
pub fn dual_objective(prob: &QuadraticProgram, x: &[f64], duals: &Duals) -> f64 {
    let px = prob.p.mul_vec(x);
    let mut value = -0.5 * dot(x, &px);
    let sides = prob
        .lower
        .iter()
        .zip(&prob.upper)
        .zip(&duals.rows)
        .chain(prob.lb.iter().zip(&prob.ub).zip(&duals.bounds));
    for ((&lo, &hi), &m) in sides {
        if m > 0.0 {
            value -= m * hi;
        } else if m < 0.0 {
            value -= m * lo;
        }
    }
    value
}
