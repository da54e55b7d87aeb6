//! Unconstrained minimization used by the fitting routine: BFGS with an
//! Armijo backtracking line search, followed by a Nelder-Mead polish.
//!
//! The objective may return `None` to signal an infeasible point (non-finite
//! likelihood); the line search treats that as +∞ and backs off.

use nalgebra::{DMatrix, DVector};

pub(crate) struct GradObjective<'a> {
    /// Value and gradient at a point; `None` when the point is infeasible.
    pub eval: Box<dyn Fn(&[f64]) -> Option<(f64, Vec<f64>)> + 'a>,
}

pub(crate) struct ValueObjective<'a> {
    pub eval: Box<dyn Fn(&[f64]) -> Option<f64> + 'a>,
}

pub(crate) struct OptimOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub n_evals: usize,
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 50;

/// BFGS minimization with inverse-Hessian updates.
///
/// Stops when the gradient sup-norm falls below `grad_tol`, the relative
/// improvement falls below `rel_f_tol` on two consecutive iterations, or the
/// evaluation budget is exhausted.
pub(crate) fn bfgs(
    obj: &GradObjective,
    x0: &[f64],
    grad_tol: f64,
    rel_f_tol: f64,
    max_evals: usize,
) -> Option<OptimOutcome> {
    let k = x0.len();
    let mut n_evals = 0usize;
    let eval = |x: &[f64], n_evals: &mut usize| -> Option<(f64, Vec<f64>)> {
        *n_evals += 1;
        (obj.eval)(x)
    };

    let mut x = DVector::from_column_slice(x0);
    let (mut f, g) = eval(x.as_slice(), &mut n_evals)?;
    let mut g = DVector::from_vec(g);
    let mut h = DMatrix::<f64>::identity(k, k);
    let mut stall = 0usize;
    let mut first_update = true;

    while n_evals < max_evals {
        if g.amax() <= grad_tol {
            break;
        }
        let mut dir = -(&h * &g);
        let mut slope = dir.dot(&g);
        if !(slope < 0.0) || !slope.is_finite() {
            // reset to steepest descent when curvature information degrades
            h = DMatrix::identity(k, k);
            dir = -g.clone();
            slope = dir.dot(&g);
            if !(slope < 0.0) {
                break;
            }
        }

        // backtracking line search
        let mut step = 1.0f64;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let cand = &x + &dir * step;
            if let Some((fc, gc)) = eval(cand.as_slice(), &mut n_evals) {
                if fc.is_finite() && fc <= f + ARMIJO_C1 * step * slope {
                    accepted = Some((cand, fc, DVector::from_vec(gc)));
                    break;
                }
            }
            step *= 0.5;
            if n_evals >= max_evals {
                break;
            }
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            break; // no descent along this direction
        };

        let s = &x_new - &x;
        let yv = &g_new - &g;
        let sy = s.dot(&yv);
        if sy > 1e-12 * s.norm() * yv.norm() {
            if first_update {
                // scale the initial inverse Hessian (Shanno-Phua)
                let yy = yv.dot(&yv);
                if yy > 0.0 {
                    h = DMatrix::identity(k, k) * (sy / yy);
                }
                first_update = false;
            }
            let rho = 1.0 / sy;
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
            let hy = &h * &yv;
            let yhy = yv.dot(&hy);
            let ss = &s * s.transpose();
            let hy_s = &hy * s.transpose();
            h = &h - (&hy_s + hy_s.transpose()) * rho + &ss * (rho * rho * yhy + rho);
        }

        let improvement = f - f_new;
        x = x_new;
        g = g_new;
        f = f_new;
        if improvement <= rel_f_tol * (1.0 + f.abs()) {
            stall += 1;
            if stall >= 2 {
                break;
            }
        } else {
            stall = 0;
        }
    }

    Some(OptimOutcome { x: x.as_slice().to_vec(), value: f, n_evals })
}

/// Nelder-Mead simplex minimization (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2), used as a derivative-free polish.
pub(crate) fn nelder_mead(
    obj: &ValueObjective,
    x0: &[f64],
    f_tol: f64,
    max_evals: usize,
) -> Option<OptimOutcome> {
    let k = x0.len();
    let mut n_evals = 0usize;
    let eval = |x: &[f64], n_evals: &mut usize| -> f64 {
        *n_evals += 1;
        (obj.eval)(x).unwrap_or(f64::INFINITY)
    };

    // initial simplex: perturb each coordinate by 5% (or a small absolute step)
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    simplex.push(x0.to_vec());
    for j in 0..k {
        let mut v = x0.to_vec();
        v[j] += if v[j] != 0.0 { 0.05 * v[j].abs() } else { 0.00025 };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut n_evals)).collect();
    if !values[0].is_finite() {
        return None;
    }

    while n_evals < max_evals {
        // order ascending by value
        let mut order: Vec<usize> = (0..=k).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[k];
        let second_worst = order[k - 1];

        if (values[worst] - values[best]).abs() <= f_tol * (1.0 + values[best].abs()) {
            break;
        }

        // centroid of all but worst
        let mut centroid = vec![0.0; k];
        for &i in order.iter().take(k) {
            for j in 0..k {
                centroid[j] += simplex[i][j] / k as f64;
            }
        }

        let point = |coef: f64| -> Vec<f64> {
            (0..k)
                .map(|j| centroid[j] + coef * (centroid[j] - simplex[worst][j]))
                .collect()
        };

        let reflected = point(1.0);
        let f_r = eval(&reflected, &mut n_evals);
        if f_r < values[best] {
            let expanded = point(2.0);
            let f_e = eval(&expanded, &mut n_evals);
            if f_e < f_r {
                simplex[worst] = expanded;
                values[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_r;
            }
        } else if f_r < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_r;
        } else {
            let (contract_coef, f_ref) = if f_r < values[worst] {
                (0.5, f_r)
            } else {
                (-0.5, values[worst])
            };
            let contracted = point(contract_coef);
            let f_c = eval(&contracted, &mut n_evals);
            if f_c < f_ref {
                simplex[worst] = contracted;
                values[worst] = f_c;
            } else {
                // shrink toward the best vertex
                let best_point = simplex[best].clone();
                for i in 0..=k {
                    if i == best {
                        continue;
                    }
                    for j in 0..k {
                        simplex[i][j] = 0.5 * (simplex[i][j] + best_point[j]);
                    }
                    values[i] = eval(&simplex[i].clone(), &mut n_evals);
                }
            }
        }
    }

    let (mut best, mut best_val) = (0usize, values[0]);
    for (i, &v) in values.iter().enumerate() {
        if v < best_val {
            best = i;
            best_val = v;
        }
    }
    Some(OptimOutcome { x: simplex[best].clone(), value: best_val, n_evals })
}
