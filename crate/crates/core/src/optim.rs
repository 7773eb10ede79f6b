//! Small unconstrained minimizers for two-variable problems.

use nalgebra::{Matrix2, Vector2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub initial_step: f64,
    /// Stop when the simplex diameter falls below this.
    pub x_tol: f64,
    pub max_evals: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { initial_step: 0.05, x_tol: 1e-9, max_evals: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexResult {
    pub x: Vector2<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Nelder–Mead direct search. Non-finite values are treated as `+∞`, which
/// keeps the simplex inside the domain where `f` is defined.
pub fn nelder_mead<F: FnMut(&Vector2<f64>) -> f64>(
    mut f: F,
    x0: Vector2<f64>,
    opt: &SimplexOptions,
) -> SimplexResult {
    let mut eval = |x: &Vector2<f64>| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut pts = [x0, x0 + Vector2::new(opt.initial_step, 0.0), x0 + Vector2::new(0.0, opt.initial_step)];
    let mut vals = [eval(&pts[0]), eval(&pts[1]), eval(&pts[2])];
    let mut evals = 3;
    let diameter = |p: &[Vector2<f64>; 3]| {
        (p[0] - p[1]).norm().max((p[0] - p[2]).norm()).max((p[1] - p[2]).norm())
    };
    let mut converged = false;
    while evals < opt.max_evals {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = [pts[idx[0]], pts[idx[1]], pts[idx[2]]];
        vals = [vals[idx[0]], vals[idx[1]], vals[idx[2]]];
        if diameter(&pts) < opt.x_tol {
            converged = true;
            break;
        }
        let centroid = (pts[0] + pts[1]) * 0.5;
        let reflected = centroid + (centroid - pts[2]);
        let fr = eval(&reflected);
        evals += 1;
        if fr < vals[0] {
            let expanded = centroid + (centroid - pts[2]) * 2.0;
            let fe = eval(&expanded);
            evals += 1;
            if fe < fr {
                pts[2] = expanded;
                vals[2] = fe;
            } else {
                pts[2] = reflected;
                vals[2] = fr;
            }
            continue;
        }
        if fr < vals[1] {
            pts[2] = reflected;
            vals[2] = fr;
            continue;
        }
        let (contracted, fc) = if fr < vals[2] {
            let c = centroid + (reflected - centroid) * 0.5;
            (c, eval(&c))
        } else {
            let c = centroid + (pts[2] - centroid) * 0.5;
            (c, eval(&c))
        };
        evals += 1;
        if fc < vals[2].min(fr) {
            pts[2] = contracted;
            vals[2] = fc;
            continue;
        }
        // shrink towards the best vertex
        for i in 1..3 {
            pts[i] = pts[0] + (pts[i] - pts[0]) * 0.5;
            vals[i] = eval(&pts[i]);
        }
        evals += 2;
    }
    let best = (0..3).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    SimplexResult { x: pts[best], f: vals[best], evals, converged }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonResult {
    pub x: Vector2<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped Newton iteration on a gradient with a finite-difference Hessian.
///
/// A step is accepted when it lowers the gradient norm; otherwise it is
/// halved up to eight times. Returns as soon as the Hessian stops being
/// positive definite, since the point is then not a minimum candidate.
pub fn newton_polish<G: FnMut(&Vector2<f64>) -> Option<Vector2<f64>>>(
    mut grad: G,
    x0: Vector2<f64>,
    g_tol: f64,
    hess_step: f64,
    max_iter: usize,
) -> NewtonResult {
    let mut x = x0;
    let Some(mut g) = grad(&x) else {
        return NewtonResult { x, grad_norm: f64::INFINITY, iterations: 0, converged: false };
    };
    for it in 0..max_iter {
        if g.norm() < g_tol {
            return NewtonResult { x, grad_norm: g.norm(), iterations: it, converged: true };
        }
        let mut h = Matrix2::zeros();
        for j in 0..2 {
            let mut e = Vector2::zeros();
            e[j] = hess_step;
            let (Some(gp), Some(gm)) = (grad(&(x + e)), grad(&(x - e))) else {
                return NewtonResult { x, grad_norm: g.norm(), iterations: it, converged: false };
            };
            h.set_column(j, &((gp - gm) / (2.0 * hess_step)));
        }
        let h = (h + h.transpose()) * 0.5;
        let Some(chol) = h.cholesky() else {
            return NewtonResult { x, grad_norm: g.norm(), iterations: it, converged: false };
        };
        let step = chol.solve(&(-g));
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let trial = x + step * t;
            if let Some(gt) = grad(&trial) {
                if gt.norm() < g.norm() {
                    x = trial;
                    g = gt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            let n = g.norm();
            return NewtonResult { x, grad_norm: n, iterations: it, converged: n < g_tol };
        }
    }
    let n = g.norm();
    NewtonResult { x, grad_norm: n, iterations: max_iter, converged: n < g_tol }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosen(x: &Vector2<f64>) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    fn rosen_grad(x: &Vector2<f64>) -> Option<Vector2<f64>> {
        Some(Vector2::new(
            -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
            200.0 * (x[1] - x[0] * x[0]),
        ))
    }

    #[test]
    fn simplex_finds_rosenbrock_minimum() {
        let r = nelder_mead(rosen, Vector2::new(-1.2, 1.0), &SimplexOptions { x_tol: 1e-10, ..Default::default() });
        assert!(r.converged);
        assert!((r.x - Vector2::new(1.0, 1.0)).norm() < 1e-6);
    }

    #[test]
    fn simplex_respects_infinite_region() {
        let f = |x: &Vector2<f64>| if x[0] < 0.5 { f64::NAN } else { (x[0] - 1.0).powi(2) + x[1].powi(2) };
        let r = nelder_mead(f, Vector2::new(0.8, 0.3), &SimplexOptions::default());
        assert!((r.x - Vector2::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn newton_polishes_close_start() {
        let r = newton_polish(rosen_grad, Vector2::new(0.98, 0.95), 1e-12, 1e-6, 50);
        assert!(r.converged);
        assert!((r.x - Vector2::new(1.0, 1.0)).norm() < 1e-10);
    }
}
