//! SVD-based rank, nullspace and pseudoinverse with relative thresholds.

use nalgebra::{DMatrix, DVector, Dyn, SVD};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

/// SVD with singular values in decreasing order.
///
/// nalgebra's bidiagonal iteration occasionally returns factors whose
/// product is visibly off on rank-deficient input (errors near 1e-2 on
/// 9×9 statics blocks). The decomposition is therefore checked against
/// `a` and, when poor, recomputed from the transpose or from the `R`
/// factor of a QR decomposition.
pub fn svd(a: DMatrix<f64>) -> SVD<f64, Dyn, Dyn> {
    let tol = 1e-12 * (1.0 + a.norm());
    let err = |u: &DMatrix<f64>, s: &DVector<f64>, v_t: &DMatrix<f64>| (u * DMatrix::from_diagonal(s) * v_t - &a).norm();
    let mut best: Option<(f64, DMatrix<f64>, DVector<f64>, DMatrix<f64>)> = None;
    for route in 0..3 {
        let (u, s, v_t) = match route {
            0 => {
                let d = a.clone().svd_unordered(true, true);
                (d.u.expect("U requested"), d.singular_values, d.v_t.expect("V requested"))
            }
            1 => {
                let d = a.transpose().svd_unordered(true, true);
                (d.v_t.expect("V requested").transpose(), d.singular_values, d.u.expect("U requested").transpose())
            }
            _ if a.nrows() >= a.ncols() => {
                let qr = a.clone().qr();
                let d = qr.r().svd_unordered(true, true);
                (qr.q() * d.u.expect("U requested"), d.singular_values, d.v_t.expect("V requested"))
            }
            _ => {
                let qr = a.transpose().qr();
                let d = qr.r().svd_unordered(true, true);
                (d.v_t.expect("V requested").transpose(), d.singular_values, (qr.q() * d.u.expect("U requested")).transpose())
            }
        };
        let e = err(&u, &s, &v_t);
        if best.as_ref().map_or(true, |b| e < b.0) {
            best = Some((e, u, s, v_t));
        }
        if e <= tol {
            break;
        }
    }
    let (_, u, s, v_t) = best.expect("at least one route runs");
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    SVD {
        u: Some(DMatrix::from_columns(&order.iter().map(|&i| u.column(i)).collect::<Vec<_>>())),
        v_t: Some(DMatrix::from_rows(&order.iter().map(|&i| v_t.row(i)).collect::<Vec<_>>())),
        singular_values: DVector::from_iterator(s.len(), order.iter().map(|&i| s[i])),
    }
}

/// Full SVD of `a`; wide matrices are padded with zero rows so that `V` is
/// square. Singular values come back sorted in decreasing order.
fn full_svd(a: &DMatrix<f64>) -> SVD<f64, Dyn, Dyn> {
    if a.nrows() >= a.ncols() {
        svd(a.clone())
    } else {
        let mut padded = DMatrix::zeros(a.ncols(), a.ncols());
        padded.rows_mut(0, a.nrows()).copy_from(a);
        svd(padded)
    }
}

fn cutoff(s: &DVector<f64>, rel: f64) -> f64 {
    s.iter().cloned().fold(0.0, f64::max) * rel
}

pub fn singular_values(a: &DMatrix<f64>) -> DVector<f64> {
    full_svd(a).singular_values
}

/// Number of singular values above `rel · σ_max`.
pub fn rank(a: &DMatrix<f64>, rel: f64) -> usize {
    let s = singular_values(a);
    let c = cutoff(&s, rel);
    s.iter().filter(|&&x| x > c).count()
}

/// Orthonormal basis of the right nullspace, one column per direction.
pub fn null_space(a: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let svd = full_svd(a);
    let c = cutoff(&svd.singular_values, rel);
    let r = svd.singular_values.iter().filter(|&&x| x > c).count();
    let v_t = svd.v_t.expect("V requested");
    v_t.rows(r, a.ncols() - r).transpose()
}

/// Moore–Penrose pseudoinverse.
pub fn pinv(a: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let svd = svd(a.clone());
    let c = cutoff(&svd.singular_values, rel);
    let u = svd.u.expect("U requested");
    let v_t = svd.v_t.expect("V requested");
    let mut out = DMatrix::zeros(a.ncols(), a.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > c {
            out += v_t.row(i).transpose() * u.column(i).transpose() / s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_matrix_nullspace() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0]);
        let n = null_space(&a, RANK_TOL);
        assert_eq!(n.ncols(), 2);
        assert!((&a * &n).norm() < 1e-13);
        assert!((n.transpose() * &n - DMatrix::identity(2, 2)).norm() < 1e-13);
    }

    #[test]
    fn pinv_of_rank_deficient() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert_eq!(rank(&a, RANK_TOL), 1);
        let p = pinv(&a, RANK_TOL);
        assert!((&a * &p * &a - &a).norm() < 1e-12);
    }
}
