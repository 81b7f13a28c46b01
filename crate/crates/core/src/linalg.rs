//! SVD-backed pseudo-inverse columns and orthogonal-complement projections.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Condition numbers above this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

struct ThinSvd {
    u: DMatrix<Complex64>,
    sigma: DVector<f64>,
    v_t: DMatrix<Complex64>,
}

fn thin_svd(a: &DMatrix<Complex64>) -> Result<ThinSvd> {
    let (rows, cols) = a.shape();
    if cols > rows {
        return Err(Error::Singular {
            condition: f64::INFINITY,
        });
    }
    let svd = SVD::new(a.clone(), true, true);
    let sigma = svd.singular_values;
    let max = sigma.max();
    let min = sigma.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    Ok(ThinSvd {
        u: svd.u.expect("u requested"),
        sigma,
        v_t: svd.v_t.expect("v_t requested"),
    })
}

/// A (AᴴA)⁻¹ for a tall full-column-rank A, computed as U Σ⁻¹ Vᴴ.
///
/// Column j is the direction that has unit inner product with column j of A
/// and is orthogonal to every other column.
pub fn zf_directions(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let ThinSvd { u, sigma, v_t } = thin_svd(a)?;
    let mut scaled = u;
    for (j, s) in sigma.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    Ok(scaled * v_t)
}

/// Orthonormal basis of the column space of A.
pub fn column_basis(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    Ok(thin_svd(a)?.u)
}

/// (I − Q Qᴴ) v for an orthonormal basis Q.
pub fn project_out(basis: &DMatrix<Complex64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    if basis.ncols() == 0 {
        return v.clone();
    }
    let coeffs = basis.ad_mul(v);
    v - basis * coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zf_directions_invert_the_gram_matrix() {
        let a = DMatrix::from_row_slice(
            4,
            2,
            &[
                c(1.0, 0.5),
                c(0.0, 1.0),
                c(-0.3, 0.2),
                c(2.0, 0.0),
                c(0.7, -1.0),
                c(1.0, 1.0),
                c(0.0, 0.0),
                c(-1.0, 0.4),
            ],
        );
        let d = zf_directions(&a).unwrap();
        let gram = a.adjoint() * &d;
        let id = DMatrix::<Complex64>::identity(2, 2);
        assert!((gram - id).norm() < 1e-12);
        // matches the textbook A (AᴴA)⁻¹
        let explicit = &a * (a.adjoint() * &a).try_inverse().unwrap();
        assert!((explicit - d).norm() < 1e-12);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let a = DMatrix::from_row_slice(3, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(1.0, 1.0), c(2.0, 2.0), c(0.0, 1.0), c(0.0, 2.0)]);
        assert!(matches!(zf_directions(&a), Err(Error::Singular { .. })));
        let wide = DMatrix::<Complex64>::zeros(2, 3);
        assert!(zf_directions(&wide).is_err());
    }

    #[test]
    fn projection_removes_the_span() {
        let a = DMatrix::from_row_slice(3, 1, &[c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)]);
        let q = column_basis(&a).unwrap();
        let v = DVector::from_vec(vec![c(3.0, 0.0), c(-1.0, 2.0), c(0.5, 0.5)]);
        let w = project_out(&q, &v);
        assert!(a.column(0).dotc(&w).norm() < 1e-14);
        let empty = DMatrix::<Complex64>::zeros(3, 0);
        assert_eq!(project_out(&empty, &v), v);
    }
}
