use nalgebra::DMatrix;

use crate::{ObsError, ObservabilityMatrix};

/// Singular values below `DEFAULT_REL_TOL * σ_max` count as null.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// Upper-triangular factor with the same singular values and right
/// singular vectors as `m`.
fn reduce(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() <= n {
        let mut sq = DMatrix::zeros(n, n);
        sq.rows_mut(0, m.nrows()).copy_from(m);
        return sq;
    }
    m.clone().qr().r()
}

fn is_null(s: f64, smax: f64, rel_tol: f64) -> bool {
    s <= rel_tol * smax || s.is_nan()
}

fn null_count(sv: &nalgebra::DVector<f64>, rel_tol: f64) -> usize {
    let smax = sv.max();
    sv.iter().filter(|&&s| is_null(s, smax, rel_tol)).count()
}

/// Dimension and orthonormal basis of the numeric right null space of `m`.
pub fn numeric_nullspace(m: &DMatrix<f64>, rel_tol: f64) -> (usize, DMatrix<f64>) {
    let n = m.ncols();
    let svd = reduce(m).svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.max();
    let cols: Vec<usize> = (0..n).filter(|&i| is_null(svd.singular_values[i], smax, rel_tol)).collect();
    let mut basis = DMatrix::zeros(n, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        basis.set_column(j, &v_t.row(i).transpose());
    }
    (cols.len(), basis)
}

/// `|M N|_F / (|M|_F |N|_F)`; an empty basis gives zero.
pub fn verify_nullspace(m: &DMatrix<f64>, n: &DMatrix<f64>) -> Result<f64, ObsError> {
    if m.ncols() != n.nrows() {
        return Err(ObsError::DimensionMismatch(m.ncols(), n.nrows()));
    }
    if n.ncols() == 0 {
        return Ok(0.0);
    }
    Ok((m * n).norm() / (m.norm() * n.norm()))
}

/// Largest relative distance of a column of `n` from the span of the
/// orthonormal `basis`.
pub fn span_residual(basis: &DMatrix<f64>, n: &DMatrix<f64>) -> f64 {
    n.column_iter()
        .map(|c| {
            let proj = basis * (basis.transpose() * c);
            (c - proj).norm() / c.norm()
        })
        .fold(0.0, f64::max)
}

/// Null dimension after each appended epoch block, paired with the epoch
/// index.
pub fn rank_over_time(om: &ObservabilityMatrix, rel_tol: f64) -> Vec<(usize, usize)> {
    let n = om.cols();
    let mut r = DMatrix::<f64>::zeros(0, n);
    let mut out = Vec::with_capacity(om.blocks.len());
    for (k, blk) in om.blocks.iter().enumerate() {
        let b = om.m.rows(blk.start, blk.len());
        let mut st = DMatrix::zeros(r.nrows() + b.nrows(), n);
        st.rows_mut(0, r.nrows()).copy_from(&r);
        st.rows_mut(r.nrows(), b.nrows()).copy_from(&b);
        r = if st.nrows() > n { st.qr().r() } else { st };
        let sv = reduce(&r).singular_values_unordered();
        out.push((k, null_count(&sv, rel_tol)));
    }
    out
}
