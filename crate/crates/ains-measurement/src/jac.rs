use nalgebra::DMatrix;

/// Measurement Jacobian split into pose and feature blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureJacobian {
    pub h_theta: DMatrix<f64>,
    pub h_p: DMatrix<f64>,
    pub h_f: DMatrix<f64>,
}

impl FeatureJacobian {
    pub fn rows(&self) -> usize {
        self.h_theta.nrows()
    }

    /// Places the blocks in an `n`-column row block with the IMU error
    /// order `(dθ, b_g, v, b_a, p)` and the feature starting at `feat_col`.
    pub fn embed(&self, n: usize, feat_col: Option<usize>) -> DMatrix<f64> {
        self.embed_at(n, 0, 12, feat_col)
    }

    pub fn embed_at(&self, n: usize, theta_col: usize, p_col: usize, feat_col: Option<usize>) -> DMatrix<f64> {
        let r = self.rows();
        let mut h = DMatrix::zeros(r, n);
        h.view_mut((0, theta_col), (r, 3)).copy_from(&self.h_theta);
        h.view_mut((0, p_col), (r, 3)).copy_from(&self.h_p);
        if let Some(c) = feat_col {
            h.view_mut((0, c), (r, self.h_f.ncols())).copy_from(&self.h_f);
        }
        h
    }
}

pub(crate) fn dm<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> DMatrix<f64> {
    DMatrix::from_column_slice(R, C, m.as_slice())
}
