use ains_geometry::{skew, Pose};
use nalgebra::{DMatrix, DVector, Vector3};

use crate::jac::dm;
use crate::FeatureJacobian;

/// Global position components, or a known global direction seen locally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GlobalMeasModel {
    PosX,
    PosY,
    PosZ,
    Orientation(Vector3<f64>),
}

impl GlobalMeasModel {
    pub fn dim(&self) -> usize {
        match self {
            Self::Orientation(_) => 3,
            _ => 1,
        }
    }
}

pub fn global_measure_and_jacobian(model: &GlobalMeasModel, pose: &Pose) -> (DVector<f64>, FeatureJacobian) {
    let axis = |i: usize| {
        let mut h_p = DMatrix::zeros(1, 3);
        h_p[(0, i)] = 1.0;
        let j = FeatureJacobian { h_theta: DMatrix::zeros(1, 3), h_p, h_f: DMatrix::zeros(1, 0) };
        (DVector::from_element(1, pose.p[i]), j)
    };
    match model {
        GlobalMeasModel::PosX => axis(0),
        GlobalMeasModel::PosY => axis(1),
        GlobalMeasModel::PosZ => axis(2),
        GlobalMeasModel::Orientation(nn) => {
            let z = pose.rot() * nn.normalize();
            let j = FeatureJacobian { h_theta: dm(&skew(&z)), h_p: DMatrix::zeros(3, 3), h_f: DMatrix::zeros(3, 0) };
            (DVector::from_column_slice(z.as_slice()), j)
        }
    }
}
