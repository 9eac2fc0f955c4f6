use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{Mat3, ScalarField, Vec3};

/// Potentials with analytic gradients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Potential {
    #[default]
    Zero,
    /// `(r, gamma)`
    Linear { r: [f64; 3] },
    /// `(gamma, C gamma)` with symmetric `C` given by rows.
    Quadratic { c: [[f64; 3]; 3] },
}

impl Potential {
    pub fn linear(r: Vec3) -> Self {
        Potential::Linear { r: r.to_array() }
    }

    pub fn quadratic(c: Mat3) -> Result<Self> {
        if !c.is_symmetric(0.0) {
            return Err(Error::Config("quadratic potential matrix must be symmetric".into()));
        }
        Ok(Potential::Quadratic { c: c.0 })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Potential::Zero => true,
            Potential::Linear { r } => r.iter().all(|v| *v == 0.0),
            Potential::Quadratic { c } => c.iter().flatten().all(|v| *v == 0.0),
        }
    }

    pub fn scaled(&self, s: f64) -> Potential {
        match self {
            Potential::Zero => Potential::Zero,
            Potential::Linear { r } => Potential::Linear { r: r.map(|v| v * s) },
            Potential::Quadratic { c } => Potential::Quadratic {
                c: c.map(|row| row.map(|v| v * s)),
            },
        }
    }

    pub fn eval(&self, g: Vec3) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Linear { r } => Vec3::from_array(*r).dot(g),
            Potential::Quadratic { c } => g.dot(Mat3(*c) * g),
        }
    }

    pub fn grad(&self, g: Vec3) -> Vec3 {
        match self {
            Potential::Zero => Vec3::ZERO,
            Potential::Linear { r } => Vec3::from_array(*r),
            Potential::Quadratic { c } => (Mat3(*c) * g) * 2.0,
        }
    }
}

impl ScalarField for Potential {
    fn value(&self, g: Vec3) -> f64 {
        self.eval(g)
    }

    fn gradient(&self, g: Vec3) -> Option<Vec3> {
        Some(self.grad(g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::gradient_mismatch;

    #[test]
    fn analytic_gradients_match_fd() {
        let pots = [
            Potential::linear(Vec3::new(0.1, -0.2, 0.3)),
            Potential::quadratic(Mat3([[0.5, 0.1, 0.0], [0.1, -0.3, 0.2], [0.0, 0.2, 0.7]])).unwrap(),
        ];
        for p in pots {
            let d = gradient_mismatch(&p, Vec3::new(0.3, 0.4, -0.5)).unwrap();
            assert!(d < 1e-9, "{p:?}: {d}");
        }
    }

    #[test]
    fn asymmetric_quadratic_rejected() {
        assert!(Potential::quadratic(Mat3([[0.0, 1.0, 0.0], [0.0; 3], [0.0; 3]])).is_err());
    }

    #[test]
    fn json_shape() {
        let p = Potential::linear(Vec3::new(1.0, 0.0, 0.0));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"kind":"linear","r":[1.0,0.0,0.0]}"#);
        assert_eq!(serde_json::from_str::<Potential>(r#"{"kind":"zero"}"#).unwrap(), Potential::Zero);
    }
}
