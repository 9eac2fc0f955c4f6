//! Phase points on R^6 = (M, gamma), skew bivectors and the Jacobiator.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::field::richardson;
use super::linalg::{Mat3, Vec3};
use crate::tolerance::FD_STEP;

/// A phase point `x = (M, gamma)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StateTS2 {
    pub m: Vec3,
    pub gamma: Vec3,
}

impl StateTS2 {
    pub const fn new(m: Vec3, gamma: Vec3) -> Self {
        StateTS2 { m, gamma }
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.m.x, self.m.y, self.m.z, self.gamma.x, self.gamma.y, self.gamma.z]
    }

    pub fn from_array(a: &[f64; 6]) -> Self {
        StateTS2 {
            m: Vec3::new(a[0], a[1], a[2]),
            gamma: Vec3::new(a[3], a[4], a[5]),
        }
    }

    pub fn norm(self) -> f64 {
        (self.m.norm_squared() + self.gamma.norm_squared()).sqrt()
    }

    /// `| |gamma|^2 - 1 | <= tol`
    pub fn is_on_sphere(self, tol: f64) -> bool {
        (self.gamma.norm_squared() - 1.0).abs() <= tol
    }
}

/// A 6x6 skew-symmetric matrix; every constructor builds it from skew blocks
/// so that `P^T = -P` holds exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bivector6(pub(crate) [[f64; 6]; 6]);

impl Bivector6 {
    pub const ZERO: Bivector6 = Bivector6([[0.0; 6]; 6]);

    /// `[[mm, mg], [-mg^T, gg]]` for skew `mm`, `gg` and arbitrary `mg`.
    pub fn from_blocks(mm: Mat3, mg: Mat3, gg: Mat3) -> Self {
        let mut p = [[0.0; 6]; 6];
        for i in 0..3 {
            for j in 0..3 {
                p[i][j] = mm.0[i][j];
                p[i][j + 3] = mg.0[i][j];
                p[i + 3][j] = -mg.0[j][i];
                p[i + 3][j + 3] = gg.0[i][j];
            }
        }
        let mut b = Bivector6(p);
        b.enforce_skew();
        b
    }

    /// Skew part `(A - A^T)/2` of an arbitrary 6x6 matrix.
    pub fn skew_part(a: &[[f64; 6]; 6]) -> Self {
        let mut p = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                p[i][j] = 0.5 * (a[i][j] - a[j][i]);
            }
        }
        Bivector6(p)
    }

    fn enforce_skew(&mut self) {
        for i in 0..6 {
            self.0[i][i] = 0.0;
            for j in (i + 1)..6 {
                self.0[j][i] = -self.0[i][j];
            }
        }
    }

    pub fn entries(&self) -> &[[f64; 6]; 6] {
        &self.0
    }

    pub fn apply(&self, v: &[f64; 6]) -> [f64; 6] {
        std::array::from_fn(|i| (0..6).map(|j| self.0[i][j] * v[j]).sum())
    }

    /// `J P J^T`, skew by construction.
    pub fn congruence(&self, j: &[[f64; 6]; 6]) -> Bivector6 {
        let mut jp = [[0.0; 6]; 6];
        for i in 0..6 {
            for k in 0..6 {
                jp[i][k] = (0..6).map(|l| j[i][l] * self.0[l][k]).sum();
            }
        }
        let mut out = [[0.0; 6]; 6];
        for i in 0..6 {
            for k in 0..6 {
                out[i][k] = (0..6).map(|l| jp[i][l] * j[k][l]).sum();
            }
        }
        Bivector6::skew_part(&out)
    }

    pub fn max_abs_diff(&self, other: &Bivector6) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                m = m.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        m
    }

    pub fn is_exactly_skew(&self) -> bool {
        (0..6).all(|i| (0..6).all(|j| self.0[i][j] == -self.0[j][i]))
    }
}

impl Index<(usize, usize)> for Bivector6 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Bivector6 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

/// Cyclic-sum obstruction to the Jacobi identity for a bivector field on R^N:
/// the maximum over `(i, j, k)` of
/// `|sum_l P^{li} d_l P^{jk} + P^{lj} d_l P^{ki} + P^{lk} d_l P^{ij}|`.
/// Derivatives are Richardson-extrapolated central differences with step
/// `FD_STEP * max(1, |x|)`.
pub fn jacobiator_n<const N: usize, F>(field: F, x: &[f64; N]) -> f64
where
    F: Fn(&[f64; N]) -> [[f64; N]; N],
{
    let scale = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    let step = FD_STEP * scale;
    let p = field(x);

    // dp[l][j][k] = d_l P^{jk}
    let mut dp = vec![[[0.0; N]; N]; N];
    for (l, slot) in dp.iter_mut().enumerate() {
        let flat = richardson(
            |h| {
                let mut y = *x;
                y[l] += h;
                Flat(field(&y))
            },
            step,
        );
        *slot = flat.0;
    }

    let mut worst: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                let mut s = 0.0;
                for l in 0..N {
                    s += p[l][i] * dp[l][j][k] + p[l][j] * dp[l][k][i] + p[l][k] * dp[l][i][j];
                }
                worst = worst.max(s.abs());
            }
        }
    }
    worst
}

/// Jacobiator of a bivector field on R^6 at `x`.
pub fn jacobiator<F>(field: F, x: &StateTS2) -> f64
where
    F: Fn(&StateTS2) -> Bivector6,
{
    jacobiator_n(|y: &[f64; 6]| field(&StateTS2::from_array(y)).0, &x.to_array())
}

struct Flat<const N: usize>([[f64; N]; N]);

impl<const N: usize> super::field::Richardson for Flat<N> {
    fn scaled_diff(plus: Self, minus: Self, scale: f64) -> Self {
        Flat(std::array::from_fn(|i| {
            std::array::from_fn(|j| (plus.0[i][j] - minus.0[i][j]) * scale)
        }))
    }
    fn extrapolate(fine: Self, coarse: Self) -> Self {
        Flat(std::array::from_fn(|i| {
            std::array::from_fn(|j| (4.0 * fine.0[i][j] - coarse.0[i][j]) / 3.0)
        }))
    }
}
