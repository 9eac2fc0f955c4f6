//! Deterministic probe sets and seeded random states.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::bivector::StateTS2;
use super::linalg::Vec3;

/// The generator used for every seeded probe set.
pub type ProbeRng = ChaCha8Rng;

pub fn probe_rng(seed: u64) -> ProbeRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` nearly uniform points on the unit sphere (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Uniform point on the unit sphere.
pub fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = random_in_cube(rng, 1.0);
        let n2 = v.norm_squared();
        if n2 > 1e-4 && n2 <= 1.0 {
            return v / n2.sqrt();
        }
    }
}

/// Components uniform in `[-scale, scale]`.
pub fn random_in_cube<R: Rng>(rng: &mut R, scale: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-scale..=scale),
        rng.gen_range(-scale..=scale),
        rng.gen_range(-scale..=scale),
    )
}

/// Random state with unit `gamma` and `M` in the cube of half-width
/// `m_scale`.
pub fn random_state<R: Rng>(rng: &mut R, m_scale: f64) -> StateTS2 {
    let gamma = random_unit(rng);
    let m = random_in_cube(rng, m_scale);
    StateTS2::new(m, gamma)
}

/// Random state on the zero level `(M, gamma) = 0`.
pub fn random_zero_level_state<R: Rng>(rng: &mut R, m_scale: f64) -> StateTS2 {
    let s = random_state(rng, m_scale);
    StateTS2::new(s.m - s.gamma * s.m.dot(s.gamma), s.gamma)
}
