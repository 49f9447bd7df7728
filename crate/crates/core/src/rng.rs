//! Seeded standard-normal stream used to build random problem instances.
//!
//! Uniforms come from ChaCha8 (a counter-based stream cipher generator) seeded
//! with `ChaCha8Rng::seed_from_u64(seed)`. Each uniform takes the top 53 bits of
//! one `next_u64` draw. Pairs of uniforms `(u1, u2)` are mapped through the
//! Box-Muller transform
//!
//! ```text
//! z0 = sqrt(-2 ln u1) cos(2π u2)
//! z1 = sqrt(-2 ln u1) sin(2π u2)
//! ```
//!
//! with `u1 ∈ (0, 1]` so the logarithm is always finite. Both outputs are used,
//! `z0` first.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const TWO_POW_53: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 / TWO_POW_53
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.standard_normal();
        }
    }
}
