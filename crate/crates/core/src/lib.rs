//! Exact and Monte Carlo engines for the deformed Z_d toric-code state and
//! the d-state clock model, together with the checks that tie the two
//! together.
//!
//! The quantum side (`qudit`, `kitaev`) works with dense amplitude vectors
//! and is only feasible on tiny tori. The classical side (`clock_exact`,
//! `clock_mc`) enumerates or samples the clock model. `bridge` compares the
//! two, and `scan` runs the Monte Carlo phase scans.

pub mod bridge;
pub mod clock_exact;
pub mod clock_mc;
pub mod error;
pub mod io;
pub mod kitaev;
pub mod lattice;
pub mod qudit;
pub mod scan;
pub mod stats;

pub use error::{Error, Result};

/// Resource limits shared by the exact engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Caps {
    /// Largest dense amplitude vector (number of complex entries).
    pub memory: u128,
    /// Largest number of enumerated clock configurations.
    pub enumeration: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            memory: qudit::DEFAULT_MEMORY_CAP,
            enumeration: clock_exact::DEFAULT_ENUM_CAP,
        }
    }
}

/// Version string written into manifests.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Convert the quantum deformation strength into the clock temperature.
///
/// This is the only place the factor of two between the two pictures
/// appears: `T = 1 / (2 beta)`. `beta = 0` maps to infinite temperature.
pub fn temperature_from_beta(beta: f64) -> f64 {
    1.0 / (2.0 * beta)
}

/// Inverse of [`temperature_from_beta`].
pub fn beta_from_temperature(t: f64) -> f64 {
    1.0 / (2.0 * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dictionary_round_trips() {
        for &b in &[0.05, 0.5, 1.0, 3.7] {
            let t = temperature_from_beta(b);
            assert!((beta_from_temperature(t) - b).abs() < 1e-15);
        }
        assert!(temperature_from_beta(0.0).is_infinite());
        assert_eq!(beta_from_temperature(f64::INFINITY), 0.0);
    }
}
