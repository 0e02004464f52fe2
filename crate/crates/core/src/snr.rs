//! Quantum signal-to-noise ratio of a quantum lightpath.
//!
//! The received quantum signal is `exp(-alpha * L_q) * P_tx`. Noise is a
//! fixed floor `N_fiber` (dark counts, thermal noise, stray light) plus a
//! crosstalk term: every classical lightpath contributes `N_shared` per
//! kilometre of fiber it shares with the quantum route, whatever its
//! direction of propagation.
//!
//! In photon-count notation the same quantity reads `n_R / (N_f + N_c)`:
//! [`SnrBreakdown::received`] is `n_R`, [`SnrBreakdown::fixed_noise`] is `N_f`
//! and [`SnrBreakdown::crosstalk_noise`] is `N_c`.

use crate::routing::{shared_length_km, Path};
use crate::topology::Topology;

/// How `alpha` enters the attenuation exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Attenuation {
    /// `exp(-alpha * L)` with `alpha` used as given. Reproduces the reference
    /// calibration (`alpha = 0.32`, 60 km gives an SNR of about 31.5).
    #[default]
    Literal,
    /// `alpha` is in dB/km and is converted to nepers first:
    /// `exp(-alpha * ln(10) / 10 * L)`.
    DecibelPerKm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrParams {
    pub alpha: f64,
    pub p_tx: f64,
    pub n_fiber: f64,
    /// Crosstalk per km of shared fiber, per classical channel.
    pub n_shared: f64,
    /// Minimum admissible SNR, linear scale, inclusive.
    pub threshold_linear: f64,
    pub attenuation: Attenuation,
}

impl Default for SnrParams {
    fn default() -> Self {
        Self {
            alpha: 0.32,
            p_tx: 1.0,
            n_fiber: 1.45e-10,
            n_shared: 2.18e-9,
            threshold_linear: 31.5,
            attenuation: Attenuation::Literal,
        }
    }
}

impl SnrParams {
    /// Checks the positivity constraints on every coefficient.
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("alpha", self.alpha),
            ("p_tx", self.p_tx),
            ("n_fiber", self.n_fiber),
            ("threshold", self.threshold_linear),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(format!("{name} must be positive, got {value}"));
            }
        }
        if !(self.n_shared.is_finite() && self.n_shared >= 0.0) {
            return Err(format!(
                "n_shared must be non-negative, got {}",
                self.n_shared
            ));
        }
        Ok(())
    }

    /// Attenuation coefficient in the exponent, per km.
    pub fn exponent_per_km(&self) -> f64 {
        match self.attenuation {
            Attenuation::Literal => self.alpha,
            Attenuation::DecibelPerKm => self.alpha * std::f64::consts::LN_10 / 10.0,
        }
    }
}

/// Signal and noise terms of one SNR evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrBreakdown {
    pub received: f64,
    pub fixed_noise: f64,
    pub crosstalk_noise: f64,
}

impl SnrBreakdown {
    pub fn ratio(&self) -> f64 {
        self.received / (self.fixed_noise + self.crosstalk_noise)
    }
}

/// Signal and noise for a quantum route given the total shared kilometres
/// summed over all classical channels.
pub fn breakdown(quantum_length_km: f64, total_shared_km: f64, params: &SnrParams) -> SnrBreakdown {
    SnrBreakdown {
        received: (-params.exponent_per_km() * quantum_length_km).exp() * params.p_tx,
        fixed_noise: params.n_fiber,
        crosstalk_noise: params.n_shared * total_shared_km,
    }
}

/// Linear SNR of `quantum_path` with every path in `classical_paths` lit.
pub fn compute_snr<'a, I>(
    topology: &Topology,
    quantum_path: &Path,
    classical_paths: I,
    params: &SnrParams,
) -> f64
where
    I: IntoIterator<Item = &'a Path>,
{
    debug_assert!(!quantum_path.is_empty());
    let shared: f64 = classical_paths
        .into_iter()
        .map(|c| shared_length_km(topology, c, quantum_path))
        .sum();
    breakdown(quantum_path.length_km(), shared, params).ratio()
}

pub fn snr_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn db_to_snr(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn admission_ok(snr_linear: f64, params: &SnrParams) -> bool {
    snr_linear >= params.threshold_linear
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn calibration_points() {
        let p = SnrParams::default();
        let sixty = breakdown(60.0, 0.0, &p).ratio();
        assert!(rel(sixty, 31.5) < 0.01, "{sixty}");
        let forty = breakdown(40.0, 40.0, &p).ratio();
        assert!(rel(forty, 31.5) < 0.01, "{forty}");
    }

    #[test]
    fn ten_km_fully_shared() {
        // exp(-3.2) = 0.040762203978366211; denominator 1.45e-10 + 2.18e-8
        let expected = 0.040_762_203_978_366_21 / 2.1945e-8;
        let got = breakdown(10.0, 10.0, &SnrParams::default()).ratio();
        assert!(rel(got, expected) < 1e-12);
        assert!(rel(got, 1.857e6) < 1e-3);
    }

    #[test]
    fn zero_length_limit() {
        let got = breakdown(0.0, 0.0, &SnrParams::default()).ratio();
        assert!(rel(got, 6.896_551_724_137_931e9) < 1e-12);
    }

    #[test]
    fn physical_mode_converts_decibels() {
        let p = SnrParams {
            attenuation: Attenuation::DecibelPerKm,
            ..SnrParams::default()
        };
        // 0.32 dB/km over 60 km is 19.2 dB of loss.
        let expected = 10f64.powf(-1.92) / 1.45e-10;
        assert!(rel(breakdown(60.0, 0.0, &p).ratio(), expected) < 1e-12);
    }

    #[test]
    fn decibels() {
        assert!((snr_to_db(31.5) - 14.98).abs() < 0.01);
        assert_eq!(snr_to_db(1.0), 0.0);
        assert_eq!(snr_to_db(100.0), 20.0);
        assert!(rel(db_to_snr(15.0), 31.622_776_601_683_793) < 1e-12);
    }

    #[test]
    fn inclusive_threshold() {
        let p = SnrParams::default();
        assert!(admission_ok(31.5, &p));
        assert!(!admission_ok(31.49, &p));
        assert!(admission_ok(1e6, &p));
    }

    #[test]
    fn validation() {
        assert!(SnrParams::default().validate().is_ok());
        let bad = SnrParams {
            n_fiber: 0.0,
            ..SnrParams::default()
        };
        assert!(bad.validate().is_err());
        let zero_crosstalk = SnrParams {
            n_shared: 0.0,
            ..SnrParams::default()
        };
        assert!(zero_crosstalk.validate().is_ok());
    }
}
