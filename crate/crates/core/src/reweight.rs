//! Difficulty-adaptive advantage weighting.
//!
//! Maps a group's empirical accuracy `p` (the online difficulty proxy; low
//! accuracy means the prompt is currently hard) to a positive scale factor
//! `w` in `[min_weight, max_weight]`. Five curve families are provided plus
//! `None` for the flat-reward baseline. All families are non-increasing on
//! their monotone domain, so harder prompts never receive smaller weights.

use libm::exp;

use crate::error::{CoreError, Result};

/// Weighting curve family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightFamily {
    /// Piecewise linear ramp from `max_weight` down to `min_weight`.
    Linear,
    /// Hyperbolic decay, most sensitive at low accuracy.
    Inverse,
    /// Logistic decay centred on `midpoint`.
    Exponential,
    /// Logistic decay with a wider weight range for sharper differentiation.
    SteepExponential,
    /// Downward parabola with its vertex at `midpoint`, clipped to the range.
    Quadratic,
    /// Flat weighting (`w = 1` everywhere); the unweighted baseline.
    None,
}

impl WeightFamily {
    pub const ALL: [WeightFamily; 6] = [
        WeightFamily::Linear,
        WeightFamily::Inverse,
        WeightFamily::Exponential,
        WeightFamily::SteepExponential,
        WeightFamily::Quadratic,
        WeightFamily::None,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            WeightFamily::Linear => "linear",
            WeightFamily::Inverse => "inverse",
            WeightFamily::Exponential => "exponential",
            WeightFamily::SteepExponential => "steep_exponential",
            WeightFamily::Quadratic => "quadratic",
            WeightFamily::None => "none",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(WeightFamily::Linear),
            "inverse" => Ok(WeightFamily::Inverse),
            "exponential" => Ok(WeightFamily::Exponential),
            "steep_exponential" => Ok(WeightFamily::SteepExponential),
            "quadratic" => Ok(WeightFamily::Quadratic),
            "none" => Ok(WeightFamily::None),
            other => Err(CoreError::config(alloc::format!(
                "unknown weight family `{other}`"
            ))),
        }
    }
}

/// Parameters of a weighting curve.
///
/// `min_weight`/`max_weight` bound the output range. `midpoint` positions the
/// inverse, exponential, steep-exponential and quadratic curves; the linear
/// ramp instead runs between `ramp_low` and `ramp_high`. `steepness`
/// modulates the decay rate where applicable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReweightConfig {
    pub family: WeightFamily,
    pub min_weight: f64,
    pub max_weight: f64,
    pub midpoint: f64,
    pub ramp_low: f64,
    pub ramp_high: f64,
    pub steepness: f64,
}

impl ReweightConfig {
    /// Default parameter set for `family`.
    pub fn preset(family: WeightFamily) -> Self {
        let (min_weight, max_weight, midpoint, ramp_low, ramp_high, steepness) = match family {
            WeightFamily::Linear => (0.4, 1.5, 0.0, 0.50, 1.00, 0.0),
            WeightFamily::Inverse => (0.4, 0.7, 0.80, 0.0, 0.0, 1.0),
            WeightFamily::Exponential => (0.4, 1.5, 0.75, 0.0, 0.0, 10.0),
            WeightFamily::SteepExponential => (0.3, 2.2, 0.65, 0.0, 0.0, 10.0),
            WeightFamily::Quadratic => (0.4, 1.6, 0.10, 0.0, 0.0, 2.0),
            // Parameters are ignored for the flat baseline; keep them benign.
            WeightFamily::None => (1.0, 1.0, 0.0, 0.0, 1.0, 0.0),
        };
        ReweightConfig {
            family,
            min_weight,
            max_weight,
            midpoint,
            ramp_low,
            ramp_high,
            steepness,
        }
    }

    pub fn flat() -> Self {
        Self::preset(WeightFamily::None)
    }

    pub fn validate(&self) -> Result<()> {
        if self.family == WeightFamily::None {
            return Ok(());
        }
        if !(self.min_weight > 0.0 && self.min_weight <= self.max_weight) {
            return Err(CoreError::config(alloc::format!(
                "weight bounds must satisfy 0 < min <= max, got [{}, {}]",
                self.min_weight,
                self.max_weight
            )));
        }
        if !self.steepness.is_finite() || self.steepness < 0.0 {
            return Err(CoreError::config(alloc::format!(
                "steepness must be finite and >= 0, got {}",
                self.steepness
            )));
        }
        match self.family {
            WeightFamily::Linear => {
                if !(0.0 <= self.ramp_low
                    && self.ramp_low < self.ramp_high
                    && self.ramp_high <= 1.0)
                {
                    return Err(CoreError::config(alloc::format!(
                        "linear ramp must satisfy 0 <= low < high <= 1, got [{}, {}]",
                        self.ramp_low,
                        self.ramp_high
                    )));
                }
            }
            _ => {
                if !(0.0..=1.0).contains(&self.midpoint) {
                    return Err(CoreError::config(alloc::format!(
                        "midpoint must lie in [0, 1], got {}",
                        self.midpoint
                    )));
                }
                // The hyperbola's pole must stay outside [0, 1], otherwise the
                // curve is not a decay on the accuracy domain.
                if self.family == WeightFamily::Inverse && self.steepness * self.midpoint >= 1.0 {
                    return Err(CoreError::config(alloc::format!(
                        "inverse weighting requires steepness * midpoint < 1, got {} * {}",
                        self.steepness,
                        self.midpoint
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Evaluates the adaptive weight `w = f(p)` for a group accuracy `p`.
///
/// The raw curve value is clamped to `[min_weight, max_weight]`; the clamp is
/// the defining clip of the quadratic family and keeps the inverse family
/// inside its advertised range at low accuracy.
pub fn weight(accuracy: f64, cfg: &ReweightConfig) -> Result<f64> {
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(CoreError::domain(alloc::format!(
            "group accuracy must lie in [0, 1], got {accuracy}"
        )));
    }
    cfg.validate()?;
    let (lo, hi) = (cfg.min_weight, cfg.max_weight);
    let span = hi - lo;
    let raw = match cfg.family {
        WeightFamily::None => return Ok(1.0),
        WeightFamily::Linear => {
            if accuracy <= cfg.ramp_low {
                hi
            } else if accuracy >= cfg.ramp_high {
                lo
            } else {
                lo + span * (cfg.ramp_high - accuracy) / (cfg.ramp_high - cfg.ramp_low)
            }
        }
        WeightFamily::Inverse => lo + span / (1.0 + cfg.steepness * (accuracy - cfg.midpoint)),
        WeightFamily::Exponential => {
            lo + span / (1.0 + exp(cfg.steepness * (accuracy - cfg.midpoint)))
        }
        WeightFamily::SteepExponential => {
            let decay = exp(-cfg.steepness * (accuracy - cfg.midpoint));
            lo + span * decay / (1.0 + decay)
        }
        WeightFamily::Quadratic => {
            let offset = accuracy - cfg.midpoint;
            hi - cfg.steepness * offset * offset
        }
    };
    Ok(raw.clamp(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preset(family: WeightFamily) -> ReweightConfig {
        ReweightConfig::preset(family)
    }

    #[test]
    fn preset_parameters() {
        let lin = preset(WeightFamily::Linear);
        assert_eq!(
            (lin.min_weight, lin.max_weight, lin.ramp_low, lin.ramp_high),
            (0.4, 1.5, 0.50, 1.00)
        );
        let inv = preset(WeightFamily::Inverse);
        assert_eq!(
            (inv.min_weight, inv.max_weight, inv.midpoint, inv.steepness),
            (0.4, 0.7, 0.80, 1.0)
        );
        let exp = preset(WeightFamily::Exponential);
        assert_eq!(
            (exp.min_weight, exp.max_weight, exp.midpoint, exp.steepness),
            (0.4, 1.5, 0.75, 10.0)
        );
        let steep = preset(WeightFamily::SteepExponential);
        assert_eq!(
            (
                steep.min_weight,
                steep.max_weight,
                steep.midpoint,
                steep.steepness
            ),
            (0.3, 2.2, 0.65, 10.0)
        );
        let quad = preset(WeightFamily::Quadratic);
        assert_eq!(
            (
                quad.min_weight,
                quad.max_weight,
                quad.midpoint,
                quad.steepness
            ),
            (0.4, 1.6, 0.10, 2.0)
        );
    }

    #[test]
    fn logistic_midpoint_values() {
        // At the midpoint both logistic families sit exactly halfway.
        let w = weight(0.75, &preset(WeightFamily::Exponential)).unwrap();
        assert_eq!(w, 0.4 + 1.1 / 2.0);
        let w = weight(0.65, &preset(WeightFamily::SteepExponential)).unwrap();
        assert_eq!(w, 1.25);
    }

    #[test]
    fn linear_arms() {
        let cfg = preset(WeightFamily::Linear);
        assert_eq!(weight(1.0, &cfg).unwrap(), 0.4);
        assert_eq!(weight(0.5, &cfg).unwrap(), 1.5);
        assert_eq!(weight(0.0, &cfg).unwrap(), 1.5);
    }

    #[test]
    fn inverse_unit_denominator_returns_max() {
        let w = weight(0.8, &preset(WeightFamily::Inverse)).unwrap();
        assert_eq!(w, 0.7);
    }

    #[test]
    fn quadratic_vertex_and_saturation() {
        let cfg = preset(WeightFamily::Quadratic);
        assert_eq!(weight(0.1, &cfg).unwrap(), 1.6);
        // Raw parabola value at p = 1 is -0.02; the clip floors it.
        assert_eq!(weight(1.0, &cfg).unwrap(), 0.4);
    }

    #[test]
    fn exponential_quarter_accuracy_matches_oracle() {
        // Pre-computed from the closed form with (0.4, 1.5, 0.75, 10).
        let w = weight(0.25, &preset(WeightFamily::Exponential)).unwrap();
        assert!((w - 1.492637863983287).abs() < 1e-15, "w = {w}");
    }

    #[test]
    fn flat_family_is_exactly_one() {
        let mut cfg = ReweightConfig::flat();
        // Parameters are ignored for the flat family, even absurd ones.
        cfg.min_weight = -3.0;
        cfg.max_weight = -2.0;
        for p in [0.0, 0.3, 1.0] {
            assert_eq!(weight(p, &cfg).unwrap(), 1.0);
        }
    }

    #[test]
    fn rejects_out_of_range_accuracy() {
        let cfg = preset(WeightFamily::Exponential);
        assert!(matches!(weight(-0.1, &cfg), Err(CoreError::Domain(_))));
        assert!(matches!(weight(1.1, &cfg), Err(CoreError::Domain(_))));
    }

    #[test]
    fn rejects_invalid_configs() {
        let mut cfg = preset(WeightFamily::Exponential);
        cfg.min_weight = 0.0;
        assert!(matches!(weight(0.5, &cfg), Err(CoreError::Config(_))));

        let mut cfg = preset(WeightFamily::Linear);
        cfg.ramp_low = 0.9;
        cfg.ramp_high = 0.5;
        assert!(matches!(weight(0.5, &cfg), Err(CoreError::Config(_))));

        let mut cfg = preset(WeightFamily::Inverse);
        cfg.steepness = 2.0; // pole at p = 0.3, inside the accuracy domain
        assert!(matches!(weight(0.5, &cfg), Err(CoreError::Config(_))));
    }

    #[test]
    fn family_names_round_trip() {
        for family in WeightFamily::ALL {
            assert_eq!(WeightFamily::parse(family.name()).unwrap(), family);
        }
        assert!(WeightFamily::parse("sigmoid").is_err());
    }
}
