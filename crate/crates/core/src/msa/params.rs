use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named exponent bundles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Power-law induction: α = 3/2, β = 1/2, τ = 1/8, ϱ = 1/6.
    Section2,
    /// Sub-exponential induction: α = 4/3, β = 1/3, δ = 1/4, σ = 1/3, ϱ = 1/3, τ = 1/8.
    Section8,
    Custom,
}

/// Exponents and rates driving the ball classification and the scale induction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleParams {
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub rho: f64,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    pub m: f64,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub theta: Option<f64>,
    pub l0: u64,
    pub preset: Preset,
}

/// How well a parameter set matches the relations of the sub-exponential induction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section8Relations {
    /// (ϱ - σ(α-1)) / 2.
    pub tau_expected: f64,
    pub tau_declared: f64,
    pub tau_consistent: bool,
    /// δ < min{β, σ}.
    pub delta_ok: bool,
}

impl ScaleParams {
    pub fn section2(m: f64, l0: u64) -> Self {
        ScaleParams {
            alpha: 1.5,
            beta: 0.5,
            tau: 0.125,
            rho: 1.0 / 6.0,
            sigma: None,
            delta: None,
            m,
            kappa: None,
            theta: None,
            l0,
            preset: Preset::Section2,
        }
    }

    /// The tabulated values are kept as printed, including τ = 1/8; see
    /// [`ScaleParams::section8_relations`] for how they sit against τ = (ϱ - σ(α-1))/2.
    pub fn section8(m: f64, l0: u64) -> Self {
        ScaleParams {
            alpha: 4.0 / 3.0,
            beta: 1.0 / 3.0,
            tau: 0.125,
            rho: 1.0 / 3.0,
            sigma: Some(1.0 / 3.0),
            delta: Some(0.25),
            m,
            kappa: None,
            theta: None,
            l0,
            preset: Preset::Section8,
        }
    }

    /// Set κ and derive θ = (2/α - 2d/κ) - 1.
    pub fn with_kappa(mut self, kappa: f64, d: u32) -> Self {
        self.kappa = Some(kappa);
        self.theta = Some(2.0 / self.alpha - 2.0 * f64::from(d) / kappa - 1.0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParams(what.to_string()));
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return bad("alpha must lie in (1, 2)");
        }
        for (name, v) in [("beta", self.beta), ("tau", self.tau), ("rho", self.rho)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParams(format!("{name} must lie in (0, 1)")));
            }
        }
        for (name, v) in [("sigma", self.sigma), ("delta", self.delta)] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::InvalidParams(format!("{name} must lie in (0, 1)")));
                }
            }
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return bad("m must be positive");
        }
        if self.l0 < 1 {
            return bad("L_0 must be at least 1");
        }
        Ok(())
    }

    pub fn section8_relations(&self) -> Option<Section8Relations> {
        let sigma = self.sigma?;
        let delta = self.delta?;
        let tau_expected = (self.rho - sigma * (self.alpha - 1.0)) / 2.0;
        Some(Section8Relations {
            tau_expected,
            tau_declared: self.tau,
            tau_consistent: (tau_expected - self.tau).abs() <= 1e-12,
            delta_ok: delta < self.beta.min(sigma),
        })
    }

    /// Smallest admissible distance ⌈L^{(1+ϱ)/α}⌉ in the nonsingularity test.
    pub fn ns_min_distance(&self, l: u64) -> u64 {
        ceil_power(l, (1.0 + self.rho) / self.alpha)
    }

    /// Contraction factor q = exp(-γ(m, ℓ) ℓ) of Green functions across an ℓ-ball.
    pub fn subharmonic_q(&self, ell: u64) -> f64 {
        (-gamma(self.m, ell, self.tau) * ell as f64).exp()
    }

    /// Resonance threshold exp(-L^β).
    pub fn resonance_threshold(&self, l: u64) -> f64 {
        (-(l as f64).powf(self.beta)).exp()
    }
}

/// γ(m, L) = m (1 + L^{-τ}).
pub fn gamma(m: f64, l: u64, tau: f64) -> f64 {
    m * (1.0 + (l as f64).powf(-tau))
}

/// `x^e` snapped to the nearest integer when within floating noise of it.
pub(crate) fn snapped_power(x: u64, e: f64) -> f64 {
    let v = (x as f64).powf(e);
    let r = v.round();
    if (v - r).abs() <= 8.0 * f64::EPSILON * v.max(1.0) {
        r
    } else {
        v
    }
}

pub(crate) fn ceil_power(x: u64, e: f64) -> u64 {
    snapped_power(x, e).ceil() as u64
}

pub(crate) fn floor_power(x: u64, e: f64) -> u64 {
    snapped_power(x, e).floor() as u64
}

/// Scales L_0 < L_1 < ... < L_K with L_{k+1} = ⌊L_k^α⌋.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleSequence {
    pub lengths: Vec<u64>,
}

const MAX_SCALE: u64 = 1 << 40;

pub fn scale_sequence(p: &ScaleParams, k: usize) -> Result<ScaleSequence> {
    if p.l0 < 2 {
        return Err(Error::DegenerateScale(format!("L_0 = {} must be at least 2", p.l0)));
    }
    let mut lengths = vec![p.l0];
    for step in 0..k {
        let prev = lengths[step];
        let next = floor_power(prev, p.alpha);
        if next <= prev {
            return Err(Error::DegenerateScale(format!("L_{} = {next} does not exceed L_{step} = {prev}", step + 1)));
        }
        if next > MAX_SCALE {
            return Err(Error::DegenerateScale(format!("L_{} = {next} overflows the scale budget", step + 1)));
        }
        lengths.push(next);
    }
    Ok(ScaleSequence { lengths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(2.0, 256, 0.125), 3.0);
        assert_eq!(gamma(1.7, 99, 0.0), 3.4);
        assert_eq!(gamma(1.0, 1, 0.125), 2.0);
    }

    #[test]
    fn scale_sequence_examples() {
        let p = ScaleParams::section2(1.0, 8);
        let seq = scale_sequence(&p, 2).unwrap();
        assert_eq!(seq.lengths, vec![8, 22, 103]);

        let p16 = ScaleParams::section2(1.0, 16);
        assert_eq!(scale_sequence(&p16, 1).unwrap().lengths, vec![16, 64]);

        let mut flat = p.clone();
        flat.alpha = 1.0;
        assert!(matches!(scale_sequence(&flat, 1), Err(Error::DegenerateScale(_))));
        assert!(matches!(scale_sequence(&ScaleParams::section2(1.0, 1), 1), Err(Error::DegenerateScale(_))));
    }

    #[test]
    fn presets() {
        let p2 = ScaleParams::section2(1.0, 8);
        assert_eq!((p2.alpha, p2.beta, p2.tau, p2.rho), (1.5, 0.5, 0.125, 1.0 / 6.0));
        assert!((((1.0 + p2.rho) / p2.alpha) - 7.0 / 9.0).abs() < 1e-15);
        p2.validate().unwrap();

        let p8 = ScaleParams::section8(1.0, 8);
        p8.validate().unwrap();
        let rel = p8.section8_relations().unwrap();
        assert!(rel.delta_ok);
        assert!((rel.tau_expected - 1.0 / 9.0).abs() < 1e-15);
        assert!(!rel.tau_consistent);
    }

    #[test]
    fn distance_threshold_rounds_up_and_snaps_exact_powers() {
        let p = ScaleParams::section2(1.0, 8);
        // 16^{7/9} = 8.64, 256^{7/9} = 74.66.
        assert_eq!(p.ns_min_distance(16), 9);
        assert_eq!(p.ns_min_distance(256), 75);
        assert_eq!(p.ns_min_distance(512), 128);
        assert_eq!(p.ns_min_distance(1), 1);
        assert_eq!(p.ns_min_distance(0), 0);
    }

    #[test]
    fn validation_rejects_out_of_range() {
        let mut p = ScaleParams::section2(1.0, 8);
        p.beta = 1.2;
        assert!(p.validate().is_err());
        let mut p = ScaleParams::section2(-1.0, 8);
        assert!(p.validate().is_err());
        p.m = 1.0;
        p.sigma = Some(0.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn theta_from_kappa() {
        let p = ScaleParams::section2(1.0, 8).with_kappa(12.0, 1);
        // 2/α - 2d/κ - 1 = 4/3 - 1/6 - 1.
        assert!((p.theta.unwrap() - (4.0 / 3.0 - 1.0 / 6.0 - 1.0)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn gamma_monotone(m in 0.1f64..5.0, l in 1u64..10_000, tau in 0.01f64..0.9) {
            prop_assert!(gamma(m, l + 1, tau) < gamma(m, l, tau));
            prop_assert!(gamma(m * 1.01, l, tau) > gamma(m, l, tau));
        }

        #[test]
        fn scale_steps_bracket_the_power(l0 in 2u64..200, alpha in 1.05f64..1.95) {
            let mut p = ScaleParams::section2(1.0, l0);
            p.alpha = alpha;
            if let Ok(seq) = scale_sequence(&p, 2) {
                for w in seq.lengths.windows(2) {
                    let exact = (w[0] as f64).powf(alpha);
                    prop_assert!(w[1] as f64 <= exact * (1.0 + 1e-12));
                    prop_assert!(exact < (w[1] + 1) as f64);
                    prop_assert!(w[1] > w[0]);
                }
            }
        }
    }
}
