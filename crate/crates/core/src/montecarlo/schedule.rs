use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Framework {
    PowerLaw,
    Subexp,
    Fmm,
    Custom,
}

/// Inputs of a threshold schedule (a, b, c) at scale L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "framework", rename_all = "snake_case")]
pub enum ScheduleInputs {
    /// P_{L_k} ≤ L_k^{-κ(1+θ)^k}.
    PowerLaw { kappa: f64, theta: f64, k: u32, d: u32 },
    /// P_{L_k} ≤ exp(-L_k^δ).
    Subexp { delta: f64 },
    /// P_L ≤ exp(-mL).
    Fmm { m: f64 },
    Custom { a: f64, b: f64, c: f64 },
}

impl ScheduleInputs {
    pub fn framework(&self) -> Framework {
        match self {
            ScheduleInputs::PowerLaw { .. } => Framework::PowerLaw,
            ScheduleInputs::Subexp { .. } => Framework::Subexp,
            ScheduleInputs::Fmm { .. } => Framework::Fmm,
            ScheduleInputs::Custom { .. } => Framework::Custom,
        }
    }

    /// Closed-form (a, b, c) at scale `l`.
    pub fn thresholds(&self, l: u64) -> (f64, f64, f64) {
        let lf = l as f64;
        match *self {
            ScheduleInputs::PowerLaw { kappa, theta, k, d } => {
                let growth = (1.0 + theta).powi(k as i32);
                (
                    lf.powf(-0.6 * kappa * growth),
                    lf.powf(-0.2 * kappa * growth),
                    lf.powf(-(0.2 * kappa - f64::from(d) / 2.0) * growth),
                )
            }
            ScheduleInputs::Subexp { delta } => {
                let t = lf.powf(delta);
                ((-t / 3.0).exp(), (-2.0 * t / 3.0).exp(), (-t / 8.0).exp())
            }
            ScheduleInputs::Fmm { m } => ((-m * lf / 3.0).exp(), (-2.0 * m * lf / 3.0).exp(), (-m * lf / 8.0).exp()),
            ScheduleInputs::Custom { a, b, c } => (a, b, c),
        }
    }
}

/// Thresholds for the singular-width theorem, with the slack of b ≤ min{a c²/N, c}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub framework: Framework,
    pub inputs: ScheduleInputs,
    pub l: u64,
    /// Ball cardinality N.
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// b / (a c² / N); at most 1 when the first side holds.
    pub ratio_derivative_side: f64,
    /// b / c; at most 1 when the second side holds.
    pub ratio_width_side: f64,
    pub feasible: bool,
}

impl ScheduleParams {
    /// Evaluate the schedule without enforcing feasibility; `feasible` records the outcome.
    pub fn evaluate(inputs: ScheduleInputs, l: u64, n: usize) -> Self {
        let (a, b, c) = inputs.thresholds(l);
        let ratio_derivative_side = b / (a * c * c / n as f64);
        let ratio_width_side = b / c;
        ScheduleParams {
            framework: inputs.framework(),
            inputs,
            l,
            n,
            a,
            b,
            c,
            ratio_derivative_side,
            ratio_width_side,
            feasible: ratio_derivative_side <= 1.0 && ratio_width_side <= 1.0,
        }
    }

    /// Grid step c/50 used to discharge "∃ E ∈ I".
    pub fn default_grid_step(&self) -> f64 {
        self.c / 50.0
    }
}

/// The schedule at (L, N), or `ScheduleInfeasible` naming the failing side.
pub fn parameter_schedule(inputs: ScheduleInputs, l: u64, n: usize) -> Result<ScheduleParams> {
    if n == 0 {
        return Err(Error::InvalidParams("ball cardinality must be positive".into()));
    }
    let s = ScheduleParams::evaluate(inputs, l, n);
    if !(s.a > 0.0 && s.b > 0.0 && s.c > 0.0) {
        return Err(Error::InvalidParams(format!("thresholds must be positive, got a={}, b={}, c={}", s.a, s.b, s.c)));
    }
    if s.ratio_width_side > 1.0 {
        return Err(Error::ScheduleInfeasible(format!("b = {:e} exceeds c = {:e}", s.b, s.c)));
    }
    if s.ratio_derivative_side > 1.0 {
        return Err(Error::ScheduleInfeasible(format!(
            "b = {:e} exceeds a c^2 / N = {:e} (N = {n})",
            s.b,
            s.a * s.c * s.c / n as f64
        )));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(x: f64, y: f64) -> bool {
        (x - y).abs() <= 1e-14 * y.abs()
    }

    #[test]
    fn fmm_values() {
        let s = ScheduleParams::evaluate(ScheduleInputs::Fmm { m: 3.0 }, 10, 12);
        assert!(close(s.a, (-10f64).exp()) && close(s.b, (-20f64).exp()) && close(s.c, (-3.75f64).exp()));
        assert!(s.feasible);
        parameter_schedule(ScheduleInputs::Fmm { m: 3.0 }, 10, 12).unwrap();
        // The 1D ball of radius 10 has 21 points, too many for b ≤ a c² / N at this scale.
        let err = parameter_schedule(ScheduleInputs::Fmm { m: 3.0 }, 10, 21).unwrap_err();
        assert!(matches!(err, Error::ScheduleInfeasible(ref m) if m.contains("a c^2 / N")));
    }

    #[test]
    fn subexp_values() {
        let s = ScheduleParams::evaluate(ScheduleInputs::Subexp { delta: 0.25 }, 16, 1);
        assert!(close(s.a, (-2.0f64 / 3.0).exp()));
        assert!(close(s.b, (-4.0f64 / 3.0).exp()));
        assert!(close(s.c, (-0.25f64).exp()));
    }

    #[test]
    fn b_above_c_is_infeasible() {
        let err = parameter_schedule(ScheduleInputs::Custom { a: 1.0, b: 0.5, c: 0.1 }, 4, 1).unwrap_err();
        assert!(matches!(err, Error::ScheduleInfeasible(ref m) if m.contains("exceeds c")));
    }

    #[test]
    fn fmm_becomes_feasible_at_large_scale() {
        // e^{mL/12} ≥ 2L + 1 first holds near L = 58 for m = 1 in one dimension.
        assert!(parameter_schedule(ScheduleInputs::Fmm { m: 1.0 }, 16, 33).is_err());
        assert!(parameter_schedule(ScheduleInputs::Fmm { m: 1.0 }, 60, 121).is_ok());
        let s = ScheduleParams::evaluate(ScheduleInputs::Fmm { m: 1.0 }, 16, 33);
        assert!(!s.feasible);
        assert!(s.ratio_derivative_side > 8.0);
    }

    #[test]
    fn power_law_exponents() {
        let s = ScheduleParams::evaluate(ScheduleInputs::PowerLaw { kappa: 10.0, theta: 0.5, k: 2, d: 1 }, 16, 33);
        let g = 1.5f64.powi(2);
        assert!(close(s.a, 16f64.powf(-6.0 * g)));
        assert!(close(s.b, 16f64.powf(-2.0 * g)));
        assert!(close(s.c, 16f64.powf(-1.5 * g)));
    }
}
