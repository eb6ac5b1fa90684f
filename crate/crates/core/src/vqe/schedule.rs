use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    Constant,
    LinearToOne,
    #[default]
    GeometricToOne,
}

/// Initial α and shots inside the initial tail `(0, α]` used for the
/// hardware-scale runs, by asset count.
pub const HARDWARE_SETUP: [(usize, f64, u64); 7] =
    [(5, 0.2, 8000), (15, 0.1, 4000), (25, 0.05, 2000), (35, 0.05, 2000), (45, 0.025, 1000), (55, 0.025, 1000), (12, 0.0125, 3000)];

/// The [`HARDWARE_SETUP`] row for `n` assets, if there is one.
pub fn hardware_setup(n: usize) -> Option<(f64, u64)> {
    HARDWARE_SETUP.iter().find(|r| r.0 == n).map(|r| (r.1, r.2))
}

/// CVaR confidence level as a function of the evaluation index.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlphaSchedule {
    pub initial: f64,
    pub ramp: Ramp,
    /// Evaluation at which a ramp reaches 1; defaults to 60% of the budget.
    pub iterations_to_full: Option<usize>,
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        AlphaSchedule { initial: 0.2, ramp: Ramp::GeometricToOne, iterations_to_full: None }
    }
}

impl AlphaSchedule {
    pub fn constant(alpha: f64) -> Self {
        AlphaSchedule { initial: alpha, ramp: Ramp::Constant, iterations_to_full: None }
    }

    pub fn geometric(initial: f64) -> Self {
        AlphaSchedule { initial, ramp: Ramp::GeometricToOne, iterations_to_full: None }
    }

    pub fn linear(initial: f64) -> Self {
        AlphaSchedule { initial, ramp: Ramp::LinearToOne, iterations_to_full: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.initial > 0.0 && self.initial <= 1.0) {
            return Err(Error::InvalidConfig(format!("initial α = {} outside (0, 1]", self.initial)));
        }
        if self.iterations_to_full == Some(0) {
            return Err(Error::InvalidConfig("iterations_to_full must be positive".into()));
        }
        Ok(())
    }

    /// α at evaluation `t` (0-based) of a run with `budget` evaluations.
    pub fn alpha(&self, t: usize, budget: usize) -> f64 {
        let full = self.iterations_to_full.unwrap_or_else(|| ((0.6 * budget as f64).ceil() as usize).max(1));
        let s = (t as f64 / full as f64).min(1.0);
        let a = match self.ramp {
            Ramp::Constant => self.initial,
            Ramp::LinearToOne => self.initial + (1.0 - self.initial) * s,
            Ramp::GeometricToOne => self.initial * (1.0 / self.initial).powf(s),
        };
        if s >= 1.0 && self.ramp != Ramp::Constant { 1.0 } else { a.clamp(f64::MIN_POSITIVE, 1.0) }
    }
}
