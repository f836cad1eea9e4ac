//! Evaluated inequality instances and log-log scaling fits.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One evaluated inequality: left side, right side, their ratio, and the
/// parameter tuple it was evaluated at. A `≲` bound never comes with a
/// constant, so the ratio *is* the empirical constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateCheck {
    pub check_id: String,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs` when `rhs > 0`; `0` with `zero_rhs` set otherwise.
    pub ratio: f64,
    pub zero_rhs: bool,
    /// Set once a refinement pass confirmed the ratio is grid-converged.
    pub refinement_stable: Option<bool>,
    pub n: usize,
}

impl EstimateCheck {
    pub fn new(check_id: impl Into<String>, lhs: f64, rhs: f64, n: usize) -> Self {
        let zero_rhs = rhs == 0.0;
        EstimateCheck {
            check_id: check_id.into(),
            params: BTreeMap::new(),
            lhs,
            rhs,
            ratio: if zero_rhs { 0.0 } else { lhs / rhs },
            zero_rhs,
            refinement_stable: None,
            n,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_params(mut self, kv: &[(&str, f64)]) -> Self {
        for (k, v) in kv {
            self.params.insert((*k).to_string(), *v);
        }
        self
    }
}

/// Least-squares fit of `log(value)` against `log(1/nu)`.
///
/// `slope` is the growth exponent: `value ~ nu^{-slope}`. A resolvent bound
/// `nu^a ||w|| ≲ ||F||` therefore passes when `slope ≤ a + tol`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFit {
    pub nus: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

impl ScalingFit {
    pub fn fit(nus: &[f64], values: &[f64]) -> Self {
        assert_eq!(nus.len(), values.len());
        assert!(nus.len() >= 2, "scaling fit needs at least two points");
        let xs: Vec<f64> = nus.iter().map(|nu| -nu.ln()).collect();
        let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let (slope, intercept, r2) = linear_fit(&xs, &ys);
        ScalingFit {
            nus: nus.to_vec(),
            values: values.to_vec(),
            slope,
            intercept,
            r2,
        }
    }
}

/// Ordinary least squares `y = slope x + intercept`, returning `r²`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exponent() {
        let nus = [1e-3f64, 1e-4, 1e-5, 1e-6];
        let values: Vec<f64> = nus.iter().map(|nu| 3.0 * nu.powf(-0.625)).collect();
        let fit = ScalingFit::fit(&nus, &values);
        assert!((fit.slope - 0.625).abs() < 1e-12);
        assert!(fit.r2 > 1.0 - 1e-12);
    }

    #[test]
    fn constant_values_give_zero_slope() {
        let nus = [1e-3, 1e-4, 1e-5];
        let values = [2.5, 2.5, 2.5];
        let fit = ScalingFit::fit(&nus, &values);
        assert!(fit.slope.abs() < 1e-14);
    }

    #[test]
    fn zero_rhs_is_flagged() {
        let c = EstimateCheck::new("x", 0.0, 0.0, 64);
        assert!(c.zero_rhs);
        assert_eq!(c.ratio, 0.0);
    }
}
