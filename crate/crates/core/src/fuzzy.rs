// SPDX-License-Identifier: Apache-2.0

//! Two-rule fuzzy inference for replica indicator (RI) scores.
//!
//! Each of the four inputs (tier level, file size, usage ratio, free node
//! size) has a LOW and a HIGH triangular membership function. The two rules
//!
//! * low level, small file, high usage, large free space => RI is high
//! * high level, large file, low usage, small free space => RI is low
//!
//! aggregate their antecedents with a fuzzy averaging operator instead of a
//! t-norm, and the crisp score is the center-of-average of the two output
//! centers weighted by the rule strengths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Triangle membership function. `left == peak` or `peak == right` gives a
/// half-open shoulder for the edges of a domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangularMf {
    pub left: f64,
    pub peak: f64,
    pub right: f64,
}

impl TriangularMf {
    pub fn new(left: f64, peak: f64, right: f64) -> Result<Self> {
        let mf = TriangularMf { left, peak, right };
        mf.validate()?;
        Ok(mf)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.left.is_finite() && self.peak.is_finite() && self.right.is_finite();
        if !finite || self.left > self.peak || self.peak > self.right {
            return Err(Error::config(format!(
                "malformed triangle ({}, {}, {}): need left <= peak <= right",
                self.left, self.peak, self.right
            )));
        }
        Ok(())
    }

    pub fn membership(&self, x: f64) -> f64 {
        tri_membership(x, self)
    }
}

/// Degree of membership of `x` in `mf`, in `[0, 1]`.
pub fn tri_membership(x: f64, mf: &TriangularMf) -> f64 {
    if x == mf.peak {
        1.0
    } else if x < mf.peak {
        if x <= mf.left {
            0.0
        } else {
            (x - mf.left) / (mf.peak - mf.left)
        }
    } else if x >= mf.right {
        0.0
    } else {
        (mf.right - x) / (mf.right - mf.peak)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzyVariable {
    pub domain_min: f64,
    pub domain_max: f64,
    pub low: TriangularMf,
    pub high: TriangularMf,
}

impl Default for FuzzyVariable {
    fn default() -> Self {
        FuzzyVariable {
            domain_min: 0.0,
            domain_max: 1.0,
            low: TriangularMf { left: 0.0, peak: 0.0, right: 1.0 },
            high: TriangularMf { left: 0.0, peak: 1.0, right: 1.0 },
        }
    }
}

impl FuzzyVariable {
    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.domain_min < self.domain_max) {
            return Err(Error::config(format!("{name}: domain_min must be < domain_max")));
        }
        self.low.validate()?;
        self.high.validate()?;
        for (label, mf) in [("low", &self.low), ("high", &self.high)] {
            if mf.left < self.domain_min || mf.right > self.domain_max {
                return Err(Error::config(format!(
                    "{name}: {label} support [{}, {}] leaves the domain [{}, {}]",
                    mf.left, mf.right, self.domain_min, self.domain_max
                )));
            }
        }
        // Both memberships are piecewise linear, so their sum is minimal at
        // one of the breakpoints.
        let breakpoints = [
            self.domain_min,
            self.domain_max,
            self.low.left,
            self.low.peak,
            self.low.right,
            self.high.left,
            self.high.peak,
            self.high.right,
        ];
        for x in breakpoints {
            if self.low.membership(x) + self.high.membership(x) <= 0.0 {
                return Err(Error::config(format!(
                    "{name}: LOW and HIGH are both zero at {x} (dead zone)"
                )));
            }
        }
        Ok(())
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.domain_min, self.domain_max)
    }
}

/// Antecedent aggregation operator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AvgOperator {
    /// `lambda * max + (1 - lambda) * min`
    #[default]
    Convex,
    /// `lambda * max + lambda * min`, kept for comparison. Not bounded by
    /// the operands.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FuzzySystemConfig {
    pub level: FuzzyVariable,
    pub file_size: FuzzyVariable,
    pub usage_ratio: FuzzyVariable,
    pub node_size: FuzzyVariable,
    pub output_low_center: f64,
    pub output_high_center: f64,
    pub lambda: f64,
    pub operator: AvgOperator,
    /// Usage ratio that maps to the top of the usage domain. Larger ratios
    /// are clamped.
    pub usage_saturation: f64,
}

impl Default for FuzzySystemConfig {
    fn default() -> Self {
        FuzzySystemConfig {
            level: FuzzyVariable::default(),
            file_size: FuzzyVariable::default(),
            usage_ratio: FuzzyVariable::default(),
            node_size: FuzzyVariable::default(),
            output_low_center: 0.0,
            output_high_center: 5.0,
            lambda: 0.5,
            operator: AvgOperator::Convex,
            usage_saturation: 10.0,
        }
    }
}

impl FuzzySystemConfig {
    pub fn validate(&self) -> Result<()> {
        self.level.validate("level")?;
        self.file_size.validate("file_size")?;
        self.usage_ratio.validate("usage_ratio")?;
        self.node_size.validate("node_size")?;
        if !(self.output_low_center < self.output_high_center) {
            return Err(Error::config("output_low_center must be < output_high_center"));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::config(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        if !(self.usage_saturation > 0.0) {
            return Err(Error::config("usage_saturation must be > 0"));
        }
        Ok(())
    }

    fn aggregate(&self, degrees: &[f64]) -> Result<f64> {
        match self.operator {
            AvgOperator::Convex => fuzzy_avg(degrees, self.lambda),
            AvgOperator::Literal => {
                let (lo, hi) = min_max(degrees)?;
                Ok(self.lambda * hi + self.lambda * lo)
            }
        }
    }
}

fn min_max(degrees: &[f64]) -> Result<(f64, f64)> {
    if degrees.is_empty() {
        return Err(Error::Usage("fuzzy average of an empty degree list".into()));
    }
    Ok(degrees
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d))))
}

/// n-ary fuzzy averaging operator `lambda * max + (1 - lambda) * min`.
pub fn fuzzy_avg(degrees: &[f64], lambda: f64) -> Result<f64> {
    let (lo, hi) = min_max(degrees)?;
    if lo == hi {
        return Ok(lo);
    }
    Ok((lambda * hi + (1.0 - lambda) * lo).clamp(lo, hi))
}

/// Rule strengths `(w_high, w_low)` after clamping the inputs into their
/// domains.
pub fn rule_weights(
    level: f64,
    file_size: f64,
    usage_ratio: f64,
    node_size: f64,
    cfg: &FuzzySystemConfig,
) -> Result<(f64, f64)> {
    let level = cfg.level.clamp(level);
    let file_size = cfg.file_size.clamp(file_size);
    let usage_ratio = cfg.usage_ratio.clamp(usage_ratio);
    let node_size = cfg.node_size.clamp(node_size);

    let w_high = cfg.aggregate(&[
        cfg.level.low.membership(level),
        cfg.file_size.low.membership(file_size),
        cfg.usage_ratio.high.membership(usage_ratio),
        cfg.node_size.high.membership(node_size),
    ])?;
    let w_low = cfg.aggregate(&[
        cfg.level.high.membership(level),
        cfg.file_size.high.membership(file_size),
        cfg.usage_ratio.low.membership(usage_ratio),
        cfg.node_size.low.membership(node_size),
    ])?;
    Ok((w_high, w_low))
}

/// Crisp RI score, always within `[output_low_center, output_high_center]`
/// under the convex operator.
pub fn infer_ri(
    level: f64,
    file_size: f64,
    usage_ratio: f64,
    node_size: f64,
    cfg: &FuzzySystemConfig,
) -> Result<f64> {
    let (w_high, w_low) = rule_weights(level, file_size, usage_ratio, node_size, cfg)?;
    let total = w_high + w_low;
    if !(total > 0.0) {
        return Err(Error::config("total rule weight is zero; membership functions leave a dead zone"));
    }
    let (lo, hi) = (cfg.output_low_center, cfg.output_high_center);
    let t = w_high / total;
    if t >= 1.0 {
        return Ok(hi);
    }
    if t <= 0.0 {
        return Ok(lo);
    }
    Ok((lo + (hi - lo) * t).clamp(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn low() -> TriangularMf {
        TriangularMf { left: 0.0, peak: 0.0, right: 1.0 }
    }

    #[test]
    fn membership_at_peak_is_one() {
        let mf = TriangularMf::new(0.2, 0.5, 0.9).unwrap();
        assert_eq!(tri_membership(0.5, &mf), 1.0);
        assert_eq!(tri_membership(0.0, &low()), 1.0);
    }

    #[test]
    fn membership_outside_support_is_zero() {
        let mf = TriangularMf::new(0.2, 0.5, 0.9).unwrap();
        assert_eq!(tri_membership(0.1, &mf), 0.0);
        assert_eq!(tri_membership(0.2, &mf), 0.0);
        assert_eq!(tri_membership(0.9, &mf), 0.0);
        assert_eq!(tri_membership(3.0, &mf), 0.0);
        assert_eq!(tri_membership(-0.5, &low()), 0.0);
    }

    #[test]
    fn membership_on_ramp() {
        assert_eq!(tri_membership(0.25, &low()), 0.75);
        let mf = TriangularMf::new(0.0, 2.0, 4.0).unwrap();
        assert_eq!(tri_membership(1.0, &mf), 0.5);
        assert_eq!(tri_membership(3.0, &mf), 0.5);
    }

    #[test]
    fn malformed_triangle_is_rejected() {
        assert!(TriangularMf::new(0.5, 0.2, 0.9).is_err());
        assert!(TriangularMf::new(0.0, 0.9, 0.5).is_err());
        assert!(TriangularMf::new(f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn avg_examples() {
        assert_eq!(fuzzy_avg(&[0.3; 4], 0.0).unwrap(), 0.3);
        assert_eq!(fuzzy_avg(&[0.3; 4], 0.77).unwrap(), 0.3);
        assert_eq!(fuzzy_avg(&[0.2, 0.9], 1.0).unwrap(), 0.9);
        assert_eq!(fuzzy_avg(&[0.2, 0.9], 0.0).unwrap(), 0.2);
        let v = fuzzy_avg(&[0.2, 0.9, 0.4, 0.6], 0.5).unwrap();
        assert!((v - 0.55).abs() < 1e-15);
    }

    #[test]
    fn avg_of_nothing_is_an_error() {
        assert!(matches!(fuzzy_avg(&[], 0.5), Err(Error::Usage(_))));
    }

    #[test]
    fn literal_operator_doubles_equal_degrees() {
        let cfg = FuzzySystemConfig { operator: AvgOperator::Literal, lambda: 0.5, ..Default::default() };
        assert_eq!(cfg.aggregate(&[0.4, 0.4]).unwrap(), 0.4);
        let cfg = FuzzySystemConfig { operator: AvgOperator::Literal, lambda: 1.0, ..Default::default() };
        assert_eq!(cfg.aggregate(&[0.4, 0.4]).unwrap(), 0.8);
    }

    #[test]
    fn rule_extremes_hit_output_centers() {
        let cfg = FuzzySystemConfig::default();
        assert_eq!(infer_ri(0.0, 0.0, 1.0, 1.0, &cfg).unwrap(), cfg.output_high_center);
        assert_eq!(infer_ri(1.0, 1.0, 0.0, 0.0, &cfg).unwrap(), cfg.output_low_center);
    }

    #[test]
    fn half_memberships_land_midway() {
        let cfg = FuzzySystemConfig::default();
        let v = infer_ri(0.5, 0.5, 0.5, 0.5, &cfg).unwrap();
        assert_eq!(v, 2.5);
    }

    #[test]
    fn inputs_are_clamped() {
        let cfg = FuzzySystemConfig::default();
        assert_eq!(
            infer_ri(-3.0, -1.0, 40.0, 7.0, &cfg).unwrap(),
            infer_ri(0.0, 0.0, 1.0, 1.0, &cfg).unwrap()
        );
    }

    #[test]
    fn dead_zone_is_rejected_at_validation() {
        let mut cfg = FuzzySystemConfig::default();
        cfg.usage_ratio.low = TriangularMf { left: 0.0, peak: 0.0, right: 0.3 };
        cfg.usage_ratio.high = TriangularMf { left: 0.6, peak: 1.0, right: 1.0 };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_rule_weight_is_a_config_error() {
        let mut cfg = FuzzySystemConfig::default();
        for var in [&mut cfg.level, &mut cfg.file_size, &mut cfg.usage_ratio, &mut cfg.node_size] {
            var.low = TriangularMf { left: 0.0, peak: 0.0, right: 0.3 };
            var.high = TriangularMf { left: 0.6, peak: 1.0, right: 1.0 };
        }
        assert!(matches!(infer_ri(0.45, 0.45, 0.45, 0.45, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn config_bounds_are_checked() {
        let cfg = FuzzySystemConfig { lambda: 1.5, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = FuzzySystemConfig { output_low_center: 5.0, output_high_center: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
        let mut cfg = FuzzySystemConfig::default();
        cfg.level.high = TriangularMf { left: 0.0, peak: 1.0, right: 2.0 };
        assert!(cfg.validate().is_err());
        assert!(FuzzySystemConfig::default().validate().is_ok());
    }

    #[test]
    fn continuity_on_sampled_grid() {
        let cfg = FuzzySystemConfig::default();
        let h = 1e-6;
        for i in 0..=10 {
            for j in 0..=10 {
                let a = i as f64 / 10.0;
                let b = j as f64 / 10.0;
                let base = infer_ri(a, b, 1.0 - a, b, &cfg).unwrap();
                for (da, db) in [(h, 0.0), (0.0, h), (-h, 0.0), (0.0, -h)] {
                    let moved = infer_ri(a + da, b + db, 1.0 - a - da, b + db, &cfg).unwrap();
                    assert!((moved - base).abs() < 1e-3, "jump at ({a}, {b})");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn avg_is_between_min_and_max(
            degrees in prop::collection::vec(0.0f64..=1.0, 1..8),
            lambda in 0.0f64..=1.0,
        ) {
            let v = fuzzy_avg(&degrees, lambda).unwrap();
            let lo = degrees.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = degrees.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= v && v <= hi);
        }

        #[test]
        fn ri_is_bounded(
            level in -0.5f64..1.5,
            size in -0.5f64..1.5,
            usage in -0.5f64..1.5,
            node in -0.5f64..1.5,
            lambda in 0.0f64..=1.0,
        ) {
            let cfg = FuzzySystemConfig { lambda, ..Default::default() };
            let v = infer_ri(level, size, usage, node, &cfg).unwrap();
            prop_assert!(cfg.output_low_center <= v && v <= cfg.output_high_center);
            prop_assert_eq!(v.to_bits(), infer_ri(level, size, usage, node, &cfg).unwrap().to_bits());
        }
    }
}
