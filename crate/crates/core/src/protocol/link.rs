use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid link budget: {0}")]
pub struct LinkBudgetError(&'static str);

/// Range thresholds of the radio link, measured rover to base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "RawBudget")]
pub struct LinkBudget {
    full_strength_range_m: f64,
    dropout_range_m: f64,
    degraded_loss_rate: f64,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawBudget {
    full_strength_range_m: f64,
    dropout_range_m: f64,
    degraded_loss_rate: f64,
}

impl TryFrom<RawBudget> for LinkBudget {
    type Error = LinkBudgetError;

    fn try_from(r: RawBudget) -> Result<Self, Self::Error> {
        LinkBudget::new(r.full_strength_range_m, r.dropout_range_m, r.degraded_loss_rate)
    }
}

impl LinkBudget {
    pub fn new(full_strength_range_m: f64, dropout_range_m: f64, degraded_loss_rate: f64) -> Result<Self, LinkBudgetError> {
        if !(full_strength_range_m > 0.0) {
            return Err(LinkBudgetError("full-strength range must be positive"));
        }
        if !(dropout_range_m >= full_strength_range_m) {
            return Err(LinkBudgetError("dropout range below full-strength range"));
        }
        if !(0.0..=1.0).contains(&degraded_loss_rate) {
            return Err(LinkBudgetError("loss rate outside [0, 1]"));
        }
        Ok(Self { full_strength_range_m, dropout_range_m, degraded_loss_rate })
    }

    pub fn full_strength_range_m(&self) -> f64 {
        self.full_strength_range_m
    }

    pub fn dropout_range_m(&self) -> f64 {
        self.dropout_range_m
    }

    pub fn degraded_loss_rate(&self) -> f64 {
        self.degraded_loss_rate
    }
}

impl Default for LinkBudget {
    /// Full strength out to 900 m, unusable past 1050 m.
    fn default() -> Self {
        Self { full_strength_range_m: 900.0, dropout_range_m: 1050.0, degraded_loss_rate: 0.3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LinkQuality {
    Dead,
    Degraded,
    Full,
}

pub fn link_quality(distance_m: f64, budget: &LinkBudget) -> LinkQuality {
    if distance_m < budget.full_strength_range_m {
        LinkQuality::Full
    } else if distance_m <= budget.dropout_range_m {
        LinkQuality::Degraded
    } else {
        LinkQuality::Dead
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_ranges() {
        let b = LinkBudget::default();
        assert_eq!(link_quality(500.0, &b), LinkQuality::Full);
        assert_eq!(link_quality(1000.0, &b), LinkQuality::Degraded);
        assert_eq!(link_quality(1200.0, &b), LinkQuality::Dead);
        assert_eq!(link_quality(0.0, &b), LinkQuality::Full);
        assert_eq!(link_quality(1050.0, &b), LinkQuality::Degraded);
    }

    #[test]
    fn budget_validation() {
        assert!(LinkBudget::new(0.0, 10.0, 0.1).is_err());
        assert!(LinkBudget::new(100.0, 50.0, 0.1).is_err());
        assert!(LinkBudget::new(100.0, 100.0, 1.5).is_err());
        assert!(LinkBudget::new(100.0, 100.0, 0.0).is_ok());
        assert!(serde_json::from_str::<LinkBudget>(r#"{"fullStrengthRangeM":5,"dropoutRangeM":1,"degradedLossRate":0}"#).is_err());
    }
}
