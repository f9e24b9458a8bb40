use serde::{Deserialize, Serialize};

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, std_error: 0.0, samples: 0 }
    }

    /// Sample mean and standard error of `values`, summed in order.
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Estimate { value: 0.0, std_error: 0.0, samples: 0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var =
            if n > 1 { values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Estimate { value: mean, std_error: (var / n as f64).sqrt(), samples: n as u64 }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Estimate { value: self.value * factor, std_error: self.std_error * factor.abs(), samples: self.samples }
    }

    /// `|value - target| <= k * std_error + rel * |target|`
    pub fn agrees_with(&self, target: f64, k: f64, rel: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error + rel * target.abs()
    }

    /// Difference to another estimate in combined standard errors.
    pub fn z_score(&self, other: &Estimate) -> f64 {
        let se = (self.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        let diff = (self.value - other.value).abs();
        if se == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / se
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_error() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.value, 2.5);
        // sample variance 5/3, se = sqrt(5/12)
        assert!((e.std_error - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(e.samples, 4);
    }

    #[test]
    fn constant_samples_have_zero_error() {
        let e = Estimate::from_samples(&[2.0; 10]);
        assert_eq!(e.std_error, 0.0);
        assert!(e.agrees_with(2.0, 3.0, 0.0));
    }
}
