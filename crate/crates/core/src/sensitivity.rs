//! The flux-limitation function S and its admissibility check.
//!
//! The chemotactic drift is `n * S(|grad c|^2) * grad c`. The built-in
//! prototype is `S(sigma) = k_s * (1 + sigma)^(-theta/2)`; user-supplied
//! limiters come in as tabulated `(sigma, S)` pairs with linear
//! interpolation and are admitted through [`FluxLimiter::verify_bound`].

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq)]
enum LimiterKind {
    Prototype,
    Tabulated { sigmas: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxLimiter {
    k_s: f64,
    theta: f64,
    kind: LimiterKind,
}

impl FluxLimiter {
    /// The prototype limiter `k_s * (1 + sigma)^(-theta/2)`.
    ///
    /// `theta = 0` (constant sensitivity) is accepted; runs with it are
    /// flagged as outside the proven decay regime by the CLI, not rejected.
    pub fn prototype(k_s: f64, theta: f64) -> Result<Self> {
        if !(k_s.is_finite() && k_s > 0.0) {
            return Err(CoreError::InvalidArgument {
                context: format!("k_s = {k_s} must be positive"),
            });
        }
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(CoreError::InvalidArgument {
                context: format!("theta = {theta} must be nonnegative"),
            });
        }
        Ok(Self {
            k_s,
            theta,
            kind: LimiterKind::Prototype,
        })
    }

    /// A tabulated limiter with linear interpolation between samples and
    /// constant extrapolation past the last sigma. Requires strictly
    /// increasing sigmas starting at 0. `k_s` and `theta` carry the claimed
    /// bound parameters used for admissibility checking and time-step control.
    pub fn tabulated(sigmas: Vec<f64>, values: Vec<f64>, k_s: f64, theta: f64) -> Result<Self> {
        if sigmas.len() != values.len() || sigmas.len() < 2 {
            return Err(CoreError::InvalidLimiterTable {
                context: format!(
                    "need >= 2 rows with matching columns, got {} sigmas / {} values",
                    sigmas.len(),
                    values.len()
                ),
            });
        }
        if sigmas[0] != 0.0 {
            return Err(CoreError::InvalidLimiterTable {
                context: format!("first sigma must be 0, got {}", sigmas[0]),
            });
        }
        for w in sigmas.windows(2) {
            if !(w[1] > w[0]) {
                return Err(CoreError::InvalidLimiterTable {
                    context: format!("sigmas not strictly increasing at {} -> {}", w[0], w[1]),
                });
            }
        }
        if !sigmas.iter().chain(values.iter()).all(|v| v.is_finite()) {
            return Err(CoreError::InvalidLimiterTable {
                context: "non-finite entry".into(),
            });
        }
        if !(k_s.is_finite() && k_s > 0.0) || !(theta.is_finite() && theta >= 0.0) {
            return Err(CoreError::InvalidArgument {
                context: "tabulated limiter needs k_s > 0 and theta >= 0".into(),
            });
        }
        Ok(Self {
            k_s,
            theta,
            kind: LimiterKind::Tabulated { sigmas, values },
        })
    }

    /// Parses a two-column CSV body `sigma,value` (comments with '#',
    /// optional header line).
    pub fn tabulated_from_csv(text: &str, k_s: f64, theta: f64) -> Result<Self> {
        let mut sigmas = Vec::new();
        let mut values = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',');
            let a = parts.next().map(str::trim);
            let b = parts.next().map(str::trim);
            match (a, b) {
                (Some(a), Some(b)) => {
                    let (pa, pb) = (a.parse::<f64>(), b.parse::<f64>());
                    match (pa, pb) {
                        (Ok(s), Ok(v)) => {
                            sigmas.push(s);
                            values.push(v);
                        }
                        _ if sigmas.is_empty() => continue, // header line
                        _ => {
                            return Err(CoreError::InvalidLimiterTable {
                                context: format!("line {}: cannot parse '{line}'", ln + 1),
                            })
                        }
                    }
                }
                _ => {
                    return Err(CoreError::InvalidLimiterTable {
                        context: format!("line {}: expected 'sigma,value'", ln + 1),
                    })
                }
            }
        }
        Self::tabulated(sigmas, values, k_s, theta)
    }

    pub fn k_s(&self) -> f64 {
        self.k_s
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_prototype(&self) -> bool {
        matches!(self.kind, LimiterKind::Prototype)
    }

    /// Evaluates S at `sigma >= 0`.
    pub fn eval(&self, sigma: f64) -> Result<f64> {
        if !(sigma >= 0.0) {
            return Err(CoreError::NegativeGradientSquare { sigma });
        }
        Ok(self.eval_unchecked(sigma))
    }

    /// Evaluation without the sign check, for hot loops where sigma is a sum
    /// of squares by construction.
    #[inline]
    pub fn eval_unchecked(&self, sigma: f64) -> f64 {
        match &self.kind {
            LimiterKind::Prototype => self.k_s * (1.0 + sigma).powf(-0.5 * self.theta),
            LimiterKind::Tabulated { sigmas, values } => {
                let n = sigmas.len();
                if sigma >= sigmas[n - 1] {
                    return values[n - 1];
                }
                let hi = sigmas.partition_point(|&s| s <= sigma).min(n - 1);
                let lo = hi - 1;
                let w = (sigma - sigmas[lo]) / (sigmas[hi] - sigmas[lo]);
                values[lo] + w * (values[hi] - values[lo])
            }
        }
    }

    /// dS/dsigma for the prototype: `-(theta/2) k_s (1 + sigma)^(-theta/2 - 1)`.
    /// Tabulated limiters do not provide one.
    pub fn eval_prime(&self, sigma: f64) -> Result<f64> {
        if !(sigma >= 0.0) {
            return Err(CoreError::NegativeGradientSquare { sigma });
        }
        match self.kind {
            LimiterKind::Prototype => {
                Ok(-0.5 * self.theta * self.k_s * (1.0 + sigma).powf(-0.5 * self.theta - 1.0))
            }
            LimiterKind::Tabulated { .. } => Err(CoreError::NoDerivative),
        }
    }

    /// Checks `|S(sigma)| <= k_s_claim * (1 + sigma)^(-theta_claim/2)` on a
    /// log-spaced sample grid over sigma in [0, 1e8], with relative slack
    /// 1e-12. Returns true iff the bound holds at every sample.
    pub fn verify_bound(&self, k_s_claim: f64, theta_claim: f64, samples: usize) -> Result<bool> {
        if samples < 10 {
            return Err(CoreError::InvalidArgument {
                context: format!("samples = {samples}, need >= 10"),
            });
        }
        const SLACK: f64 = 1e-12;
        let lo: f64 = 1e-8;
        let hi: f64 = 1e8;
        let m = samples - 1;
        for i in 0..samples {
            let sigma = if i == 0 {
                0.0
            } else {
                lo * (hi / lo).powf((i - 1) as f64 / (m - 1).max(1) as f64)
            };
            let bound = k_s_claim * (1.0 + sigma).powf(-0.5 * theta_claim);
            if self.eval_unchecked(sigma).abs() > bound * (1.0 + SLACK) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_prototype_values() {
        let l = FluxLimiter::prototype(2.0, 1.0).unwrap();
        assert_eq!(l.eval(0.0).unwrap(), 2.0);
        let l = FluxLimiter::prototype(1.0, 2.0).unwrap();
        assert!((l.eval(3.0).unwrap() - 0.25).abs() < 1e-15);
        let l = FluxLimiter::prototype(1.0, 1.0).unwrap();
        assert!((l.eval(8.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(l.eval(-1.0).is_err());
    }

    #[test]
    fn eval_prime_values_and_fd_oracle() {
        let l = FluxLimiter::prototype(1.0, 0.0).unwrap();
        assert_eq!(l.eval_prime(5.0).unwrap(), 0.0);
        let l = FluxLimiter::prototype(1.0, 2.0).unwrap();
        assert_eq!(l.eval_prime(0.0).unwrap(), -1.0);

        // central finite differences of eval match eval_prime
        let l = FluxLimiter::prototype(1.3, 0.7).unwrap();
        let h = 1e-5;
        for sigma in [0.5f64, 5.0, 37.0, 100.0] {
            let fd = (l.eval(sigma + h).unwrap() - l.eval(sigma - h).unwrap()) / (2.0 * h);
            let exact = l.eval_prime(sigma).unwrap();
            assert!(
                (fd - exact).abs() < 1e-8,
                "sigma = {sigma}: fd = {fd}, exact = {exact}"
            );
        }
    }

    #[test]
    fn eval_monotone_and_bounded() {
        let l = FluxLimiter::prototype(2.5, 1.5).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let sigma = 1e-3 * (1.2f64).powi(i);
            let v = l.eval(sigma).unwrap();
            assert!(v <= prev + 1e-15);
            assert!(v <= l.k_s());
            prev = v;
        }
    }

    #[test]
    fn verify_bound_cases() {
        let proto = FluxLimiter::prototype(1.0, 1.0).unwrap();
        assert!(proto.verify_bound(1.0, 1.0, 100).unwrap());
        // smaller claimed theta is a weaker decay demand
        assert!(proto.verify_bound(1.0, 0.5, 100).unwrap());
        // a constant limiter at 2 k_s fails already at sigma = 0
        let flat = FluxLimiter::tabulated(vec![0.0, 1e9], vec![2.0, 2.0], 1.0, 1.0).unwrap();
        assert!(!flat.verify_bound(1.0, 1.0, 100).unwrap());
        assert!(proto.verify_bound(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn tabulated_interpolation_and_validation() {
        let t = FluxLimiter::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.25], 1.0, 1.0).unwrap();
        assert_eq!(t.eval(0.0).unwrap(), 1.0);
        assert!((t.eval(0.5).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(t.eval(5.0).unwrap(), 0.25);
        assert!(t.eval_prime(0.5).is_err());

        assert!(FluxLimiter::tabulated(vec![0.5, 1.0], vec![1.0, 1.0], 1.0, 1.0).is_err());
        assert!(FluxLimiter::tabulated(vec![0.0, 0.0], vec![1.0, 1.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn csv_parse() {
        let text = "sigma,value\n0.0,1.0\n1.0,0.5\n# tail\n4.0,0.25\n";
        let t = FluxLimiter::tabulated_from_csv(text, 1.0, 1.0).unwrap();
        assert_eq!(t.eval(4.0).unwrap(), 0.25);
        assert!(FluxLimiter::tabulated_from_csv("0.0\n", 1.0, 1.0).is_err());
    }
}
