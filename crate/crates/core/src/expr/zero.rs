use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::simplify::{is_polynomial, to_poly};
use super::{Bindings, Expr};
use crate::error::Result;

pub const ZERO_SAMPLE_COUNT: usize = 64;
pub const ZERO_SAMPLE_SEED: u64 = 0x6761_7567_655f_6c61;
pub const ZERO_TOLERANCE: f64 = 1e-12;
const SAMPLE_RANGE: f64 = 2.0;

/// How a zero test reached its verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProofMode {
    /// Decided from the canonical form.
    Proved,
    /// Decided by evaluation at seeded random points.
    Sampled,
}

impl ProofMode {
    /// `Sampled` if either input was sampled.
    pub fn and(self, other: ProofMode) -> ProofMode {
        if self == ProofMode::Proved && other == ProofMode::Proved {
            ProofMode::Proved
        } else {
            ProofMode::Sampled
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroTest {
    pub is_zero: bool,
    pub mode: ProofMode,
}

pub(super) fn is_identically_zero(e: &Expr, constants: &Bindings) -> Result<ZeroTest> {
    let poly = to_poly(e);
    if poly.terms.is_empty() {
        return Ok(ZeroTest {
            is_zero: true,
            mode: ProofMode::Proved,
        });
    }
    // A nonzero canonical polynomial cannot vanish everywhere. Coefficients
    // at rounding level are left to the sampled test.
    if is_polynomial(&poly) && poly.terms.values().any(|c| c.abs() >= ZERO_TOLERANCE) {
        return Ok(ZeroTest {
            is_zero: false,
            mode: ProofMode::Proved,
        });
    }
    let simplified = poly.to_expr();
    let mut rng = ChaCha8Rng::seed_from_u64(ZERO_SAMPLE_SEED);
    let mut is_zero = true;
    for _ in 0..ZERO_SAMPLE_COUNT {
        let x = rng.random_range(-SAMPLE_RANGE..SAMPLE_RANGE);
        let t = rng.random_range(-SAMPLE_RANGE..SAMPLE_RANGE);
        let v = simplified.evaluate_at(x, t, constants)?;
        if !(v.abs() < ZERO_TOLERANCE) {
            is_zero = false;
        }
    }
    Ok(ZeroTest {
        is_zero,
        mode: ProofMode::Sampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::expr::Var;

    fn zero(src: &str) -> ZeroTest {
        Expr::parse(src)
            .unwrap()
            .is_identically_zero(&Bindings::new())
            .unwrap()
    }

    #[test]
    fn second_time_derivative_of_linear_in_t() {
        let e = Expr::parse("x^2 + 3*t")
            .unwrap()
            .differentiate(Var::T)
            .differentiate(Var::T);
        let z = e.is_identically_zero(&Bindings::new()).unwrap();
        assert_eq!(
            z,
            ZeroTest {
                is_zero: true,
                mode: ProofMode::Proved
            }
        );
    }

    #[test]
    fn nonzero_constant_is_proved_nonzero() {
        let e = Expr::parse("x*t")
            .unwrap()
            .differentiate(Var::X)
            .differentiate(Var::T);
        assert_eq!(
            e.is_identically_zero(&Bindings::new()).unwrap(),
            ZeroTest {
                is_zero: false,
                mode: ProofMode::Proved
            }
        );
    }

    #[test]
    fn rounding_level_coefficients_count_as_zero() {
        let z = zero("0.2*x - 0.19999999999999996*x");
        assert!(z.is_zero);
        assert_eq!(z.mode, ProofMode::Sampled);
        assert!(!zero("1e-9*x").is_zero);
    }

    #[test]
    fn pythagorean_identity_needs_sampling() {
        assert_eq!(
            zero("sin(x)^2 + cos(x)^2 - 1"),
            ZeroTest {
                is_zero: true,
                mode: ProofMode::Sampled
            }
        );
    }

    #[test]
    fn sampled_oracle_for_pythagorean_identity() {
        // Independent check of the sampled verdict: evaluate the raw
        // expression at the same seeded points.
        let e = Expr::parse("sin(x)^2 + cos(x)^2 - 1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(ZERO_SAMPLE_SEED);
        for _ in 0..ZERO_SAMPLE_COUNT {
            let x: f64 = rng.random_range(-2.0..2.0);
            let t: f64 = rng.random_range(-2.0..2.0);
            let v = e.evaluate_at(x, t, &Bindings::new()).unwrap();
            assert!(v.abs() < ZERO_TOLERANCE);
        }
    }

    #[test]
    fn sampling_needs_constant_values() {
        let e = Expr::parse("q*sin(x)").unwrap();
        assert!(matches!(
            e.is_identically_zero(&Bindings::new()),
            Err(Error::UnboundSymbol(s)) if s == "q"
        ));
        let z = e
            .is_identically_zero(&Bindings::new().with("q", 0.0))
            .unwrap();
        assert!(z.is_zero);
        assert_eq!(z.mode, ProofMode::Sampled);
    }

    #[test]
    fn polynomial_in_named_constants_is_decided_structurally() {
        // No binding needed for k: 2k is a nonzero polynomial.
        let z = zero("2*k");
        assert!(!z.is_zero);
        assert_eq!(z.mode, ProofMode::Proved);
    }

    #[test]
    fn sampled_nonzero() {
        let z = zero("sin(x)*t");
        assert!(!z.is_zero);
        assert_eq!(z.mode, ProofMode::Sampled);
    }
}
