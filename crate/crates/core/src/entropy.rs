//! Concave entropy functionals `S(ρ) = tr h(ρ) = Σ_i h(λ_i)`.
//!
//! Values are in nats. The log-determinant functional diverges on singular
//! states; that case is represented by `f64::NEG_INFINITY`, which compares
//! below every finite value. Use [`margin`] rather than plain subtraction when
//! comparing entropies so two sentinels compare equal instead of producing NaN.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matcore::Spectrum;
use crate::states::{DensityMatrix, OutcomeEnsemble};

/// Eigenvalues at or below this make the log-determinant diverge.
pub const LOG_DET_FLOOR: f64 = 1e-14;

/// Allowed deviation of a spectrum from unit sum.
pub const DISTRIBUTION_TOL: f64 = 1e-9;

const CLAMP_TOL: f64 = 1e-10;

/// Order `α` of a power-sum entropy; positive, finite and not 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenyiOrder(f64);

impl RenyiOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidFunctional(format!(
                "renyi order must be positive and finite, got {alpha}"
            )));
        }
        if alpha == 1.0 {
            return Err(Error::InvalidFunctional(
                "renyi order 1 is the von Neumann limit; use von-neumann".into(),
            ));
        }
        Ok(Self(alpha))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Caller-supplied concave `h` on `[0, 1]`.
#[derive(Clone)]
pub struct CustomConcave {
    name: String,
    h: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CustomConcave {
    /// Accepts `h` if it passes a sampled midpoint-concavity check on a
    /// 100-point grid of `[0, 1]`.
    pub fn new(name: impl Into<String>, h: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        const GRID: usize = 100;
        let xs: Vec<f64> = (0..GRID).map(|i| i as f64 / (GRID - 1) as f64).collect();
        for (i, &x) in xs.iter().enumerate() {
            for &y in &xs[i + 1..] {
                let mid = h(0.5 * (x + y));
                let chord = 0.5 * (h(x) + h(y));
                if mid.is_nan() || mid < chord - 1e-12 {
                    return Err(Error::InvalidFunctional(format!(
                        "h is not concave between {x} and {y}"
                    )));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            h: Arc::new(h),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomConcave {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomConcave").field("name", &self.name).finish()
    }
}

/// A concave entropy `S(ρ) = Σ h(λ_i)`.
#[derive(Clone, Debug)]
pub enum EntropyFunctional {
    /// `h(x) = −x ln x`, with `0 ln 0 = 0`.
    VonNeumann,
    /// `h(x) = x − x²`, so `S = 1 − tr ρ²`.
    ///
    /// The alternative normalization `h(x) = 1 − x²` adds the constant
    /// `d − 1` on unit-trace spectra and satisfies the same inequalities.
    Linear,
    /// Power sum with the sign chosen so that `h` is concave:
    /// `x^α` for `α < 1`, `−x^α` for `α > 1`.
    Renyi(RenyiOrder),
    /// `h(x) = ln x`; `−∞` when any eigenvalue is at or below `1e-14`.
    LogDet,
    Custom(CustomConcave),
}

impl EntropyFunctional {
    /// The four built-in families at the orders used by the campaigns.
    pub fn builtins() -> Vec<EntropyFunctional> {
        vec![
            Self::VonNeumann,
            Self::Linear,
            Self::Renyi(RenyiOrder(0.5)),
            Self::Renyi(RenyiOrder(2.0)),
            Self::LogDet,
        ]
    }

    pub fn renyi(alpha: f64) -> Result<Self> {
        Ok(Self::Renyi(RenyiOrder::new(alpha)?))
    }

    /// `h(x)` for `x ∈ [0, 1]`.
    pub fn h(&self, x: f64) -> f64 {
        match self {
            Self::VonNeumann => {
                if x <= 0.0 {
                    0.0
                } else {
                    -x * x.ln()
                }
            }
            Self::Linear => x - x * x,
            Self::Renyi(RenyiOrder(alpha)) => {
                let v = x.max(0.0).powf(*alpha);
                if *alpha < 1.0 {
                    v
                } else {
                    -v
                }
            }
            Self::LogDet => {
                if x <= LOG_DET_FLOOR {
                    f64::NEG_INFINITY
                } else {
                    x.ln()
                }
            }
            Self::Custom(c) => (c.h)(x),
        }
    }

    /// `h(0)`: the contribution of each padded zero eigenvalue.
    pub fn h_at_zero(&self) -> f64 {
        self.h(0.0)
    }
}

impl PartialEq for EntropyFunctional {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Custom(a), Self::Custom(b)) => Arc::ptr_eq(&a.h, &b.h),
            (Self::Renyi(a), Self::Renyi(b)) => a == b,
            _ => std::mem::discriminant(self) == std::mem::discriminant(other),
        }
    }
}

/// Selector strings: `von-neumann`, `linear`, `renyi:<alpha>`, `log-det`.
impl FromStr for EntropyFunctional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "von-neumann" => Ok(Self::VonNeumann),
            "linear" => Ok(Self::Linear),
            "log-det" => Ok(Self::LogDet),
            _ => {
                let alpha = s
                    .strip_prefix("renyi:")
                    .ok_or_else(|| Error::InvalidFunctional(format!("unknown selector `{s}`")))?;
                let alpha: f64 = alpha
                    .parse()
                    .map_err(|_| Error::InvalidFunctional(format!("bad renyi order `{alpha}`")))?;
                Self::renyi(alpha)
            }
        }
    }
}

impl fmt::Display for EntropyFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::VonNeumann => write!(f, "von-neumann"),
            Self::Linear => write!(f, "linear"),
            Self::Renyi(RenyiOrder(alpha)) => write!(f, "renyi:{alpha}"),
            Self::LogDet => write!(f, "log-det"),
            Self::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}

/// `Σ_i h(λ_i)` for a spectrum that is a probability distribution.
///
/// Entries within `1e-10` of `[0, 1]` are clamped into it.
pub fn entropy_of_spectrum(spectrum: &Spectrum, f: &EntropyFunctional) -> Result<f64> {
    let values = spectrum.values();
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(Error::NotADistribution(format!("eigenvalues sum to {sum}")));
    }
    if let Some(&bad) = values.iter().find(|&&x| !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&x)) {
        return Err(Error::NotADistribution(format!("eigenvalue {bad} outside [0, 1]")));
    }
    let mut total = 0.0;
    for &x in values {
        let term = f.h(x.clamp(0.0, 1.0));
        if term == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        total += term;
    }
    Ok(total)
}

/// `S(ρ) = tr h(ρ)`.
pub fn entropy(rho: &DensityMatrix, f: &EntropyFunctional) -> Result<f64> {
    entropy_of_spectrum(&rho.spectrum(), f)
}

/// `Σ_k p_k S(ρ^(k))` over live outcomes.
pub fn expected_entropy(ens: &OutcomeEnsemble, f: &EntropyFunctional) -> Result<f64> {
    let mut total = 0.0;
    for (p, state) in ens.live() {
        let s = entropy(state, f)?;
        if s == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        total += p * s;
    }
    Ok(total)
}

/// `upper − lower`, with the log-determinant sentinel handled explicitly:
/// two sentinels compare equal, and a sentinel on the lower side makes the
/// margin `+∞`.
pub fn margin(lower: f64, upper: f64) -> f64 {
    match (lower == f64::NEG_INFINITY, upper == f64::NEG_INFINITY) {
        (true, true) => 0.0,
        (true, false) => f64::INFINITY,
        (false, true) => f64::NEG_INFINITY,
        (false, false) => upper - lower,
    }
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{tensor_product, ComplexMatrix};
    use crate::states::{density_from_pure, PureState};
    use std::f64::consts::LN_2;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn von_neumann_examples() {
        let vn = EntropyFunctional::VonNeumann;
        assert!((entropy_of_spectrum(&spec(&[0.5, 0.5]), &vn).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(entropy_of_spectrum(&spec(&[1.0, 0.0]), &vn).unwrap(), 0.0);
        assert!((entropy(&DensityMatrix::maximally_mixed(2), &vn).unwrap() - LN_2).abs() < 1e-15);
        let plus = DensityMatrix::new(ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap();
        assert!(entropy(&plus, &vn).unwrap().abs() < 1e-14);
    }

    #[test]
    fn renyi_sign_convention() {
        let r2 = EntropyFunctional::renyi(2.0).unwrap();
        assert!((entropy_of_spectrum(&spec(&[0.5, 0.5]), &r2).unwrap() + 0.5).abs() < 1e-15);
        assert!((entropy_of_spectrum(&spec(&[1.0, 0.0]), &r2).unwrap() + 1.0).abs() < 1e-15);
        let r_half = EntropyFunctional::renyi(0.5).unwrap();
        let mixed = entropy_of_spectrum(&spec(&[0.5, 0.5]), &r_half).unwrap();
        assert!((mixed - 2.0 * 0.5f64.sqrt()).abs() < 1e-15);
        assert!(EntropyFunctional::renyi(1.0).is_err());
        assert!(EntropyFunctional::renyi(-2.0).is_err());
    }

    #[test]
    fn linear_entropy_of_diagonal_state() {
        let rho = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap();
        let s = entropy(&rho, &EntropyFunctional::Linear).unwrap();
        assert!((s - 0.42).abs() < 1e-15);
    }

    #[test]
    fn log_det_sentinel() {
        let ld = EntropyFunctional::LogDet;
        assert_eq!(entropy_of_spectrum(&spec(&[1.0, 0.0]), &ld).unwrap(), f64::NEG_INFINITY);
        let v = entropy_of_spectrum(&spec(&[0.5, 0.5]), &ld).unwrap();
        assert!((v - 2.0 * 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(margin(f64::NEG_INFINITY, f64::NEG_INFINITY), 0.0);
        assert_eq!(margin(f64::NEG_INFINITY, -3.0), f64::INFINITY);
        assert_eq!(margin(-3.0, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(margin(1.0, 3.0), 2.0);
    }

    #[test]
    fn rejects_non_distributions() {
        let vn = EntropyFunctional::VonNeumann;
        assert!(matches!(
            entropy_of_spectrum(&spec(&[0.6, 0.6]), &vn),
            Err(Error::NotADistribution(_))
        ));
        assert!(matches!(
            entropy_of_spectrum(&spec(&[1.5, -0.5]), &vn),
            Err(Error::NotADistribution(_))
        ));
        // Rounding noise just below zero is clamped.
        let s = entropy_of_spectrum(&spec(&[1.0 + 5e-11, -5e-11]), &vn).unwrap();
        assert!(s.abs() < 1e-9);
    }

    #[test]
    fn expected_entropy_skips_dead_outcomes() {
        let ens = OutcomeEnsemble::new(vec![
            (0.5, Some(DensityMatrix::maximally_mixed(2))),
            (0.5, Some(DensityMatrix::maximally_mixed(2))),
            (0.0, None),
            (0.0, None),
        ])
        .unwrap();
        let s = expected_entropy(&ens, &EntropyFunctional::VonNeumann).unwrap();
        assert!((s - LN_2).abs() < 1e-15);

        let pure = |i| Some(density_from_pure(&PureState::basis(2, i)));
        let ens = OutcomeEnsemble::new(vec![(0.3, pure(0)), (0.7, pure(1))]).unwrap();
        assert_eq!(expected_entropy(&ens, &EntropyFunctional::VonNeumann).unwrap(), 0.0);
    }

    #[test]
    fn selectors_round_trip() {
        for sel in ["von-neumann", "linear", "renyi:0.5", "renyi:2", "log-det"] {
            let f: EntropyFunctional = sel.parse().unwrap();
            assert_eq!(f.to_string(), sel);
        }
        assert!("shannon".parse::<EntropyFunctional>().is_err());
        assert!("renyi:x".parse::<EntropyFunctional>().is_err());
        assert!("renyi:1".parse::<EntropyFunctional>().is_err());
    }

    #[test]
    fn custom_functional_concavity_gate() {
        let tsallis3 = CustomConcave::new("tsallis-3", |x: f64| (x - x.powi(3)) / 2.0).unwrap();
        let f = EntropyFunctional::Custom(tsallis3);
        let s = entropy(&DensityMatrix::maximally_mixed(2), &f).unwrap();
        assert!((s - 2.0 * (0.5 - 0.125) / 2.0).abs() < 1e-15);
        assert!(CustomConcave::new("convex", |x: f64| x * x).is_err());
    }

    #[test]
    fn padding_with_pure_ancilla() {
        let rho = DensityMatrix::diagonal(&[0.6, 0.3, 0.1]).unwrap();
        let ancilla = density_from_pure(&PureState::basis(2, 1));
        let joint = DensityMatrix::new(tensor_product(rho.matrix(), ancilla.matrix())).unwrap();
        for f in EntropyFunctional::builtins() {
            let a = entropy(&rho, &f).unwrap();
            let b = entropy(&joint, &f).unwrap();
            match f {
                EntropyFunctional::LogDet => assert_eq!(b, f64::NEG_INFINITY),
                _ => {
                    // Three extra zero eigenvalues contribute 3·h(0).
                    let offset = 3.0 * f.h_at_zero();
                    assert!((b - (a + offset)).abs() < 1e-12, "{f}: {a} vs {b}");
                }
            }
        }
    }
}
