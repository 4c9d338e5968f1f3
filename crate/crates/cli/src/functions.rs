//! Function names accepted by `--function` and their representations.

use anyhow::{bail, Context, Result};

use lkv_core::baselines::PipelineKind;
use lkv_core::restart::{
    exp_sqrt, gamma, inv_sqrt_laplace, inv_sqrt_stieltjes, power_neg_three_halves, sqrt,
    TransformFunction,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionSpec {
    PowerNegThreeHalves,
    ExpSqrt(f64),
    Gamma,
    Sqrt,
    InvSqrt,
}

impl std::str::FromStr for FunctionSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "power-neg-3-2" => Self::PowerNegThreeHalves,
            "gamma" => Self::Gamma,
            "sqrt" => Self::Sqrt,
            "inv-sqrt-stieltjes" => Self::InvSqrt,
            _ => match s.strip_prefix("exp-sqrt:") {
                Some(tau) => {
                    let tau: f64 = tau.parse().with_context(|| format!("bad tau in {s:?}"))?;
                    if !(tau > 0.0 && tau.is_finite()) {
                        bail!("tau must be positive, got {tau}");
                    }
                    Self::ExpSqrt(tau)
                }
                None => bail!(
                    "unknown function {s:?}; expected power-neg-3-2, exp-sqrt:<tau>, gamma, sqrt \
                     or inv-sqrt-stieltjes"
                ),
            },
        })
    }
}

impl FunctionSpec {
    /// The native representation, used by `--method auto`.
    pub fn native(self) -> TransformFunction {
        match self {
            Self::PowerNegThreeHalves => power_neg_three_halves(),
            Self::ExpSqrt(tau) => exp_sqrt(tau),
            Self::Gamma => gamma(),
            Self::Sqrt => sqrt(),
            Self::InvSqrt => inv_sqrt_stieltjes(),
        }
    }

    /// A Laplace-type representation (Laplace, two-sided or Bernstein).
    pub fn laplace(self) -> TransformFunction {
        match self {
            Self::InvSqrt => inv_sqrt_laplace(),
            other => other.native(),
        }
    }

    /// How `--method stieltjes` reaches this function; `None` means a direct
    /// Stieltjes restart.
    pub fn pipeline(self) -> Result<Option<PipelineKind>> {
        Ok(match self {
            Self::PowerNegThreeHalves => Some(PipelineKind::InverseFirst),
            Self::Sqrt => Some(PipelineKind::ProductFirst),
            Self::ExpSqrt(tau) => Some(PipelineKind::ExpSqrt { tau }),
            Self::InvSqrt => None,
            Self::Gamma => bail!("gamma has no Stieltjes route"),
        })
    }

    pub fn scalar(self) -> impl Fn(f64) -> f64 + Send + Sync {
        let cf = self.native().closed_form.expect("builtins have closed forms").0;
        move |s| cf(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_names() {
        assert_eq!("gamma".parse::<FunctionSpec>().unwrap(), FunctionSpec::Gamma);
        assert_eq!("exp-sqrt:0.5".parse::<FunctionSpec>().unwrap(), FunctionSpec::ExpSqrt(0.5));
        assert!("exp-sqrt:-1".parse::<FunctionSpec>().is_err());
        assert!("exp-sqrt:x".parse::<FunctionSpec>().is_err());
        assert!("cosh".parse::<FunctionSpec>().is_err());
    }

    #[test]
    fn representations_agree_on_scalars() {
        for f in [
            FunctionSpec::PowerNegThreeHalves,
            FunctionSpec::ExpSqrt(1.0),
            FunctionSpec::Gamma,
            FunctionSpec::Sqrt,
            FunctionSpec::InvSqrt,
        ] {
            let s = 2.3;
            let a = f.native().eval_scalar(s).unwrap();
            let b = f.laplace().eval_scalar(s).unwrap();
            assert!((a - b).abs() <= 1e-14 * a.abs(), "{f:?}");
            assert_eq!(f.scalar()(s), a);
        }
        assert!(FunctionSpec::Gamma.pipeline().is_err());
    }
}
