//! Transform descriptions and the builtin kernel catalog.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// A scalar function of one real variable.
pub type Kernel = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `L{sqrt t}(s) = (sqrt(pi)/2) s^{-3/2}`, so `s^{-3/2} = (2/sqrt(pi)) L{sqrt t}(s)`.
pub const POWER_NEG_THREE_HALVES_CONST: f64 = 1.128_379_167_095_512_6;

/// How `F` is represented.
#[derive(Clone)]
pub enum TransformKind {
    /// `F(s) = int_0^inf f(t) e^{-st} dt`.
    Laplace {
        kernel: Kernel,
        /// Abscissa of absolute convergence.
        abscissa: f64,
        /// Whether the transform also converges absolutely on the abscissa.
        closed: bool,
    },
    /// `F(s) = L{f(t)}(s) + L{f(-t)}(-s)`.
    TwoSided {
        forward: Kernel,
        backward: Kernel,
        forward_abscissa: f64,
        backward_abscissa: f64,
    },
    /// `F(s) = c + a s + int_0^inf (1 - e^{-st}) f(t) dt`.
    Bernstein {
        c: f64,
        a: f64,
        density: Kernel,
        /// Abscissa of absolute convergence of `L{t f(t)}`.
        abscissa: f64,
    },
    /// `F(s) = int_0^inf rho(t) / (t + s) dt`.
    Stieltjes { density: Kernel },
}

impl fmt::Debug for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Laplace { abscissa, closed, .. } => f
                .debug_struct("Laplace")
                .field("abscissa", abscissa)
                .field("closed", closed)
                .finish(),
            Self::TwoSided {
                forward_abscissa,
                backward_abscissa,
                ..
            } => f
                .debug_struct("TwoSided")
                .field("forward_abscissa", forward_abscissa)
                .field("backward_abscissa", backward_abscissa)
                .finish(),
            Self::Bernstein { c, a, abscissa, .. } => f
                .debug_struct("Bernstein")
                .field("c", c)
                .field("a", a)
                .field("abscissa", abscissa)
                .finish(),
            Self::Stieltjes { .. } => f.write_str("Stieltjes"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TransformFunction {
    pub name: String,
    pub kind: TransformKind,
    /// `F(s)` in closed form where known, for scalar checks and dense references.
    pub closed_form: Option<ClosedForm>,
    /// Set for representations outside the standard class (e.g. a
    /// sign-changing Stieltjes density).
    pub nonstandard: bool,
}

#[derive(Clone)]
pub struct ClosedForm(pub Kernel);

impl fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ClosedForm")
    }
}

impl TransformFunction {
    pub fn laplace(name: &str, kernel: Kernel, abscissa: f64, closed: bool) -> Self {
        Self {
            name: name.into(),
            kind: TransformKind::Laplace {
                kernel,
                abscissa,
                closed,
            },
            closed_form: None,
            nonstandard: false,
        }
    }

    pub fn with_closed_form(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.closed_form = Some(ClosedForm(Arc::new(f)));
        self
    }

    /// Evaluates the closed form `F(s)` if one is attached.
    pub fn eval_scalar(&self, s: f64) -> Option<f64> {
        self.closed_form.as_ref().map(|c| (c.0)(s))
    }
}

/// `s^{-3/2}` as `(2/sqrt(pi)) L{sqrt t}`.
pub fn power_neg_three_halves() -> TransformFunction {
    TransformFunction::laplace(
        "power-neg-3-2",
        Arc::new(|t: f64| POWER_NEG_THREE_HALVES_CONST * t.sqrt()),
        0.0,
        false,
    )
    .with_closed_form(|s| s.powf(-1.5))
}

/// `s^{-1/2}` as `L{1/sqrt(pi t)}`.
pub fn inv_sqrt_laplace() -> TransformFunction {
    TransformFunction::laplace(
        "inv-sqrt",
        Arc::new(|t: f64| 1.0 / (PI * t).sqrt()),
        0.0,
        false,
    )
    .with_closed_form(|s| 1.0 / s.sqrt())
}

/// `exp(-tau sqrt(s))` as `tau/(2 sqrt(pi)) L{exp(-tau^2/(4t)) t^{-3/2}}`,
/// absolutely convergent on the closed half plane.
pub fn exp_sqrt(tau: f64) -> TransformFunction {
    let c = tau / (2.0 * PI.sqrt());
    TransformFunction::laplace(
        &format!("exp-sqrt:{tau}"),
        Arc::new(move |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let e = (-tau * tau / (4.0 * t)).exp();
            if e == 0.0 {
                0.0
            } else {
                c * e / (t * t.sqrt())
            }
        }),
        0.0,
        true,
    )
    .with_closed_form(move |s| (-tau * s.sqrt()).exp())
}

/// `Gamma(s)` as the two-sided transform of `exp(-exp(-t))`.
pub fn gamma() -> TransformFunction {
    TransformFunction {
        name: "gamma".into(),
        kind: TransformKind::TwoSided {
            forward: Arc::new(|t: f64| (-(-t).exp()).exp()),
            backward: Arc::new(|t: f64| (-t.exp()).exp()),
            forward_abscissa: 0.0,
            backward_abscissa: f64::NEG_INFINITY,
        },
        closed_form: Some(ClosedForm(Arc::new(statrs::function::gamma::gamma))),
        nonstandard: false,
    }
}

/// `sqrt(s) = int (1 - e^{-st}) t^{-3/2} / (2 sqrt(pi)) dt`.
pub fn sqrt() -> TransformFunction {
    let c = 1.0 / (2.0 * PI.sqrt());
    TransformFunction {
        name: "sqrt".into(),
        kind: TransformKind::Bernstein {
            c: 0.0,
            a: 0.0,
            density: Arc::new(move |t: f64| c / (t * t.sqrt())),
            abscissa: 0.0,
        },
        closed_form: Some(ClosedForm(Arc::new(f64::sqrt))),
        nonstandard: false,
    }
}

/// `s^{-1/2}` with Stieltjes density `1/(pi sqrt t)`.
pub fn inv_sqrt_stieltjes() -> TransformFunction {
    TransformFunction {
        name: "inv-sqrt-stieltjes".into(),
        kind: TransformKind::Stieltjes {
            density: Arc::new(|t: f64| 1.0 / (PI * t.sqrt())),
        },
        closed_form: Some(ClosedForm(Arc::new(|s: f64| 1.0 / s.sqrt()))),
        nonstandard: false,
    }
}

/// `h(s) = (exp(-tau sqrt s) - 1)/s` with the oscillating density
/// `-sin(tau sqrt t)/(pi t)`.
pub fn exp_sqrt_stieltjes(tau: f64) -> TransformFunction {
    TransformFunction {
        name: format!("exp-sqrt-stieltjes:{tau}"),
        kind: TransformKind::Stieltjes {
            density: Arc::new(move |t: f64| -(tau * t.sqrt()).sin() / (PI * t)),
        },
        closed_form: Some(ClosedForm(Arc::new(move |s: f64| {
            (-tau * s.sqrt()).exp_m1() / s
        }))),
        nonstandard: true,
    }
}

/// The catalog of builtin transforms.
pub fn builtin_kernels() -> Vec<TransformFunction> {
    vec![
        power_neg_three_halves(),
        exp_sqrt(1.0),
        gamma(),
        sqrt(),
        inv_sqrt_stieltjes(),
        exp_sqrt_stieltjes(1.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{build_half_line_rule, build_laplace_rule, integrate_half_line_vec, Tolerance};

    fn laplace_scalar(f: &TransformFunction, s: f64, eps: f64) -> f64 {
        let TransformKind::Laplace { kernel, .. } = &f.kind else {
            panic!("not a Laplace transform")
        };
        let k = kernel.clone();
        build_laplace_rule(move |t| k(t), s, eps).unwrap().value()
    }

    #[test]
    fn three_halves_constant_by_quadrature() {
        // L{sqrt t}(1) = Gamma(3/2); the kernel constant must invert it
        let r = build_laplace_rule(f64::sqrt, 1.0, 1e-13).unwrap();
        let c = 1.0 / r.value();
        assert!((c - POWER_NEG_THREE_HALVES_CONST).abs() < 1e-11);
        assert!((c - 2.0 / PI).abs() > 0.4);
    }

    #[test]
    fn three_halves_at_four() {
        let eps = 1e-10;
        let v = laplace_scalar(&power_neg_three_halves(), 4.0, eps);
        assert!((v - 0.125).abs() <= eps);
    }

    #[test]
    fn exp_sqrt_at_one() {
        let v = laplace_scalar(&exp_sqrt(1.0), 1.0, 1e-12);
        assert!((v - (-1f64).exp()).abs() < 1e-10);
        let f = exp_sqrt(1.0);
        assert_eq!(f.eval_scalar(1.0), Some((-1f64).exp()));
        // closed boundary: the kernel integrates to F(0) = 1
        let v0 = laplace_scalar(&f, 0.0, 1e-12);
        assert!((v0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inv_sqrt_kernels_agree() {
        let v = laplace_scalar(&inv_sqrt_laplace(), 2.0, 1e-12);
        assert!((v - 0.5f64.sqrt()).abs() < 1e-10);
        let TransformKind::Stieltjes { density } = inv_sqrt_stieltjes().kind else { unreachable!() };
        let (s, _) = integrate_half_line_vec(|t| Ok(vec![density(t) / (t + 2.0)]), Tolerance::new(1e-12, 1e-14)).unwrap();
        assert!((s[0] - 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn gamma_half_by_two_sided_scalar() {
        let TransformKind::TwoSided { forward, backward, .. } = gamma().kind else { unreachable!() };
        let s = 0.5;
        let (f, b) = (forward.clone(), backward.clone());
        let a = build_laplace_rule(move |t| f(t), s, 1e-12).unwrap().value();
        let c = build_laplace_rule(move |t| b(t), -s, 1e-12).unwrap().value();
        assert!((a + c - PI.sqrt()).abs() < 1e-8);
        assert!((gamma().eval_scalar(0.5).unwrap() - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sqrt_bernstein_scalar() {
        let TransformKind::Bernstein { density, .. } = sqrt().kind else { unreachable!() };
        let s = 4.0;
        let r = build_half_line_rule(|t| density(t) * -(-s * t).exp_m1(), Tolerance::new(1e-12, 1e-12), s).unwrap();
        assert!((r.value() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn oscillating_density_matches_closed_form() {
        let f = exp_sqrt_stieltjes(1.0);
        assert!(f.nonstandard);
        let TransformKind::Stieltjes { density } = f.kind.clone() else { unreachable!() };
        let s = 3.0;
        let (v, _) = integrate_half_line_vec(|t| Ok(vec![density(t) / (t + s)]), Tolerance::new(1e-10, 1e-12)).unwrap();
        assert!((v[0] - f.eval_scalar(s).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn catalog_lists_every_builtin() {
        let names: Vec<String> = builtin_kernels().into_iter().map(|k| k.name).collect();
        for n in ["power-neg-3-2", "exp-sqrt:1", "gamma", "sqrt", "inv-sqrt-stieltjes", "exp-sqrt-stieltjes:1"] {
            assert!(names.iter().any(|x| x == n), "{n}");
        }
    }
}
