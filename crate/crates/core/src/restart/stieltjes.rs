//! Restarted Arnoldi for Stieltjes functions through the resolvent error
//! representation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::krylov::KrylovDecomposition;
use crate::quadrature::{integrate_half_line_vec, Tolerance};
use crate::smallmat::{resolvent_entry, resolvent_solve, unit, SpectralCache};

use super::kernels::Kernel;
use super::{real_range, spectral_cache, CycleInfo, Engine};

/// `(H + tI)^{-1}` restricted to what the error recursion reads.
struct Resolvent {
    h: DMatrix<f64>,
    cache: Option<SpectralCache>,
}

impl Resolvent {
    /// `(H + tI)^{-1} e_1`
    fn solve_e1(&self, t: f64) -> Result<DVector<f64>> {
        match &self.cache {
            Some(c) => {
                let first = c.vectors().row(0).transpose();
                let s = first.zip_map(c.eigenvalues(), |q, l| q / (l + t));
                Ok(c.vectors() * s)
            }
            None => resolvent_solve(&self.h, t, &unit(self.h.nrows(), 0)),
        }
    }

    /// `psi(t) = e_m^T (H + tI)^{-1} e_1`
    fn psi(&self, t: f64) -> Result<f64> {
        match &self.cache {
            Some(c) => {
                let x = c.vectors();
                let m = x.nrows();
                Ok((0..m)
                    .map(|l| x[(0, l)] * x[(m - 1, l)] / (c.eigenvalues()[l] + t))
                    .sum())
            }
            None => resolvent_entry(&self.h, t),
        }
    }
}

pub(super) struct StieltjesEngine {
    density: Kernel,
    eps_q: f64,
    beta: f64,
    h_prev: f64,
    history: Vec<Resolvent>,
    nu: f64,
}

impl StieltjesEngine {
    pub fn new(density: Kernel, eps_q: f64, norm_b: f64) -> Self {
        Self {
            density,
            eps_q,
            beta: norm_b,
            h_prev: 0.0,
            history: Vec::new(),
            nu: f64::NAN,
        }
    }

    /// `int rho(t) prod_j psi_j(t) (H + tI)^{-1} e_1 dt` over the stored history.
    fn integrate(&self, current: &Resolvent) -> Result<DVector<f64>> {
        let m = current.h.nrows();
        let tol = Tolerance::new(self.eps_q, f64::MIN_POSITIVE);
        let (v, _) = integrate_half_line_vec(
            |t| {
                let r = (self.density)(t);
                if r == 0.0 {
                    return Ok(vec![0.0; m]);
                }
                let mut c = r;
                for p in &self.history {
                    c *= p.psi(t)?;
                }
                if c == 0.0 {
                    return Ok(vec![0.0; m]);
                }
                let x = current.solve_e1(t)?;
                Ok(x.iter().map(|v| c * v).collect())
            },
            tol,
        )?;
        Ok(DVector::from_vec(v))
    }

    fn resolvent(dec: &KrylovDecomposition) -> Result<Resolvent> {
        Ok(Resolvent {
            h: dec.hessenberg().clone(),
            cache: spectral_cache(dec)?,
        })
    }
}

impl Engine for StieltjesEngine {
    fn first(&mut self, dec: &KrylovDecomposition) -> Result<(DVector<f64>, CycleInfo)> {
        let current = Self::resolvent(dec)?;
        let (lo, _) = real_range(&current.h, current.cache.as_ref())?;
        if !(lo > 0.0) {
            return Err(Error::OutsideConvergenceRegion {
                nu: lo,
                abscissa: 0.0,
                closed: false,
            });
        }
        self.nu = lo;
        let y = self.integrate(&current)?;
        self.history.push(current);
        self.h_prev = dec.h_next();
        Ok((
            y * self.beta,
            CycleInfo {
                beta: self.beta,
                ..Default::default()
            },
        ))
    }

    fn next(&mut self, dec: &KrylovDecomposition, _iterate_norm: f64) -> Result<(DVector<f64>, CycleInfo)> {
        self.beta = -self.beta * self.h_prev;
        let current = Self::resolvent(dec)?;
        let y = if self.beta == 0.0 {
            DVector::zeros(current.h.nrows())
        } else {
            self.integrate(&current)?
        };
        self.history.push(current);
        self.h_prev = dec.h_next();
        Ok((
            y * self.beta,
            CycleInfo {
                beta: self.beta,
                ..Default::default()
            },
        ))
    }

    fn nu(&self) -> f64 {
        self.nu
    }
}
