use crate::error::{Error, Result};
use crate::la::GmresOptions;
use crate::Real;

/// Model and solver parameters of one run.
///
/// The model coefficients are private so that the cached
/// `zeta = dt / (1 + sigma dt)` can never go stale.
#[derive(Clone, Debug, PartialEq)]
pub struct Params<T: Real> {
    eps: T,
    sigma: T,
    dt: T,
    m: T,
    zeta: T,
    /// Final time; the run takes `ceil(t_final / dt)` steps at most.
    pub t_final: T,
    /// Fixed-point stopping tolerance in the mass norm.
    pub fp_tol: T,
    pub fp_max: usize,
    /// Steady-state tolerance on `||u^n - u^{n-1}||_M`.
    pub ss_tol: T,
    pub gmres: GmresOptions<T>,
    /// Relative tolerance of inner CG solves (when CG is the inner solver).
    pub cg_tol: T,
}

fn zeta_of<T: Real>(sigma: T, dt: T) -> T {
    dt / (T::one() + sigma * dt)
}

impl<T: Real> Params<T> {
    /// Model coefficients with default solver settings (`t_final = dt`).
    ///
    /// `|m| = 1` is accepted: it describes a pure phase, which is a
    /// stationary state.
    pub fn new(eps: T, sigma: T, dt: T, m: T) -> Result<Self> {
        let p = Self {
            eps,
            sigma,
            dt,
            m,
            zeta: zeta_of(sigma, dt),
            t_final: dt,
            fp_tol: T::lit(1e-9),
            fp_max: 50,
            ss_tol: T::lit(1e-10),
            gmres: GmresOptions::default(),
            cg_tol: T::lit(1e-12),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.eps > T::zero()) || !self.eps.is_finite() {
            return bad("eps must be positive");
        }
        if !(self.sigma >= T::zero()) || !self.sigma.is_finite() {
            return bad("sigma must be nonnegative");
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return bad("dt must be positive");
        }
        if !(self.m.abs() <= T::one()) {
            return bad("mean mass m must satisfy |m| <= 1");
        }
        if !(self.t_final >= T::zero()) || !self.t_final.is_finite() {
            return bad("t_final must be nonnegative");
        }
        if !(self.fp_tol > T::zero()) || self.fp_max == 0 {
            return bad("fixed-point tolerance and iteration cap must be positive");
        }
        if !(self.ss_tol >= T::zero()) {
            return bad("steady-state tolerance must be nonnegative");
        }
        if !(self.gmres.tol > T::zero()) || self.gmres.max_iter == 0 {
            return bad("GMRES tolerance and iteration cap must be positive");
        }
        if !(self.cg_tol > T::zero()) {
            return bad("CG tolerance must be positive");
        }
        Ok(())
    }

    pub fn eps(&self) -> T {
        self.eps
    }
    pub fn sigma(&self) -> T {
        self.sigma
    }
    pub fn dt(&self) -> T {
        self.dt
    }
    pub fn m(&self) -> T {
        self.m
    }
    /// `dt / (1 + sigma dt)`.
    pub fn zeta(&self) -> T {
        self.zeta
    }
    /// `1 + sigma dt`.
    pub fn mass_factor(&self) -> T {
        T::one() + self.sigma * self.dt
    }

    pub fn with_dt(mut self, dt: T) -> Result<Self> {
        self.dt = dt;
        self.zeta = zeta_of(self.sigma, dt);
        self.validate()?;
        Ok(self)
    }

    pub fn with_sigma(mut self, sigma: T) -> Result<Self> {
        self.sigma = sigma;
        self.zeta = zeta_of(sigma, self.dt);
        self.validate()?;
        Ok(self)
    }

    pub fn with_eps(mut self, eps: T) -> Result<Self> {
        self.eps = eps;
        self.validate()?;
        Ok(self)
    }

    pub fn with_mean(mut self, m: T) -> Result<Self> {
        self.m = m;
        self.validate()?;
        Ok(self)
    }

    /// Number of time steps needed to reach `t_final`.
    pub fn num_steps(&self) -> usize {
        let n = (self.t_final / self.dt).as_f64();
        // tolerate round-off in t_final = k * dt
        let r = n.round();
        if (n - r).abs() < 1e-9 * r.max(1.0) {
            r as usize
        } else {
            n.ceil() as usize
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_cached_matches_formula() {
        let p = Params::<f64>::new(0.1, 100.0, 0.01, 0.0).unwrap();
        assert!((p.zeta() - 0.01 / 2.0).abs() < 1e-15);
        let q = p.with_dt(0.02).unwrap();
        assert!((q.zeta() - 0.02 / 3.0).abs() < 1e-15);
        let r = q.with_sigma(0.0).unwrap();
        assert_eq!(r.zeta(), 0.02);
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(Params::new(0.0, 1.0, 0.1, 0.0).is_err());
        assert!(Params::new(0.1, -1.0, 0.1, 0.0).is_err());
        assert!(Params::new(0.1, 1.0, 0.0, 0.0).is_err());
        assert!(Params::new(0.1, 1.0, 0.1, 1.5).is_err());
        assert!(Params::new(0.1, 1.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn step_count() {
        let mut p = Params::new(0.02, 100.0, 4e-4, 0.0).unwrap();
        p.t_final = 100.0 * 4e-4;
        assert_eq!(p.num_steps(), 100);
        p.t_final = 0.0;
        assert_eq!(p.num_steps(), 0);
    }
}
