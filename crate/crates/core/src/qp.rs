//! Nonnegativity-constrained strongly convex quadratic programs
//! `min 1/2 x^T H x - q^T x  s.t. x >= 0`, used by the ADMM blocks.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

pub(crate) struct NonnegQp {
    h: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    lipschitz: f64,
    mu: f64,
}

impl NonnegQp {
    pub(crate) fn new(h: DMatrix<f64>) -> Result<Self> {
        let eig = SymmetricEigen::new(h.clone()).eigenvalues;
        let lipschitz = eig.max();
        let mu = eig.min();
        if !(mu > 0.0) {
            return Err(Error::SingularSystem);
        }
        let chol = h.clone().cholesky().ok_or(Error::SingularSystem)?;
        Ok(Self { h, chol, lipschitz, mu })
    }

    /// Exact minimizer: the unconstrained solution when it is already
    /// nonnegative, otherwise accelerated projected gradient from its clip.
    pub(crate) fn solve(&self, q: &DVector<f64>) -> DVector<f64> {
        let x = self.chol.solve(q);
        if x.min() >= 0.0 {
            return x;
        }
        let step = 1.0 / self.lipschitz;
        let ratio = (self.lipschitz / self.mu).sqrt();
        let momentum = (ratio - 1.0) / (ratio + 1.0);
        let tol = 1e-15 * (1.0 + q.amax());
        let mut x = x.map(|v| v.max(0.0));
        let mut prev = x.clone();
        for _ in 0..200_000 {
            let z = &x + (&x - &prev) * momentum;
            let g = &self.h * &z - q;
            let next = (&z - g * step).map(|v| v.max(0.0));
            prev = std::mem::replace(&mut x, next);
            // Projected-gradient stationarity at the new point.
            let g = &self.h * &x - q;
            let pg = x.zip_map(&g, |xi, gi| if xi > 0.0 { gi.abs() } else { (-gi).max(0.0) });
            if pg.amax() <= tol {
                break;
            }
        }
        x
    }
}
