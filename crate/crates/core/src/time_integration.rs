//! Forward Euler and SSPRK3 for method-of-lines systems `du/dt = L(u)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Field1D, Field2D};

/// Vector-space operations needed to combine Runge–Kutta stages.
pub trait StageVector: Clone {
    /// `self = a * self + b * other`.
    fn combine(&mut self, a: f64, other: &Self, b: f64);

    fn is_finite(&self) -> bool;
}

impl StageVector for Vec<f64> {
    fn combine(&mut self, a: f64, other: &Self, b: f64) {
        for (x, y) in self.iter_mut().zip(other) {
            *x = a * *x + b * y;
        }
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

impl<const K: usize> StageVector for Field1D<K> {
    fn combine(&mut self, a: f64, other: &Self, b: f64) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x = *x * a + y * b;
        }
    }

    fn is_finite(&self) -> bool {
        self.all_finite()
    }
}

impl<const K: usize> StageVector for Field2D<K> {
    fn combine(&mut self, a: f64, other: &Self, b: f64) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x = *x * a + y * b;
        }
    }

    fn is_finite(&self) -> bool {
        self.all_finite()
    }
}

pub trait OdeSystem {
    type State: StageVector;

    /// Refresh boundary data before the right-hand side is evaluated.
    fn apply_bc(&mut self, _u: &mut Self::State, _t: f64) -> Result<()> {
        Ok(())
    }

    fn rhs(&mut self, u: &Self::State, t: f64) -> Result<Self::State>;

    /// One forward-Euler substep `u + dt L(u)`. Systems with a constraint
    /// (e.g. a projection) override this and keep the SSP structure.
    fn euler_substep(&mut self, u: &Self::State, t: f64, dt: f64) -> Result<Self::State> {
        let mut v = u.clone();
        self.apply_bc(&mut v, t)?;
        let l = self.rhs(&v, t)?;
        v.combine(1.0, &l, dt);
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    ForwardEuler,
    #[default]
    SspRk3,
}

fn check_stage<S: StageVector>(u: &S, stage: usize, t: f64) -> Result<()> {
    if u.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence { stage, t })
    }
}

impl Integrator {
    /// Advance `u` from `t` to `t + dt`.
    ///
    /// SSPRK3 in Shu–Osher form, each stage a forward-Euler substep:
    /// `u¹ = E(u)`, `u² = ¾u + ¼E(u¹)`, `uⁿ⁺¹ = ⅓u + ⅔E(u²)`.
    pub fn step<S: OdeSystem>(&self, sys: &mut S, u: &S::State, t: f64, dt: f64) -> Result<S::State> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
        }
        match self {
            Integrator::ForwardEuler => {
                let out = sys.euler_substep(u, t, dt)?;
                check_stage(&out, 1, t)?;
                Ok(out)
            }
            Integrator::SspRk3 => {
                let u1 = sys.euler_substep(u, t, dt)?;
                check_stage(&u1, 1, t)?;
                let mut u2 = sys.euler_substep(&u1, t + dt, dt)?;
                u2.combine(0.25, u, 0.75);
                check_stage(&u2, 2, t)?;
                let mut out = sys.euler_substep(&u2, t + 0.5 * dt, dt)?;
                out.combine(2.0 / 3.0, u, 1.0 / 3.0);
                check_stage(&out, 3, t)?;
                Ok(out)
            }
        }
    }

    pub fn stages(&self) -> usize {
        match self {
            Integrator::ForwardEuler => 1,
            Integrator::SspRk3 => 3,
        }
    }
}
