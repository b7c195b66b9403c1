//! Conservation laws `u_t + f(u)_x = 0` (and their 2D directional splits).

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, NonPhysical, Result};

pub type State<const K: usize> = SVector<f64, K>;
pub type Matrix<const K: usize> = SMatrix<f64, K, K>;

/// Eigen-decomposition of the flux Jacobian `A(u) = R diag(λ) L`.
///
/// Columns of `right` are right eigenvectors; rows of `left` are the
/// matching left eigenvectors, normalised so that `L R = I`. Eigenvalues are
/// sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigensystem<const K: usize> {
    pub values: State<K>,
    pub right: Matrix<K>,
    pub left: Matrix<K>,
}

impl<const K: usize> Eigensystem<K> {
    /// Characteristic coefficients `α = L Δu`.
    #[inline]
    pub fn decompose(&self, du: &State<K>) -> State<K> {
        self.left * du
    }

    /// `Σ_m α_m R_m`.
    #[inline]
    pub fn recompose(&self, alpha: &State<K>) -> State<K> {
        self.right * alpha
    }
}

pub trait ConservationLaw<const K: usize>: Send + Sync {
    fn flux(&self, u: &State<K>) -> State<K>;

    /// Smallest and largest characteristic speed at `u`.
    fn speed_bounds(&self, u: &State<K>) -> Result<(f64, f64), NonPhysical>;

    /// `A(u) v` with `A = ∂f/∂u`.
    fn jacobian_times(&self, u: &State<K>, v: &State<K>) -> State<K>;

    fn eigensystem(&self, _u: &State<K>) -> Option<Eigensystem<K>> {
        None
    }

    /// Whether [`eigensystem`](Self::eigensystem) is implemented at all (it
    /// may still return `None` at degenerate states).
    fn provides_eigensystem(&self) -> bool {
        false
    }

    fn check_state(&self, _u: &State<K>) -> Result<(), NonPhysical> {
        Ok(())
    }

    /// Density and pressure, for laws where positivity is meaningful.
    fn density_pressure(&self, _u: &State<K>) -> Option<(f64, f64)> {
        None
    }

    fn min_speed(&self, u: &State<K>) -> Result<f64, NonPhysical> {
        self.speed_bounds(u).map(|(lo, _)| lo)
    }

    fn max_speed(&self, u: &State<K>) -> Result<f64, NonPhysical> {
        self.speed_bounds(u).map(|(_, hi)| hi)
    }

    /// Spectral radius of `A(u)`.
    fn max_abs_speed(&self, u: &State<K>) -> Result<f64, NonPhysical> {
        self.speed_bounds(u).map(|(lo, hi)| lo.abs().max(hi.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// A 2D law split into per-direction 1D laws.
pub trait DirectionalLaw<const K: usize>: Send + Sync {
    type Along: ConservationLaw<K>;

    fn along(&self, axis: Axis) -> Self::Along;

    fn check_state(&self, u: &State<K>) -> Result<(), NonPhysical> {
        self.along(Axis::X).check_state(u)
    }

    fn density_pressure(&self, u: &State<K>) -> Option<(f64, f64)> {
        self.along(Axis::X).density_pressure(u)
    }
}

// ---------------------------------------------------------------------------
// scalar laws

/// `u_t + a u_x = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearAdvection {
    pub velocity: f64,
}

pub fn advection_law() -> LinearAdvection {
    LinearAdvection { velocity: 1.0 }
}

impl ConservationLaw<1> for LinearAdvection {
    fn flux(&self, u: &State<1>) -> State<1> {
        *u * self.velocity
    }

    fn speed_bounds(&self, _u: &State<1>) -> Result<(f64, f64), NonPhysical> {
        Ok((self.velocity, self.velocity))
    }

    fn jacobian_times(&self, _u: &State<1>, v: &State<1>) -> State<1> {
        *v * self.velocity
    }

    fn provides_eigensystem(&self) -> bool {
        true
    }

    fn eigensystem(&self, _u: &State<1>) -> Option<Eigensystem<1>> {
        Some(Eigensystem {
            values: State::<1>::new(self.velocity),
            right: Matrix::<1>::identity(),
            left: Matrix::<1>::identity(),
        })
    }
}

/// `u_t + (u²/2)_x = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Burgers;

pub fn burgers_law() -> Burgers {
    Burgers
}

impl ConservationLaw<1> for Burgers {
    fn flux(&self, u: &State<1>) -> State<1> {
        State::<1>::new(0.5 * u[0] * u[0])
    }

    fn speed_bounds(&self, u: &State<1>) -> Result<(f64, f64), NonPhysical> {
        Ok((u[0], u[0]))
    }

    fn jacobian_times(&self, u: &State<1>, v: &State<1>) -> State<1> {
        State::<1>::new(u[0] * v[0])
    }

    fn provides_eigensystem(&self) -> bool {
        true
    }

    fn eigensystem(&self, u: &State<1>) -> Option<Eigensystem<1>> {
        Some(Eigensystem {
            values: State::<1>::new(u[0]),
            right: Matrix::<1>::identity(),
            left: Matrix::<1>::identity(),
        })
    }
}

// ---------------------------------------------------------------------------
// gas dynamics

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerParams {
    pub gamma: f64,
}

impl Default for EulerParams {
    fn default() -> Self {
        EulerParams { gamma: 1.4 }
    }
}

impl EulerParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::Parameter(format!("gamma must exceed 1, got {gamma}")));
        }
        Ok(EulerParams { gamma })
    }
}

/// 1D Euler equations in conservative variables `(ρ, ρu, E)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Euler1d {
    pub params: EulerParams,
}

pub fn euler1d_law(params: EulerParams) -> Euler1d {
    Euler1d { params }
}

impl Euler1d {
    pub fn pressure(&self, u: &State<3>) -> f64 {
        let rho = u[0];
        (self.params.gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / rho)
    }

    pub fn sound_speed(&self, u: &State<3>) -> Result<f64, NonPhysical> {
        self.check_state(u)?;
        Ok((self.params.gamma * self.pressure(u) / u[0]).sqrt())
    }

    pub fn from_primitive(&self, rho: f64, vel: f64, p: f64) -> State<3> {
        State::<3>::new(rho, rho * vel, p / (self.params.gamma - 1.0) + 0.5 * rho * vel * vel)
    }
}

fn physical(rho: f64, p: f64) -> Result<(), NonPhysical> {
    if rho > 0.0 && p > 0.0 && rho.is_finite() && p.is_finite() {
        Ok(())
    } else {
        Err(NonPhysical {
            density: rho,
            pressure: p,
        })
    }
}

impl ConservationLaw<3> for Euler1d {
    fn flux(&self, u: &State<3>) -> State<3> {
        let vel = u[1] / u[0];
        let p = self.pressure(u);
        State::<3>::new(u[1], u[1] * vel + p, (u[2] + p) * vel)
    }

    fn speed_bounds(&self, u: &State<3>) -> Result<(f64, f64), NonPhysical> {
        let c = self.sound_speed(u)?;
        let vel = u[1] / u[0];
        Ok((vel - c, vel + c))
    }

    fn jacobian_times(&self, u: &State<3>, v: &State<3>) -> State<3> {
        let g = self.params.gamma;
        let vel = u[1] / u[0];
        let h = (u[2] + self.pressure(u)) / u[0];
        let a = Matrix::<3>::new(
            0.0,
            1.0,
            0.0,
            0.5 * (g - 3.0) * vel * vel,
            (3.0 - g) * vel,
            g - 1.0,
            vel * (0.5 * (g - 1.0) * vel * vel - h),
            h - (g - 1.0) * vel * vel,
            g * vel,
        );
        a * v
    }

    fn provides_eigensystem(&self) -> bool {
        true
    }

    fn eigensystem(&self, u: &State<3>) -> Option<Eigensystem<3>> {
        let c = self.sound_speed(u).ok()?;
        let g = self.params.gamma;
        let vel = u[1] / u[0];
        let h = (u[2] + self.pressure(u)) / u[0];
        let b1 = (g - 1.0) / (c * c);
        let b2 = 0.5 * vel * vel * b1;
        let right = Matrix::<3>::new(
            1.0,
            1.0,
            1.0,
            vel - c,
            vel,
            vel + c,
            h - vel * c,
            0.5 * vel * vel,
            h + vel * c,
        );
        let left = Matrix::<3>::new(
            0.5 * (b2 + vel / c),
            -0.5 * (b1 * vel + 1.0 / c),
            0.5 * b1,
            1.0 - b2,
            b1 * vel,
            -b1,
            0.5 * (b2 - vel / c),
            -0.5 * (b1 * vel - 1.0 / c),
            0.5 * b1,
        );
        Some(Eigensystem {
            values: State::<3>::new(vel - c, vel, vel + c),
            right,
            left,
        })
    }

    fn check_state(&self, u: &State<3>) -> Result<(), NonPhysical> {
        physical(u[0], self.pressure(u))
    }

    fn density_pressure(&self, u: &State<3>) -> Option<(f64, f64)> {
        Some((u[0], self.pressure(u)))
    }
}

/// 2D Euler equations in conservative variables `(ρ, ρu, ρv, E)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Euler2d {
    pub params: EulerParams,
}

pub fn euler2d_law(params: EulerParams) -> Euler2d {
    Euler2d { params }
}

impl Euler2d {
    pub fn pressure(&self, u: &State<4>) -> f64 {
        (self.params.gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0])
    }

    pub fn from_primitive(&self, rho: f64, vx: f64, vy: f64, p: f64) -> State<4> {
        State::<4>::new(
            rho,
            rho * vx,
            rho * vy,
            p / (self.params.gamma - 1.0) + 0.5 * rho * (vx * vx + vy * vy),
        )
    }

    /// y-flux of `u`.
    pub fn flux_y(&self, u: &State<4>) -> State<4> {
        self.along(Axis::Y).flux(u)
    }
}

impl DirectionalLaw<4> for Euler2d {
    type Along = Euler2dAlong;

    fn along(&self, axis: Axis) -> Euler2dAlong {
        Euler2dAlong {
            params: self.params,
            axis,
        }
    }
}

/// The x- or y-direction part of [`Euler2d`].
///
/// The y-direction is the x-direction law conjugated by the permutation
/// that swaps the two momentum components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Euler2dAlong {
    pub params: EulerParams,
    pub axis: Axis,
}

#[inline]
fn swap_momenta(u: &State<4>) -> State<4> {
    State::<4>::new(u[0], u[2], u[1], u[3])
}

impl Euler2dAlong {
    fn pressure(&self, u: &State<4>) -> f64 {
        (self.params.gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0])
    }

    fn to_x(&self, u: &State<4>) -> State<4> {
        match self.axis {
            Axis::X => *u,
            Axis::Y => swap_momenta(u),
        }
    }

    fn flux_x(&self, u: &State<4>) -> State<4> {
        let vx = u[1] / u[0];
        let p = self.pressure(u);
        State::<4>::new(u[1], u[1] * vx + p, u[2] * vx, (u[3] + p) * vx)
    }

    fn jacobian_x(&self, u: &State<4>) -> Matrix<4> {
        let g = self.params.gamma;
        let vx = u[1] / u[0];
        let vy = u[2] / u[0];
        let q2 = vx * vx + vy * vy;
        let h = (u[3] + self.pressure(u)) / u[0];
        Matrix::<4>::new(
            0.0,
            1.0,
            0.0,
            0.0,
            0.5 * (g - 1.0) * q2 - vx * vx,
            (3.0 - g) * vx,
            -(g - 1.0) * vy,
            g - 1.0,
            -vx * vy,
            vy,
            vx,
            0.0,
            vx * (0.5 * (g - 1.0) * q2 - h),
            h - (g - 1.0) * vx * vx,
            -(g - 1.0) * vx * vy,
            g * vx,
        )
    }

    fn eigensystem_x(&self, u: &State<4>) -> Option<Eigensystem<4>> {
        let p = self.pressure(u);
        physical(u[0], p).ok()?;
        let g = self.params.gamma;
        let c = (g * p / u[0]).sqrt();
        let vx = u[1] / u[0];
        let vy = u[2] / u[0];
        let q2 = vx * vx + vy * vy;
        let h = (u[3] + p) / u[0];
        let b1 = (g - 1.0) / (c * c);
        let b2 = 0.5 * q2 * b1;
        let right = Matrix::<4>::new(
            1.0,
            1.0,
            0.0,
            1.0,
            vx - c,
            vx,
            0.0,
            vx + c,
            vy,
            vy,
            1.0,
            vy,
            h - vx * c,
            0.5 * q2,
            vy,
            h + vx * c,
        );
        let left = Matrix::<4>::new(
            0.5 * (b2 + vx / c),
            -0.5 * (b1 * vx + 1.0 / c),
            -0.5 * b1 * vy,
            0.5 * b1,
            1.0 - b2,
            b1 * vx,
            b1 * vy,
            -b1,
            -vy,
            0.0,
            1.0,
            0.0,
            0.5 * (b2 - vx / c),
            -0.5 * (b1 * vx - 1.0 / c),
            -0.5 * b1 * vy,
            0.5 * b1,
        );
        Some(Eigensystem {
            values: State::<4>::new(vx - c, vx, vx, vx + c),
            right,
            left,
        })
    }
}

impl ConservationLaw<4> for Euler2dAlong {
    fn flux(&self, u: &State<4>) -> State<4> {
        match self.axis {
            Axis::X => self.flux_x(u),
            Axis::Y => swap_momenta(&self.flux_x(&swap_momenta(u))),
        }
    }

    fn speed_bounds(&self, u: &State<4>) -> Result<(f64, f64), NonPhysical> {
        let p = self.pressure(u);
        physical(u[0], p)?;
        let c = (self.params.gamma * p / u[0]).sqrt();
        let vn = self.to_x(u)[1] / u[0];
        Ok((vn - c, vn + c))
    }

    fn jacobian_times(&self, u: &State<4>, v: &State<4>) -> State<4> {
        match self.axis {
            Axis::X => self.jacobian_x(u) * v,
            Axis::Y => swap_momenta(&(self.jacobian_x(&swap_momenta(u)) * swap_momenta(v))),
        }
    }

    fn provides_eigensystem(&self) -> bool {
        true
    }

    fn eigensystem(&self, u: &State<4>) -> Option<Eigensystem<4>> {
        let es = self.eigensystem_x(&self.to_x(u))?;
        match self.axis {
            Axis::X => Some(es),
            Axis::Y => {
                let mut right = es.right;
                right.swap_rows(1, 2);
                let mut left = es.left;
                left.swap_columns(1, 2);
                Some(Eigensystem {
                    values: es.values,
                    right,
                    left,
                })
            }
        }
    }

    fn check_state(&self, u: &State<4>) -> Result<(), NonPhysical> {
        physical(u[0], self.pressure(u))
    }

    fn density_pressure(&self, u: &State<4>) -> Option<(f64, f64)> {
        Some((u[0], self.pressure(u)))
    }
}
