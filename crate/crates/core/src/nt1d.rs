//! The staggered second-order central scheme in one space dimension.
//!
//! A step maps cell averages on one grid to cell averages on the grid
//! shifted by half a cell. A base-grid field produces a staggered field
//! whose cell `j` covers `[x_j, x_{j+1}]`; a staggered field produces a
//! base-grid field.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Location, Result};
use crate::limiters::LimiterKind;
use crate::mesh::{Field1D, GHOST};
use crate::physics::{ConservationLaw, State};
use crate::reconstruct::{limit, slopes, ReconstructionConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum FluxDerivative {
    /// `f'_j = A(ū_j) u'_j`.
    ExactJacobian,
    /// `f'_j = ψ(Δf_{j-1/2}, Δf_{j+1/2})` componentwise.
    JacobianFree { limiter: LimiterKind },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NtConfig {
    pub recon: ReconstructionConfig,
    pub cfl: f64,
    pub flux_derivative: FluxDerivative,
}

pub const NT_DEFAULT_CFL: f64 = 0.45;

impl NtConfig {
    pub fn new(recon: ReconstructionConfig) -> Self {
        NtConfig {
            recon,
            cfl: NT_DEFAULT_CFL,
            flux_derivative: FluxDerivative::ExactJacobian,
        }
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.recon.limiter.validate()?;
        if let FluxDerivative::JacobianFree { limiter } = &self.flux_derivative {
            limiter.validate()?;
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Parameter(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if self.cfl > 0.5 {
            warn!("cfl {} exceeds 1/2; the staggered scheme may oscillate", self.cfl);
        }
        Ok(())
    }
}

/// Flux slopes over a whole line; entries without two neighbours are zero.
pub fn flux_slopes<const K: usize, L: ConservationLaw<K>>(
    cells: &[State<K>],
    u_slopes: &[State<K>],
    cfg: &NtConfig,
    law: &L,
) -> Vec<State<K>> {
    match &cfg.flux_derivative {
        FluxDerivative::ExactJacobian => cells
            .iter()
            .zip(u_slopes)
            .map(|(u, s)| law.jacobian_times(u, s))
            .collect(),
        FluxDerivative::JacobianFree { limiter } => {
            let m = cells.len();
            let f: Vec<State<K>> = cells.iter().map(|u| law.flux(u)).collect();
            let mut out = vec![State::<K>::zeros(); m];
            for j in 1..m.saturating_sub(1) {
                out[j] = limit(limiter, &(f[j] - f[j - 1]), &(f[j + 1] - f[j]));
            }
            out
        }
    }
}

/// Largest characteristic speed magnitude over the interior and ghosts.
pub fn max_speed_1d<const K: usize, L: ConservationLaw<K>>(field: &Field1D<K>, law: &L) -> Result<f64> {
    let mut smax = 0.0f64;
    for (k, u) in field.data.iter().enumerate() {
        let s = law
            .max_abs_speed(u)
            .map_err(|np| Error::positivity(Location::Cell(k.saturating_sub(GHOST)), np))?;
        smax = smax.max(s);
    }
    Ok(smax)
}

/// `dt = cfl Δx / max|speed|`, or `None` when every speed is zero.
pub fn nt_stable_dt<const K: usize, L: ConservationLaw<K>>(
    field: &Field1D<K>,
    cfl: f64,
    law: &L,
) -> Result<Option<f64>> {
    let s = max_speed_1d(field, law)?;
    Ok(if s > 0.0 { Some(cfl * field.grid.dx / s) } else { None })
}

fn check_cfl<const K: usize, L: ConservationLaw<K>>(field: &Field1D<K>, cfl: f64, law: &L, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
    }
    let s = max_speed_1d(field, law)?;
    if dt * s > cfl * field.grid.dx * (1.0 + 1e-12) {
        return Err(Error::StepRejected {
            dt,
            cfl,
            suggested: cfl * field.grid.dx / s,
        });
    }
    Ok(())
}

/// Cell average over the staggered cell spanned by a left/right pair:
/// `½(u_l + u_r) + ⅛(u'_l - u'_r) - λ[f(u_r^{n+1/2}) - f(u_l^{n+1/2})]`.
#[inline]
fn staggered_average<const K: usize>(
    ul: &State<K>,
    ur: &State<K>,
    sl: &State<K>,
    sr: &State<K>,
    fl_half: &State<K>,
    fr_half: &State<K>,
    lambda: f64,
) -> State<K> {
    (ul + ur) * 0.5 + (sl - sr) * 0.125 - (fr_half - fl_half) * lambda
}

/// One step with caller-supplied `u'` and `f'` over the full line (ghosts
/// included). Ghost cells of `field` must be filled.
pub fn nt_step_with_slopes<const K: usize, L: ConservationLaw<K>>(
    field: &Field1D<K>,
    u_slopes: &[State<K>],
    f_slopes: &[State<K>],
    law: &L,
    dt: f64,
) -> Result<Field1D<K>> {
    let lambda = dt / field.grid.dx;
    let m = field.data.len();
    if u_slopes.len() != m || f_slopes.len() != m {
        return Err(Error::Config("slope arrays must cover the full line".into()));
    }
    // midpoint predictor and its flux
    let f_half: Vec<State<K>> = (0..m)
        .map(|k| law.flux(&(field.data[k] - f_slopes[k] * (0.5 * lambda))))
        .collect();

    let n = field.n();
    let mut out = Field1D::zeros(field.grid);
    out.t = field.t + dt;
    out.staggered = !field.staggered;
    // base -> staggered pairs (j, j+1); staggered -> base pairs (j-1, j)
    let offset: isize = if field.staggered { -1 } else { 0 };
    for j in 0..n {
        let l = (GHOST as isize + j as isize + offset) as usize;
        let r = l + 1;
        out.data[GHOST + j] = staggered_average(
            &field.data[l],
            &field.data[r],
            &u_slopes[l],
            &u_slopes[r],
            &f_half[l],
            &f_half[r],
            lambda,
        );
    }
    for (j, u) in out.interior().iter().enumerate() {
        law.check_state(u).map_err(|np| Error::positivity(Location::Cell(j), np))?;
    }
    Ok(out)
}

/// One staggered step. Ghost cells of `field` must be filled.
pub fn nt_step<const K: usize, L: ConservationLaw<K>>(
    field: &Field1D<K>,
    cfg: &NtConfig,
    law: &L,
    dt: f64,
) -> Result<Field1D<K>> {
    check_cfl(field, cfg.cfl, law, dt)?;
    let us = slopes(&field.data, &cfg.recon, law)?;
    let fs = flux_slopes(&field.data, &us.values, cfg, law);
    nt_step_with_slopes(field, &us.values, &fs, law, dt)
}

/// The first-order staggered Lax–Friedrichs step (all slopes zero).
pub fn lxf_step<const K: usize, L: ConservationLaw<K>>(
    field: &Field1D<K>,
    cfl: f64,
    law: &L,
    dt: f64,
) -> Result<Field1D<K>> {
    check_cfl(field, cfl, law, dt)?;
    let zeros = vec![State::<K>::zeros(); field.data.len()];
    nt_step_with_slopes(field, &zeros, &zeros, law, dt)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NtTvdReport {
    /// `max λ |Δg / Δū|` over interfaces with `|Δū| > 1e-13`.
    pub max_ratio: f64,
    pub bound: f64,
    pub flagged: bool,
    pub interfaces_checked: usize,
}

/// Generalized CFL check for a scalar step: with the modified flux
/// `g_j = f(u_j^{n+1/2}) + u'_j / (8λ)`, the step is TVD when
/// `λ |Δg_{j+1/2} / Δū_{j+1/2}| ≤ ½` at every interface.
pub fn nt_tvd_diagnostic<L: ConservationLaw<1>>(
    field: &Field1D<1>,
    cfg: &NtConfig,
    law: &L,
    dt: f64,
    bound: f64,
) -> Result<NtTvdReport> {
    let lambda = dt / field.grid.dx;
    let us = slopes(&field.data, &cfg.recon, law)?;
    let fs = flux_slopes(&field.data, &us.values, cfg, law);
    let m = field.data.len();
    let g: Vec<f64> = (0..m)
        .map(|k| {
            let half = field.data[k] - fs[k] * (0.5 * lambda);
            law.flux(&half)[0] + us.values[k][0] / (8.0 * lambda)
        })
        .collect();
    let mut max_ratio = 0.0f64;
    let mut checked = 0;
    // interfaces between cells whose slopes are both defined
    for k in 1..m - 2 {
        let du = field.data[k + 1][0] - field.data[k][0];
        if du.abs() <= 1e-13 {
            continue;
        }
        checked += 1;
        max_ratio = max_ratio.max(lambda * ((g[k + 1] - g[k]) / du).abs());
    }
    Ok(NtTvdReport {
        max_ratio,
        bound,
        flagged: max_ratio > bound,
        interfaces_checked: checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limiters::van_albada;
    use crate::mesh::{apply_bc_1d, BoundarySet1D, Grid1D};
    use crate::physics::{advection_law, burgers_law};

    fn periodic_field(vals: &[f64]) -> Field1D<1> {
        let g = Grid1D::new(0.0, vals.len() as f64, vals.len()).unwrap();
        let cells: Vec<State<1>> = vals.iter().map(|&v| State::<1>::new(v)).collect();
        let mut f = Field1D::from_interior(g, &cells).unwrap();
        apply_bc_1d(&mut f, &BoundarySet1D::periodic(), 0.0).unwrap();
        f
    }

    fn cfg_va() -> NtConfig {
        NtConfig::new(ReconstructionConfig::componentwise(LimiterKind::VanAlbada))
    }

    struct ZeroFlux;

    impl ConservationLaw<1> for ZeroFlux {
        fn flux(&self, _u: &State<1>) -> State<1> {
            State::<1>::zeros()
        }
        fn speed_bounds(&self, _u: &State<1>) -> Result<(f64, f64), crate::error::NonPhysical> {
            Ok((0.0, 0.0))
        }
        fn jacobian_times(&self, _u: &State<1>, _v: &State<1>) -> State<1> {
            State::<1>::zeros()
        }
    }

    #[test]
    fn flux_slope_examples() {
        let cells: Vec<State<1>> = [0.0, 1.0, 3.0].iter().map(|&v| State::<1>::new(v)).collect();
        let us = vec![State::<1>::new(0.7); 3];
        let f = flux_slopes(&cells, &us, &cfg_va(), &advection_law());
        assert!(f.iter().all(|s| s[0] == 0.7));

        let b = flux_slopes(&[State::<1>::new(2.0)], &[State::<1>::new(0.5)], &cfg_va(), &burgers_law());
        assert_eq!(b[0][0], 1.0);

        // Δf = (1, -1) around the middle cell
        let mut cfg = cfg_va();
        cfg.flux_derivative = FluxDerivative::JacobianFree {
            limiter: LimiterKind::Minmod,
        };
        let cells: Vec<State<1>> = [0.0, 1.0, 0.0].iter().map(|&v| State::<1>::new(v)).collect();
        let f = flux_slopes(&cells, &[State::<1>::zeros(); 3], &cfg, &advection_law());
        assert_eq!(f[1][0], 0.0);
    }

    #[test]
    fn constant_state_is_preserved() {
        let f = periodic_field(&[2.5; 8]);
        let out = nt_step(&f, &cfg_va(), &advection_law(), 0.4).unwrap();
        assert!(out.staggered);
        assert!(out.interior().iter().all(|u| u[0] == 2.5));
    }

    #[test]
    fn zero_flux_step_matches_hand_evaluation() {
        // data (0, 1, 0, 0): slopes via vA are ψ(-0, 1)=0 at cell 0,
        // ψ(1,-1)=0 at cell 1, ψ(-1,0)=0 at cell 2, ψ(0,0)=0 at cell 3
        let f = periodic_field(&[0.0, 1.0, 0.0, 0.0]);
        let out = nt_step(&f, &cfg_va().with_cfl(0.5), &ZeroFlux, 0.1).unwrap();
        let expect = [0.5, 0.5, 0.0, 0.0];
        for (u, e) in out.interior().iter().zip(expect) {
            assert_eq!(u[0], e);
        }
        let f = periodic_field(&[0.0, 1.0, 3.0, 0.0]);
        let out = nt_step(&f, &cfg_va().with_cfl(0.5), &ZeroFlux, 0.1).unwrap();
        let s1 = van_albada(1.0, 2.0);
        let s2 = van_albada(2.0, -3.0);
        assert!((out.interior()[1][0] - (2.0 + 0.125 * (s1 - s2))).abs() < 1e-15);
    }

    #[test]
    fn lxf_upwind_at_half() {
        let f = periodic_field(&[0.0, 1.0, 1.0, 0.0]);
        // λ = ½ on unit cells: staggered cell 0 = ½(0+1) - ½(1-0)
        let out = lxf_step(&f, 0.5, &advection_law(), 0.5).unwrap();
        assert_eq!(out.interior()[0][0], 0.0);
    }

    #[test]
    fn zero_slopes_reduce_to_lxf_bit_for_bit() {
        let f = periodic_field(&[0.3, 1.7, -0.2, 0.9, 2.2, 0.0]);
        let zeros = vec![State::<1>::zeros(); f.data.len()];
        let a = nt_step_with_slopes(&f, &zeros, &zeros, &burgers_law(), 0.1).unwrap();
        let b = lxf_step(&f, 0.5, &burgers_law(), 0.1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cfl_violation_is_rejected_with_suggestion() {
        let f = periodic_field(&[0.0, 2.0, 0.0, 0.0]);
        match nt_step(&f, &cfg_va(), &burgers_law(), 1.0) {
            Err(Error::StepRejected { suggested, .. }) => assert!((suggested - 0.45 * 1.0 / 2.0).abs() < 1e-15),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn two_steps_return_to_base_grid_and_conserve_mass() {
        let vals: Vec<f64> = (0..16).map(|j| ((j * 7) % 5) as f64 - 1.3).collect();
        let mut f = periodic_field(&vals);
        let m0 = f.total_mass()[0];
        for _ in 0..2 {
            let mut next = nt_step(&f, &cfg_va(), &advection_law(), 0.3).unwrap();
            apply_bc_1d(&mut next, &BoundarySet1D::periodic(), 0.0).unwrap();
            f = next;
        }
        assert!(!f.staggered);
        assert!((f.total_mass()[0] - m0).abs() <= 1e-12 * vals.iter().map(|v| v.abs()).sum::<f64>());
    }

    #[test]
    fn cfl_validation() {
        assert!(cfg_va().with_cfl(0.0).validate().is_err());
        assert!(cfg_va().with_cfl(1.5).validate().is_err());
        assert!(cfg_va().with_cfl(0.45).validate().is_ok());
    }

    #[test]
    fn tvd_diagnostic_on_constant_state() {
        let f = periodic_field(&[1.0; 8]);
        let r = nt_tvd_diagnostic(&f, &cfg_va(), &advection_law(), 0.2, 0.5).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        assert_eq!(r.interfaces_checked, 0);
        assert!(!r.flagged);
    }
}
