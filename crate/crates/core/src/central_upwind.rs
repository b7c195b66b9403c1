//! Semi-discrete central-upwind operator: `dū_j/dt = -(F_{j+1/2} - F_{j-1/2}) / Δx`
//! with MUSCL interface states and one-sided local speeds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Location, NonPhysical, Result};
use crate::mesh::{apply_bc_1d, apply_bc_2d, BoundarySet1D, BoundarySet2D, Field1D, Field2D, GHOST};
use crate::physics::{Axis, ConservationLaw, DirectionalLaw, State};
use crate::reconstruct::{reconstruct_interfaces, ReconstructionConfig};
use crate::time_integration::OdeSystem;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedMode {
    /// `a⁺ = -a⁻ = max ρ(A(u^∓))`: the Rusanov form.
    Kt,
    /// `a⁺ = max(λ_N, 0)`, `a⁻ = min(λ_1, 0)` over both interface states.
    #[default]
    Knp,
}

pub const CU_DEFAULT_CFL: f64 = 0.7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuConfig {
    pub recon: ReconstructionConfig,
    pub speed_mode: SpeedMode,
    pub cfl: f64,
    /// Step used when every wave speed vanishes.
    pub dt_max: f64,
}

impl CuConfig {
    pub fn new(recon: ReconstructionConfig) -> Self {
        CuConfig {
            recon,
            speed_mode: SpeedMode::Knp,
            cfl: CU_DEFAULT_CFL,
            dt_max: 1.0,
        }
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_speed_mode(mut self, mode: SpeedMode) -> Self {
        self.speed_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.recon.limiter.validate()?;
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Parameter(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::Parameter(format!("dt_max must be positive, got {}", self.dt_max)));
        }
        Ok(())
    }
}

/// Local one-sided speeds `(a⁺ ≥ 0, a⁻ ≤ 0)` at an interface.
pub fn interface_speeds<const K: usize, L: ConservationLaw<K>>(
    um: &State<K>,
    up: &State<K>,
    law: &L,
    mode: SpeedMode,
) -> Result<(f64, f64), NonPhysical> {
    let (lo_m, hi_m) = law.speed_bounds(um)?;
    let (lo_p, hi_p) = law.speed_bounds(up)?;
    Ok(match mode {
        SpeedMode::Kt => {
            let a = lo_m.abs().max(hi_m.abs()).max(lo_p.abs()).max(hi_p.abs());
            (a, -a)
        }
        SpeedMode::Knp => (hi_m.max(hi_p).max(0.0), lo_m.min(lo_p).min(0.0)),
    })
}

/// `F = [a⁺f(u⁻) - a⁻f(u⁺)]/(a⁺-a⁻) + a⁺a⁻(u⁺-u⁻)/(a⁺-a⁻)`; `f(u⁻)` if the
/// fan has zero width.
pub fn knp_flux<const K: usize, L: ConservationLaw<K>>(
    um: &State<K>,
    up: &State<K>,
    a_plus: f64,
    a_minus: f64,
    law: &L,
) -> State<K> {
    let width = a_plus - a_minus;
    if width == 0.0 {
        return law.flux(um);
    }
    (law.flux(um) * a_plus - law.flux(up) * a_minus) / width + (up - um) * (a_plus * a_minus / width)
}

/// Numerical fluxes at the `n + 1` interior-bounding interfaces of a line of
/// `n + 2*GHOST` cells. A failing interface index is returned in the error.
pub fn line_fluxes<const K: usize, L: ConservationLaw<K>>(
    cells: &[State<K>],
    cfg: &CuConfig,
    law: &L,
) -> Result<Vec<State<K>>, (usize, Error)> {
    let rec = reconstruct_interfaces(cells, &cfg.recon, law).map_err(|e| (0, e))?;
    rec.states
        .iter()
        .enumerate()
        .map(|(k, (um, up))| {
            let (ap, am) = interface_speeds(um, up, law, cfg.speed_mode)
                .map_err(|np| (k, Error::positivity(Location::Field, np)))?;
            Ok(knp_flux(um, up, ap, am, law))
        })
        .collect()
}

fn relocate(err: Error, loc: Location) -> Error {
    match err {
        Error::Positivity {
            density, pressure, ..
        } => Error::Positivity {
            location: loc,
            density,
            pressure,
        },
        other => other,
    }
}

/// Interface `k` lies between interior cells `k-1` and `k`; report the
/// nearer interior cell.
fn interface_cell(k: usize, n: usize) -> usize {
    k.min(n - 1)
}

/// Right-hand side on a 1D field whose ghosts are filled. Ghost entries of
/// the result are zero.
pub fn semidiscrete_rhs_1d<const K: usize, L: ConservationLaw<K>>(
    field: &Field1D<K>,
    cfg: &CuConfig,
    law: &L,
) -> Result<Field1D<K>> {
    let n = field.n();
    let fluxes = line_fluxes(&field.data, cfg, law)
        .map_err(|(k, e)| relocate(e, Location::Cell(interface_cell(k, n))))?;
    let mut out = Field1D::zeros(field.grid);
    out.t = field.t;
    out.staggered = field.staggered;
    let inv_dx = 1.0 / field.grid.dx;
    for j in 0..n {
        out.data[GHOST + j] = -(fluxes[j + 1] - fluxes[j]) * inv_dx;
    }
    Ok(out)
}

/// Right-hand side on a 2D field whose ghosts are filled: x-differences of
/// row fluxes plus y-differences of column fluxes.
pub fn semidiscrete_rhs_2d<const K: usize, D: DirectionalLaw<K>>(
    field: &Field2D<K>,
    cfg: &CuConfig,
    law: &D,
) -> Result<Field2D<K>> {
    let (nx, ny) = (field.grid.nx(), field.grid.ny());
    let (lx, ly) = (law.along(Axis::X), law.along(Axis::Y));
    let inv_dx = 1.0 / field.grid.x.dx;
    let inv_dy = 1.0 / field.grid.y.dx;

    let rows: Vec<Vec<State<K>>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            line_fluxes(field.row(j as isize), cfg, &lx)
                .map_err(|(k, e)| relocate(e, Location::Cell2D(interface_cell(k, nx), j)))
        })
        .collect::<Result<_>>()?;
    let cols: Vec<Vec<State<K>>> = (0..nx)
        .into_par_iter()
        .map(|i| {
            line_fluxes(&field.column(i as isize), cfg, &ly)
                .map_err(|(k, e)| relocate(e, Location::Cell2D(i, interface_cell(k, ny))))
        })
        .collect::<Result<_>>()?;

    let mut out = Field2D::zeros(field.grid);
    out.t = field.t;
    for j in 0..ny {
        for i in 0..nx {
            let fx = &rows[j];
            let gy = &cols[i];
            *out.at_mut(i as isize, j as isize) =
                -(fx[i + 1] - fx[i]) * inv_dx - (gy[j + 1] - gy[j]) * inv_dy;
        }
    }
    Ok(out)
}

/// `dt = cfl Δx / max|speed|` over interior cells.
pub fn stable_dt_1d<const K: usize, L: ConservationLaw<K>>(field: &Field1D<K>, cfg: &CuConfig, law: &L) -> Result<f64> {
    let mut smax = 0.0f64;
    for (j, u) in field.interior().iter().enumerate() {
        let s = law.max_abs_speed(u).map_err(|np| Error::positivity(Location::Cell(j), np))?;
        smax = smax.max(s);
    }
    Ok(if smax > 0.0 {
        (cfg.cfl * field.grid.dx / smax).min(cfg.dt_max)
    } else {
        cfg.dt_max
    })
}

/// `dt = cfl / max(|a_x|/Δx + |a_y|/Δy)` over interior cells.
pub fn stable_dt_2d<const K: usize, D: DirectionalLaw<K>>(field: &Field2D<K>, cfg: &CuConfig, law: &D) -> Result<f64> {
    let (lx, ly) = (law.along(Axis::X), law.along(Axis::Y));
    let (nx, ny) = (field.grid.nx() as isize, field.grid.ny() as isize);
    let mut rate = 0.0f64;
    for j in 0..ny {
        for i in 0..nx {
            let u = field.at(i, j);
            let loc = Location::Cell2D(i as usize, j as usize);
            let sx = lx.max_abs_speed(u).map_err(|np| Error::positivity(loc, np))?;
            let sy = ly.max_abs_speed(u).map_err(|np| Error::positivity(loc, np))?;
            rate = rate.max(sx / field.grid.x.dx + sy / field.grid.y.dx);
        }
    }
    Ok(if rate > 0.0 { (cfg.cfl / rate).min(cfg.dt_max) } else { cfg.dt_max })
}

/// Coefficients of the incremental form
/// `dū_j/dt = [-C_{j-1/2} Δū_{j-1/2} + D_{j+1/2} Δū_{j+1/2}] / Δx`
/// (one entry per interior cell). Neutral interfaces (`|Δū| < 1e-13`) give 0.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementalCoefficients {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

impl IncrementalCoefficients {
    pub fn min(&self) -> f64 {
        self.c.iter().chain(&self.d).copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn incremental_coefficients<L: ConservationLaw<1>>(
    field: &Field1D<1>,
    cfg: &CuConfig,
    law: &L,
) -> Result<IncrementalCoefficients> {
    let rec = reconstruct_interfaces(&field.data, &cfg.recon, law)?;
    let flux = |u: &State<1>, v: &State<1>| -> Result<f64> {
        let (ap, am) = interface_speeds(u, v, law, cfg.speed_mode).map_err(|np| Error::positivity(Location::Field, np))?;
        Ok(knp_flux(u, v, ap, am, law)[0])
    };
    let n = field.n();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for j in 0..n {
        // interfaces j-1/2 and j+1/2 of interior cell j
        let (ml, pl) = rec.states[j];
        let (mr, pr) = rec.states[j + 1];
        let du_left = field.at(j as isize)[0] - field.at(j as isize - 1)[0];
        let du_right = field.at(j as isize + 1)[0] - field.at(j as isize)[0];
        if du_left.abs() >= 1e-13 {
            c[j] = (flux(&mr, &pl)? - flux(&ml, &pl)?) / du_left;
        }
        if du_right.abs() >= 1e-13 {
            d[j] = -(flux(&mr, &pr)? - flux(&mr, &pl)?) / du_right;
        }
    }
    Ok(IncrementalCoefficients { c, d })
}

/// A 1D central-upwind system ready for a time integrator.
pub struct CuSystem1D<'a, const K: usize, L: ConservationLaw<K>> {
    pub law: &'a L,
    pub cfg: CuConfig,
    pub bcs: BoundarySet1D<K>,
}

impl<const K: usize, L: ConservationLaw<K>> OdeSystem for CuSystem1D<'_, K, L> {
    type State = Field1D<K>;

    fn apply_bc(&mut self, u: &mut Field1D<K>, t: f64) -> Result<()> {
        apply_bc_1d(u, &self.bcs, t)
    }

    fn rhs(&mut self, u: &Field1D<K>, _t: f64) -> Result<Field1D<K>> {
        semidiscrete_rhs_1d(u, &self.cfg, self.law)
    }
}

pub struct CuSystem2D<'a, const K: usize, D: DirectionalLaw<K>> {
    pub law: &'a D,
    pub cfg: CuConfig,
    pub bcs: BoundarySet2D<K>,
}

impl<const K: usize, D: DirectionalLaw<K>> OdeSystem for CuSystem2D<'_, K, D> {
    type State = Field2D<K>;

    fn apply_bc(&mut self, u: &mut Field2D<K>, t: f64) -> Result<()> {
        apply_bc_2d(u, &self.bcs, t)
    }

    fn rhs(&mut self, u: &Field2D<K>, _t: f64) -> Result<Field2D<K>> {
        semidiscrete_rhs_2d(u, &self.cfg, self.law)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limiters::LimiterKind;
    use crate::mesh::{BoundaryCondition, Grid1D, Grid2D};
    use crate::physics::{advection_law, burgers_law, euler1d_law, euler2d_law, EulerParams};
    use std::f64::consts::PI;

    fn s(v: f64) -> State<1> {
        State::<1>::new(v)
    }

    fn cfg_va() -> CuConfig {
        CuConfig::new(ReconstructionConfig::componentwise(LimiterKind::VanAlbada))
    }

    #[test]
    fn speed_examples() {
        let b = burgers_law();
        assert_eq!(interface_speeds(&s(0.0), &s(1.0), &b, SpeedMode::Knp).unwrap(), (1.0, 0.0));
        assert_eq!(interface_speeds(&s(0.0), &s(1.0), &b, SpeedMode::Kt).unwrap(), (1.0, -1.0));
        assert_eq!(
            interface_speeds(&s(-3.0), &s(7.0), &advection_law(), SpeedMode::Knp).unwrap(),
            (1.0, 0.0)
        );
    }

    #[test]
    fn flux_examples() {
        let b = burgers_law();
        assert_eq!(knp_flux(&s(0.0), &s(1.0), 1.0, 0.0, &b)[0], 0.0);
        for u in [-2.0, 0.0, 0.3, 5.0] {
            let (ap, am) = interface_speeds(&s(u), &s(u), &b, SpeedMode::Knp).unwrap();
            assert_eq!(knp_flux(&s(u), &s(u), ap, am, &b)[0], 0.5 * u * u);
        }
        // symmetric speeds give the Rusanov form
        let (um, up, a) = (s(0.4), s(-1.3), 1.7);
        let rus = (b.flux(&um) + b.flux(&up)) * 0.5 - (up - um) * (a / 2.0);
        assert!((knp_flux(&um, &up, a, -a, &b) - rus).amax() < 1e-15);
        // degenerate fan
        assert_eq!(knp_flux(&s(0.0), &s(0.0), 0.0, 0.0, &b)[0], 0.0);
        assert_eq!(knp_flux(&s(2.0), &s(3.0), 0.0, 0.0, &b)[0], 2.0);
    }

    fn periodic(grid: Grid1D, f: impl Fn(f64) -> f64) -> Field1D<1> {
        let mut field = Field1D::from_point_values(grid, |x| s(f(x)));
        apply_bc_1d(&mut field, &BoundarySet1D::periodic(), 0.0).unwrap();
        field
    }

    #[test]
    fn constant_field_has_zero_rhs_and_telescopes() {
        let g = Grid1D::new(0.0, 1.0, 16).unwrap();
        let f = periodic(g, |_| 3.0);
        let r = semidiscrete_rhs_1d(&f, &cfg_va(), &burgers_law()).unwrap();
        assert!(r.interior().iter().all(|v| v[0] == 0.0));

        let f = periodic(Grid1D::new(0.0, 2.0 * PI, 50).unwrap(), |x| x.sin() + 0.5 * (3.0 * x).cos());
        let r = semidiscrete_rhs_1d(&f, &cfg_va(), &burgers_law()).unwrap();
        assert!(r.total_mass()[0].abs() < 1e-13);
    }

    #[test]
    fn smooth_advection_rhs_is_second_order_away_from_extrema() {
        let mut errs = vec![];
        for n in [64usize, 128, 256, 512] {
            let g = Grid1D::new(0.0, 2.0 * PI, n).unwrap();
            // exact cell averages of sin so the operator is compared on averages
            let mut f = Field1D::from_cell_averages(g, |x| s(x.sin()), &[]);
            apply_bc_1d(&mut f, &BoundarySet1D::periodic(), 0.0).unwrap();
            let r = semidiscrete_rhs_1d(&f, &cfg_va(), &advection_law()).unwrap();
            let dx = g.dx;
            let mut err = 0.0f64;
            for j in 0..n {
                let x = g.center(j as isize);
                if x.cos().abs() < 0.3 {
                    continue;
                }
                // exact average of -cos over the cell
                let exact = -((x + 0.5 * dx).sin() - (x - 0.5 * dx).sin()) / dx;
                err = err.max((r.interior()[j][0] - exact).abs());
            }
            errs.push(err);
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.8, "{errs:?}");
        }
    }

    #[test]
    fn stable_dt_examples() {
        let g = Grid1D::new(0.0, 1.0, 10).unwrap();
        let f = periodic(g, |_| 0.0);
        assert!((stable_dt_1d(&f, &cfg_va(), &advection_law()).unwrap() - 0.07).abs() < 1e-15);
        let f = periodic(g, |x| if x < 0.5 { 2.0 } else { -1.0 });
        assert!((stable_dt_1d(&f, &cfg_va(), &burgers_law()).unwrap() - 0.035).abs() < 1e-15);
        let f = periodic(g, |_| 0.0);
        assert_eq!(stable_dt_1d(&f, &cfg_va(), &burgers_law()).unwrap(), 1.0);

        let law = euler1d_law(EulerParams::default());
        let mut f = Field1D::from_point_values(g, |_| law.from_primitive(1.0, 0.0, 1.0));
        apply_bc_1d(&mut f, &BoundarySet1D::zero_gradient(), 0.0).unwrap();
        let dt = stable_dt_1d(&f, &cfg_va(), &law).unwrap();
        assert!((dt - 0.7 * 0.1 / 1.4f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn advection_coefficients_have_no_downwind_part() {
        let g = Grid1D::new(0.0, 1.0, 12).unwrap();
        let f = periodic(g, |x| (x * 10.0).floor() * 0.3 - (x * 37.0).sin());
        let co = incremental_coefficients(&f, &cfg_va(), &advection_law()).unwrap();
        assert!(co.d.iter().all(|&d| d == 0.0));
        assert!(co.c.iter().all(|&c| c >= -1e-12));
        let co = incremental_coefficients(&periodic(g, |_| 1.0), &cfg_va(), &advection_law()).unwrap();
        assert!(co.c.iter().chain(&co.d).all(|&v| v == 0.0));
    }

    #[test]
    fn incremental_form_reproduces_rhs() {
        let g = Grid1D::new(0.0, 2.0 * PI, 40).unwrap();
        let f = periodic(g, |x| x.sin() + 0.3);
        let cfg = cfg_va();
        let co = incremental_coefficients(&f, &cfg, &burgers_law()).unwrap();
        let r = semidiscrete_rhs_1d(&f, &cfg, &burgers_law()).unwrap();
        for j in 0..40isize {
            let dl = f.at(j)[0] - f.at(j - 1)[0];
            let dr = f.at(j + 1)[0] - f.at(j)[0];
            let via = (co.d[j as usize] * dr - co.c[j as usize] * dl) / g.dx;
            assert!((via - r.at(j)[0]).abs() < 1e-11, "cell {j}: {via} vs {}", r.at(j)[0]);
        }
    }

    #[test]
    fn rhs_2d_on_x_independent_field_matches_1d_rows() {
        let law = euler2d_law(EulerParams::default());
        let grid = Grid2D::new((0.0, 1.0, 6), (0.0, 2.0, 12)).unwrap();
        let prof = |y: f64| law.from_primitive(1.0 + 0.5 * (3.0 * y).sin(), 0.2, 0.4 * y.cos(), 1.0 + 0.1 * y);
        let mut f = Field2D::from_point_values(grid, |_, y| prof(y));
        let bcs = BoundarySet2D {
            left: BoundaryCondition::Periodic,
            right: BoundaryCondition::Periodic,
            bottom: BoundaryCondition::ZeroGradient,
            top: BoundaryCondition::ZeroGradient,
        };
        apply_bc_2d(&mut f, &bcs, 0.0).unwrap();
        let cfg = cfg_va();
        let r2 = semidiscrete_rhs_2d(&f, &cfg, &law).unwrap();

        let ly = law.along(Axis::Y);
        let col = Field1D {
            grid: grid.y,
            data: f.column(0),
            t: 0.0,
            staggered: false,
        };
        let r1 = semidiscrete_rhs_1d(&col, &cfg, &ly).unwrap();
        for i in 0..6 {
            for j in 0..12 {
                assert!((r2.at(i, j) - r1.at(j)).amax() < 1e-13);
            }
        }
    }

    #[test]
    fn positivity_fault_carries_a_cell() {
        let law = euler1d_law(EulerParams::default());
        let g = Grid1D::new(0.0, 1.0, 8).unwrap();
        let mut f = Field1D::from_point_values(g, |x| {
            if x > 0.5 && x < 0.65 {
                State::<3>::new(1.0, 0.0, -1.0)
            } else {
                law.from_primitive(1.0, 0.0, 1.0)
            }
        });
        apply_bc_1d(&mut f, &BoundarySet1D::zero_gradient(), 0.0).unwrap();
        match semidiscrete_rhs_1d(&f, &cfg_va(), &law) {
            Err(Error::Positivity {
                location: Location::Cell(j),
                ..
            }) => assert!((3..=5).contains(&j)),
            other => panic!("expected positivity fault, got {other:?}"),
        }
    }
}
