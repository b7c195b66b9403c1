//! Benchmark problems: domains, initial data, boundary sets, final times
//! and default resolutions.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::driver::SchemeKind;
use crate::error::{Error, Location, Result};
use crate::incompressible::ShearLayerParams;
use crate::limiters::LimiterKind;
use crate::mesh::{
    BoundaryCondition, BoundarySet1D, BoundarySet2D, Field1D, Field2D, Grid1D, Grid2D, StateFn,
};
use crate::physics::{euler1d_law, euler2d_law, ConservationLaw, DirectionalLaw, EulerParams, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    Advection,
    Burgers,
    Euler1d,
    Euler2d,
    Incompressible,
}

/// `(ρ, u, p)` for a 1D gas state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl Primitive {
    pub fn new(rho: f64, u: f64, p: f64) -> Self {
        Primitive { rho, u, p }
    }
}

/// An oblique shock moving into gas at rest, reflecting off a wedge wall.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShockReflection {
    pub mach: f64,
    /// Angle between the shock and the wall, degrees.
    pub angle_deg: f64,
    /// Where the shock meets the wall at `t = 0`.
    pub foot_x: f64,
    pub pre_rho: f64,
    pub pre_p: f64,
    pub gamma: f64,
}

impl ShockReflection {
    pub fn pre_sound_speed(&self) -> f64 {
        (self.gamma * self.pre_p / self.pre_rho).sqrt()
    }

    pub fn shock_speed(&self) -> f64 {
        self.mach * self.pre_sound_speed()
    }

    /// Post-shock `(ρ, u_n, p)` from the Rankine–Hugoniot relations, with
    /// `u_n` the gas velocity along the shock normal.
    pub fn post_shock_normal(&self) -> (f64, f64, f64) {
        let g = self.gamma;
        let m2 = self.mach * self.mach;
        let rho = self.pre_rho * (g + 1.0) * m2 / ((g - 1.0) * m2 + 2.0);
        let p = self.pre_p * (2.0 * g * m2 - (g - 1.0)) / (g + 1.0);
        let un = self.shock_speed() * (1.0 - self.pre_rho / rho);
        (rho, un, p)
    }

    /// Post-shock `(ρ, u, v, p)`.
    pub fn post_shock_primitive(&self) -> (f64, f64, f64, f64) {
        let (rho, un, p) = self.post_shock_normal();
        let a = self.angle_deg.to_radians();
        (rho, un * a.sin(), -un * a.cos(), p)
    }

    pub fn pre_state(&self) -> State<4> {
        euler2d_law(EulerParams { gamma: self.gamma }).from_primitive(self.pre_rho, 0.0, 0.0, self.pre_p)
    }

    pub fn post_state(&self) -> State<4> {
        let (rho, u, v, p) = self.post_shock_primitive();
        euler2d_law(EulerParams { gamma: self.gamma }).from_primitive(rho, u, v, p)
    }

    /// x-coordinate of the shock at height `y` and time `t`.
    pub fn shock_x(&self, t: f64, y: f64) -> f64 {
        let a = self.angle_deg.to_radians();
        self.foot_x + y / a.tan() + self.shock_speed() * t / a.sin()
    }

    /// The undisturbed moving shock: post-shock behind it, pre-shock ahead.
    pub fn exact(&self, x: f64, y: f64, t: f64) -> State<4> {
        if x < self.shock_x(t, y) {
            self.post_state()
        } else {
            self.pre_state()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "setup", rename_all = "kebab-case")]
pub enum Setup {
    /// sin⁴(πx), a box and a hat on a periodic interval.
    Multiwave,
    /// `u₀ = sin x`, advected.
    SmoothSine,
    /// `u₀ = sin x` under Burgers' flux.
    BurgersSine,
    Riemann {
        interface: f64,
        left: Primitive,
        right: Primitive,
    },
    /// A shock running into a sinusoidal density field.
    ShockEntropy {
        interface: f64,
        left: Primitive,
        amplitude: f64,
        wavenumber: f64,
        right_p: f64,
    },
    DoubleMach(ShockReflection),
    ShearLayer { rho: f64, delta: f64 },
}

/// A benchmark problem. Everything that defines it is plain data, so it
/// can be serialized and reconstructed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub name: String,
    pub law: LawKind,
    pub x_range: (f64, f64),
    pub y_range: Option<(f64, f64)>,
    pub n: usize,
    pub ny: Option<usize>,
    pub t_end: f64,
    pub gamma: f64,
    pub default_scheme: SchemeKind,
    pub default_cfl: f64,
    pub setup: Setup,
}

pub fn multiwave_advection() -> Problem {
    Problem {
        name: "advection".into(),
        law: LawKind::Advection,
        x_range: (0.0, 2.0 * PI),
        y_range: None,
        n: 400,
        ny: None,
        t_end: 2.0 * PI,
        gamma: 1.4,
        default_scheme: SchemeKind::Nt,
        default_cfl: 0.45,
        setup: Setup::Multiwave,
    }
}

pub fn smooth_advection() -> Problem {
    Problem {
        name: "smooth-advection".into(),
        law: LawKind::Advection,
        x_range: (0.0, 2.0 * PI),
        y_range: None,
        n: 200,
        ny: None,
        t_end: 2.0 * PI,
        gamma: 1.4,
        default_scheme: SchemeKind::Nt,
        default_cfl: 0.45,
        setup: Setup::SmoothSine,
    }
}

pub fn burgers_waves() -> Problem {
    Problem {
        name: "burgers".into(),
        law: LawKind::Burgers,
        x_range: (0.0, 2.0 * PI),
        y_range: None,
        n: 200,
        ny: None,
        t_end: 2.0,
        gamma: 1.4,
        default_scheme: SchemeKind::Nt,
        default_cfl: 0.45,
        setup: Setup::BurgersSine,
    }
}

pub fn sod() -> Problem {
    Problem {
        name: "sod".into(),
        law: LawKind::Euler1d,
        x_range: (0.0, 1.0),
        y_range: None,
        n: 400,
        ny: None,
        t_end: 0.2,
        gamma: 1.4,
        default_scheme: SchemeKind::Nt,
        default_cfl: 0.45,
        setup: Setup::Riemann {
            interface: 0.5,
            left: Primitive::new(1.0, 0.0, 1.0),
            right: Primitive::new(0.125, 0.0, 0.1),
        },
    }
}

pub fn osher_shu() -> Problem {
    Problem {
        name: "osher-shu".into(),
        law: LawKind::Euler1d,
        x_range: (-5.0, 5.0),
        y_range: None,
        n: 600,
        ny: None,
        t_end: 1.8,
        gamma: 1.4,
        default_scheme: SchemeKind::Nt,
        default_cfl: 0.45,
        setup: Setup::ShockEntropy {
            interface: -4.0,
            left: Primitive::new(3.857143, 2.6293690, 10.33333),
            amplitude: 0.2,
            wavenumber: 5.0,
            right_p: 1.0,
        },
    }
}

pub fn double_mach() -> Problem {
    Problem {
        name: "dmr".into(),
        law: LawKind::Euler2d,
        x_range: (0.0, 4.0),
        y_range: Some((0.0, 1.0)),
        n: 480,
        ny: Some(120),
        t_end: 0.2,
        gamma: 1.4,
        default_scheme: SchemeKind::Cu,
        default_cfl: 0.7,
        setup: Setup::DoubleMach(ShockReflection {
            mach: 10.0,
            angle_deg: 60.0,
            foot_x: 1.0 / 6.0,
            pre_rho: 1.4,
            pre_p: 1.0,
            gamma: 1.4,
        }),
    }
}

pub fn shear_layer() -> Problem {
    let p = ShearLayerParams::new(LimiterKind::VanAlbada);
    Problem {
        name: "shear-layer".into(),
        law: LawKind::Incompressible,
        x_range: (0.0, 2.0 * PI),
        y_range: Some((0.0, 2.0 * PI)),
        n: p.n,
        ny: Some(p.n),
        t_end: p.t_end,
        gamma: 1.4,
        default_scheme: SchemeKind::Cu,
        default_cfl: p.cfl,
        setup: Setup::ShearLayer {
            rho: p.rho,
            delta: p.delta,
        },
    }
}

pub const PROBLEM_NAMES: [&str; 7] = [
    "advection",
    "smooth-advection",
    "burgers",
    "sod",
    "osher-shu",
    "dmr",
    "shear-layer",
];

pub fn all_problems() -> Vec<Problem> {
    vec![
        multiwave_advection(),
        smooth_advection(),
        burgers_waves(),
        sod(),
        osher_shu(),
        double_mach(),
        shear_layer(),
    ]
}

pub fn problem_by_name(name: &str) -> Result<Problem> {
    let canonical = match name {
        "multiwave" | "multiwave-advection" => "advection",
        "double-mach" => "dmr",
        other => other,
    };
    all_problems()
        .into_iter()
        .find(|p| p.name == canonical)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown problem '{name}'; valid problems: {}",
                PROBLEM_NAMES.join(", ")
            ))
        })
}

fn multiwave(x: f64) -> f64 {
    if (0.0..=1.0).contains(&x) {
        (PI * x).sin().powi(4)
    } else if (2.09..=3.09).contains(&x) {
        1.0
    } else if (4.18..=5.18).contains(&x) {
        1.0 - (x - 4.68).abs() / 0.5
    } else {
        0.0
    }
}

impl Problem {
    pub fn params(&self) -> EulerParams {
        EulerParams { gamma: self.gamma }
    }

    /// Default CFL for `scheme`: the problem's own value for its default
    /// scheme, else the scheme's usual value.
    pub fn cfl_for(&self, scheme: SchemeKind) -> f64 {
        if scheme == self.default_scheme {
            self.default_cfl
        } else {
            scheme.default_cfl()
        }
    }

    fn wrong_law(&self, wanted: &str) -> Error {
        Error::Config(format!("problem '{}' is not a {wanted} problem", self.name))
    }

    pub fn grid_1d(&self, n: usize) -> Result<Grid1D> {
        Grid1D::new(self.x_range.0, self.x_range.1, n)
    }

    pub fn grid_2d(&self, nx: usize, ny: usize) -> Result<Grid2D> {
        let (y0, y1) = self.y_range.ok_or_else(|| self.wrong_law("2D"))?;
        Grid2D::new((self.x_range.0, self.x_range.1, nx), (y0, y1, ny))
    }

    /// Locations where the initial data is not smooth.
    pub fn breaks(&self) -> Vec<f64> {
        match self.setup {
            Setup::Multiwave => vec![0.0, 1.0, 2.09, 3.09, 4.18, 4.68, 5.18],
            Setup::Riemann { interface, .. } | Setup::ShockEntropy { interface, .. } => vec![interface],
            _ => vec![],
        }
    }

    /// Pointwise scalar initial data.
    pub fn scalar_initial(&self, x: f64) -> Result<f64> {
        match self.setup {
            Setup::Multiwave => Ok(multiwave(x)),
            Setup::SmoothSine | Setup::BurgersSine => Ok(x.sin()),
            _ => Err(self.wrong_law("scalar")),
        }
    }

    /// Exact solution of the linear advection problems at `(x, t)`.
    pub fn scalar_exact(&self, x: f64, t: f64) -> Result<f64> {
        if self.law != LawKind::Advection {
            return Err(self.wrong_law("linear advection"));
        }
        let (a, b) = self.x_range;
        let xi = a + (x - t - a).rem_euclid(b - a);
        self.scalar_initial(xi)
    }

    /// Pointwise 1D gas initial data as `(ρ, u, p)`.
    pub fn euler1d_primitive(&self, x: f64) -> Result<Primitive> {
        match self.setup {
            Setup::Riemann { interface, left, right } => Ok(if x < interface { left } else { right }),
            Setup::ShockEntropy {
                interface,
                left,
                amplitude,
                wavenumber,
                right_p,
            } => Ok(if x < interface {
                left
            } else {
                Primitive::new(1.0 + amplitude * (wavenumber * x).sin(), 0.0, right_p)
            }),
            _ => Err(self.wrong_law("1D Euler")),
        }
    }

    pub fn scalar_field(&self, n: usize) -> Result<Field1D<1>> {
        self.scalar_initial(0.0)?;
        let grid = self.grid_1d(n)?;
        let field = Field1D::from_cell_averages(
            grid,
            |x| State::<1>::new(self.scalar_initial(x).unwrap_or(f64::NAN)),
            &self.breaks(),
        );
        check_finite_1d(&field)?;
        Ok(field)
    }

    pub fn euler1d_field(&self, n: usize) -> Result<Field1D<3>> {
        self.euler1d_primitive(0.0)?;
        let law = euler1d_law(self.params());
        let grid = self.grid_1d(n)?;
        let field = Field1D::from_cell_averages(
            grid,
            |x| match self.euler1d_primitive(x) {
                Ok(w) => law.from_primitive(w.rho, w.u, w.p),
                Err(_) => State::<3>::repeat(f64::NAN),
            },
            &self.breaks(),
        );
        check_finite_1d(&field)?;
        for (j, u) in field.interior().iter().enumerate() {
            law.check_state(u).map_err(|np| Error::positivity(Location::Cell(j), np))?;
        }
        Ok(field)
    }

    pub fn shock_reflection(&self) -> Result<ShockReflection> {
        match self.setup {
            Setup::DoubleMach(s) => Ok(s),
            _ => Err(self.wrong_law("shock reflection")),
        }
    }

    pub fn euler2d_field(&self, nx: usize, ny: usize) -> Result<Field2D<4>> {
        let s = self.shock_reflection()?;
        let field = Field2D::from_point_values(self.grid_2d(nx, ny)?, |x, y| s.exact(x, y, 0.0));
        let law = euler2d_law(self.params());
        for j in 0..ny as isize {
            for i in 0..nx as isize {
                law.along(crate::physics::Axis::X)
                    .check_state(field.at(i, j))
                    .map_err(|np| Error::positivity(Location::Cell2D(i as usize, j as usize), np))?;
            }
        }
        Ok(field)
    }

    pub fn bcs_1d<const K: usize>(&self) -> Result<BoundarySet1D<K>> {
        match self.law {
            LawKind::Advection | LawKind::Burgers => Ok(BoundarySet1D::periodic()),
            LawKind::Euler1d => Ok(BoundarySet1D::zero_gradient()),
            _ => Err(self.wrong_law("1D")),
        }
    }

    pub fn bcs_2d(&self) -> Result<BoundarySet2D<4>> {
        let s = self.shock_reflection()?;
        let post = s.post_state();
        let exact: StateFn<4> = Arc::new(move |x, y, t| s.exact(x, y, t));
        let inflow: StateFn<4> = Arc::new(move |_, _, _| post);
        Ok(BoundarySet2D {
            left: BoundaryCondition::TimeDependentDirichlet(Arc::clone(&inflow)),
            right: BoundaryCondition::ZeroGradient,
            bottom: BoundaryCondition::Split {
                at: s.foot_x,
                before: Box::new(BoundaryCondition::TimeDependentDirichlet(inflow)),
                after: Box::new(BoundaryCondition::ReflectiveWall { normal_component: 2 }),
            },
            top: BoundaryCondition::TimeDependentDirichlet(exact),
        })
    }

    pub fn shear_layer_params(&self, limiter: LimiterKind) -> Result<ShearLayerParams> {
        match self.setup {
            Setup::ShearLayer { rho, delta } => {
                let mut p = ShearLayerParams::new(limiter);
                p.n = self.n;
                p.rho = rho;
                p.delta = delta;
                p.cfl = self.default_cfl;
                p.t_end = self.t_end;
                Ok(p)
            }
            _ => Err(self.wrong_law("incompressible")),
        }
    }
}

fn check_finite_1d<const K: usize>(field: &Field1D<K>) -> Result<()> {
    if field.all_finite() {
        Ok(())
    } else {
        Err(Error::Config("initial data is not finite".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiwave_examples() {
        let p = multiwave_advection();
        assert_eq!(p.scalar_initial(0.5).unwrap(), 1.0);
        assert_eq!(p.scalar_initial(2.5).unwrap(), 1.0);
        assert!((p.scalar_initial(4.68).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(p.scalar_initial(1.5).unwrap(), 0.0);
        assert_eq!(p.n, 400);
        assert_eq!(p.t_end, 2.0 * PI);
    }

    #[test]
    fn advection_exact_is_a_periodic_shift() {
        let p = multiwave_advection();
        for &x in &[0.3, 2.5, 4.5, 6.0] {
            let after_period = p.scalar_exact(x, 2.0 * PI).unwrap();
            assert!((after_period - p.scalar_initial(x).unwrap()).abs() < 1e-12);
        }
        assert_eq!(p.scalar_exact(1.5, 1.0).unwrap(), p.scalar_initial(0.5).unwrap());
    }

    #[test]
    fn burgers_initial_mass_and_tv() {
        let p = burgers_waves();
        let f = p.scalar_field(400).unwrap();
        assert!(f.total_mass()[0].abs() < 1e-13);
        let tv = crate::diagnostics::total_variation_scalar(&f.component(0), true);
        assert!((tv - 4.0).abs() < 1e-3, "{tv}");
        // characteristics cross at t = 1 / max|u₀'| = 1
        assert!(1.0 < p.t_end);
    }

    #[test]
    fn sod_energies() {
        let p = sod();
        let f = p.euler1d_field(400).unwrap();
        let first = f.interior()[0];
        let last = f.interior()[399];
        assert!((first[2] - 2.5).abs() < 1e-14);
        assert!((last[2] - 0.25).abs() < 1e-14);
        assert!((last[0] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn osher_shu_examples() {
        let p = osher_shu();
        assert_eq!(p.euler1d_primitive(0.0).unwrap().rho, 1.0);
        assert!((p.euler1d_primitive(PI / 10.0).unwrap().rho - 1.2).abs() < 1e-15);
        assert_eq!(p.euler1d_primitive(-4.5).unwrap().u, 2.6293690);
    }

    #[test]
    fn rankine_hugoniot_oracle() {
        let s = double_mach().shock_reflection().unwrap();
        assert!((s.pre_sound_speed() - 1.0).abs() < 1e-15);
        assert!((s.shock_speed() - 10.0).abs() < 1e-14);
        let (rho, un, p) = s.post_shock_normal();
        assert!((rho - 8.0).abs() < 1e-13);
        assert!((p - 116.5).abs() < 1e-12);
        assert!((un - 8.25).abs() < 1e-13);

        // mass, momentum and energy fluxes balance in the shock frame
        let g = s.gamma;
        let (w1, w2) = (-s.shock_speed(), un - s.shock_speed());
        let (r1, p1) = (s.pre_rho, s.pre_p);
        assert!((r1 * w1 - rho * w2).abs() < 1e-12);
        assert!((r1 * w1 * w1 + p1 - rho * w2 * w2 - p).abs() < 1e-10);
        let h = |r: f64, pp: f64, w: f64| g / (g - 1.0) * pp / r + 0.5 * w * w;
        assert!((h(r1, p1, w1) - h(rho, p, w2)).abs() < 1e-10);
    }

    #[test]
    fn shock_geometry() {
        let s = double_mach().shock_reflection().unwrap();
        let foot_top = 1.0 / 6.0 + 1.0 / 3f64.sqrt();
        assert!((s.shock_x(0.0, 1.0) - foot_top).abs() < 1e-15);
        let t = 0.1;
        assert!((s.shock_x(t, 0.3) - (1.0 / 6.0 + (0.3 + 20.0 * t) / 3f64.sqrt())).abs() < 1e-14);
        let (_, u, v, _) = s.post_shock_primitive();
        assert!((u - 8.25 * (PI / 6.0).cos()).abs() < 1e-13);
        assert!((v + 8.25 * (PI / 6.0).sin()).abs() < 1e-13);
    }

    #[test]
    fn dmr_initial_field_is_physical() {
        let p = double_mach();
        let f = p.euler2d_field(48, 12).unwrap();
        assert!(f.all_finite());
        assert!((f.at(0, 0)[0] - 8.0).abs() < 1e-13);
        assert_eq!(f.at(47, 0)[0], 1.4);
        p.bcs_2d().unwrap().validate().unwrap();
    }

    #[test]
    fn shear_layer_parameters() {
        let p = shear_layer();
        let params = p.shear_layer_params(LimiterKind::VanAlbada).unwrap();
        assert_eq!(params.rho, PI / 15.0);
        assert_eq!(params.delta, 0.05);
        assert_eq!((params.n, params.cfl, params.t_end), (128, 0.5, 8.0));
        let f = params.initial().unwrap();
        let j = f.grid.n / 4;
        // y_j = π/2 + h/2 here, close to the tanh zero
        assert!(f.u[f.grid.idx(0, j as isize)].abs() < 0.2);
    }

    #[test]
    fn every_problem_round_trips_and_is_admissible() {
        for p in all_problems() {
            let s = serde_json::to_string(&p).unwrap();
            let back: Problem = serde_json::from_str(&s).unwrap();
            assert_eq!(back, p);
            assert_eq!(problem_by_name(&p.name).unwrap(), p);
            match p.law {
                LawKind::Advection | LawKind::Burgers => {
                    p.scalar_field(p.n).unwrap();
                }
                LawKind::Euler1d => {
                    p.euler1d_field(p.n).unwrap();
                }
                LawKind::Euler2d => {
                    p.euler2d_field(p.n, p.ny.unwrap()).unwrap();
                }
                LawKind::Incompressible => {
                    p.shear_layer_params(LimiterKind::VanAlbada).unwrap().initial().unwrap();
                }
            }
        }
        assert!(problem_by_name("nope").is_err());
        assert_eq!(PROBLEM_NAMES.len(), all_problems().len());
    }
}
