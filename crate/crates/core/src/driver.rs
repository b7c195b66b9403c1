//! Time loops: march a field to `t_end` with a chosen scheme, recording a
//! [`RunReport`] and snapshots along the way.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::central_upwind::{stable_dt_1d, stable_dt_2d, CuConfig, CuSystem1D, CuSystem2D, SpeedMode, CU_DEFAULT_CFL};
use crate::diagnostics::{total_variation, RunReport, StepRecord};
use crate::error::{Error, Location, Result};
use crate::limiters::LimiterKind;
use crate::mesh::{apply_bc_1d, apply_bc_2d, destagger, BoundarySet1D, BoundarySet2D, Field1D, Field2D};
use crate::nt1d::{lxf_step, nt_stable_dt, nt_step, FluxDerivative, NtConfig, NT_DEFAULT_CFL};
use crate::physics::{Axis, ConservationLaw, DirectionalLaw, State};
use crate::reconstruct::{Basis, ReconstructionConfig};
use crate::time_integration::Integrator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Staggered central scheme.
    Nt,
    /// Semi-discrete central-upwind scheme.
    Cu,
    /// Staggered Lax–Friedrichs (the staggered scheme with zero slopes).
    Lxf,
}

impl SchemeKind {
    pub const NAMES: [&'static str; 3] = ["nt", "cu", "lxf"];

    pub fn short_name(&self) -> &'static str {
        match self {
            SchemeKind::Nt => "nt",
            SchemeKind::Cu => "cu",
            SchemeKind::Lxf => "lxf",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "nt" => Ok(SchemeKind::Nt),
            "cu" => Ok(SchemeKind::Cu),
            "lxf" => Ok(SchemeKind::Lxf),
            other => Err(Error::Config(format!(
                "unknown scheme '{other}'; valid schemes: {}",
                Self::NAMES.join(", ")
            ))),
        }
    }

    pub fn default_cfl(&self) -> f64 {
        match self {
            SchemeKind::Nt | SchemeKind::Lxf => NT_DEFAULT_CFL,
            SchemeKind::Cu => CU_DEFAULT_CFL,
        }
    }

    pub fn is_staggered(&self) -> bool {
        !matches!(self, SchemeKind::Cu)
    }
}

/// Everything needed to pick and configure a scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeOptions {
    pub scheme: SchemeKind,
    pub limiter: LimiterKind,
    pub basis: Basis,
    pub cfl: f64,
    pub speed_mode: SpeedMode,
    pub integrator: Integrator,
    pub flux_derivative: FluxDerivative,
}

impl SchemeOptions {
    pub fn new(scheme: SchemeKind, limiter: LimiterKind) -> Self {
        SchemeOptions {
            scheme,
            limiter,
            basis: Basis::Characteristic,
            cfl: scheme.default_cfl(),
            speed_mode: SpeedMode::Knp,
            integrator: Integrator::SspRk3,
            flux_derivative: FluxDerivative::ExactJacobian,
        }
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_basis(mut self, basis: Basis) -> Self {
        self.basis = basis;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn recon(&self) -> ReconstructionConfig {
        ReconstructionConfig {
            limiter: self.limiter,
            basis: self.basis,
        }
    }

    pub fn nt_config(&self) -> NtConfig {
        NtConfig {
            recon: self.recon(),
            cfl: self.cfl,
            flux_derivative: self.flux_derivative,
        }
    }

    pub fn cu_config(&self) -> CuConfig {
        CuConfig::new(self.recon())
            .with_cfl(self.cfl)
            .with_speed_mode(self.speed_mode)
    }

    pub fn validate(&self) -> Result<()> {
        match self.scheme {
            SchemeKind::Nt | SchemeKind::Lxf => self.nt_config().validate(),
            SchemeKind::Cu => self.cu_config().validate(),
        }
    }
}

/// Output of a 1D run. Fields are on the base grid.
#[derive(Clone, Debug)]
pub struct Run1d<const K: usize> {
    pub final_field: Field1D<K>,
    pub snapshots: Vec<Field1D<K>>,
    pub report: RunReport,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct Run2d<const K: usize> {
    pub final_field: Field2D<K>,
    pub snapshots: Vec<Field2D<K>>,
    pub report: RunReport,
    pub steps: usize,
}

fn min_density_pressure<'a, const K: usize, L: ConservationLaw<K>>(
    cells: impl Iterator<Item = &'a State<K>>,
    law: &L,
) -> (Option<f64>, Option<f64>) {
    let mut out: (Option<f64>, Option<f64>) = (None, None);
    for u in cells {
        if let Some((rho, p)) = law.density_pressure(u) {
            out.0 = Some(out.0.map_or(rho, |m| m.min(rho)));
            out.1 = Some(out.1.map_or(p, |m| m.min(p)));
        }
    }
    out
}

fn record_1d<const K: usize, L: ConservationLaw<K>>(
    field: &Field1D<K>,
    law: &L,
    dt: f64,
    periodic: bool,
) -> StepRecord {
    let (min_rho, min_p) = min_density_pressure(field.interior().iter(), law);
    StepRecord {
        t: field.t,
        dt,
        tv: total_variation(field.interior(), periodic).iter().copied().collect(),
        mass: field.total_mass().iter().copied().collect(),
        min_rho,
        min_p,
    }
}

/// Sum of the total variations of every interior row and column.
pub fn total_variation_2d<const K: usize>(field: &Field2D<K>) -> State<K> {
    let (nx, ny) = (field.grid.nx(), field.grid.ny());
    let mut tv = State::<K>::zeros();
    for j in 0..ny as isize {
        let row: Vec<State<K>> = (0..nx as isize).map(|i| *field.at(i, j)).collect();
        tv += total_variation(&row, false);
    }
    for i in 0..nx as isize {
        let col: Vec<State<K>> = (0..ny as isize).map(|j| *field.at(i, j)).collect();
        tv += total_variation(&col, false);
    }
    tv
}

fn record_2d<const K: usize, D: DirectionalLaw<K>>(field: &Field2D<K>, law: &D, dt: f64) -> StepRecord {
    let (min_rho, min_p) = min_density_pressure(field.interior_iter(), &law.along(Axis::X));
    StepRecord {
        t: field.t,
        dt,
        tv: total_variation_2d(field).iter().copied().collect(),
        mass: field.total_mass().iter().copied().collect(),
        min_rho,
        min_p,
    }
}

/// Sorted, de-duplicated stop times in `(0, t_end]`, ending with `t_end`.
fn stop_times(t_end: f64, snapshots: &[f64]) -> Result<Vec<f64>> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Parameter(format!("t_end must be positive, got {t_end}")));
    }
    let mut stops: Vec<f64> = Vec::with_capacity(snapshots.len() + 1);
    for &s in snapshots {
        if !(s > 0.0 && s <= t_end) {
            return Err(Error::Parameter(format!("snapshot time {s} lies outside (0, {t_end}]")));
        }
        stops.push(s);
    }
    stops.push(t_end);
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup();
    Ok(stops)
}

/// Clips `dt` so the step does not overshoot `target`. Returns the step
/// and whether it lands on the target.
fn clip_dt(t: f64, dt: f64, target: f64) -> (f64, bool) {
    let remaining = target - t;
    if dt >= remaining * (1.0 - 1e-12) {
        (remaining, true)
    } else {
        (dt, false)
    }
}

fn check_states_1d<const K: usize, L: ConservationLaw<K>>(field: &Field1D<K>, law: &L) -> Result<()> {
    if !field.all_finite() {
        return Err(Error::Divergence { stage: 0, t: field.t });
    }
    for (j, u) in field.interior().iter().enumerate() {
        law.check_state(u).map_err(|np| Error::positivity(Location::Cell(j), np))?;
    }
    Ok(())
}

fn base_grid_copy<const K: usize>(field: &Field1D<K>, bcs: &BoundarySet1D<K>) -> Result<Field1D<K>> {
    if field.staggered {
        let mut f = field.clone();
        let t = f.t;
        apply_bc_1d(&mut f, bcs, t)?;
        destagger(&f)
    } else {
        Ok(field.clone())
    }
}

/// Marches a 1D field to `t_end`, stopping exactly at each snapshot time.
///
/// The report holds one record per step plus the initial state. For the
/// staggered schemes the recorded quantities are those of the grid the
/// step landed on.
pub fn run_1d<const K: usize, L: ConservationLaw<K>>(
    law: &L,
    initial: Field1D<K>,
    bcs: &BoundarySet1D<K>,
    opts: &SchemeOptions,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<Run1d<K>> {
    opts.validate()?;
    bcs.validate()?;
    if initial.staggered {
        return Err(Error::Config("runs start from a base-grid field".into()));
    }
    let stops = stop_times(t_end, snapshot_times)?;
    let periodic = bcs.is_periodic();
    let mut field = initial;
    field.t = 0.0;
    check_states_1d(&field, law)?;

    let mut report = RunReport::new(K);
    report.push(record_1d(&field, law, 0.0, periodic))?;
    let mut snapshots = Vec::new();
    let nt_cfg = opts.nt_config();
    let cu_cfg = opts.cu_config();
    let mut t = 0.0;
    let mut steps = 0usize;

    for (k, &target) in stops.iter().enumerate() {
        while t < target {
            apply_bc_1d(&mut field, bcs, t)?;
            let dt = match opts.scheme {
                SchemeKind::Nt | SchemeKind::Lxf => nt_stable_dt(&field, opts.cfl, law)?.unwrap_or(target - t),
                SchemeKind::Cu => stable_dt_1d(&field, &cu_cfg, law)?,
            };
            let (dt, lands) = clip_dt(t, dt, target);
            let mut next = match opts.scheme {
                SchemeKind::Nt => nt_step(&field, &nt_cfg, law, dt)?,
                SchemeKind::Lxf => lxf_step(&field, opts.cfl, law, dt)?,
                SchemeKind::Cu => {
                    let mut sys = CuSystem1D {
                        law,
                        cfg: cu_cfg,
                        bcs: bcs.clone(),
                    };
                    opts.integrator.step(&mut sys, &field, t, dt)?
                }
            };
            t = if lands { target } else { t + dt };
            next.t = t;
            check_states_1d(&next, law)?;
            report.push(record_1d(&next, law, dt, periodic))?;
            field = next;
            steps += 1;
            if steps.is_multiple_of(1000) {
                debug!("step {steps}, t = {t:.6}");
            }
        }
        if k + 1 < stops.len() || snapshot_times.contains(&target) {
            snapshots.push(base_grid_copy(&field, bcs)?);
        }
    }
    info!("1D run finished: {steps} steps to t = {t}");
    let final_field = base_grid_copy(&field, bcs)?;
    Ok(Run1d {
        final_field,
        snapshots,
        report,
        steps,
    })
}

fn check_states_2d<const K: usize, D: DirectionalLaw<K>>(field: &Field2D<K>, law: &D) -> Result<()> {
    if !field.all_finite() {
        return Err(Error::Divergence { stage: 0, t: field.t });
    }
    let along = law.along(Axis::X);
    for j in 0..field.grid.ny() {
        for i in 0..field.grid.nx() {
            along
                .check_state(field.at(i as isize, j as isize))
                .map_err(|np| Error::positivity(Location::Cell2D(i, j), np))?;
        }
    }
    Ok(())
}

/// Marches a 2D field with the central-upwind scheme.
pub fn run_2d<const K: usize, D: DirectionalLaw<K>>(
    law: &D,
    initial: Field2D<K>,
    bcs: &BoundarySet2D<K>,
    opts: &SchemeOptions,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<Run2d<K>> {
    if opts.scheme != SchemeKind::Cu {
        return Err(Error::Config(format!(
            "2D problems use the cu scheme, not {}",
            opts.scheme.short_name()
        )));
    }
    opts.validate()?;
    bcs.validate()?;
    let stops = stop_times(t_end, snapshot_times)?;
    let cfg = opts.cu_config();
    let mut field = initial;
    field.t = 0.0;
    check_states_2d(&field, law)?;

    let mut report = RunReport::new(K);
    report.push(record_2d(&field, law, 0.0))?;
    let mut snapshots = Vec::new();
    let mut sys = CuSystem2D {
        law,
        cfg,
        bcs: bcs.clone(),
    };
    let mut t = 0.0;
    let mut steps = 0usize;

    for (k, &target) in stops.iter().enumerate() {
        while t < target {
            apply_bc_2d(&mut field, bcs, t)?;
            let dt = stable_dt_2d(&field, &cfg, law)?;
            let (dt, lands) = clip_dt(t, dt, target);
            let mut next = opts.integrator.step(&mut sys, &field, t, dt)?;
            t = if lands { target } else { t + dt };
            next.t = t;
            check_states_2d(&next, law)?;
            report.push(record_2d(&next, law, dt))?;
            field = next;
            steps += 1;
            if steps.is_multiple_of(100) {
                debug!("step {steps}, t = {t:.6}, dt = {dt:.3e}");
            }
        }
        if k + 1 < stops.len() || snapshot_times.contains(&target) {
            snapshots.push(field.clone());
        }
    }
    info!("2D run finished: {steps} steps to t = {t}");
    Ok(Run2d {
        final_field: field,
        snapshots,
        report,
        steps,
    })
}
