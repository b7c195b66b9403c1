//! Incompressible 2D Euler on a doubly periodic square by a collocated
//! projection method: a MUSCL/Rusanov convective predictor followed by a
//! pressure Poisson solve with the wide (2h) Laplacian.

use log::debug;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::limiters::LimiterKind;
use crate::time_integration::{Integrator, OdeSystem, StageVector};

/// Cell-centered periodic `n × n` grid on `[0, L)²`, `h = L / n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicGrid {
    pub n: usize,
    pub length: f64,
    pub h: f64,
}

impl PeriodicGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::Config(format!("periodic grid needs an even n >= 4, got {n}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Config(format!("invalid domain length {length}")));
        }
        Ok(PeriodicGrid {
            n,
            length,
            h: length / n as f64,
        })
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Row-major index with periodic wrap, `x` fastest.
    #[inline]
    pub fn idx(&self, i: isize, j: isize) -> usize {
        let n = self.n as isize;
        (j.rem_euclid(n) * n + i.rem_euclid(n)) as usize
    }
}

/// Centered gradient `((p_{i+1}-p_{i-1})/2h, (p_{j+1}-p_{j-1})/2h)`.
pub fn discrete_grad(p: &[f64], g: &PeriodicGrid) -> (Vec<f64>, Vec<f64>) {
    let two_h = 2.0 * g.h;
    let n = g.n as isize;
    let mut gx = vec![0.0; g.len()];
    let mut gy = vec![0.0; g.len()];
    for j in 0..n {
        for i in 0..n {
            let k = g.idx(i, j);
            gx[k] = (p[g.idx(i + 1, j)] - p[g.idx(i - 1, j)]) / two_h;
            gy[k] = (p[g.idx(i, j + 1)] - p[g.idx(i, j - 1)]) / two_h;
        }
    }
    (gx, gy)
}

/// Centered divergence `(u_{i+1}-u_{i-1})/2h + (v_{j+1}-v_{j-1})/2h`.
pub fn discrete_div(u: &[f64], v: &[f64], g: &PeriodicGrid) -> Vec<f64> {
    let two_h = 2.0 * g.h;
    let n = g.n as isize;
    let mut out = vec![0.0; g.len()];
    for j in 0..n {
        for i in 0..n {
            out[g.idx(i, j)] = (u[g.idx(i + 1, j)] - u[g.idx(i - 1, j)]) / two_h
                + (v[g.idx(i, j + 1)] - v[g.idx(i, j - 1)]) / two_h;
        }
    }
    out
}

/// The wide Laplacian `(p_{i+2} - 2p_i + p_{i-2})/4h² + (y)`, evaluated as
/// the divergence of the centered gradient so it equals
/// `discrete_div(discrete_grad(p))` bit for bit.
pub fn wide_laplacian(p: &[f64], g: &PeriodicGrid) -> Vec<f64> {
    let mut out = vec![0.0; g.len()];
    wide_laplacian_into(p, g, &mut out);
    out
}

fn wide_laplacian_into(p: &[f64], g: &PeriodicGrid, out: &mut [f64]) {
    let two_h = 2.0 * g.h;
    let n = g.n as isize;
    out.par_chunks_mut(g.n).enumerate().for_each(|(j, row)| {
        let j = j as isize;
        for i in 0..n {
            let gx_p = (p[g.idx(i + 2, j)] - p[g.idx(i, j)]) / two_h;
            let gx_m = (p[g.idx(i, j)] - p[g.idx(i - 2, j)]) / two_h;
            let gy_p = (p[g.idx(i, j + 2)] - p[g.idx(i, j)]) / two_h;
            let gy_m = (p[g.idx(i, j)] - p[g.idx(i, j - 2)]) / two_h;
            row[i as usize] = (gx_p - gx_m) / two_h + (gy_p - gy_m) / two_h;
        }
    });
}

/// Removes the mean of each of the four parity subgrids `(i mod 2, j mod 2)`,
/// which span the null space of the wide Laplacian.
pub fn remove_parity_means(p: &mut [f64], g: &PeriodicGrid) {
    let mut sums = [0.0f64; 4];
    let n = g.n;
    for j in 0..n {
        for i in 0..n {
            sums[(j % 2) * 2 + i % 2] += p[j * n + i];
        }
    }
    let count = (n * n / 4) as f64;
    let means = sums.map(|s| s / count);
    for j in 0..n {
        for i in 0..n {
            p[j * n + i] -= means[(j % 2) * 2 + i % 2];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.par_iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonConfig {
    /// Relative residual `‖r‖₂ / ‖b‖₂` at which CG stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PoissonConfig {
    fn default() -> Self {
        PoissonConfig {
            tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

impl PoissonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Parameter(format!(
                "Poisson tolerance must be positive and max_iter nonzero, got {} / {}",
                self.tol, self.max_iter
            )));
        }
        Ok(())
    }
}

/// Conjugate gradients on `-Δʰ p = b` restricted to the complement of the
/// parity null space. Owns its scratch space and warm-starts from the last
/// solution.
#[derive(Clone, Debug)]
pub struct ProjectionSolver {
    pub grid: PeriodicGrid,
    pub cfg: PoissonConfig,
    pressure: Vec<f64>,
    r: Vec<f64>,
    d: Vec<f64>,
    q: Vec<f64>,
    pub last_iterations: usize,
}

impl ProjectionSolver {
    pub fn new(grid: PeriodicGrid, cfg: PoissonConfig) -> Result<Self> {
        cfg.validate()?;
        let z = vec![0.0; grid.len()];
        Ok(ProjectionSolver {
            grid,
            cfg,
            pressure: z.clone(),
            r: z.clone(),
            d: z.clone(),
            q: z,
            last_iterations: 0,
        })
    }

    pub fn pressure(&self) -> &[f64] {
        &self.pressure
    }

    /// Solves `-Δʰ p = b` after filtering `b`; the result is mean-free on
    /// every parity subgrid.
    pub fn solve(&mut self, b: &[f64]) -> Result<&[f64]> {
        let g = self.grid;
        let mut rhs = b.to_vec();
        remove_parity_means(&mut rhs, &g);
        let b_norm = dot(&rhs, &rhs).sqrt();
        if b_norm == 0.0 {
            self.pressure.iter_mut().for_each(|p| *p = 0.0);
            self.last_iterations = 0;
            return Ok(&self.pressure);
        }
        remove_parity_means(&mut self.pressure, &g);

        // r = b - A x with A = -Δʰ
        wide_laplacian_into(&self.pressure, &g, &mut self.q);
        for ((r, b), q) in self.r.iter_mut().zip(&rhs).zip(&self.q) {
            *r = b + q;
        }
        remove_parity_means(&mut self.r, &g);
        let mut rr = dot(&self.r, &self.r);
        if rr >= b_norm * b_norm {
            // the previous pressure is a worse guess than zero
            self.pressure.iter_mut().for_each(|p| *p = 0.0);
            self.r.copy_from_slice(&rhs);
            rr = b_norm * b_norm;
        }
        self.d.copy_from_slice(&self.r);
        let target = self.cfg.tol * b_norm;
        let mut history = vec![rr.sqrt() / b_norm];
        let mut it = 0;
        while rr.sqrt() > target {
            if it >= self.cfg.max_iter {
                return Err(Error::PoissonNotConverged {
                    iterations: it,
                    residuals: history,
                });
            }
            wide_laplacian_into(&self.d, &g, &mut self.q);
            self.q.iter_mut().for_each(|q| *q = -*q);
            let alpha = rr / dot(&self.d, &self.q);
            self.pressure
                .par_iter_mut()
                .zip(&self.d)
                .for_each(|(p, d)| *p += alpha * d);
            self.r.par_iter_mut().zip(&self.q).for_each(|(r, q)| *r -= alpha * q);
            let rr_new = dot(&self.r, &self.r);
            let beta = rr_new / rr;
            self.d.par_iter_mut().zip(&self.r).for_each(|(d, r)| *d = r + beta * *d);
            rr = rr_new;
            it += 1;
            history.push(rr.sqrt() / b_norm);
        }
        remove_parity_means(&mut self.pressure, &g);
        self.last_iterations = it;
        Ok(&self.pressure)
    }
}

/// Velocity at cell centers of a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField {
    pub grid: PeriodicGrid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl VelocityField {
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let n = grid.n;
        let mut u = vec![0.0; grid.len()];
        let mut v = vec![0.0; grid.len()];
        for j in 0..n {
            for i in 0..n {
                let (a, b) = f(grid.center(i), grid.center(j));
                u[j * n + i] = a;
                v[j * n + i] = b;
            }
        }
        VelocityField { grid, u, v, t: 0.0 }
    }

    pub fn mean(&self) -> (f64, f64) {
        let m = self.grid.len() as f64;
        (self.u.iter().sum::<f64>() / m, self.v.iter().sum::<f64>() / m)
    }

    pub fn max_divergence(&self) -> f64 {
        discrete_div(&self.u, &self.v, &self.grid)
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()))
    }

    /// `ω = ∂ₓv - ∂ᵧu` with centered differences.
    pub fn vorticity(&self) -> Vec<f64> {
        let g = &self.grid;
        let two_h = 2.0 * g.h;
        let n = g.n as isize;
        let mut w = vec![0.0; g.len()];
        for j in 0..n {
            for i in 0..n {
                w[g.idx(i, j)] = (self.v[g.idx(i + 1, j)] - self.v[g.idx(i - 1, j)]) / two_h
                    - (self.u[g.idx(i, j + 1)] - self.u[g.idx(i, j - 1)]) / two_h;
            }
        }
        w
    }

    /// `(y, v)` along the vertical line `x = L/2`, averaging the two
    /// straddling columns.
    pub fn centerline_v(&self) -> Vec<(f64, f64)> {
        let g = &self.grid;
        let (a, b) = (g.n / 2 - 1, g.n / 2);
        (0..g.n)
            .map(|j| (g.center(j), 0.5 * (self.v[j * g.n + a] + self.v[j * g.n + b])))
            .collect()
    }

    pub fn max_speed_rate(&self) -> f64 {
        let h = self.grid.h;
        self.u
            .iter()
            .zip(&self.v)
            .fold(0.0f64, |m, (u, v)| m.max(u.abs() / h + v.abs() / h))
    }
}

impl StageVector for VelocityField {
    fn combine(&mut self, a: f64, other: &Self, b: f64) {
        self.u.combine(a, &other.u, b);
        self.v.combine(a, &other.v, b);
    }

    fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

/// `-∇·(u⊗u)` with MUSCL interface states and the Rusanov flux, local speed
/// `max(|u⁻|, |u⁺|)` in x and `max(|v⁻|, |v⁺|)` in y.
pub fn convective_rhs(field: &VelocityField, limiter: &LimiterKind) -> (Vec<f64>, Vec<f64>) {
    let g = field.grid;
    let n = g.n as isize;
    let inv_h = 1.0 / g.h;
    let (u, v) = (&field.u, &field.v);

    let slope = |q: &[f64], i: isize, j: isize, di: isize, dj: isize| {
        let c = q[g.idx(i, j)];
        limiter.apply(c - q[g.idx(i - di, j - dj)], q[g.idx(i + di, j + dj)] - c)
    };
    // flux through the face between (i, j) and (i+di, j+dj): returns the
    // u- and v-momentum fluxes
    let face = |i: isize, j: isize, di: isize, dj: isize| -> (f64, f64) {
        let (k, kp) = (g.idx(i, j), g.idx(i + di, j + dj));
        let um = u[k] + 0.5 * slope(u, i, j, di, dj);
        let up = u[kp] - 0.5 * slope(u, i + di, j + dj, di, dj);
        let vm = v[k] + 0.5 * slope(v, i, j, di, dj);
        let vp = v[kp] - 0.5 * slope(v, i + di, j + dj, di, dj);
        // normal velocity carries both components across the face
        let (nm, np) = if di == 1 { (um, up) } else { (vm, vp) };
        let a = nm.abs().max(np.abs());
        let fu = 0.5 * (nm * um + np * up) - 0.5 * a * (up - um);
        let fv = 0.5 * (nm * vm + np * vp) - 0.5 * a * (vp - vm);
        (fu, fv)
    };

    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut ru = vec![0.0; g.n];
            let mut rv = vec![0.0; g.n];
            // x-faces i-1/2 for i = 0..=n
            let xf: Vec<(f64, f64)> = (-1..n).map(|i| face(i, j, 1, 0)).collect();
            for i in 0..n as usize {
                let (lo, hi) = (xf[i], xf[i + 1]);
                let (bl, bh) = (face(i as isize, j - 1, 0, 1), face(i as isize, j, 0, 1));
                ru[i] = -(hi.0 - lo.0) * inv_h - (bh.0 - bl.0) * inv_h;
                rv[i] = -(hi.1 - lo.1) * inv_h - (bh.1 - bl.1) * inv_h;
            }
            (ru, rv)
        })
        .collect();

    let mut ru = Vec::with_capacity(g.len());
    let mut rv = Vec::with_capacity(g.len());
    for (a, b) in rows {
        ru.extend(a);
        rv.extend(b);
    }
    (ru, rv)
}

/// Removes the gradient part of `field` over a step of length `dt`:
/// solves `-Δʰp = -(1/dt)∇ʰ·u*` and sets `u = u* - dt ∇ʰp`. Returns the
/// max-norm divergence of the result.
pub fn project(field: &mut VelocityField, dt: f64, solver: &mut ProjectionSolver) -> Result<f64> {
    let g = field.grid;
    let div = discrete_div(&field.u, &field.v, &g);
    let b: Vec<f64> = div.iter().map(|d| -d / dt).collect();
    let p = solver.solve(&b)?;
    let (gx, gy) = discrete_grad(p, &g);
    for k in 0..g.len() {
        field.u[k] -= dt * gx[k];
        field.v[k] -= dt * gy[k];
    }
    Ok(field.max_divergence())
}

/// Convective predictor plus projection, as one forward-Euler substep.
pub struct ProjectionSystem {
    pub limiter: LimiterKind,
    pub solver: ProjectionSolver,
    /// Largest post-projection divergence since the last reset.
    pub max_divergence: f64,
}

impl OdeSystem for ProjectionSystem {
    type State = VelocityField;

    fn rhs(&mut self, u: &VelocityField, _t: f64) -> Result<VelocityField> {
        let (ru, rv) = convective_rhs(u, &self.limiter);
        Ok(VelocityField {
            grid: u.grid,
            u: ru,
            v: rv,
            t: u.t,
        })
    }

    fn euler_substep(&mut self, u: &VelocityField, t: f64, dt: f64) -> Result<VelocityField> {
        let l = self.rhs(u, t)?;
        let mut star = u.clone();
        star.combine(1.0, &l, dt);
        if !star.is_finite() {
            return Err(Error::Divergence { stage: 0, t });
        }
        let div = project(&mut star, dt, &mut self.solver)?;
        self.max_divergence = self.max_divergence.max(div);
        Ok(star)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShearLayerParams {
    pub n: usize,
    /// Shear-layer thickness parameter.
    pub rho: f64,
    /// Amplitude of the transverse perturbation.
    pub delta: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub limiter: LimiterKind,
    pub poisson: PoissonConfig,
}

impl ShearLayerParams {
    pub fn new(limiter: LimiterKind) -> Self {
        ShearLayerParams {
            n: 128,
            rho: std::f64::consts::PI / 15.0,
            delta: 0.05,
            cfl: 0.5,
            t_end: 8.0,
            limiter,
            poisson: PoissonConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.limiter.validate()?;
        self.poisson.validate()?;
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Parameter(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end > 0.0) || !(self.rho > 0.0) {
            return Err(Error::Parameter("t_end and rho must be positive".into()));
        }
        PeriodicGrid::new(self.n, 2.0 * std::f64::consts::PI).map(|_| ())
    }

    pub fn initial(&self) -> Result<VelocityField> {
        let pi = std::f64::consts::PI;
        let grid = PeriodicGrid::new(self.n, 2.0 * pi)?;
        let (rho, delta) = (self.rho, self.delta);
        Ok(VelocityField::from_fn(grid, |x, y| {
            let u = if y <= pi {
                ((y - 0.5 * pi) / rho).tanh()
            } else {
                ((1.5 * pi - y) / rho).tanh()
            };
            (u, delta * x.sin())
        }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShearLayerStep {
    pub t: f64,
    pub dt: f64,
    /// Largest divergence after any projection within the step.
    pub max_divergence: f64,
    pub mean_u: f64,
    pub mean_v: f64,
    pub cg_iterations: usize,
}

#[derive(Clone, Debug)]
pub struct ShearLayerOutcome {
    pub field: VelocityField,
    pub steps: Vec<ShearLayerStep>,
    pub initial_mean: (f64, f64),
}

/// Runs the double shear layer with SSPRK3 and
/// `dt max(|u|/h + |v|/h) = cfl`.
pub fn shear_layer_run(params: &ShearLayerParams) -> Result<ShearLayerOutcome> {
    params.validate()?;
    let mut field = params.initial()?;
    let mut sys = ProjectionSystem {
        limiter: params.limiter,
        solver: ProjectionSolver::new(field.grid, params.poisson)?,
        max_divergence: 0.0,
    };
    let initial_mean = field.mean();
    let mut steps = Vec::new();
    let mut t = 0.0;
    while t < params.t_end {
        let rate = field.max_speed_rate();
        let mut dt = if rate > 0.0 { params.cfl / rate } else { params.t_end - t };
        if t + dt > params.t_end {
            dt = params.t_end - t;
        }
        sys.max_divergence = 0.0;
        let mut next = Integrator::SspRk3.step(&mut sys, &field, t, dt)?;
        t = if t + dt >= params.t_end { params.t_end } else { t + dt };
        next.t = t;
        let div = sys.max_divergence.max(next.max_divergence());
        let (mu, mv) = next.mean();
        steps.push(ShearLayerStep {
            t,
            dt,
            max_divergence: div,
            mean_u: mu,
            mean_v: mv,
            cg_iterations: sys.solver.last_iterations,
        });
        debug!("shear layer t = {t:.4}, dt = {dt:.3e}, div = {div:.2e}");
        field = next;
    }
    Ok(ShearLayerOutcome {
        field,
        steps,
        initial_mean,
    })
}
