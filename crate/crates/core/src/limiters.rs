//! Two-argument slope limiters.
//!
//! Every limiter maps the pair of one-sided differences around a cell,
//! `(Δū_{j-1/2}, Δū_{j+1/2})`, to the cell slope `u'_j` used by the
//! piecewise-linear reconstruction.
//!
//! * [`minmod`] and the one-parameter [`minmod_theta`] family return zero
//!   whenever the one-sided differences disagree in sign, so the
//!   reconstruction drops to first order at extrema.
//! * [`van_albada`] is a smooth rational limiter. It never switches off
//!   completely and satisfies
//!   `(1-√2)/2 ≤ ψ(a,b)/a, ψ(a,b)/b ≤ (1+√2)/2`, which is what makes the
//!   central schemes built on it TVD.
//! * [`van_albada_eps`] adds a small bias `ε` that keeps the limiter
//!   smooth at `a = b = 0`; it reduces to [`van_albada`] as `ε → 0`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound of `ψ_vA(a,b)/a` and `ψ_vA(a,b)/b`.
pub const VA_RATIO_MAX: f64 = (1.0 + std::f64::consts::SQRT_2) / 2.0;
/// Lower bound of `ψ_vA(a,b)/a` and `ψ_vA(a,b)/b`.
pub const VA_RATIO_MIN: f64 = (1.0 - std::f64::consts::SQRT_2) / 2.0;
/// Bound on `|u'_{j+1} - u'_j| / |Δū_{j+1/2}|` for van Albada slopes.
pub const VA_DIFF_MAX: f64 = std::f64::consts::SQRT_2;

/// Sign with `sgn(0) = 0` (unlike `f64::signum`).
#[inline]
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    0.5 * (sgn(a) + sgn(b)) * a.abs().min(b.abs())
}

/// `minmod_θ`; the caller is responsible for `1 ≤ θ ≤ 2`
/// (use [`LimiterKind::minmod_theta`] for a checked value).
#[inline]
pub fn minmod_theta(a: f64, b: f64, theta: f64) -> f64 {
    let s = sgn(a);
    if s == 0.0 || s != sgn(b) {
        return 0.0;
    }
    let m = (theta * a.abs()).min(0.5 * (a + b).abs()).min(theta * b.abs());
    s * m
}

/// `ψ_vA(a,b) = (a²b + ab²)/(a² + b²)`, with `ψ_vA(0,0) = 0`.
#[inline]
pub fn van_albada(a: f64, b: f64) -> f64 {
    let den = a * a + b * b;
    if den == 0.0 {
        return 0.0;
    }
    a * b * (a + b) / den
}

#[inline]
pub fn van_albada_eps(a: f64, b: f64, eps: f64) -> f64 {
    let e2 = eps * eps;
    ((a * a + e2) * b + (b * b + e2) * a) / (a * a + b * b + 2.0 * e2)
}

/// A validated limiter choice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LimiterKind {
    Minmod,
    MinmodTheta { theta: f64 },
    VanAlbada,
    VanAlbadaEps { eps: f64 },
}

impl LimiterKind {
    pub fn minmod_theta(theta: f64) -> Result<Self> {
        let kind = LimiterKind::MinmodTheta { theta };
        kind.validate()?;
        Ok(kind)
    }

    pub fn van_albada_eps(eps: f64) -> Result<Self> {
        let kind = LimiterKind::VanAlbadaEps { eps };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LimiterKind::MinmodTheta { theta } if !(1.0..=2.0).contains(&theta) => Err(
                Error::Parameter(format!("minmod theta must lie in [1, 2], got {theta}")),
            ),
            LimiterKind::VanAlbadaEps { eps } if !(eps > 0.0 && eps.is_finite()) => Err(
                Error::Parameter(format!("van Albada eps must be positive, got {eps}")),
            ),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn apply(&self, a: f64, b: f64) -> f64 {
        match *self {
            LimiterKind::Minmod => minmod(a, b),
            LimiterKind::MinmodTheta { theta } => minmod_theta(a, b, theta),
            LimiterKind::VanAlbada => van_albada(a, b),
            LimiterKind::VanAlbadaEps { eps } => van_albada_eps(a, b, eps),
        }
    }

    /// Short name used in file names and CLI flags.
    pub fn short_name(&self) -> &'static str {
        match self {
            LimiterKind::Minmod => "minmod",
            LimiterKind::MinmodTheta { .. } => "minmod-theta",
            LimiterKind::VanAlbada => "va",
            LimiterKind::VanAlbadaEps { .. } => "va-eps",
        }
    }
}

/// Observed extrema from [`limiter_ratio_bounds`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioBounds {
    /// Minimum of `ψ(a,b)/a` and `ψ(a,b)/b` over all samples.
    pub min_ratio: f64,
    /// Maximum of `ψ(a,b)/a` and `ψ(a,b)/b` over all samples.
    pub max_ratio: f64,
    /// Maximum of `|ψ(b,c) - ψ(a,b)| / |b|` over adjacent-slope pairs.
    pub max_diff_ratio: f64,
}

/// Sweeps slope ratios and reports the observed extrema of the limiter ratios.
///
/// Ratios are drawn from `{±10^k : k = -8..8}`, the analytic extremum
/// locations `r = -1 ± √2` and their reciprocals, and then uniform draws from
/// `(-100, 100)` until `samples` pairs have been evaluated. The shared
/// difference `b` also varies in magnitude and sign so scale effects show up.
pub fn limiter_ratio_bounds(kind: &LimiterKind, samples: usize, seed: u64) -> RatioBounds {
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut grid: Vec<f64> = Vec::new();
    for k in -8..=8 {
        let v = 10f64.powi(k);
        grid.push(v);
        grid.push(-v);
    }
    for r in [sqrt2 - 1.0, -sqrt2 - 1.0] {
        grid.push(r);
        grid.push(1.0 / r);
    }

    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = RatioBounds {
        min_ratio: f64::INFINITY,
        max_ratio: f64::NEG_INFINITY,
        max_diff_ratio: 0.0,
    };

    let visit = |b: f64, r_left: f64, r_right: f64, out: &mut RatioBounds| {
        let a = r_left * b;
        let c = r_right * b;
        let left = kind.apply(a, b);
        let right = kind.apply(b, c);
        if a != 0.0 {
            let q = left / a;
            out.min_ratio = out.min_ratio.min(q);
            out.max_ratio = out.max_ratio.max(q);
        }
        let q = left / b;
        out.min_ratio = out.min_ratio.min(q);
        out.max_ratio = out.max_ratio.max(q);
        out.max_diff_ratio = out.max_diff_ratio.max((right - left).abs() / b.abs());
    };

    let mut done = 0usize;
    'grid: for &rl in &grid {
        for &rr in &grid {
            if done >= samples {
                break 'grid;
            }
            let b = if done.is_multiple_of(2) { 1.0 } else { -3.5 };
            visit(b, rl, rr, &mut out);
            done += 1;
        }
    }
    while done < samples {
        let b = 10f64.powf(rng.gen_range(-3.0..3.0)) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let rl = rng.gen_range(-100.0..100.0);
        let rr = rng.gen_range(-100.0..100.0);
        visit(b, rl, rr, &mut out);
        done += 1;
    }
    out
}
