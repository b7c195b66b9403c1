use std::collections::BTreeSet;
use std::fmt::Write as _;

use cll_core::bench_suite::{LawKind, Problem};
use cll_core::diagnostics::{
    convergence_order, fmt_num, l1_error_vs_exact, l1_error_vs_fine, local_order, total_variation_scalar,
    ConvergenceFit,
};
use cll_core::driver::{run_1d, run_2d, Run1d, SchemeKind, SchemeOptions};
use cll_core::error::Error;
use cll_core::io::{write_field1d, write_field2d, Field1dData, Field2dData, ResolvedRun};
use cll_core::mesh::{apply_bc_1d, Field1D};
use cll_core::nt1d::{nt_stable_dt, nt_step, nt_tvd_diagnostic};
use cll_core::physics::{advection_law, burgers_law, euler1d_law, euler2d_law, ConservationLaw, State};
use cll_core::incompressible::shear_layer_run;

/// A file to be written into the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

impl Artifact {
    fn field1d(name: String, data: &Field1dData) -> Result<Self, Error> {
        let mut contents = Vec::new();
        write_field1d(data, &mut contents)?;
        Ok(Artifact { name, contents })
    }

    fn field2d(name: String, data: &Field2dData) -> Result<Self, Error> {
        let mut contents = Vec::new();
        write_field2d(data, &mut contents)?;
        Ok(Artifact { name, contents })
    }
}

fn snapshot_tag(t: f64) -> String {
    format!("t{t}")
}

fn artifacts_1d<const K: usize>(stem: &str, run: &Run1d<K>) -> Result<Vec<Artifact>, Error> {
    let mut out = vec![Artifact::field1d(
        format!("{stem}_final.csv"),
        &Field1dData::from_field(&run.final_field),
    )?];
    for snap in &run.snapshots {
        out.push(Artifact::field1d(
            format!("{stem}_{}.csv", snapshot_tag(snap.t)),
            &Field1dData::from_field(snap),
        )?);
    }
    let mut report = Vec::new();
    run.report.write_csv(&mut report)?;
    out.push(Artifact {
        name: format!("{stem}_report.csv"),
        contents: report,
    });
    Ok(out)
}

fn run_scalar<L: ConservationLaw<1>>(law: &L, run: &ResolvedRun) -> Result<Run1d<1>, Error> {
    let p = &run.problem;
    run_1d(law, p.scalar_field(run.n)?, &p.bcs_1d()?, &run.opts, run.t_end, &run.snapshots)
}

fn run_euler1d(run: &ResolvedRun) -> Result<Run1d<3>, Error> {
    let p = &run.problem;
    let law = euler1d_law(p.params());
    run_1d(&law, p.euler1d_field(run.n)?, &p.bcs_1d()?, &run.opts, run.t_end, &run.snapshots)
}

/// Final field of a 1D run, component 0 of every cell.
pub enum Final1d {
    Scalar(Field1D<1>),
    Euler(Field1D<3>),
}

pub fn run_1d_final(run: &ResolvedRun) -> Result<Final1d, Error> {
    match run.problem.law {
        LawKind::Advection => Ok(Final1d::Scalar(run_scalar(&advection_law(), run)?.final_field)),
        LawKind::Burgers => Ok(Final1d::Scalar(run_scalar(&burgers_law(), run)?.final_field)),
        LawKind::Euler1d => Ok(Final1d::Euler(run_euler1d(run)?.final_field)),
        _ => Err(Error::Config(format!(
            "problem '{}' is not one-dimensional",
            run.problem.name
        ))),
    }
}

pub fn solve(run: &ResolvedRun) -> Result<Vec<Artifact>, Error> {
    let stem = run.stem();
    let p = &run.problem;
    match p.law {
        LawKind::Advection => artifacts_1d(&stem, &run_scalar(&advection_law(), run)?),
        LawKind::Burgers => artifacts_1d(&stem, &run_scalar(&burgers_law(), run)?),
        LawKind::Euler1d => artifacts_1d(&stem, &run_euler1d(run)?),
        LawKind::Euler2d => {
            let ny = run.ny.unwrap_or(run.n);
            let law = euler2d_law(p.params());
            let out = run_2d(&law, p.euler2d_field(run.n, ny)?, &p.bcs_2d()?, &run.opts, run.t_end, &run.snapshots)?;
            let mut files = vec![Artifact::field2d(
                format!("{stem}_final.dat"),
                &Field2dData::from_field(&out.final_field),
            )?];
            for snap in &out.snapshots {
                files.push(Artifact::field2d(
                    format!("{stem}_{}.dat", snapshot_tag(snap.t)),
                    &Field2dData::from_field(snap),
                )?);
            }
            let mut report = Vec::new();
            out.report.write_csv(&mut report)?;
            files.push(Artifact {
                name: format!("{stem}_report.csv"),
                contents: report,
            });
            Ok(files)
        }
        LawKind::Incompressible => {
            if !run.snapshots.is_empty() {
                log::warn!("snapshots are not supported for the shear layer; writing the final state only");
            }
            let mut params = p.shear_layer_params(run.opts.limiter)?;
            params.n = run.n;
            params.cfl = run.opts.cfl;
            params.t_end = run.t_end;
            let out = shear_layer_run(&params)?;
            let mut report = String::from("t,dt,max_div,mean_u,mean_v,cg_iterations\n");
            for s in &out.steps {
                let _ = writeln!(
                    report,
                    "{},{},{},{},{},{}",
                    fmt_num(s.t),
                    fmt_num(s.dt),
                    fmt_num(s.max_divergence),
                    fmt_num(s.mean_u),
                    fmt_num(s.mean_v),
                    s.cg_iterations
                );
            }
            let centerline = out.field.centerline_v();
            let line = Field1dData {
                t: out.field.t,
                x: centerline.iter().map(|c| c.0).collect(),
                rows: centerline.iter().map(|c| vec![c.1]).collect(),
            };
            Ok(vec![
                Artifact::field2d(format!("{stem}_final.dat"), &Field2dData::from_velocity(&out.field))?,
                Artifact::field1d(format!("{stem}_centerline.csv"), &line)?,
                Artifact {
                    name: format!("{stem}_report.csv"),
                    contents: report.into_bytes(),
                },
            ])
        }
    }
}

/// Solves a 1D problem and measures its L1 error against the exact
/// solution, when there is one.
pub fn solve_with_error(run: &ResolvedRun) -> Result<(Vec<Artifact>, Option<f64>), Error> {
    let stem = run.stem();
    match run.problem.law {
        LawKind::Advection => {
            let out = run_scalar(&advection_law(), run)?;
            let err = exact_l1(run, &Final1d::Scalar(out.final_field.clone()));
            Ok((artifacts_1d(&stem, &out)?, err))
        }
        LawKind::Burgers | LawKind::Euler1d => Ok((solve(run)?, None)),
        _ => Err(Error::Config("compare supports 1D problems".into())),
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub error: f64,
    pub local_order: Option<f64>,
}

pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub fit: ConvergenceFit,
    pub reference: &'static str,
}

fn check_resolutions(ns: &[usize]) -> Result<Vec<usize>, Error> {
    let distinct: BTreeSet<usize> = ns.iter().copied().collect();
    if ns.len() < 3 || distinct.len() != ns.len() {
        return Err(Error::Config(format!(
            "a convergence study needs at least 3 distinct resolutions, got {ns:?}"
        )));
    }
    Ok(distinct.into_iter().collect())
}

/// Runs every resolution in its own thread. Linear advection problems are
/// measured against the exact solution, others against the finest run.
pub fn convergence(base: &ResolvedRun, ns: &[usize]) -> Result<ConvergenceTable, Error> {
    let ns = check_resolutions(ns)?;
    let finals: Vec<Result<Final1d, Error>> = std::thread::scope(|s| {
        let handles: Vec<_> = ns
            .iter()
            .map(|&n| {
                let mut run = base.clone();
                run.n = n;
                s.spawn(move || run_1d_final(&run))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let finals: Vec<Final1d> = finals.into_iter().collect::<Result<_, _>>()?;
    let p = &base.problem;

    let (samples, reference): (Vec<(usize, f64)>, &'static str) = if p.law == LawKind::Advection {
        let breaks = exact_breaks(p, base.t_end);
        let mut samples = Vec::new();
        for (&n, f) in ns.iter().zip(&finals) {
            let Final1d::Scalar(f) = f else { unreachable!() };
            let e = l1_error_vs_exact(
                f,
                |x| State::<1>::new(p.scalar_exact(x, base.t_end).unwrap_or(f64::NAN)),
                &breaks,
            );
            samples.push((n, e[0]));
        }
        (samples, "exact")
    } else {
        let (last, rest) = finals.split_last().expect("at least 3 runs");
        let mut samples = Vec::new();
        for (&n, f) in ns.iter().zip(rest) {
            let e = match (f, last) {
                (Final1d::Scalar(c), Final1d::Scalar(r)) => l1_error_vs_fine(c, r)?[0],
                (Final1d::Euler(c), Final1d::Euler(r)) => l1_error_vs_fine(c, r)?[0],
                _ => unreachable!(),
            };
            samples.push((n, e));
        }
        (samples, "finest")
    };
    let fit = if samples.len() >= 3 {
        convergence_order(&samples)?
    } else {
        // two samples against the finest run: the local order is the fit
        match local_order(samples[0], samples[1]) {
            Some(o) => ConvergenceFit::Order(o),
            None => ConvergenceFit::ExactMatch,
        }
    };
    let rows = samples
        .iter()
        .enumerate()
        .map(|(i, &(n, error))| ConvergenceRow {
            n,
            error,
            local_order: if i == 0 { None } else { local_order(samples[i - 1], (n, error)) },
        })
        .collect();
    Ok(ConvergenceTable { rows, fit, reference })
}

/// Kinks of the exact advected profile at time `t`.
fn exact_breaks(p: &Problem, t: f64) -> Vec<f64> {
    let (a, b) = p.x_range;
    p.breaks()
        .into_iter()
        .map(|x| a + (x + t - a).rem_euclid(b - a))
        .collect()
}

pub fn convergence_csv(table: &ConvergenceTable) -> String {
    let mut s = String::from("n,error,local_order,flag\n");
    for r in &table.rows {
        let order = r.local_order.map_or_else(|| "nan".to_string(), fmt_num);
        let flag = if r.error == 0.0 { "exact-match" } else { "" };
        let _ = writeln!(s, "{},{},{},{}", r.n, fmt_num(r.error), order, flag);
    }
    s
}

/// L1 error against the exact solution, when the problem has one.
pub fn exact_l1(run: &ResolvedRun, f: &Final1d) -> Option<f64> {
    let p = &run.problem;
    match f {
        Final1d::Scalar(f) if p.law == LawKind::Advection => Some(
            l1_error_vs_exact(
                f,
                |x| State::<1>::new(p.scalar_exact(x, run.t_end).unwrap_or(f64::NAN)),
                &exact_breaks(p, run.t_end),
            )[0],
        ),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvdRow {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub max_ratio: f64,
    pub flagged: bool,
    pub tv: f64,
}

/// Steps the staggered scheme on a scalar problem, evaluating the
/// generalized CFL ratio before each step.
pub fn tvd_report(run: &ResolvedRun, bound: f64) -> Result<Vec<TvdRow>, Error> {
    match run.problem.law {
        LawKind::Advection => tvd_rows(&advection_law(), run, bound),
        LawKind::Burgers => tvd_rows(&burgers_law(), run, bound),
        _ => Err(Error::Config(format!(
            "tvd-report needs a scalar problem, '{}' is not one",
            run.problem.name
        ))),
    }
}

fn tvd_rows<L: ConservationLaw<1>>(law: &L, run: &ResolvedRun, bound: f64) -> Result<Vec<TvdRow>, Error> {
    if run.opts.scheme != SchemeKind::Nt {
        return Err(Error::Config("tvd-report applies to the nt scheme".into()));
    }
    let p = &run.problem;
    let bcs = p.bcs_1d()?;
    let cfg = run.opts.nt_config();
    let mut field = p.scalar_field(run.n)?;
    let mut rows = Vec::new();
    let mut t = 0.0;
    let mut step = 0;
    while t < run.t_end {
        apply_bc_1d(&mut field, &bcs, t)?;
        let mut dt = nt_stable_dt(&field, cfg.cfl, law)?.unwrap_or(run.t_end - t);
        let lands = dt >= run.t_end - t;
        if lands {
            dt = run.t_end - t;
        }
        let diag = nt_tvd_diagnostic(&field, &cfg, law, dt, bound)?;
        field = nt_step(&field, &cfg, law, dt)?;
        t = if lands { run.t_end } else { t + dt };
        step += 1;
        rows.push(TvdRow {
            step,
            t,
            dt,
            max_ratio: diag.max_ratio,
            flagged: diag.flagged,
            tv: total_variation_scalar(&field.component(0), bcs.is_periodic()),
        });
    }
    Ok(rows)
}

pub fn tvd_csv(rows: &[TvdRow], bound: f64) -> String {
    let mut s = String::from("step,t,dt,max_ratio,bound,flagged,tv\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.step,
            fmt_num(r.t),
            fmt_num(r.dt),
            fmt_num(r.max_ratio),
            fmt_num(bound),
            u8::from(r.flagged),
            fmt_num(r.tv)
        );
    }
    s
}

pub fn scheme_options_summary(opts: &SchemeOptions) -> String {
    format!(
        "scheme={} limiter={} cfl={} basis={:?}",
        opts.scheme.short_name(),
        opts.limiter.short_name(),
        opts.cfl,
        opts.basis
    )
}
