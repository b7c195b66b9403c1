//! Benchmark setup through the driver to files on disk and back.

use std::fs::File;
use std::io::{BufReader, BufWriter};

use cll_core::bench_suite::problem_by_name;
use cll_core::driver::{run_1d, run_2d, SchemeKind, SchemeOptions};
use cll_core::io::{read_field1d, read_field2d, write_field1d, write_field2d, Field1dData, Field2dData, RunConfig};
use cll_core::limiters::LimiterKind;
use cll_core::physics::{euler1d_law, euler2d_law};

#[test]
fn sod_run_survives_a_file_round_trip() {
    let p = problem_by_name("sod").unwrap();
    let law = euler1d_law(p.params());
    let opts = SchemeOptions::new(SchemeKind::Nt, LimiterKind::VanAlbada);
    let run = run_1d(&law, p.euler1d_field(200).unwrap(), &p.bcs_1d().unwrap(), &opts, 0.1, &[0.05]).unwrap();
    assert_eq!(run.snapshots.len(), 1);
    assert!(!run.final_field.staggered);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sod.csv");
    let data = Field1dData::from_field(&run.final_field);
    write_field1d(&data, BufWriter::new(File::create(&path).unwrap())).unwrap();
    let back = read_field1d(BufReader::new(File::open(&path).unwrap())).unwrap();
    assert_eq!(back, data);
    assert_eq!(back.k(), 3);
    let rho = back.column(0);
    assert!(rho.iter().all(|&r| (0.125 - 1e-9..=1.0 + 1e-9).contains(&r)));
}

#[test]
fn dmr_run_survives_a_file_round_trip() {
    let p = problem_by_name("dmr").unwrap();
    let law = euler2d_law(p.params());
    let opts = SchemeOptions::new(SchemeKind::Cu, LimiterKind::Minmod).with_cfl(p.cfl_for(SchemeKind::Cu));
    let run = run_2d(&law, p.euler2d_field(40, 10).unwrap(), &p.bcs_2d().unwrap(), &opts, 0.01, &[]).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dmr.dat");
    let data = Field2dData::from_field(&run.final_field);
    write_field2d(&data, BufWriter::new(File::create(&path).unwrap())).unwrap();
    let back = read_field2d(BufReader::new(File::open(&path).unwrap())).unwrap();
    assert_eq!(back, data);
    assert_eq!((back.nx, back.ny, back.blocks.len()), (40, 10, 4));
}

#[test]
fn resolved_runs_are_deterministic() {
    let mut cfg = RunConfig::default();
    for (k, v) in [("problem", "burgers"), ("scheme", "cu"), ("n", "80"), ("t_end", "0.6")] {
        cfg.set(k, v).unwrap();
    }
    let run = cfg.resolve().unwrap();
    let law = cll_core::physics::burgers_law();
    let go = || {
        run_1d(
            &law,
            run.problem.scalar_field(run.n).unwrap(),
            &run.problem.bcs_1d().unwrap(),
            &run.opts,
            run.t_end,
            &[],
        )
        .unwrap()
    };
    let (a, b) = (go(), go());
    assert_eq!(a.final_field.data, b.final_field.data);
    assert_eq!(a.report, b.report);
}
