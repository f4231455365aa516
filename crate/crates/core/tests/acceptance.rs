//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion,
//! followed by the individual measurements behind it, and exits nonzero if
//! any criterion fails.

use std::time::{Duration, Instant};

use polywg::analysis::{
    convergence_study, discretize, robustness_diagnostics, run_case, run_property_suite, CaseName, Check,
    ManufacturedCase, MeshFamily, PropsConfig, RunOptions,
};
use polywg::assembly::Scheme;
use polywg::mesh::hex_columns_per_unit;

struct Outcome {
    checks: Vec<Check>,
    limit: Option<Duration>,
}

impl Outcome {
    fn new(limit: Option<u64>) -> Self {
        Self {
            checks: Vec::new(),
            limit: limit.map(Duration::from_secs),
        }
    }
}

fn rate_checks(out: &mut Outcome, label: &str, rates: [f64; 3], targets: [f64; 3], tols: [f64; 3]) {
    let names = ["energy", "velocity L2", "pressure L2"];
    for i in 0..3 {
        out.checks.push(Check::within(
            format!("{label} terminal {} rate", names[i]),
            rates[i],
            targets[i],
            tols[i],
        ));
    }
}

fn criterion_1() -> Outcome {
    let mut out = Outcome::new(Some(120));
    let tables = convergence_study(
        CaseName::Poly61,
        MeshFamily::Rect,
        0,
        1.0,
        &[4, 8, 16, 32, 64],
        &[Scheme::Robust],
        RunOptions::default(),
    )
    .expect("poly61 study");
    let t = &tables[0];
    rate_checks(&mut out, "robust", t.terminal().unwrap(), [1.0, 2.0, 2.0], [0.15, 0.15, 0.3]);
    let e = t.last().unwrap().errors;
    for (name, got, reference) in [
        ("energy", e.energy, 1.78e-2),
        ("velocity L2", e.velocity_l2, 6.80e-5),
        ("pressure L2", e.pressure_l2, 4.09e-4),
    ] {
        out.checks.push(Check::within(
            format!("{name} error at 1/h=64 over the published value"),
            got / reference,
            1.25,
            0.75,
        ));
    }
    out
}

fn criterion_2() -> Outcome {
    let mut out = Outcome::new(None);
    for level in [4, 8, 16, 32, 64] {
        let r = robustness_diagnostics(CaseName::Poly61, MeshFamily::Rect, level, 0, &[1.0, 1e-2, 1e-4], RunOptions::default())
            .expect("robustness run");
        for mut c in r.checks {
            c.name = format!("1/h={level}: {}", c.name);
            out.checks.push(c);
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new(Some(30));
    let level = 3;
    let (disc, _) = discretize(MeshFamily::Hex, level, 0, RunOptions::default()).expect("hex mesh");
    let h = MeshFamily::Hex.nominal_h(level);
    let case = ManufacturedCase::new(CaseName::ZeroFlow, 1.0);
    out.checks.push(Check::within(
        "hexagon columns per unit length",
        hex_columns_per_unit(level) as f64,
        20.0,
        0.0,
    ));
    for (scheme, bound) in [(Scheme::Robust, 1e-10), (Scheme::Standard, 1e-4)] {
        let run = run_case(&disc, &case, scheme, level, h).expect("zero flow solve");
        let u = run.report.errors.velocity_l2;
        out.checks.push(match scheme {
            Scheme::Robust => Check::at_most("robust ||u_0||", u, bound),
            Scheme::Standard => Check::at_least("standard ||u_0||", u, bound),
        });
    }
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new(Some(300));
    for k in [1, 2] {
        let tables = convergence_study(
            CaseName::Trig,
            MeshFamily::deformed(0),
            k,
            1e-2,
            &[4, 8, 16, 32],
            &[Scheme::Robust],
            RunOptions::default(),
        )
        .expect("deformed study");
        let kf = k as f64;
        rate_checks(
            &mut out,
            &format!("k={k}"),
            tables[0].terminal().unwrap(),
            [kf + 1.0, kf + 2.0, kf + 1.0],
            [0.2; 3],
        );
    }
    out
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new(None);
    let tables = convergence_study(CaseName::LShape, MeshFamily::LShape, 2, 1e-2, &[1, 2, 3], &Scheme::ALL, RunOptions::default())
        .expect("L-shape study");
    for t in &tables {
        let [energy, _, pressure] = t.terminal().unwrap();
        let scheme = t.reports[0].scheme;
        out.checks.push(match scheme {
            Scheme::Robust => Check::at_least("robust energy rate", energy, 2.7),
            Scheme::Standard => Check::at_most("standard energy rate", energy, 2.3),
        });
        out.checks.push(match scheme {
            Scheme::Robust => Check::at_least("robust pressure rate", pressure, 2.6),
            Scheme::Standard => Check::at_most("standard pressure rate", pressure, 2.2),
        });
    }
    out
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new(None);
    let runs = [
        (MeshFamily::Rect, 8, 1),
        (MeshFamily::deformed(3), 8, 1),
        (MeshFamily::Hex, 2, 1),
        (MeshFamily::LShape, 1, 1),
        (MeshFamily::Hex, 1, 0),
        (MeshFamily::Hex, 1, 2),
    ];
    for (family, level, k) in runs {
        let tag = format!("{family} level {level} k={k}");
        let start = Instant::now();
        let report = run_property_suite(PropsConfig::new(family, level, k, 3)).expect("property suite");
        let secs = start.elapsed().as_secs_f64();
        out.checks.push(Check::at_most(format!("{tag}: wall seconds"), secs, 60.0));
        let failed = report.failures().count() as f64;
        out.checks.push(Check::at_most(
            format!("{tag}: failing invariants out of {}", report.checks.len()),
            failed,
            0.0,
        ));
        for c in report.failures() {
            eprintln!("    {tag}: {c}");
        }
        for s in &report.skipped {
            println!("    {tag}: skipped {s}");
        }
    }
    out
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 6] = [
        ("1 rect-mesh convergence, poly61, k=0, nu=1, robust", criterion_1),
        ("2 viscosity robustness, poly61, nu in {1, 1e-2, 1e-4}", criterion_2),
        ("3 zero flow on the 20-column hexagon mesh, k=0", criterion_3),
        ("4 high-order rates on deformed rectangles, nu=1e-2, k=1,2", criterion_4),
        ("5 low-regularity pressure on the L-shape, k=2, nu=1e-2", criterion_5),
        ("6 property suite on every mesh family", criterion_6),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let mut out = run();
        let elapsed = start.elapsed();
        if let Some(limit) = out.limit {
            out.checks
                .push(Check::at_most("wall seconds", elapsed.as_secs_f64(), limit.as_secs_f64()));
        }
        let pass = out.checks.iter().all(|c| c.pass);
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name} ({:.1} s)",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        for c in &out.checks {
            println!("    {c}");
        }
    }
    println!("acceptance: {} of 6 criteria passed", 6 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
