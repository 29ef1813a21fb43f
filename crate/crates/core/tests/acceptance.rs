//! Acceptance gate. Prints one line per criterion and exits nonzero if any
//! criterion fails or exceeds its time limit.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use degex::charts::{act, sample_chart_point, verify_product_identity, TorusElement};
use degex::cli::run;
use degex::exact::rat;
use degex::expansion::{check_gluing, check_torus_compatibility, default_quartic_assignment, subdivide};
use degex::hilb::{build_pi, enumerate_cases, CP2_BETTI};
use degex::projectivity::{builtin_certificates, check_edge_agreement, check_strict_convexity, AffinePiece, ConvexityFailure};
use degex::surface::{count_3_labelings_exhaustive, cube_model, quartic_model};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestRunner};
use serde_json::{json, Value};

type Outcome = Result<(), String>;

/// Name, check, time limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(ok: bool, what: impl Into<String>) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn cli(args: &[&str]) -> (i32, Value) {
    let (code, out) = run(std::iter::once("degex").chain(args.iter().copied()));
    (code, serde_json::from_str(&out).unwrap_or(Value::Null))
}

fn c1_quartic_f_vector() -> Outcome {
    let (code, r) = cli(&["hilb", "count", "quartic"]);
    ensure(code == 0, format!("exit {code}"))?;
    let res = &r["results"];
    let fv = json!([10, 45, 110, 120, 48]);
    ensure(res["case_f_vector"] == fv, format!("cases {}", res["case_f_vector"]))?;
    ensure(res["closure_f_vector"] == fv, format!("closure {}", res["closure_f_vector"]))?;
    let expect: [&[usize]; 4] = [&[24, 6, 12, 3], &[10, 16, 48, 30, 6], &[48, 72], &[12, 36]];
    for (k, counts) in expect.iter().enumerate() {
        let got = enumerate_cases(&quartic_model(), k + 1).map_err(|e| e.to_string())?.counts();
        ensure(got == counts.to_vec(), format!("dim {}: {got:?}", k + 1))?;
    }
    Ok(())
}

fn c2_quartic_topology() -> Outcome {
    let pi = build_pi(&quartic_model(), 2).map_err(|e| e.to_string())?;
    pi.complex.validate().map_err(|e| e.to_string())?;
    ensure(pi.complex.len() == 333, format!("{} cells", pi.complex.len()))?;
    ensure(pi.complex.euler_characteristic() == 3, "euler")?;
    let h = pi.complex.homology();
    ensure(h.betti == CP2_BETTI.to_vec(), format!("betti {:?}", h.betti))?;
    ensure(h.h1_torsion.is_empty(), format!("torsion {:?}", h.h1_torsion))
}

fn c3_cube_report() -> Outcome {
    let (code, r) = cli(&["hilb", "count", "cube"]);
    ensure(code == 3, format!("exit {code}"))?;
    let p = &r["results"]["published_totals"];
    ensure(p["reference_f_vector"] == json!([21, 120, 420, 480, 192]), "reference totals")?;
    ensure(p["reference_euler"] == json!(33), "reference euler")?;
    ensure(p["reference_consistent_with_cp2"] == json!(false), "flag")?;
    ensure(p["computed_f_vector"].is_array() && p["computed_f_vector"] != p["reference_f_vector"], "side by side")?;
    ensure(r["status"] == json!("flagged"), "status")
}

fn c4_single_point() -> Outcome {
    let (a, ra) = cli(&["hilb", "count", "quartic", "--m", "1"]);
    let (b, rb) = cli(&["hilb", "count", "cube", "--m", "1"]);
    ensure(a == 0 && ra["results"]["f_vector"] == json!([4, 6, 4]), format!("quartic {a} {}", ra["results"]["f_vector"]))?;
    ensure(b == 0 && rb["results"]["f_vector"] == json!([6, 12, 8]), format!("cube {b} {}", rb["results"]["f_vector"]))
}

fn c5_gluing() -> Outcome {
    let (a, _) = cli(&["expand", "quartic", "--n", "1", "--assignment", "default"]);
    ensure(a == 0, "default quartic")?;
    let (b, rb) = cli(&["expand", "quartic", "--n", "1", "--assignment", "nongluing"]);
    let edges: Vec<&str> = rb["results"]["gluing"]["failures"].as_array().into_iter().flatten().filter_map(|f| f["edge"].as_str()).collect();
    ensure(b == 1 && edges.contains(&"Y2Y3"), format!("nongluing {b} {edges:?}"))?;
    let (c, _) = cli(&["expand", "cube", "--n", "1", "--assignment", "labeling"]);
    ensure(c == 0, "labeled cube")
}

fn c6_labeling() -> Outcome {
    let (a, ra) = cli(&["label3", "cube"]);
    ensure(a == 0 && ra["results"]["verified_triangles"] == json!(8), "cube labeling")?;
    let (b, rb) = cli(&["label3", "quartic"]);
    ensure(b == 1 && rb["results"]["labeling"].is_null(), "quartic labeling")?;
    ensure(count_3_labelings_exhaustive(&quartic_model().sphere) == (81, 0), "exhaustive search")
}

fn c7_torus() -> Outcome {
    for n in ["1", "2"] {
        let (a, _) = cli(&["expand", "quartic", "--n", n]);
        let (b, _) = cli(&["expand", "cube", "--n", n, "--assignment", "labeling"]);
        ensure(a == 0 && b == 0, format!("n={n}"))?;
    }
    let m = quartic_model();
    let e = subdivide(&m, &default_quartic_assignment(&m).flipped(0), 1, None).map_err(|e| e.to_string())?;
    let r = check_torus_compatibility(&e);
    ensure(!r.compatible && !r.conflicts[0].cell.is_empty(), "flipped corner not detected")?;
    ensure(!check_gluing(&e).failures.is_empty(), "flipped corner glues")
}

fn c8_projectivity() -> Outcome {
    for tau in [rat(1, 10), rat(1, 4), rat(1, 2), rat(3, 4), rat(9, 10)] {
        for c in builtin_certificates() {
            let r = check_strict_convexity(&c, &tau).map_err(|e| e.to_string())?;
            ensure(r.is_ok(), format!("{} at {tau}: {r:?}", c.face_label()))?;
        }
        let edges = check_edge_agreement(&builtin_certificates(), &tau).map_err(|e| e.to_string())?;
        ensure(edges.len() == 6, "six edges")?;
        ensure(edges.iter().any(|e| e.edge == "Y2Y3" && e.equal), "Y2Y3")?;
    }
    let mut dup = builtin_certificates().remove(0);
    dup.pieces = vec![AffinePiece::new(1, 0, 0, 0), AffinePiece::new(1, 0, 0, 0)];
    let r = check_strict_convexity(&dup, &rat(1, 2)).map_err(|e| e.to_string())?;
    ensure(matches!(r, Err(ConvexityFailure::DistinctPiecesViolated { .. })), "duplicate pieces")?;
    let mut shifted = builtin_certificates().remove(0);
    shifted.pieces[2].b -= degex::exact::int(10);
    let r = check_strict_convexity(&shifted, &rat(1, 2)).map_err(|e| e.to_string())?;
    ensure(matches!(r, Err(ConvexityFailure::RegionMismatch { .. })), "shifted piece")
}

fn c9_charts() -> Outcome {
    for n in 1..=3usize {
        let (code, r) = cli(&["charts", "verify", "--n", &n.to_string(), "--samples", "1000", "--seed", "2024"]);
        ensure(code == 0 && r["results"]["pass"] == json!(true), format!("n={n}: {}", r["results"]["failures"]))?;
        for i in 0..100u64 {
            let p = sample_chart_point(n, 10_000 + i).map_err(|e| e.to_string())?;
            let q = act(&TorusElement::random(n, 20_000 + i), &p).map_err(|e| e.to_string())?;
            ensure(q.satisfies_equations() && verify_product_identity(&q), format!("torus n={n} i={i}"))?;
        }
    }
    Ok(())
}

fn c10_properties() -> Outcome {
    use degex::exact::{rank_over_rationals, smith_normal_form, IntMatrix};
    let config = Config { cases: 64, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new(config.clone());
    runner
        .run(&proptest::collection::vec(-4i64..=4, 12), |v| {
            let m = IntMatrix::from_rows(&[v[0..4].to_vec(), v[4..8].to_vec(), v[8..12].to_vec()]);
            prop_assert_eq!(rank_over_rationals(&m), smith_normal_form(&m).len());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let mut runner = TestRunner::new(config);
    runner
        .run(&(1usize..=4, 1i64..40), |(n, shift)| {
            let m = quartic_model();
            let params: Vec<_> = (1..=n as i64).map(|k| rat(k * 40 + shift, 40 * (n as i64 + 1) + 40)).collect();
            let e = subdivide(&m, &default_quartic_assignment(&m), n, Some(&params)).unwrap();
            prop_assert!(e.cells.validate().is_ok());
            let back = degex::delta::DeltaComplex::from_json(&e.cells.to_json()).unwrap();
            prop_assert_eq!(back.f_vector(), e.cells.f_vector());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let cube = cube_model();
    let pi = build_pi(&cube, 1).map_err(|e| e.to_string())?;
    ensure(pi.complex.validate().is_ok(), "cube m=1")
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 quartic f-vector by cases and closure", c1_quartic_f_vector, 60),
        ("2 quartic homology", c2_quartic_topology, 120),
        ("3 cube report flagged", c3_cube_report, 120),
        ("4 single-point sanity", c4_single_point, 30),
        ("5 gluing", c5_gluing, 15),
        ("6 3-labeling", c6_labeling, 10),
        ("7 torus compatibility", c7_torus, 30),
        ("8 projectivity certificates", c8_projectivity, 5),
        ("9 chart identities", c9_charts, 30),
        ("10 property harness", c10_properties, 300),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(limit);
        match (&outcome, over) {
            (Ok(()), false) => println!("criterion {name}: PASS ({:.2}s, limit {limit}s)", elapsed.as_secs_f64()),
            (Ok(()), true) => println!("criterion {name}: FAIL (time {:.2}s over limit {limit}s)", elapsed.as_secs_f64()),
            (Err(why), _) => println!("criterion {name}: FAIL ({why})"),
        }
        if outcome.is_err() || over {
            failed += 1;
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
