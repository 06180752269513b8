//! Acceptance suite: one line per criterion, `PASS` or `FAIL` with the reason. Runs
//! without the libtest harness so the lines always reach the output.

use std::process::Command;
use std::time::{Duration, Instant};

use clap::Parser;
use dqcalc::catalog::jacobi_broken;
use dqcalc::cech::{double_complex_check, ordered_cech, truncated_polynomial_algebra, diagonal_two_cover, FiniteCover};
use dqcalc::cli::{dirichlet_integral, linfty_catalog, linfty_sweep, run, Cli};
use dqcalc::coordbundle::{acyclicity_homotopy, mc_form, witt_relations, CoordRing1};
use dqcalc::cosimplicial::{ts_comparison, CosimplicialComplex, ProductKind};
use dqcalc::linalg::cohomology;
use dqcalc::linfty::from_dgla_unchecked;
use dqcalc::polyops::*;
use dqcalc::rational::{format_q, one, q, qf};
use serde_json::Value;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || n < k {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Runs a command through the library entry point and returns the report.
fn cli(args: &[&str]) -> Result<(Value, i32), String> {
    let parsed = Cli::try_parse_from(std::iter::once("dqcalc").chain(args.iter().copied())).map_err(|e| e.to_string())?;
    let out = run(&parsed);
    Ok((out.report, out.exit_code))
}

fn all_true(rows: &Value, key: &str) -> bool {
    rows.as_array().is_some_and(|a| a.iter().all(|r| r[key] == Value::Bool(true)))
}

/// Polyvector dimension in arity `n`, internal degree `w`: `C(d, n)` wedges times the
/// monomials of degree `w + n` in `d` variables.
fn tpoly_count(d: i64, n: i64, w: i64) -> i64 {
    if w + n < 0 {
        return 0;
    }
    binomial(d, n) * binomial(w + n + d - 1, d - 1)
}

fn hkr_tables() -> Check {
    let mut rows = 0;
    for d in 1..=2usize {
        let win = InternalDegreeWindow::for_arities(-2, 2, 2);
        let r = hkr_quasi_iso_report(d, &win, 0..=2).map_err(|e| e.to_string())?;
        ensure(r.passed, || format!("d = {d}: {:?}", r.rows.iter().find(|x| !x.ok)))?;
        for n in 0..=2 {
            for w in -2..=2 {
                let row = r.rows.iter().find(|x| x.arity == n && x.internal_degree == w).ok_or(format!("d = {d}: no row ({n}, {w})"))?;
                let expected = tpoly_count(d as i64, n as i64, w) as usize;
                ensure(row.cohomology_dim == expected && row.hkr_rank == expected, || format!("d = {d} arity {n} degree {w}: {row:?}, expected {expected}"))?;
                rows += 1;
            }
        }
    }
    Ok(format!("{rows} (d, arity, degree) cells match the polyvector count"))
}

fn linfty_suite() -> Check {
    let cat = linfty_catalog().map_err(|e| e.to_string())?;
    ensure(cat.len() >= 5, || format!("only {} algebras", cat.len()))?;
    ensure(cat.iter().any(|(n, _)| n.starts_with("tpoly")) && cat.iter().any(|(n, _)| n.starts_with("dpoly")), || "catalog lacks polyvector or polydifferential windows".into())?;
    let mut words = 0;
    for (name, g) in &cat {
        let (checked, bad) = linfty_sweep(&from_dgla_unchecked(g, 1), 4).map_err(|e| e.to_string())?;
        ensure(bad.is_empty(), || format!("{name}: {}", bad[0]))?;
        words += checked;
    }
    let g = from_dgla_unchecked(&jacobi_broken(), 1);
    let (_, low) = linfty_sweep(&g, 2).map_err(|e| e.to_string())?;
    let (_, upto3) = linfty_sweep(&g, 3).map_err(|e| e.to_string())?;
    ensure(low.is_empty(), || format!("Jacobi-broken algebra fails below arity 3: {}", low[0]))?;
    ensure(!upto3.is_empty(), || "Jacobi-broken algebra has zero arity-3 defect".into())?;
    Ok(format!("{} algebras, {words} words through arity 4; Jacobi-broken witness {}", cat.len(), upto3[0]))
}

fn twist_suite() -> Check {
    let (r, code) = cli(&["twist-check", "--count", "20", "--order", "3", "--arity-max", "3"])?;
    let triples = r["checks"]["triples"].as_array().cloned().unwrap_or_default();
    ensure(code == 0 && triples.len() >= 20, || format!("exit {code}, {} triples, witnesses {}", triples.len(), r["witnesses"]))?;
    for (i, t) in triples.iter().enumerate() {
        let rep = &t["report"];
        ensure(rep["arity_window"] == 3, || format!("triple {i}: window {}", rep["arity_window"]))?;
        for key in ["d_squared_zero", "omega_prime_mc", "morphism", "input_mc"] {
            ensure(rep[key] == true, || format!("triple {i}: {key} false"))?;
        }
        ensure(t["dgla_twist_squares_to_zero"] == true, || format!("triple {i}: d_ω² ≠ 0"))?;
    }
    Ok(format!("{} triples at ε-order 3, arity window 3", triples.len()))
}

fn gauge_suite() -> Check {
    let (r, code) = cli(&["gauge-check", "--count", "20", "--order", "3"])?;
    let pairs = &r["checks"]["pairs"];
    let n = pairs.as_array().map_or(0, Vec::len);
    ensure(code == 0 && n >= 20, || format!("exit {code}, {n} pairs, witnesses {}", r["witnesses"]))?;
    ensure(all_true(pairs, "image_is_maurer_cartan") && all_true(pairs, "zero_fixes_pi"), || "a gauge image failed".into())?;
    Ok(format!("{n} pairs stay Maurer-Cartan; u = 0 fixes π"))
}

fn descent_suite() -> Check {
    let (r, code) = cli(&["descend-check", "--arity-max", "3", "--order", "3"])?;
    ensure(code == 0, || format!("exit {code}: {}", r["witnesses"]))?;
    let actions = r["checks"]["actions"].as_array().cloned().unwrap_or_default();
    ensure(actions.len() >= 5, || format!("only {} actions", actions.len()))?;
    for a in &actions {
        ensure(a["lemma"] == true, || format!("{}: lemma fails", a["action"]))?;
        ensure(a["descent"]["lands_in_invariants"] == true, || format!("{}: restriction leaves the invariants", a["action"]))?;
    }
    let tw = &r["checks"]["twisted_compatibility"];
    ensure(tw["twist_changes_morphism"] == true, || "twisted triple is trivial".into())?;
    Ok(format!("lemma on {} actions through arity 3; twisted compatibility on {}", actions.len(), tw["action"]))
}

fn star_suite() -> Check {
    let mut triples = 0;
    for text in ["dx^dy", "x*dx^dy"] {
        let pi = parse_polyvector(2, text).map_err(|e| e.to_string())?;
        for [a, b, c] in monomial_triples(2, 4) {
            let r = star_associator(&pi, &monomial_poly(a), &monomial_poly(b), &monomial_poly(c), 2).map_err(|e| e.to_string())?;
            ensure(r.iter().all(|p| p.is_empty()), || format!("{text}: associator nonzero mod ε²"))?;
            triples += 1;
        }
    }
    // x∂y∧∂z + y∂x∧∂y is not Poisson. Brute force: ½[π,π](f,g,h) is minus the Jacobiator of {f,g} = π(f,g).
    let pi = parse_polyvector(3, "x*dy^dz + y*dx^dy").map_err(|e| e.to_string())?;
    let obstruction = second_order_obstruction(&pi).map_err(|e| e.to_string())?;
    ensure(!obstruction.is_zero(), || "obstruction vanishes".into())?;
    let pb = |a: &Poly, b: &Poly| pi.eval(&[a.clone(), b.clone()]);
    let vars: Vec<Poly> = (0..3).map(|i| monomial_poly((0..3).map(|j| u32::from(i == j)).collect())).collect();
    for f in &vars {
        for g in &vars {
            for h in &vars {
                let mut jac = pb(f, &pb(g, h));
                poly_add_scaled(&mut jac, &one(), &pb(g, &pb(h, f)));
                poly_add_scaled(&mut jac, &one(), &pb(h, &pb(f, g)));
                let mut brute = Poly::new();
                poly_add_scaled(&mut brute, &q(-1), &jac);
                let got = obstruction.eval(&[f.clone(), g.clone(), h.clone()]);
                ensure(got == brute, || format!("obstruction {} ≠ −Jacobiator {}", format_poly(&got), format_poly(&brute)))?;
            }
        }
    }
    let (x, y) = (parse_poly(2, "x").unwrap(), parse_poly(2, "y").unwrap());
    let s = first_order_star(&parse_polyvector(2, "dx^dy").unwrap(), &x, &y, 2).map_err(|e| e.to_string())?;
    let expected = [parse_poly(2, "x*y").unwrap(), parse_poly(2, "1/2").unwrap()];
    ensure(s[..] == expected[..], || format!("x⋆y = {:?}", s.iter().map(format_poly).collect::<Vec<_>>()))?;
    Ok(format!("{triples} triples associative mod ε²; non-Poisson obstruction {}; x⋆y = xy + ε/2", obstruction.describe()))
}

fn thom_sullivan() -> Check {
    // Constant input Q[x]/(x²): H(A), H(N^TS) and H(N) all equal A in degree 0.
    let (cx, _, _) = truncated_polynomial_algebra(2);
    let constant = CosimplicialComplex::constant(cx.clone(), 2, None).map_err(|e| e.to_string())?;
    let c = ts_comparison(&constant, 2, 0..=1).map_err(|e| e.to_string())?.report;
    ensure(c.is_quasi_iso, || format!("constant input: {:?}", c.table))?;
    for row in &c.table {
        let ha = cohomology(&cx, row.degree).map_err(|e| e.to_string())?.dimension;
        ensure(row.source_dim == ha && row.target_dim == ha, || format!("constant input degree {}: {row:?}, H(A) = {ha}", row.degree))?;
    }
    let cs = ordered_cech(&diagonal_two_cover(), 3).map_err(|e| e.to_string())?;
    let r = ts_comparison(&cs, 3, 0..=2).map_err(|e| e.to_string())?.report;
    ensure(r.is_quasi_iso && r.table.len() == 3, || format!("2-cover: {:?}", r.table))?;
    let (integral, dirichlet) = dirichlet_integral().map_err(|e| e.to_string())?;
    ensure(integral == qf(1, 24) && dirichlet == qf(1, 24), || format!("∫ t1 t2 dt1 dt2 = {}", format_q(&integral)))?;
    let dims: Vec<String> = r.table.iter().map(|x| format!("{}", x.source_dim)).collect();
    Ok(format!("constant input identity; 2-cover H = [{}] in degrees 0..2; integral {}", dims.join(", "), format_q(&integral)))
}

fn double_complex() -> Check {
    let start = Instant::now();
    for n in 1..=3 {
        let (cx, t, u) = truncated_polynomial_algebra(1);
        let cover = FiniteCover::constant(n, cx, Some((ProductKind::Commutative, t, Some(u)))).map_err(|e| e.to_string())?;
        let r = double_complex_check(&cover, 2).map_err(|e| e.to_string())?;
        ensure(r.passed, || format!("n = {n}: {:?}", r.rows))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("rows exact for n = 1, 2, 3 in {:.1}s", took.as_secs_f64()))
}

fn coordinate_bundle() -> Check {
    let w = witt_relations(&CoordRing1::new(14, 4).map_err(|e| e.to_string())?, 6, 12).map_err(|e| e.to_string())?;
    ensure(w.passed(), || format!("Witt: {:?}", w.failures))?;
    let mc = mc_form(&CoordRing1::new(9, 9).map_err(|e| e.to_string())?, 8).and_then(|f| f.verify()).map_err(|e| e.to_string())?;
    ensure(mc.defining_equation && mc.mc_equation && mc.contraction_identity, || format!("MC form: {:?}", mc.failures))?;
    let h = acyclicity_homotopy(4, 4, 1).and_then(|h| h.verify()).map_err(|e| e.to_string())?;
    ensure(h.passed && h.failures.is_empty(), || format!("homotopy: {:?}", h.failures))?;
    Ok(format!("{} Witt relations through x12; MC form to t^8; homotopy identity on generator cap 4", w.checked))
}

const DETERMINISM_RUNS: &[&[&str]] = &[
    &["hkr-check", "--dim", "2", "--arity-max", "2", "--internal-degree", "-2..2"],
    &["mc-check", "--order", "3", "--count", "6"],
    &["gauge-check", "--order", "3", "--count", "6"],
    &["twist-check", "--order", "3", "--count", "3", "--arity-max", "2"],
    &["linfty-verify", "--arity-max", "3"],
    &["descend-check", "--arity-max", "2", "--order", "3"],
    &["ts-normalize", "--weight-cap", "3", "--n-max", "3"],
    &["cech-check", "--cover-size", "3", "--toy", "2", "--n-max", "3"],
    &["double-complex-check", "--cover-size", "2", "--toy", "1", "--degree-cap", "2"],
    &["coordbundle-verify", "--gen-cap", "8", "--jet-cap", "4", "--laurent-cap", "8", "--witt-index", "3", "--homotopy-gen-cap", "3", "--weight-cap", "3"],
    &["star-product", "--dim", "2", "--pi", "dx^dy", "--order", "2", "--a", "x", "--b", "y"],
];

fn determinism() -> Check {
    let exe = env!("CARGO_BIN_EXE_dqcalc");
    let dir = std::env::temp_dir().join(format!("dqcalc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    for args in DETERMINISM_RUNS {
        let mut outputs = vec![];
        for k in 0..2 {
            let file = dir.join(format!("{}-{k}.json", args[0]));
            let out = Command::new(exe).args(["--seed", "7"]).args(*args).arg("--json-out").arg(&file).output().map_err(|e| e.to_string())?;
            let written = std::fs::read(&file).map_err(|e| e.to_string())?;
            ensure(written == out.stdout, || format!("{}: --json-out differs from stdout", args[0]))?;
            ensure(out.status.code() == Some(0), || format!("{}: exit {:?}", args[0], out.status.code()))?;
            outputs.push(out.stdout);
        }
        ensure(outputs[0] == outputs[1], || format!("{}: two runs differ", args[0]))?;
    }
    std::fs::remove_dir_all(&dir).ok();
    Ok(format!("{} commands byte-identical across runs", DETERMINISM_RUNS.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("HKR tables", hkr_tables),
        ("L∞ suite", linfty_suite),
        ("twist", twist_suite),
        ("gauge", gauge_suite),
        ("descent", descent_suite),
        ("star product", star_suite),
        ("Thom–Sullivan", thom_sullivan),
        ("double complex", double_complex),
        ("coordinate bundle", coordinate_bundle),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
