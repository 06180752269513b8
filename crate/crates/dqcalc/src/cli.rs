//! Command-line driver: argument definitions and one pipeline per command. Each
//! pipeline returns a JSON report whose bytes depend only on the arguments; keys are
//! sorted and rationals are printed as `p/q`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::catalog::{jacobi_broken, standard_actions, standard_dglas};
use crate::cech::{diagonal_two_cover, double_complex_check, ordered_cech, truncated_polynomial_algebra, FiniteCover};
use crate::coordbundle::{acyclicity_homotopy, gl1_invariants, graded_poincare_pieces, mc_form, witt_relations, CoordRing1};
use crate::cosimplicial::{normalized_cochain, ts_comparison, CosimplicialComplex, Form, ProductKind};
use crate::dgla::{check_dgla_axioms, gauge_transform, mc_residual, random_gauge_parameter, random_mc, series_to_ext, twist_dgla, DGLieAlgebra, EpsSeries, MCElement};
use crate::error::{Error, Result};
use crate::linalg::cohomology;
use crate::linfty::*;
use crate::polyops::*;
use crate::rational::{factorial, format_q, qf};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Attempts per sample when a random Maurer-Cartan element hits an obstruction.
const MC_ATTEMPTS: usize = 16;

#[derive(Parser, Debug, Clone)]
#[command(name = "dqcalc", version, about = "Exact-arithmetic checks for DG-Lie, L∞, Hochschild and Čech computations")]
pub struct Cli {
    /// Seed for every randomized sweep.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub json_out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Hochschild cohomology of polydifferential operators against polyvectors.
    HkrCheck(HkrArgs),
    /// Maurer-Cartan residuals: a seeded sweep, or one element from `--input`.
    McCheck(McArgs),
    /// Gauge transforms of seeded Maurer-Cartan elements stay Maurer-Cartan.
    GaugeCheck(SweepArgs),
    /// Twisting of structure towers and morphisms by seeded Maurer-Cartan elements.
    TwistCheck(TwistArgs),
    /// L∞ defect of structure towers on every basis word.
    LinftyVerify(LinftyArgs),
    /// Contraction actions: coderivation identity, reduction, descent, twisted compatibility.
    DescendCheck(DescendArgs),
    /// Thom–Sullivan normalization against normalized cochains.
    TsNormalize(TsArgs),
    /// Ordered Čech cosimplicial object of a cover and its normalized cochains.
    CechCheck(CechArgs),
    /// Exactness of the rows of the Čech double complex of category cochains.
    DoubleComplexCheck(DoubleArgs),
    /// One-variable coordinate bundle: Witt relations, MC form, GL₁ invariants, homotopy.
    CoordbundleVerify(CoordArgs),
    /// First-order star product of a bivector, its associator and obstruction.
    StarProduct(StarArgs),
}

fn parse_window(s: &str) -> std::result::Result<(i64, i64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected LO..HI, got {s:?}"))?;
    let lo: i64 = a.trim().parse().map_err(|_| format!("bad lower bound in {s:?}"))?;
    let hi: i64 = b.trim().parse().map_err(|_| format!("bad upper bound in {s:?}"))?;
    if lo > hi {
        return Err(format!("empty window {s:?}"));
    }
    Ok((lo, hi))
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct HkrArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub dim: u64,
    #[arg(long, default_value_t = 2)]
    pub arity_max: usize,
    /// Internal degrees as `LO..HI`.
    #[arg(long, visible_alias = "internal-degree", default_value = "-2..2", allow_hyphen_values = true, value_parser = parse_window)]
    pub internal_degree_window: (i64, i64),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct McArgs {
    /// ε-order N of the coefficient ring `Q[ε]/ε^N`.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..=6))]
    pub order: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    /// JSON file `{dgla, order, mc}`; replaces the sweep.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..=6))]
    pub order: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TwistArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..=4))]
    pub order: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub arity_max: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LinftyArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=5))]
    pub arity_max: u64,
    /// Catalog algebras to check (repeatable); all of them by default.
    #[arg(long)]
    pub algebra: Vec<String>,
    /// JSON structure tower `{kind, arity_bound, basis, components}` or DG-Lie algebra
    /// `{basis, d, bracket}`; replaces the catalog.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DescendArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub arity_max: u64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..=4))]
    pub order: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TsArgs {
    /// Polynomial weight cap on simplex forms (`t` and `dt` both count 1).
    #[arg(long, default_value_t = 3)]
    pub weight_cap: u32,
    /// Highest cosimplicial level built.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub n_max: u64,
    /// JSON cover `{n, kind, values, restrictions}`; replaces the diagonal 2-cover.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CechArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub cover_size: u64,
    /// Every set carries `Q[x]/(x^k)` with identity restrictions.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub toy: u64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=5))]
    pub n_max: u64,
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DoubleArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub cover_size: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=3))]
    pub toy: u64,
    /// Highest Hochschild degree with a nonzero differential.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(0..=4))]
    pub degree_cap: u64,
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CoordArgs {
    /// Generators `x_0..x_M`; Witt relations are checked on `x_0..x_{M−2}`.
    #[arg(long, default_value_t = 14, value_parser = clap::value_parser!(u64).range(2..=24))]
    pub gen_cap: u64,
    /// Order in `t` of the Maurer-Cartan form.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=16))]
    pub jet_cap: u64,
    /// Exponents of `x_1` stay in `[−L, L]`.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(i32).range(1..=32))]
    pub laurent_cap: i32,
    /// Witt relations are checked for `i, j ≤` this index.
    #[arg(long, default_value_t = 6)]
    pub witt_index: usize,
    /// Weight cap of the truncated complex for the acyclicity homotopy.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=6))]
    pub weight_cap: u32,
    /// Generator cap of the acyclicity homotopy complex.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..=6))]
    pub homotopy_gen_cap: u64,
    /// Degree cap in the inert variable `x` of the homotopy complex.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(0..=3))]
    pub x_cap: u32,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StarArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=4))]
    pub dim: u64,
    /// Bivector such as `dx^dy` or `x*dx^dy`.
    #[arg(long, default_value = "dx^dy", allow_hyphen_values = true)]
    pub pi: String,
    /// ε-order N of `Q[ε]/ε^N` for the product.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=2))]
    pub order: u64,
    #[arg(long, default_value = "x", allow_hyphen_values = true)]
    pub a: String,
    #[arg(long, default_value = "y", allow_hyphen_values = true)]
    pub b: String,
    /// Associators are checked on monomial triples of total degree up to this.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(0..=6))]
    pub triple_degree: u32,
}

/// Verdicts of one pipeline: `checks` is command specific, `witnesses` explain failures.
#[derive(Clone, Debug, Default)]
pub struct Verdict {
    pub checks: Value,
    pub witnesses: Vec<String>,
    pub passed: bool,
}

/// Report and process exit status: 0 all checks pass, 1 a check failed (witnesses
/// given), 2 input could not be parsed, 3 a cap overflowed.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

impl Outcome {
    /// Pretty JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("reports are plain JSON");
        s.push('\n');
        s
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Invalid(_) => 2,
        Error::Overflow { .. } => 3,
        _ => 1,
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::HkrCheck(_) => "hkr-check",
            Command::McCheck(_) => "mc-check",
            Command::GaugeCheck(_) => "gauge-check",
            Command::TwistCheck(_) => "twist-check",
            Command::LinftyVerify(_) => "linfty-verify",
            Command::DescendCheck(_) => "descend-check",
            Command::TsNormalize(_) => "ts-normalize",
            Command::CechCheck(_) => "cech-check",
            Command::DoubleComplexCheck(_) => "double-complex-check",
            Command::CoordbundleVerify(_) => "coordbundle-verify",
            Command::StarProduct(_) => "star-product",
        }
    }

    fn caps(&self) -> Value {
        let v = match self {
            Command::HkrCheck(a) => serde_json::to_value(a),
            Command::McCheck(a) => serde_json::to_value(a),
            Command::GaugeCheck(a) => serde_json::to_value(a),
            Command::TwistCheck(a) => serde_json::to_value(a),
            Command::LinftyVerify(a) => serde_json::to_value(a),
            Command::DescendCheck(a) => serde_json::to_value(a),
            Command::TsNormalize(a) => serde_json::to_value(a),
            Command::CechCheck(a) => serde_json::to_value(a),
            Command::DoubleComplexCheck(a) => serde_json::to_value(a),
            Command::CoordbundleVerify(a) => serde_json::to_value(a),
            Command::StarProduct(a) => serde_json::to_value(a),
        };
        v.expect("arguments serialize")
    }

    pub fn execute(&self, seed: u64) -> Result<Verdict> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            Command::HkrCheck(a) => hkr_check(a),
            Command::McCheck(a) => mc_check(a, &mut rng),
            Command::GaugeCheck(a) => gauge_check(a, &mut rng),
            Command::TwistCheck(a) => twist_check(a, &mut rng),
            Command::LinftyVerify(a) => linfty_verify(a),
            Command::DescendCheck(a) => descend_check(a, &mut rng),
            Command::TsNormalize(a) => ts_normalize(a),
            Command::CechCheck(a) => cech_check(a),
            Command::DoubleComplexCheck(a) => double_check(a),
            Command::CoordbundleVerify(a) => coordbundle_verify(a),
            Command::StarProduct(a) => star_product(a),
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let mut report = json!({
        "command": cli.command.name(),
        "seed": cli.seed,
        "caps": cli.command.caps(),
    });
    let exit_code = match cli.command.execute(cli.seed) {
        Ok(v) => {
            report["passed"] = json!(v.passed);
            report["checks"] = v.checks;
            report["witnesses"] = json!(v.witnesses);
            if v.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            report["passed"] = json!(false);
            report["error"] = json!(e.to_string());
            if let Error::Overflow { cap, .. } = &e {
                report["overflowed_cap"] = json!(cap);
            }
            exit_code(&e)
        }
    };
    report["exit_code"] = json!(exit_code);
    Outcome { report, exit_code }
}

fn read_input(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Prefixes a parse error with where the input came from.
fn located(at: &str, e: Error) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{at}: {m}")),
        other => other,
    }
}

fn with_path(path: &Path, e: Error) -> Error {
    located(&path.display().to_string(), e)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn hkr_check(a: &HkrArgs) -> Result<Verdict> {
    let (lo, hi) = a.internal_degree_window;
    let win = InternalDegreeWindow::for_arities(lo, hi, a.arity_max);
    let r = hkr_quasi_iso_report(a.dim as usize, &win, 0..=a.arity_max)?;
    let witnesses = r
        .rows
        .iter()
        .filter(|row| !row.ok)
        .map(|row| {
            format!(
                "arity {} internal degree {}: dim H = {}, dim T_poly = {}, HKR rank {}, cocycles {}",
                row.arity, row.internal_degree, row.cohomology_dim, row.tpoly_dim, row.hkr_rank, row.hkr_cocycles
            )
        })
        .collect();
    Ok(Verdict { checks: to_value(&r), witnesses, passed: r.passed })
}

/// A Maurer-Cartan element on catalog entry `i mod len`, retrying on obstructions and
/// moving on to the next entry when every attempt is obstructed.
fn sample_mc(i: usize, order: usize, rng: &mut ChaCha8Rng) -> Option<(&'static str, DGLieAlgebra, MCElement)> {
    let cat = standard_dglas();
    (0..cat.len()).find_map(|k| {
        let (name, g) = cat[(i + k) % cat.len()].clone();
        (0..MC_ATTEMPTS).find_map(|_| random_mc(&g, order, rng)).map(|mc| (name, g, mc))
    })
}

fn mc_check(a: &McArgs, rng: &mut ChaCha8Rng) -> Result<Verdict> {
    if let Some(path) = &a.input {
        let j = crate::json::from_str(&read_input(path)?).map_err(|e| with_path(path, e))?;
        let (g, pi) = crate::json::mc_element(&j).map_err(|e| with_path(path, e))?;
        let axioms = check_dgla_axioms(&g);
        let res = mc_residual(&g, &pi);
        let mut witnesses: Vec<String> = axioms.failures.iter().map(|f| format!("{:?} fails on {:?}: {}", f.axiom, f.basis, f.defect)).collect();
        if !res.is_zero() {
            witnesses.push(format!("dπ + ½[π,π] = {}", res.describe(&g)));
        }
        let checks = json!({
            "dgla_axioms": axioms.passed(),
            "element": pi.series().describe(&g),
            "residual": res.describe(&g),
            "is_maurer_cartan": res.is_zero(),
        });
        return Ok(Verdict { checks, passed: witnesses.is_empty(), witnesses });
    }
    let order = a.order as usize;
    let mut samples = vec![];
    let mut witnesses = vec![];
    for i in 0..a.count as usize {
        let Some((name, g, mc)) = sample_mc(i, order, rng) else {
            witnesses.push(format!("sample {i}: no Maurer-Cartan element found"));
            continue;
        };
        let res = mc_residual(&g, &mc);
        if !res.is_zero() {
            witnesses.push(format!("sample {i} ({name}): residual {}", res.describe(&g)));
        }
        samples.push(json!({"algebra": name, "element": mc.series().describe(&g), "residual_zero": res.is_zero()}));
    }
    let zero_ok = standard_dglas().iter().all(|(_, g)| mc_residual(g, &MCElement::zero(order)).is_zero());
    let checks = json!({"samples": samples, "zero_is_maurer_cartan": zero_ok});
    Ok(Verdict { checks, passed: witnesses.is_empty() && zero_ok, witnesses })
}

fn gauge_check(a: &SweepArgs, rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let order = a.order as usize;
    let mut pairs = vec![];
    let mut witnesses = vec![];
    for i in 0..a.count as usize {
        let Some((name, g, pi)) = sample_mc(i, order, rng) else {
            witnesses.push(format!("pair {i}: no Maurer-Cartan element found"));
            continue;
        };
        let u = random_gauge_parameter(&g, order, rng);
        let moved = gauge_transform(&g, &u, &pi)?;
        let res = mc_residual(&g, &moved);
        let fixed = gauge_transform(&g, &EpsSeries::zero(order), &pi)? == pi;
        if !res.is_zero() {
            witnesses.push(format!("pair {i} ({name}): residual {}", res.describe(&g)));
        }
        if !fixed {
            witnesses.push(format!("pair {i} ({name}): u = 0 moves π"));
        }
        pairs.push(json!({
            "algebra": name,
            "pi": pi.series().describe(&g),
            "u": u.describe(&g),
            "image": moved.series().describe(&g),
            "image_is_maurer_cartan": res.is_zero(),
            "zero_fixes_pi": fixed,
        }));
    }
    Ok(Verdict { checks: json!({"pairs": pairs}), passed: witnesses.is_empty(), witnesses })
}

fn twist_check(a: &TwistArgs, rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let (order, arity) = (a.order as usize, a.arity_max as usize);
    let mut triples = vec![];
    let mut witnesses = vec![];
    for i in 0..a.count as usize {
        let Some((name, g, mc)) = sample_mc(i, order, rng) else {
            witnesses.push(format!("triple {i}: no Maurer-Cartan element found"));
            continue;
        };
        let qg = from_dgla(&g)?;
        let eta = random_eta(&qg.source, rng);
        let psi = exp_automorphism(&qg, &eta, arity + order - 1)?;
        let (qe, pe) = (extend_tower(&qg, order), extend_tower(&psi, order));
        let omega = series_to_ext(&mc.series());
        let r = twist(&qe, &qe, &pe, &omega, arity)?;
        let rep = verify_twist(&qe, &qe, &r, arity)?;
        let dgla_twist = twist_dgla(&g, &mc).is_ok();
        witnesses.extend(rep.witnesses.iter().map(|w| format!("triple {i} ({name}): {w}")));
        if !dgla_twist {
            witnesses.push(format!("triple {i} ({name}): d_ω² ≠ 0 on the DG-Lie side"));
        }
        triples.push(json!({
            "algebra": name,
            "omega": qe.source.describe(&omega),
            "omega_prime": qe.source.describe(&r.omega_prime),
            "dgla_twist_squares_to_zero": dgla_twist,
            "report": to_value(&rep),
        }));
    }
    Ok(Verdict { checks: json!({"triples": triples}), passed: witnesses.is_empty(), witnesses })
}

/// Catalog of DG-Lie algebras for `linfty-verify`, including polyvector and
/// polydifferential windows; `jacobi_broken` is only available by name.
pub fn linfty_catalog() -> Result<Vec<(String, DGLieAlgebra)>> {
    let mut out: Vec<(String, DGLieAlgebra)> = standard_dglas().into_iter().map(|(n, g)| (n.to_string(), g)).collect();
    out.push(("tpoly_affine_d1".into(), tpoly_affine(1)?.algebra));
    out.push(("tpoly_graded_d1_k1".into(), tpoly_graded(1, 1)?.algebra));
    out.push(("dpoly_constant_d1".into(), dpoly_constant(1, 2, 1)?.algebra));
    Ok(out)
}

/// Zero-defect check on every basis word of length `≤ arity`; returns the number of
/// words checked and the nonzero defects.
pub fn linfty_sweep(t: &TaylorTower, arity: usize) -> Result<(usize, Vec<String>)> {
    let mut checked = 0;
    let mut bad = vec![];
    for n in 1..=arity {
        for w in words_of_length(&t.source, n, false) {
            checked += 1;
            let d = linfty_defect(t, n, &w)?;
            if !d.is_empty() {
                bad.push(format!("arity {n} on {}: {}", t.source.describe_word(&w), t.source.describe(&d)));
            }
        }
    }
    Ok((checked, bad))
}

/// A structure tower (`kind` present) or a DG-Lie algebra.
fn load_linfty_input(path: &PathBuf) -> Result<TaylorTower> {
    let text = read_input(path)?;
    let value: Value = crate::json::from_str(&text).map_err(|e| with_path(path, e))?;
    let parse = |e: serde_json::Error| with_path(path, Error::Parse(e.to_string()));
    if value.get("kind").is_some() {
        let j = serde_json::from_value(value).map_err(parse)?;
        crate::json::tower(&j).map_err(|e| with_path(path, e))
    } else {
        let j = serde_json::from_value(value).map_err(parse)?;
        Ok(from_dgla_unchecked(&crate::json::dgla(&j).map_err(|e| with_path(path, e))?, 1))
    }
}

fn linfty_verify(a: &LinftyArgs) -> Result<Verdict> {
    let towers = if let Some(path) = &a.input {
        vec![(path.display().to_string(), load_linfty_input(path)?)]
    } else {
        let cat = linfty_catalog()?;
        let chosen = if a.algebra.is_empty() {
            cat
        } else {
            a.algebra
                .iter()
                .map(|name| match name.as_str() {
                    "jacobi_broken" => Ok((name.clone(), jacobi_broken())),
                    _ => cat.iter().find(|(n, _)| n == name).cloned().ok_or_else(|| {
                        let known: Vec<&str> = cat.iter().map(|(n, _)| n.as_str()).collect();
                        Error::Invalid(format!("unknown algebra {name:?}; known: {}, jacobi_broken", known.join(", ")))
                    }),
                })
                .collect::<Result<_>>()?
        };
        chosen.into_iter().map(|(n, g)| (n, from_dgla_unchecked(&g, 1))).collect()
    };
    let mut rows = vec![];
    let mut witnesses = vec![];
    for (name, t) in &towers {
        let (checked, bad) = linfty_sweep(t, a.arity_max as usize)?;
        if let Some(first) = bad.first() {
            witnesses.push(format!("{name}: {first}"));
        }
        rows.push(json!({"algebra": name, "dim": t.source.dim(), "words_checked": checked, "nonzero_defects": bad.len()}));
    }
    Ok(Verdict { checks: json!({"algebras": rows}), passed: witnesses.is_empty(), witnesses })
}

fn descend_check(a: &DescendArgs, rng: &mut ChaCha8Rng) -> Result<Verdict> {
    let (arity, order) = (a.arity_max as usize, a.order as usize);
    let mut rows = vec![];
    let mut witnesses = vec![];
    let actions = standard_actions();
    for (name, act) in &actions {
        let q_t = from_dgla(&act.algebra)?;
        let mut lemma = true;
        for v in act.names() {
            for n in 1..=arity {
                for w in words_of_length(&q_t.source, n, true) {
                    let d = lie_coderivation_identity(&q_t, act, v, n, &w)?;
                    if !d.is_empty() {
                        lemma = false;
                        witnesses.push(format!("{name}: L̃_{v} ≠ [Q, ĩ_{v}] on {}", q_t.source.describe_word(&w)));
                    }
                }
            }
        }
        let red = reduce_by_action(act)?;
        let axioms = reduction_axioms_hold(&red);
        if !axioms {
            witnesses.push(format!("{name}: the reduction is not a DG-Lie algebra"));
        }
        let eta = random_equivariant_eta(&q_t.source, act, rng)?;
        let psi = exp_automorphism(&q_t, &eta, arity)?;
        let desc = descend_morphism(&psi, act, act, arity)?;
        witnesses.extend(desc.report.witnesses.iter().map(|w| format!("{name}: {w}")));
        rows.push(json!({
            "action": name,
            "lemma": lemma,
            "reduction_dim": red.algebra.dim(),
            "reduction_is_dgla": axioms,
            "morphism_arity": psi.max_nonzero_arity(),
            "descent": to_value(&desc.report),
        }));
        if !desc.report.passed() && desc.report.witnesses.is_empty() {
            witnesses.push(format!("{name}: descent failed"));
        }
    }
    let (name, act) = &actions[0];
    let red = reduce_by_action(act)?;
    let q_t = from_dgla(&act.algebra)?;
    let mc = (0..MC_ATTEMPTS)
        .filter_map(|_| random_mc(&red.algebra, order, rng))
        .find(|m| !m.series().is_zero())
        .ok_or_else(|| Error::Hypothesis(format!("{name}: no nonzero Maurer-Cartan element in the reduction")))?;
    let omega = series_to_ext(&mc.series().map(|v| red.embedding.apply(v)));
    let eta = random_equivariant_eta(&q_t.source, act, rng)?;
    let psi = exp_automorphism(&q_t, &eta, arity + order - 1)?;
    let ext = act.extend(order);
    let (qe, pe) = (extend_tower(&q_t, order), extend_tower(&psi, order));
    let rep = twisted_compatibility(&pe, &qe, &qe, &ext, &ext, &omega, arity)?;
    let r = twist(&qe, &qe, &pe, &omega, arity)?;
    let nontrivial = words_of_length(&qe.source, 1, true).iter().any(|w| r.psi.eval(w) != pe.eval(w));
    witnesses.extend(rep.witnesses.iter().map(|w| format!("twisted {name}: {w}")));
    if !nontrivial {
        witnesses.push(format!("twisted {name}: ψ_ω equals ψ, the triple is trivial"));
    }
    let twisted = json!({
        "action": name,
        "omega": qe.source.describe(&omega),
        "morphism_arity": psi.max_nonzero_arity(),
        "report": to_value(&rep),
        "twist_changes_morphism": nontrivial,
    });
    let passed = witnesses.is_empty() && rep.passed();
    Ok(Verdict { checks: json!({"actions": rows, "twisted_compatibility": twisted}), witnesses, passed })
}

fn load_cover(path: &PathBuf) -> Result<FiniteCover> {
    let j = crate::json::from_str(&read_input(path)?).map_err(|e| with_path(path, e))?;
    crate::json::cover(&j).map_err(|e| with_path(path, e))
}

fn toy_cover(n: u64, k: u64) -> Result<FiniteCover> {
    let (cx, t, u) = truncated_polynomial_algebra(k as usize);
    FiniteCover::constant(n as usize, cx, Some((ProductKind::Commutative, t, Some(u))))
}

/// `∫_{Δ[2]} t1 t2 dt1 dt2` and the Dirichlet value `1!·1!/4!`.
pub fn dirichlet_integral() -> Result<(crate::Q, crate::Q)> {
    let f = Form::coordinate(2, 1)
        .wedge(&Form::coordinate(2, 2))
        .wedge(&Form::coordinate_differential(2, 1))
        .wedge(&Form::coordinate_differential(2, 2));
    Ok((f.integrate()?, factorial(1) * factorial(1) / factorial(4)))
}

fn ts_normalize(a: &TsArgs) -> Result<Verdict> {
    let mut witnesses = vec![];
    // Constant input A = Q: A ≅ N(A)^TS ≅ N(A).
    let (field, _, _) = truncated_polynomial_algebra(1);
    let constant = CosimplicialComplex::constant(field, 2, None)?;
    let c = ts_comparison(&constant, 2, 0..=1)?.report;
    let expected: Vec<usize> = vec![1, 0];
    let constant_ok = c.is_quasi_iso
        && c.table.iter().map(|r| r.source_dim).collect::<Vec<_>>() == expected
        && c.table.iter().map(|r| r.target_dim).collect::<Vec<_>>() == expected;
    if !constant_ok {
        witnesses.push(format!("constant input: {:?}", c.table));
    }
    let cover = match &a.input {
        Some(path) => load_cover(path)?,
        None => diagonal_two_cover(),
    };
    let cs = ordered_cech(&cover, a.n_max as usize)?;
    let top = (a.n_max as i64 - 1).min(2);
    let r = ts_comparison(&cs, a.weight_cap, 0..=top)?.report;
    if !r.is_quasi_iso {
        witnesses.push(format!("integration is not a quasi-isomorphism: {:?}", r.table));
    }
    let (integral, dirichlet) = dirichlet_integral()?;
    if integral != dirichlet {
        witnesses.push(format!("∫ t1 t2 dt1 dt2 = {}, expected {}", format_q(&integral), format_q(&dirichlet)));
    }
    let checks = json!({
        "constant_input": to_value(&c),
        "constant_input_identity": constant_ok,
        "cover": to_value(&r),
        "integral_t1t2_dt1dt2": format_q(&integral),
        "dirichlet_value": format_q(&dirichlet),
    });
    Ok(Verdict { checks, passed: witnesses.is_empty(), witnesses })
}

fn cech_check(a: &CechArgs) -> Result<Verdict> {
    let cover = match &a.input {
        Some(path) => load_cover(path)?,
        None => toy_cover(a.cover_size, a.toy)?,
    };
    let cs = ordered_cech(&cover, a.n_max as usize)?;
    let mut witnesses = vec![];
    let identities = match cs.check_identities() {
        Ok(()) => true,
        Err(e) => {
            witnesses.push(e.to_string());
            false
        }
    };
    let n = normalized_cochain(&cs)?;
    let mut degrees = vec![];
    for k in 0..a.n_max as i64 {
        let hn = cohomology(&n.normalized.complex, k)?.dimension;
        let ht = cohomology(&n.total, k)?.dimension;
        if hn != ht {
            witnesses.push(format!("degree {k}: normalized H = {hn}, unnormalized H = {ht}"));
        }
        degrees.push(json!({"degree": k, "normalized": hn, "unnormalized": ht}));
    }
    let levels: Vec<usize> = cs.levels.iter().map(|l| l.space.dim()).collect();
    let checks = json!({
        "cover_size": cover.n,
        "level_dims": levels,
        "cosimplicial_identities": identities,
        "normalized_dim": n.normalized.complex.space.dim(),
        "cohomology": degrees,
    });
    Ok(Verdict { checks, passed: witnesses.is_empty(), witnesses })
}

fn double_check(a: &DoubleArgs) -> Result<Verdict> {
    let cover = match &a.input {
        Some(path) => load_cover(path)?,
        None => toy_cover(a.cover_size, a.toy)?,
    };
    let r = double_complex_check(&cover, a.degree_cap as usize)?;
    let mut witnesses: Vec<String> = r
        .rows
        .iter()
        .filter(|row| !row.exact)
        .map(|row| format!("row {}: dims {:?}, ranks {:?}", row.hochschild_degree, row.dims, row.ranks))
        .collect();
    if !r.restrictions_are_chain_maps {
        witnesses.push("a restriction map is not a chain map".into());
    }
    Ok(Verdict { checks: to_value(&r), passed: r.passed, witnesses })
}

fn coordbundle_verify(a: &CoordArgs) -> Result<Verdict> {
    let m = a.gen_cap as usize;
    let ring = CoordRing1::new(m, a.laurent_cap)?;
    let witt = witt_relations(&ring, a.witt_index, m - 2)?;
    let mc = mc_form(&ring, a.jet_cap as usize)?.verify()?;
    let (_, gl1) = gl1_invariants(&ring)?;
    let h = acyclicity_homotopy(a.homotopy_gen_cap as usize, a.weight_cap, a.x_cap)?.verify()?;
    let pieces = graded_poincare_pieces(3, a.weight_cap)?;
    let mut witnesses = vec![];
    witnesses.extend(witt.failures.iter().cloned());
    witnesses.extend(mc.failures.iter().cloned());
    if !gl1.passed() {
        witnesses.push(format!("GL₁ invariants: {gl1:?}"));
    }
    witnesses.extend(h.failures.iter().map(|f| format!("dh + hd ≠ φ₁ − φ₀ on {f}")));
    if !h.passed && h.failures.is_empty() {
        witnesses.push(format!("homotopy complex cohomology {:?}", h.cohomology));
    }
    witnesses.extend(pieces.iter().filter(|p| !p.exact).map(|p| format!("graded piece of weight {} has cohomology {:?}", p.weight, p.cohomology)));
    let passed = witnesses.is_empty() && witt.passed() && mc.passed() && gl1.passed() && h.passed;
    let checks = json!({
        "witt": to_value(&witt),
        "mc_form": to_value(&mc),
        "gl1": to_value(&gl1),
        "homotopy": to_value(&h),
        "graded_pieces": to_value(&pieces),
    });
    Ok(Verdict { checks, witnesses, passed })
}

/// `eps^k*(…)` terms joined by `+`, as for Maurer-Cartan series.
fn describe_eps_poly(p: &EpsPoly) -> String {
    let parts: Vec<String> = p.iter().enumerate().filter(|(_, t)| !t.is_empty()).map(|(k, t)| format!("eps^{k}*({})", format_poly(t))).collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn signed_permutations_of<T: Clone>(args: &[T; 3]) -> Vec<([T; 3], bool)> {
    permutations(3).into_iter().map(|(p, neg)| ([args[p[0]].clone(), args[p[1]].clone(), args[p[2]].clone()], neg)).collect()
}

fn star_product(a: &StarArgs) -> Result<Verdict> {
    let dim = a.dim as usize;
    let pi = parse_polyvector(dim, &a.pi).map_err(|e| located("--pi", e))?;
    if pi.arity != 2 {
        return Err(Error::Parse(format!("--pi: expected a bivector, got arity {}", pi.arity)));
    }
    let pa = parse_poly(dim, &a.a).map_err(|e| located("--a", e))?;
    let pb = parse_poly(dim, &a.b).map_err(|e| located("--b", e))?;
    let product = first_order_star(&pi, &pa, &pb, a.order as usize)?;
    let square = schouten_bracket(&pi, &pi);
    let half_square = square.scaled(&qf(1, 2));
    let obstruction = second_order_obstruction(&pi)?;
    let op = associator_operator(&pi)?;
    let mut witnesses = vec![];
    if obstruction != half_square {
        witnesses.push(format!("obstruction {} ≠ ½[π,π] = {}", obstruction.describe(), half_square.describe()));
    }
    let triples = monomial_triples(dim, a.triple_degree);
    let mut first_order_associative = true;
    for [x, y, z] in &triples {
        let args = [monomial_poly(x.clone()), monomial_poly(y.clone()), monomial_poly(z.clone())];
        let r = star_associator(&pi, &args[0], &args[1], &args[2], 3)?;
        let label = format!("({}, {}, {})", format_monomial(x), format_monomial(y), format_monomial(z));
        if !r[0].is_empty() || !r[1].is_empty() {
            first_order_associative = false;
            witnesses.push(format!("associator mod ε² on {label}: {} + ε·{}", format_poly(&r[0]), format_poly(&r[1])));
        }
        if r[2] != op.eval(&args) {
            witnesses.push(format!("ε² associator on {label} differs from B∘B"));
        }
        // Brute-force antisymmetrization of the ε² coefficient against ½[π,π].
        let mut alt_sum = Poly::new();
        for (p, neg) in signed_permutations_of(&args) {
            let s = star_associator(&pi, &p[0], &p[1], &p[2], 3)?;
            poly_add_scaled(&mut alt_sum, &if neg { qf(-1, 1) } else { qf(1, 1) }, &s[2]);
        }
        if alt_sum != half_square.eval(&args) {
            witnesses.push(format!("antisymmetrized ε² associator on {label} is {}, ½[π,π] gives {}", format_poly(&alt_sum), format_poly(&half_square.eval(&args))));
        }
    }
    let checks = json!({
        "pi": pi.describe(),
        "a": format_poly(&pa),
        "b": format_poly(&pb),
        "product": product.iter().map(format_poly).collect::<Vec<_>>(),
        "product_series": describe_eps_poly(&product),
        "schouten_square": square.describe(),
        "poisson": square.is_zero(),
        "obstruction": obstruction.describe(),
        "obstruction_is_half_schouten_square": obstruction == half_square,
        "triples_checked": triples.len(),
        "associative_mod_eps2": first_order_associative,
    });
    Ok(Verdict { checks, passed: witnesses.is_empty(), witnesses })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows() {
        assert_eq!(parse_window("-2..2"), Ok((-2, 2)));
        assert_eq!(parse_window(" 0 .. 3"), Ok((0, 3)));
        assert!(parse_window("2..1").is_err());
        assert!(parse_window("1,2").is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(exit_code(&Error::Invalid("x".into())), 2);
        assert_eq!(exit_code(&crate::error::overflow("cap", "x")), 3);
        assert_eq!(exit_code(&Error::Hypothesis("x".into())), 1);
    }

    #[test]
    fn reports_carry_the_envelope() {
        let cli = Cli::try_parse_from(["dqcalc", "--seed", "3", "star-product"]).unwrap();
        let out = run(&cli);
        assert_eq!(out.exit_code, 0);
        for key in ["caps", "checks", "command", "exit_code", "passed", "seed", "witnesses"] {
            assert!(out.report.get(key).is_some(), "{key}");
        }
        assert!(out.render().ends_with("}\n"));
    }
}
