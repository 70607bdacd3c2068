//! Acceptance suite: one pass/fail line per criterion, with timing.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use qle_cli::{run, Command, Format, Options, DEFAULT_LMAX};
use qle_core::curvature::{
    decompose, dust, identity_suite, pure_electric, validate, CurvatureJet, Depth, JetGenerator,
};
use qle_core::embedding::{isometric_residual, optimal_embedding_residual, solve_yi3, EmbeddingJet, Y0Path};
use qle_core::energy::assemble_e5;
use qle_core::expansion::{integral_lemmas, physical_expansion};
use qle_core::observer::{is_timelike, minimize_matter, minimize_vacuum, Observer};
use qle_core::sphere::{Field, SphereGrid};
use qle_core::transport::{available_order, compare, run_transport};
use qle_core::QleError;

const IDENTITY_TOL: f64 = 1e-10;
const IDENTITY_TIME: Duration = Duration::from_secs(10);
const ORACLE_TOL: f64 = 1e-8;
const ORACLE_TIME: Duration = Duration::from_secs(60);
const EMBED_TOL: f64 = 1e-9;
const LEMMA_TOL: f64 = 1e-9;
const ASSEMBLY_TOL: f64 = 1e-8;
const PURE_ELECTRIC_TOL: f64 = 1e-12;
const ASSEMBLY_TIME: Duration = Duration::from_secs(120);
const MATTER_PATH_TOL: f64 = 1e-9;
const DUST_TOL: f64 = 1e-12;
const MATTER_MIN_TOL: f64 = 1e-8;
const GRADIENT_TOL: f64 = 1e-10;
const MULTISTART_TOL: f64 = 1e-8;
const BRUTE_FORCE_TOL: f64 = 1e-6;
const C_MAX: f64 = 3.0;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    summary: String,
}

fn grid() -> SphereGrid<f64> {
    SphereGrid::new(DEFAULT_LMAX).expect("grid")
}

fn vacuum_jets(seed: u64, count: usize) -> Vec<CurvatureJet<f64>> {
    let mut gen = JetGenerator::new(seed);
    (0..count).map(|_| gen.vacuum(1.0, Depth::Second).expect("vacuum jet")).collect()
}

/// `∂_t` followed by random boosts with `|C| ≤ C_MAX`.
fn observers(seed: u64) -> Vec<Observer<f64>> {
    let mut gen = JetGenerator::new(seed);
    let mut out = vec![Observer::static_observer(1.0)];
    out.extend((0..4).map(|_| Observer::from_c(1.0, gen.observer_c(C_MAX))));
    out
}

fn identities() -> Outcome {
    let g = grid();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for jet in vacuum_jets(101, 50) {
        let mut rows = validate(&jet).expect("validate").rows;
        let f = decompose(&jet, &g).expect("decompose");
        rows.extend(identity_suite(&jet, &f, &g).expect("identities"));
        worst = rows.iter().map(|r| r.residual).fold(worst, f64::max);
    }
    let t = start.elapsed();
    Outcome {
        pass: worst < IDENTITY_TOL && t < IDENTITY_TIME,
        summary: format!("50 vacuum jets, max residual {worst:.2e} (< {IDENTITY_TOL:e}), {:.2} s", t.as_secs_f64()),
    }
}

fn oracle() -> Outcome {
    let g = grid();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut rows_ok = true;
    for jet in vacuum_jets(202, 20) {
        let f = decompose(&jet, &g).expect("decompose");
        let table = physical_expansion(&f, &g).expect("expansion");
        let sol = run_transport(&f, &g, available_order(&f, &g)).expect("transport");
        let rows = compare(&table.null, &sol.null, ORACLE_TOL);
        let names: Vec<&str> = rows.iter().map(|r| r.name.as_str()).collect();
        for want in ["trl-4", "trn-4", "eta-4", "div-eta-0", "div-eta-1", "div-eta-2"] {
            rows_ok &= names.contains(&want);
        }
        worst = rows.iter().map(|r| r.relative).fold(worst, f64::max);
    }
    let t = start.elapsed();
    Outcome {
        pass: rows_ok && worst < ORACLE_TOL && t < ORACLE_TIME,
        summary: format!(
            "20 jets through tr l, tr n r^3, eta r^4, div eta r^2: max relative {worst:.2e} (< {ORACLE_TOL:e}), {:.2} s",
            t.as_secs_f64()
        ),
    }
}

fn embedding() -> Outcome {
    let g = grid();
    let (mut iso, mut opt, mut paths) = (0.0f64, 0.0f64, 0.0f64);
    for (k, jet) in vacuum_jets(303, 20).into_iter().enumerate() {
        let f = decompose(&jet, &g).expect("decompose");
        let table = physical_expansion(&f, &g).expect("expansion");
        iso = iso.max(isometric_residual(&f, &g, &solve_yi3(&f, &g)));
        for obs in observers(3000 + k as u64) {
            let closed = EmbeddingJet::build(&f, &table, &g, &obs, Y0Path::ClosedForm).expect("closed form");
            let spectral = EmbeddingJet::build(&f, &table, &g, &obs, Y0Path::Spectral).expect("spectral");
            opt = opt.max(optimal_embedding_residual(&closed, &table, &g, &obs));
            opt = opt.max(optimal_embedding_residual(&spectral, &table, &g, &obs));
            paths = paths.max((&closed.y03 - &spectral.y03).max_abs());
        }
    }
    Outcome {
        pass: iso < EMBED_TOL && opt < EMBED_TOL && paths < EMBED_TOL,
        summary: format!(
            "20 jets x 5 observers: isometric {iso:.2e}, optimal {opt:.2e}, Y0 paths {paths:.2e} (< {EMBED_TOL:e})"
        ),
    }
}

fn lemmas() -> Outcome {
    let g = grid();
    let mut worst = 0.0f64;
    let mut count = 0;
    for jet in vacuum_jets(404, 20) {
        let f = decompose(&jet, &g).expect("decompose");
        let table = physical_expansion(&f, &g).expect("expansion");
        let rows = integral_lemmas(&f, &table, &g, LEMMA_TOL).expect("lemmas");
        count = rows.len();
        worst = rows.iter().map(|r| r.residual).fold(worst, f64::max);
    }
    Outcome {
        pass: count == 5 && worst < LEMMA_TOL,
        summary: format!("{count} integral identities on 20 jets, max residual {worst:.2e} (< {LEMMA_TOL:e})"),
    }
}

fn assembly() -> Outcome {
    let g = grid();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (k, jet) in vacuum_jets(505, 20).into_iter().enumerate() {
        for obs in observers(5000 + k as u64) {
            let r = assemble_e5(&jet, &g, &obs).expect("assembly");
            worst = worst.max(r.relative_discrepancy.expect("vacuum"));
        }
    }
    let pe = assemble_e5(&pure_electric(1.0, 1.0).expect("jet"), &g, &Observer::static_observer(1.0)).expect("assembly");
    let pe_gap = (pe.assembled_e5.expect("vacuum") - 0.1).abs();
    let t = start.elapsed();
    Outcome {
        pass: worst < ASSEMBLY_TOL && pe_gap < PURE_ELECTRIC_TOL && t < ASSEMBLY_TIME,
        summary: format!(
            "20 jets x 5 observers: max relative {worst:.2e} (< {ASSEMBLY_TOL:e}); pure electric |E5 - 1/10| {pe_gap:.2e} (< {PURE_ELECTRIC_TOL:e}), {:.2} s",
            t.as_secs_f64()
        ),
    }
}

fn matter() -> Outcome {
    let g = grid();
    let mut gen = JetGenerator::new(606);
    let (mut paths, mut minimum) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let jet = gen.matter(1.0);
        let obs = Observer::from_c(1.0, gen.observer_c(C_MAX));
        let m = assemble_e5(&jet, &g, &obs).expect("matter").matter.expect("matter limit");
        paths = paths.max((m.e_integral - m.e_stress).abs()).max((m.e_einstein - m.e_stress).abs());
        for i in 0..3 {
            paths = paths
                .max((m.p_integral[i] - m.p_stress[i]).abs())
                .max((m.p_curvature[i] - m.p_stress[i]).abs());
        }
        let min = minimize_matter(&jet).expect("timelike");
        minimum = minimum.max((min.min_value - min.closed_form).abs() / min.closed_form.abs());
    }
    let d = assemble_e5(&dust(1.0, 1.0), &g, &Observer::static_observer(1.0)).expect("dust");
    let dust_gap = (d.matter.expect("matter").e3 - 4.0 * PI / 3.0).abs();
    Outcome {
        pass: paths < MATTER_PATH_TOL && dust_gap < DUST_TOL && minimum < MATTER_MIN_TOL,
        summary: format!(
            "dual e/p paths {paths:.2e} (< {MATTER_PATH_TOL:e}); dust |E3 - 4pi/3| {dust_gap:.2e} (< {DUST_TOL:e}); minimum vs invariant mass {minimum:.2e} (< {MATTER_MIN_TOL:e})"
        ),
    }
}

fn optimizer() -> Outcome {
    let mut gen = JetGenerator::new(707);
    let (mut grad, mut hess, mut spread, mut bf) = (0.0f64, f64::INFINITY, 0.0f64, 0.0f64);
    let mut found = 0;
    while found < 20 {
        let jet = gen.vacuum(1.0, Depth::Point).expect("jet");
        if !is_timelike(&qle_core::energy::u_vector(&jet).0) {
            continue;
        }
        found += 1;
        let c = minimize_vacuum(&jet, found).expect("minimum").certificate;
        grad = grad.max(c.gradient_norm);
        hess = hess.min(c.hessian_min_eigenvalue);
        spread = spread.max(c.multistart_spread);
        bf = bf.max(c.brute_force_distance);
    }
    let zero = matches!(
        minimize_vacuum(&pure_electric(1.0, 0.0).expect("jet"), 0),
        Err(QleError::InfimumNotAttained { .. })
    );
    Outcome {
        pass: grad < GRADIENT_TOL && hess > 0.0 && spread < MULTISTART_TOL && bf < BRUTE_FORCE_TOL && zero,
        summary: format!(
            "20 timelike jets: gradient {grad:.2e} (< {GRADIENT_TOL:e}), min Hessian eigenvalue {hess:.2e} (> 0), multi-start {spread:.2e} (< {MULTISTART_TOL:e}), brute force {bf:.2e} (< {BRUTE_FORCE_TOL:e}); zero Weyl not attained: {zero}"
        ),
    }
}

fn determinism() -> Outcome {
    let opts = |input: &str, seed: u64, optimize: bool| Options {
        input: Some(input.into()),
        lmax: DEFAULT_LMAX,
        order: None,
        tol: None,
        observer: None,
        optimize,
        format: Format::Json,
        seed,
        out: None,
    };
    let cases = [
        (Command::Validate, "builtin:random-vacuum", false),
        (Command::Identities, "builtin:random-vacuum", false),
        (Command::Expand, "builtin:random-vacuum", false),
        (Command::Oracle, "builtin:random-vacuum", false),
        (Command::Embed, "builtin:random-vacuum", true),
        (Command::Energy, "builtin:random-vacuum", true),
        (Command::Optimize, "builtin:random-vacuum", false),
        (Command::Energy, "builtin:random-matter", true),
    ];
    let mut identical = 0;
    let mut seed_sensitive = true;
    for (cmd, input, optimize) in cases {
        let render = |seed| run(cmd, &opts(input, seed, optimize)).expect("report").render(Format::Json);
        let a = render(11);
        if a == render(11) {
            identical += 1;
        }
        seed_sensitive &= a != render(12);
    }
    Outcome {
        pass: identical == cases.len() && seed_sensitive,
        summary: format!(
            "{identical}/{} reports byte-identical for equal seeds; different seeds differ: {seed_sensitive}",
            cases.len()
        ),
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("identities", identities),
        ("transport oracle", oracle),
        ("embedding", embedding),
        ("integral lemmas", lemmas),
        ("energy assembly", assembly),
        ("matter", matter),
        ("optimizer", optimizer),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        if !out.pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {} {name}: {} [{:.2} s]",
            if out.pass { "PASS" } else { "FAIL" },
            k + 1,
            out.summary,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
