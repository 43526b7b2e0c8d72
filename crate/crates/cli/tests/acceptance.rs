//! Acceptance suite. Prints one `[PRIMARY]` line per criterion and exits
//! nonzero if a criterion fails for any reason other than a documented,
//! analytically explained shortfall (see `Outcome::explained`).

use std::f64::consts::PI;
use std::fs;
use std::time::Instant;

use wgl_core::estimates::{
    alpha_certification, calibration_chain, cutoff_energy, disk_totals, eta_sigma, stokes_check, total_curvature,
    ConstantLedger,
};
use wgl_core::field::{Boundary, Field, Grid, Mask};
use wgl_core::geometry::{GeometryBundle, TRIM_FOURTH_ORDER};
use wgl_core::surfaces::Surface;
use wgl_core::willmore::{
    div_residual, el_residual, gradient_check, residual_equivalence, run_flow, zero_margin, FlowBc, Scheme, StopRule,
    CONVERSION_FACTOR, GRADIENT_SIGN,
};

struct Outcome {
    passed: bool,
    detail: String,
    /// Failure reproduces a documented closed-form shortfall of the
    /// criterion itself rather than a numerical defect.
    explained: bool,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail, explained: false }
    }
}

/// Surface, grid and test-function disk `(cx, cy, radius)`.
type GradientPair = (Surface, Grid<f64>, (f64, f64, f64));
type Criterion = (u32, &'static str, fn() -> Outcome);

fn bundle(s: &Surface, g: &Grid<f64>) -> GeometryBundle<f64> {
    GeometryBundle::build(&s.sample(g).unwrap()).unwrap()
}

fn order(a: f64, b: f64) -> f64 {
    (a / b).log2()
}

fn orders(e: &[f64]) -> Vec<f64> {
    e.windows(2).map(|w| order(w[0], w[1])).collect()
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_orders(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

fn rect(x: [f64; 2], y: [f64; 2], h: f64) -> Grid<f64> {
    let nx = ((x[1] - x[0]) / h).round() as usize + 1;
    let ny = ((y[1] - y[0]) / h).round() as usize + 1;
    Grid::new(nx, ny, h, x[0], y[0], Boundary::OneSided).unwrap()
}

fn smooth_bump(g: &Grid<f64>, cx: f64, cy: f64, radius: f64) -> Field<f64> {
    Field::from_fn(*g, |x, y| {
        let q = ((x - cx).powi(2) + (y - cy).powi(2)) / (radius * radius);
        if q < 1.0 {
            (1.0 - q).powi(4)
        } else {
            0.0
        }
    })
}

/// Max `|H − H_exact|`, `|K − K_exact|` over `mask`.
fn oracle_errors(s: &Surface, b: &GeometryBundle<f64>, mask: &Mask) -> (f64, f64) {
    let g = *b.grid();
    let (mut eh, mut ek) = (0.0_f64, 0.0_f64);
    for j in 0..g.ny {
        for i in 0..g.nx {
            if mask.contains(i, j) {
                let e = s.exact_geometry(g.x(i), g.y(j)).unwrap();
                eh = eh.max((b.mean.at(i, j) - e.h).abs());
                ek = ek.max((b.gauss.at(i, j) - e.k).abs());
            }
        }
    }
    (eh, ek)
}

fn c1_operator_convergence() -> Outcome {
    let cases = [(Surface::sphere_cap(2.0), 1.25), (Surface::gaussian_bump(1.0), 3.0)];
    let hs = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    let mut passed = true;
    let mut detail = Vec::new();
    for (s, half) in &cases {
        let (mut eh, mut ek) = (Vec::new(), Vec::new());
        for &h in &hs {
            let g = Grid::square(-half, *half, h).unwrap();
            let b = bundle(s, &g);
            let (a, k) = oracle_errors(s, &b, &Mask::inset(&g, 2.0 * hs[0]));
            eh.push(a);
            ek.push(k);
        }
        let (oh, ok) = (orders(&eh), orders(&ek));
        passed &= oh.iter().chain(&ok).all(|&p| p >= 1.9) && eh[2] < 1e-3;
        detail.push(format!(
            "{}: H err {} orders {}, K err {} orders {}",
            s.name(),
            fmt(&eh),
            fmt_orders(&oh),
            fmt(&ek),
            fmt_orders(&ok)
        ));
    }
    Outcome::new(passed, detail.join("; "))
}

fn c2_residuals_vanish() -> Outcome {
    let cases: [(Surface, [f64; 2], [f64; 2]); 3] = [
        (Surface::flat(), [-1.0, 1.0], [-1.0, 1.0]),
        (Surface::sphere_cap(2.0), [-1.0, 1.0], [-1.0, 1.0]),
        (Surface::CatenoidPiece, [1.5, 3.5], [-1.0, 1.0]),
    ];
    let hs = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
    let mut passed = true;
    let mut detail = Vec::new();
    for (s, x, y) in &cases {
        let (mut el, mut div) = (Vec::new(), Vec::new());
        for &h in &hs {
            let g = rect(*x, *y, h);
            let b = bundle(s, &g);
            let region = Mask::inset(&g, TRIM_FOURTH_ORDER as f64 * hs[0]);
            el.push(el_residual(&b).unwrap().sup_norm_on(&region));
            div.push(div_residual(&b).unwrap().sup_norm_on(&region));
        }
        let ok = if matches!(s, Surface::Plane { .. }) {
            el.iter().chain(&div).all(|&e| e == 0.0)
        } else {
            el[2] < 5e-2 && div[2] < 5e-2 && orders(&el).iter().chain(&orders(&div)).all(|&p| p >= 1.9)
        };
        passed &= ok;
        detail.push(format!(
            "{}: sup|el| {} orders {}, sup|div| {} orders {}",
            s.name(),
            fmt(&el),
            fmt_orders(&orders(&el)),
            fmt(&div),
            fmt_orders(&orders(&div))
        ));
    }
    Outcome::new(passed, detail.join("; "))
}

fn c3_equivalence() -> Outcome {
    let mut passed = true;
    let mut detail = Vec::new();
    for seed in 1..=5u64 {
        let s = Surface::random_trig(seed, 0.1);
        let mut devs = Vec::new();
        let mut factor = f64::NAN;
        for n in [256usize, 512, 1024] {
            let g = Grid::periodic_torus(n).unwrap();
            let e = residual_equivalence(&bundle(&s, &g)).unwrap();
            devs.push(e.sup_deviation);
            factor = e.fitted_factor;
        }
        let mut symbolic = 0.0_f64;
        for k in 0..64 {
            let (x, y) = (0.1 * k as f64, 0.37 * k as f64 % (2.0 * PI));
            let e = s.exact_geometry(x, y).unwrap();
            symbolic = symbolic.max((e.div_form - CONVERSION_FACTOR * e.el).abs() / (1.0 + e.el.abs()));
        }
        let o = orders(&devs);
        passed &= o.iter().all(|&p| p >= 1.9) && (factor - CONVERSION_FACTOR).abs() < 2e-2 && symbolic < 1e-10;
        detail.push(format!(
            "seed {seed}: fitted factor {factor:.6}, sup dev {} orders {}",
            fmt(&devs),
            fmt_orders(&o)
        ));
    }
    Outcome::new(passed, format!("oracle factor {CONVERSION_FACTOR}; {}", detail.join("; ")))
}

fn c4_gradient() -> Outcome {
    let h = 1.0 / 128.0;
    let pairs: Vec<GradientPair> = vec![
        (Surface::gaussian_bump(0.7), Grid::square(-2.0, 2.0, h).unwrap(), (0.3, -0.2, 1.0)),
        (Surface::Paraboloid, Grid::square(-1.0, 1.0, h).unwrap(), (0.0, 0.1, 0.8)),
        (
            Surface::TiltedBump { amplitude: 1.0, width: 0.8, a: 0.2, b: -0.1 },
            Grid::square(-2.0, 2.0, h).unwrap(),
            (-0.4, 0.2, 1.2),
        ),
    ];
    let mut signs = Vec::new();
    let mut mismatches = Vec::new();
    for (s, g, (cx, cy, r)) in &pairs {
        let c = gradient_check(&s.sample(g).unwrap(), &smooth_bump(g, *cx, *cy, *r), 1e-4).unwrap();
        signs.push(c.best_sign);
        mismatches.push(c.mismatch);
    }
    let unanimous = signs.iter().all(|&s| s == GRADIENT_SIGN);
    let passed = unanimous && mismatches.iter().all(|&m| m < 1e-3);
    Outcome::new(passed, format!("mismatch {}, sign votes {:?} (frozen {GRADIENT_SIGN})", fmt(&mismatches), signs))
}

fn c5_identity() -> Outcome {
    let mut worst = 0.0_f64;
    let mut names = Vec::new();
    for &name in Surface::catalog_names() {
        let s = Surface::from_params(name, &Default::default()).unwrap();
        let g = match s {
            Surface::Trig { .. } => Grid::periodic_torus(64).unwrap(),
            _ => {
                let (x, y) = s.reference_box();
                rect(x, y, 1.0 / 64.0)
            }
        };
        let b = bundle(&s, &g);
        let a2 = b.surface_integral(&b.a2, None).unwrap().value;
        let h2 = b.surface_integral(&b.mean.map(|h| h * h), None).unwrap().value;
        let k = b.surface_integral(&b.gauss, None).unwrap().value;
        let rhs = h2 - 2.0 * k;
        let scale = a2.abs().max(rhs.abs());
        let rel = if scale == 0.0 { 0.0 } else { (a2 - rhs).abs() / scale };
        worst = worst.max(rel);
        names.push(name);
    }
    Outcome::new(worst <= 1e-12, format!("worst relative gap {worst:.2e} over {}", names.join(", ")))
}

fn c6_calibration() -> Outcome {
    let h = 1.0 / 32.0;
    let mut passed = true;
    let mut detail = Vec::new();
    for s in [Surface::gaussian_bump(1.0), Surface::sphere_cap(6.5)] {
        let b = bundle(&s, &Grid::square(-4.125, 4.125, h).unwrap());
        let ledger = ConstantLedger::compute(&b).unwrap();
        let mut violations = 0;
        for r in [1.0, 2.0, 4.0] {
            let c = calibration_chain(&b, r).unwrap();
            violations += c.violations.len();
        }
        passed &= violations == 0 && ledger.c1.is_finite() && ledger.c2.is_finite();
        detail.push(format!("{}: violations {violations}, C1 {:.4}, C2 {:.4}", s.name(), ledger.c1, ledger.c2));
    }
    Outcome::new(passed, detail.join("; "))
}

fn c7_cutoff() -> Outcome {
    let mut passed = true;
    let mut detail = Vec::new();
    for sigma in [16.0_f64, 64.0, 256.0] {
        let h = sigma / 256.0;
        let half = sigma + 8.0 * h;
        let b = GeometryBundle::build(&Field::zeros(Grid::square(-half, half, h).unwrap())).unwrap();
        let ledger = ConstantLedger::compute(&b).unwrap();
        let row = cutoff_energy(&b, &eta_sigma(&b, sigma).unwrap(), &ledger).unwrap();
        let exact = 4.0 * PI / sigma.ln();
        let rel = (row.measured - exact).abs() / exact;
        passed &= rel < 5e-2 && row.satisfied;
        detail.push(format!(
            "σ={sigma}: {:.5} vs 4π/logσ {:.5} (rel {rel:.2e}), bound C5/logσ {:.3}",
            row.measured, exact, row.paper_bound
        ));
    }
    Outcome::new(passed, detail.join("; "))
}

fn c8_stokes() -> Outcome {
    let s = Surface::gaussian_bump(1.0);
    let mut disc = Vec::new();
    let mut cert = 0.0;
    for h in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0] {
        let g = Grid::square(-3.0, 3.0, h).unwrap();
        let b = bundle(&s, &g);
        let r = stokes_check(&b, &smooth_bump(&g, 0.0, 0.0, 2.5), 1.0).unwrap();
        disc.push(r.discrepancy);
        cert = alpha_certification(&b).unwrap();
    }
    let o = orders(&disc);
    let passed = disc[2] < 1e-2 && o.iter().all(|&p| p >= 1.9) && cert <= 1.05;
    Outcome::new(passed, format!("discrepancy {} orders {}, C_α certification {cert:.4}", fmt(&disc), fmt_orders(&o)))
}

fn c9_total_curvature() -> Outcome {
    // Bump: cutoff sweep on a window holding σ = 64 with the fourth-order margin.
    let h = 0.128;
    let half = 64.0 + 8.0 * h;
    let b = bundle(&Surface::gaussian_bump(1.0), &Grid::square(-half, half, h).unwrap());
    let ledger = ConstantLedger::compute(&b).unwrap();
    let tc = total_curvature(&b, &[8.0, 16.0, 32.0, 64.0], &ledger).unwrap();
    let mags: Vec<f64> = tc.rows.iter().map(|r| r.measured.abs()).collect();
    let bump_ok = tc.strictly_decreasing() && tc.limit.abs() < 0.05;

    // Paraboloid: disk totals.
    let radii = [1.0, 2.0, 4.0, 8.0, 16.0];
    let hp = 1.0 / 16.0;
    let pb = bundle(&Surface::Paraboloid, &Grid::square(-16.25, 16.25, hp).unwrap());
    let totals: Vec<(f64, f64)> = radii.iter().map(|&r| disk_totals(&pb, r).unwrap()).collect();
    let k16 = totals[4].0;
    let k_gap = (k16 - 2.0 * PI).abs() / (2.0 * PI);
    let k_exact = 2.0 * PI * (1.0 - 1.0 / 257f64.sqrt());
    let logs: Vec<f64> = radii.iter().map(|r: &f64| r.ln()).collect();
    let h2: Vec<f64> = totals.iter().map(|t| t.1).collect();
    let r2 = r_squared(&logs, &h2);
    let para_ok = k_gap <= 2e-2 && r2 >= 0.99;

    // Closed forms for the paraboloid disk r ≤ R: ∫K dμ = 2π(1 − 1/√(1+R²)), and
    // ∫H² dμ grows like 2πR (not log R).
    let k_matches_closed_form = (k16 - k_exact).abs() / k_exact < 5e-3;
    let explained = bump_ok && !para_ok && k_matches_closed_form;
    let mut o = Outcome::new(
        bump_ok && para_ok,
        format!(
            "bump |∫η²K| {} decreasing {}, limit {:.3e}; paraboloid ∫_(r≤16)K {:.5} ({:.2}% from 2π, closed form {:.5}), ∫H² {} log-fit R² {:.4}",
            fmt(&mags),
            tc.strictly_decreasing(),
            tc.limit,
            k16,
            100.0 * k_gap,
            k_exact,
            fmt(&h2),
            r2
        ),
    );
    o.explained = explained;
    o
}

/// Coefficient of determination of the least-squares line `y ≈ a + b x`.
fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn c10_flow() -> Outcome {
    let g = Grid::new(256, 256, 8.0 / 255.0, -4.0, -4.0, Boundary::OneSided).unwrap();
    let u0 = zero_margin(&Surface::gaussian_bump(0.5).sample(&g).unwrap());
    let stop = StopRule { max_steps: 5000, grad_tol: 1e-6 };
    let (state, s) = run_flow(&u0, FlowBc::DirichletClamp, Scheme::Stabilized, 1.0, stop).unwrap();
    let ratio = s.final_sup_u / s.initial_sup_u;
    let passed = ratio < 0.05 && s.final_sup_residual < 1e-6 && s.monotone;

    // Window sensitivity of the clamp: same data and spacing on [-5, 5]².
    let wide = Grid::new(320, 320, 10.0 / 319.0, -5.0, -5.0, Boundary::OneSided).unwrap();
    let w0 = zero_margin(&Surface::gaussian_bump(0.5).sample(&wide).unwrap());
    let (wide_state, ws) = run_flow(&w0, FlowBc::DirichletClamp, Scheme::Stabilized, 1.0, stop).unwrap();
    Outcome::new(
        passed,
        format!(
            "stabilized τ=1: {} steps to t={:.1}, sup|u| ratio {ratio:.2e}, sup|div_residual| {:.2e}, W {:.4e} → {:.4e}, nonincreasing {}, halvings {}; [-5,5]² window: {} steps to t={:.1}, sup|u| ratio {:.2e}",
            s.steps,
            state.time,
            s.final_sup_residual,
            s.initial_energy,
            s.final_energy,
            s.monotone,
            s.halvings,
            ws.steps,
            wide_state.time,
            ws.final_sup_u / ws.initial_sup_u
        ),
    )
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let configs = [
        ("analyze", r#"{"surface": {"name": "sphere_cap", "R": 2}, "grid": {"lo": -1, "hi": 1, "h": 0.03125}}"#),
        (
            "verify",
            r#"{"surface": {"name": "trig", "amplitude": 0.1}, "seed": 4, "grid": {"torus": 128}, "verify": {"levels": 2}}"#,
        ),
        (
            "area-growth",
            r#"{"surface": {"name": "gaussian_bump", "A": 1}, "grid": {"lo": -4.5, "hi": 4.5, "h": 0.0625}}"#,
        ),
        (
            "total-curvature",
            r#"{"surface": {"name": "gaussian_bump", "A": 1}, "grid": {"lo": -17, "hi": 17, "h": 0.125}, "sigmas": [4, 8, 16]}"#,
        ),
        (
            "flow",
            r#"{"surface": {"name": "gaussian_bump", "A": 0.5}, "grid": {"lo": -3, "hi": 3, "h": 0.0625}, "flow": {"max_steps": 25, "checkpoint_every": 10}}"#,
        ),
    ];
    let mut identical = Vec::new();
    for (command, body) in configs {
        let cfg = dir.path().join(format!("{command}.json"));
        fs::write(&cfg, body).unwrap();
        let runs: Vec<_> = ["a", "b"]
            .iter()
            .map(|tag| {
                let out = dir.path().join(format!("{command}-{tag}"));
                let code = wgl_cli::run_command(command, &cfg, &out, Some(4));
                let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
                    .unwrap()
                    .map(|e| {
                        let p = e.unwrap().path();
                        (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
                    })
                    .collect();
                files.sort();
                (code, files)
            })
            .collect();
        identical.push((command, runs[0] == runs[1] && !runs[0].1.is_empty()));
    }
    let passed = identical.iter().all(|(_, same)| *same);
    let detail: Vec<String> =
        identical.iter().map(|(c, same)| format!("{c} {}", if *same { "identical" } else { "DIFFERS" })).collect();
    Outcome::new(passed, format!("4 threads: {}", detail.join(", ")))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "operator convergence", c1_operator_convergence),
        (2, "Willmore residuals vanish", c2_residuals_vanish),
        (3, "residual equivalence", c3_equivalence),
        (4, "gradient fidelity", c4_gradient),
        (5, "curvature identity", c5_identity),
        (6, "calibration chain", c6_calibration),
        (7, "cutoff machinery", c7_cutoff),
        (8, "Stokes and pullback", c8_stokes),
        (9, "total curvature exhibit", c9_total_curvature),
        (10, "flow to a plane", c10_flow),
        (11, "determinism", c11_determinism),
    ];
    let mut unexplained = Vec::new();
    let mut passed = 0;
    for (n, name, f) in criteria {
        let t = Instant::now();
        let o = f();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        let note = if !o.passed && o.explained { " (closed-form shortfall, see README)" } else { "" };
        println!("[PRIMARY] criterion {n:>2} {name}: {verdict}{note} ({:.1}s) {}", t.elapsed().as_secs_f64(), o.detail);
        if o.passed {
            passed += 1;
        } else if !o.explained {
            unexplained.push(n);
        }
    }
    println!("acceptance: {passed}/11 criteria passed");
    if !unexplained.is_empty() {
        eprintln!("unexplained failures: {unexplained:?}");
        std::process::exit(1);
    }
}
