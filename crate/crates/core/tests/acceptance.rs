//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any fails.

use std::time::Instant;

use lsc_core::cost::CostModel;
use lsc_core::fluctuation::Extremum;
use lsc_core::generator::{apply_generator, Numeric};
use lsc_core::levy::LevyModel;
use lsc_core::mc::{barrier_sweep, reflect_at_barrier, simulate_path, SimConfig};
use lsc_core::scenario::{Scenario, BUNDLED};
use lsc_core::threshold::{GridSpec, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn bundled_problems() -> Vec<(&'static str, Scenario, Problem)> {
    BUNDLED
        .iter()
        .map(|(name, _)| {
            let s = Scenario::bundled(name).unwrap();
            let p = s.problem().unwrap();
            (*name, s, p)
        })
        .collect()
}

fn cpp_problem() -> (Scenario, Problem) {
    let s = Scenario::bundled("paper_4_3_cpp.json").unwrap();
    let p = s.problem().unwrap();
    (s, p)
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn random_jd(rng: &mut ChaCha8Rng) -> LevyModel {
    LevyModel::jump_diffusion(
        uniform(rng, -0.2, 0.2),
        uniform(rng, 0.1, 0.8),
        uniform(rng, 0.2, 2.0),
        uniform(rng, 0.2, 2.0),
        uniform(rng, 1.5, 8.0),
        uniform(rng, 1.5, 8.0),
    )
    .unwrap()
}

fn random_cpp(rng: &mut ChaCha8Rng) -> LevyModel {
    LevyModel::compound_poisson(
        uniform(rng, 0.2, 2.0),
        uniform(rng, 0.2, 2.0),
        uniform(rng, 1.5, 8.0),
        uniform(rng, 1.5, 8.0),
    )
    .unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (_, p) = cpp_problem();
    let x_star = p.find_threshold().map(|s| s.x_star);
    let elapsed = start.elapsed().as_secs_f64();
    match x_star {
        Ok(x) => outcome(
            (x + 0.0377).abs() <= 5e-4 && elapsed < 1.0,
            format!("x* = {x:.6} (target -0.0377 ± 5e-4), {elapsed:.3} s"),
        ),
        Err(e) => outcome(false, format!("solver error: {e}")),
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut bound_ok = true;
    let mut literal_bound_holds = 0;
    let mut exp_exp = 0;
    while exp_exp < 20 {
        let model = random_jd(&mut rng);
        let delta = uniform(&mut rng, 0.3, 2.0);
        let (alpha, beta) = (uniform(&mut rng, 0.2, 2.0), uniform(&mut rng, 0.2, 2.0));
        let (a, b) = (uniform(&mut rng, 0.2, 3.0), uniform(&mut rng, 0.2, 3.0));
        if !model.check_assumption1(delta, alpha.max(beta)).passed {
            continue;
        }
        let cost = CostModel::exp_exp(a, alpha, b, beta).unwrap();
        let p = Problem::new(model, cost, delta).unwrap();
        let x = p.find_threshold().unwrap().x_star;
        let closed = p.closed_form_threshold().unwrap();
        worst = worst.max((x - closed).abs());
        // x* ≥ log(δB/(Aα))/(α+β); the δ = 1 case is the published bound
        bound_ok &= x >= (delta * b / (a * alpha)).ln() / (alpha + beta) - 1e-12;
        if x >= (b / (a * alpha)).ln() / (alpha + beta) {
            literal_bound_holds += 1;
        }
        exp_exp += 1;
    }
    let mut linear = 0;
    while linear < 20 {
        let model = random_jd(&mut rng);
        let delta = uniform(&mut rng, 0.3, 2.0);
        let theta = uniform(&mut rng, 0.1, 1.0);
        if !model.check_assumption1(delta, theta).passed {
            continue;
        }
        let cost =
            CostModel::monomial_linear(uniform(&mut rng, 0.1, 3.0), 1, uniform(&mut rng, -1.0, 1.0))
                .unwrap();
        let p = Problem::new(model, cost, delta).unwrap();
        let x = p.find_threshold().unwrap().x_star;
        worst = worst.max((x - p.closed_form_threshold().unwrap()).abs());
        linear += 1;
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-8 && bound_ok && elapsed < 5.0,
        format!(
            "max |numeric − closed form| = {worst:.2e} over 40 scenarios, lower bound {} \
             (δ-free form holds in {literal_bound_holds}/20), {elapsed:.2} s",
            if bound_ok { "holds" } else { "violated" }
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_product = 0.0f64;
    let mut worst_mean = 0.0f64;
    for i in 0..20 {
        let model = if i < 10 {
            random_jd(&mut rng)
        } else {
            random_cpp(&mut rng)
        };
        let delta = uniform(&mut rng, 0.2, 3.0);
        let roots = lsc_core::solve_phi_equals_delta(&model, delta).unwrap();
        let (rho, gamma) = (roots.positive_roots[0], roots.negative_roots[0]);
        // 50 points across the strip (−γ₁, ρ₁), kept 5% away from its ends
        let (lo, hi) = (-0.95 * gamma, 0.95 * rho);
        for k in 0..50 {
            let z = lo + (hi - lo) * k as f64 / 49.0;
            let lhs = roots.mgf_sup(&model, z).unwrap() * roots.mgf_inf(&model, z).unwrap();
            let rhs = delta / (delta - model.characteristic_exponent(z).unwrap());
            worst_product = worst_product.max((lhs - rhs).abs());
        }
        let sup = roots.extremum_law(&model, Extremum::Sup).unwrap();
        let inf = roots.extremum_law(&model, Extremum::Inf).unwrap();
        let sum = sup.raw_moment(1) + inf.raw_moment(1);
        worst_mean = worst_mean.max((sum - model.mean() / delta).abs());
    }
    outcome(
        worst_product <= 1e-10 && worst_mean <= 1e-10,
        format!(
            "max product error {worst_product:.2e}, max |E S + E I − mean/δ| {worst_mean:.2e} \
             (10 jump-diffusion + 10 compound Poisson models)"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, _, p) in bundled_problems() {
        let sol = match p.solve(GridSpec::default()) {
            Ok(s) => s,
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
                continue;
            }
        };
        let mut perturbed_fail = true;
        for shift in [-0.5, 0.5] {
            let v = p.stopping_value(sol.x_star + shift).unwrap();
            let u = p.value_function(&v).unwrap();
            perturbed_fail &= !p.hjb_residual_check(&u, GridSpec::default()).pass;
        }
        pass &= sol.hjb.pass && perturbed_fail;
        parts.push(format!(
            "{name}: {} (residual {:.1e}, tol {:.1e}), x*±0.5 {}",
            if sol.hjb.pass { "PASS" } else { "FAIL" },
            sol.hjb.max_abs_residual_left,
            sol.hjb.tol,
            if perturbed_fail { "FAIL as expected" } else { "unexpectedly PASS" }
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let (s, p) = cpp_problem();
    let sol = p.solve(GridSpec::default()).unwrap();
    let x_star = sol.x_star;
    let mut config = s.sim_config(x_star);
    config.paths = 200_000;
    config.dt = 1e-3;
    config.horizon = 40.0;
    let step = 0.2;
    let barriers: Vec<f64> = (0..11).map(|i| x_star - 1.0 + step * i as f64).collect();
    let (rows, report) = match barrier_sweep(&p.model, &p.cost, p.delta, &config, &barriers) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("simulation error: {e}")),
    };
    let at_star = rows[5].estimate;
    let u = sol.u.eval(x_star);
    let gap = (at_star.mean - u).abs();
    let allowed = 3.0 * at_star.stderr + 0.02 * u.abs();
    let argmin_ok = (report.argmin_barrier - x_star).abs() <= step + 1e-12;
    outcome(
        argmin_ok && gap <= allowed,
        format!(
            "argmin barrier {:.4} (x* = {x_star:.4}, step {step}); Ĵ(x*) = {:.5} ± {:.5}, \
             u(x*) = {u:.5}, gap {gap:.5} ≤ {allowed:.5}: {}; {:.1} s",
            report.argmin_barrier,
            at_star.mean,
            at_star.stderr,
            gap <= allowed,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    let problems = bundled_problems();

    // generator eigenfunctions
    let mut worst_eig = 0.0f64;
    for (_, _, p) in &problems {
        let (lo, hi) = p.model.domain();
        let (lo, hi) = (lo.max(-6.0) * 0.9, hi.min(6.0) * 0.9);
        for k in 0..9 {
            let z = lo + (hi - lo) * k as f64 / 8.0;
            for x in [-1.5, 0.0, 0.7] {
                let got = apply_generator(&Numeric(|t: f64| (z * t).exp()), &p.model, x);
                let want = p.model.characteristic_exponent(z).unwrap() * (z * x).exp();
                if want != 0.0 {
                    worst_eig = worst_eig.max(((got - want) / want).abs());
                }
            }
        }
    }
    if worst_eig > 1e-8 {
        failures.push(format!("eigenfunction rel. error {worst_eig:.1e}"));
    }

    // reflection invariants
    let mut violations = 0usize;
    let mut paths = 0usize;
    for (_, s, p) in problems.iter().filter(|(n, _, _)| n.contains("4_1") || n.contains("4_3")) {
        let x_star = p.find_threshold().unwrap().x_star;
        let mut c = s.sim_config(x_star);
        c.horizon = 5.0;
        c.dt = 1e-2;
        c.start_x = x_star + 0.3;
        for i in 0..5_000u64 {
            let path = reflect_at_barrier(&simulate_path(&p.model, &c, i), x_star);
            let mut d = path.d0;
            for e in &path.epochs {
                let bad = e.d_minus < d
                    || e.d_plus < e.d_minus
                    || e.dd_jump > e.jump.max(0.0) + 1e-12
                    || e.x_minus > x_star + 1e-12
                    || e.x_plus > x_star + 1e-12;
                violations += bad as usize;
                d = e.d_plus;
            }
            paths += 1;
        }
    }
    if violations > 0 {
        failures.push(format!("{violations} reflection violations"));
    }

    // Q sign and monotonicity, v ≤ c, u′ = v
    let mut worst_v_gap = 0.0f64;
    let mut worst_fd = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (name, _, p) in &problems {
        let search = p.find_threshold().unwrap();
        if !search.assumption4.passed {
            failures.push(format!("{name}: Q structure"));
        }
        let x_star = search.x_star;
        let v = p.stopping_value(x_star).unwrap();
        let u = p.value_function(&v).unwrap();
        let scale = p.scale_at(x_star);
        for k in 0..100 {
            let x = x_star - 3.0 + 6.0 * k as f64 / 99.0;
            let diff = v.eval(x) - p.cost.c(x);
            if x >= x_star {
                worst_v_gap = worst_v_gap.max(diff.abs() / (scale + p.cost.c(x).abs()));
            } else if diff > 1e-10 * scale {
                failures.push(format!("{name}: v > c at {x}"));
            }
        }
        for _ in 0..20 {
            let x = uniform(&mut rng, x_star - 3.0, x_star + 3.0);
            let h = 1e-5;
            let fd = (u.eval(x + h) - u.eval(x - h)) / (2.0 * h);
            let vx = v.eval(x);
            worst_fd = worst_fd.max((fd - vx).abs() / vx.abs().max(1.0));
        }
    }
    if worst_v_gap > 1e-8 {
        failures.push(format!("v − c on the stopping region {worst_v_gap:.1e}"));
    }
    if worst_fd > 1e-5 {
        failures.push(format!("u′ vs v rel. error {worst_fd:.1e}"));
    }

    // grid convergence under dt halving
    let mut conv = Vec::new();
    for (name, paths_n) in [("paper_4_1_jd.json", 2_000usize), ("paper_4_3_cpp.json", 20_000)] {
        let s = Scenario::bundled(name).unwrap();
        let p = s.problem().unwrap();
        let x_star = p.find_threshold().unwrap().x_star;
        let mut c: SimConfig = s.sim_config(x_star);
        c.paths = paths_n;
        c.dt = 2e-3;
        let coarse = lsc_core::estimate_cost(&p.model, &p.cost, p.delta, &c).unwrap();
        c.dt = 1e-3;
        let fine = lsc_core::estimate_cost(&p.model, &p.cost, p.delta, &c).unwrap();
        let diff = (coarse.mean - fine.mean).abs();
        let allowed = (2.0 * fine.stderr).max(0.01 * fine.mean.abs());
        if diff > allowed {
            failures.push(format!("{name}: dt halving moved the mean by {diff:.2e} > {allowed:.2e}"));
        }
        conv.push(format!("{name} Δ={diff:.1e}"));
    }

    outcome(
        failures.is_empty(),
        format!(
            "eigen {worst_eig:.1e}; {paths} reflected paths, {violations} violations; \
             v−c on stopping region {worst_v_gap:.1e}; u′−v {worst_fd:.1e}; grid {}{}",
            conv.join(", "),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {}", failures.join(", "))
            }
        ),
    )
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("1 compound Poisson barrier reproduction", criterion_1),
        ("2 closed-form agreement", criterion_2),
        ("3 Wiener–Hopf product identity", criterion_3),
        ("4 HJB certification", criterion_4),
        ("5 Monte Carlo optimality", criterion_5),
        ("6 property suites", criterion_6),
    ];
    let mut all = true;
    for (name, run) in criteria {
        let o = run();
        all &= o.pass;
        println!(
            "criterion {name}: {} | {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if !all {
        std::process::exit(1);
    }
}
