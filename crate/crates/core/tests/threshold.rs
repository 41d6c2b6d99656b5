use lsc_core::cost::CostModel;
use lsc_core::levy::LevyModel;
use lsc_core::scenario::{Scenario, BUNDLED};
use lsc_core::threshold::{GridSpec, Problem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, Poisson, StandardNormal};

fn bundled(name: &str) -> Problem {
    Scenario::bundled(name).unwrap().problem().unwrap()
}

fn exp_exp_problem() -> impl Strategy<Value = Problem> {
    (
        (-0.2..0.2f64, 0.1..0.8f64, 0.2..2.0f64, 0.2..2.0f64, 2.0..8.0f64, 2.0..8.0f64),
        (0.3..2.0f64, 0.1..1.5f64, 0.1..1.5f64, 0.1..3.0f64, 0.1..3.0f64),
    )
        .prop_filter_map("assumption on θ", |((mu, s, l1, l2, e1, e2), (d, al, be, a, b))| {
            let m = LevyModel::jump_diffusion(mu, s, l1, l2, e1, e2).unwrap();
            if !m.check_assumption1(d, al.max(be)).passed {
                return None;
            }
            Problem::new(m, CostModel::exp_exp(a, al, b, be).unwrap(), d).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn numeric_root_equals_closed_form(p in exp_exp_problem()) {
        let x = p.find_threshold().unwrap().x_star;
        prop_assert!((x - p.closed_form_threshold().unwrap()).abs() < 1e-8);
    }

    #[test]
    fn threshold_depends_on_cost_ratio_only(p in exp_exp_problem(), t in 0.1..10.0f64) {
        let lsc_core::CostFamily::ExpExp { a, alpha, b, beta } = p.cost.family() else { unreachable!() };
        let scaled = Problem::new(p.model, CostModel::exp_exp(t * a, alpha, t * b, beta).unwrap(), p.delta).unwrap();
        let x0 = p.find_threshold().unwrap().x_star;
        let x1 = scaled.find_threshold().unwrap().x_star;
        prop_assert!((x0 - x1).abs() < 1e-9);
    }

    #[test]
    fn monomial_linear_root_equals_closed_form(
        (mu, s, l1, l2, e1, e2) in (-0.2..0.2f64, 0.1..0.8f64, 0.2..2.0f64, 0.2..2.0f64, 2.0..8.0f64, 2.0..8.0f64),
        d in 0.3..2.0f64, a in 0.1..3.0f64, b in -1.0..1.0f64,
    ) {
        let m = LevyModel::jump_diffusion(mu, s, l1, l2, e1, e2).unwrap();
        let p = Problem::new(m, CostModel::monomial_linear(a, 1, b).unwrap(), d).unwrap();
        let x = p.find_threshold().unwrap().x_star;
        prop_assert!((x - p.closed_form_threshold().unwrap()).abs() < 1e-8);
    }
}

#[test]
fn stopping_value_is_continuous() {
    for (name, _) in BUNDLED {
        let p = bundled(name);
        let x_star = p.find_threshold().unwrap().x_star;
        let v = p.stopping_value(x_star).unwrap();
        let h = 1e-3;
        let xs: Vec<f64> = (0..4001).map(|i| x_star - 2.0 + h * i as f64).collect();
        let vals: Vec<f64> = xs.iter().map(|&x| v.eval(x)).collect();
        for i in 1..xs.len() - 1 {
            let jump = (vals[i + 1] - vals[i]).abs();
            // local Lipschitz estimate from the neighbouring interval
            let lip = ((vals[i] - vals[i - 1]).abs() / h)
                .max(v.derivative(xs[i]).abs())
                .max(1e-8);
            assert!(jump <= 10.0 * lip * h, "{name}: jump {jump} at {}", xs[i]);
        }
    }
}

#[test]
fn smooth_fit_with_diffusion() {
    for name in ["paper_4_1_jd.json", "paper_4_2_quadratic.json"] {
        let p = bundled(name);
        let x_star = p.find_threshold().unwrap().x_star;
        let v = p.stopping_value(x_star).unwrap();
        let (left, right) = v.one_sided_derivatives_at_barrier();
        assert!((left - right).abs() < 1e-4 * p.scale_at(x_star), "{name}: {left} vs {right}");
        // and by one-sided differences
        let h = 1e-6;
        let l = (v.eval(x_star) - v.eval(x_star - h)) / h;
        let r = (v.eval(x_star + h) - v.eval(x_star)) / h;
        assert!((l - r).abs() < 1e-4 * p.scale_at(x_star));
    }
}

#[test]
fn no_smooth_fit_for_compound_poisson_example() {
    let p = bundled("paper_4_3_cpp.json");
    let v = p.stopping_value(p.find_threshold().unwrap().x_star).unwrap();
    let (left, right) = v.one_sided_derivatives_at_barrier();
    assert!((left - right).abs() > 1e-3);
}

#[test]
fn value_function_growth_is_dominated() {
    for (name, _) in BUNDLED {
        let s = Scenario::bundled(name).unwrap();
        let p = s.problem().unwrap();
        let sol = p.solve(GridSpec::default()).unwrap();
        let ratio = |x: f64| sol.u.eval(x).abs() / (1.0 + (s.theta * x).cosh());
        let k = (0..=600).map(|i| ratio(-30.0 + 0.1 * i as f64)).fold(0.0, f64::max);
        assert!(k.is_finite() && k > 0.0);
        for edge in [-30.0, 30.0] {
            assert!(ratio(edge) <= ratio(edge * 25.0 / 30.0) * (1.0 + 1e-9) + 1e-12, "{name} at {edge}");
        }
    }
}

#[test]
fn perturbed_barriers_break_certification() {
    for (name, _) in BUNDLED {
        let p = bundled(name);
        let x_star = p.find_threshold().unwrap().x_star;
        let above = p.value_function(&p.stopping_value(x_star + 0.5).unwrap()).unwrap();
        let report = p.hjb_residual_check(&above, GridSpec::default());
        assert!(report.max_gradient_excess > report.tol, "{name}: {report:?}");
        let below = p.value_function(&p.stopping_value(x_star - 0.5).unwrap()).unwrap();
        let report = p.hjb_residual_check(&below, GridSpec::default());
        assert!(!report.pass, "{name}: {report:?}");
    }
}

#[test]
fn h_matches_simulation_at_exponential_time() {
    // H(x) = δ⁻¹ E f′(x + X_e) with e ~ Exp(δ); X_e is sampled exactly.
    let p = bundled("paper_4_1_jd.json");
    let m = p.model;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let clock = Exp::new(p.delta).unwrap();
    let n = 100_000;
    let x = 0.3;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let e = clock.sample(&mut rng);
        let z: f64 = StandardNormal.sample(&mut rng);
        let mut xe = x + m.drift() * e + m.sigma() * e.sqrt() * z;
        let up = Poisson::new(m.lambda_up() * e).map_or(0.0, |d| d.sample(&mut rng));
        let down = Poisson::new(m.lambda_down() * e).map_or(0.0, |d| d.sample(&mut rng));
        if up > 0.0 {
            xe += Gamma::new(up, 1.0 / m.eta_up()).unwrap().sample(&mut rng);
        }
        if down > 0.0 {
            xe -= Gamma::new(down, 1.0 / m.eta_down()).unwrap().sample(&mut rng);
        }
        let g = p.cost.f_prime(xe) / p.delta;
        sum += g;
        sq += g * g;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    let h = p.h.eval(x);
    assert!((mean - h).abs() < 3.0 * se, "MC {mean} ± {se} vs {h}");
}

#[test]
fn stopping_value_matches_simulated_stopped_functional() {
    // For Brownian motion the stopped functional is
    // v(x) = E[δ⁻¹ f′(X_e) 1{S_e < x*}] + c(x*) P(S_e ≥ x*), and (X_e, S_e)
    // is sampled exactly from the bridge maximum.
    let (mu, sigma, delta) = (0.2, 0.8, 1.2);
    let m = LevyModel::brownian(mu, sigma).unwrap();
    let cost = CostModel::exp_exp(1.0, 0.5, 1.5, 0.7).unwrap();
    let p = Problem::new(m, cost, delta).unwrap();
    let x_star = p.find_threshold().unwrap().x_star;
    let v = p.stopping_value(x_star).unwrap();
    let clock = Exp::new(delta).unwrap();
    let n = 100_000;
    for (k, x) in [x_star - 1.0, x_star - 0.3].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let e = clock.sample(&mut rng);
            let z: f64 = StandardNormal.sample(&mut rng);
            let end = x + mu * e + sigma * e.sqrt() * z;
            let u: f64 = 1.0 - rng.random::<f64>();
            let gap = end - x;
            let sup = 0.5 * (x + end + (gap * gap - 2.0 * sigma * sigma * e * u.ln()).sqrt());
            let g = if sup < x_star {
                cost.f_prime(end) / delta
            } else {
                cost.c(x_star)
            };
            sum += g;
            sq += g * g;
        }
        let mean = sum / n as f64;
        let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
        let exact = v.eval(x);
        assert!((mean - exact).abs() < 3.0 * se, "x={x}: MC {mean} ± {se} vs {exact}");
    }
}

#[test]
fn brownian_exp_exp_certifies() {
    let m = LevyModel::brownian(0.2, 0.8).unwrap();
    let p = Problem::new(m, CostModel::exp_exp(1.0, 0.5, 1.5, 0.7).unwrap(), 1.2).unwrap();
    let sol = p.solve(GridSpec::default()).unwrap();
    assert!(sol.hjb.pass, "{:?}", sol.hjb);
}

#[test]
fn higher_monomial_uses_resolvent_route() {
    let m = LevyModel::jump_diffusion(0.02, 0.3, 1.0, 1.5, 6.0, 5.0).unwrap();
    let p = Problem::new(m, CostModel::monomial_linear(0.3, 2, 0.0).unwrap(), 0.8).unwrap();
    assert!(p.closed_form_threshold().is_none());
    let generic = p.cost.q_function_generic(&m, 0.8, &p.roots).unwrap();
    for x in [-2.0, -0.5, 0.0, 0.7, 2.0] {
        assert!((generic.eval(x) - p.q.eval(x)).abs() < 1e-9 * (1.0 + p.q.eval(x).abs()));
    }
    let sol = p.solve(GridSpec::default()).unwrap();
    assert!(sol.hjb.pass, "{:?}", sol.hjb);
}
