use lsc_core::fluctuation::{solve_phi_equals_delta, Extremum};
use lsc_core::levy::LevyModel;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Coefficients (lowest degree first) of a product of polynomials.
fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64], k: f64) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + k * b.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Real roots of (δ − φ(z))(η₁ − z)(η₂ + z) from the eigenvalues of its
/// companion matrix.
fn companion_roots(m: &LevyModel, delta: f64) -> Vec<f64> {
    let (s2, mu) = (m.sigma() * m.sigma(), m.drift());
    let (l1, l2, e1, e2) = (m.lambda_up(), m.lambda_down(), m.eta_up(), m.eta_down());
    let poles = poly_mul(&[e1, -1.0], &[e2, 1.0]);
    let mut p = poly_mul(&[delta], &poles);
    p = poly_add(&p, &poly_mul(&[0.0, mu, 0.5 * s2], &poles), -1.0);
    p = poly_add(&p, &poly_mul(&[0.0, l1], &[e2, 1.0]), -1.0);
    p = poly_add(&p, &poly_mul(&[0.0, l2], &[e1, -1.0]), 1.0);
    while p.last().is_some_and(|c| c.abs() < 1e-300) {
        p.pop();
    }
    let n = p.len() - 1;
    let lead = p[n];
    let mut c = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        c[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        c[(i, n - 1)] = -p[i] / lead;
    }
    let mut roots: Vec<f64> = c
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() < 1e-8 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

fn jump_diffusion() -> impl Strategy<Value = (LevyModel, f64)> {
    (
        -0.3..0.3f64,
        0.05..1.0f64,
        0.1..3.0f64,
        0.1..3.0f64,
        1.0..10.0f64,
        1.0..10.0f64,
        0.1..4.0f64,
    )
        .prop_map(|(mu, s, l1, l2, e1, e2, d)| {
            (LevyModel::jump_diffusion(mu, s, l1, l2, e1, e2).unwrap(), d)
        })
}

fn compound_poisson() -> impl Strategy<Value = (LevyModel, f64)> {
    (0.1..3.0f64, 0.1..3.0f64, 1.0..10.0f64, 1.0..10.0f64, 0.1..4.0f64).prop_map(
        |(l1, l2, e1, e2, d)| (LevyModel::compound_poisson(l1, l2, e1, e2).unwrap(), d),
    )
}

fn any_model() -> impl Strategy<Value = (LevyModel, f64)> {
    prop_oneof![jump_diffusion(), compound_poisson()]
}

#[test]
fn jump_diffusion_roots_match_companion_eigenvalues() {
    let m = LevyModel::jump_diffusion(0.02, 0.3, 1.0, 1.5, 6.0, 5.0).unwrap();
    let roots = solve_phi_equals_delta(&m, 0.5).unwrap();
    let mut ours: Vec<f64> = roots
        .negative_roots
        .iter()
        .map(|g| -g)
        .chain(roots.positive_roots.iter().copied())
        .collect();
    ours.sort_by(f64::total_cmp);
    let oracle = companion_roots(&m, 0.5);
    assert_eq!(ours.len(), 4);
    assert_eq!(oracle.len(), 4);
    for (a, b) in ours.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "{ours:?} vs {oracle:?}");
    }
}

#[test]
fn compound_poisson_example_has_roots_two_and_three() {
    let m = LevyModel::compound_poisson(4.0 / 7.0, 3.0 / 7.0, 3.0, 4.0).unwrap();
    let roots = solve_phi_equals_delta(&m, 1.0).unwrap();
    assert_eq!(roots.positive_roots.len(), 1);
    assert_eq!(roots.negative_roots.len(), 1);
    assert!((roots.positive_roots[0] - 2.0).abs() < 1e-12);
    assert!((roots.negative_roots[0] - 3.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roots_agree_with_companion_oracle((m, delta) in any_model()) {
        let roots = solve_phi_equals_delta(&m, delta).unwrap();
        let mut ours: Vec<f64> = roots.negative_roots.iter().map(|g| -g)
            .chain(roots.positive_roots.iter().copied()).collect();
        ours.sort_by(f64::total_cmp);
        let oracle = companion_roots(&m, delta);
        prop_assert_eq!(ours.len(), oracle.len());
        for (a, b) in ours.iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-7 * (1.0 + b.abs()), "{:?} vs {:?}", ours, oracle);
        }
        prop_assert!(roots.max_residual(&m) < 1e-9 * (1.0 + delta));
        prop_assert!(roots.is_interleaved(&m));
    }

    #[test]
    fn wiener_hopf_product((m, delta) in any_model(), t in 0.02..0.98f64) {
        let roots = solve_phi_equals_delta(&m, delta).unwrap();
        let (rho, gamma) = (roots.positive_roots[0], roots.negative_roots[0]);
        let z = -gamma + t * (rho + gamma);
        let lhs = roots.mgf_sup(&m, z).unwrap() * roots.mgf_inf(&m, z).unwrap();
        let rhs = delta / (delta - m.characteristic_exponent(z).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn laws_are_probability_measures((m, delta) in any_model()) {
        let roots = solve_phi_equals_delta(&m, delta).unwrap();
        for which in [Extremum::Sup, Extremum::Inf] {
            let law = roots.extremum_law(&m, which).unwrap();
            prop_assert!((law.total_mass() - 1.0).abs() < 1e-10);
            prop_assert!((0.0..=1.0).contains(&law.atom_at_zero));
            prop_assert!(law.mixture.iter().all(|c| c.weight >= -1e-12 && c.rate > 0.0));
            // mgf from the law matches the product formula
            let z = match which { Extremum::Sup => 0.5 * roots.positive_roots[0], Extremum::Inf => -0.5 * roots.negative_roots[0] };
            let direct = match which { Extremum::Sup => roots.mgf_sup(&m, z), Extremum::Inf => roots.mgf_inf(&m, z) }.unwrap();
            prop_assert!((law.mgf(z) - direct).abs() < 1e-10 * direct);
        }
        let s = roots.extremum_law(&m, Extremum::Sup).unwrap();
        let i = roots.extremum_law(&m, Extremum::Inf).unwrap();
        prop_assert!((s.raw_moment(1) + i.raw_moment(1) - m.mean() / delta).abs() < 1e-10);
    }

    #[test]
    fn atom_only_without_diffusion((m, delta) in any_model()) {
        let roots = solve_phi_equals_delta(&m, delta).unwrap();
        let s = roots.extremum_law(&m, Extremum::Sup).unwrap();
        if m.sigma() > 0.0 {
            prop_assert!(s.atom_at_zero.abs() < 1e-12);
        } else {
            // P(S = 0) = ρ/η₁ for a compound Poisson process
            let expected = roots.positive_roots[0] / m.eta_up();
            prop_assert!((s.atom_at_zero - expected).abs() < 1e-12);
        }
    }
}
