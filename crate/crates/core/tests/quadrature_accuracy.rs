use std::f64::consts::PI;

use proptest::prelude::*;

use dualmix::quadrature::{build_sphere_rule, build_subsphere_rule, integrate, sphere_area};

/// `Γ(k/2)` for positive integers `k`.
fn gamma_half(k: u32) -> f64 {
    let mut x = if k.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut t = if k.is_multiple_of(2) { 2 } else { 1 };
    while t < k {
        x *= t as f64 / 2.0;
        t += 2;
    }
    x
}

/// `∫_{S²} u₁^a u₂^b u₃^c dS`: zero unless all exponents are even, else
/// `2 Γ(α)Γ(β)Γ(γ) / Γ(α+β+γ)` with `α = (a+1)/2` etc.
fn monomial_integral(a: u32, b: u32, c: u32) -> f64 {
    if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
        return 0.0;
    }
    2.0 * gamma_half(a + 1) * gamma_half(b + 1) * gamma_half(c + 1) / gamma_half(a + b + c + 3)
}

#[test]
fn monomials_up_to_degree_six_are_exact() {
    let rule = build_sphere_rule(2, 4).unwrap();
    for a in 0..=6u32 {
        for b in 0..=(6 - a) {
            for c in 0..=(6 - a - b) {
                let got = integrate(&rule, |u| {
                    Ok(u[0].powi(a as i32) * u[1].powi(b as i32) * u[2].powi(c as i32))
                })
                .unwrap();
                let want = monomial_integral(a, b, c);
                assert!((got - want).abs() <= 1e-9, "u^({a},{b},{c}): {got} vs {want}");
            }
        }
    }
}

#[test]
fn higher_dimensional_second_moments() {
    for m in 2..=5 {
        let rule = build_sphere_rule(m, 6).unwrap();
        let area = sphere_area(m);
        for axis in 0..=m {
            let got = integrate(&rule, |u| Ok(u[axis] * u[axis])).unwrap();
            assert!((got - area / (m + 1) as f64).abs() < 1e-12 * area, "m={m} axis={axis}");
        }
    }
}

#[test]
fn errors_shrink_along_the_ladder() {
    // ∫_{S²} 1/(a + u₁) dS = 2π ln((a+1)/(a−1))
    let a = 1.05f64;
    let exact = 2.0 * PI * ((a + 1.0) / (a - 1.0)).ln();
    let mut prev = f64::INFINITY;
    for res in [4, 8, 16, 32] {
        let rule = build_sphere_rule(2, res).unwrap();
        let err = (integrate(&rule, |u| Ok(1.0 / (a + u[0]))).unwrap() - exact).abs();
        assert!(err < prev, "res {res}: {err} !< {prev}");
        prev = err;
    }

    // ∫_{S²} e^{u₃} dS = 2π(e − 1/e), a polar integrand
    let exact = 2.0 * PI * (1f64.exp() - (-1f64).exp());
    let mut prev = f64::INFINITY;
    for res in [2, 3, 4, 5] {
        let rule = build_sphere_rule(2, res).unwrap();
        let err = (integrate(&rule, |u| Ok(u[2].exp())).unwrap() - exact).abs();
        assert!(err < prev, "res {res}");
        prev = err;
    }
}

fn rotation(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = axis.map(|a| a / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

fn apply(r: &[[f64; 3]; 3], v: &[f64]) -> Vec<f64> {
    (0..3).map(|i| (0..3).map(|j| r[i][j] * v[j]).sum()).collect()
}

fn apply_transpose(r: &[[f64; 3]; 3], v: &[f64]) -> Vec<f64> {
    (0..3).map(|i| (0..3).map(|j| r[j][i] * v[j]).sum()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn subsphere_rules_are_rotation_covariant(
        ux in -1.0..1.0f64, uy in -1.0..1.0f64, uz in -1.0..1.0f64,
        ax in -1.0..1.0f64, ay in -1.0..1.0f64, az in 0.1..1.0f64,
        angle in 0.0..std::f64::consts::TAU,
    ) {
        let norm = (ux * ux + uy * uy + uz * uz).sqrt();
        prop_assume!(norm > 0.1);
        let u = [ux / norm, uy / norm, uz / norm];
        let r = rotation([ax, ay, az], angle);
        let u_rot = apply(&r, &u);
        let f = |w: &[f64]| (0.7 * w[0] - 0.2 * w[1] + 0.4 * w[2]).exp() + w[2] * w[2];
        let a = build_subsphere_rule(&u, 3, 16).unwrap().integrate(|w| Ok(f(w))).unwrap();
        let b = build_subsphere_rule(&u_rot, 3, 16)
            .unwrap()
            .integrate(|w| Ok(f(&apply_transpose(&r, w))))
            .unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs(), "{} vs {}", a, b);
    }

    #[test]
    fn weights_sum_to_the_area(m in 1usize..=5, res in 2usize..=10) {
        let rule = build_sphere_rule(m, res).unwrap();
        prop_assert!((rule.total_weight() - sphere_area(m)).abs() <= 1e-12 * sphere_area(m));
        for node in rule.nodes() {
            let norm: f64 = node.iter().map(|x| x * x).sum();
            prop_assert!((norm - 1.0).abs() < 1e-13);
        }
    }
}
