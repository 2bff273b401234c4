//! Dual mixed volumes and dual quermassintegrals.
//!
//! Every quantity here is `(1/n)∫_{S^{n-1}} (product of radial powers) dS`
//! evaluated with a [`SphereRule`] on `S^{n-1}`.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, SphereRule};
use crate::starbody::{radial_combine, BodyExpr};

/// `x^e` with an integer fast path.
pub(crate) fn power(x: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= 64.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

/// `∏ base_k^{exp_k}` for positive bases.
///
/// Falls back to log space when the direct product leaves the normal range.
pub(crate) fn power_product(factors: &[(f64, f64)]) -> f64 {
    let direct: f64 = factors.iter().map(|&(b, e)| power(b, e)).product();
    if direct.is_normal() {
        return direct;
    }
    factors.iter().map(|&(b, e)| e * b.ln()).sum::<f64>().exp()
}

fn dim_of(rule: &SphereRule) -> usize {
    rule.ambient_dim()
}

/// `Ṽ(K₁, …, K_n) = (1/n)∫ ∏ ρ(K_k, u) dS(u)`.
pub fn dual_mixed_volume(bodies: &[BodyExpr], rule: &SphereRule) -> Result<f64> {
    let n = dim_of(rule);
    if bodies.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: bodies.len(),
        });
    }
    let total = integrate(rule, |u| {
        let mut prod = 1.0;
        for b in bodies {
            prod *= b.radial(u)?;
        }
        Ok(prod)
    })?;
    Ok(total / n as f64)
}

/// `Ṽ_i(K, L) = (1/n)∫ ρ(K,u)^{n-i} ρ(L,u)^i dS(u)` for real `i`.
pub fn dual_mixed_volume_i(k: &BodyExpr, l: &BodyExpr, i: f64, rule: &SphereRule) -> Result<f64> {
    if !i.is_finite() {
        return Err(Error::param("index i must be finite"));
    }
    let n = dim_of(rule) as f64;
    let total = integrate(rule, |u| {
        Ok(power_product(&[(k.radial(u)?, n - i), (l.radial(u)?, i)]))
    })?;
    Ok(total / n)
}

/// `W̃_i(K) = (1/n)∫ ρ(K,u)^{n-i} dS(u)`; `W̃₀(K) = V(K)`.
pub fn dual_quermassintegral(k: &BodyExpr, i: f64, rule: &SphereRule) -> Result<f64> {
    if !i.is_finite() {
        return Err(Error::param("index i must be finite"));
    }
    let n = dim_of(rule) as f64;
    let total = integrate(rule, |u| Ok(power(k.radial(u)?, n - i)))?;
    Ok(total / n)
}

/// Dual quermassintegral sum `S_{w̃_i}(K, D) = W̃_i(K) + W̃_i(D)`, `0 ≤ i ≤ n−1`.
pub fn dual_querm_sum(k: &BodyExpr, d: &BodyExpr, i: f64, rule: &SphereRule) -> Result<f64> {
    let n = dim_of(rule) as f64;
    if !(i >= 0.0 && i <= n - 1.0) {
        return Err(Error::param(format!("need 0 <= i <= n - 1, got i = {i}")));
    }
    Ok(dual_quermassintegral(k, i, rule)? + dual_quermassintegral(d, i, rule)?)
}

/// Both sides of the binomial expansion of `V(λK +̃ μL)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionReport {
    pub direct: f64,
    pub expanded: f64,
    pub difference: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

/// Compares `V(λK +̃ μL)` with `Σ_i C(n,i) Ṽ_i(K,L) λ^{n-i} μ^i`.
pub fn expansion_check(
    k: &BodyExpr,
    l: &BodyExpr,
    lambda: f64,
    mu: f64,
    rule: &SphereRule,
) -> Result<ExpansionReport> {
    let combined = radial_combine(lambda, k, mu, l)?;
    let direct = dual_quermassintegral(&combined, 0.0, rule)?;
    let n = dim_of(rule);
    let mut expanded = 0.0;
    for i in 0..=n {
        let coeff = binomial(n, i) * lambda.powi((n - i) as i32) * mu.powi(i as i32);
        if coeff != 0.0 {
            expanded += coeff * dual_mixed_volume_i(k, l, i as f64, rule)?;
        }
    }
    Ok(ExpansionReport {
        direct,
        expanded,
        difference: (direct - expanded).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{build_sphere_rule, estimate_rule_error};
    use crate::starbody::{dilate, BumpTerm};
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn rule() -> SphereRule {
        build_sphere_rule(2, 16).unwrap()
    }

    fn b(r: f64) -> BodyExpr {
        BodyExpr::ball(r).unwrap()
    }

    fn ell() -> BodyExpr {
        BodyExpr::ellipsoid(&[1.0, 1.0, 2.0]).unwrap()
    }

    fn bump() -> BodyExpr {
        BodyExpr::bump(
            1.0,
            vec![BumpTerm {
                coeff: 0.3,
                direction: vec![0.0, 0.0, 1.0],
                half_power: 2,
            }],
        )
        .unwrap()
    }

    #[test]
    fn ball_values() {
        let r = rule();
        assert!(rel(dual_mixed_volume(&[b(1.0), b(1.0), b(1.0)], &r).unwrap(), 4.0 * PI / 3.0) < 1e-12);
        assert!(rel(dual_mixed_volume(&[b(1.0), b(1.0), b(2.0)], &r).unwrap(), 8.0 * PI / 3.0) < 1e-12);
        assert!(rel(dual_mixed_volume_i(&b(2.0), &b(1.0), 1.0, &r).unwrap(), 16.0 * PI / 3.0) < 1e-12);
        for i in [0.0, 0.5, 1.0, 2.0, 2.9] {
            assert!(rel(dual_quermassintegral(&b(1.0), i, &r).unwrap(), 4.0 * PI / 3.0) < 1e-12);
        }
        assert!(rel(dual_quermassintegral(&b(2.0), 1.0, &r).unwrap(), 16.0 * PI / 3.0) < 1e-12);
        assert!(rel(dual_querm_sum(&b(1.0), &b(1.0), 0.0, &r).unwrap(), 8.0 * PI / 3.0) < 1e-12);
        assert!(rel(dual_querm_sum(&b(1.0), &b(2.0), 1.0, &r).unwrap(), 20.0 * PI / 3.0) < 1e-12);
    }

    #[test]
    fn querm_sum_range_and_commutativity() {
        let r = rule();
        assert!(dual_querm_sum(&b(1.0), &b(1.0), 2.5, &r).is_err());
        assert!(dual_querm_sum(&b(1.0), &b(1.0), -0.1, &r).is_err());
        let a = dual_querm_sum(&ell(), &bump(), 1.0, &r).unwrap();
        let c = dual_querm_sum(&bump(), &ell(), 1.0, &r).unwrap();
        assert!(rel(a, c) < 1e-15);
    }

    #[test]
    fn wrong_body_count() {
        assert!(matches!(
            dual_mixed_volume(&[b(1.0), b(1.0)], &rule()),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn integer_index_matches_mixed_volume() {
        let r = rule();
        let (k, l) = (ell(), bump());
        for i in 0..=3usize {
            let mut list = vec![k.clone(); 3 - i];
            list.extend(std::iter::repeat_n(l.clone(), i));
            let a = dual_mixed_volume_i(&k, &l, i as f64, &r).unwrap();
            let c = dual_mixed_volume(&list, &r).unwrap();
            assert!(rel(a, c) < 1e-13, "i={i}");
        }
        let w0 = dual_quermassintegral(&k, 0.0, &r).unwrap();
        for i in [0.0, 0.7, 2.0] {
            assert!(rel(dual_mixed_volume_i(&k, &k, i, &r).unwrap(), w0) < 1e-13);
        }
    }

    #[test]
    fn homogeneity_of_quermassintegral() {
        let r = rule();
        for (lambda, i) in [(0.5, 0.0), (1.7, 1.0), (2.0, 2.5)] {
            let scaled = dual_quermassintegral(&dilate(lambda, &ell()).unwrap(), i, &r).unwrap();
            let base = dual_quermassintegral(&ell(), i, &r).unwrap();
            assert!(rel(scaled, lambda.powf(3.0 - i) * base) < 1e-12);
        }
    }

    #[test]
    fn expansion_examples() {
        let r = rule();
        let rep = expansion_check(&b(1.0), &b(1.0), 1.0, 1.0, &r).unwrap();
        assert!(rel(rep.direct, 32.0 * PI / 3.0) < 1e-12);
        assert!(rep.difference <= 1e-10);
        let rep = expansion_check(&b(1.0), &b(2.0), 2.0, 1.0, &r).unwrap();
        assert!(rel(rep.direct, 256.0 * PI / 3.0) < 1e-12);
        assert!(rel(rep.expanded, 256.0 * PI / 3.0) < 1e-12);

        let rep = expansion_check(&ell(), &bump(), 0.7, 1.3, &r).unwrap();
        let err = estimate_rule_error(
            |res| {
                let c = radial_combine(0.7, &ell(), 1.3, &bump())?;
                dual_quermassintegral(&c, 0.0, &build_sphere_rule(2, res)?)
            },
            16,
        )
        .unwrap();
        assert!(rep.difference <= 10.0 * err, "{} vs {}", rep.difference, err);
    }

    #[test]
    fn log_space_fallback() {
        let big = power_product(&[(1e200, 3.0), (1e-200, 2.0)]);
        assert!(rel(big, 1e200) < 1e-10);
        assert_eq!(power_product(&[(2.0, 2.0), (3.0, 1.0)]), 12.0);
    }
}
