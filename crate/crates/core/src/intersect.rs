//! Central sections and (mixed) intersection bodies.
//!
//! `ρ(I(K₁,…,K_{n-1}), u) = ṽ(K₁∩E_u, …, K_{n-1}∩E_u)`, the
//! `(n−1)`-dimensional dual mixed volume of the sections, is evaluated with a
//! [`SubsphereRule`] on `S^{n-1} ∩ E_u`.

use crate::dualvol::power;
use crate::error::{Error, Result};
use crate::quadrature::{build_subsphere_rule, integrate, SphereRule, SubsphereRule};
use crate::starbody::BodyExpr;

/// A direction `u` with its subsphere rule and the `n − 1` bodies being cut.
#[derive(Debug, Clone)]
pub struct SectionContext {
    sub: SubsphereRule,
    bodies: Vec<BodyExpr>,
}

impl SectionContext {
    pub fn new(u: &[f64], bodies: Vec<BodyExpr>, inner_res: usize) -> Result<Self> {
        let n = u.len();
        if bodies.len() + 1 != n {
            return Err(Error::Dimension {
                expected: n - 1,
                got: bodies.len(),
            });
        }
        Ok(SectionContext {
            sub: build_subsphere_rule(u, n, inner_res)?,
            bodies,
        })
    }

    pub fn direction(&self) -> &[f64] {
        self.sub.direction()
    }

    pub fn subsphere(&self) -> &SubsphereRule {
        &self.sub
    }

    pub fn bodies(&self) -> &[BodyExpr] {
        &self.bodies
    }
}

/// Radial function of the section `K ∩ E_u` at `w ∈ S^{n-1} ∩ E_u`.
pub fn section_radial(k: &BodyExpr, ctx: &SectionContext, w: &[f64]) -> Result<f64> {
    let u = ctx.direction();
    if w.len() != u.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            got: w.len(),
        });
    }
    let off: f64 = w.iter().zip(u).map(|(a, b)| a * b).sum();
    if off.abs() > 1e-9 {
        return Err(Error::param(format!(
            "direction is not in E_u (w·u = {off})"
        )));
    }
    k.radial(w)
}

fn section_integral(bodies: &[BodyExpr], sub: &SubsphereRule) -> Result<f64> {
    let total = sub.integrate(|w| {
        let mut prod = 1.0;
        for b in bodies {
            prod *= b.radial_unchecked(w)?;
        }
        if prod > 0.0 {
            Ok(prod)
        } else {
            Err(Error::StarBody {
                direction: w.to_vec(),
                value: prod,
            })
        }
    })?;
    Ok(total / bodies.len() as f64)
}

/// `v(K ∩ E_u) = (1/(n−1))∫ ρ(K,w)^{n-1} dw`.
pub fn section_volume(k: &BodyExpr, ctx: &SectionContext) -> Result<f64> {
    let m = ctx.direction().len() - 1;
    let total = ctx.sub.integrate(|w| Ok(power(k.radial(w)?, m as f64)))?;
    Ok(total / m as f64)
}

/// `ṽ(K₁∩E_u, …, K_{n-1}∩E_u)` for the bodies held by `ctx`.
pub fn section_dual_mixed_volume(ctx: &SectionContext) -> Result<f64> {
    section_integral(&ctx.bodies, &ctx.sub)
}

/// `ṽ` of the sections of `bodies` by `E_u`, with a fresh subsphere rule.
pub(crate) fn section_mixed_volume_at(bodies: &[BodyExpr], u: &[f64], inner_res: usize) -> Result<f64> {
    let sub = build_subsphere_rule(u, u.len(), inner_res)?;
    section_integral(bodies, &sub)
}

/// `I(K₁, …, K_{n-1})` as a lazily evaluated star body.
pub fn mixed_intersection_body(bodies: &[BodyExpr], inner_res: usize) -> Result<BodyExpr> {
    BodyExpr::intersection_of(bodies.to_vec(), inner_res)
}

/// `IK = I(K, …, K)` in `ℝ^n`.
pub fn intersection_body(k: &BodyExpr, n: usize, inner_res: usize) -> Result<BodyExpr> {
    if n < 3 {
        return Err(Error::param(format!("dimension must exceed 2, got {n}")));
    }
    mixed_intersection_body(&vec![k.clone(); n - 1], inner_res)
}

/// Body list `(K × (n−j−1), L × j)` of `I_j(K, L)`.
pub fn ith_multiset(k: &BodyExpr, l: &BodyExpr, j: usize, n: usize) -> Result<Vec<BodyExpr>> {
    if n < 3 {
        return Err(Error::param(format!("dimension must exceed 2, got {n}")));
    }
    if j > n - 1 {
        return Err(Error::param(format!("need 0 <= j <= n - 1, got j = {j}")));
    }
    let mut list = vec![k.clone(); n - 1 - j];
    list.extend(std::iter::repeat_n(l.clone(), j));
    Ok(list)
}

/// `I_j(K, L)`; `I_j K` when `L` is the unit ball.
pub fn ith_intersection_body(
    k: &BodyExpr,
    l: &BodyExpr,
    j: usize,
    n: usize,
    inner_res: usize,
) -> Result<BodyExpr> {
    mixed_intersection_body(&ith_multiset(k, l, j, n)?, inner_res)
}

/// `W̃_i(I(K₁, …, K_{n-1})) = (1/n)∫ ṽ(K₁∩E_u, …)^{n-i} dS(u)` evaluated as a
/// double integral without building the intersection body.
pub fn querm_of_intersection_fused(
    bodies: &[BodyExpr],
    i: f64,
    outer: &SphereRule,
    inner_res: usize,
) -> Result<f64> {
    let n = outer.ambient_dim();
    if bodies.len() + 1 != n {
        return Err(Error::Dimension {
            expected: n - 1,
            got: bodies.len(),
        });
    }
    if !i.is_finite() {
        return Err(Error::param("index i must be finite"));
    }
    let intrinsic = crate::quadrature::cached_sphere_rule(n - 2, inner_res)?;
    let exponent = n as f64 - i;
    let total = integrate(outer, |u| {
        let sub = SubsphereRule::new(u, intrinsic.clone())?;
        Ok(power(section_integral(bodies, &sub)?, exponent))
    })?;
    Ok(total / n as f64)
}
