//! Star bodies as immutable expression trees.
//!
//! [`BodyExpr::radial`] is the only place radial functions are evaluated.
//! Leaves carry closed-form radial functions; interior nodes implement the
//! radial Minkowski combination and dilation; intersection-body leaves are
//! computed on demand from central sections.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::intersect;
use crate::quadrature::SphereRule;

/// One term `c · (u·v)^{2m}` of a [`BodyNode::Bump`] radial function.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpTerm {
    pub coeff: f64,
    pub direction: Vec<f64>,
    /// Half of the (even) exponent.
    pub half_power: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BodyNode {
    Ball {
        radius: f64,
    },
    /// `ρ(u) = (Σ u_k² / a_k²)^{-1/2}`
    Ellipsoid {
        axes: Vec<f64>,
    },
    /// `ρ(u) = s · (Σ |u_k|^p)^{-1/p}`
    LpBall {
        p: f64,
        scale: f64,
    },
    /// `ρ(u) = c₀ + Σ c_k (u·v_k)^{2m_k}`
    Bump {
        base: f64,
        terms: Vec<BumpTerm>,
    },
    /// `λK +̃ μL`
    Combination {
        lambda: f64,
        first: BodyExpr,
        mu: f64,
        second: BodyExpr,
    },
    Dilate {
        factor: f64,
        body: BodyExpr,
    },
    /// Mixed intersection body `I(K₁, …, K_{n-1})`.
    Intersection {
        bodies: Vec<BodyExpr>,
        inner_res: usize,
    },
}

/// Immutable, cheaply clonable star body.
#[derive(Clone, PartialEq)]
pub struct BodyExpr(Arc<BodyNode>);

impl fmt::Debug for BodyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be positive and finite, got {value}")))
    }
}

fn norm(u: &[f64]) -> f64 {
    u.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl BodyExpr {
    fn wrap(node: BodyNode) -> Self {
        BodyExpr(Arc::new(node))
    }

    pub fn node(&self) -> &BodyNode {
        &self.0
    }

    /// The unit ball `B`.
    pub fn unit_ball() -> Self {
        Self::wrap(BodyNode::Ball { radius: 1.0 })
    }

    pub fn ball(radius: f64) -> Result<Self> {
        positive("ball radius", radius)?;
        Ok(Self::wrap(BodyNode::Ball { radius }))
    }

    pub fn ellipsoid(axes: &[f64]) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::param("ellipsoid needs at least one semiaxis"));
        }
        for &a in axes {
            positive("ellipsoid semiaxis", a)?;
        }
        Ok(Self::wrap(BodyNode::Ellipsoid {
            axes: axes.to_vec(),
        }))
    }

    pub fn lp_ball(p: f64, scale: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::param(format!("lp-ball exponent must be >= 1, got {p}")));
        }
        positive("lp-ball scale", scale)?;
        Ok(Self::wrap(BodyNode::LpBall { p, scale }))
    }

    /// Bump body; every coefficient must be non-negative and the base positive.
    pub fn bump(base: f64, terms: Vec<BumpTerm>) -> Result<Self> {
        positive("bump base", base)?;
        let dim = terms.first().map(|t| t.direction.len());
        for t in &terms {
            if !(t.coeff >= 0.0) || !t.coeff.is_finite() {
                return Err(Error::param(format!(
                    "bump coefficient must be non-negative, got {}",
                    t.coeff
                )));
            }
            if t.half_power == 0 {
                return Err(Error::param("bump exponent 2m needs m >= 1"));
            }
            if t.direction.is_empty() || Some(t.direction.len()) != dim {
                return Err(Error::param("bump directions must share one non-zero dimension"));
            }
            if t.direction.iter().any(|x| !x.is_finite()) {
                return Err(Error::param("bump direction must be finite"));
            }
        }
        Ok(Self::wrap(BodyNode::Bump { base, terms }))
    }

    /// Mixed intersection body leaf of `n − 1` bodies in `ℝ^n`.
    pub fn intersection_of(bodies: Vec<BodyExpr>, inner_res: usize) -> Result<Self> {
        if bodies.len() < 2 {
            return Err(Error::param(
                "a mixed intersection body needs n - 1 >= 2 bodies",
            ));
        }
        if inner_res < 1 {
            return Err(Error::param("inner resolution must be >= 1"));
        }
        let n = bodies.len() + 1;
        for b in &bodies {
            if let Some(d) = b.dimension() {
                if d != n {
                    return Err(Error::Dimension { expected: n, got: d });
                }
            }
        }
        Ok(Self::wrap(BodyNode::Intersection { bodies, inner_res }))
    }

    /// Intrinsic dimension, when the expression fixes one.
    pub fn dimension(&self) -> Option<usize> {
        match self.node() {
            BodyNode::Ball { .. } | BodyNode::LpBall { .. } => None,
            BodyNode::Ellipsoid { axes } => Some(axes.len()),
            BodyNode::Bump { terms, .. } => terms.first().map(|t| t.direction.len()),
            BodyNode::Combination { first, second, .. } => {
                first.dimension().or_else(|| second.dimension())
            }
            BodyNode::Dilate { body, .. } => body.dimension(),
            BodyNode::Intersection { bodies, .. } => Some(bodies.len() + 1),
        }
    }

    /// `ρ(K, u)` for a unit vector `u`.
    pub fn radial(&self, u: &[f64]) -> Result<f64> {
        let len = norm(u);
        if (len - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("direction must be a unit vector, |u| = {len}")));
        }
        let value = self.radial_unchecked(u)?;
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(Error::StarBody {
                direction: u.to_vec(),
                value,
            })
        }
    }

    pub(crate) fn radial_unchecked(&self, u: &[f64]) -> Result<f64> {
        match self.node() {
            BodyNode::Ball { radius } => Ok(*radius),
            BodyNode::Ellipsoid { axes } => {
                check_dim(axes.len(), u.len())?;
                let q: f64 = u.iter().zip(axes).map(|(x, a)| (x / a) * (x / a)).sum();
                Ok(1.0 / q.sqrt())
            }
            BodyNode::LpBall { p, scale } => {
                let s: f64 = if *p == 1.0 {
                    u.iter().map(|x| x.abs()).sum()
                } else {
                    u.iter().map(|x| x.abs().powf(*p)).sum()
                };
                Ok(scale * s.powf(-1.0 / p))
            }
            BodyNode::Bump { base, terms } => {
                let mut value = *base;
                for t in terms {
                    check_dim(t.direction.len(), u.len())?;
                    let d: f64 = u.iter().zip(&t.direction).map(|(x, v)| x * v).sum();
                    value += t.coeff * (d * d).powi(t.half_power as i32);
                }
                Ok(value)
            }
            BodyNode::Combination {
                lambda,
                first,
                mu,
                second,
            } => Ok(lambda * first.radial_unchecked(u)? + mu * second.radial_unchecked(u)?),
            BodyNode::Dilate { factor, body } => Ok(factor * body.radial_unchecked(u)?),
            BodyNode::Intersection { bodies, inner_res } => {
                check_dim(bodies.len() + 1, u.len())?;
                intersect::section_mixed_volume_at(bodies, u, *inner_res)
            }
        }
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

/// `ρ(K, u)`; see [`BodyExpr::radial`].
pub fn eval_radial(body: &BodyExpr, u: &[f64]) -> Result<f64> {
    body.radial(u)
}

/// Radial Minkowski combination `λK +̃ μL`.
pub fn radial_combine(lambda: f64, first: &BodyExpr, mu: f64, second: &BodyExpr) -> Result<BodyExpr> {
    for (name, c) in [("lambda", lambda), ("mu", mu)] {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::param(format!("{name} must be non-negative, got {c}")));
        }
    }
    if lambda == 0.0 && mu == 0.0 {
        return Err(Error::Degenerate(
            "radial combination with both coefficients zero".into(),
        ));
    }
    if let (Some(a), Some(b)) = (first.dimension(), second.dimension()) {
        check_dim(a, b)?;
    }
    Ok(BodyExpr::wrap(BodyNode::Combination {
        lambda,
        first: first.clone(),
        mu,
        second: second.clone(),
    }))
}

/// Dilate `λK`, `λ > 0`.
pub fn dilate(factor: f64, body: &BodyExpr) -> Result<BodyExpr> {
    positive("dilation factor", factor)?;
    Ok(BodyExpr::wrap(BodyNode::Dilate {
        factor,
        body: body.clone(),
    }))
}

/// Outcome of [`validate_star_body`].
#[derive(Debug, Clone, PartialEq)]
pub struct StarBodyReport {
    pub min_radial: f64,
    pub argmin: Vec<f64>,
    pub valid: bool,
}

/// Minimum of `ρ(K, ·)` over the nodes of `rule`.
///
/// A non-positive radial value is reported, not raised.
pub fn validate_star_body(body: &BodyExpr, rule: &SphereRule) -> Result<StarBodyReport> {
    if let Some(d) = body.dimension() {
        check_dim(d, rule.ambient_dim())?;
    }
    let mut report = StarBodyReport {
        min_radial: f64::INFINITY,
        argmin: Vec::new(),
        valid: true,
    };
    for u in rule.nodes() {
        let value = match body.radial(u) {
            Ok(v) => v,
            Err(Error::StarBody { value, .. }) => value,
            Err(e) => return Err(e),
        };
        if !(value >= report.min_radial) {
            report.min_radial = value;
            report.argmin = u.to_vec();
        }
    }
    report.valid = report.min_radial > 0.0 && report.min_radial.is_finite();
    Ok(report)
}

/// Relative spread below which two radial functions count as proportional.
pub const DILATE_RATIO_TOL: f64 = 1e-9;

/// Whether all bodies are dilates of one another, judged by the spread of
/// `ρ(K_k, u) / ρ(K_0, u)` over the nodes of `rule`.
pub fn are_mutual_dilates(bodies: &[BodyExpr], rule: &SphereRule) -> Result<bool> {
    let Some((reference, rest)) = bodies.split_first() else {
        return Ok(true);
    };
    let base: Vec<f64> = rule
        .nodes()
        .map(|u| reference.radial(u))
        .collect::<Result<_>>()?;
    for body in rest {
        if body == reference {
            continue;
        }
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for (u, b) in rule.nodes().zip(&base) {
            let ratio = body.radial(u)? / b;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        if hi / lo - 1.0 > DILATE_RATIO_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Dimension and indices shared by the inequality checkers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalParams {
    pub n: usize,
    pub i: f64,
    pub j: usize,
    pub r: usize,
    pub alpha: f64,
}

impl GlobalParams {
    pub fn new(n: usize) -> Result<Self> {
        if n <= 2 {
            return Err(Error::param(format!("dimension must exceed 2, got {n}")));
        }
        Ok(GlobalParams {
            n,
            i: 0.0,
            j: 1,
            r: 1,
            alpha: 1.0,
        })
    }

    /// `0 ≤ i < n`
    pub fn check_i(&self) -> Result<()> {
        if self.i >= 0.0 && self.i < self.n as f64 {
            Ok(())
        } else {
            Err(Error::param(format!("need 0 <= i < n, got i = {}", self.i)))
        }
    }

    /// `0 < j < n − 1`
    pub fn check_j_interior(&self) -> Result<()> {
        if self.j > 0 && self.j + 1 < self.n {
            Ok(())
        } else {
            Err(Error::param(format!("need 0 < j < n - 1, got j = {}", self.j)))
        }
    }

    /// `0 < r ≤ n − 1`
    pub fn check_r(&self) -> Result<()> {
        if self.r > 0 && self.r < self.n {
            Ok(())
        } else {
            Err(Error::param(format!("need 0 < r <= n - 1, got r = {}", self.r)))
        }
    }

    /// `0 ≤ α ≤ 1`
    pub fn check_alpha(&self) -> Result<()> {
        if (0.0..=1.0).contains(&self.alpha) {
            Ok(())
        } else {
            Err(Error::param(format!("need 0 <= alpha <= 1, got {}", self.alpha)))
        }
    }
}
