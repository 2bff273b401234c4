//! Seeded random generators for the test body family: balls, dilates,
//! ellipsoids, `ℓ_p` balls and bumps.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::starbody::{dilate, BodyExpr, BumpTerm};

/// Range of radii, axes, scales and dilation factors.
pub const SCALE_RANGE: (f64, f64) = (0.5, 2.0);

/// Exponents used for `ℓ_p` balls.
pub const LP_EXPONENTS: [f64; 3] = [1.0, 1.5, 3.0];

/// Largest bump coefficient.
pub const MAX_BUMP_COEFF: f64 = 0.3;

fn scale<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(SCALE_RANGE.0..=SCALE_RANGE.1)
}

/// Uniform random unit vector in `ℝ^n`.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn random_ball<R: Rng + ?Sized>(rng: &mut R) -> Result<BodyExpr> {
    BodyExpr::ball(scale(rng))
}

pub fn random_ellipsoid<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<BodyExpr> {
    let axes: Vec<f64> = (0..n).map(|_| scale(rng)).collect();
    BodyExpr::ellipsoid(&axes)
}

pub fn random_lp_ball<R: Rng + ?Sized>(rng: &mut R) -> Result<BodyExpr> {
    let p = *LP_EXPONENTS.choose(rng).expect("non-empty");
    BodyExpr::lp_ball(p, scale(rng))
}

/// `1 + Σ c_k |u·v_k|^{2m_k}` with one or two terms.
pub fn random_bump<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<BodyExpr> {
    let count = rng.random_range(1..=2);
    let terms = (0..count)
        .map(|_| BumpTerm {
            coeff: rng.random_range(0.0..=MAX_BUMP_COEFF),
            direction: random_unit(rng, n),
            half_power: rng.random_range(1..=2),
        })
        .collect();
    BodyExpr::bump(1.0, terms)
}

/// One body drawn uniformly from the four generator kinds.
pub fn random_body<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<BodyExpr> {
    match rng.random_range(0..4) {
        0 => random_ball(rng),
        1 => random_ellipsoid(rng, n),
        2 => random_lp_ball(rng),
        _ => random_bump(rng, n),
    }
}

/// `count` bodies; each after the first is, with probability 1/4, a dilate
/// of an earlier one.
pub fn random_tuple<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize) -> Result<Vec<BodyExpr>> {
    let mut out: Vec<BodyExpr> = Vec::with_capacity(count);
    for k in 0..count {
        let body = if k > 0 && rng.random_bool(0.25) {
            let base = out[rng.random_range(0..k)].clone();
            dilate(scale(rng), &base)?
        } else {
            random_body(rng, n)?
        };
        out.push(body);
    }
    Ok(out)
}

/// `count` mutual dilates of one random body.
pub fn dilate_tuple<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize) -> Result<Vec<BodyExpr>> {
    let base = random_body(rng, n)?;
    let mut out = vec![base.clone()];
    for _ in 1..count {
        out.push(dilate(scale(rng), &base)?);
    }
    Ok(out)
}
