//! Monte Carlo estimators for the integral primitives.
//!
//! Points are normalized standard Gaussian vectors. Sample `k` belongs to
//! chunk `k / CHUNK`, and each chunk draws from its own ChaCha8 stream, so
//! an estimate depends only on `(seed, samples)`, not on thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{complete_frame, pairwise_sum, sphere_area};
use crate::starbody::BodyExpr;

/// Samples per generator stream.
pub const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    /// Standard deviation of the scaled samples divided by `√samples`.
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl McEstimate {
    /// Whether `x` lies within `k` standard errors of the estimate.
    pub fn brackets(&self, x: f64, k: f64) -> bool {
        (x - self.value).abs() <= k * self.stderr
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn gaussian_unit(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    loop {
        let mut norm2 = 0.0;
        for x in out.iter_mut() {
            *x = rng.sample(StandardNormal);
            norm2 += *x * *x;
        }
        if norm2 > 1e-300 {
            let inv = 1.0 / norm2.sqrt();
            out.iter_mut().for_each(|x| *x *= inv);
            return;
        }
    }
}

/// Mean and standard error of `f` over `samples` points drawn by `draw`.
///
/// Sums are taken of `f − f(first sample)` so a constant integrand has
/// exactly zero variance.
fn sample_mean<D, F>(dim: usize, samples: usize, seed: u64, draw: D, f: F) -> Result<(f64, f64)>
where
    D: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if samples < 2 {
        return Err(Error::param(format!("need at least 2 samples, got {samples}")));
    }
    let eval = |p: &[f64]| -> Result<f64> {
        let v = f(p)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                node: p.to_vec(),
                value: v,
            })
        }
    };
    let shift = {
        let mut rng = chunk_rng(seed, 0);
        let mut p = vec![0.0; dim];
        draw(&mut rng, &mut p);
        eval(&p)?
    };
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut p = vec![0.0; dim];
            let len = CHUNK.min(samples - c * CHUNK);
            let mut d = Vec::with_capacity(len);
            for _ in 0..len {
                draw(&mut rng, &mut p);
                d.push(eval(&p)? - shift);
            }
            let sq: Vec<f64> = d.iter().map(|x| x * x).collect();
            Ok((pairwise_sum(&d), pairwise_sum(&sq)))
        })
        .collect::<Result<_>>()?;
    let sums: Vec<f64> = partial.iter().map(|p| p.0).collect();
    let squares: Vec<f64> = partial.iter().map(|p| p.1).collect();
    let (s1, s2) = (pairwise_sum(&sums), pairwise_sum(&squares));
    let n = samples as f64;
    let variance = ((s2 - s1 * s1 / n) / (n - 1.0)).max(0.0);
    Ok((shift + s1 / n, (variance / n).sqrt()))
}

/// `∫_{S^m} f dS` estimated as `|S^m|` times the sample mean.
pub fn mc_sphere_integrate<F>(f: F, m: usize, samples: usize, seed: u64) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if m == 0 {
        return Err(Error::param("sphere dimension must be at least 1"));
    }
    let (mean, se) = sample_mean(m + 1, samples, seed, gaussian_unit, f)?;
    let area = sphere_area(m);
    Ok(McEstimate {
        value: area * mean,
        stderr: area * se,
        samples,
        seed,
    })
}

/// `(1/(n−1))∫_{S^{n−1}∩u^⊥} ∏_k ρ(K_k, w) dS(w)` with `n − 1` bodies.
pub fn mc_section_dual_mixed_volume(
    bodies: &[BodyExpr],
    u: &[f64],
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let n = u.len();
    if n < 3 {
        return Err(Error::param(format!("dimension must exceed 2, got {n}")));
    }
    if bodies.len() + 1 != n {
        return Err(Error::Dimension {
            expected: n - 1,
            got: bodies.len(),
        });
    }
    let (_, basis) = complete_frame(u)?;
    let draw = |rng: &mut ChaCha8Rng, out: &mut [f64]| {
        let mut coords = vec![0.0; n - 1];
        gaussian_unit(rng, &mut coords);
        out.iter_mut().for_each(|x| *x = 0.0);
        for (c, e) in coords.iter().zip(&basis) {
            for (o, ek) in out.iter_mut().zip(e) {
                *o += c * ek;
            }
        }
    };
    let f = |w: &[f64]| -> Result<f64> {
        let mut prod = 1.0;
        for b in bodies {
            prod *= b.radial(w)?;
        }
        Ok(prod)
    };
    let (mean, se) = sample_mean(n, samples, seed, draw, f)?;
    let scale = sphere_area(n - 2) / (n - 1) as f64;
    Ok(McEstimate {
        value: scale * mean,
        stderr: scale * se,
        samples,
        seed,
    })
}

/// `v(K ∩ E_u) = (1/(n−1))∫_{S^{n−1}∩u^⊥} ρ(K, w)^{n−1} dS(w)`.
pub fn mc_section_volume(k: &BodyExpr, u: &[f64], samples: usize, seed: u64) -> Result<McEstimate> {
    if u.len() < 3 {
        return Err(Error::param(format!("dimension must exceed 2, got {}", u.len())));
    }
    mc_section_dual_mixed_volume(&vec![k.clone(); u.len() - 1], u, samples, seed)
}

/// `Ṽ(K₁, …, K_n) = (1/n)∫ ∏ ρ(K_k, u) dS(u)` in `ℝ^n`, `n = bodies.len()`.
pub fn mc_dual_mixed_volume(bodies: &[BodyExpr], samples: usize, seed: u64) -> Result<McEstimate> {
    let n = bodies.len();
    if n < 2 {
        return Err(Error::param("need at least two bodies"));
    }
    let est = mc_sphere_integrate(
        |u| {
            let mut prod = 1.0;
            for b in bodies {
                prod *= b.radial(u)?;
            }
            Ok(prod)
        },
        n - 1,
        samples,
        seed,
    )?;
    Ok(McEstimate {
        value: est.value / n as f64,
        stderr: est.stderr / n as f64,
        ..est
    })
}

/// One fixture line: which integral, its inputs, and the estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub integral: String,
    pub inputs: serde_json::Value,
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl FixtureRecord {
    pub fn new(integral: &str, inputs: serde_json::Value, est: &McEstimate) -> Self {
        FixtureRecord {
            integral: integral.to_string(),
            inputs,
            value: est.value,
            stderr: est.stderr,
            samples: est.samples,
            seed: est.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_integrand_is_exact() {
        for seed in [0, 1, 99] {
            let e = mc_sphere_integrate(|_| Ok(1.0), 2, 5000, seed).unwrap();
            assert_eq!(e.value, 4.0 * PI);
            assert_eq!(e.stderr, 0.0);
        }
    }

    #[test]
    fn symmetry_value() {
        let e = mc_sphere_integrate(|u| Ok(u[0] * u[0]), 2, 200_000, 5).unwrap();
        assert!(e.brackets(4.0 * PI / 3.0, 4.0), "{e:?}");
    }

    #[test]
    fn ball_sections_have_zero_variance() {
        let u = [0.6, 0.0, 0.8];
        let e = mc_section_volume(&BodyExpr::unit_ball(), &u, 3000, 1).unwrap();
        assert!((e.value - PI).abs() < 1e-14);
        assert_eq!(e.stderr, 0.0);
        let e = mc_section_volume(&BodyExpr::ball(2.0).unwrap(), &u, 3000, 1).unwrap();
        assert!((e.value - 4.0 * PI).abs() < 1e-13);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn dual_mixed_volume_values() {
        let b = BodyExpr::unit_ball();
        let e = mc_dual_mixed_volume(&[b.clone(), b.clone(), BodyExpr::ball(2.0).unwrap()], 4000, 3).unwrap();
        assert!((e.value - 8.0 * PI / 3.0).abs() < 1e-13);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn section_samples_lie_in_the_hyperplane() {
        let u = [1.0 / 3f64.sqrt(); 3];
        let probe = |w: &[f64]| -> Result<f64> {
            let dot: f64 = w.iter().zip(&u).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-12);
            Ok(1.0)
        };
        let (_, basis) = complete_frame(&u).unwrap();
        let draw = |rng: &mut ChaCha8Rng, out: &mut [f64]| {
            let mut c = vec![0.0; 2];
            gaussian_unit(rng, &mut c);
            for k in 0..3 {
                out[k] = c[0] * basis[0][k] + c[1] * basis[1][k];
            }
        };
        sample_mean(3, 500, 0, draw, probe).unwrap();
    }

    #[test]
    fn estimates_are_deterministic_and_chunk_independent() {
        let f = |u: &[f64]| Ok(u[2].exp());
        let a = mc_sphere_integrate(f, 2, 10_000, 11).unwrap();
        let b = mc_sphere_integrate(f, 2, 10_000, 11).unwrap();
        assert_eq!(a, b);
        let c = mc_sphere_integrate(f, 2, 10_000, 12).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn errors() {
        assert!(mc_sphere_integrate(|_| Ok(1.0), 2, 1, 0).is_err());
        assert!(matches!(
            mc_sphere_integrate(|_| Ok(f64::NAN), 2, 10, 0),
            Err(Error::Evaluation { .. })
        ));
        assert!(mc_section_volume(&BodyExpr::unit_ball(), &[1.0, 1.0, 0.0], 10, 0).is_err());
    }
}
