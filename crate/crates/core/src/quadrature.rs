//! Deterministic quadrature on unit spheres and on great subspheres.
//!
//! A rule on `S^m ⊂ ℝ^{m+1}` is built recursively: a point of `S^m` is
//! `(sin θ · p, cos θ)` with `p ∈ S^{m-1}`, and the polar angle carries the
//! weight `sin^{m-1} θ`. Substituting `t = cos θ` turns that weight into
//! `(1 - t²)^{(m-2)/2}`, for which the Gauss rule is Gauss–Legendre when
//! `m = 2` and Gauss–Gegenbauer in general. The circle `S^1` gets the
//! uniform (trapezoidal) rule with `2·res` points.
//!
//! All reductions go through [`pairwise_sum`] over values collected in node
//! order, so results do not depend on how many threads evaluated the
//! integrand.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rules with at least this many nodes evaluate the integrand in parallel.
const PAR_THRESHOLD: usize = 2048;

/// Relative rounding floor applied to every error estimate.
pub const ROUNDING_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Fixed-shape pairwise (tree) summation.
///
/// The association order depends only on `values.len()`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Surface area `|S^m| = 2π^{(m+1)/2} / Γ((m+1)/2)`.
pub fn sphere_area(m: usize) -> f64 {
    // |S^m| = 2π/(m-1) · |S^{m-2}|
    let mut area = if m.is_multiple_of(2) { 2.0 } else { 2.0 * PI };
    let mut k = if m.is_multiple_of(2) { 0 } else { 1 };
    while k < m {
        k += 2;
        area *= 2.0 * PI / (k as f64 - 1.0);
    }
    area
}

/// `∫_0^π sin^k θ dθ`.
fn sine_power_integral(k: usize) -> f64 {
    let mut value = if k.is_multiple_of(2) { PI } else { 2.0 };
    let mut j = if k.is_multiple_of(2) { 0 } else { 1 };
    while j < k {
        j += 2;
        value *= (j as f64 - 1.0) / j as f64;
    }
    value
}

/// Gauss rule for the weight `(1 - t²)^a` on `[-1, 1]` via Golub–Welsch.
///
/// `a = 0` is Gauss–Legendre. Nodes are returned in increasing order and
/// symmetrized so that `t_k = -t_{N-1-k}` holds exactly.
fn gauss_gegenbauer(points: usize, a: f64, total_mass: f64) -> (Vec<f64>, Vec<f64>) {
    if points == 1 {
        return (vec![0.0], vec![total_mass]);
    }
    let mut jacobi = DMatrix::<f64>::zeros(points, points);
    for j in 1..points {
        let jf = j as f64;
        let beta = jf * (jf + 2.0 * a) / ((2.0 * jf + 2.0 * a - 1.0) * (2.0 * jf + 2.0 * a + 1.0));
        let off = beta.sqrt();
        jacobi[(j, j - 1)] = off;
        jacobi[(j - 1, j)] = off;
    }
    let eigen = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..points)
        .map(|k| {
            let v0 = eigen.eigenvectors[(0, k)];
            (eigen.eigenvalues[k], total_mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut nodes = vec![0.0; points];
    let mut weights = vec![0.0; points];
    for k in 0..points {
        let mirror = points - 1 - k;
        nodes[k] = 0.5 * (pairs[k].0 - pairs[mirror].0);
        weights[k] = 0.5 * (pairs[k].1 + pairs[mirror].1);
    }
    if points % 2 == 1 {
        nodes[points / 2] = 0.0;
    }
    (nodes, weights)
}

/// Quadrature rule on the unit sphere `S^m ⊂ ℝ^{m+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    m: usize,
    resolution: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    /// Sphere dimension `m`.
    pub fn sphere_dim(&self) -> usize {
        self.m
    }

    /// Dimension of the ambient space, `m + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.m + 1
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, k: usize) -> &[f64] {
        let d = self.ambient_dim();
        &self.nodes[k * d..(k + 1) * d]
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.ambient_dim())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }
}

/// Builds the product rule on `S^m` at the given resolution.
///
/// `m = 1` yields `2·res` equally spaced points; `m ≥ 2` uses `res` polar
/// points per polar angle and `2·res` azimuthal points.
pub fn build_sphere_rule(m: usize, resolution: usize) -> Result<SphereRule> {
    if m < 1 {
        return Err(Error::param(format!("sphere dimension must be >= 1, got {m}")));
    }
    if resolution < 1 {
        return Err(Error::param("resolution must be >= 1"));
    }
    let count = 2 * resolution;
    let step = 2.0 * PI / count as f64;
    let mut nodes = Vec::with_capacity(2 * count);
    for k in 0..count {
        let phi = step * k as f64;
        nodes.push(phi.cos());
        nodes.push(phi.sin());
    }
    let mut rule = SphereRule {
        m: 1,
        resolution,
        nodes,
        weights: vec![step; count],
    };
    for dim in 2..=m {
        rule = lift(&rule, dim, resolution);
    }
    Ok(rule)
}

/// Extends a rule on `S^{dim-1}` to `S^dim` with a polar factor.
fn lift(base: &SphereRule, dim: usize, resolution: usize) -> SphereRule {
    let power = dim - 1;
    let (ts, ws) = gauss_gegenbauer(
        resolution,
        (power as f64 - 1.0) / 2.0,
        sine_power_integral(power),
    );
    let base_dim = base.ambient_dim();
    let mut nodes = Vec::with_capacity(ts.len() * base.len() * (base_dim + 1));
    let mut weights = Vec::with_capacity(ts.len() * base.len());
    for (&t, &w) in ts.iter().zip(&ws) {
        let s = (1.0 - t * t).sqrt();
        for (p, &wp) in base.nodes().zip(base.weights()) {
            nodes.extend(p.iter().map(|x| s * x));
            nodes.push(t);
            weights.push(w * wp);
        }
    }
    SphereRule {
        m: dim,
        resolution,
        nodes,
        weights,
    }
}

/// Shared, lazily built rules keyed by `(m, resolution)`.
pub fn cached_sphere_rule(m: usize, resolution: usize) -> Result<Arc<SphereRule>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<SphereRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&(m, resolution)) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(build_sphere_rule(m, resolution)?);
    let mut guard = cache.lock().expect("rule cache poisoned");
    Ok(Arc::clone(guard.entry((m, resolution)).or_insert(rule)))
}

/// Weighted sum of `f` over the nodes of `rule`.
///
/// Any non-finite value of `f` aborts with [`Error::Evaluation`] naming the
/// node; errors returned by `f` are propagated unchanged.
pub fn integrate<F>(rule: &SphereRule, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    weighted_sum(&rule.nodes, rule.ambient_dim(), rule.weights(), f)
}

fn weighted_sum<F>(flat: &[f64], dim: usize, weights: &[f64], f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let eval = |(node, &w): (&[f64], &f64)| -> Result<f64> {
        let value = f(node)?;
        if !value.is_finite() {
            return Err(Error::Evaluation {
                node: node.to_vec(),
                value,
            });
        }
        Ok(w * value)
    };
    let terms: Vec<f64> = if weights.len() >= PAR_THRESHOLD {
        flat.par_chunks_exact(dim)
            .zip(weights.par_iter())
            .map(eval)
            .collect::<Result<_>>()?
    } else {
        flat.chunks_exact(dim)
            .zip(weights.iter())
            .map(eval)
            .collect::<Result<_>>()?
    };
    Ok(pairwise_sum(&terms))
}

/// A value computed at resolution `r` together with `|I(r) − I(r/2)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            self.error
        } else {
            self.error / self.value.abs()
        }
    }
}

/// Evaluates `eval` at `resolution` and `resolution / 2`.
///
/// The error is floored at [`ROUNDING_FLOOR`] relative to the fine value,
/// since two rules can agree to the last bit while both carry rounding error.
pub fn estimate_with_error<F>(eval: F, resolution: usize) -> Result<Estimate>
where
    F: Fn(usize) -> Result<f64>,
{
    if resolution < 2 {
        return Err(Error::param("error estimation needs resolution >= 2"));
    }
    let fine = eval(resolution)?;
    let coarse = eval(resolution / 2)?;
    let error = (fine - coarse).abs().max(ROUNDING_FLOOR * fine.abs());
    Ok(Estimate { value: fine, error })
}

/// Practical error estimate `|I(r) − I(r/2)|` of an integrand family.
pub fn estimate_rule_error<F>(eval: F, resolution: usize) -> Result<f64>
where
    F: Fn(usize) -> Result<f64>,
{
    estimate_with_error(eval, resolution).map(|e| e.error)
}

/// Quadrature rule on the great subsphere `S^{n-1} ∩ E_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsphereRule {
    u: Vec<f64>,
    basis: Vec<Vec<f64>>,
    intrinsic: Arc<SphereRule>,
    nodes: Vec<f64>,
}

impl SubsphereRule {
    /// Embeds an intrinsic rule on `S^{n-2}` into `E_u`.
    pub fn new(u: &[f64], intrinsic: Arc<SphereRule>) -> Result<Self> {
        let n = u.len();
        if intrinsic.ambient_dim() + 1 != n {
            return Err(Error::Dimension {
                expected: n - 1,
                got: intrinsic.ambient_dim(),
            });
        }
        let (u, basis) = complete_frame(u)?;
        let mut nodes = Vec::with_capacity(intrinsic.len() * n);
        for p in intrinsic.nodes() {
            let start = nodes.len();
            nodes.resize(start + n, 0.0);
            let w = &mut nodes[start..];
            for (coef, b) in p.iter().zip(&basis) {
                for (wk, bk) in w.iter_mut().zip(b) {
                    *wk += coef * bk;
                }
            }
        }
        Ok(SubsphereRule {
            u,
            basis,
            intrinsic,
            nodes,
        })
    }

    pub fn direction(&self) -> &[f64] {
        &self.u
    }

    pub fn ambient_dim(&self) -> usize {
        self.u.len()
    }

    /// Orthonormal basis of `E_u`.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// The intrinsic rule on `S^{n-2}` before embedding.
    pub fn intrinsic(&self) -> &SphereRule {
        &self.intrinsic
    }

    pub fn len(&self) -> usize {
        self.intrinsic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intrinsic.is_empty()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.ambient_dim())
    }

    pub fn weights(&self) -> &[f64] {
        self.intrinsic.weights()
    }

    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        weighted_sum(&self.nodes, self.ambient_dim(), self.weights(), f)
    }
}

/// Builds the subsphere rule for direction `u` in `ℝ^n`.
pub fn build_subsphere_rule(u: &[f64], n: usize, resolution: usize) -> Result<SubsphereRule> {
    if n < 3 {
        return Err(Error::param(format!("subsphere rules need n >= 3, got {n}")));
    }
    if u.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: u.len(),
        });
    }
    SubsphereRule::new(u, cached_sphere_rule(n - 2, resolution)?)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Completes `u` to an orthonormal frame `{u, b_1, .., b_{n-1}}`.
///
/// Gram–Schmidt runs over the standard basis vectors in index order,
/// skipping the one most parallel to `u` (lowest index on ties). The frame
/// for `-u` is identical to the frame for `u`.
pub fn complete_frame(u: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = u.len();
    let norm = dot(u, u).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::param("direction must be a non-zero finite vector"));
    }
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!(
            "direction must be a unit vector, |u| = {norm}"
        )));
    }
    let u: Vec<f64> = u.iter().map(|x| x / norm).collect();
    let skip = (0..n)
        .fold((0, -1.0), |(best, mag), k| {
            if u[k].abs() > mag {
                (k, u[k].abs())
            } else {
                (best, mag)
            }
        })
        .0;

    let mut frame: Vec<Vec<f64>> = vec![u.clone()];
    for k in (0..n).filter(|&k| k != skip) {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for b in &frame {
                let c = dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let len = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= len);
        frame.push(v);
    }
    let basis = frame.split_off(1);
    Ok((u, basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sphere_areas() {
        assert_abs_diff_eq!(sphere_area(1), 2.0 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(sphere_area(2), 4.0 * PI, epsilon = 1e-14);
        assert_abs_diff_eq!(sphere_area(3), 2.0 * PI * PI, epsilon = 1e-14);
        assert_abs_diff_eq!(sphere_area(4), 8.0 * PI * PI / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn weight_sums_match_areas() {
        let r = build_sphere_rule(2, 16).unwrap();
        assert_abs_diff_eq!(r.total_weight(), 4.0 * PI, epsilon = 1e-10);
        let r = build_sphere_rule(1, 16).unwrap();
        assert_abs_diff_eq!(r.total_weight(), 2.0 * PI, epsilon = 1e-10);
        let r = build_sphere_rule(3, 8).unwrap();
        assert_abs_diff_eq!(r.total_weight(), 2.0 * PI * PI, epsilon = 1e-8);
    }

    #[test]
    fn invariants_hold_across_dimensions() {
        for m in 1..=5 {
            for res in [1, 2, 3, 6] {
                let rule = build_sphere_rule(m, res).unwrap();
                let area = sphere_area(m);
                assert!((rule.total_weight() - area).abs() <= 1e-10 * area, "m={m} res={res}");
                assert!(rule.weights().iter().all(|&w| w > 0.0));
                for node in rule.nodes() {
                    assert!((dot(node, node).sqrt() - 1.0).abs() <= 1e-12);
                }
                for axis in 0..=m {
                    let first: f64 = rule
                        .nodes()
                        .zip(rule.weights())
                        .map(|(p, w)| w * p[axis])
                        .sum();
                    assert!(first.abs() <= 1e-10, "m={m} res={res} axis={axis}");
                }
            }
        }
    }

    #[test]
    fn node_counts_grow() {
        assert_eq!(build_sphere_rule(1, 16).unwrap().len(), 32);
        assert_eq!(build_sphere_rule(2, 16).unwrap().len(), 16 * 32);
        assert_eq!(build_sphere_rule(3, 4).unwrap().len(), 4 * 4 * 8);
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(build_sphere_rule(0, 4), Err(Error::Parameter(_))));
        assert!(matches!(build_sphere_rule(2, 0), Err(Error::Parameter(_))));
        assert!(matches!(
            build_subsphere_rule(&[0.0, 0.0, 0.0], 3, 4),
            Err(Error::Parameter(_))
        ));
        assert!(build_subsphere_rule(&[1.0, 0.0], 2, 4).is_err());
    }

    #[test]
    fn integrate_simple_functions() {
        let rule = build_sphere_rule(2, 16).unwrap();
        assert_abs_diff_eq!(integrate(&rule, |_| Ok(1.0)).unwrap(), 4.0 * PI, epsilon = 1e-10);
        assert_abs_diff_eq!(
            integrate(&rule, |u| Ok(u[0] * u[0])).unwrap(),
            4.0 * PI / 3.0,
            epsilon = 1e-8
        );
    }

    #[test]
    fn integrate_reports_nonfinite_node() {
        let rule = build_sphere_rule(2, 4).unwrap();
        let err = integrate(&rule, |u| Ok(if u[2] > 0.5 { f64::NAN } else { 1.0 })).unwrap_err();
        match err {
            Error::Evaluation { node, .. } => assert!(node[2] > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parallel_and_sequential_paths_agree() {
        // 2·32·64 = 4096 nodes crosses the parallel threshold
        let rule = build_sphere_rule(2, 32).unwrap();
        let f = |u: &[f64]| Ok((u[0] + 2.0 * u[2]).exp());
        let par = integrate(&rule, f).unwrap();
        let seq = pairwise_sum(
            &rule
                .nodes()
                .zip(rule.weights())
                .map(|(u, w)| w * f(u).unwrap())
                .collect::<Vec<_>>(),
        );
        assert_eq!(par.to_bits(), seq.to_bits());
    }

    #[test]
    fn subsphere_examples() {
        let sub = build_subsphere_rule(&[0.0, 0.0, 1.0], 3, 16).unwrap();
        assert_eq!(sub.len(), 32);
        for w in sub.nodes() {
            assert!(w[2].abs() <= 1e-15);
            assert!((dot(w, w) - 1.0).abs() <= 1e-12);
        }
        assert_abs_diff_eq!(pairwise_sum(sub.weights()), 2.0 * PI, epsilon = 1e-12);

        let s = 1.0 / 3f64.sqrt();
        let sub = build_subsphere_rule(&[s, s, s], 3, 16).unwrap();
        for w in sub.nodes() {
            assert!(dot(w, sub.direction()).abs() <= 1e-12);
        }

        let sub = build_subsphere_rule(&[1.0, 0.0, 0.0, 0.0], 4, 8).unwrap();
        assert_abs_diff_eq!(pairwise_sum(sub.weights()), 4.0 * PI, epsilon = 1e-10);
    }

    #[test]
    fn frame_is_orthonormal_and_sign_invariant() {
        let u = [0.3, -0.5, 0.1, 0.8];
        let norm = dot(&u, &u).sqrt();
        let u: Vec<f64> = u.iter().map(|x| x / norm).collect();
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let (uu, basis) = complete_frame(&u).unwrap();
        for (a, b) in basis.iter().enumerate() {
            assert!(dot(b, &uu).abs() <= 1e-12);
            for c in &basis[a..] {
                let expected = if std::ptr::eq(b, c) { 1.0 } else { 0.0 };
                assert!((dot(b, c) - expected).abs() <= 1e-12);
            }
        }
        let (_, neg_basis) = complete_frame(&neg).unwrap();
        assert_eq!(basis, neg_basis);
    }

    #[test]
    fn constant_error_estimate_is_tiny() {
        let est = estimate_rule_error(
            |res| integrate(&build_sphere_rule(2, res)?, |_| Ok(1.0)),
            16,
        )
        .unwrap();
        assert!(est <= 1e-12);
    }
}
