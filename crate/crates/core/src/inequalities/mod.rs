//! Numerical certificates for the dual-volume inequalities of mixed
//! intersection bodies.
//!
//! Every checker orients its inequality as `lhs ≤ rhs` and reports
//! `slack = rhs − lhs` together with `rel_slack = slack / max(|lhs|, |rhs|)`.
//! Tolerances are relative: a check fails iff `rel_slack < −tol`, and an
//! expected equality is confirmed iff `|rel_slack| ≤ tol`.
//!
//! Under [`TolerancePolicy::Auto`] every constituent integral is evaluated at
//! the configured resolution and at half of it; each side's relative error
//! is the exponent-weighted sum of its constituents' relative errors, and
//! `tol` is ten times the larger of the two.

pub mod search;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dualvol::{dual_mixed_volume, power_product};
use crate::error::{Error, Result};
use crate::intersect::{ith_multiset, querm_of_intersection_fused};
use crate::quadrature::{cached_sphere_rule, SphereRule, ROUNDING_FLOOR};
use crate::starbody::{are_mutual_dilates, dilate, radial_combine, BodyExpr, GlobalParams};

/// Multiplier from measured quadrature error to tolerance.
pub const AUTO_TOL_FACTOR: f64 = 10.0;

/// Relative tolerance of the scalar inequality (no quadrature involved).
pub const LEMMA_C_TOL: f64 = 1e-12;

/// Resolution of the reference rule used to detect dilates.
const DILATE_PROBE_RES: usize = 6;

/// The inequalities that can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    LemmaC,
    DualAfVolumes,
    MinkowskiMixed,
    QuermSumMinkowski,
    AfIntersection,
    AfProduct,
    AfHybrid,
    BrunnMinkowski,
    BmCorollary,
    StrengthenedForm,
}

impl CheckKind {
    pub const ALL: [CheckKind; 10] = [
        CheckKind::LemmaC,
        CheckKind::DualAfVolumes,
        CheckKind::MinkowskiMixed,
        CheckKind::QuermSumMinkowski,
        CheckKind::AfIntersection,
        CheckKind::AfProduct,
        CheckKind::AfHybrid,
        CheckKind::BrunnMinkowski,
        CheckKind::BmCorollary,
        CheckKind::StrengthenedForm,
    ];

    pub fn id(self) -> &'static str {
        match self {
            CheckKind::LemmaC => "lemma_c",
            CheckKind::DualAfVolumes => "dual_af_volumes",
            CheckKind::MinkowskiMixed => "minkowski_mixed",
            CheckKind::QuermSumMinkowski => "querm_sum_minkowski",
            CheckKind::AfIntersection => "af_intersection",
            CheckKind::AfProduct => "af_product",
            CheckKind::AfHybrid => "af_hybrid",
            CheckKind::BrunnMinkowski => "brunn_minkowski",
            CheckKind::BmCorollary => "bm_corollary",
            CheckKind::StrengthenedForm => "strengthened_form",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id() == id)
    }

    /// The inequality in plain text, `lhs <= rhs`.
    pub fn statement(self) -> &'static str {
        match self {
            CheckKind::LemmaC => "a^p c^(1-p) + b^p d^(1-p) <= (a+b)^p (c+d)^(1-p)",
            CheckKind::DualAfVolumes => {
                "V(K1..Kn)^r <= prod_{j<=r} V(Kj x r, K(r+1)..Kn)"
            }
            CheckKind::MinkowskiMixed => "W_i(I_j(K,L))^(n-1) <= W_i(IK)^(n-j-1) W_i(IL)^j",
            CheckKind::QuermSumMinkowski => {
                "S_i(I_j(K,L), I_j(D,D'))^(n-1) <= S_i(IK,ID)^(n-j-1) S_i(IL,ID')^j"
            }
            CheckKind::AfIntersection => {
                "W_i(I(K1..K(n-1)))^r <= prod_{j<=r} W_i(I(Kj x r, K(r+1)..K(n-1)))"
            }
            CheckKind::AfProduct => "W_i(I(K1..K(n-1)))^(n-1) <= prod_m W_i(IKm)",
            CheckKind::AfHybrid => {
                "W_i(I(K x (n-j-2), B x j, L))^(n-j-1) <= W_i(I_j K)^(n-j-2) W_i(I_j L)"
            }
            CheckKind::BrunnMinkowski => {
                "W_i(I(K+L))^e <= W_i(I(aK+(1-a)L))^e + W_i(I((1-a)K+aL))^e, e=1/((n-i)(n-1))"
            }
            CheckKind::BmCorollary => "W_i(I(K+L))^e <= W_i(IK)^e + W_i(IL)^e, e=1/((n-i)(n-1))",
            CheckKind::StrengthenedForm => {
                "W_i(I(aK+(1-a)L))^e + W_i(I((1-a)K+aL))^e <= W_i(IK)^e + W_i(IL)^e"
            }
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "equality-confirmed")]
    EqualityConfirmed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::EqualityConfirmed => "equality-confirmed",
        }
    }
}

/// Result of one inequality check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IneqReport {
    pub check: CheckKind,
    pub n: usize,
    pub i: Option<f64>,
    pub j: Option<usize>,
    pub r: Option<usize>,
    pub alpha: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub rel_slack: f64,
    pub tol: f64,
    pub equality_expected: bool,
    pub verdict: Verdict,
    pub outer_res: usize,
    pub inner_res: usize,
    /// Largest relative error estimate among the constituent integrals.
    pub max_rel_error: f64,
    pub notes: Vec<String>,
}

impl IneqReport {
    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

/// Inputs of the scalar inequality `a^p c^{1−p} + b^p d^{1−p} ≤ (a+b)^p (c+d)^{1−p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCInput {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub p: f64,
}

impl LemmaCInput {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b, self.c, self.d, self.p]
            .iter()
            .all(|x| x.is_finite());
        if !finite || self.a < 0.0 || self.b < 0.0 {
            return Err(Error::param("need finite a, b >= 0"));
        }
        if !(self.c > 0.0 && self.d > 0.0) {
            return Err(Error::param("need c, d > 0"));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::param(format!("need 0 < p < 1, got {}", self.p)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TolerancePolicy {
    /// Ten times the measured quadrature error.
    Auto,
    /// A fixed relative tolerance. Negative values demand a strict margin.
    Fixed(f64),
}

/// Optional indices of a check; unused ones are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CheckParams {
    pub i: f64,
    pub j: usize,
    pub r: usize,
    pub alpha: f64,
    pub lambda_d: f64,
}

/// A fully specified check: kind, bodies and indices.
#[derive(Debug, Clone)]
pub struct CheckSpec {
    pub kind: CheckKind,
    pub bodies: Vec<BodyExpr>,
    pub params: CheckParams,
    pub lemma_c: Option<LemmaCInput>,
}

/// A computed quantity with its absolute error estimate.
#[derive(Debug, Clone, Copy)]
struct Term {
    value: f64,
    abs_err: f64,
}

impl Term {
    fn rel(&self) -> f64 {
        if self.value == 0.0 {
            self.abs_err
        } else {
            self.abs_err / self.value.abs()
        }
    }

    fn plus(self, other: Term) -> Term {
        Term {
            value: self.value + other.value,
            abs_err: self.abs_err + other.abs_err,
        }
    }
}

/// One side of an inequality with its propagated relative error.
#[derive(Debug, Clone, Copy)]
struct Side {
    value: f64,
    rel_err: f64,
}

fn monomial(factors: &[(Term, f64)]) -> Side {
    let bases: Vec<(f64, f64)> = factors.iter().map(|(t, e)| (t.value, *e)).collect();
    Side {
        value: power_product(&bases),
        rel_err: factors.iter().map(|(t, e)| e.abs() * t.rel()).sum(),
    }
}

fn add_sides(a: Side, b: Side) -> Side {
    let value = a.value + b.value;
    Side {
        value,
        rel_err: (a.value.abs() * a.rel_err + b.value.abs() * b.rel_err) / value.abs(),
    }
}

/// Runs checkers at fixed outer/inner resolutions in dimension `n`.
#[derive(Debug, Clone)]
pub struct Verifier {
    n: usize,
    outer_res: usize,
    inner_res: usize,
    policy: TolerancePolicy,
    outer: Arc<SphereRule>,
    coarse_outer: Arc<SphereRule>,
    probe: Arc<SphereRule>,
}

struct Assembly<'a> {
    verifier: &'a Verifier,
    terms: Vec<Term>,
}

impl Assembly<'_> {
    fn fused(&mut self, bodies: &[BodyExpr], i: f64) -> Result<Term> {
        let v = self.verifier;
        let fine = querm_of_intersection_fused(bodies, i, &v.outer, v.inner_res)?;
        let coarse =
            querm_of_intersection_fused(bodies, i, &v.coarse_outer, (v.inner_res / 2).max(1))?;
        let t = Term {
            value: fine,
            abs_err: (fine - coarse).abs().max(ROUNDING_FLOOR * fine.abs()),
        };
        self.terms.push(t);
        Ok(t)
    }

    fn mixed_volume(&mut self, bodies: &[BodyExpr]) -> Result<Term> {
        let v = self.verifier;
        let fine = dual_mixed_volume(bodies, &v.outer)?;
        let coarse = dual_mixed_volume(bodies, &v.coarse_outer)?;
        let t = Term {
            value: fine,
            abs_err: (fine - coarse).abs().max(ROUNDING_FLOOR * fine.abs()),
        };
        self.terms.push(t);
        Ok(t)
    }

    fn max_rel_error(&self) -> f64 {
        self.terms.iter().map(Term::rel).fold(0.0, f64::max)
    }
}

/// Everything needed to turn two sides into a report.
struct Outcome {
    kind: CheckKind,
    lhs: Side,
    rhs: Side,
    equality_expected: bool,
    i: Option<f64>,
    j: Option<usize>,
    r: Option<usize>,
    alpha: Option<f64>,
    max_rel_error: f64,
    notes: Vec<String>,
}

fn classify(rel_slack: f64, tol: f64, equality_expected: bool) -> Verdict {
    if rel_slack < -tol {
        Verdict::Fail
    } else if equality_expected && rel_slack.abs() <= tol {
        Verdict::EqualityConfirmed
    } else {
        Verdict::Pass
    }
}

fn relative_slack(lhs: f64, rhs: f64) -> (f64, f64) {
    let slack = rhs - lhs;
    let scale = lhs.abs().max(rhs.abs());
    let rel = if scale > 0.0 { slack / scale } else { 0.0 };
    (slack, rel)
}

impl Verifier {
    pub fn new(n: usize, outer_res: usize, inner_res: usize, policy: TolerancePolicy) -> Result<Self> {
        GlobalParams::new(n)?;
        if outer_res < 2 || inner_res < 2 {
            return Err(Error::param("outer and inner resolutions must be >= 2"));
        }
        Ok(Verifier {
            n,
            outer_res,
            inner_res,
            policy,
            outer: cached_sphere_rule(n - 1, outer_res)?,
            coarse_outer: cached_sphere_rule(n - 1, outer_res / 2)?,
            probe: cached_sphere_rule(n - 1, DILATE_PROBE_RES)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn outer_res(&self) -> usize {
        self.outer_res
    }

    pub fn inner_res(&self) -> usize {
        self.inner_res
    }

    pub fn policy(&self) -> TolerancePolicy {
        self.policy
    }

    pub fn outer_rule(&self) -> &SphereRule {
        &self.outer
    }

    fn assembly(&self) -> Assembly<'_> {
        Assembly {
            verifier: self,
            terms: Vec::new(),
        }
    }

    fn params(&self, i: f64) -> Result<GlobalParams> {
        let mut g = GlobalParams::new(self.n)?;
        g.i = i;
        g.check_i()?;
        Ok(g)
    }

    fn dilates(&self, bodies: &[BodyExpr]) -> Result<bool> {
        are_mutual_dilates(bodies, &self.probe)
    }

    fn expect_count(&self, bodies: &[BodyExpr], count: usize) -> Result<()> {
        if bodies.len() == count {
            Ok(())
        } else {
            Err(Error::param(format!(
                "expected {count} bodies, got {}",
                bodies.len()
            )))
        }
    }

    fn finish(&self, o: Outcome) -> IneqReport {
        let (slack, rel_slack) = relative_slack(o.lhs.value, o.rhs.value);
        let tol = match self.policy {
            TolerancePolicy::Auto => AUTO_TOL_FACTOR * o.lhs.rel_err.max(o.rhs.rel_err),
            TolerancePolicy::Fixed(t) => t,
        };
        IneqReport {
            check: o.kind,
            n: self.n,
            i: o.i,
            j: o.j,
            r: o.r,
            alpha: o.alpha,
            lhs: o.lhs.value,
            rhs: o.rhs.value,
            slack,
            rel_slack,
            tol,
            equality_expected: o.equality_expected,
            verdict: classify(rel_slack, tol, o.equality_expected),
            outer_res: self.outer_res,
            inner_res: self.inner_res,
            max_rel_error: o.max_rel_error,
            notes: o.notes,
        }
    }

    /// Dispatches a [`CheckSpec`] to its checker.
    pub fn run(&self, spec: &CheckSpec) -> Result<IneqReport> {
        let b = &spec.bodies;
        let p = &spec.params;
        let pair = || -> Result<(&BodyExpr, &BodyExpr)> {
            self.expect_count(b, 2)?;
            Ok((&b[0], &b[1]))
        };
        match spec.kind {
            CheckKind::LemmaC => {
                let input = spec
                    .lemma_c
                    .ok_or_else(|| Error::param("lemma_c check needs scalar inputs a, b, c, d, p"))?;
                self.check_lemma_c(&input)
            }
            CheckKind::DualAfVolumes => self.check_dual_af_volumes(b, p.r),
            CheckKind::MinkowskiMixed => {
                let (k, l) = pair()?;
                self.check_minkowski_mixed(k, l, p.i, p.j)
            }
            CheckKind::QuermSumMinkowski => {
                self.expect_count(b, 3)?;
                self.check_querm_sum_minkowski(&b[0], &b[1], &b[2], p.lambda_d, p.i, p.j)
            }
            CheckKind::AfIntersection => self.check_af_intersection(b, p.i, p.r),
            CheckKind::AfProduct => self.check_af_product(b, p.i),
            CheckKind::AfHybrid => {
                let (k, l) = pair()?;
                self.check_af_hybrid(k, l, p.i, p.j)
            }
            CheckKind::BrunnMinkowski => {
                let (k, l) = pair()?;
                self.check_brunn_minkowski(k, l, p.i, p.alpha)
            }
            CheckKind::BmCorollary => {
                let (k, l) = pair()?;
                self.check_bm_corollary(k, l, p.i)
            }
            CheckKind::StrengthenedForm => {
                let (k, l) = pair()?;
                self.check_strengthened_form(k, l, p.i, p.alpha)
            }
        }
    }

    /// The scalar inequality under this verifier's tolerance policy.
    pub fn check_lemma_c(&self, input: &LemmaCInput) -> Result<IneqReport> {
        let mut report = check_lemma_c(input)?;
        if let TolerancePolicy::Fixed(t) = self.policy {
            report.tol = t;
            report.verdict = classify(report.rel_slack, t, report.equality_expected);
        }
        report.n = self.n;
        Ok(report)
    }

    /// `Ṽ(K₁,…,K_n)^r ≤ ∏_{j=1}^{r} Ṽ(K_j × r, K_{r+1},…,K_n)`.
    pub fn check_dual_af_volumes(&self, bodies: &[BodyExpr], r: usize) -> Result<IneqReport> {
        let n = self.n;
        self.expect_count(bodies, n)?;
        if r < 1 || r > n {
            return Err(Error::param(format!("need 1 <= r <= n, got r = {r}")));
        }
        let mut asm = self.assembly();
        let whole = asm.mixed_volume(bodies)?;
        let mut factors = Vec::with_capacity(r);
        for j in 0..r {
            let mut list = vec![bodies[j].clone(); r];
            list.extend_from_slice(&bodies[r..]);
            factors.push((asm.mixed_volume(&list)?, 1.0));
        }
        Ok(self.finish(Outcome {
            kind: CheckKind::DualAfVolumes,
            lhs: monomial(&[(whole, r as f64)]),
            rhs: monomial(&factors),
            equality_expected: self.dilates(bodies)?,
            i: None,
            j: None,
            r: Some(r),
            alpha: None,
            max_rel_error: asm.max_rel_error(),
            notes: Vec::new(),
        }))
    }

    /// `W̃_i(I_j(K,L))^{n−1} ≤ W̃_i(IK)^{n−j−1} W̃_i(IL)^j`.
    pub fn check_minkowski_mixed(&self, k: &BodyExpr, l: &BodyExpr, i: f64, j: usize) -> Result<IneqReport> {
        let n = self.n;
        let mut g = self.params(i)?;
        g.j = j;
        g.check_j_interior()?;
        let mut asm = self.assembly();
        let mixed = asm.fused(&ith_multiset(k, l, j, n)?, i)?;
        let ik = asm.fused(&vec![k.clone(); n - 1], i)?;
        let il = asm.fused(&vec![l.clone(); n - 1], i)?;
        Ok(self.finish(Outcome {
            kind: CheckKind::MinkowskiMixed,
            lhs: monomial(&[(mixed, (n - 1) as f64)]),
            rhs: monomial(&[(ik, (n - j - 1) as f64), (il, j as f64)]),
            equality_expected: self.dilates(&[k.clone(), l.clone()])?,
            i: Some(i),
            j: Some(j),
            r: None,
            alpha: None,
            max_rel_error: asm.max_rel_error(),
            notes: Vec::new(),
        }))
    }

    /// `S_{w̃_i}(I_j(K,L), I_j(D,D′))^{n−1} ≤ S_{w̃_i}(IK,ID)^{n−j−1} S_{w̃_i}(IL,ID′)^j`
    /// with `D′ = λ_D·D`.
    ///
    /// Equality is expected when `K, L` are dilates and the scalar equality
    /// condition `W̃_i(IK)·W̃_i(ID′) = W̃_i(ID)·W̃_i(IL)` holds; the ratio of
    /// the two products is recorded in the notes.
    pub fn check_querm_sum_minkowski(
        &self,
        k: &BodyExpr,
        l: &BodyExpr,
        d: &BodyExpr,
        lambda_d: f64,
        i: f64,
        j: usize,
    ) -> Result<IneqReport> {
        let n = self.n;
        let mut g = self.params(i)?;
        g.j = j;
        g.check_j_interior()?;
        let d_prime = dilate(lambda_d, d)?;
        let mut asm = self.assembly();
        let mixed_kl = asm.fused(&ith_multiset(k, l, j, n)?, i)?;
        let mixed_dd = asm.fused(&ith_multiset(d, &d_prime, j, n)?, i)?;
        let ik = asm.fused(&vec![k.clone(); n - 1], i)?;
        let il = asm.fused(&vec![l.clone(); n - 1], i)?;
        let id = asm.fused(&vec![d.clone(); n - 1], i)?;
        let id_prime = asm.fused(&vec![d_prime.clone(); n - 1], i)?;

        let ratio = (ik.value * id_prime.value) / (id.value * il.value);
        let kl_dilates = self.dilates(&[k.clone(), l.clone()])?;
        let equality_expected = kl_dilates && (ratio - 1.0).abs() <= crate::starbody::DILATE_RATIO_TOL;
        let notes = vec![format!("scalar_equality_ratio={ratio:.17e}")];
        Ok(self.finish(Outcome {
            kind: CheckKind::QuermSumMinkowski,
            lhs: monomial(&[(mixed_kl.plus(mixed_dd), (n - 1) as f64)]),
            rhs: monomial(&[
                (ik.plus(id), (n - j - 1) as f64),
                (il.plus(id_prime), j as f64),
            ]),
            equality_expected,
            i: Some(i),
            j: Some(j),
            r: None,
            alpha: None,
            max_rel_error: asm.max_rel_error(),
            notes,
        }))
    }

    /// `W̃_i(I(K₁,…,K_{n−1}))^r ≤ ∏_{j=1}^{r} W̃_i(I(K_j × r, K_{r+1},…,K_{n−1}))`.
    pub fn check_af_intersection(&self, bodies: &[BodyExpr], i: f64, r: usize) -> Result<IneqReport> {
        let n = self.n;
        let mut g = self.params(i)?;
        g.r = r;
        g.check_r()?;
        self.expect_count(bodies, n - 1)?;
        let mut asm = self.assembly();
        let whole = asm.fused(bodies, i)?;
        let mut factors = Vec::with_capacity(r);
        for j in 0..r {
            let mut list = vec![bodies[j].clone(); r];
            list.extend_from_slice(&bodies[r..]);
            factors.push((asm.fused(&list, i)?, 1.0));
        }
        Ok(self.finish(Outcome {
            kind: CheckKind::AfIntersection,
            lhs: monomial(&[(whole, r as f64)]),
            rhs: monomial(&factors),
            equality_expected: self.dilates(bodies)?,
            i: Some(i),
            j: None,
            r: Some(r),
            alpha: None,
            max_rel_error: asm.max_rel_error(),
            notes: Vec::new(),
        }))
    }

    /// `W̃_i(I(K₁,…,K_{n−1}))^{n−1} ≤ ∏_m W̃_i(IK_m)`.
    pub fn check_af_product(&self, bodies: &[BodyExpr], i: f64) -> Result<IneqReport> {
        let mut report = self.check_af_intersection(bodies, i, self.n - 1)?;
        report.check = CheckKind::AfProduct;
        Ok(report)
    }

    /// `W̃_i(I(K × (n−j−2), B × j, L))^{n−j−1} ≤ W̃_i(I_j K)^{n−j−2} W̃_i(I_j L)`,
    /// `0 ≤ j ≤ n − 2`.
    pub fn check_af_hybrid(&self, k: &BodyExpr, l: &BodyExpr, i: f64, j: usize) -> Result<IneqReport> {
        let n = self.n;
        self.params(i)?;
        if j + 2 > n {
            return Err(Error::param(format!("need 0 <= j <= n - 2, got j = {j}")));
        }
        let ball = BodyExpr::unit_ball();
        let k_copies = n - j - 2;
        let mut hybrid = vec![k.clone(); k_copies];
        hybrid.extend(std::iter::repeat_n(ball.clone(), j));
        hybrid.push(l.clone());

        let mut asm = self.assembly();
        let mixed = asm.fused(&hybrid, i)?;
        let ijk = asm.fused(&ith_multiset(k, &ball, j, n)?, i)?;
        let ijl = asm.fused(&ith_multiset(l, &ball, j, n)?, i)?;
        let mut notes = Vec::new();
        let equality_expected = if k_copies == 0 {
            notes.push("no copies of K: both sides reduce to W_i(I_j L)".to_string());
            true
        } else {
            self.dilates(&[k.clone(), l.clone()])?
        };
        Ok(self.finish(Outcome {
            kind: CheckKind::AfHybrid,
            lhs: monomial(&[(mixed, (n - j - 1) as f64)]),
            rhs: monomial(&[(ijk, k_copies as f64), (ijl, 1.0)]),
            equality_expected,
            i: Some(i),
            j: Some(j),
            r: None,
            alpha: None,
            max_rel_error: asm.max_rel_error(),
            notes,
        }))
    }

    fn blends(&self, k: &BodyExpr, l: &BodyExpr, alpha: f64) -> Result<(BodyExpr, BodyExpr)> {
        let mut g = GlobalParams::new(self.n)?;
        g.alpha = alpha;
        g.check_alpha()?;
        Ok((
            radial_combine(alpha, k, 1.0 - alpha, l)?,
            radial_combine(1.0 - alpha, k, alpha, l)?,
        ))
    }

    fn bm_exponent(&self, i: f64) -> f64 {
        1.0 / ((self.n as f64 - i) * (self.n as f64 - 1.0))
    }

    fn bm_notes(&self, i: f64) -> Vec<String> {
        let p = (self.n as f64 - i) * (self.n as f64 - 1.0);
        if p < 1.0 {
            vec![format!("(n-i)(n-1) = {p} < 1: norm triangle inequality does not apply")]
        } else {
            Vec::new()
        }
    }

    /// `W̃_i(I(K+̃L))^e ≤ W̃_i(I(αK+̃(1−α)L))^e + W̃_i(I((1−α)K+̃αL))^e`,
    /// `e = 1/((n−i)(n−1))`.
    pub fn check_brunn_minkowski(&self, k: &BodyExpr, l: &BodyExpr, i: f64, alpha: f64) -> Result<IneqReport> {
        let n = self.n;
        self.params(i)?;
        let (first, second) = self.blends(k, l, alpha)?;
        let sum = radial_combine(1.0, k, 1.0, l)?;
        let e = self.bm_exponent(i);
        let mut asm = self.assembly();
        let whole = asm.fused(&vec![sum; n - 1], i)?;
        let a = asm.fused(&vec![first.clone(); n - 1], i)?;
        let c = asm.fused(&vec![second.clone(); n - 1], i)?;
        let equality_expected = first == second || self.dilates(&[first, second])?;
        Ok(self.finish(Outcome {
            kind: CheckKind::BrunnMinkowski,
            lhs: monomial(&[(whole, e)]),
            rhs: add_sides(monomial(&[(a, e)]), monomial(&[(c, e)])),
            equality_expected,
            i: Some(i),
            j: None,
            r: None,
            alpha: Some(alpha),
            max_rel_error: asm.max_rel_error(),
            notes: self.bm_notes(i),
        }))
    }

    /// `W̃_i(I(K+̃L))^e ≤ W̃_i(IK)^e + W̃_i(IL)^e`; the `α = 1` case of
    /// [`Verifier::check_brunn_minkowski`].
    pub fn check_bm_corollary(&self, k: &BodyExpr, l: &BodyExpr, i: f64) -> Result<IneqReport> {
        let mut report = self.check_brunn_minkowski(k, l, i, 1.0)?;
        report.check = CheckKind::BmCorollary;
        Ok(report)
    }

    /// `W̃_i(I(αK+̃(1−α)L))^e + W̃_i(I((1−α)K+̃αL))^e ≤ W̃_i(IK)^e + W̃_i(IL)^e`.
    pub fn check_strengthened_form(&self, k: &BodyExpr, l: &BodyExpr, i: f64, alpha: f64) -> Result<IneqReport> {
        let n = self.n;
        self.params(i)?;
        let (first, second) = self.blends(k, l, alpha)?;
        let e = self.bm_exponent(i);
        let mut asm = self.assembly();
        let a = asm.fused(&vec![first; n - 1], i)?;
        let c = asm.fused(&vec![second; n - 1], i)?;
        let ik = asm.fused(&vec![k.clone(); n - 1], i)?;
        let il = asm.fused(&vec![l.clone(); n - 1], i)?;
        let equality_expected =
            alpha == 0.0 || alpha == 1.0 || self.dilates(&[k.clone(), l.clone()])?;
        Ok(self.finish(Outcome {
            kind: CheckKind::StrengthenedForm,
            lhs: add_sides(monomial(&[(a, e)]), monomial(&[(c, e)])),
            rhs: add_sides(monomial(&[(ik, e)]), monomial(&[(il, e)])),
            equality_expected,
            i: Some(i),
            j: None,
            r: None,
            alpha: Some(alpha),
            max_rel_error: asm.max_rel_error(),
            notes: self.bm_notes(i),
        }))
    }
}

/// `a^p c^{1−p} + b^p d^{1−p} ≤ (a+b)^p (c+d)^{1−p}`, equality iff `ad = bc`.
pub fn check_lemma_c(input: &LemmaCInput) -> Result<IneqReport> {
    input.validate()?;
    let LemmaCInput { a, b, c, d, p } = *input;
    let q = 1.0 - p;
    let lhs = a.powf(p) * c.powf(q) + b.powf(p) * d.powf(q);
    let rhs = (a + b).powf(p) * (c + d).powf(q);
    let (ad, bc) = (a * d, b * c);
    let equality_expected = (ad - bc).abs() <= LEMMA_C_TOL * ad.max(bc);
    let (slack, rel_slack) = relative_slack(lhs, rhs);
    Ok(IneqReport {
        check: CheckKind::LemmaC,
        n: 0,
        i: None,
        j: None,
        r: None,
        alpha: None,
        lhs,
        rhs,
        slack,
        rel_slack,
        tol: LEMMA_C_TOL,
        equality_expected,
        verdict: classify(rel_slack, LEMMA_C_TOL, equality_expected),
        outer_res: 0,
        inner_res: 0,
        max_rel_error: 0.0,
        notes: vec![format!("p={p}")],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::starbody::BumpTerm;
    use std::f64::consts::PI;

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

    fn verifier() -> Verifier {
        Verifier::new(3, 16, 16, TolerancePolicy::Auto).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn lemma_c_examples() {
        let r = check_lemma_c(&LemmaCInput { a: 1.0, b: 1.0, c: 1.0, d: 1.0, p: 0.5 }).unwrap();
        assert_eq!(r.lhs, 2.0);
        assert!((r.rhs - 2.0).abs() < 1e-15);
        assert!(r.equality_expected);
        assert_eq!(r.verdict, Verdict::EqualityConfirmed);

        // oriented lhs <= rhs: (a+b)^p (c+d)^{1-p} = 5 is the larger side
        let r = check_lemma_c(&LemmaCInput { a: 4.0, b: 1.0, c: 1.0, d: 4.0, p: 0.5 }).unwrap();
        assert!((r.rhs - 5.0).abs() < 1e-15);
        assert!((r.lhs - 4.0).abs() < 1e-15);
        assert!((r.slack - 1.0).abs() < 1e-14);
        assert!(!r.equality_expected);

        let r = check_lemma_c(&LemmaCInput { a: 0.0, b: 1.0, c: 1.0, d: 1.0, p: 0.5 }).unwrap();
        assert!((r.rhs - 2f64.sqrt()).abs() < 1e-15);
        assert!((r.lhs - 1.0).abs() < 1e-15);
        assert!(r.slack > 0.0);
    }

    #[test]
    fn lemma_c_domain_errors() {
        for bad in [
            LemmaCInput { a: -1.0, b: 1.0, c: 1.0, d: 1.0, p: 0.5 },
            LemmaCInput { a: 1.0, b: 1.0, c: 0.0, d: 1.0, p: 0.5 },
            LemmaCInput { a: 1.0, b: 1.0, c: 1.0, d: 1.0, p: 1.0 },
            LemmaCInput { a: 1.0, b: 1.0, c: 1.0, d: 1.0, p: 0.0 },
        ] {
            assert!(check_lemma_c(&bad).is_err());
        }
    }

    #[test]
    fn dual_af_volume_examples() {
        let v = verifier();
        for r in 1..=3 {
            let rep = v.check_dual_af_volumes(&[b(1.0), b(1.0), b(1.0)], r).unwrap();
            assert!(rel(rep.lhs, (4.0 * PI / 3.0).powi(r as i32)) < 1e-12);
            assert_eq!(rep.verdict, Verdict::EqualityConfirmed);
        }
        let rep = v.check_dual_af_volumes(&[b(1.0), b(2.0), b(3.0)], 2).unwrap();
        assert!(rel(rep.lhs, 64.0 * PI * PI) < 1e-12);
        assert!(rel(rep.rhs, 64.0 * PI * PI) < 1e-12);
        assert_eq!(rep.verdict, Verdict::EqualityConfirmed);

        let rep = v.check_dual_af_volumes(&[ell(), b(1.0), b(1.0)], 2).unwrap();
        assert!(!rep.equality_expected);
        assert!(rep.rel_slack > 10.0 * rep.tol, "{rep:?}");
        assert!(v.check_dual_af_volumes(&[ell(), b(1.0), b(1.0)], 4).is_err());
    }

    #[test]
    fn minkowski_examples() {
        let v = verifier();
        let rep = v.check_minkowski_mixed(&b(1.0), &b(2.0), 0.0, 1).unwrap();
        let expected = 1024.0 * PI.powi(8) / 9.0;
        assert!(rel(rep.lhs, expected) < 1e-12);
        assert!(rel(rep.rhs, expected) < 1e-12);
        assert_eq!(rep.verdict, Verdict::EqualityConfirmed);

        let rep = v.check_minkowski_mixed(&ell(), &ell(), 1.0, 1).unwrap();
        assert_eq!(rep.lhs, rep.rhs);

        let rep = v.check_minkowski_mixed(&ell(), &b(1.0), 1.0, 1).unwrap();
        assert!(rep.rel_slack > 10.0 * rep.tol);
        assert_eq!(rep.verdict, Verdict::Pass);

        assert!(v.check_minkowski_mixed(&ell(), &b(1.0), 3.0, 1).is_err());
        assert!(v.check_minkowski_mixed(&ell(), &b(1.0), 0.0, 0).is_err());
        assert!(v.check_minkowski_mixed(&ell(), &b(1.0), 0.0, 2).is_err());
    }

    #[test]
    fn querm_sum_examples() {
        let v = verifier();
        let rep = v.check_querm_sum_minkowski(&b(1.0), &b(1.0), &b(1.0), 1.0, 0.0, 1).unwrap();
        let expected = (2.0 * 4.0 * PI.powi(4) / 3.0).powi(2);
        assert!(rel(rep.lhs, expected) < 1e-12);
        assert_eq!(rep.verdict, Verdict::EqualityConfirmed);

        let rep = v.check_querm_sum_minkowski(&b(1.0), &b(2.0), &b(1.0), 2.0, 0.0, 1).unwrap();
        assert!(rep.equality_expected);
        assert!(rep.rel_slack.abs() <= rep.tol);

        // K, L dilates but λ_D differs from their ratio: strict inequality
        let rep = v.check_querm_sum_minkowski(&b(1.0), &b(2.0), &b(1.0), 1.5, 0.0, 1).unwrap();
        assert!(!rep.equality_expected);
        assert!(rep.rel_slack > rep.tol);

        let rep = v.check_querm_sum_minkowski(&ell(), &b(1.0), &b(1.0), 1.5, 1.0, 1).unwrap();
        assert!(rep.rel_slack > 10.0 * rep.tol);
        assert!(v.check_querm_sum_minkowski(&ell(), &b(1.0), &b(1.0), 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn af_reduces_to_minkowski_in_three_dimensions() {
        let v = verifier();
        let af = v.check_af_intersection(&[ell(), bump()], 0.0, 2).unwrap();
        let mk = v.check_minkowski_mixed(&ell(), &bump(), 0.0, 1).unwrap();
        assert!(rel(af.lhs, mk.lhs) < 1e-12);
        assert!(rel(af.rhs, mk.rhs) < 1e-12);
        assert!(af.rel_slack > 10.0 * af.tol);

        let prod = v.check_af_product(&[ell(), bump()], 0.0).unwrap();
        assert_eq!(prod.check, CheckKind::AfProduct);
        assert_eq!(prod.rhs, af.rhs);

        let balls = v.check_af_intersection(&[b(1.0), b(2.0)], 1.0, 1).unwrap();
        assert_eq!(balls.verdict, Verdict::EqualityConfirmed);
        assert!(v.check_af_intersection(&[b(1.0), b(2.0)], 1.0, 3).is_err());
    }

    #[test]
    fn hybrid_examples() {
        let v = verifier();
        assert_eq!(
            v.check_af_hybrid(&b(1.0), &b(1.0), 0.0, 0).unwrap().verdict,
            Verdict::EqualityConfirmed
        );
        let rep = v.check_af_hybrid(&b(1.0), &b(2.0), 1.0, 0).unwrap();
        assert!(rep.equality_expected && rep.rel_slack.abs() <= rep.tol);
        let rep = v.check_af_hybrid(&ell(), &b(1.0), 0.0, 0).unwrap();
        assert!(rep.rel_slack > 10.0 * rep.tol);
        let rep = v.check_af_hybrid(&ell(), &b(1.0), 0.0, 1).unwrap();
        assert_eq!(rep.verdict, Verdict::EqualityConfirmed);
        assert_eq!(rep.notes.len(), 1);
        assert!(v.check_af_hybrid(&ell(), &b(1.0), 0.0, 2).is_err());
    }

    #[test]
    fn brunn_minkowski_examples() {
        let v = verifier();
        let rep = v.check_brunn_minkowski(&b(1.0), &b(1.0), 0.0, 0.3).unwrap();
        let lhs = ((4.0 * PI / 3.0) * (4.0 * PI).powi(3)).powf(1.0 / 6.0);
        assert!(rel(rep.lhs, lhs) < 1e-12);
        assert!(rel(rep.rhs, 2.0 * ((4.0 * PI / 3.0) * PI.powi(3)).powf(1.0 / 6.0)) < 1e-12);
        assert_eq!(rep.verdict, Verdict::EqualityConfirmed);

        let rep = v.check_brunn_minkowski(&ell(), &b(1.0), 0.0, 0.5).unwrap();
        assert_eq!(rep.verdict, Verdict::EqualityConfirmed);

        let rep = v.check_brunn_minkowski(&ell(), &b(1.0), 0.0, 1.0).unwrap();
        assert!(rep.rel_slack > 10.0 * rep.tol);
        let cor = v.check_bm_corollary(&ell(), &b(1.0), 0.0).unwrap();
        assert_eq!((cor.lhs, cor.rhs), (rep.lhs, rep.rhs));
        assert!(v.check_brunn_minkowski(&ell(), &b(1.0), 0.0, 1.5).is_err());
    }

    #[test]
    fn strengthened_form_examples() {
        let v = verifier();
        for alpha in [0.0, 1.0] {
            let rep = v.check_strengthened_form(&ell(), &bump(), 1.0, alpha).unwrap();
            assert_eq!(rep.lhs, rep.rhs);
            assert_eq!(rep.verdict, Verdict::EqualityConfirmed);
        }
        let rep = v.check_strengthened_form(&ell(), &b(1.0), 0.0, 0.3).unwrap();
        assert!(rep.rel_slack >= -rep.tol);
    }

    #[test]
    fn fixed_negative_tolerance_demands_margin() {
        let v = Verifier::new(3, 8, 8, TolerancePolicy::Fixed(-1e-3)).unwrap();
        let rep = v.check_minkowski_mixed(&b(1.0), &b(2.0), 0.0, 1).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
    }

    #[test]
    fn run_dispatches_by_kind() {
        let v = verifier();
        let spec = CheckSpec {
            kind: CheckKind::BmCorollary,
            bodies: vec![b(1.0), b(2.0)],
            params: CheckParams::default(),
            lemma_c: None,
        };
        assert_eq!(v.run(&spec).unwrap().verdict, Verdict::EqualityConfirmed);
        let bad = CheckSpec {
            bodies: vec![b(1.0)],
            ..spec
        };
        assert!(v.run(&bad).is_err());
        for kind in CheckKind::ALL {
            assert_eq!(CheckKind::from_id(kind.id()), Some(kind));
        }
    }
}
