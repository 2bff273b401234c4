//! Derivative-free extremal search over parameterized body families.
//!
//! Minimizes `rel_slack` of one checker with a box-constrained Nelder–Mead
//! simplex in normalized coordinates, restarted from random points. Any
//! evaluation with `rel_slack < −tol` is a falsification and stops the run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CheckKind, CheckParams, CheckSpec, IneqReport, Verifier};
use crate::error::{Error, Result};
use crate::starbody::{BodyExpr, BumpTerm};

/// Random restarts after the first descent.
pub const RESTARTS: usize = 3;

/// Simplex diameter, as a fraction of the parameter box, that ends a descent.
pub const STEP_TOL: f64 = 1e-4;

const INITIAL_STEP: f64 = 0.25;

/// Parameterized generators of a `(K, L)` pair in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `(B, s·B)`, `s ∈ [0.5, 2]`: always dilates.
    BallScale,
    /// `(Ellipsoid(a₁..a_n), B)`, `a_k ∈ [0.5, 2]`.
    EllipsoidAxes,
    /// `(Bump(1, c·|u·e_n|⁴), B)`, `c ∈ [0, 0.3]`.
    BumpCoefficient,
}

impl Family {
    pub fn bounds(self, n: usize) -> Vec<(f64, f64)> {
        match self {
            Family::BallScale => vec![(0.5, 2.0)],
            Family::EllipsoidAxes => vec![(0.5, 2.0); n],
            Family::BumpCoefficient => vec![(0.0, 0.3)],
        }
    }

    /// The body pair at `params`; rejects parameters outside the box.
    pub fn generate(self, n: usize, params: &[f64]) -> Result<(BodyExpr, BodyExpr)> {
        let generation = |reason: String| Error::Generation {
            params: params.to_vec(),
            reason,
        };
        let bounds = self.bounds(n);
        if params.len() != bounds.len() {
            return Err(generation(format!(
                "expected {} parameters, got {}",
                bounds.len(),
                params.len()
            )));
        }
        for (x, (lo, hi)) in params.iter().zip(&bounds) {
            if !(x >= lo && x <= hi) {
                return Err(generation(format!("{x} outside [{lo}, {hi}]")));
            }
        }
        let wrap = |r: Result<BodyExpr>| r.map_err(|e| generation(e.to_string()));
        let ball = BodyExpr::unit_ball();
        Ok(match self {
            Family::BallScale => (ball, wrap(BodyExpr::ball(params[0]))?),
            Family::EllipsoidAxes => (wrap(BodyExpr::ellipsoid(params))?, ball),
            Family::BumpCoefficient => {
                let mut direction = vec![0.0; n];
                direction[n - 1] = 1.0;
                let term = BumpTerm {
                    coeff: params[0],
                    direction,
                    half_power: 2,
                };
                (wrap(BodyExpr::bump(1.0, vec![term]))?, ball)
            }
        })
    }
}

/// Body list handed to `kind` for the pair `(K, L)`, padded with unit balls.
pub fn bodies_for(kind: CheckKind, k: &BodyExpr, l: &BodyExpr, n: usize) -> Result<Vec<BodyExpr>> {
    let padded = |count: usize| {
        let mut list = vec![k.clone(), l.clone()];
        list.resize(count, BodyExpr::unit_ball());
        list
    };
    match kind {
        CheckKind::LemmaC => Err(Error::param("lemma_c has no body family to search")),
        CheckKind::DualAfVolumes => Ok(padded(n)),
        CheckKind::AfIntersection | CheckKind::AfProduct => Ok(padded(n - 1)),
        CheckKind::QuermSumMinkowski => Ok(padded(3)),
        _ => Ok(vec![k.clone(), l.clone()]),
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub kind: CheckKind,
    pub family: Family,
    pub params: CheckParams,
    pub budget: usize,
    pub seed: u64,
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub evaluation: usize,
    pub restart: usize,
    pub params: Vec<f64>,
    pub rel_slack: f64,
    pub tol: f64,
    pub best_rel_slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub check: CheckKind,
    pub family: Family,
    pub seed: u64,
    pub evaluations: usize,
    pub best_params: Vec<f64>,
    pub best_rel_slack: f64,
    pub best_report: IneqReport,
    pub trace: Vec<TraceEntry>,
    /// First evaluation with `rel_slack < −tol`, if any.
    pub violation: Option<TraceEntry>,
}

/// Stops the descent on budget exhaustion or falsification.
enum Halt {
    Stop,
    Failed(Error),
}

struct Objective<'a> {
    verifier: &'a Verifier,
    config: &'a SearchConfig,
    bounds: Vec<(f64, f64)>,
    restart: usize,
    trace: Vec<TraceEntry>,
    best: Option<(Vec<f64>, IneqReport)>,
    violation: Option<TraceEntry>,
}

impl Objective<'_> {
    fn to_box(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.bounds)
            .map(|(t, (lo, hi))| lo + t.clamp(0.0, 1.0) * (hi - lo))
            .collect()
    }

    fn eval(&mut self, z: &[f64]) -> std::result::Result<f64, Halt> {
        if self.trace.len() >= self.config.budget || self.violation.is_some() {
            return Err(Halt::Stop);
        }
        let params = self.to_box(z);
        let n = self.verifier.n();
        let (k, l) = self
            .config
            .family
            .generate(n, &params)
            .map_err(Halt::Failed)?;
        let spec = CheckSpec {
            kind: self.config.kind,
            bodies: bodies_for(self.config.kind, &k, &l, n).map_err(Halt::Failed)?,
            params: self.config.params,
            lemma_c: None,
        };
        let report = self.verifier.run(&spec).map_err(Halt::Failed)?;
        let value = report.rel_slack;
        let improved = self.best.as_ref().is_none_or(|(_, b)| value < b.rel_slack);
        if improved {
            self.best = Some((params.clone(), report.clone()));
        }
        let entry = TraceEntry {
            evaluation: self.trace.len() + 1,
            restart: self.restart,
            params,
            rel_slack: value,
            tol: report.tol,
            best_rel_slack: self.best.as_ref().map_or(value, |(_, b)| b.rel_slack),
        };
        if report.failed() {
            self.violation = Some(entry.clone());
        }
        self.trace.push(entry);
        Ok(value)
    }
}

fn centroid(points: &[(Vec<f64>, f64)], skip: usize) -> Vec<f64> {
    let d = points[0].0.len();
    let mut c = vec![0.0; d];
    for (k, (p, _)) in points.iter().enumerate() {
        if k != skip {
            for (ci, pi) in c.iter_mut().zip(p) {
                *ci += pi;
            }
        }
    }
    let m = (points.len() - 1) as f64;
    c.iter_mut().for_each(|x| *x /= m);
    c
}

fn along(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter()
        .zip(to)
        .map(|(a, b)| (a + t * (b - a)).clamp(0.0, 1.0))
        .collect()
}

fn diameter(points: &[(Vec<f64>, f64)]) -> f64 {
    let mut diam = 0.0f64;
    for a in points {
        for b in points {
            let d = a.0.iter().zip(&b.0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            diam = diam.max(d);
        }
    }
    diam
}

/// One Nelder–Mead descent in the unit cube from `start`.
fn descend(obj: &mut Objective<'_>, start: Vec<f64>) -> std::result::Result<(), Halt> {
    let d = start.len();
    let mut simplex = Vec::with_capacity(d + 1);
    let f0 = obj.eval(&start)?;
    simplex.push((start.clone(), f0));
    for k in 0..d {
        let mut p = start.clone();
        p[k] = if p[k] + INITIAL_STEP <= 1.0 {
            p[k] + INITIAL_STEP
        } else {
            p[k] - INITIAL_STEP
        };
        let f = obj.eval(&p)?;
        simplex.push((p, f));
    }
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if diameter(&simplex) < STEP_TOL {
            return Ok(());
        }
        let worst = d;
        let c = centroid(&simplex, worst);
        let reflected = along(&c, &simplex[worst].0, -1.0);
        let fr = obj.eval(&reflected)?;
        if fr < simplex[0].1 {
            let expanded = along(&c, &simplex[worst].0, -2.0);
            let fe = obj.eval(&expanded)?;
            simplex[worst] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[d - 1].1 {
            simplex[worst] = (reflected, fr);
            continue;
        }
        let contracted = if fr < simplex[worst].1 {
            along(&c, &reflected, 0.5)
        } else {
            along(&c, &simplex[worst].0, 0.5)
        };
        let fc = obj.eval(&contracted)?;
        if fc < fr.min(simplex[worst].1) {
            simplex[worst] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let p = along(&best, &entry.0, 0.5);
            let f = obj.eval(&p)?;
            *entry = (p, f);
        }
    }
}

/// Runs the search and returns the trace; a violation is reported inside
/// the result rather than as an error.
pub fn run_search(verifier: &Verifier, config: &SearchConfig) -> Result<SearchResult> {
    if config.budget == 0 {
        return Err(Error::param("search budget must be at least 1"));
    }
    if config.kind == CheckKind::LemmaC {
        return Err(Error::param("lemma_c has no body family to search"));
    }
    let n = verifier.n();
    let bounds = config.family.bounds(n);
    let dim = bounds.len();
    let mut obj = Objective {
        verifier,
        config,
        bounds,
        restart: 0,
        trace: Vec::new(),
        best: None,
        violation: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for restart in 0..=RESTARTS {
        obj.restart = restart;
        let start: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        match descend(&mut obj, start) {
            Ok(()) => {}
            Err(Halt::Stop) => break,
            Err(Halt::Failed(e)) => return Err(e),
        }
    }
    let (best_params, best_report) = obj.best.expect("budget >= 1 yields one evaluation");
    Ok(SearchResult {
        check: config.kind,
        family: config.family,
        seed: config.seed,
        evaluations: obj.trace.len(),
        best_rel_slack: best_report.rel_slack,
        best_params,
        best_report,
        trace: obj.trace,
        violation: obj.violation,
    })
}

/// Like [`run_search`], but a violation becomes [`Error::Falsified`] with
/// the parameters, seed and evaluation index needed to reproduce it.
pub fn search_extremal(verifier: &Verifier, config: &SearchConfig) -> Result<SearchResult> {
    let result = run_search(verifier, config)?;
    if let Some(v) = &result.violation {
        return Err(Error::Falsified {
            check: config.kind.id().to_string(),
            params: v.params.clone(),
            rel_slack: v.rel_slack,
            tol: v.tol,
            seed: config.seed,
            evaluation: v.evaluation,
        });
    }
    Ok(result)
}
