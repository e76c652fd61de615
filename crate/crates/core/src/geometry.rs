//! Truncated cones around the e_1 axis: Γ_θ, the sets D_{τ,θ} and the
//! angular bound on thin shells, with sampling oracles.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dimension::Dimension;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    pub tau: f64,
    pub theta: f64,
    pub ell: f64,
}

impl ConeParams {
    pub fn new(tau: f64, theta: f64, ell: f64) -> Result<Self> {
        let p = Self { tau, theta, ell };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::Configuration(format!("tau must be >= 0, got {}", self.tau)));
        }
        if !(self.theta > 0.0 && self.theta < FRAC_PI_2) {
            return Err(Error::Configuration(format!("theta must lie in (0, pi/2), got {}", self.theta)));
        }
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return Err(Error::Configuration(format!("ell must be positive, got {}", self.ell)));
        }
        Ok(())
    }

    /// θ + sqrt(ℓ/(τ+ℓ)).
    pub fn shell_bound(&self) -> f64 {
        self.theta + (self.ell / (self.tau + self.ell)).sqrt()
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// (|x|, angle(x, e_1)) with the angle from a clamped arccos; the angle of
/// the origin is reported as 0.
pub fn polar(x: &[f64]) -> (f64, f64) {
    let r = norm(x);
    if r == 0.0 {
        return (0.0, 0.0);
    }
    (r, (x[0] / r).clamp(-1.0, 1.0).acos())
}

pub fn in_gamma(x: &[f64], theta: f64) -> bool {
    let (r, alpha) = polar(x);
    r == 0.0 || alpha >= FRAC_PI_2 + theta
}

/// Distance to Γ_θ from a point at radius `r` and angle `alpha` to e_1.
pub fn dist_gamma_polar(r: f64, alpha: f64, theta: f64) -> f64 {
    let beta = PI - alpha;
    let delta = beta - (FRAC_PI_2 - theta);
    if delta <= 0.0 {
        0.0
    } else if delta <= FRAC_PI_2 {
        r * delta.sin()
    } else {
        r
    }
}

pub fn dist_gamma(x: &[f64], theta: f64) -> f64 {
    let (r, alpha) = polar(x);
    dist_gamma_polar(r, alpha, theta)
}

pub fn in_d(x: &[f64], tau: f64, theta: f64) -> bool {
    dist_gamma(x, theta) > tau
}

/// Minimum of |y - x| over a polar grid of Γ_θ ∩ span(e_1, x), refined by
/// zooming on the best cell. The nearest point of the rotationally
/// symmetric cone lies in that plane.
pub fn dist_gamma_brute_force(x: &[f64], theta: f64, samples_per_axis: usize) -> f64 {
    let (r, alpha) = polar(x);
    if r == 0.0 {
        return 0.0;
    }
    let (px, py) = (r * alpha.cos(), r * alpha.sin());
    let m = samples_per_axis.max(2);
    let dist = |rho: f64, psi: f64| ((rho * psi.cos() - px).powi(2) + (rho * psi.sin() - py).powi(2)).sqrt();
    let (mut r_lo, mut r_hi) = (0.0, r);
    let (mut a_lo, mut a_hi) = (FRAC_PI_2 + theta, 3.0 * FRAC_PI_2 - theta);
    let (a_min, a_max) = (a_lo, a_hi);
    let mut best = r;
    for _ in 0..4 {
        let (hr, ha) = ((r_hi - r_lo) / (m - 1) as f64, (a_hi - a_lo) / (m - 1) as f64);
        let (mut bi, mut bj) = (0, 0);
        let mut pass_best = f64::INFINITY;
        for i in 0..m {
            let rho = r_lo + i as f64 * hr;
            for j in 0..m {
                let d = dist(rho, a_lo + j as f64 * ha);
                if d < pass_best {
                    pass_best = d;
                    (bi, bj) = (i, j);
                }
            }
        }
        best = best.min(pass_best);
        let (rc, ac) = (r_lo + bi as f64 * hr, a_lo + bj as f64 * ha);
        (r_lo, r_hi) = ((rc - 2.0 * hr).max(0.0), (rc + 2.0 * hr).min(r));
        (a_lo, a_hi) = ((ac - 2.0 * ha).max(a_min), (ac + 2.0 * ha).min(a_max));
    }
    best
}

/// Outcome of a sampled property check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub checked: usize,
    pub violations: usize,
    /// Smallest margin by which the property held (negative at a violation).
    pub min_slack: f64,
}

impl CheckReport {
    fn new() -> Self {
        Self { checked: 0, violations: 0, min_slack: f64::INFINITY }
    }

    fn record(&mut self, slack: f64, ok: bool) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
        }
        self.min_slack = self.min_slack.min(slack);
    }

    pub fn passed(&self) -> bool {
        self.checked > 0 && self.violations == 0
    }
}

/// Reports for the three items of the cone lemma. `shell_proof` checks
/// the shell item against θ + 2·sqrt(ℓ/(τ+ℓ)), the bound the
/// cosine inequality actually delivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub params: ConeParams,
    pub inside_ball: CheckReport,
    pub narrow_cone: CheckReport,
    pub shell: CheckReport,
    pub shell_proof: CheckReport,
    pub shell_draws: usize,
}

/// Point at radius `r`, angle `alpha` to e_1, in a random transverse direction.
pub fn sample_point<R: Rng>(rng: &mut R, dim: Dimension, r: f64, alpha: f64) -> Vec<f64> {
    let n = dim.get() as usize;
    let mut w: Vec<f64> = (1..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let wn = norm(&w);
    if wn == 0.0 {
        w[0] = 1.0;
    } else {
        w.iter_mut().for_each(|c| *c /= wn);
    }
    let mut x = Vec::with_capacity(n);
    x.push(r * alpha.cos());
    x.extend(w.iter().map(|c| r * alpha.sin() * c));
    x
}

/// Samples each lemma item in the (|x|, angle) chart with `samples` points
/// per item. Shell points are drawn from τ <= |x| <= τ+ℓ by rejection
/// until `samples` of them lie in D_{τ,θ} or `100 * samples` draws are spent.
pub fn cone_lemma_check(params: ConeParams, dim: Dimension, samples: usize, seed: u64) -> Result<LemmaReport> {
    params.validate()?;
    let ConeParams { tau, theta, ell } = params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut inside_ball = CheckReport::new();
    for _ in 0..samples {
        let (r, a) = (tau * rng.random::<f64>(), PI * rng.random::<f64>());
        let d = dist_gamma(&sample_point(&mut rng, dim, r, a), theta);
        inside_ball.record(tau - d, d <= tau);
    }

    let mut narrow_cone = CheckReport::new();
    for _ in 0..samples {
        let r = tau + ell * (1.0 - rng.random::<f64>());
        let a = theta * rng.random::<f64>();
        let x = sample_point(&mut rng, dim, r, a);
        narrow_cone.record(dist_gamma(&x, theta) - tau, in_d(&x, tau, theta));
    }

    let bound = params.shell_bound();
    let proof_bound = theta + 2.0 * (ell / (tau + ell)).sqrt();
    let mut shell = CheckReport::new();
    let mut shell_proof = CheckReport::new();
    let mut draws = 0;
    while shell.checked < samples && draws < 100 * samples {
        draws += 1;
        let r = tau + ell * rng.random::<f64>();
        let a = PI * rng.random::<f64>();
        let x = sample_point(&mut rng, dim, r, a);
        if !in_d(&x, tau, theta) {
            continue;
        }
        let angle = polar(&x).1;
        shell.record(bound - angle, angle <= bound);
        shell_proof.record(proof_bound - angle, angle <= proof_bound);
    }
    Ok(LemmaReport { params, inside_ball, narrow_cone, shell, shell_proof, shell_draws: draws })
}

/// Checks 1 - cos s >= s²/4 on `points` equispaced nodes of [0, π/2],
/// with 1 - cos s evaluated as 2 sin²(s/2).
pub fn cos_inequality_check(points: usize) -> CheckReport {
    let mut report = CheckReport::new();
    let m = points.max(2);
    for i in 0..m {
        let s = FRAC_PI_2 * i as f64 / (m - 1) as f64;
        let lhs = 2.0 * (0.5 * s).sin().powi(2);
        let rhs = 0.25 * s * s;
        report.record(lhs - rhs, lhs >= rhs);
    }
    report
}
