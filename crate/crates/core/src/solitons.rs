//! The ground state W, its rescalings and Lorentz boosts Q_ℓ.

use serde::{Deserialize, Serialize};

use crate::dimension::Dimension;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::linear::RadialLaplacian;
use crate::quadrature::{radial_derivative, radial_integral_between};
use crate::state::RadialState;

/// W(r) = (1 + r²/(N(N-2)))^{-(N-2)/2}.
pub fn eval_w(r: f64, dim: Dimension) -> f64 {
    let n = dim.as_f64();
    let base = 1.0 + r * r / (n * (n - 2.0));
    match dim.get() {
        3 => 1.0 / base.sqrt(),
        4 => 1.0 / base,
        _ => 1.0 / (base * base.sqrt()),
    }
}

/// W'(r) = -(r/N) (1 + r²/(N(N-2)))^{-N/2}.
pub fn eval_w_prime(r: f64, dim: Dimension) -> f64 {
    let n = dim.as_f64();
    let base = 1.0 + r * r / (n * (n - 2.0));
    -(r / n) * base.powf(-n / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

/// ±λ^{-(N-2)/2} W(x/λ) boosted with velocity ℓ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonSpec {
    pub lambda: f64,
    pub sign: Sign,
    /// Boost velocity; empty means ℓ = 0.
    pub ell: Vec<f64>,
}

impl SolitonSpec {
    pub fn ground_state() -> Self {
        Self { lambda: 1.0, sign: Sign::Positive, ell: Vec::new() }
    }

    /// Ground state boosted along e₁ with speed `speed`.
    pub fn boosted(speed: f64, dim: Dimension) -> Self {
        let mut ell = vec![0.0; dim.get() as usize];
        ell[0] = speed;
        Self { lambda: 1.0, sign: Sign::Positive, ell }
    }

    pub fn validate(&self, dim: Dimension) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Precondition(format!("scale must be positive, got {}", self.lambda)));
        }
        if !self.ell.is_empty() && self.ell.len() != dim.get() as usize {
            return Err(Error::Precondition(format!("boost has {} components in {dim}", self.ell.len())));
        }
        let speed = self.speed();
        if !(speed < 1.0) {
            return Err(Error::Precondition(format!("boost speed must be below 1, got {speed}")));
        }
        Ok(())
    }

    pub fn speed(&self) -> f64 {
        self.ell.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn amplitude(&self, dim: Dimension) -> f64 {
        self.sign.value() * self.lambda.powf(-(dim.as_f64() - 2.0) / 2.0)
    }

    /// Q(r) = ±λ^{-(N-2)/2} W(r/λ).
    pub fn profile(&self, r: f64, dim: Dimension) -> f64 {
        self.amplitude(dim) * eval_w(r / self.lambda, dim)
    }

    /// Q'(r).
    pub fn profile_prime(&self, r: f64, dim: Dimension) -> f64 {
        self.amplitude(dim) * eval_w_prime(r / self.lambda, dim) / self.lambda
    }
}

/// Lorentz factor data: (γ, (γ-1)/|ℓ|²). The second entry is written as
/// 1/(√(1-|ℓ|²)(1+√(1-|ℓ|²))), which has no cancellation as ℓ → 0.
fn boost_factors(l2: f64) -> (f64, f64) {
    let s = (1.0 - l2).sqrt();
    (1.0 / s, 1.0 / (s * (1.0 + s)))
}

/// The argument y = (−γt + ((γ−1)/|ℓ|²) ℓ·x) ℓ + x at which Q is evaluated.
fn boost_argument(t: f64, x: &[f64], ell: &[f64]) -> Vec<f64> {
    if ell.is_empty() {
        return x.to_vec();
    }
    let l2: f64 = ell.iter().map(|a| a * a).sum();
    let (gamma, c) = boost_factors(l2);
    let lx: f64 = ell.iter().zip(x).map(|(a, b)| a * b).sum();
    let k = -gamma * t + c * lx;
    x.iter().zip(ell).map(|(xi, li)| xi + k * li).collect()
}

fn check_point(x: &[f64], dim: Dimension) -> Result<()> {
    if x.len() != dim.get() as usize {
        return Err(Error::Precondition(format!("point has {} coordinates in {dim}", x.len())));
    }
    Ok(())
}

/// Q_ℓ(t, x). Below |ℓ| = 1e-8 the unboosted profile is used.
pub fn eval_q_ell(t: f64, x: &[f64], spec: &SolitonSpec, dim: Dimension) -> Result<f64> {
    spec.validate(dim)?;
    check_point(x, dim)?;
    let y = if spec.speed() < 1e-8 { x.to_vec() } else { boost_argument(t, x, &spec.ell) };
    let r = y.iter().map(|a| a * a).sum::<f64>().sqrt();
    Ok(spec.profile(r, dim))
}

/// (∇_x Q_ℓ(0, x), ∂_t Q_ℓ(0, x)) from the closed formula; the time
/// derivative is −ℓ·∇Q_ℓ since Q_ℓ(t, x) = Q_ℓ(0, x − tℓ).
pub fn q_ell_derivatives(x: &[f64], spec: &SolitonSpec, dim: Dimension) -> Result<(Vec<f64>, f64)> {
    spec.validate(dim)?;
    check_point(x, dim)?;
    let boosted = spec.speed() >= 1e-8;
    let y = if boosted { boost_argument(0.0, x, &spec.ell) } else { x.to_vec() };
    let r = y.iter().map(|a| a * a).sum::<f64>().sqrt();
    let qp = spec.profile_prime(r, dim);
    let grad_y: Vec<f64> = if r > 0.0 { y.iter().map(|a| qp * a / r).collect() } else { vec![0.0; y.len()] };
    if !boosted {
        return Ok((grad_y, 0.0));
    }
    // ∇_x = (I + c ℓℓᵀ) ∇_y
    let l2: f64 = spec.ell.iter().map(|a| a * a).sum();
    let (_, c) = boost_factors(l2);
    let lg: f64 = spec.ell.iter().zip(&grad_y).map(|(a, b)| a * b).sum();
    let grad: Vec<f64> = grad_y.iter().zip(&spec.ell).map(|(g, l)| g + c * lg * l).collect();
    let dt = -spec.ell.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>();
    Ok((grad, dt))
}

/// Quadrature resolution for [`soliton_energy`]: panels in the compactified
/// radius s = ρ/(1+ρ) and in the polar angle about ℓ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnergyQuadrature {
    pub radial: usize,
    pub angular: usize,
}

impl Default for EnergyQuadrature {
    fn default() -> Self {
        Self { radial: 800, angular: 96 }
    }
}

fn energy_density(x: &[f64], spec: &SolitonSpec, dim: Dimension) -> Result<f64> {
    let (grad, dt) = q_ell_derivatives(x, spec, dim)?;
    let q = eval_q_ell(0.0, x, spec, dim)?;
    let g2: f64 = grad.iter().map(|a| a * a).sum();
    Ok(0.5 * g2 + 0.5 * dt * dt - dim.potential_coefficient() * dim.critical_power(q))
}

fn energy_at(spec: &SolitonSpec, dim: Dimension, rule: EnergyQuadrature) -> Result<f64> {
    let n = dim.get() as usize;
    let speed = spec.speed();
    let axis: Vec<f64> = if speed > 0.0 {
        spec.ell.iter().map(|a| a / speed).collect()
    } else {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        e
    };
    // Any unit vector orthogonal to the axis.
    let mut perp = vec![0.0; n];
    let k = (0..n).min_by(|&i, &j| axis[i].abs().total_cmp(&axis[j].abs())).unwrap();
    perp[k] = 1.0;
    let dot: f64 = perp.iter().zip(&axis).map(|(a, b)| a * b).sum();
    perp.iter_mut().zip(&axis).for_each(|(p, a)| *p -= dot * a);
    let norm = perp.iter().map(|a| a * a).sum::<f64>().sqrt();
    perp.iter_mut().for_each(|p| *p /= norm);

    let ds = 1.0 / rule.radial as f64;
    let dth = std::f64::consts::PI / rule.angular as f64;
    let mut total = 0.0;
    let mut x = vec![0.0; n];
    for i in 0..rule.radial {
        let s = (i as f64 + 0.5) * ds;
        let rho = s / (1.0 - s);
        let jac = rho.powi(n as i32 - 1) / ((1.0 - s) * (1.0 - s));
        let mut ring = 0.0;
        for j in 0..rule.angular {
            let th = (j as f64 + 0.5) * dth;
            let (mu, sn) = (th.cos(), th.sin());
            for d in 0..n {
                x[d] = rho * (mu * axis[d] + sn * perp[d]);
            }
            ring += energy_density(&x, spec, dim)? * sn.powi(n as i32 - 2);
        }
        total += ring * dth * jac * ds;
    }
    Ok(dim.transverse_sphere_area() * total)
}

/// E(Q_ℓ(0), ∂_t Q_ℓ(0)) by axisymmetric quadrature of the closed formula.
/// The rule is run at `rule` and at twice its resolution; disagreement above
/// 1% is reported as an accuracy error, otherwise the finer value is returned.
pub fn soliton_energy(spec: &SolitonSpec, dim: Dimension) -> Result<f64> {
    soliton_energy_with(spec, dim, EnergyQuadrature::default())
}

pub fn soliton_energy_with(spec: &SolitonSpec, dim: Dimension, rule: EnergyQuadrature) -> Result<f64> {
    spec.validate(dim)?;
    let coarse = energy_at(spec, dim, rule)?;
    let fine = energy_at(spec, dim, EnergyQuadrature { radial: 2 * rule.radial, angular: 2 * rule.angular })?;
    if (fine - coarse).abs() > 0.01 * fine.abs() {
        return Err(Error::Accuracy(format!("soliton energy quadrature unresolved: {coarse} vs {fine}")));
    }
    Ok(fine)
}

/// E(W) = (1/N) ∫|∇W|², with the gradient integral done by a fine
/// compactified one-dimensional midpoint rule.
pub fn ground_state_energy(dim: Dimension) -> f64 {
    let n = dim.get() as i32;
    let panels = 200_000;
    let ds = 1.0 / panels as f64;
    let mut sum = 0.0;
    for i in 0..panels {
        let s = (i as f64 + 0.5) * ds;
        let r = s / (1.0 - s);
        let wp = eval_w_prime(r, dim);
        sum += wp * wp * r.powi(n - 1) / ((1.0 - s) * (1.0 - s));
    }
    dim.sphere_area() * sum * ds / dim.as_f64()
}

/// max_i |ΔW + W^{(N+2)/(N-2)}| over the grid nodes (the outer node excluded),
/// with the solver's discrete Laplacian.
pub fn elliptic_residual(grid: &RadialGrid, dim: Dimension) -> f64 {
    let w: Vec<f64> = grid.nodes().map(|r| eval_w(r, dim)).collect();
    let mut lap = vec![0.0; grid.len()];
    RadialLaplacian::new(grid, dim).apply(&w, &mut lap);
    (0..grid.len() - 1).map(|i| (lap[i] + dim.nonlinearity(w[i])).abs()).fold(0.0, f64::max)
}

/// The ball version of the pairing identity ∫|∇W|² = ∫W^{2N/(N-2)}:
/// returns (∫_B |∇W|² − ∫_B W^{2N/(N-2)}, |S^{N-1}| R^{N-1} W(R) W'(R), ∫_B |∇W|²)
/// for the ball B of radius r_max, with W' in closed form.
pub fn pairing_identity(grid: &RadialGrid, dim: Dimension) -> (f64, f64, f64) {
    let grad: Vec<f64> = grid.nodes().map(|r| eval_w_prime(r, dim).powi(2)).collect();
    let pot: Vec<f64> = grid.nodes().map(|r| dim.critical_power(eval_w(r, dim))).collect();
    let g = radial_integral_between(&grad, grid, dim, 0.0, f64::INFINITY);
    let p = radial_integral_between(&pot, grid, dim, 0.0, f64::INFINITY);
    let r = grid.r_max();
    let flux = dim.sphere_area() * r.powi(dim.get() as i32 - 1) * eval_w(r, dim) * eval_w_prime(r, dim);
    (g - p, flux, g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonFit {
    pub lambda: f64,
    pub sign: Sign,
    /// ‖∇(u − fit)‖ / ‖∇u‖
    pub residual: f64,
}

const LOG_LAMBDA_RANGE: (f64, f64) = (-6.907755278982137, 6.907755278982137);

/// Best Ḣ¹ approximation of `state.u` by ±λ^{-(N-2)/2} W(·/λ), λ ∈ [1e-3, 1e3]:
/// a coarse scan over log λ followed by 60 golden-section iterations around
/// the best scan point.
pub fn fit_soliton(state: &RadialState, dim: Dimension) -> Result<SolitonFit> {
    state.validate()?;
    if state.u.iter().all(|&x| x == 0.0) {
        return Err(Error::UndefinedFit);
    }
    let grid = state.grid;
    let du = radial_derivative(&state.u, grid.dr());
    let norm2 = |f: &[f64]| -> f64 {
        let sq: Vec<f64> = f.iter().map(|x| x * x).collect();
        radial_integral_between(&sq, &grid, dim, 0.0, f64::INFINITY)
    };
    let base = norm2(&du);
    if base == 0.0 {
        return Err(Error::UndefinedFit);
    }
    let objective = |log_lambda: f64, sign: Sign| -> f64 {
        let spec = SolitonSpec { lambda: log_lambda.exp(), sign, ell: Vec::new() };
        let q: Vec<f64> = grid.nodes().map(|r| spec.profile(r, dim)).collect();
        let dq = radial_derivative(&q, grid.dr());
        let diff: Vec<f64> = du.iter().zip(&dq).map(|(a, b)| a - b).collect();
        norm2(&diff) / base
    };
    let (lo, hi) = LOG_LAMBDA_RANGE;
    let scan = 120;
    let step = (hi - lo) / scan as f64;
    let mut best = (f64::INFINITY, 0.0, Sign::Positive);
    for sign in [Sign::Positive, Sign::Negative] {
        for k in 0..=scan {
            let x = lo + k as f64 * step;
            let f = objective(x, sign);
            if f < best.0 {
                best = (f, x, sign);
            }
        }
    }
    let (_, x0, sign) = best;
    let (mut a, mut b) = ((x0 - step).max(lo), (x0 + step).min(hi));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = objective(c, sign);
    let mut fd = objective(d, sign);
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = objective(c, sign);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = objective(d, sign);
        }
    }
    let x = 0.5 * (a + b);
    Ok(SolitonFit { lambda: x.exp(), sign, residual: objective(x, sign).max(0.0).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_values_in_three_dimensions() {
        assert_eq!(eval_w(0.0, Dimension::THREE), 1.0);
        assert!((eval_w(3f64.sqrt(), Dimension::THREE) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(eval_w(0.0, Dimension::FOUR), 1.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for dim in Dimension::ALL {
            for r in [0.3, 1.0, 4.0] {
                let h = 1e-5;
                let fd = (eval_w(r + h, dim) - eval_w(r - h, dim)) / (2.0 * h);
                assert!((fd - eval_w_prime(r, dim)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn boost_speed_is_checked() {
        let spec = SolitonSpec::boosted(1.0, Dimension::THREE);
        assert!(matches!(eval_q_ell(0.0, &[0.0; 3], &spec, Dimension::THREE), Err(Error::Precondition(_))));
    }

    #[test]
    fn zero_boost_is_static() {
        let spec = SolitonSpec::boosted(0.0, Dimension::FOUR);
        let x = [0.3, -1.0, 0.5, 2.0];
        let q = eval_q_ell(7.0, &x, &spec, Dimension::FOUR).unwrap();
        let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert_eq!(q, eval_w(r, Dimension::FOUR));
    }

    #[test]
    fn zero_state_has_no_fit() {
        let grid = RadialGrid::new(4.0, 41).unwrap();
        assert!(matches!(fit_soliton(&RadialState::zero(grid), Dimension::THREE), Err(Error::UndefinedFit)));
    }
}
