//! Trapezoid-rule integration on the radial grid, nodal derivatives and the
//! shared space-time region integrator.

use serde::{Deserialize, Serialize};

use crate::dimension::Dimension;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;

pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// Running trapezoid integral, `out[i] = ∫_{x_0}^{x_i}`.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out.truncate(values.len());
    out
}

/// Exact integral over `[lo, hi]` of the piecewise-linear interpolant of
/// `values` sampled at x_i = i h. The interval is clipped to the sampled
/// range, so partial end cells are integrated exactly; an empty intersection
/// integrates to zero.
pub fn integrate_piecewise_linear(values: &[f64], h: f64, lo: f64, hi: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let end = (n - 1) as f64 * h;
    let lo = lo.max(0.0);
    let hi = hi.min(end);
    if !(hi > lo) {
        return 0.0;
    }
    let at = |x: f64| -> (usize, f64) {
        let s = x / h;
        let i = (s.floor() as usize).min(n - 2);
        (i, (s - i as f64).clamp(0.0, 1.0))
    };
    let lerp = |i: usize, s: f64| values[i] + s * (values[i + 1] - values[i]);
    let (i0, s0) = at(lo);
    let (i1, s1) = at(hi);
    if i0 == i1 {
        return 0.5 * (lerp(i0, s0) + lerp(i1, s1)) * (hi - lo);
    }
    // Partial head cell [lo, x_{i0+1}], whole cells, partial tail cell [x_{i1}, hi].
    let mut total = 0.5 * (lerp(i0, s0) + values[i0 + 1]) * (1.0 - s0) * h;
    for i in i0 + 1..i1 {
        total += 0.5 * (values[i] + values[i + 1]) * h;
    }
    total + 0.5 * (values[i1] + lerp(i1, s1)) * s1 * h
}

/// ∂_r u on the nodes: centered differences inside, second-order one-sided at
/// r_max and exactly zero at the origin (u is even in r).
pub fn radial_derivative(u: &[f64], dr: f64) -> Vec<f64> {
    let n = u.len();
    let mut du = vec![0.0; n];
    if n < 3 {
        return du;
    }
    let inv = 0.5 / dr;
    for i in 1..n - 1 {
        du[i] = (u[i + 1] - u[i - 1]) * inv;
    }
    du[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) * inv;
    du
}

/// Centered derivative of nodal values of an odd function of r (such as r·u);
/// at the origin the odd reflection gives (f_1 - f_{-1}) / 2dr = f_1 / dr.
pub fn odd_radial_derivative(f: &[f64], dr: f64) -> Vec<f64> {
    let mut d = radial_derivative(f, dr);
    if f.len() > 1 {
        d[0] = f[1] / dr;
    }
    d
}

/// r_i^{N-1}, the radial Jacobian without the sphere area.
pub fn radial_weights(grid: &RadialGrid, dim: Dimension) -> Vec<f64> {
    let p = dim.get() as i32 - 1;
    grid.nodes().map(|r| r.powi(p)).collect()
}

/// ∫_{R^N} f(|x|) dx = |S^{N-1}| ∫ f(r) r^{N-1} dr by the trapezoid rule.
pub fn radial_integral(f: &[f64], grid: &RadialGrid, dim: Dimension) -> f64 {
    radial_integral_between(f, grid, dim, 0.0, f64::INFINITY)
}

/// Same as [`radial_integral`] restricted to the shell `lo <= |x| <= hi`.
pub fn radial_integral_between(f: &[f64], grid: &RadialGrid, dim: Dimension, lo: f64, hi: f64) -> f64 {
    let p = dim.get() as i32 - 1;
    let weighted: Vec<f64> = f.iter().enumerate().map(|(i, &x)| x * grid.node(i).powi(p)).collect();
    dim.sphere_area() * integrate_piecewise_linear(&weighted, grid.dr(), lo, hi)
}

/// Space-time region descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegionSpec {
    /// All of space at every sampled time.
    Full,
    /// The exterior of the wave cone, {|x| >= offset + t}.
    ExteriorCone { offset: f64 },
    /// All of space for t0 <= t <= t1.
    Slab { t0: f64, t1: f64 },
    /// The ball of radius `radius` centred at `center_offset * e_1`.
    BallWindow { center_offset: f64, radius: f64 },
}

impl RegionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RegionSpec::Slab { t0, t1 } if !(t0 < t1) => {
                Err(Error::Configuration(format!("slab needs t0 < t1, got [{t0}, {t1}]")))
            }
            RegionSpec::BallWindow { radius, .. } if !(radius > 0.0) => {
                Err(Error::Configuration(format!("ball radius must be positive, got {radius}")))
            }
            _ => Ok(()),
        }
    }

    /// Time interval covered by the region.
    pub fn time_extent(&self) -> (f64, f64) {
        match *self {
            RegionSpec::Slab { t0, t1 } => (t0, t1),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Radial interval of the slice Ω_t. `None` for off-centre balls, which
    /// are not radially symmetric.
    pub fn radial_interval(&self, t: f64) -> Option<(f64, f64)> {
        match *self {
            RegionSpec::Full | RegionSpec::Slab { .. } => Some((0.0, f64::INFINITY)),
            RegionSpec::ExteriorCone { offset } => Some((offset + t, f64::INFINITY)),
            RegionSpec::BallWindow { center_offset: 0.0, radius } => Some((0.0, radius)),
            RegionSpec::BallWindow { .. } => None,
        }
    }
}

/// Spatial measure used by [`quadrature_region`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialMeasure {
    /// Plain dr (one-dimensional integral in r).
    Flat,
    /// |S^{N-1}| r^{N-1} dr.
    Radial(Dimension),
}

/// Radial samples of a space-time function at increasing times.
#[derive(Debug, Clone)]
pub struct SpaceTimeSamples {
    pub grid: RadialGrid,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl SpaceTimeSamples {
    pub fn new(grid: RadialGrid, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidState("one sample row per time is required".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidState("sample times must increase strictly".into()));
        }
        if values.iter().any(|row| row.len() != grid.len()) {
            return Err(Error::InvalidState("sample row length differs from grid".into()));
        }
        Ok(Self { grid, times, values })
    }
}

/// Integral of `f` over the region: trapezoid in r within each time slice
/// (clipped to Ω_t), then trapezoid in t over the clipped time extent.
pub fn quadrature_region(f: &SpaceTimeSamples, region: &RegionSpec, measure: SpatialMeasure) -> Result<f64> {
    region.validate()?;
    let slices = slice_integrals(f, region, measure)?;
    let (t0, t1) = region.time_extent();
    Ok(integrate_in_time(&f.times, &slices, t0, t1))
}

pub(crate) fn slice_integrals(f: &SpaceTimeSamples, region: &RegionSpec, measure: SpatialMeasure) -> Result<Vec<f64>> {
    let grid = &f.grid;
    f.times
        .iter()
        .zip(&f.values)
        .map(|(&t, row)| {
            let (lo, hi) = region
                .radial_interval(t)
                .ok_or_else(|| Error::Configuration("off-centre windows need the axisymmetric integrator".into()))?;
            Ok(match measure {
                SpatialMeasure::Flat => integrate_piecewise_linear(row, grid.dr(), lo, hi),
                SpatialMeasure::Radial(dim) => radial_integral_between(row, grid, dim, lo, hi),
            })
        })
        .collect()
}

/// Trapezoid rule in time over nonuniform sample times, clipped to [t0, t1].
pub(crate) fn integrate_in_time(times: &[f64], values: &[f64], t0: f64, t1: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..times.len().saturating_sub(1) {
        let (a, b) = (times[k], times[k + 1]);
        let lo = a.max(t0);
        let hi = b.min(t1);
        if hi <= lo {
            continue;
        }
        let lerp = |t: f64| values[k] + (values[k + 1] - values[k]) * (t - a) / (b - a);
        total += 0.5 * (lerp(lo) + lerp(hi)) * (hi - lo);
    }
    total
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // Legendre recurrence for P_m(x) and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 0 {
                1.0
            } else if m == 1 {
                x
            } else {
                p1
            };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Axisymmetric integration over the ball {|y| <= radius} in R^N:
/// ∫ f dy = |S^{N-2}| ∫_0^R ∫_{-1}^{1} f(ρ, μ) ρ^{N-1} (1-μ²)^{(N-3)/2} dμ dρ,
/// trapezoid in ρ. The angular rule is Gauss–Legendre in μ for odd N and
/// midpoint in θ = arccos μ for N = 4; both integrate polynomials in μ of
/// degree below the panel count exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisymmetricRule {
    pub radial_panels: usize,
    pub angular_panels: usize,
}

impl Default for AxisymmetricRule {
    fn default() -> Self {
        Self { radial_panels: 256, angular_panels: 128 }
    }
}

impl AxisymmetricRule {
    /// (μ, weight) pairs for ∫_0^π F(cos θ) sin^{N-2} θ dθ.
    pub fn angular_nodes(&self, dim: Dimension) -> Vec<(f64, f64)> {
        let m = self.angular_panels.max(1);
        match dim.get() {
            4 => {
                let dth = std::f64::consts::PI / m as f64;
                (0..m)
                    .map(|j| {
                        let th = (j as f64 + 0.5) * dth;
                        (th.cos(), th.sin().powi(2) * dth)
                    })
                    .collect()
            }
            n => gauss_legendre(m)
                .into_iter()
                .map(|(mu, w)| (mu, w * (1.0 - mu * mu).powi((n as i32 - 3) / 2)))
                .collect(),
        }
    }

    pub fn integrate_ball(&self, dim: Dimension, radius: f64, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.integrate_ball_many(dim, radius, |rho, mu| [f(rho, mu)])[0]
    }

    /// Integrates K integrands sharing the same evaluation points.
    pub fn integrate_ball_many<const K: usize>(
        &self,
        dim: Dimension,
        radius: f64,
        mut f: impl FnMut(f64, f64) -> [f64; K],
    ) -> [f64; K] {
        let nr = self.radial_panels.max(1);
        let h = radius / nr as f64;
        let ang = self.angular_nodes(dim);
        let p = dim.get() as i32 - 1;
        let mut total = [0.0; K];
        for i in 1..=nr {
            let rho = i as f64 * h;
            let w = if i == nr { 0.5 * h } else { h } * rho.powi(p);
            for &(mu, wt) in &ang {
                let vals = f(rho, mu);
                for k in 0..K {
                    total[k] += w * wt * vals[k];
                }
            }
        }
        total.map(|x| dim.transverse_sphere_area() * x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn piecewise_linear_clipping_is_exact_for_linear_integrands() {
        let h = 0.1;
        let v: Vec<f64> = (0..=20).map(|i| 3.0 * i as f64 * h + 1.0).collect();
        let exact = |a: f64, b: f64| 1.5 * (b * b - a * a) + (b - a);
        for &(a, b) in &[(0.0, 2.0), (0.03, 1.97), (0.55, 0.58), (1.2, 5.0), (-1.0, 0.33)] {
            let got = integrate_piecewise_linear(&v, h, a, b);
            let (lo, hi) = (f64::max(a, 0.0), f64::min(b, 2.0));
            assert!((got - exact(lo, hi)).abs() < 1e-12, "[{a},{b}] -> {got}");
        }
        assert_eq!(integrate_piecewise_linear(&v, h, 2.5, 3.0), 0.0);
    }

    #[test]
    fn unit_slab_integrates_to_one() {
        let grid = RadialGrid::new(1.0, 33).unwrap();
        let times: Vec<f64> = (0..=16).map(|k| k as f64 / 16.0).collect();
        let vals = vec![vec![1.0; 33]; 17];
        let f = SpaceTimeSamples::new(grid, times, vals).unwrap();
        let q = quadrature_region(&f, &RegionSpec::Slab { t0: 0.0, t1: 1.0 }, SpatialMeasure::Flat).unwrap();
        assert!((q - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exterior_cone_area() {
        // {r >= t} within r <= 2, t in [0, 1]: ∫_0^1 (2 - t) dt = 3/2.
        let grid = RadialGrid::new(2.0, 101).unwrap();
        let times: Vec<f64> = (0..=37).map(|k| k as f64 / 37.0).collect();
        let vals = vec![vec![1.0; 101]; 38];
        let f = SpaceTimeSamples::new(grid, times, vals).unwrap();
        let q = quadrature_region(&f, &RegionSpec::ExteriorCone { offset: 0.0 }, SpatialMeasure::Flat).unwrap();
        assert!((q - 1.5).abs() < 1e-12);
    }

    #[test]
    fn empty_cone_gives_zero() {
        let grid = RadialGrid::new(2.0, 41).unwrap();
        let f = SpaceTimeSamples::new(grid, vec![0.0, 0.5], vec![vec![1.0; 41]; 2]).unwrap();
        let q = quadrature_region(&f, &RegionSpec::ExteriorCone { offset: 2.0 }, SpatialMeasure::Flat).unwrap();
        assert_eq!(q, 0.0);
    }

    #[test]
    fn radial_integral_converges_at_second_order() {
        // ∫_{|x|<=1} cos r dx in R^3 = 4π ∫_0^1 r² cos r dr = 4π (2 cos 1 − sin 1).
        let exact = 4.0 * PI * (2.0 * 1f64.cos() - 1f64.sin());
        let errs: Vec<f64> = [32usize, 64, 128]
            .iter()
            .map(|&cells| {
                let grid = RadialGrid::new(1.0, cells + 1).unwrap();
                let f: Vec<f64> = grid.nodes().map(f64::cos).collect();
                (radial_integral(&f, &grid, Dimension::THREE) - exact).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn derivative_is_second_order_with_exact_origin() {
        let grid = RadialGrid::new(2.0, 201).unwrap();
        let u: Vec<f64> = grid.nodes().map(|r| (r * r).cos()).collect();
        let du = radial_derivative(&u, grid.dr());
        assert_eq!(du[0], 0.0);
        let max_err = grid.nodes().zip(&du).map(|(r, d)| (d + 2.0 * r * (r * r).sin()).abs()).fold(0.0, f64::max);
        assert!(max_err < 5e-3, "{max_err}");
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = gauss_legendre(8);
        let sum: f64 = rule.iter().map(|&(x, w)| w * x.powi(14)).sum();
        assert!((sum - 2.0 / 15.0).abs() < 1e-14);
        assert!((rule.iter().map(|r| r.1).sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn angular_rules_integrate_second_moments_exactly() {
        // ∫_{S^{N-1}} ω₁² dω = |S^{N-1}| / N
        for dim in Dimension::ALL {
            let rule = AxisymmetricRule { radial_panels: 1, angular_panels: 6 };
            let m: f64 = rule.angular_nodes(dim).iter().map(|&(mu, w)| w * mu * mu).sum();
            let got = dim.transverse_sphere_area() * m;
            assert!((got - dim.sphere_area() / dim.as_f64()).abs() < 1e-13, "{dim}");
        }
    }

    #[test]
    fn axisymmetric_rule_measures_balls() {
        for dim in Dimension::ALL {
            let n = dim.as_f64();
            let vol = AxisymmetricRule { radial_panels: 400, angular_panels: 64 }.integrate_ball(dim, 1.5, |_, _| 1.0);
            let exact = dim.sphere_area() * 1.5f64.powf(n) / n;
            assert!((vol / exact - 1.0).abs() < 1e-3, "{dim}: {vol} vs {exact}");
        }
    }
}
