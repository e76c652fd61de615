//! Free and forced radial wave propagators.
//!
//! The numeric propagator discretizes Δu = r^{1-N} ∂_r(r^{N-1} ∂_r u) in flux
//! form on dual cells [r_i - dr/2, r_i + dr/2] and steps with velocity Verlet
//! (the kick-drift-kick form of leapfrog). The exact N = 3 propagator uses the
//! d'Alembert formula for r·u.

use serde::{Deserialize, Serialize};

use crate::dimension::Dimension;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::quadrature::{cumulative_trapezoid, odd_radial_derivative};
use crate::state::RadialState;

pub const DEFAULT_CFL: f64 = 0.5;

/// Largest CFL ratio accepted by the numeric propagator. The flux-form
/// operator has a larger spectral radius than the 1-D second difference,
/// growing with N; the limits sit below the measured stability bounds
/// (about 0.79, 0.70 and 0.63).
pub fn stability_limit(dim: Dimension) -> f64 {
    match dim.get() {
        3 => 0.75,
        4 => 0.65,
        _ => 0.6,
    }
}

/// What the outer boundary node is allowed to assume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPolicy {
    /// Require compact data whose domain of influence never reaches r_max.
    #[default]
    Causal,
    /// Hold the outer node at its initial value, for non-compact data that
    /// are (nearly) stationary near r_max such as the ground state.
    Frozen,
    /// Evolve compact data on a zero-padded copy of the grid wide enough for
    /// the causal window and report the original nodes.
    Extend,
}

/// Checks that data supported in r <= M, evolved for `duration`, stay at
/// least two cells away from r_max.
pub fn check_causal_window(state: &RadialState, duration: f64) -> Result<()> {
    let m = state.support_radius().unwrap_or(0.0);
    let required = m + duration.abs() + 2.0 * state.grid.dr();
    let available = state.grid.r_max();
    if required > available * (1.0 + 1e-12) {
        return Err(Error::DomainTooSmall { required, available });
    }
    Ok(())
}

fn check_cfl(cfl: f64, dim: Dimension) -> Result<()> {
    let limit = stability_limit(dim);
    if !(cfl > 0.0 && cfl <= 1.0) || cfl > limit {
        return Err(Error::Configuration(format!("CFL ratio {cfl} outside (0, {limit}] for {dim}")));
    }
    Ok(())
}

/// Conservative radial Laplacian. Exact on constants and on r².
#[derive(Debug, Clone)]
pub struct RadialLaplacian {
    /// r_{i+1/2}^{N-1} / dr
    face: Vec<f64>,
    /// 1 / V_i with V_i = ∫ r^{N-1} dr over the dual cell of node i
    inv_vol: Vec<f64>,
}

impl RadialLaplacian {
    pub fn new(grid: &RadialGrid, dim: Dimension) -> Self {
        let n = grid.len();
        let h = grid.dr();
        let d = dim.get() as i32;
        let face = (0..n - 1).map(|i| ((i as f64 + 0.5) * h).powi(d - 1) / h).collect();
        let inv_vol = (0..n)
            .map(|i| {
                let a = i as f64 * h;
                let b = 0.5 * h;
                let vol = if i == 0 {
                    b.powi(d) / f64::from(d)
                } else {
                    // ((a+b)^N - (a-b)^N) / N keeping only the odd binomial
                    // terms, which avoids cancellation at large r.
                    let mut s = 0.0;
                    let mut binom = 1.0;
                    for k in 1..=d {
                        binom = binom * f64::from(d - k + 1) / f64::from(k);
                        if k % 2 == 1 {
                            s += binom * a.powi(d - k) * b.powi(k);
                        }
                    }
                    2.0 * s / f64::from(d)
                };
                1.0 / vol
            })
            .collect();
        Self { face, inv_vol }
    }

    pub fn len(&self) -> usize {
        self.inv_vol.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_vol.is_empty()
    }

    /// Writes Δu into `out`; the outer node gets 0.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = self.inv_vol.len();
        let mut prev = 0.0;
        for i in 0..n - 1 {
            let flux = self.face[i] * (u[i + 1] - u[i]);
            out[i] = (flux - prev) * self.inv_vol[i];
            prev = flux;
        }
        out[n - 1] = 0.0;
    }
}

/// Right-hand side f of ∂_t²u − Δu = f.
pub trait Source {
    /// Adds f(t, ·) to `acc`, given the current nodal field `u`.
    fn accumulate(&mut self, t: f64, u: &[f64], acc: &mut [f64]) -> Result<()>;
}

impl<S: Source + ?Sized> Source for &mut S {
    fn accumulate(&mut self, t: f64, u: &[f64], acc: &mut [f64]) -> Result<()> {
        (**self).accumulate(t, u, acc)
    }
}

/// The free wave equation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoSource;

impl Source for NoSource {
    fn accumulate(&mut self, _: f64, _: &[f64], _: &mut [f64]) -> Result<()> {
        Ok(())
    }
}

/// A source given in closed form as f(t, r).
#[derive(Debug, Clone)]
pub struct FnSource<F> {
    f: F,
    nodes: Vec<f64>,
}

impl<F: FnMut(f64, f64) -> f64> FnSource<F> {
    pub fn new(grid: &RadialGrid, f: F) -> Self {
        Self { f, nodes: grid.nodes().collect() }
    }
}

impl<F: FnMut(f64, f64) -> f64> Source for FnSource<F> {
    fn accumulate(&mut self, t: f64, _: &[f64], acc: &mut [f64]) -> Result<()> {
        for (a, &r) in acc.iter_mut().zip(&self.nodes) {
            *a += (self.f)(t, r);
        }
        Ok(())
    }
}

/// A source known on the radial grid at a set of increasing times, linearly
/// interpolated in between.
#[derive(Debug, Clone)]
pub struct SampledSource {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl SampledSource {
    pub fn new(grid: &RadialGrid, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidState("one source row per time is required".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidState("source times must increase strictly".into()));
        }
        if values.iter().any(|row| row.len() != grid.len() || row.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidState("source rows must be finite and match the grid".into()));
        }
        Ok(Self { times, values })
    }
}

impl Source for SampledSource {
    fn accumulate(&mut self, t: f64, _: &[f64], acc: &mut [f64]) -> Result<()> {
        let (first, last) = (self.times[0], *self.times.last().unwrap());
        let slack = 1e-9 * (1.0 + first.abs().max(last.abs()));
        if t < first - slack || t > last + slack {
            return Err(Error::Range(format!("source sampled on [{first}, {last}], queried at {t}")));
        }
        let k = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len().max(2) - 1);
        if self.times.len() == 1 {
            acc.iter_mut().zip(&self.values[0]).for_each(|(a, f)| *a += f);
            return Ok(());
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        for ((a, f0), f1) in acc.iter_mut().zip(&self.values[k - 1]).zip(&self.values[k]) {
            *a += f0 + s * (f1 - f0);
        }
        Ok(())
    }
}

/// Velocity-Verlet integrator for ∂_t²u = Δu + f. The outer node is held at
/// its initial values.
#[derive(Debug, Clone)]
pub struct Leapfrog {
    lap: RadialLaplacian,
    grid: RadialGrid,
    t: f64,
    u: Vec<f64>,
    v: Vec<f64>,
    acc: Vec<f64>,
}

impl Leapfrog {
    pub fn new<S: Source>(state: &RadialState, dim: Dimension, source: &mut S) -> Result<Self> {
        state.validate()?;
        let lap = RadialLaplacian::new(&state.grid, dim);
        let mut me = Self {
            lap,
            grid: state.grid,
            t: state.t,
            u: state.u.clone(),
            v: state.v.clone(),
            acc: vec![0.0; state.grid.len()],
        };
        me.compute_acceleration(source)?;
        Ok(me)
    }

    fn compute_acceleration<S: Source>(&mut self, source: &mut S) -> Result<()> {
        self.lap.apply(&self.u, &mut self.acc);
        source.accumulate(self.t, &self.u, &mut self.acc)?;
        let n = self.acc.len();
        self.acc[n - 1] = 0.0;
        Ok(())
    }

    pub fn step<S: Source>(&mut self, dt: f64, source: &mut S) -> Result<()> {
        let n = self.u.len();
        let half = 0.5 * dt;
        for i in 0..n - 1 {
            self.v[i] += half * self.acc[i];
            self.u[i] += dt * self.v[i];
        }
        self.t += dt;
        self.compute_acceleration(source)?;
        for i in 0..n - 1 {
            self.v[i] += half * self.acc[i];
        }
        Ok(())
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn state(&self) -> RadialState {
        RadialState { grid: self.grid, t: self.t, u: self.u.clone(), v: self.v.clone() }
    }

    /// Overwrites the dynamic fields with those of `other` (same grid).
    pub fn restore_from(&mut self, other: &Leapfrog) {
        self.t = other.t;
        self.u.copy_from_slice(&other.u);
        self.v.copy_from_slice(&other.v);
        self.acc.copy_from_slice(&other.acc);
    }
}

/// Number of equal steps of size at most `cfl·dr` covering `span`.
pub fn step_count(span: f64, dr: f64, cfl: f64) -> usize {
    ((span.abs() / (cfl * dr)) - 1e-9).ceil().max(0.0) as usize
}

/// How a [`LinearEvolution`] is propagated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Method {
    /// d'Alembert formula for r·u, N = 3 only.
    Exact3d,
    /// Flux-form Laplacian with velocity-Verlet stepping.
    Numeric { cfl: f64 },
}

/// Free evolution t ↦ S_L(t)(v₀, v₁) of a datum given at time `data.t`.
#[derive(Debug, Clone)]
pub struct LinearEvolution {
    data: RadialState,
    dim: Dimension,
    method: Method,
    policy: BoundaryPolicy,
    exact: Option<ExactWave3d>,
}

impl LinearEvolution {
    pub fn new(data: RadialState, dim: Dimension, method: Method) -> Result<Self> {
        data.validate()?;
        let exact = match method {
            Method::Exact3d => Some(ExactWave3d::new(&data, dim)?),
            Method::Numeric { cfl } => {
                check_cfl(cfl, dim)?;
                None
            }
        };
        Ok(Self { data, dim, method, policy: BoundaryPolicy::Causal, exact })
    }

    pub fn exact_3d(data: RadialState) -> Result<Self> {
        Self::new(data, Dimension::THREE, Method::Exact3d)
    }

    pub fn numeric(data: RadialState, dim: Dimension) -> Result<Self> {
        Self::new(data, dim, Method::Numeric { cfl: DEFAULT_CFL })
    }

    /// Relaxes the causal-window check (numeric method only).
    pub fn with_policy(mut self, policy: BoundaryPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn data(&self) -> &RadialState {
        &self.data
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.data.grid
    }

    pub fn exact(&self) -> Option<&ExactWave3d> {
        self.exact.as_ref()
    }

    /// The solution at absolute time `t`.
    pub fn state_at(&self, t: f64) -> Result<RadialState> {
        Ok(self.states_at(&[t])?.remove(0))
    }

    /// Solutions at the increasing times `ts` (numeric runs are continued
    /// from one time to the next).
    pub fn states_at(&self, ts: &[f64]) -> Result<Vec<RadialState>> {
        match self.method {
            Method::Exact3d => {
                let exact = self.exact.as_ref().expect("exact solver is built with the evolution");
                ts.iter().map(|&t| exact.state_at(t)).collect()
            }
            Method::Numeric { cfl } => {
                let span = ts.iter().fold(0.0_f64, |m, &t| m.max((t - self.data.t).abs()));
                let mut cur = match self.policy {
                    BoundaryPolicy::Causal => {
                        check_causal_window(&self.data, span)?;
                        self.data.clone()
                    }
                    BoundaryPolicy::Frozen => self.data.clone(),
                    BoundaryPolicy::Extend => padded(&self.data, span)?,
                };
                let n = self.data.grid.len();
                let mut out = Vec::with_capacity(ts.len());
                for &t in ts {
                    cur = run(&cur, t, self.dim, cfl, &mut NoSource)?;
                    out.push(if cur.grid == self.data.grid { cur.clone() } else { restrict(&cur, self.data.grid, n) });
                }
                Ok(out)
            }
        }
    }
}

/// `state` on a grid with the same spacing, extended with zeros so that the
/// causal window of length `span` fits.
fn padded(state: &RadialState, span: f64) -> Result<RadialState> {
    let dr = state.grid.dr();
    let required = state.support_radius().unwrap_or(0.0) + span.abs() + 2.0 * dr;
    if required <= state.grid.r_max() {
        return Ok(state.clone());
    }
    let cells = (required / dr).ceil() as usize + 1;
    let grid = RadialGrid::new(cells as f64 * dr, cells + 1)?;
    let mut u = state.u.clone();
    let mut v = state.v.clone();
    u.resize(grid.len(), 0.0);
    v.resize(grid.len(), 0.0);
    Ok(RadialState { grid, t: state.t, u, v })
}

fn restrict(state: &RadialState, grid: RadialGrid, n: usize) -> RadialState {
    RadialState { grid, t: state.t, u: state.u[..n].to_vec(), v: state.v[..n].to_vec() }
}

fn run<S: Source>(data: &RadialState, t: f64, dim: Dimension, cfl: f64, source: &mut S) -> Result<RadialState> {
    let span = t - data.t;
    let steps = step_count(span, data.grid.dr(), cfl);
    if steps == 0 {
        return Ok(data.clone().at_time(t));
    }
    let dt = span / steps as f64;
    let mut lf = Leapfrog::new(data, dim, source)?;
    for _ in 0..steps {
        lf.step(dt, source)?;
    }
    let mut out = lf.state();
    out.t = t;
    out.validate()?;
    Ok(out)
}

/// Exact free evolution of N = 3 radial data.
pub fn evolve_linear_exact_3d(data: &RadialState, t: f64) -> Result<RadialState> {
    ExactWave3d::new(data, Dimension::THREE)?.state_at(t)
}

/// Numeric free evolution at the default CFL ratio.
pub fn evolve_linear_numeric(data: &RadialState, t: f64, dim: Dimension) -> Result<RadialState> {
    check_causal_window(data, t - data.t)?;
    run(data, t, dim, DEFAULT_CFL, &mut NoSource)
}

/// Solution of ∂_t²u − Δu = f with the given data at time `data.t`,
/// evaluated at time `t` (earlier or later).
pub fn solve_inhomogeneous<S: Source>(
    data: &RadialState,
    source: &mut S,
    t: f64,
    dim: Dimension,
) -> Result<RadialState> {
    solve_inhomogeneous_with(data, source, t, dim, DEFAULT_CFL, BoundaryPolicy::Causal)
}

pub fn solve_inhomogeneous_with<S: Source>(
    data: &RadialState,
    source: &mut S,
    t: f64,
    dim: Dimension,
    cfl: f64,
    policy: BoundaryPolicy,
) -> Result<RadialState> {
    check_cfl(cfl, dim)?;
    if policy == BoundaryPolicy::Causal {
        check_causal_window(data, t - data.t)?;
    }
    run(data, t, dim, cfl, source)
}

/// d'Alembert representation of a free N = 3 radial wave.
///
/// With W₀(s) = s·u₀(|s|), W₁(s) = s·u₁(|s|) extended oddly and
/// P(s) = ∫₀^s W₁, the function w = r·u is
/// w(t, r) = ½[W₀(r+t) + W₀(r−t)] + ½[P(r+t) − P(r−t)].
#[derive(Debug, Clone)]
pub struct ExactWave3d {
    grid: RadialGrid,
    t0: f64,
    support: f64,
    w0: Vec<f64>,
    w0_prime: Vec<f64>,
    w1: Vec<f64>,
    p: Vec<f64>,
}

#[derive(Clone, Copy)]
enum Parity {
    Even,
    Odd,
}

impl ExactWave3d {
    pub fn new(data: &RadialState, dim: Dimension) -> Result<Self> {
        if dim != Dimension::THREE {
            return Err(Error::InvalidDimension(dim.get()));
        }
        data.validate()?;
        let grid = data.grid;
        let support = data.support_radius().unwrap_or(0.0);
        if support + 2.0 * grid.dr() > grid.r_max() * (1.0 + 1e-12) {
            return Err(Error::DomainTooSmall { required: support + 2.0 * grid.dr(), available: grid.r_max() });
        }
        let w0: Vec<f64> = grid.nodes().zip(&data.u).map(|(r, u)| r * u).collect();
        let w1: Vec<f64> = grid.nodes().zip(&data.v).map(|(r, v)| r * v).collect();
        let w0_prime = odd_radial_derivative(&w0, grid.dr());
        let p = cumulative_trapezoid(&w1, grid.dr());
        Ok(Self { grid, t0: data.t, support, w0, w0_prime, w1, p })
    }

    fn lookup(&self, table: &[f64], x: f64, parity: Parity, beyond: f64) -> f64 {
        let a = x.abs();
        let sign = match parity {
            Parity::Odd if x < 0.0 => -1.0,
            _ => 1.0,
        };
        if a >= self.grid.r_max() {
            return sign * beyond;
        }
        let s = a / self.grid.dr();
        let nearest = s.round();
        let value = if (s - nearest).abs() < 1e-9 {
            table[nearest as usize]
        } else {
            let i = s.floor() as usize;
            let f = s - i as f64;
            table[i] + f * (table[i + 1] - table[i])
        };
        sign * value
    }

    /// (w, ∂_t w) at elapsed time `s` and radius `r`.
    fn w_pair(&self, s: f64, r: f64) -> (f64, f64) {
        let p_inf = *self.p.last().unwrap();
        let (a, b) = (r + s, r - s);
        let w = 0.5 * (self.lookup(&self.w0, a, Parity::Odd, 0.0) + self.lookup(&self.w0, b, Parity::Odd, 0.0))
            + 0.5 * (self.lookup(&self.p, a, Parity::Even, p_inf) - self.lookup(&self.p, b, Parity::Even, p_inf));
        let wt = 0.5
            * (self.lookup(&self.w0_prime, a, Parity::Even, 0.0) - self.lookup(&self.w0_prime, b, Parity::Even, 0.0))
            + 0.5 * (self.lookup(&self.w1, a, Parity::Odd, 0.0) + self.lookup(&self.w1, b, Parity::Odd, 0.0));
        (w, wt)
    }

    /// Radius beyond which the data vanish.
    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn initial_time(&self) -> f64 {
        self.t0
    }

    /// (u, ∂_t u) at an arbitrary point, including outside the grid.
    pub fn eval(&self, t: f64, r: f64) -> (f64, f64) {
        let s = t - self.t0;
        if r > 0.0 {
            let (w, wt) = self.w_pair(s, r);
            (w / r, wt / r)
        } else {
            let h = self.grid.dr();
            let (w1, wt1) = self.w_pair(s, h);
            let (w2, wt2) = self.w_pair(s, 2.0 * h);
            ((8.0 * w1 - w2) / (6.0 * h), (8.0 * wt1 - wt2) / (6.0 * h))
        }
    }

    /// (r·u, ∂_t(r·u)) at an arbitrary point.
    pub fn eval_rw(&self, t: f64, r: f64) -> (f64, f64) {
        self.w_pair(t - self.t0, r)
    }

    /// The solution sampled on the data grid at time `t`.
    pub fn state_at(&self, t: f64) -> Result<RadialState> {
        let s = t - self.t0;
        let required = self.support + s.abs();
        if required > self.grid.r_max() * (1.0 + 1e-12) {
            return Err(Error::DomainTooSmall { required, available: self.grid.r_max() });
        }
        let n = self.grid.len();
        let mut u = vec![0.0; n];
        let mut v = vec![0.0; n];
        for i in 1..n {
            let r = self.grid.node(i);
            let (w, wt) = self.w_pair(s, r);
            u[i] = w / r;
            v[i] = wt / r;
        }
        let (u0, v0) = self.eval(t, 0.0);
        u[0] = u0;
        v[0] = v0;
        RadialState::new(self.grid, t, u, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Bump;
    use crate::energy::energy;

    #[test]
    fn laplacian_is_exact_on_quadratics() {
        let grid = RadialGrid::new(3.0, 31).unwrap();
        for dim in Dimension::ALL {
            let lap = RadialLaplacian::new(&grid, dim);
            let u: Vec<f64> = grid.nodes().map(|r| 2.0 + r * r).collect();
            let mut out = vec![0.0; grid.len()];
            lap.apply(&u, &mut out);
            for x in &out[..grid.len() - 1] {
                assert!((x - 2.0 * dim.as_f64()).abs() < 1e-9, "{dim}: {x}");
            }
        }
    }

    #[test]
    fn zero_data_stay_zero() {
        let grid = RadialGrid::new(4.0, 65).unwrap();
        let z = RadialState::zero(grid);
        for dim in Dimension::ALL {
            assert!(evolve_linear_numeric(&z, 1.0, dim).unwrap().is_zero());
        }
        assert!(evolve_linear_exact_3d(&z, 3.0).unwrap().is_zero());
    }

    #[test]
    fn cfl_and_window_are_validated() {
        let grid = RadialGrid::new(4.0, 65).unwrap();
        let b = Bump::new(1.0, 0.0, 1.0).unwrap();
        let s = RadialState::from_fn(grid, |r| b.eval(r), |_| 0.0).unwrap();
        assert!(matches!(
            LinearEvolution::new(s.clone(), Dimension::FIVE, Method::Numeric { cfl: 0.7 }),
            Err(Error::Configuration(_))
        ));
        assert!(matches!(evolve_linear_numeric(&s, 3.5, Dimension::FOUR), Err(Error::DomainTooSmall { .. })));
        assert!(matches!(evolve_linear_exact_3d(&s, 3.5), Err(Error::DomainTooSmall { .. })));
        assert!(LinearEvolution::exact_3d(s).unwrap().state_at(2.9).is_ok());
    }

    #[test]
    fn exact_solution_obeys_sharp_huygens() {
        let grid = RadialGrid::new(12.0, 1201).unwrap();
        let b = Bump::new(1.0, 0.0, 1.0).unwrap();
        let s = RadialState::from_fn(grid, |r| b.eval(r), |_| 0.0).unwrap();
        let out = evolve_linear_exact_3d(&s, 6.0).unwrap();
        for (i, r) in grid.nodes().enumerate() {
            if (r - 6.0).abs() > 1.0 + 1e-9 {
                assert!(out.u[i].abs() < 1e-14 && out.v[i].abs() < 1e-14, "r={r}");
            }
        }
        assert!(out.sup_norm() > 0.01);
    }

    #[test]
    fn exact_solver_conserves_energy() {
        let grid = RadialGrid::new(16.0, 4097).unwrap();
        let b = Bump::new(1.0, 0.0, 1.5).unwrap();
        let c = Bump::new(0.5, 2.0, 1.0).unwrap();
        let s = RadialState::from_fn(grid, |r| b.eval(r), |r| c.eval(r)).unwrap();
        let e0 = energy(&s, Dimension::THREE).unwrap().linear();
        for t in [1.0, 5.0, 10.0] {
            let e = energy(&evolve_linear_exact_3d(&s, t).unwrap(), Dimension::THREE).unwrap().linear();
            assert!((e / e0 - 1.0).abs() < 1e-4, "t={t}: {e} vs {e0}");
        }
    }

    #[test]
    fn sampled_zero_source_is_bitwise_free() {
        let grid = RadialGrid::new(6.0, 97).unwrap();
        let b = Bump::new(1.0, 0.0, 1.0).unwrap();
        let s = RadialState::from_fn(grid, |r| b.eval(r), |_| 0.0).unwrap();
        let mut src = SampledSource::new(&grid, vec![-1.0, 3.0], vec![vec![0.0; 97]; 2]).unwrap();
        let a = solve_inhomogeneous(&s, &mut src, 2.0, Dimension::FOUR).unwrap();
        let f = evolve_linear_numeric(&s, 2.0, Dimension::FOUR).unwrap();
        assert_eq!(a, f);
    }
}
