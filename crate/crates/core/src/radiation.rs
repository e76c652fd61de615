//! Radiation fields of free radial waves.
//!
//! With k = (N−1)/2 and the conjugated field w = r^k v, the outgoing
//! radiation field is read off along the ray r = T + η as
//! G(η) = ½ (∂_t − ∂_r) w (T, T + η), and its primitive
//! g(η) = ∫_η^∞ G is the limit of w(T, T + η).

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dimension::Dimension;
use crate::energy::{energy, energy_between, sobolev_norms};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::linear::{
    check_causal_window, solve_inhomogeneous_with, BoundaryPolicy, FnSource, LinearEvolution, Method, DEFAULT_CFL,
};
use crate::quadrature::{radial_derivative, trapezoid};
use crate::state::RadialState;

/// Uniform η-sampling [min, max] with spacing `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl EtaRange {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        let r = Self { min, max, step };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.max > self.min && self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::Range(format!("bad eta range [{}, {}] step {}", self.min, self.max, self.step)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.min + i as f64 * self.step)
    }
}

/// Samples of G(η) on a uniform η-grid, optionally with the primitive g.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationProfile {
    eta_min: f64,
    d_eta: f64,
    field: Vec<f64>,
    primitive: Option<Vec<f64>>,
}

impl RadiationProfile {
    pub fn new(eta_min: f64, d_eta: f64, field: Vec<f64>, primitive: Option<Vec<f64>>) -> Result<Self> {
        if !(d_eta > 0.0) || field.len() < 2 {
            return Err(Error::InvalidState("a profile needs at least two samples".into()));
        }
        if let Some(p) = &primitive {
            if p.len() != field.len() {
                return Err(Error::InvalidState("primitive and field lengths differ".into()));
            }
        }
        if field.iter().chain(primitive.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("non-finite profile sample".into()));
        }
        Ok(Self { eta_min, d_eta, field, primitive })
    }

    /// Profile from a closed-form G, with the primitive integrated from the right end.
    pub fn from_fn(range: EtaRange, g: impl Fn(f64) -> f64) -> Result<Self> {
        range.validate()?;
        let field: Vec<f64> = range.nodes().map(g).collect();
        Self::new(range.min, range.step, field, None).map(Self::with_primitive)
    }

    /// Profile from a closed-form pair (G, g) with g' = −G.
    pub fn from_fns(range: EtaRange, field: impl Fn(f64) -> f64, primitive: impl Fn(f64) -> f64) -> Result<Self> {
        range.validate()?;
        let f = range.nodes().map(field).collect();
        let p = range.nodes().map(primitive).collect();
        Self::new(range.min, range.step, f, Some(p))
    }

    /// Attaches g(η) = ∫_η^{η_max} G by the trapezoid rule.
    pub fn with_primitive(mut self) -> Self {
        let n = self.field.len();
        let mut p = vec![0.0; n];
        for i in (0..n - 1).rev() {
            p[i] = p[i + 1] + 0.5 * self.d_eta * (self.field[i] + self.field[i + 1]);
        }
        self.primitive = Some(p);
        self
    }

    pub fn len(&self) -> usize {
        self.field.len()
    }

    pub fn is_empty(&self) -> bool {
        self.field.is_empty()
    }

    pub fn eta_min(&self) -> f64 {
        self.eta_min
    }

    pub fn eta_max(&self) -> f64 {
        self.eta_min + (self.len() - 1) as f64 * self.d_eta
    }

    pub fn d_eta(&self) -> f64 {
        self.d_eta
    }

    pub fn eta(&self, i: usize) -> f64 {
        self.eta_min + i as f64 * self.d_eta
    }

    pub fn etas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.eta(i))
    }

    pub fn field(&self) -> &[f64] {
        &self.field
    }

    pub fn primitive(&self) -> Option<&[f64]> {
        self.primitive.as_deref()
    }

    fn interp(&self, values: &[f64], eta: f64) -> f64 {
        let s = (eta - self.eta_min) / self.d_eta;
        if s < 0.0 || s > (self.len() - 1) as f64 {
            return 0.0;
        }
        let i = (s.floor() as usize).min(self.len() - 2);
        let f = s - i as f64;
        values[i] + f * (values[i + 1] - values[i])
    }

    /// G(η), linearly interpolated, zero outside the sampled range.
    pub fn field_at(&self, eta: f64) -> f64 {
        self.interp(&self.field, eta)
    }

    /// g(η), linearly interpolated, zero outside the sampled range.
    pub fn primitive_at(&self, eta: f64) -> Option<f64> {
        self.primitive.as_ref().map(|p| self.interp(p, eta))
    }

    /// ‖G‖² over ℝ × S^{N−1} (the sphere area is included).
    pub fn norm_squared(&self, dim: Dimension) -> f64 {
        let sq: Vec<f64> = self.field.iter().map(|x| x * x).collect();
        dim.sphere_area() * trapezoid(&sq, self.d_eta)
    }

    /// Largest deviation between the centered derivative of g and −G at
    /// interior samples, relative to max |G|.
    pub fn primitive_mismatch(&self) -> Option<f64> {
        let p = self.primitive.as_ref()?;
        let scale = self.field.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return Some(p.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
        }
        let worst = (1..self.len() - 1)
            .map(|i| ((p[i + 1] - p[i - 1]) / (2.0 * self.d_eta) + self.field[i]).abs())
            .fold(0.0, f64::max);
        Some(worst / scale)
    }

    /// Relative L² distance to `other` on this profile's η-grid.
    pub fn relative_l2_error(&self, other: &RadiationProfile) -> f64 {
        let diff: Vec<f64> = self.etas().zip(&self.field).map(|(eta, a)| (a - other.field_at(eta)).powi(2)).collect();
        let base: Vec<f64> = self.field.iter().map(|x| x * x).collect();
        (trapezoid(&diff, self.d_eta) / trapezoid(&base, self.d_eta)).sqrt()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["eta", "G", "g"])?;
        for i in 0..self.len() {
            let g = self.primitive.as_ref().map(|p| p[i].to_string()).unwrap_or_default();
            w.write_record([self.eta(i).to_string(), self.field[i].to_string(), g])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["eta", "G", "g"] {
            return Err(Error::Parse(format!("expected header eta,G,g, found {:?}", headers)));
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad {what} value {s:?}")))
        };
        let (mut eta, mut field, mut prim) = (Vec::new(), Vec::new(), Vec::new());
        let mut has_primitive = true;
        for rec in rdr.records() {
            let rec = rec?;
            eta.push(parse(&rec[0], "eta")?);
            field.push(parse(&rec[1], "G")?);
            if rec[2].trim().is_empty() {
                has_primitive = false;
            } else {
                prim.push(parse(&rec[2], "g")?);
            }
        }
        if eta.len() < 2 {
            return Err(Error::Parse("a profile needs at least two rows".into()));
        }
        let d = (eta[eta.len() - 1] - eta[0]) / (eta.len() - 1) as f64;
        if eta.windows(2).any(|w| ((w[1] - w[0]) - d).abs() > 1e-9 * d.abs().max(1.0)) {
            return Err(Error::Parse("eta column is not uniform".into()));
        }
        Self::new(eta[0], d, field, has_primitive.then_some(prim))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// Conjugated field w = r^k v and its space and time derivatives at time T.
struct Conjugated {
    grid: RadialGrid,
    w_t: Vec<f64>,
    w_r: Vec<f64>,
}

impl Conjugated {
    fn new(state: &RadialState, dim: Dimension) -> Self {
        let k = dim.radiation_exponent();
        let weights: Vec<f64> = state.grid.nodes().map(|r| r.powf(k)).collect();
        let w: Vec<f64> = state.u.iter().zip(&weights).map(|(u, a)| u * a).collect();
        let w_t = state.v.iter().zip(&weights).map(|(v, a)| v * a).collect();
        let w_r = radial_derivative(&w, state.grid.dr());
        Self { grid: state.grid, w_t, w_r }
    }

    /// ½(∂_t + sign·∂_r) w at radius r.
    fn half_null_derivative(&self, r: f64, sign: f64) -> f64 {
        let a = self.grid.interpolate(&self.w_t, r).unwrap_or(0.0);
        let b = self.grid.interpolate(&self.w_r, r).unwrap_or(0.0);
        0.5 * (a + sign * b)
    }
}

fn check_observation(grid: &RadialGrid, t: f64, range: &EtaRange) -> Result<()> {
    range.validate()?;
    if !(t + range.min > 0.0) {
        return Err(Error::Range(format!("T + eta_min = {} must be positive", t + range.min)));
    }
    let last = t + range.max;
    if last > grid.r_max() - grid.dr() {
        return Err(Error::Range(format!("T + eta_max = {last} exceeds the grid (r_max = {})", grid.r_max())));
    }
    Ok(())
}

fn null_samples(ev: &LinearEvolution, t: f64, range: &EtaRange, sign: f64) -> Result<Vec<f64>> {
    check_observation(ev.grid(), t, range)?;
    let state = ev.state_at(t)?;
    let c = Conjugated::new(&state, ev.dim());
    Ok(range.nodes().map(|eta| c.half_null_derivative(t + eta, sign)).collect())
}

/// G(η) = ½(∂_t − ∂_r)(r^k v)(T, T + η) on the η-range, with its primitive.
pub fn extract_radiation(ev: &LinearEvolution, t: f64, range: EtaRange) -> Result<RadiationProfile> {
    let field = null_samples(ev, t, &range, -1.0)?;
    Ok(RadiationProfile::new(range.min, range.step, field, None)?.with_primitive())
}

/// ‖½(∂_t + ∂_r)(r^k v)(T, T + ·)‖ over ℝ_η × S^{N−1} restricted to the range.
pub fn incoming_residual(ev: &LinearEvolution, t: f64, range: EtaRange) -> Result<f64> {
    let samples = null_samples(ev, t, &range, 1.0)?;
    let sq: Vec<f64> = samples.iter().map(|x| x * x).collect();
    Ok((ev.dim().sphere_area() * trapezoid(&sq, range.step)).sqrt())
}

/// Parameters of [`inverse_radiation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseOptions {
    /// Grid on which the data (v₀, v₁) are returned.
    pub grid: RadialGrid,
    pub cfl: f64,
    /// Time at which the correction ε is set to zero; defaults to
    /// η_max + 4·max|η| over the support of g.
    pub t_far: Option<f64>,
    /// Largest end value of G and g, relative to their maximum, accepted as
    /// compact support within the η-range.
    pub support_tolerance: f64,
}

impl InverseOptions {
    pub fn new(grid: RadialGrid) -> Self {
        Self { grid, cfl: DEFAULT_CFL, t_far: None, support_tolerance: 1e-10 }
    }
}

/// Support [lo, hi] of the sampled primitive and field (nonzero samples).
fn profile_support(profile: &RadiationProfile, g: &[f64]) -> Option<(f64, f64)> {
    let nz = |i: &usize| g[*i] != 0.0 || profile.field[*i] != 0.0;
    let first = (0..profile.len()).find(nz)?;
    let last = (0..profile.len()).rev().find(nz)?;
    Some((profile.eta(first.saturating_sub(1)), profile.eta((last + 1).min(profile.len() - 1))))
}

/// Cauchy data at t = 0 of the free wave whose radiation primitive is g.
///
/// At a time T₀ with T₀ + η_min ≥ 1 the solution is written as
/// v = r^{−k} g(r − t) + ε, where ε solves (∂_t² − Δ)ε = −H with
/// H = c_N r^{−(N+3)/2} g(r − t) and ε(T_far) = 0; then v(T₀) is evolved
/// back to t = 0.
pub fn inverse_radiation(profile: &RadiationProfile, dim: Dimension, opts: InverseOptions) -> Result<RadialState> {
    let g = profile
        .primitive()
        .ok_or_else(|| Error::Precondition("inverse construction needs the primitive g".into()))?
        .to_vec();
    let scale = g.iter().chain(&profile.field).fold(0.0_f64, |m, x| m.max(x.abs()));
    let grid = opts.grid;
    let Some((eta_lo, eta_hi)) = profile_support(profile, &g) else {
        return Ok(RadialState::zero(grid));
    };
    let ends = [g[0], g[g.len() - 1], profile.field[0], profile.field[g.len() - 1]];
    if ends.iter().any(|x| x.abs() > opts.support_tolerance * scale) {
        return Err(Error::Range("profile is not compactly supported in its eta range".into()));
    }
    let dr = grid.dr();
    let t0 = ((1.0 - eta_lo).max(0.0) / dr).ceil() * dr;
    let reach = eta_lo.abs().max(eta_hi.abs());
    let t_far = opts.t_far.unwrap_or(eta_hi + 4.0 * reach).max(t0);
    let required = t_far + eta_hi + 2.0 * dr;
    if required > grid.r_max() {
        return Err(Error::DomainTooSmall { required, available: grid.r_max() });
    }
    let k = dim.radiation_exponent();
    let ray = |t: f64| -> RadialState {
        let u = grid
            .nodes()
            .map(|r| if r > 0.0 { r.powf(-k) * profile.primitive_at(r - t).unwrap_or(0.0) } else { 0.0 })
            .collect();
        let v = grid.nodes().map(|r| if r > 0.0 { r.powf(-k) * profile.field_at(r - t) } else { 0.0 }).collect();
        RadialState { grid, t, u, v }
    };
    let mut at_t0 = ray(t0);
    let c = dim.conjugation_potential();
    if c != 0.0 && t_far > t0 {
        let p = -(dim.as_f64() + 3.0) / 2.0;
        let mut source = FnSource::new(&grid, |t: f64, r: f64| {
            if r > 0.0 {
                -c * r.powf(p) * profile.primitive_at(r - t).unwrap_or(0.0)
            } else {
                0.0
            }
        });
        let far = RadialState::zero(grid).at_time(t_far);
        let eps = solve_inhomogeneous_with(&far, &mut source, t0, dim, opts.cfl, BoundaryPolicy::Causal)?;
        at_t0 = at_t0.axpy(1.0, &eps)?;
    }
    at_t0.validate()?;
    if t0 == 0.0 {
        return Ok(at_t0);
    }
    let method = if dim == Dimension::THREE { Method::Exact3d } else { Method::Numeric { cfl: opts.cfl } };
    LinearEvolution::new(at_t0, dim, method)?.with_policy(BoundaryPolicy::Extend).state_at(0.0)
}

/// F(ρ, σ) with F(r − t, 1/r) = r v(t, r), for an exact N = 3 evolution.
/// At σ = 0 the value is extrapolated linearly (least squares) from
/// σ = σ₀, 2σ₀, 3σ₀ with σ₀ = 1/r_max.
pub fn conformal_profile(ev: &LinearEvolution, rho: f64, sigma: f64) -> Result<f64> {
    let exact =
        ev.exact().ok_or_else(|| Error::Precondition("the conformal profile needs the exact N = 3 solver".into()))?;
    let t_start = exact.initial_time();
    let value = |s: f64| -> Result<f64> {
        let r = 1.0 / s;
        let t = r - rho;
        if t < t_start {
            return Err(Error::Range(format!("(rho, sigma) = ({rho}, {s}) lies before the data")));
        }
        Ok(exact.eval_rw(t, r).0)
    };
    if sigma > 0.0 {
        return value(sigma);
    }
    if sigma < 0.0 || !sigma.is_finite() {
        return Err(Error::Range(format!("sigma must be nonnegative, got {sigma}")));
    }
    let s0 = 1.0 / ev.grid().r_max();
    let xs = [s0, 2.0 * s0, 3.0 * s0];
    let ys = [value(xs[0])?, value(xs[1])?, value(xs[2])?];
    let xm = (xs[0] + xs[1] + xs[2]) / 3.0;
    let ym = (ys[0] + ys[1] + ys[2]) / 3.0;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    Ok(ym - (sxy / sxx) * xm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorSample {
    pub t: f64,
    /// ∫ v²/|x|²
    pub hardy: f64,
    /// ∫_{|x| ≤ t − R} |∇_{t,x} v|²
    pub interior_energy: f64,
}

/// Hardy and interior-energy curves of a free wave at the given times.
pub fn vanishing_interior_check(ev: &LinearEvolution, radius: f64, times: &[f64]) -> Result<Vec<InteriorSample>> {
    let dim = ev.dim();
    let states = ev.states_at(times)?;
    states
        .iter()
        .map(|s| {
            let hardy = sobolev_norms(s, dim)?.hardy.powi(2);
            let inner = s.t - radius;
            let interior_energy = if inner > 0.0 { 2.0 * energy_between(s, dim, 0.0, inner)?.linear() } else { 0.0 };
            Ok(InteriorSample { t: s.t, hardy, interior_energy })
        })
        .collect()
}

/// t ↦ ∫_{|x| ≥ t} |∇_{t,x} v|² for N = 3 data with one vanishing component.
pub fn channels_exterior_energy(data: &RadialState, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    let u_zero = data.u.iter().all(|&x| x == 0.0);
    let v_zero = data.v.iter().all(|&x| x == 0.0);
    if !u_zero && !v_zero {
        return Err(Error::Precondition("exactly one data component must vanish".into()));
    }
    let ev = LinearEvolution::exact_3d(data.clone())?;
    times
        .iter()
        .map(|&t| {
            check_causal_window(data, t - data.t)?;
            let s = ev.state_at(t)?;
            Ok((t, 2.0 * energy_between(&s, Dimension::THREE, t - data.t, f64::INFINITY)?.linear()))
        })
        .collect()
}

/// Free energy E_L = ½∫|∇v₀|² + ½∫v₁², the target of the isometry.
pub fn free_energy(data: &RadialState, dim: Dimension) -> Result<f64> {
    Ok(energy(data, dim)?.linear())
}
