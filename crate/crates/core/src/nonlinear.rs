//! The focusing energy-critical radial solver, blow-up detection, the
//! exterior-source extraction of the scattering part and the exterior defect.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dimension::Dimension;
use crate::energy::{energy, energy_of_fields, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::linear::{
    check_causal_window, step_count, BoundaryPolicy, Leapfrog, LinearEvolution, Method, Source, DEFAULT_CFL,
};
use crate::quadrature::{radial_derivative, radial_integral_between};
use crate::radiation::{EtaRange, RadiationProfile};
use crate::state::RadialState;

pub const DEFAULT_THRESHOLD: f64 = 1e6;
pub const DEFAULT_STRIDE: usize = 16;
const MAX_HALVINGS: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nonlinearity {
    #[default]
    Focusing,
    /// Free evolution through the same code path.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub cfl: f64,
    /// Blow-up is declared once max |u| exceeds this value.
    pub threshold: f64,
    /// Snapshot every `stride` steps of the nominal time step.
    pub stride: usize,
    pub policy: BoundaryPolicy,
    pub nonlinearity: Nonlinearity,
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self {
            cfl: DEFAULT_CFL,
            threshold: DEFAULT_THRESHOLD,
            stride: DEFAULT_STRIDE,
            policy: BoundaryPolicy::Causal,
            nonlinearity: Nonlinearity::Focusing,
        }
    }
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return Err(Error::Configuration(format!("nonlinear CFL must lie in (0, 0.5], got {}", self.cfl)));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::Configuration(format!("threshold must be positive, got {}", self.threshold)));
        }
        if self.stride == 0 {
            return Err(Error::Configuration("snapshot stride must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    Global { t_end: f64 },
    BlowUp { t_star: f64 },
}

impl RunStatus {
    pub fn time(&self) -> f64 {
        match *self {
            RunStatus::Global { t_end } => t_end,
            RunStatus::BlowUp { t_star } => t_star,
        }
    }

    pub fn is_global(&self) -> bool {
        matches!(self, RunStatus::Global { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeMeta {
    pub dr: f64,
    /// Nominal time step.
    pub dt: f64,
    /// Smallest time step used (below `dt` only if steps were halved).
    pub min_dt: f64,
    pub params: SchemeParams,
}

/// Time-ordered snapshots of a nonlinear run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dim: Dimension,
    pub snapshots: Vec<RadialState>,
    pub status: RunStatus,
    pub meta: SchemeMeta,
}

impl Trajectory {
    pub fn grid(&self) -> &RadialGrid {
        &self.snapshots[0].grid
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn first(&self) -> &RadialState {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &RadialState {
        self.snapshots.last().unwrap()
    }

    /// Snapshot state at `t`, linearly interpolated between snapshots.
    pub fn state_at(&self, t: f64) -> Result<RadialState> {
        let (a, b) = (self.first().t, self.last().t);
        let slack = 1e-9 * (1.0 + b.abs());
        if t < a - slack || t > b + slack {
            return Err(Error::Range(format!("t = {t} outside the trajectory [{a}, {b}]")));
        }
        let k = self.snapshots.partition_point(|s| s.t <= t);
        if k == 0 {
            return Ok(self.snapshots[0].clone());
        }
        if k >= self.snapshots.len() {
            return Ok(self.last().clone().at_time(t));
        }
        let (s0, s1) = (&self.snapshots[k - 1], &self.snapshots[k]);
        let w = (t - s0.t) / (s1.t - s0.t);
        let lerp = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p + w * (q - p)).collect();
        Ok(RadialState { grid: s0.grid, t, u: lerp(&s0.u, &s1.u), v: lerp(&s0.v, &s1.v) })
    }

    pub fn energy_series(&self) -> Result<Vec<(f64, EnergyBreakdown)>> {
        self.snapshots.iter().map(|s| Ok((s.t, energy(s, self.dim)?))).collect()
    }

    /// max_k ‖(u, ∂_t u)(t_k)‖²_{Ḣ¹×L²} over the snapshots.
    pub fn max_linear_norm_squared(&self) -> Result<f64> {
        let mut m = 0.0_f64;
        for s in &self.snapshots {
            m = m.max(2.0 * energy(s, self.dim)?.linear());
        }
        Ok(m)
    }

    /// Snapshot dump with columns t,r,u,ut.
    pub fn write_snapshots_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "r", "u", "ut"])?;
        for s in &self.snapshots {
            for (i, r) in s.grid.nodes().enumerate() {
                w.write_record([s.t.to_string(), r.to_string(), s.u[i].to_string(), s.v[i].to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Adds |u|^{4/(N−2)} u, optionally restricted to r > t + A.
#[derive(Debug, Clone)]
struct PowerSource {
    dim: Dimension,
    on: bool,
}

impl Source for PowerSource {
    fn accumulate(&mut self, _: f64, u: &[f64], acc: &mut [f64]) -> Result<()> {
        if self.on {
            for (a, &x) in acc.iter_mut().zip(u) {
                *a += self.dim.nonlinearity(x);
            }
        }
        Ok(())
    }
}

/// One nonlinear run in progress.
struct Stepper {
    lf: Leapfrog,
    src: PowerSource,
    dt: f64,
}

impl Stepper {
    fn new(data: &RadialState, dim: Dimension, params: &SchemeParams, dt: f64) -> Result<Self> {
        let mut src = PowerSource { dim, on: params.nonlinearity == Nonlinearity::Focusing };
        let lf = Leapfrog::new(data, dim, &mut src)?;
        Ok(Self { lf, src, dt })
    }

    fn step(&mut self, h: f64) -> Result<()> {
        self.lf.step(h, &mut self.src)
    }
}

fn sup_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0_f64, |m, x| if x.is_finite() { m.max(x.abs()) } else { f64::INFINITY })
}

fn nominal_step(data: &RadialState, t_final: f64, cfl: f64) -> Result<(usize, f64)> {
    let span = t_final - data.t;
    if !(span > 0.0) {
        return Err(Error::Configuration(format!("run length must be positive, got {span}")));
    }
    let steps = step_count(span, data.grid.dr(), cfl).max(1);
    Ok((steps, span / steps as f64))
}

/// Nonlinear evolution with default scheme parameters.
pub fn evolve_nonlinear(data: &RadialState, t: f64, dim: Dimension) -> Result<Trajectory> {
    evolve_nonlinear_with(data, t, dim, &SchemeParams::default())
}

/// Runs ∂_t²u − Δu = |u|^{4/(N−2)}u from `data` (at time `data.t`) up to `t`.
///
/// A step whose result is non-finite, or that more than doubles max |u|
/// above a floor, is retried with half the step size, so the last accepted
/// snapshot before blow-up has max |u| above half the threshold.
pub fn evolve_nonlinear_with(
    data: &RadialState,
    t_final: f64,
    dim: Dimension,
    params: &SchemeParams,
) -> Result<Trajectory> {
    params.validate()?;
    data.validate()?;
    if params.policy == BoundaryPolicy::Causal {
        check_causal_window(data, t_final - data.t)?;
    }
    let (steps, dt) = nominal_step(data, t_final, params.cfl)?;
    let store_every = params.stride as f64 * dt;
    let mut st = Stepper::new(data, dim, params, dt)?;
    let mut backup = st.lf.clone();
    let mut snapshots = vec![data.clone()];
    let mut next_store = data.t + store_every;
    let floor = (4.0 * data.sup_norm()).max(10.0);
    let mut sup = data.sup_norm();
    let mut min_dt = dt;
    let mut accepted = 0usize;
    let end_slack = 1e-9 * dt;
    let mut status = RunStatus::Global { t_end: t_final };
    while st.lf.t() < t_final - end_slack {
        // Nominal steps land exactly on t_final; halved steps are clipped to it.
        let h = if st.dt == dt && accepted < steps { dt } else { st.dt.min(t_final - st.lf.t()) };
        backup.restore_from(&st.lf);
        st.step(h)?;
        let new_sup = sup_abs(st.lf.u());
        let jumped = !new_sup.is_finite() || (new_sup > 2.0 * sup && new_sup > floor);
        if jumped && st.dt > dt / 2f64.powi(MAX_HALVINGS as i32) {
            st.lf.restore_from(&backup);
            st.dt *= 0.5;
            min_dt = min_dt.min(st.dt);
            continue;
        }
        if jumped || new_sup > params.threshold {
            let last = backup.state();
            if snapshots.last().map_or(true, |s| s.t < last.t) {
                snapshots.push(last);
            }
            status = RunStatus::BlowUp { t_star: st.lf.t() };
            break;
        }
        sup = new_sup;
        accepted += 1;
        let reached_end = st.lf.t() >= t_final - end_slack;
        if st.lf.t() >= next_store - end_slack || reached_end {
            let mut s = st.lf.state();
            if reached_end {
                s.t = t_final;
            }
            snapshots.push(s);
            next_store += store_every;
        }
    }
    Ok(Trajectory { dim, snapshots, status, meta: SchemeMeta { dr: data.grid.dr(), dt, min_dt, params: *params } })
}

/// The free wave v_L carried by the exterior of the cone {r > t + A}.
#[derive(Debug, Clone)]
pub struct ScatteringPart {
    /// v_L at the initial time of the trajectory.
    pub data: RadialState,
    pub a: f64,
    /// Radiation profile of the exterior-source solution at the final time,
    /// on η ≥ A.
    pub profile: Option<RadiationProfile>,
    /// The exterior-source solution at the final time, from which v_L is
    /// evolved freely; `None` when v_L was supplied directly.
    pub final_state: Option<RadialState>,
    pub policy: BoundaryPolicy,
}

impl ScatteringPart {
    /// A given free datum used directly as v_L.
    pub fn from_data(data: RadialState, a: f64, policy: BoundaryPolicy) -> Self {
        Self { data, a, profile: None, final_state: None, policy }
    }

    /// Free evolution of v_L, anchored at the final state when available.
    pub fn linear_evolution(&self, dim: Dimension, cfl: f64) -> Result<LinearEvolution> {
        let anchor = self.final_state.as_ref().unwrap_or(&self.data).clone();
        Ok(LinearEvolution::new(anchor, dim, Method::Numeric { cfl })?.with_policy(self.policy))
    }
}

/// Source 1_{r > t + A} |u|^{4/(N−2)} u with u replayed from the nonlinear run
/// in lockstep.
struct ExteriorSource {
    replay: Stepper,
    a: f64,
    nodes: Vec<f64>,
    dim: Dimension,
}

impl Source for ExteriorSource {
    fn accumulate(&mut self, t: f64, _: &[f64], acc: &mut [f64]) -> Result<()> {
        let tol = 1e-9 * self.replay.dt.abs().max(1e-300);
        if t > self.replay.lf.t() + tol {
            self.replay.step(self.replay.dt)?;
        }
        if (t - self.replay.lf.t()).abs() > tol {
            return Err(Error::InvalidState(format!(
                "replay out of step: source at {t}, replay at {}",
                self.replay.lf.t()
            )));
        }
        if self.replay.src.on {
            let cut = t + self.a;
            for ((acc, &x), &r) in acc.iter_mut().zip(self.replay.lf.u()).zip(&self.nodes) {
                if r > cut {
                    *acc += self.dim.nonlinearity(x);
                }
            }
        }
        Ok(())
    }
}

/// Solves the exterior-source problem (same data, nonlinearity switched on
/// only in r > t + A) alongside a replay of the run, reads off its radiation
/// profile on η ≥ A at the final time, and returns the free datum
/// S_L(−T) v(T) together with that profile.
pub fn extract_scattering_part(traj: &Trajectory, a: f64) -> Result<ScatteringPart> {
    let t_end = match traj.status {
        RunStatus::Global { t_end } => t_end,
        RunStatus::BlowUp { .. } => {
            return Err(Error::Precondition("the trajectory blew up".into()));
        }
    };
    if traj.meta.min_dt < traj.meta.dt {
        return Err(Error::Precondition("run used step halving; the exterior replay needs uniform steps".into()));
    }
    let data = traj.first();
    let grid = data.grid;
    let dim = traj.dim;
    let params = traj.meta.params;
    let (steps, dt) = nominal_step(data, t_end, params.cfl)?;
    let replay = Stepper::new(data, dim, &params, dt)?;
    let mut src = ExteriorSource { replay, a, nodes: grid.nodes().collect(), dim };
    let mut aux = Leapfrog::new(data, dim, &mut src)?;
    for _ in 0..steps {
        aux.step(dt, &mut src)?;
    }
    let mut v_end = aux.state();
    v_end.t = t_end;
    v_end.validate()?;

    let eta_lo = a.max(-t_end + grid.dr());
    let eta_hi = grid.r_max() - t_end - 2.0 * grid.dr();
    let profile = if eta_hi > eta_lo + grid.dr() {
        let range = EtaRange::new(eta_lo, eta_hi, grid.dr())?;
        Some(profile_of_state(&v_end, dim, range)?)
    } else {
        None
    };
    let policy = match params.policy {
        BoundaryPolicy::Causal => BoundaryPolicy::Extend,
        p => p,
    };
    let free = LinearEvolution::new(v_end.clone(), dim, Method::Numeric { cfl: params.cfl })?.with_policy(policy);
    let v0 = free.state_at(data.t)?;
    Ok(ScatteringPart { data: v0, a, profile, final_state: Some(v_end), policy })
}

/// G(η) = ½(∂_t − ∂_r)(r^k v) at r = t + η for a single state.
pub fn profile_of_state(state: &RadialState, dim: Dimension, range: EtaRange) -> Result<RadiationProfile> {
    let k = dim.radiation_exponent();
    let grid = state.grid;
    let weights: Vec<f64> = grid.nodes().map(|r| r.powf(k)).collect();
    let w: Vec<f64> = state.u.iter().zip(&weights).map(|(u, a)| u * a).collect();
    let wt: Vec<f64> = state.v.iter().zip(&weights).map(|(v, a)| v * a).collect();
    let wr = radial_derivative(&w, grid.dr());
    let field = range
        .nodes()
        .map(|eta| {
            let r = state.t + eta;
            let a = grid.interpolate(&wt, r).ok_or_else(|| Error::Range(format!("r = {r} off the grid")))?;
            let b = grid.interpolate(&wr, r).ok_or_else(|| Error::Range(format!("r = {r} off the grid")))?;
            Ok(0.5 * (a - b))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RadiationProfile::new(range.min, range.step, field, None)?.with_primitive())
}

fn defect_between(u: &RadialState, vl: &RadialState, dim: Dimension, lo: f64) -> f64 {
    let grid = u.grid;
    let du: Vec<f64> = u.u.iter().zip(&vl.u).map(|(a, b)| a - b).collect();
    let dv: Vec<f64> = u.v.iter().zip(&vl.v).map(|(a, b)| a - b).collect();
    let e = energy_of_fields(&grid, &du, &dv, dim, lo, f64::INFINITY);
    let hardy: Vec<f64> =
        u.u.iter()
            .enumerate()
            .map(|(i, &x)| if i == 0 { 0.0 } else { x * x / (grid.node(i) * grid.node(i)) })
            .collect();
    let mut h = radial_integral_between(&hardy, &grid, dim, lo, f64::INFINITY);
    if dim.get() == 3 && lo <= 0.0 {
        h += dim.sphere_area() * 0.5 * grid.dr() * u.u[0] * u.u[0];
    }
    let crit: Vec<f64> = u.u.iter().map(|&x| dim.critical_power(x)).collect();
    let p = radial_integral_between(&crit, &grid, dim, lo, f64::INFINITY);
    2.0 * e.linear() + h + p
}

/// ∫_{r ≥ t+A} |∇(u − v_L)|² + |∂_t(u − v_L)|² + u²/r² + |u|^{2N/(N−2)}.
pub fn exterior_defect(traj: &Trajectory, scat: &ScatteringPart, a: f64, t: f64) -> Result<f64> {
    Ok(exterior_defect_series(traj, scat, a, &[t])?[0].1)
}

/// The exterior defect at increasing times, evolving v_L once.
pub fn exterior_defect_series(
    traj: &Trajectory,
    scat: &ScatteringPart,
    a: f64,
    times: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Configuration("defect times must be increasing".into()));
    }
    if scat.data.grid != *traj.grid() {
        return Err(Error::InvalidState("scattering datum and trajectory use different grids".into()));
    }
    let free = scat.linear_evolution(traj.dim, traj.meta.params.cfl)?;
    let vls = if free.data().is_zero() {
        times.iter().map(|&t| RadialState::zero(scat.data.grid).at_time(t)).collect()
    } else if free.data().t > times[0] {
        // Anchored at the final time: evolve backwards through the times.
        let rev: Vec<f64> = times.iter().rev().copied().collect();
        let mut s = free.states_at(&rev)?;
        s.reverse();
        s
    } else {
        free.states_at(times)?
    };
    times
        .iter()
        .zip(&vls)
        .map(|(&t, vl)| {
            let u = traj.state_at(t)?;
            Ok((t, defect_between(&u, vl, traj.dim, t + a)))
        })
        .collect()
}

/// Outcome of a ground-state threshold search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    /// Largest amplitude seen to stay global.
    pub global: f64,
    /// Smallest amplitude seen to blow up.
    pub blow_up: f64,
    /// (amplitude, status) in the order evaluated.
    pub runs: Vec<(f64, RunStatus)>,
}

/// Bisects the amplitude of `a · data` between a global and a blow-up end
/// until the bracket is at most `width` wide.
pub fn bisect_threshold(
    data: &RadialState,
    dim: Dimension,
    t: f64,
    params: &SchemeParams,
    (mut lo, mut hi): (f64, f64),
    width: f64,
) -> Result<Bracket> {
    let mut runs = Vec::new();
    let mut classify = |a: f64| -> Result<bool> {
        let tr = evolve_nonlinear_with(&data.scaled(a), t, dim, params)?;
        runs.push((a, tr.status));
        Ok(tr.status.is_global())
    };
    if !classify(lo)? || classify(hi)? {
        return Err(Error::Precondition(format!("[{lo}, {hi}] does not bracket the threshold")));
    }
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if classify(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bracket { global: lo, blow_up: hi, runs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectPoint {
    pub a: f64,
    pub t: f64,
    pub value: f64,
}

/// Trajectory summary written as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub status: String,
    pub t_end_or_blowup: f64,
    pub energy_series: Vec<SeriesPoint>,
    pub defect_series: Vec<DefectPoint>,
}

impl TrajectorySummary {
    pub fn new(traj: &Trajectory, defect_series: Vec<DefectPoint>) -> Result<Self> {
        let status = match traj.status {
            RunStatus::Global { .. } => "global",
            RunStatus::BlowUp { .. } => "blow-up",
        };
        let energy_series = traj.energy_series()?.into_iter().map(|(t, e)| SeriesPoint { t, value: e.total }).collect();
        Ok(Self { status: status.into(), t_end_or_blowup: traj.status.time(), energy_series, defect_series })
    }
}
