//! Space-time functionals: the Strichartz norm over a region, the e_1-norm
//! and localized virial identities with explicit cutoff remainders.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dimension::Dimension;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::linear::BoundaryPolicy;
use crate::nonlinear::Trajectory;
use crate::quadrature::{
    integrate_in_time, radial_derivative, radial_integral, radial_integral_between, AxisymmetricRule,
};
use crate::solitons::{eval_w, eval_w_prime};
use crate::state::RadialState;

pub use crate::quadrature::RegionSpec;

fn time_window(traj: &Trajectory, region: &RegionSpec) -> Result<(f64, f64)> {
    let (a, b) = (traj.first().t, traj.last().t);
    let (t0, t1) = region.time_extent();
    let slack = 1e-9 * (1.0 + b.abs());
    if t0.is_finite() && (t0 < a - slack || t1 > b + slack) {
        return Err(Error::Range(format!("region [{t0}, {t1}] outside snapshots [{a}, {b}]")));
    }
    Ok((t0.max(a), t1.min(b)))
}

/// ∫_{Ω_t} |u|^q dx on one snapshot, q = 2(N+2)/(N-2).
fn slice_power(state: &RadialState, region: &RegionSpec, dim: Dimension, rule: AxisymmetricRule) -> Result<f64> {
    let q = dim.strichartz_exponent();
    let grid = &state.grid;
    if let Some((lo, hi)) = region.radial_interval(state.t) {
        let pw: Vec<f64> = state.u.iter().map(|u| u.abs().powf(q)).collect();
        return Ok(radial_integral_between(&pw, grid, dim, lo, hi));
    }
    let RegionSpec::BallWindow { center_offset: c, radius } = *region else {
        unreachable!("only off-centre balls lack a radial interval")
    };
    if c.abs() + radius > grid.r_max() {
        return Err(Error::Range(format!("ball |x - {c} e1| <= {radius} leaves the grid")));
    }
    Ok(rule.integrate_ball(dim, radius, |rho, mu| {
        let s = (rho * rho + 2.0 * c * rho * mu + c * c).max(0.0).sqrt();
        grid.interpolate(&state.u, s.min(grid.r_max())).unwrap_or(0.0).abs().powf(q)
    }))
}

/// S(Ω) = (∫ (∫_{Ω_t} |u|^q dx)^{1/2} dt)^{1/p} with p = (N+2)/(N-2), q = 2p.
/// Snapshot slices are integrated in time by the trapezoid rule.
pub fn strichartz_norm(traj: &Trajectory, region: &RegionSpec, dim: Dimension) -> Result<f64> {
    strichartz_norm_with(traj, region, dim, AxisymmetricRule::default())
}

pub fn strichartz_norm_with(
    traj: &Trajectory,
    region: &RegionSpec,
    dim: Dimension,
    rule: AxisymmetricRule,
) -> Result<f64> {
    region.validate()?;
    let (t0, t1) = time_window(traj, region)?;
    let roots =
        traj.snapshots.iter().map(|s| Ok(slice_power(s, region, dim, rule)?.sqrt())).collect::<Result<Vec<_>>>()?;
    let inner = integrate_in_time(&traj.times(), &roots, t0, t1);
    Ok(inner.powf(2.0 / dim.strichartz_exponent()))
}

/// The e_1-norm of (f, g). For radial f and g = g_0(r) + g_1(r) x_1/r,
/// ‖(f,g)‖²_{e_1} = ‖g_0‖² + (1/N)‖g_1 + f'‖² + (1 - 1/N)‖f'‖²,
/// which reduces to ‖g‖² + ‖∇f‖² = 2 E_L(f, g) when g_1 = 0.
pub fn e1_norm(state: &RadialState, dim: Dimension, dipole: Option<&[f64]>) -> Result<f64> {
    state.validate()?;
    let grid = &state.grid;
    let df = radial_derivative(&state.u, grid.dr());
    let sq = |f: &dyn Fn(usize) -> f64| {
        let vals: Vec<f64> = (0..grid.len()).map(|i| f(i).powi(2)).collect();
        radial_integral(&vals, grid, dim)
    };
    let g0 = sq(&|i| state.v[i]);
    let total = match dipole {
        None => g0 + sq(&|i| df[i]),
        Some(g1) => {
            if g1.len() != grid.len() || g1.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidState("dipole datum must be finite on the grid".into()));
            }
            let n = dim.as_f64();
            g0 + sq(&|i| g1[i] + df[i]) / n + (1.0 - 1.0 / n) * sq(&|i| df[i])
        }
    };
    Ok(total.sqrt())
}

/// Plateau cutoff ψ: 1 on [0, 1/4], exp(1 - 1/(1 - (4s-1)²)) on (1/4, 1/2),
/// 0 beyond.
pub fn cutoff(s: f64) -> f64 {
    if s <= 0.25 {
        1.0
    } else if s >= 0.5 {
        0.0
    } else {
        let z = (4.0 * s - 1.0).powi(2);
        (1.0 - 1.0 / (1.0 - z)).exp()
    }
}

pub fn cutoff_derivative(s: f64) -> f64 {
    if s <= 0.25 || s >= 0.5 {
        0.0
    } else {
        let w = 4.0 * s - 1.0;
        let z = w * w;
        -cutoff(s) * 8.0 * w / ((1.0 - z) * (1.0 - z))
    }
}

/// The five localized identities, keyed by the functional being differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VirialIdentity {
    /// ∫ u ∂_t u φ
    Mixed,
    /// ∫ (y·∇u) ∂_t u φ
    Dilation,
    /// ∫ y_1 e(u) φ
    EnergyMoment,
    /// ∫ ∂_1 u ∂_t u φ
    Momentum,
    /// ∫ e(u) φ
    LocalEnergy,
}

impl VirialIdentity {
    pub const ALL: [VirialIdentity; 5] = [
        VirialIdentity::Mixed,
        VirialIdentity::Dilation,
        VirialIdentity::EnergyMoment,
        VirialIdentity::Momentum,
        VirialIdentity::LocalEnergy,
    ];

    pub fn label(self) -> &'static str {
        match self {
            VirialIdentity::Mixed => "mixed",
            VirialIdentity::Dilation => "dilation",
            VirialIdentity::EnergyMoment => "energy-moment",
            VirialIdentity::Momentum => "momentum",
            VirialIdentity::LocalEnergy => "local-energy",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCurve {
    pub identity: VirialIdentity,
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub residual: Vec<f64>,
}

impl IdentityCurve {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Localized quantities a, b, c, d at every snapshot and, for each identity,
/// d/dt of the functional against its right side at interior snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirialReport {
    pub alpha: f64,
    pub center_offset: f64,
    pub times: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub curves: Vec<IdentityCurve>,
}

impl VirialReport {
    pub fn curve(&self, id: VirialIdentity) -> &IdentityCurve {
        &self.curves[id.index()]
    }

    /// Columns t,identity,lhs,rhs,residual.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "identity", "lhs", "rhs", "residual"])?;
        for c in &self.curves {
            for k in 0..c.times.len() {
                w.write_record(&[
                    c.times[k].to_string(),
                    c.identity.label().to_string(),
                    c.lhs[k].to_string(),
                    c.rhs[k].to_string(),
                    c.residual[k].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Quadrature used by [`virial_report_with`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum VirialPath {
    /// Radial trapezoid on the grid for origin-centred windows, the default
    /// axisymmetric rule otherwise.
    #[default]
    Auto,
    Axisymmetric(AxisymmetricRule),
}

const SLOTS: usize = 14;
const A: usize = 10;
const B: usize = 11;
const C: usize = 12;
const D: usize = 13;

/// Integrands at y = ρ(μ e_1 + sqrt(1-μ²) e_⊥), x = y + c e_1, from the
/// radial fields (u, ∂_r u, ∂_t u) at |x|. Slots 0..5 hold the functionals,
/// 5..10 the right sides, then a, b, c, d.
#[allow(clippy::too_many_arguments)]
fn integrands(dim: Dimension, alpha: f64, c: f64, rho: f64, mu: f64, u: f64, ur: f64, v: f64) -> [f64; SLOTS] {
    let n = dim.as_f64();
    let kappa = dim.potential_coefficient();
    let phi = cutoff(rho / alpha);
    let dphi = cutoff_derivative(rho / alpha) / alpha;
    let s = (rho * rho + 2.0 * c * rho * mu + c * c).max(0.0).sqrt();
    let y1 = rho * mu;
    let ydotx = rho * rho + c * rho * mu;
    let (d1u, ydu) = if s > 0.0 { (ur * (y1 + c) / s, ur * ydotx / s) } else { (0.0, 0.0) };
    let gphi_gu = if s > 0.0 && rho > 0.0 { dphi * ur * ydotx / (rho * s) } else { 0.0 };
    let y_gphi = rho * dphi;
    let d1phi = dphi * mu;
    let grad2 = ur * ur;
    let pw = dim.critical_power(u);
    let e = 0.5 * grad2 + 0.5 * v * v - kappa * pw;

    let a = v * v * phi;
    let b = grad2 * phi;
    let cc = pw * phi;
    let d = d1u * v * phi;
    let mut out = [0.0; SLOTS];
    out[0] = u * v * phi;
    out[1] = ydu * v * phi;
    out[2] = y1 * e * phi;
    out[3] = d1u * v * phi;
    out[4] = e * phi;
    out[5] = a - b + cc - u * gphi_gu;
    out[6] = -0.5 * n * a + (0.5 * n - 1.0) * (b - cc) + 0.5 * y_gphi * (grad2 - v * v)
        - gphi_gu * ydu
        - kappa * y_gphi * pw;
    out[7] = -d - y1 * v * gphi_gu;
    out[8] = 0.5 * (grad2 - v * v) * d1phi - d1u * gphi_gu - kappa * pw * d1phi;
    out[9] = -v * gphi_gu;
    out[A] = a;
    out[B] = b;
    out[C] = cc;
    out[D] = d;
    out
}

fn snapshot_moments(
    state: &RadialState,
    dim: Dimension,
    alpha: f64,
    c: f64,
    rule: Option<AxisymmetricRule>,
) -> [f64; SLOTS] {
    let grid = &state.grid;
    let ur = radial_derivative(&state.u, grid.dr());
    let mut out = [0.0; SLOTS];
    match rule {
        None => {
            // Origin-centred window: every μ-odd term integrates to zero over
            // the sphere and the remaining ones do not depend on μ.
            let rows: Vec<[f64; SLOTS]> = (0..grid.len())
                .map(|i| integrands(dim, alpha, 0.0, grid.node(i), 0.0, state.u[i], ur[i], state.v[i]))
                .collect();
            for (k, slot) in out.iter_mut().enumerate() {
                let col: Vec<f64> = rows.iter().map(|row| row[k]).collect();
                *slot = radial_integral(&col, grid, dim);
            }
        }
        Some(rule) => {
            let interp = |f: &[f64], s: f64| grid.interpolate(f, s.min(grid.r_max())).unwrap_or(0.0);
            out = rule.integrate_ball_many(dim, 0.5 * alpha, |rho, mu| {
                let s = (rho * rho + 2.0 * c * rho * mu + c * c).max(0.0).sqrt();
                let (u, du, v) = (interp(&state.u, s), interp(&ur, s), interp(&state.v, s));
                integrands(dim, alpha, c, rho, mu, u, du, v)
            });
        }
    }
    out
}

/// Second-order derivative at t_k from three possibly unequal steps.
fn centered_derivative(t: &[f64], f: &[f64], k: usize) -> f64 {
    let (h1, h2) = (t[k] - t[k - 1], t[k + 1] - t[k]);
    -h2 / (h1 * (h1 + h2)) * f[k - 1] + (h2 - h1) / (h1 * h2) * f[k] + h1 / (h2 * (h1 + h2)) * f[k + 1]
}

pub fn virial_report(traj: &Trajectory, alpha: f64, c: f64, dim: Dimension) -> Result<VirialReport> {
    virial_report_with(traj, alpha, c, dim, VirialPath::Auto)
}

/// Virial identities for the cutoff φ_α(y) = ψ(|y|/α), y = x - c e_1.
/// The window must stay inside the part of the grid that the outer boundary
/// cannot influence during the run.
pub fn virial_report_with(
    traj: &Trajectory,
    alpha: f64,
    c: f64,
    dim: Dimension,
    path: VirialPath,
) -> Result<VirialReport> {
    if !(alpha > 0.0 && alpha.is_finite() && c.is_finite()) {
        return Err(Error::Configuration(format!("window needs alpha > 0 and finite c, got {alpha}, {c}")));
    }
    if traj.snapshots.len() < 3 {
        return Err(Error::Range("centered differences need at least three snapshots".into()));
    }
    let grid = traj.grid();
    let times = traj.times();
    let span = times[times.len() - 1] - times[0];
    let reach = match traj.meta.params.policy {
        BoundaryPolicy::Frozen => grid.r_max() - span,
        BoundaryPolicy::Causal | BoundaryPolicy::Extend => grid.r_max(),
    };
    if c.abs() + 0.5 * alpha > reach {
        return Err(Error::Range(format!(
            "window |x - {c} e1| <= {} exceeds the causal region r <= {reach}",
            0.5 * alpha
        )));
    }
    let rule = match path {
        VirialPath::Auto if c == 0.0 => None,
        VirialPath::Auto => Some(AxisymmetricRule::default()),
        VirialPath::Axisymmetric(rule) => Some(rule),
    };
    let moments: Vec<[f64; SLOTS]> = traj.snapshots.iter().map(|s| snapshot_moments(s, dim, alpha, c, rule)).collect();
    let column = |k: usize| -> Vec<f64> { moments.iter().map(|m| m[k]).collect() };
    let curves = VirialIdentity::ALL
        .iter()
        .map(|&id| {
            let f = column(id.index());
            let r = column(id.index() + 5);
            let interior = 1..times.len() - 1;
            let lhs: Vec<f64> = interior.clone().map(|k| centered_derivative(&times, &f, k)).collect();
            let rhs: Vec<f64> = interior.clone().map(|k| r[k]).collect();
            let residual = lhs.iter().zip(&rhs).map(|(l, r)| l - r).collect();
            IdentityCurve { identity: id, times: times[interior].to_vec(), lhs, rhs, residual }
        })
        .collect();
    Ok(VirialReport {
        alpha,
        center_offset: c,
        times: times.clone(),
        a: column(A),
        b: column(B),
        c: column(C),
        d: column(D),
        curves,
    })
}

/// Both sides of ∫(|∇W|² - W^{2N/(N-2)}) φ_α = -∫ W ∇W·∇φ_α for the static
/// ground state, from the closed forms of W and W' on the grid nodes.
pub fn static_pohozaev_check(grid: &RadialGrid, dim: Dimension, alpha: f64) -> (f64, f64) {
    let nodes: Vec<f64> = grid.nodes().collect();
    let lhs: Vec<f64> = nodes
        .iter()
        .map(|&r| {
            let (w, dw) = (eval_w(r, dim), eval_w_prime(r, dim));
            (dw * dw - dim.critical_power(w)) * cutoff(r / alpha)
        })
        .collect();
    let rhs: Vec<f64> =
        nodes.iter().map(|&r| -eval_w(r, dim) * eval_w_prime(r, dim) * cutoff_derivative(r / alpha) / alpha).collect();
    (radial_integral(&lhs, grid, dim), radial_integral(&rhs, grid, dim))
}
