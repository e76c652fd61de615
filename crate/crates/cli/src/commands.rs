//! One function per subcommand, each writing its artifacts into the output directory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use wavecone_core::functionals::virial_report;
use wavecone_core::geometry::{cone_lemma_check, cos_inequality_check, CheckReport};
use wavecone_core::nonlinear::{
    evolve_nonlinear_with, exterior_defect_series, extract_scattering_part, DefectPoint, TrajectorySummary,
};
use wavecone_core::radiation::{
    channels_exterior_energy, extract_radiation, free_energy, inverse_radiation, InverseOptions,
};
use wavecone_core::solitons::{elliptic_residual, fit_soliton, ground_state_energy, soliton_energy};
use wavecone_core::{
    BoundaryPolicy, Dimension, LinearEvolution, Method, RadialGrid, RadialState, SolitonSpec, Trajectory,
};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

/// Output directory and the artifacts written so far.
pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub outputs: Vec<String>,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a ExperimentConfig, out: &Path, seed: u64) -> CliResult<Self> {
        std::fs::create_dir_all(out)?;
        Ok(Self { cfg, out: out.to_path_buf(), seed, outputs: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn create(&mut self, name: &str) -> CliResult<BufWriter<File>> {
        self.outputs.push(name.to_string());
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    fn csv(&mut self, name: &str) -> CliResult<csv::Writer<BufWriter<File>>> {
        Ok(csv::Writer::from_writer(self.create(name)?))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn run(&self) -> CliResult<Trajectory> {
        let state = self.cfg.initial_state(self.seed)?;
        Ok(evolve_nonlinear_with(&state, self.cfg.run.t, self.cfg.dim()?, &self.cfg.scheme_params())?)
    }
}

fn ftos(x: f64) -> String {
    x.to_string()
}

pub fn simulate(ctx: &mut Context) -> CliResult<()> {
    let traj = ctx.run()?;
    let mut w = ctx.create("snapshots.csv")?;
    traj.write_snapshots_csv(&mut w)?;
    w.flush()?;

    let mut w = ctx.csv("energy.csv")?;
    w.write_record(["t", "kinetic", "gradient", "potential", "total"])?;
    for (t, e) in traj.energy_series()? {
        w.write_record([t, e.kinetic, e.gradient, e.potential, e.total].map(ftos))?;
    }
    w.flush()?;

    ctx.json("summary.json", &TrajectorySummary::new(&traj, Vec::new())?)
}

pub fn radiation(ctx: &mut Context) -> CliResult<()> {
    let cfg = ctx.cfg;
    let dim = cfg.dim()?;
    let grid = cfg.grid()?;
    let t = cfg.run.t;
    let range = cfg.eta_range(t)?;
    let evolve = |data, policy| -> CliResult<LinearEvolution> {
        let method = if dim == Dimension::THREE { Method::Exact3d } else { Method::Numeric { cfl: cfg.scheme.cfl } };
        Ok(LinearEvolution::new(data, dim, method)?.with_policy(policy))
    };

    let data = cfg.initial_state(ctx.seed)?;
    let energy = free_energy(&data, dim)?;
    let profile = extract_radiation(&evolve(data.clone(), cfg.scheme.policy)?, t, range)?;
    let mut w = ctx.create("profile.csv")?;
    profile.write_csv(&mut w)?;
    w.flush()?;

    let norm = profile.norm_squared(dim);
    let isometry_error = if energy > 0.0 { (norm - energy).abs() / energy } else { norm };
    let tolerance = cfg.diagnostics.roundtrip_tolerance;
    let mut report = json!({
        "t": t,
        "eta_min": range.min,
        "eta_max": range.max,
        "d_eta": range.step,
        "free_energy": energy,
        "profile_norm_squared": norm,
        "isometry_rel_error": isometry_error,
        "tolerance": tolerance,
    });

    let mut opts = InverseOptions {
        grid,
        cfl: cfg.scheme.cfl,
        t_far: cfg.diagnostics.t_far,
        support_tolerance: cfg.diagnostics.support_tolerance,
    };
    let mut attempt = inverse_radiation(&profile, dim, opts);
    for _ in 0..4 {
        let Err(wavecone_core::Error::DomainTooSmall { required, .. }) = attempt else { break };
        opts.grid = RadialGrid::with_spacing((required / grid.dr()).ceil() * grid.dr(), grid.dr())?;
        attempt = inverse_radiation(&profile, dim, opts);
    }
    let rebuilt = match attempt {
        Ok(state) => state,
        Err(wavecone_core::Error::Range(reason)) => {
            report["roundtrip_skipped"] = json!(reason);
            report["passed"] = json!(true);
            ctx.json("report.json", &report)?;
            eprintln!("{}", json!({ "warning": "roundtrip-skipped", "message": reason }));
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    let back = extract_radiation(&evolve(rebuilt.clone(), BoundaryPolicy::Extend)?, t, range)?;
    let mut w = ctx.create("roundtrip.csv")?;
    back.write_csv(&mut w)?;
    w.flush()?;

    let n = grid.len();
    let restricted = RadialState::new(grid, rebuilt.t, rebuilt.u[..n].to_vec(), rebuilt.v[..n].to_vec())?;
    let diff = data.axpy(-1.0, &restricted)?;
    let data_error = if energy > 0.0 { (free_energy(&diff, dim)? / energy).sqrt() } else { 0.0 };
    let roundtrip_error = if norm > 0.0 { profile.relative_l2_error(&back) } else { 0.0 };
    let passed = roundtrip_error <= tolerance;
    report["inverse_r_max"] = json!(opts.grid.r_max());
    report["roundtrip_rel_l2"] = json!(roundtrip_error);
    report["data_rel_error"] = json!(data_error);
    report["passed"] = json!(passed);
    ctx.json("report.json", &report)?;
    if !passed {
        return Err(CliError::Accuracy {
            message: format!("radiation round trip error {roundtrip_error:.3e} exceeds {tolerance:.1e}"),
            report: ctx.path("report.json"),
        });
    }
    Ok(())
}

pub fn exterior(ctx: &mut Context) -> CliResult<()> {
    let traj = ctx.run()?;
    let times = ctx.cfg.defect_times();
    let parts = ctx
        .cfg
        .diagnostics
        .a_list
        .par_iter()
        .map(|&a| {
            let scat = extract_scattering_part(&traj, a)?;
            let series = exterior_defect_series(&traj, &scat, a, &times)?;
            Ok((a, scat, series))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut points = Vec::new();
    let mut w = ctx.csv("defect.csv")?;
    w.write_record(["a", "t", "value"])?;
    for (a, _, series) in &parts {
        for &(t, value) in series {
            w.write_record([*a, t, value].map(ftos))?;
            points.push(DefectPoint { a: *a, t, value });
        }
    }
    w.flush()?;

    let mut w = ctx.csv("scattering.csv")?;
    w.write_record(["a", "r", "u", "ut"])?;
    for (a, scat, _) in &parts {
        for (i, r) in scat.data.grid.nodes().enumerate() {
            w.write_record([*a, r, scat.data.u[i], scat.data.v[i]].map(ftos))?;
        }
    }
    w.flush()?;

    ctx.json("summary.json", &TrajectorySummary::new(&traj, points)?)
}

pub fn soliton(ctx: &mut Context) -> CliResult<()> {
    let cfg = ctx.cfg;
    let dim = cfg.dim()?;
    let ew = ground_state_energy(dim);
    let rows = cfg
        .diagnostics
        .ell_list
        .par_iter()
        .map(|&ell| Ok((ell, soliton_energy(&SolitonSpec::boosted(ell, dim), dim)?)))
        .collect::<CliResult<Vec<_>>>()?;

    let mut worst = 0.0_f64;
    let mut w = ctx.csv("energy_law.csv")?;
    w.write_record(["ell", "energy", "ratio", "predicted", "rel_error"])?;
    for (ell, energy) in rows {
        let predicted = 1.0 / (1.0 - ell * ell).sqrt();
        let ratio = energy / ew;
        let rel = (ratio - predicted).abs() / predicted;
        worst = worst.max(rel);
        w.write_record([ell, energy, ratio, predicted, rel].map(ftos))?;
    }
    w.flush()?;

    let spacings = [4.0, 2.0, 1.0].map(|k| k * cfg.grid.dr);
    let residuals = spacings
        .par_iter()
        .map(|&dr| Ok(elliptic_residual(&RadialGrid::with_spacing(cfg.grid.r_max, dr)?, dim)))
        .collect::<CliResult<Vec<_>>>()?;
    let mut w = ctx.csv("residual.csv")?;
    w.write_record(["dr", "residual", "order"])?;
    for (k, (&dr, &res)) in spacings.iter().zip(&residuals).enumerate() {
        let order = if k == 0 { String::new() } else { ftos((residuals[k - 1] / res).log2()) };
        w.write_record([ftos(dr), ftos(res), order])?;
    }
    w.flush()?;

    let state = cfg.initial_state(ctx.seed)?;
    let fit = match fit_soliton(&state, dim) {
        Ok(f) => json!({ "lambda": f.lambda, "sign": f.sign, "residual": f.residual }),
        Err(wavecone_core::Error::UndefinedFit) => json!(null),
        Err(e) => return Err(e.into()),
    };
    ctx.json("fit.json", &json!({ "ground_state_energy": ew, "energy_law_max_rel_error": worst, "fit": fit }))?;
    if worst > 1e-2 {
        return Err(CliError::Accuracy {
            message: format!("energy law relative error {worst:.3e} exceeds 1e-2"),
            report: ctx.path("energy_law.csv"),
        });
    }
    Ok(())
}

pub fn virial(ctx: &mut Context) -> CliResult<()> {
    let traj = ctx.run()?;
    let d = &ctx.cfg.diagnostics;
    let rep = virial_report(&traj, d.alpha, d.center_offset, traj.dim)?;
    let mut w = ctx.create("virial.csv")?;
    rep.write_csv(&mut w)?;
    w.flush()?;

    let mut w = ctx.csv("quantities.csv")?;
    w.write_record(["t", "a", "b", "c", "d"])?;
    for k in 0..rep.times.len() {
        w.write_record([rep.times[k], rep.a[k], rep.b[k], rep.c[k], rep.d[k]].map(ftos))?;
    }
    w.flush()?;

    let maxima: serde_json::Map<_, _> =
        rep.curves.iter().map(|c| (c.identity.label().to_string(), json!(c.max_residual()))).collect();
    ctx.json(
        "report.json",
        &json!({
            "status": if traj.status.is_global() { "global" } else { "blow-up" },
            "alpha": rep.alpha,
            "center_offset": rep.center_offset,
            "max_residual": maxima,
        }),
    )
}

pub fn channels(ctx: &mut Context) -> CliResult<()> {
    let cfg = ctx.cfg;
    if cfg.dim()? != Dimension::THREE {
        return Err(CliError::Config("channels requires dimension = 3".into()));
    }
    let data = cfg.initial_state(ctx.seed)?;
    let half = free_energy(&data, Dimension::THREE)?;
    let series = channels_exterior_energy(&data, &cfg.channel_times())?;
    let mut w = ctx.csv("channels.csv")?;
    w.write_record(["t", "exterior", "half_total", "ratio"])?;
    for (t, ext) in series {
        let ratio = if half > 0.0 { ext / half } else { 0.0 };
        w.write_record([t, ext, half, ratio].map(ftos))?;
    }
    w.flush()?;
    Ok(())
}

pub fn geometry_selftest(ctx: &mut Context) -> CliResult<()> {
    let cfg = ctx.cfg;
    let g = &cfg.geometry;
    let lemma = cone_lemma_check(cfg.cone_params()?, cfg.dim()?, g.samples, ctx.seed)?;
    let cosine = cos_inequality_check(g.cosine_points);
    let items: [(&str, &CheckReport); 5] = [
        ("inside-ball", &lemma.inside_ball),
        ("narrow-cone", &lemma.narrow_cone),
        ("shell", &lemma.shell),
        ("shell-proof-bound", &lemma.shell_proof),
        ("cosine", &cosine),
    ];
    let mut w = ctx.csv("geometry.csv")?;
    w.write_record(["item", "checked", "violations", "min_slack"])?;
    for (name, r) in items {
        w.write_record([name.to_string(), r.checked.to_string(), r.violations.to_string(), ftos(r.min_slack)])?;
    }
    w.flush()?;

    let proven =
        lemma.inside_ball.passed() && lemma.narrow_cone.passed() && lemma.shell_proof.passed() && cosine.passed();
    ctx.json(
        "geometry.json",
        &json!({ "lemma": lemma, "cosine": cosine, "proven_items_pass": proven, "stated_shell_bound_holds": lemma.shell.passed() }),
    )?;
    if !lemma.shell.passed() {
        eprintln!(
            "{}",
            json!({
                "warning": "shell-bound",
                "message": format!(
                    "{} of {} shell points exceed the stated angle bound, {} exceed the proof bound",
                    lemma.shell.violations, lemma.shell.checked, lemma.shell_proof.violations
                ),
            })
        );
    }
    if !proven {
        return Err(CliError::Accuracy {
            message: "a proven geometry item failed".into(),
            report: ctx.path("geometry.json"),
        });
    }
    Ok(())
}
