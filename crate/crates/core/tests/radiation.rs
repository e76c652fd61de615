use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wavecone_core::data::{random_compact_data, Bump, InitialData};
use wavecone_core::radiation::{
    conformal_profile, extract_radiation, free_energy, incoming_residual, inverse_radiation, vanishing_interior_check,
    InverseOptions,
};
use wavecone_core::{Dimension, EtaRange, LinearEvolution, RadialGrid, RadialState, RadiationProfile};

/// u₀ = (1 - r²)^6 on r < 1 and its derivative.
fn u0(r: f64) -> f64 {
    Bump { amplitude: 1.0, center: 0.0, width: 1.0 }.eval(r)
}

fn u0_prime(r: f64) -> f64 {
    let s = (1.0 - r * r).max(0.0);
    -12.0 * r * s.powi(5)
}

fn exact_bump(dr: f64, r_max: f64) -> LinearEvolution {
    let grid = RadialGrid::with_spacing(r_max, dr).unwrap();
    LinearEvolution::exact_3d(RadialState::from_fn(grid, u0, |_| 0.0).unwrap()).unwrap()
}

#[test]
fn three_dimensional_profile_matches_dalembert() {
    // w = r u = ½[W₀(r+t) + W₀(r−t)] with W₀(s) = s u₀(|s|), so the
    // outgoing combination at r = T + η is −½ W₀'(η).
    let ev = exact_bump(1.0 / 256.0, 24.0);
    let range = EtaRange::new(-1.5, 1.5, 1.0 / 64.0).unwrap();
    let p = extract_radiation(&ev, 20.0, range).unwrap();
    let mut worst = 0.0_f64;
    for (eta, g) in p.etas().zip(p.field()) {
        let s = eta.abs();
        let want = -0.5 * (u0(s) + s * u0_prime(s));
        worst = worst.max((g - want).abs());
    }
    assert!(worst < 1e-4, "max pointwise error {worst}");
}

#[test]
fn primitive_equals_conformal_limit() {
    let ev = exact_bump(1.0 / 256.0, 30.0);
    let range = EtaRange::new(-1.5, 1.5, 1.0 / 64.0).unwrap();
    let p = extract_radiation(&ev, 20.0, range).unwrap();
    let g = p.primitive().unwrap();
    for (i, eta) in p.etas().enumerate().step_by(16) {
        let f = conformal_profile(&ev, eta, 0.0).unwrap();
        assert!((f - g[i]).abs() < 1e-4, "eta {eta}: F {f} vs g {}", g[i]);
    }
}

#[test]
fn conformal_profile_inverts_to_the_solution() {
    let ev = exact_bump(1.0 / 128.0, 16.0);
    let t = 6.0;
    let s = ev.state_at(t).unwrap();
    for (i, r) in s.grid.nodes().enumerate().skip(1).step_by(97) {
        let f = conformal_profile(&ev, r - t, 1.0 / r).unwrap();
        assert!((f / r - s.u[i]).abs() <= 1e-12 * (1.0 + s.u[i].abs()), "r {r}");
    }
}

#[test]
fn incoming_residual_vanishes_for_three_dimensional_waves() {
    let grid = RadialGrid::with_spacing(30.0, 1.0 / 256.0).unwrap();
    let data = InitialData::Bump(Bump::new(1.0, 0.0, 3.0).unwrap()).sample(grid, Dimension::THREE).unwrap();
    let ev = LinearEvolution::exact_3d(data).unwrap();
    let range = EtaRange::new(-1.5, 3.5, 1.0 / 64.0).unwrap();
    let early = incoming_residual(&ev, 2.0, range).unwrap();
    let late = incoming_residual(&ev, 20.0, range).unwrap();
    assert!(late <= 0.1 * early, "{late} vs {early}");
}

#[test]
fn incoming_residual_decreases_in_four_dimensions() {
    let d4 = Dimension::FOUR;
    let grid = RadialGrid::with_spacing(44.0, 1.0 / 64.0).unwrap();
    let data = InitialData::Bump(Bump::new(1.0, 0.0, 1.0).unwrap()).sample(grid, d4).unwrap();
    let ev = LinearEvolution::numeric(data, d4).unwrap();
    let range = EtaRange::new(-1.5, 1.5, 1.0 / 64.0).unwrap();
    let res: Vec<f64> = [5.0, 10.0, 20.0, 40.0].iter().map(|&t| incoming_residual(&ev, t, range).unwrap()).collect();
    assert!(res.windows(2).all(|w| w[1] < w[0]), "{res:?}");
}

#[test]
fn exact_isometry_on_random_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let d3 = Dimension::THREE;
    for _ in 0..3 {
        let grid = RadialGrid::with_spacing(24.0, 1.0 / 1024.0).unwrap();
        let data = random_compact_data(&mut rng, grid, 2.0).unwrap();
        let el = free_energy(&data, d3).unwrap();
        let ev = LinearEvolution::exact_3d(data).unwrap();
        let p = extract_radiation(&ev, 20.0, EtaRange::new(-19.0, 2.5, 1.0 / 1024.0).unwrap()).unwrap();
        let rel = (p.norm_squared(d3) - el).abs() / el;
        assert!(rel < 1e-4, "relative isometry defect {rel}");
    }
}

#[test]
fn interior_energy_and_hardy_norm_leave_fixed_balls() {
    let d4 = Dimension::FOUR;
    let grid = RadialGrid::with_spacing(28.0, 1.0 / 64.0).unwrap();
    let data = InitialData::Bump(Bump::new(1.0, 0.0, 1.0).unwrap()).sample(grid, d4).unwrap();
    let total = 2.0 * free_energy(&data, d4).unwrap();
    let ev = LinearEvolution::numeric(data, d4).unwrap();
    let curve = vanishing_interior_check(&ev, 2.0, &[4.0, 8.0, 16.0, 24.0]).unwrap();
    assert!(curve.windows(2).all(|w| w[1].hardy < w[0].hardy), "{curve:?}");
    assert!(curve.iter().all(|c| c.interior_energy <= 1e-4 * total), "{curve:?}");
}

#[test]
fn inverse_construction_carries_the_profile_energy() {
    let range = EtaRange::new(-6.0, 6.0, 1.0 / 128.0).unwrap();
    let g = RadiationProfile::from_fns(range, |e| 2.0 * e * (-e * e).exp(), |e| (-e * e).exp()).unwrap();
    let grid = RadialGrid::with_spacing(70.0, 1.0 / 128.0).unwrap();
    for dim in [Dimension::FOUR, Dimension::FIVE] {
        let target = g.norm_squared(dim);
        let err = |t_far: f64| {
            let data =
                inverse_radiation(&g, dim, InverseOptions { t_far: Some(t_far), ..InverseOptions::new(grid) }).unwrap();
            (free_energy(&data, dim).unwrap() - target).abs() / target
        };
        let (near, far) = (err(30.0), err(60.0));
        assert!(far <= 1e-3 && far <= near, "{dim}: {near:.2e} at t_far 30, {far:.2e} at t_far 60");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn extraction_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = RadialGrid::with_spacing(16.0, 1.0 / 128.0).unwrap();
        let x = random_compact_data(&mut rng, grid, 2.0).unwrap();
        let y = random_compact_data(&mut rng, grid, 2.0).unwrap();
        let range = EtaRange::new(-4.0, 2.5, 1.0 / 64.0).unwrap();
        let prof = |s: RadialState| extract_radiation(&LinearEvolution::exact_3d(s).unwrap(), 10.0, range).unwrap();
        let combo = prof(x.scaled(a).axpy(b, &y).unwrap());
        let (px, py) = (prof(x), prof(y));
        let scale = 1.0 + combo.field().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..combo.len() {
            let want = a * px.field()[i] + b * py.field()[i];
            prop_assert!((combo.field()[i] - want).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn profile_norm_scales_quadratically(a in 0.1f64..5.0, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = RadialGrid::with_spacing(16.0, 1.0 / 128.0).unwrap();
        let x = random_compact_data(&mut rng, grid, 2.0).unwrap();
        let range = EtaRange::new(-9.0, 2.5, 1.0 / 64.0).unwrap();
        let norm = |s: RadialState| {
            extract_radiation(&LinearEvolution::exact_3d(s).unwrap(), 10.0, range).unwrap().norm_squared(Dimension::THREE)
        };
        let (n1, na) = (norm(x.clone()), norm(x.scaled(a)));
        prop_assert!((na - a * a * n1).abs() <= 1e-12 * (1.0 + na));
    }
}
