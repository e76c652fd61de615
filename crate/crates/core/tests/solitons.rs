use std::f64::consts::PI;

use proptest::prelude::*;
use wavecone_core::data::{Bump, InitialData};
use wavecone_core::energy::energy_between;
use wavecone_core::solitons::{
    elliptic_residual, eval_q_ell, eval_w, fit_soliton, ground_state_energy, pairing_identity, Sign,
};
use wavecone_core::{Dimension, RadialGrid, RadialState, SolitonSpec};

/// Area of the unit sphere S^N in ℝ^{N+1}.
fn upper_sphere_area(dim: Dimension) -> f64 {
    match dim.get() {
        3 => 2.0 * PI * PI,
        4 => 8.0 * PI * PI / 3.0,
        _ => PI.powi(3),
    }
}

/// ‖∇W‖² = S_N^{N/2} with the sharp Sobolev constant S_N = N(N−2)/4 · |S^N|^{2/N}.
fn sharp_sobolev_gradient(dim: Dimension) -> f64 {
    let n = dim.as_f64();
    let s = n * (n - 2.0) / 4.0 * upper_sphere_area(dim).powf(2.0 / n);
    s.powf(n / 2.0)
}

fn ground_state(grid: RadialGrid, dim: Dimension, amp: f64, lambda: f64) -> RadialState {
    InitialData::GroundState { amplitude: amp, lambda }.sample(grid, dim).unwrap()
}

#[test]
fn explicit_values() {
    assert_eq!(eval_w(0.0, Dimension::THREE), 1.0);
    assert!((eval_w(3f64.sqrt(), Dimension::THREE) - 0.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(eval_w(0.0, Dimension::FOUR), 1.0);
    assert_eq!(eval_w(0.0, Dimension::FIVE), 1.0);
}

#[test]
fn ground_state_energy_matches_sharp_sobolev_constant() {
    for dim in Dimension::ALL {
        let want = sharp_sobolev_gradient(dim) / dim.as_f64();
        let got = ground_state_energy(dim);
        assert!((got - want).abs() <= 1e-8 * want, "{dim}: {got} vs {want}");
    }
}

#[test]
fn elliptic_residual_is_second_order() {
    for dim in Dimension::ALL {
        let r: Vec<f64> = [1.0 / 16.0, 1.0 / 32.0]
            .iter()
            .map(|&dr| elliptic_residual(&RadialGrid::with_spacing(20.0, dr).unwrap(), dim))
            .collect();
        let factor = r[0] / r[1];
        assert!((3.5..=4.5).contains(&factor), "{dim}: {r:?}");
    }
}

#[test]
fn pairing_identity_holds_with_the_boundary_flux() {
    for dim in Dimension::ALL {
        let grid = RadialGrid::with_spacing(30.0, 1.0 / 1024.0).unwrap();
        let (gap, flux, gradient) = pairing_identity(&grid, dim);
        assert!((gap - flux).abs() <= 1e-8 * gradient, "{dim}: gap {gap}, flux {flux}");
    }
}

#[test]
fn fit_recovers_family_members() {
    let grid = RadialGrid::with_spacing(40.0, 1.0 / 32.0).unwrap();
    for dim in Dimension::ALL {
        let fit = fit_soliton(&ground_state(grid, dim, 1.0, 2.0), dim).unwrap();
        assert!((fit.lambda - 2.0).abs() <= 1e-3, "{dim}: {fit:?}");
        assert!(fit.residual <= 1e-6, "{dim}: {fit:?}");
        assert_eq!(fit.sign, Sign::Positive);

        let fit = fit_soliton(&ground_state(grid, dim, -1.0, 1.0), dim).unwrap();
        assert_eq!(fit.sign, Sign::Negative);
        assert!((fit.lambda - 1.0).abs() <= 1e-3, "{dim}: {fit:?}");
    }
}

#[test]
fn fit_tolerates_a_dispersive_tail() {
    let grid = RadialGrid::with_spacing(40.0, 1.0 / 32.0).unwrap();
    let tail = Bump::new(0.01, 10.0, 1.0).unwrap();
    for dim in Dimension::ALL {
        let w = ground_state(grid, dim, 1.0, 1.0);
        let tail_state = RadialState::from_fn(grid, |r| tail.eval(r), |_| 0.0).unwrap();
        let fit = fit_soliton(&w.axpy(1.0, &tail_state).unwrap(), dim).unwrap();
        assert!((fit.lambda - 1.0).abs() <= 0.02, "{dim}: {fit:?}");
        let g = |s: &RadialState| energy_between(s, dim, 0.0, f64::INFINITY).unwrap().gradient;
        let fraction = (g(&tail_state) / g(&w)).sqrt();
        assert!(fit.residual <= 2.0 * fraction && fit.residual >= 0.5 * fraction, "{dim}: {fit:?} vs {fraction}");
    }
}

#[test]
fn fit_is_stable_under_refinement() {
    let dim = Dimension::FOUR;
    let tail = Bump::new(0.05, 6.0, 2.0).unwrap();
    let fits: Vec<f64> = [1.0 / 16.0, 1.0 / 32.0]
        .iter()
        .map(|&dr| {
            let grid = RadialGrid::with_spacing(40.0, dr).unwrap();
            let s = ground_state(grid, dim, 1.0, 1.5);
            let t = RadialState::from_fn(grid, |r| tail.eval(r), |_| 0.0).unwrap();
            fit_soliton(&s.axpy(1.0, &t).unwrap(), dim).unwrap().lambda
        })
        .collect();
    assert!((fits[0] - fits[1]).abs() <= 1e-2, "{fits:?}");
}

fn pde_residual(t: f64, x: &[f64], spec: &SolitonSpec, dim: Dimension, h: f64) -> f64 {
    let q = |t: f64, x: &[f64]| eval_q_ell(t, x, spec, dim).unwrap();
    let q0 = q(t, x);
    let dtt = (q(t + h, x) - 2.0 * q0 + q(t - h, x)) / (h * h);
    let mut lap = 0.0;
    let mut y = x.to_vec();
    for i in 0..x.len() {
        y[i] = x[i] + h;
        let p = q(t, &y);
        y[i] = x[i] - h;
        let m = q(t, &y);
        y[i] = x[i];
        lap += (p - 2.0 * q0 + m) / (h * h);
    }
    dtt - lap - dim.nonlinearity(q0)
}

fn point(dim: Dimension) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, dim.get() as usize)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn boosted_soliton_travels_with_its_velocity(
        d in 0usize..3,
        raw in prop::collection::vec(-1.0f64..1.0, 5),
        speed in 0.0f64..0.95,
        t in -5.0f64..5.0,
        x in point(Dimension::FIVE),
    ) {
        let dim = Dimension::ALL[d];
        let n = dim.get() as usize;
        let norm = raw[..n].iter().map(|a| a * a).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let ell: Vec<f64> = raw[..n].iter().map(|a| speed * a / norm).collect();
        let spec = SolitonSpec { lambda: 1.3, sign: Sign::Positive, ell: ell.clone() };
        let x = &x[..n];
        let shifted: Vec<f64> = x.iter().zip(&ell).map(|(a, l)| a - t * l).collect();
        let lhs = eval_q_ell(t, x, &spec, dim).unwrap();
        let rhs = eval_q_ell(0.0, &shifted, &spec, dim).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-13, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn boosted_soliton_solves_the_equation(
        d in 0usize..3,
        speed in 0.0f64..0.9,
        t in -2.0f64..2.0,
        x in point(Dimension::FIVE),
    ) {
        let dim = Dimension::ALL[d];
        let n = dim.get() as usize;
        let spec = SolitonSpec::boosted(speed, dim);
        let coarse = pde_residual(t, &x[..n], &spec, dim, 2e-2).abs();
        let fine = pde_residual(t, &x[..n], &spec, dim, 1e-2).abs();
        prop_assert!(fine <= 1e-3, "residual {}", fine);
        prop_assert!(fine <= 0.3 * coarse + 1e-8, "{} then {}", coarse, fine);
    }

    #[test]
    fn ball_energy_is_scale_invariant(d in 0usize..3, lambda in 0.5f64..2.0) {
        let dim = Dimension::ALL[d];
        let grid = RadialGrid::with_spacing(25.0, 1.0 / 128.0).unwrap();
        let e = |l: f64| energy_between(&ground_state(grid, dim, 1.0, l), dim, 0.0, 10.0 * l).unwrap().total;
        let (e1, el) = (e(1.0), e(lambda));
        prop_assert!((el - e1).abs() <= 1e-4 * e1.abs(), "{} vs {}", el, e1);
    }
}
