use abcd_core::experiments::{run_convergence, run_convergence_row, ConvergenceSetup};
use abcd_core::presets::{lookup, CONVERGENCE_CELLS};
use abcd_core::{Family, Grid, GridFunction, Regime, RusanovConfig, SchemeConfig, SimState, Stepper};
use proptest::prelude::*;

const SMOOTH: [Family; 6] = [Family::A, Family::B, Family::C, Family::D, Family::E, Family::F];

fn wave(grid: Grid, amp: f64, k: f64, phase: f64) -> GridFunction {
    let w = 2.0 * std::f64::consts::PI * k / grid.length();
    GridFunction::from_fn(grid, |x| amp * (w * x + phase).sin() + 0.5 * amp * (2.0 * w * x - phase).cos())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // a step of the scheme zeroes its own residual
    #[test]
    fn step_has_zero_defect(
        which in 0usize..6,
        cells in 16usize..96,
        length in 4.0f64..40.0,
        amp in 0.01f64..0.5,
        k in 1u32..4,
        phase in 0.0f64..6.0,
        implicit in any::<bool>(),
        dt_frac in 0.05f64..0.9,
    ) {
        let params = SMOOTH[which].params();
        let grid = Grid::new(length, cells).unwrap();
        let s0 = SimState::new(0.0, wave(grid, amp, k as f64, phase), wave(grid, 0.7 * amp, k as f64, 1.0 - phase)).unwrap();
        let fixed_theta = params.regime() == Regime::MixedOrZero && !params.is_free_theta_case();
        let theta = if fixed_theta || implicit { 1.0 } else { 0.5 };
        let cfg = SchemeConfig::default()
            .with_theta(theta)
            .with_rusanov(RusanovConfig::Adaptive { alpha: 0.1 });
        let stepper = Stepper::new(params, cfg, grid).unwrap();
        let nu = stepper.viscosity(&s0);
        let dt = dt_frac * grid.dx() / nu.0.max(nu.1).max(1.0);
        let s1 = stepper.step(&s0, dt).unwrap();
        let (eps_e, eps_u) = stepper.defect(&s0, &s1, dt).unwrap();
        let scale = 1.0 + s0.eta.linf_norm().max(s0.u.linf_norm()) / grid.dx() / dt.min(grid.dx() * grid.dx());
        prop_assert!(eps_e.linf_norm() <= 1e-10 * scale, "eta defect {} (scale {scale})", eps_e.linf_norm());
        prop_assert!(eps_u.linf_norm() <= 1e-10 * scale, "u defect {} (scale {scale})", eps_u.linf_norm());
    }
}

#[test]
fn doubling_cells_never_increases_the_error() {
    for family in SMOOTH {
        let mut setup = ConvergenceSetup::from_preset(&lookup(family.name()).unwrap());
        setup.t_final = 0.5;
        let errors: Vec<f64> = [160, 320, 640]
            .iter()
            .map(|&n| run_convergence_row(&setup, n).unwrap().error().expect("no blow-up"))
            .collect();
        assert!(errors.windows(2).all(|w| w[1] <= w[0]), "{family:?}: {errors:?}");
    }
}

fn adaptive_rates(family: Family) -> Vec<f64> {
    let setup = ConvergenceSetup::from_preset(&lookup(family.name()).unwrap());
    run_convergence(&setup, &CONVERGENCE_CELLS).unwrap().rates()
}

#[test]
fn adaptive_rates_stay_near_one() {
    for family in [Family::A, Family::B, Family::C, Family::D, Family::E] {
        let rates = adaptive_rates(family);
        assert_eq!(rates.len(), CONVERGENCE_CELLS.len() - 1);
        assert!(rates.iter().all(|r| (0.9..=1.2).contains(r)), "{family:?}: {rates:?}");
    }
}

// the coarsest rate of F sits just under the window
#[test]
fn case_f_rates_rise_towards_one() {
    let rates = adaptive_rates(Family::F);
    assert!(rates.windows(2).all(|w| w[0] < w[1] && w[1] < 1.0), "{rates:?}");
    assert!((0.85..0.9).contains(&rates[0]), "{rates:?}");
    assert!(rates[1..].iter().all(|r| (0.9..=1.2).contains(r)), "{rates:?}");
}
