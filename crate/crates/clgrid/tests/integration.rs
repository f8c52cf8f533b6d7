//! Cross-module checks: the closed-form propagator against both independent
//! integrators, spatial Richardson error control, and the approach of the
//! energy-basis off-diagonal content to zero.

use clgrid::analysis::project_energy_basis;
use clgrid::oracle::{self, DtPolicy, OracleConfig, StencilOrder};
use clgrid::propagator::{propagate, propagate_oscillator};
use clgrid::transforms::to_position;
use clgrid::{realize, Axis, DiffusionMode, ModelParams, StateSpec};

fn params(gamma: f64, omega: f64, d: f64) -> ModelParams {
    ModelParams::new(1.0, gamma, omega, 1.0, DiffusionMode::Explicit { d }).unwrap()
}

fn benchmark_state(p: &ModelParams) -> clgrid::RealizedState {
    let sigma = if p.is_free_particle() {
        (0.5f64).sqrt()
    } else {
        (p.hbar() / (2.0 * p.mass() * p.omega())).sqrt()
    };
    realize(
        &StateSpec::Gaussian {
            x0: 0.5,
            p0: 0.0,
            sigma,
        },
        p,
    )
    .unwrap()
}

#[test]
fn oracle_agrees_with_the_closed_form_on_a_coarse_grid() {
    // Quick version of the acceptance run: 128^2, one intermediate time.
    // The free-particle state is wider in the offset direction and needs the
    // larger box to keep its tails off the boundary.
    let k_axis = Axis::symmetric(128, 14.0).unwrap();
    for (g, w, d) in [(5.0, 3.0, 60.0), (1.0, 3.0, 12.0), (1.0, 0.0, 8.0)] {
        let r_axis = Axis::symmetric(128, if w == 0.0 { 8.0 } else { 6.0 }).unwrap();
        let p = params(g, w, d);
        let st = benchmark_state(&p);
        let initial = st.char_grid(k_axis, r_axis);
        let evolved = oracle::evolve(&initial, 0.3, &OracleConfig::default(), &p).unwrap();
        let exact = propagate(&st, 0.3, &p, k_axis, r_axis).unwrap();
        let gap = evolved.linf_distance(&exact);
        assert!(gap < 1e-4, "({g},{w}): oracle gap {gap:e}");
        let drift = (evolved.origin_value() - initial.origin_value()).norm();
        assert!(drift < 1e-10, "trace drift {drift:e}");
    }
}

#[test]
fn oracle_conserves_trace_and_symmetry_over_long_horizons() {
    // gamma t = 5 on the overdamped benchmark: the pinned-origin value and
    // the Hermitian mirror symmetry must both survive the full horizon.
    let p = params(5.0, 3.0, 60.0);
    let st = benchmark_state(&p);
    let k_axis = Axis::symmetric(128, 14.0).unwrap();
    let r_axis = Axis::symmetric(128, 6.0).unwrap();
    let initial = st.char_grid(k_axis, r_axis);
    let evolved = oracle::evolve(&initial, 1.0, &OracleConfig::default(), &p).unwrap();
    let drift = (evolved.origin_value() - initial.origin_value()).norm();
    assert!(drift < 1e-8, "trace drift over gamma t = 5: {drift:e}");
    assert!(
        evolved.hermiticity_error() < 1e-8,
        "hermiticity error {:e}",
        evolved.hermiticity_error()
    );
}

#[test]
fn position_space_integrator_second_opinion() {
    // The second-order-form integrator cross-checks the same solution at its
    // lower tolerance.
    let p = params(5.0, 3.0, 60.0);
    let st = benchmark_state(&p);
    let center = Axis::symmetric(128, 6.0).unwrap();
    let offset = Axis::symmetric(128, 5.0).unwrap();
    let rho0 = st.render_position(center, offset).unwrap();
    let cfg = OracleConfig {
        stencil: StencilOrder::Fourth,
        dt: DtPolicy::Auto { safety: 0.5 },
    };
    let evolved = oracle::evolve_position(&rho0, 0.3, &cfg, &p).unwrap();
    // Exact solution carried to position space on matching axes.
    let k_axis = center.conjugate();
    let exact = to_position(&propagate_oscillator(&st, 0.3, &p, k_axis, offset).unwrap()).unwrap();
    let gap = evolved.linf_distance(&exact);
    assert!(gap < 1e-3, "position-space gap {gap:e}");
}

#[test]
fn richardson_spatial_estimate_bounds_the_observed_gap() {
    // Error estimate from grid halving must bound (up to a factor) the true
    // oracle-vs-exact gap on the coarse grid.
    let p = params(5.0, 3.0, 60.0);
    let st = benchmark_state(&p);
    let t = 0.3;
    let fine_dt = DtPolicy::Fixed(1e-4);
    let cfg = OracleConfig {
        stencil: StencilOrder::Fourth,
        dt: fine_dt,
    };
    let run = |n: usize| {
        let k_axis = Axis::symmetric(n, 14.0).unwrap();
        let r_axis = Axis::symmetric(n, 6.0).unwrap();
        let initial = st.char_grid(k_axis, r_axis);
        oracle::evolve(&initial, t, &cfg, &p).unwrap()
    };
    let coarse = run(128);
    let fine = run(256);
    // compare on the shared (coarse) lattice
    let mut est: f64 = 0.0;
    for i in 0..128 {
        for j in 0..128 {
            est = est.max((coarse.values[[i, j]] - fine.values[[2 * i, 2 * j]]).norm());
        }
    }
    est *= 16.0 / 15.0;
    let exact = propagate_oscillator(
        &st,
        t,
        &p,
        Axis::symmetric(128, 14.0).unwrap(),
        Axis::symmetric(128, 6.0).unwrap(),
    )
    .unwrap();
    let observed = coarse.linf_distance(&exact);
    assert!(
        observed <= 2.0 * est,
        "observed {observed:e} not bounded by Richardson estimate {est:e}"
    );
}

#[test]
fn offdiagonal_energy_content_decays_monotonically() {
    // Overdamped benchmark, superposition initial state: the energy-basis
    // off-diagonal mass ratio decreases (after transients) to < 1e-3 at the
    // end of the run.
    let p = params(5.0, 3.0, 60.0);
    let st = realize(
        &StateSpec::Cat {
            x0: 0.0,
            separation: 0.4,
            p0: 0.0,
            sigma: (1.0f64 / 6.0).sqrt(),
            phase: 0.0,
        },
        &p,
    )
    .unwrap();
    let pos_axis = Axis::symmetric(256, 8.0).unwrap();
    let k_axis = pos_axis.conjugate();
    let mut ratios = Vec::new();
    for &t in &[0.2, 0.5, 1.0, 1.5, 2.0] {
        let rho =
            to_position(&propagate_oscillator(&st, t, &p, k_axis, pos_axis).unwrap()).unwrap();
        let spec = project_energy_basis(&rho, &p, 16).unwrap();
        ratios.push(spec.offdiag_ratio);
    }
    for pair in ratios.windows(2) {
        assert!(pair[1] < pair[0], "not monotone: {ratios:?}");
    }
    assert!(*ratios.last().unwrap() < 1e-3, "{ratios:?}");
}

#[test]
fn entropy_converges_to_the_stationary_value_for_different_states() {
    // Two unrelated initial states reach the same linear entropy, the
    // closed-form stationary value, in a mixed-stationary-state regime.
    let p = params(5.0, 3.0, 120.0);
    let expect = clgrid::analysis::StationaryState::of(&p)
        .unwrap()
        .linear_entropy();
    let pos_axis = Axis::symmetric(256, 8.0).unwrap();
    let k_axis = pos_axis.conjugate();
    let mut finals = Vec::new();
    for spec in [
        StateSpec::Gaussian {
            x0: 0.8,
            p0: 0.5,
            sigma: 0.5,
        },
        StateSpec::Cat {
            x0: 0.0,
            separation: 1.2,
            p0: 0.0,
            sigma: 0.41,
            phase: 0.0,
        },
    ] {
        let st = realize(&spec, &p).unwrap();
        let rho =
            to_position(&propagate_oscillator(&st, 8.0, &p, k_axis, pos_axis).unwrap()).unwrap();
        let s = clgrid::analysis::linear_entropy(&rho);
        assert!((s - expect).abs() < 1e-4, "S = {s} vs {expect}");
        finals.push(s);
    }
    assert!(
        (finals[0] - finals[1]).abs() < 1e-6,
        "initial-state dependence survived: {finals:?}"
    );
}
