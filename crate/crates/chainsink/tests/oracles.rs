//! Independent-oracle checks: step-halving and grid-refinement estimates,
//! a brute-force sign scan for the intersection time, and the full-space
//! frequency-invariance of all recorded observables.

use chainsink::analysis::{
    find_lambda_qc, integrated_coherence, intersection_time, max_coherence, propagate_pair,
    run_point,
};
use chainsink::dynamics::{efficiency, propagate, PropagationControls, TMax};
use chainsink::model::{build_generator, BaseParams, Scenario};
use chainsink::operators::{initial_state, Representation};

fn reference_point() -> BaseParams {
    BaseParams::new(3, 0.0, 1.0, 0.25, 0.5, 1.0).unwrap()
}

#[test]
fn integrated_coherence_is_stable_under_step_halving() {
    let params = reference_point();
    let ctrl = PropagationControls::default();
    let (_, traj, _) = chainsink::analysis::run_point_trajectories(&params, &ctrl).unwrap();
    let coarse = integrated_coherence(&traj).unwrap();

    let halved = ctrl.clone().with_record_every(traj.record_every / 2.0);
    let (_, traj_fine, _) =
        chainsink::analysis::run_point_trajectories(&params, &halved).unwrap();
    let fine = integrated_coherence(&traj_fine).unwrap();

    assert!(
        (coarse.value - fine.value).abs() <= 1e-4,
        "I changed by {} under step halving",
        (coarse.value - fine.value).abs()
    );
    assert!(!coarse.tail_warning);
}

#[test]
fn max_coherence_is_stable_under_grid_refinement() {
    let params = reference_point().with_lambda(0.84);
    let ctrl = PropagationControls::default();
    let (_, traj, _) = chainsink::analysis::run_point_trajectories(&params, &ctrl).unwrap();
    let (c0, _) = max_coherence(&traj);

    let halved = ctrl.clone().with_record_every(traj.record_every / 2.0);
    let (_, traj_fine, _) =
        chainsink::analysis::run_point_trajectories(&params, &halved).unwrap();
    let (c1, _) = max_coherence(&traj_fine);

    assert!(
        (c0 - c1).abs() <= 1e-4,
        "C_max changed by {} under grid refinement",
        (c0 - c1).abs()
    );
}

#[test]
fn intersection_time_matches_dense_sign_scan() {
    let params = reference_point().with_lambda(3.0);
    let (traj_q, traj_c) = propagate_pair(&params, &PropagationControls::default()).unwrap();
    let tau = intersection_time(&traj_q, &traj_c).unwrap().unwrap();

    // brute force: re-propagate on a dt = 1e-4 grid over an interval that
    // safely contains the crossing and scan for the last sign change
    let horizon = (2.0 * tau).max(4.0);
    let dense = PropagationControls::default()
        .with_t_max(TMax::Fixed(horizon))
        .with_record_every(1e-4);
    let (dq, dc) = propagate_pair(&params, &dense).unwrap();
    let d: Vec<f64> = (0..dq.len())
        .map(|i| dq.sink_population[i] - dc.sink_population[i])
        .collect();
    let last_nonpos = (0..d.len()).rev().find(|&k| d[k] <= 0.0).unwrap();
    assert!(
        last_nonpos + 1 < d.len(),
        "scan found no persistent crossing below {horizon}"
    );
    let tau_scan = dq.times[last_nonpos];

    assert!(
        (tau - tau_scan).abs() <= 1e-3,
        "tau {tau} vs dense scan {tau_scan}"
    );
}

#[test]
fn no_intersection_below_the_coupling_threshold() {
    let params = reference_point().with_lambda(0.3);
    let (traj_q, traj_c) = propagate_pair(&params, &PropagationControls::default()).unwrap();
    assert_eq!(intersection_time(&traj_q, &traj_c).unwrap(), None);
    // P_Q(t) <= P_C(t) throughout
    for i in 0..traj_q.len() {
        assert!(traj_q.sink_population[i] <= traj_c.sink_population[i] + 1e-9);
    }
}

#[test]
fn lambda_qc_is_consistent_across_tolerances() {
    let params = reference_point();
    let ctrl = PropagationControls::default();
    let loose = find_lambda_qc(&params, (0.1, 2.0), 1e-3, &ctrl).unwrap();
    let tight = find_lambda_qc(&params, (0.1, 2.0), 1e-4, &ctrl).unwrap();
    assert!(
        (loose.lambda_qc - tight.lambda_qc).abs() <= 1e-3,
        "lambda_qc moved from {} to {}",
        loose.lambda_qc,
        tight.lambda_qc
    );
}

#[test]
fn lambda_qc_grows_with_dephasing() {
    let ctrl = PropagationControls::default();
    let lo = find_lambda_qc(&reference_point(), (0.05, 10.0), 1e-3, &ctrl).unwrap();
    let hi = find_lambda_qc(
        &reference_point().with_gamma(0.5),
        (0.05, 10.0),
        1e-3,
        &ctrl,
    )
    .unwrap();
    assert!(
        hi.lambda_qc > lo.lambda_qc,
        "lambda_qc(gamma=0.5) = {} should exceed lambda_qc(gamma=0.25) = {}",
        hi.lambda_qc,
        lo.lambda_qc
    );
}

#[test]
fn observables_are_frequency_independent_in_the_full_space() {
    // the full-space state does depend on omega through coherence phases,
    // but every recorded observable must not
    let mut reference: Option<(Vec<f64>, Vec<f64>)> = None;
    for omega in [0.0, 1.0, 10.0] {
        let spec = BaseParams::new(2, omega, 1.3, 0.25, 0.5, 1.0)
            .unwrap()
            .spec(Scenario::Quantum);
        let gen = build_generator(&spec, Representation::FullSpace).unwrap();
        let s0 = initial_state(&spec, Representation::FullSpace);
        let ctrl = PropagationControls::default()
            .with_t_max(TMax::Fixed(8.0))
            .with_record_every(0.02)
            .with_tolerances(1e-11, 1e-13);
        let traj = propagate(&gen, &s0, &ctrl).unwrap();
        match &reference {
            None => reference = Some((traj.sink_population, traj.coherence)),
            Some((sink0, coh0)) => {
                for i in 0..sink0.len() {
                    assert!(
                        (traj.sink_population[i] - sink0[i]).abs() <= 1e-8,
                        "sink population differs at sample {i} for omega = {omega}"
                    );
                    assert!(
                        (traj.coherence[i] - coh0[i]).abs() <= 1e-8,
                        "coherence differs at sample {i} for omega = {omega}"
                    );
                }
            }
        }
    }
}

#[test]
fn flux_identity_holds_on_the_worst_trapezoid_case() {
    // classical N = 2: the site-N population has a nonzero initial slope,
    // which maximizes the trapezoid discretization error
    let spec = BaseParams::new(2, 0.0, 3.0, 0.0, 0.0, 1.0)
        .unwrap()
        .spec(Scenario::Classical);
    let gen = build_generator(&spec, Representation::ReducedSingleExcitation).unwrap();
    let s0 = initial_state(&spec, Representation::ReducedSingleExcitation);
    let traj = propagate(&gen, &s0, &PropagationControls::default()).unwrap();
    let eff = efficiency(&traj).unwrap();
    assert!(
        eff.discrepancy <= 1e-5,
        "flux identity off by {}",
        eff.discrepancy
    );
}

#[test]
fn classical_full_space_run_never_generates_coherence() {
    let spec = BaseParams::new(3, 0.0, 1.5, 0.4, 0.5, 1.0)
        .unwrap()
        .spec(Scenario::Classical);
    let gen = build_generator(&spec, Representation::FullSpace).unwrap();
    let s0 = initial_state(&spec, Representation::FullSpace);
    let traj = propagate(&gen, &s0, &PropagationControls::default()).unwrap();
    assert!(traj.converged);
    for &c in &traj.coherence {
        assert!(c <= 1e-10);
    }
}

#[test]
fn eta_matches_analytic_value_for_single_site() {
    // gamma and lambda must be irrelevant for N = 1
    for (lambda, gamma) in [(0.0, 0.0), (2.0, 1.0)] {
        let params = BaseParams::new(1, 0.0, lambda, gamma, 0.5, 1.0).unwrap();
        let s = run_point(&params, &PropagationControls::default()).unwrap();
        assert!((s.eta_q - 2.0 / 3.0).abs() <= 1e-6);
        assert!((s.eta_c - 2.0 / 3.0).abs() <= 1e-6);
    }
}
