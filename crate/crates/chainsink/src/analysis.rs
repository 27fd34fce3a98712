//! Quantifiers derived from states and trajectories: coherence, integrated
//! coherence, trajectory maxima, intersection time, and the coupling
//! threshold λ_QC at which the quantum and classical efficiencies coincide.

use serde::Serialize;

use crate::dynamics::{propagate, trapezoid, PropagationControls, TMax, Trajectory};
use crate::error::{Error, Result};
use crate::model::{build_reduced_generator, BaseParams, Scenario};
use crate::operators::{
    entropy_clamped, initial_state, DensityState, Representation, POSITIVITY_TOL,
};

/// Relative entropy of coherence C(ρ) = S(ρ_diag) − S(ρ), in nats, in the
/// product eigenbasis of the decoupled sites extended by the sink.
///
/// In the reduced representation the vacuum population enters both S(ρ_diag)
/// and S(ρ) as an extra diagonal entry; this is exact because no generator
/// here couples the vacuum coherently to the one-excitation block.
pub fn relative_entropy_of_coherence(rho: &DensityState) -> Result<f64> {
    coherence_with_gate(rho, POSITIVITY_TOL).map(|(c, _)| c)
}

/// Coherence plus the smallest eigenvalue, gating positivity at `gate`.
pub(crate) fn coherence_with_gate(rho: &DensityState, gate: f64) -> Result<(f64, f64)> {
    let m = &rho.matrix;
    let n = m.nrows();
    let mut off_diagonal_mass = false;
    'scan: for j in 0..n {
        for i in 0..n {
            if i != j && (m[(i, j)].re != 0.0 || m[(i, j)].im != 0.0) {
                off_diagonal_mass = true;
                break 'scan;
            }
        }
    }
    let diag = rho.diagonal_probabilities();
    if !off_diagonal_mass {
        // already diagonal: spectrum equals the diagonal and C vanishes
        let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
        gate_positivity(min, gate)?;
        return Ok((0.0, min));
    }
    let eigs = rho.eigenvalues();
    let min = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    gate_positivity(min, gate)?;
    let c = (entropy_clamped(&diag) - entropy_clamped(&eigs)).max(0.0);
    Ok((c, min))
}

fn gate_positivity(min: f64, gate: f64) -> Result<()> {
    if min < -gate {
        return Err(Error::PositivityViolation {
            eigenvalue: min,
            tolerance: gate,
        });
    }
    Ok(())
}

/// ∫ C(ρ(t)) dt over a converged trajectory (trapezoid on the recorded grid).
#[derive(Debug, Clone, Copy)]
pub struct IntegratedCoherence {
    pub value: f64,
    /// Set when the final recorded coherence still exceeds 10·steady_eps,
    /// i.e. the integral may be visibly truncated.
    pub tail_warning: bool,
}

pub fn integrated_coherence(traj: &Trajectory) -> Result<IntegratedCoherence> {
    if !traj.converged {
        return Err(Error::NotConverged {
            t: traj.termination_time,
            residual: traj.chain_residual,
        });
    }
    let value = trapezoid(&traj.times, &traj.coherence);
    let tail = *traj.coherence.last().expect("non-empty trajectory");
    Ok(IntegratedCoherence {
        value,
        tail_warning: tail > 10.0 * traj.steady_eps,
    })
}

/// Global maximum of the recorded coherence and the time it occurs at; ties
/// resolve to the earliest time.
pub fn max_coherence(traj: &Trajectory) -> (f64, f64) {
    let mut best = (traj.coherence[0], traj.times[0]);
    for i in 1..traj.len() {
        if traj.coherence[i] > best.0 {
            best = (traj.coherence[i], traj.times[i]);
        }
    }
    best
}

/// Time after which the quantum sink population permanently exceeds the
/// classical one, or `None` when it never does (λ ≤ λ_QC).
///
/// This is the *last* sign change of P_Q − P_C that holds through the end of
/// the recorded horizon, refined by bisection on the linear interpolants to
/// 1e-6 time units.
pub fn intersection_time(traj_q: &Trajectory, traj_c: &Trajectory) -> Result<Option<f64>> {
    for traj in [traj_q, traj_c] {
        if !traj.converged {
            return Err(Error::NotConverged {
                t: traj.termination_time,
                residual: traj.chain_residual,
            });
        }
    }
    if traj_q.len() != traj_c.len() {
        return Err(Error::GridMismatch(format!(
            "{} vs {} samples",
            traj_q.len(),
            traj_c.len()
        )));
    }
    for (a, b) in traj_q.times.iter().zip(&traj_c.times) {
        if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
            return Err(Error::GridMismatch(format!("sample times {a} vs {b}")));
        }
    }
    let n = traj_q.len();
    let d: Vec<f64> = (0..n)
        .map(|i| traj_q.sink_population[i] - traj_c.sink_population[i])
        .collect();
    let last_nonpos = match (0..n).rev().find(|&k| d[k] <= 0.0) {
        Some(k) => k,
        None => return Ok(Some(0.0)),
    };
    if last_nonpos == n - 1 {
        return Ok(None);
    }
    let (k, kp) = (last_nonpos, last_nonpos + 1);
    let (t0, t1) = (traj_q.times[k], traj_q.times[kp]);
    let lerp = |t: f64| d[k] + (d[kp] - d[k]) * (t - t0) / (t1 - t0);
    let (mut lo, mut hi) = (t0, t1);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if lerp(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Derived scalars for one parameter point, both scenarios.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub params: BaseParams,
    pub eta_q: f64,
    pub eta_c: f64,
    /// η_Q − η_C.
    pub eta_diff: f64,
    /// Integrated coherence of the quantum run (the invasiveness quantifier).
    pub integrated_coherence: f64,
    pub coherence_tail_warning: bool,
    pub max_coherence: f64,
    pub max_coherence_time: f64,
    pub intersection_time: Option<f64>,
    pub converged: bool,
    /// |η − Γ_s ∫ρ_NN dt| for the quantum and classical runs.
    pub flux_discrepancy_q: f64,
    pub flux_discrepancy_c: f64,
}

impl RunSummary {
    pub const CSV_HEADER: &'static str =
        "N,omega,lambda,gamma,Gamma,Gamma_s,eta_Q,eta_C,eta_diff,I,C_max,t_Cmax,tau,converged";

    pub fn csv_row(&self) -> String {
        let p = &self.params;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.n,
            p.omega,
            p.lambda,
            p.gamma,
            p.big_gamma,
            p.gamma_sink,
            self.eta_q,
            self.eta_c,
            self.eta_diff,
            self.integrated_coherence,
            self.max_coherence,
            self.max_coherence_time,
            self.intersection_time
                .map(|t| t.to_string())
                .unwrap_or_default(),
            self.converged,
        )
    }

    /// Placeholder row for a parameter point whose evaluation failed.
    pub fn failed(params: BaseParams) -> Self {
        RunSummary {
            params,
            eta_q: f64::NAN,
            eta_c: f64::NAN,
            eta_diff: f64::NAN,
            integrated_coherence: f64::NAN,
            coherence_tail_warning: false,
            max_coherence: f64::NAN,
            max_coherence_time: f64::NAN,
            intersection_time: None,
            converged: false,
            flux_discrepancy_q: f64::NAN,
            flux_discrepancy_c: f64::NAN,
        }
    }
}

/// Propagate the quantum and classical scenarios from the shared initial
/// state onto one common time grid (reduced representation).
///
/// Both runs are first taken to their own steady state; the one that
/// finishes earlier is then re-propagated to the longer horizon so that the
/// two grids coincide sample by sample, as required by
/// [`intersection_time`].
pub fn propagate_pair(
    params: &BaseParams,
    ctrl: &PropagationControls,
) -> Result<(Trajectory, Trajectory)> {
    params.validate()?;
    let run = |scenario: Scenario, c: &PropagationControls| -> Result<Trajectory> {
        let spec = params.spec(scenario);
        let gen = build_reduced_generator(&spec).map_err(|e| e.in_scenario(scenario.label()))?;
        let s0 = initial_state(&spec, Representation::ReducedSingleExcitation);
        propagate(&gen, &s0, c).map_err(|e| e.in_scenario(scenario.label()))
    };
    let mut traj_q = run(Scenario::Quantum, ctrl)?;
    let mut traj_c = run(Scenario::Classical, ctrl)?;
    if traj_q.termination_time != traj_c.termination_time {
        let t_end = traj_q.termination_time.max(traj_c.termination_time);
        let extended = ctrl
            .clone()
            .with_t_max(TMax::Fixed(t_end))
            .with_record_every(traj_q.record_every);
        if traj_q.termination_time < t_end {
            traj_q = run(Scenario::Quantum, &extended)?;
        } else {
            traj_c = run(Scenario::Classical, &extended)?;
        }
    }
    Ok((traj_q, traj_c))
}

/// Run both scenarios at one parameter point and assemble every quantifier.
pub fn run_point(params: &BaseParams, ctrl: &PropagationControls) -> Result<RunSummary> {
    run_point_trajectories(params, ctrl).map(|(summary, _, _)| summary)
}

/// As [`run_point`], also returning the two aligned trajectories.
pub fn run_point_trajectories(
    params: &BaseParams,
    ctrl: &PropagationControls,
) -> Result<(RunSummary, Trajectory, Trajectory)> {
    let (traj_q, traj_c) = propagate_pair(params, ctrl)?;
    let converged = traj_q.converged && traj_c.converged;

    let final_sink = |t: &Trajectory| *t.sink_population.last().expect("non-empty");
    let flux =
        |t: &Trajectory| t.spec.gamma_sink * trapezoid(&t.times, &t.last_site_population);
    let eta_q = final_sink(&traj_q);
    let eta_c = final_sink(&traj_c);
    let ic_value = trapezoid(&traj_q.times, &traj_q.coherence);
    let tail = *traj_q.coherence.last().expect("non-empty");
    let (c_max, t_c_max) = max_coherence(&traj_q);
    let tau = if converged {
        intersection_time(&traj_q, &traj_c)?
    } else {
        None
    };

    let summary = RunSummary {
        params: *params,
        eta_q,
        eta_c,
        eta_diff: eta_q - eta_c,
        integrated_coherence: ic_value,
        coherence_tail_warning: tail > 10.0 * traj_q.steady_eps,
        max_coherence: c_max,
        max_coherence_time: t_c_max,
        intersection_time: tau,
        converged,
        flux_discrepancy_q: (eta_q - flux(&traj_q)).abs(),
        flux_discrepancy_c: (eta_c - flux(&traj_c)).abs(),
    };
    Ok((summary, traj_q, traj_c))
}

/// λ_QC search result.
#[derive(Debug, Clone)]
pub struct LambdaQcResult {
    pub lambda_qc: f64,
    /// η_Q − η_C at the returned coupling.
    pub residual: f64,
    /// Every (λ, η_Q − η_C) pair evaluated, in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Differences |η_Q − η_C| at or below this level are indistinguishable from
/// the steady-state truncation error, so a bracket whose endpoints both sit
/// there carries no sign information.
const ETA_DIFF_FLOOR: f64 = 1e-6;

/// Find the coupling λ_QC with η_Q(λ) = η_C(λ) by Brent's method on the
/// bracket; each function evaluation is a full [`run_point`]. `tol` is the
/// final bracket width in λ (default 1e-3 at the CLI).
pub fn find_lambda_qc(
    params: &BaseParams,
    bracket: (f64, f64),
    tol: f64,
    ctrl: &PropagationControls,
) -> Result<LambdaQcResult> {
    params.validate()?;
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
        return Err(Error::InvalidParameter {
            name: "bracket",
            reason: format!("need 0 <= lo < hi, got ({lo}, {hi})"),
        });
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be positive (got {tol})"),
        });
    }

    let mut evaluations: Vec<(f64, f64)> = Vec::new();
    let eval = |lambda: f64, evals: &mut Vec<(f64, f64)>| -> Result<f64> {
        let (summary, traj_q, traj_c) = run_point_trajectories(&params.with_lambda(lambda), ctrl)?;
        if !summary.converged {
            return Err(Error::NotConverged {
                t: traj_q.termination_time.max(traj_c.termination_time),
                residual: traj_q.chain_residual.max(traj_c.chain_residual),
            });
        }
        evals.push((lambda, summary.eta_diff));
        Ok(summary.eta_diff)
    };

    let f_lo = eval(lo, &mut evaluations)?;
    let f_hi = eval(hi, &mut evaluations)?;
    if (f_lo.abs() <= ETA_DIFF_FLOOR && f_hi.abs() <= ETA_DIFF_FLOOR) || f_lo * f_hi > 0.0 {
        return Err(Error::BracketFailure {
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }

    let (root, f_root) = brent_root(
        |x| eval(x, &mut evaluations),
        lo,
        hi,
        f_lo,
        f_hi,
        tol,
    )?;
    Ok(LambdaQcResult {
        lambda_qc: root,
        residual: f_root,
        evaluations,
    })
}

/// Brent's bracketing root finder (inverse quadratic / secant / bisection),
/// after Numerical Recipes. Endpoint values are supplied by the caller;
/// converges when the bracket is narrower than `tol`.
pub(crate) fn brent_root(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    const MAX_ITER: usize = 100;
    let eps = f64::EPSILON.sqrt();
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..MAX_ITER {
        if (fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * eps * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok((b, fb));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b)?;
    }
    Ok((b, fb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChainSpec, Scenario};
    use crate::operators::CMatrix;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coherence_of_plus_state_is_ln2() {
        let m = CMatrix::from_fn(2, 2, |_, _| c(0.5, 0.0));
        let coh = relative_entropy_of_coherence(&DensityState::full(m)).unwrap();
        assert_abs_diff_eq!(coh, 2.0_f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn coherence_of_diagonal_state_is_zero() {
        let m = CMatrix::from_diagonal(&nalgebra::dvector![c(0.3, 0.0), c(0.2, 0.0), c(0.5, 0.0)]);
        let coh = relative_entropy_of_coherence(&DensityState::full(m)).unwrap();
        assert_eq!(coh, 0.0);
    }

    #[test]
    fn coherence_of_maximally_coherent_dim8_is_ln8() {
        let m = CMatrix::from_fn(8, 8, |_, _| c(1.0 / 8.0, 0.0));
        let coh = relative_entropy_of_coherence(&DensityState::full(m)).unwrap();
        assert_abs_diff_eq!(coh, 8.0_f64.ln(), epsilon = 1e-10);
    }

    #[test]
    fn coherence_is_nonnegative_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let g = CMatrix::from_fn(5, 5, |_, _| {
                c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let m = &g * g.adjoint();
            let tr: Complex64 = m.diagonal().iter().sum();
            let rho = DensityState::full(m / tr);
            let coh = relative_entropy_of_coherence(&rho).unwrap();
            assert!(coh > 1e-6, "random dense state should carry coherence");
        }
    }

    #[test]
    fn reduced_vacuum_entry_matches_full_embedding() {
        // coherent 2x2 block with vacuum weight, embedded by hand in the
        // 3-level direct sum
        let a = 0.35;
        let b = 0.25;
        let vac = 0.4;
        let coh = c(0.2, 0.1);
        let mut block = CMatrix::zeros(2, 2);
        block[(0, 0)] = c(a, 0.0);
        block[(1, 1)] = c(b, 0.0);
        block[(0, 1)] = coh;
        block[(1, 0)] = coh.conj();
        let reduced = DensityState::reduced(block.clone(), vac);

        let mut full = CMatrix::zeros(3, 3);
        full.view_mut((0, 0), (2, 2)).copy_from(&block);
        full[(2, 2)] = c(vac, 0.0);
        let full = DensityState::full(full);

        assert_abs_diff_eq!(
            relative_entropy_of_coherence(&reduced).unwrap(),
            relative_entropy_of_coherence(&full).unwrap(),
            epsilon = 1e-12
        );
    }

    fn synthetic_trajectory(times: Vec<f64>, sink: Vec<f64>) -> Trajectory {
        let n = times.len();
        let spec = ChainSpec::new(2, 0.0, 1.0, 0.25, 0.5, 1.0, Scenario::Quantum).unwrap();
        Trajectory {
            spec,
            times,
            sink_population: sink,
            last_site_population: vec![0.0; n],
            coherence: vec![0.0; n],
            trace_error: vec![0.0; n],
            hermiticity_error: vec![0.0; n],
            min_eigenvalue: vec![0.0; n],
            final_state: initial_state(&spec, Representation::ReducedSingleExcitation),
            converged: true,
            termination_time: 1.0,
            chain_residual: 0.0,
            record_every: 0.1,
            steady_eps: 1e-7,
        }
    }

    #[test]
    fn intersection_of_identical_trajectories_is_none() {
        let t: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let p: Vec<f64> = t.iter().map(|&x| x / 2.0).collect();
        let a = synthetic_trajectory(t.clone(), p.clone());
        let b = synthetic_trajectory(t, p);
        assert_eq!(intersection_time(&a, &b).unwrap(), None);
    }

    #[test]
    fn intersection_picks_last_persistent_crossing() {
        let t: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        // d = q - c crosses up at 2.5, down at 5.5, up again at 7.5
        let d = [0.0, -1.0, -1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0, 1.0];
        let q: Vec<f64> = d.iter().map(|&x| 0.5 + x / 4.0).collect();
        let c: Vec<f64> = vec![0.5; 11];
        let a = synthetic_trajectory(t.clone(), q);
        let b = synthetic_trajectory(t, c);
        let tau = intersection_time(&a, &b).unwrap().unwrap();
        assert_abs_diff_eq!(tau, 7.5, epsilon = 1e-5);
    }

    #[test]
    fn intersection_rejects_mismatched_grids() {
        let t1: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let t2: Vec<f64> = (0..=9).map(|i| i as f64).collect();
        let a = synthetic_trajectory(t1.clone(), vec![0.0; 11]);
        let b = synthetic_trajectory(t2, vec![0.0; 10]);
        assert!(matches!(
            intersection_time(&a, &b),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn max_coherence_resolves_ties_to_earliest() {
        let t: Vec<f64> = (0..4).map(|i| i as f64).collect();
        let mut traj = synthetic_trajectory(t, vec![0.0; 4]);
        traj.coherence = vec![0.1, 0.7, 0.7, 0.2];
        let (cm, tm) = max_coherence(&traj);
        assert_eq!(cm, 0.7);
        assert_eq!(tm, 1.0);
    }

    #[test]
    fn integrated_coherence_requires_convergence() {
        let t: Vec<f64> = (0..4).map(|i| i as f64).collect();
        let mut traj = synthetic_trajectory(t, vec![0.0; 4]);
        traj.converged = false;
        assert!(matches!(
            integrated_coherence(&traj),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn run_point_n1_scenarios_coincide() {
        let params = BaseParams::new(1, 0.0, 1.0, 0.0, 0.5, 1.0).unwrap();
        let s = run_point(&params, &PropagationControls::default()).unwrap();
        assert!(s.converged);
        assert_abs_diff_eq!(s.eta_q, 2.0 / 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s.eta_c, 2.0 / 3.0, epsilon = 1e-6);
        assert!(s.flux_discrepancy_q <= 1e-5);
        assert!(s.flux_discrepancy_c <= 1e-5);
    }

    #[test]
    fn classical_efficiency_ignores_dephasing() {
        let ctrl = PropagationControls::default();
        let mut etas = Vec::new();
        for gamma in [0.0, 0.5, 1.0, 2.0] {
            let params = BaseParams::new(3, 0.0, 1.0, gamma, 0.5, 1.0).unwrap();
            let s = run_point(&params, &ctrl).unwrap();
            etas.push(s.eta_c);
        }
        let spread = etas.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - etas.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread <= 1e-6, "eta_C varied by {spread} over gamma");
    }

    #[test]
    fn run_point_disconnected_chain_is_dead() {
        let params = BaseParams::new(2, 0.0, 0.0, 0.3, 0.5, 1.0).unwrap();
        let s = run_point(&params, &PropagationControls::default()).unwrap();
        assert!(s.converged);
        assert!(s.eta_q.abs() <= 1e-7);
        assert!(s.eta_c.abs() <= 1e-7);
        assert_eq!(s.intersection_time, None);
        assert!(s.integrated_coherence.abs() <= 1e-10);
    }

    #[test]
    fn find_lambda_qc_rejects_degenerate_n1() {
        let params = BaseParams::new(1, 0.0, 1.0, 0.25, 0.5, 1.0).unwrap();
        let err = find_lambda_qc(
            &params,
            (0.1, 2.0),
            1e-3,
            &PropagationControls::default(),
        );
        assert!(matches!(err, Err(Error::BracketFailure { .. })));
    }

    #[test]
    fn brent_finds_simple_roots() {
        let mut f = |x: f64| Ok(x * x - 2.0);
        let (root, _) = brent_root(&mut f, 0.0, 2.0, -2.0, 2.0, 1e-10).unwrap();
        assert_abs_diff_eq!(root, 2.0_f64.sqrt(), epsilon = 1e-9);

        let g = |x: f64| Ok(x.sin() - 0.5 * x);
        let (root, _) = brent_root(g, 1.0, 2.0, 1.0_f64.sin() - 0.5, 2.0_f64.sin() - 1.0, 1e-10)
            .unwrap();
        assert_abs_diff_eq!(root, 1.8954942670339809, epsilon = 1e-8);
    }

    #[test]
    fn csv_row_matches_header_shape() {
        let params = BaseParams::new(3, 0.0, 0.84, 0.25, 0.5, 1.0).unwrap();
        let mut s = RunSummary::failed(params);
        s.intersection_time = None;
        let row = s.csv_row();
        assert_eq!(
            row.split(',').count(),
            RunSummary::CSV_HEADER.split(',').count()
        );
        assert!(row.ends_with("false"));
    }
}
