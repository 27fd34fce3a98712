//! Time propagation of a density state under a [`Generator`].
//!
//! Integration uses an adaptive embedded Dormand–Prince 5(4) scheme with the
//! classic quartic dense-output interpolant, so observables are sampled on a
//! fixed grid independently of the step sequence. With `TMax::Auto` the run
//! stops once the excitation remaining on the chain drops below
//! `steady_eps`, after which the sink population can change by at most that
//! residual.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analysis::coherence_with_gate;
use crate::error::{Error, Result};
use crate::model::{ChainSpec, Generator};
use crate::operators::{hermiticity_error, DensityState, Representation};

/// Positivity threshold beyond which the integrator is considered broken.
const INTEGRATION_POSITIVITY_GATE: f64 = 1e-6;

const MAX_STEP_ATTEMPTS: usize = 20_000_000;

/// Integration horizon: a fixed final time, or run until the chain is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TMax {
    /// Integrate until the chain excitation falls below `steady_eps` (with a
    /// generous hard cap derived from the slowest rate in the spec).
    Auto,
    Fixed(f64),
}

impl Serialize for TMax {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TMax::Auto => s.serialize_str("auto"),
            TMax::Fixed(t) => s.serialize_f64(*t),
        }
    }
}

impl<'de> Deserialize<'de> for TMax {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(t) => Ok(TMax::Fixed(t)),
            Repr::Word(w) if w == "auto" => Ok(TMax::Auto),
            Repr::Word(w) => Err(D::Error::custom(format!(
                "t_max must be a number or \"auto\", got \"{w}\""
            ))),
        }
    }
}

/// Integrator and recording settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationControls {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Suggested first step; derived from the recording interval when absent.
    pub dt_initial: Option<f64>,
    pub t_max: TMax,
    /// Residual chain excitation below which the run counts as converged.
    pub steady_eps: f64,
    /// Observable sampling interval; defaults to 0.01 over the fastest rate.
    pub record_every: Option<f64>,
}

impl Default for PropagationControls {
    fn default() -> Self {
        PropagationControls {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            dt_initial: None,
            t_max: TMax::Auto,
            steady_eps: 1e-7,
            record_every: None,
        }
    }
}

impl PropagationControls {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| -> Result<()> {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite (got {v})"),
                });
            }
            Ok(())
        };
        pos("rel_tol", self.rel_tol)?;
        pos("abs_tol", self.abs_tol)?;
        pos("steady_eps", self.steady_eps)?;
        if let Some(dt) = self.dt_initial {
            pos("dt_initial", dt)?;
        }
        if let Some(re) = self.record_every {
            pos("record_every", re)?;
        }
        if let TMax::Fixed(t) = self.t_max {
            pos("t_max", t)?;
            if let Some(re) = self.record_every {
                if re > t {
                    return Err(Error::InvalidParameter {
                        name: "record_every",
                        reason: format!("{re} exceeds the fixed t_max {t}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// The sampling interval actually used for `spec`.
    pub fn resolved_record_every(&self, spec: &ChainSpec) -> f64 {
        self.record_every
            .unwrap_or_else(|| 0.01 / spec.fastest_rate())
    }

    fn horizon(&self, spec: &ChainSpec) -> (f64, bool) {
        match self.t_max {
            TMax::Fixed(t) => (t, false),
            TMax::Auto => (1e4 / spec.slowest_transport_rate(), true),
        }
    }

    pub fn with_t_max(mut self, t_max: TMax) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_record_every(mut self, record_every: f64) -> Self {
        self.record_every = Some(record_every);
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }
}

/// Observables of one propagation, sampled every `record_every` plus a final
/// sample at the termination time.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: ChainSpec,
    pub times: Vec<f64>,
    pub sink_population: Vec<f64>,
    /// Excited-state population of chain site N (feeds the flux identity).
    pub last_site_population: Vec<f64>,
    pub coherence: Vec<f64>,
    /// |total trace − 1| per sample.
    pub trace_error: Vec<f64>,
    /// max |ρ − ρ†| per sample.
    pub hermiticity_error: Vec<f64>,
    /// Smallest eigenvalue of the state per sample.
    pub min_eigenvalue: Vec<f64>,
    pub final_state: DensityState,
    pub converged: bool,
    pub termination_time: f64,
    /// Chain excitation left at termination.
    pub chain_residual: f64,
    pub record_every: f64,
    pub steady_eps: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Population of the sink excited state.
pub fn sink_population(state: &DensityState) -> f64 {
    match state.representation {
        Representation::FullSpace => {
            let d = state.dim();
            // the sink is the fastest index bit
            (0..d)
                .filter(|i| i & 1 == 1)
                .map(|i| state.matrix[(i, i)].re)
                .sum()
        }
        Representation::ReducedSingleExcitation => {
            let b = state.dim();
            state.matrix[(b - 1, b - 1)].re
        }
    }
}

// Dormand-Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
// Fifth-order weights; stage 7 is evaluated at the new point (FSAL).
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Difference between the 5th- and 4th-order weights.
const ERR: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];
// Quartic dense-output weights.
const DENSE: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

struct Recorder<'a> {
    gen: &'a Generator,
    times: Vec<f64>,
    sink: Vec<f64>,
    last_site: Vec<f64>,
    coherence: Vec<f64>,
    trace_error: Vec<f64>,
    herm_error: Vec<f64>,
    min_eig: Vec<f64>,
}

impl<'a> Recorder<'a> {
    fn new(gen: &'a Generator) -> Self {
        Recorder {
            gen,
            times: Vec::new(),
            sink: Vec::new(),
            last_site: Vec::new(),
            coherence: Vec::new(),
            trace_error: Vec::new(),
            herm_error: Vec::new(),
            min_eig: Vec::new(),
        }
    }

    fn push(&mut self, t: f64, y: &[Complex64]) -> Result<()> {
        let state = self.gen.flat_to_state(y);
        let (coh, min_eig) =
            coherence_with_gate(&state, INTEGRATION_POSITIVITY_GATE).map_err(|e| {
                Error::IntegratorFailure {
                    t,
                    reason: e.to_string(),
                }
            })?;
        self.times.push(t);
        self.sink.push(self.gen.sink_population_flat(y));
        self.last_site.push(self.gen.last_site_population_flat(y));
        self.coherence.push(coh);
        self.trace_error
            .push((self.gen.total_trace_flat(y) - 1.0).abs());
        self.herm_error.push(hermiticity_error(&state.matrix));
        self.min_eig.push(min_eig);
        Ok(())
    }
}

/// Integrate dρ/dt = gen(ρ) from `state0`, recording observables every
/// `record_every` time units.
pub fn propagate(
    gen: &Generator,
    state0: &DensityState,
    ctrl: &PropagationControls,
) -> Result<Trajectory> {
    ctrl.validate()?;
    let spec = *gen.spec();
    let mut y = gen.state_to_flat(state0)?;
    let record_every = ctrl.resolved_record_every(&spec);
    let (t_end, auto) = ctrl.horizon(&spec);
    let steady = ctrl.steady_eps;
    let len = gen.flat_len();

    let mut k: Vec<DVector<Complex64>> = (0..7).map(|_| DVector::zeros(len)).collect();
    let mut y_stage = DVector::<Complex64>::zeros(len);
    let mut y_new = DVector::<Complex64>::zeros(len);
    let mut err_vec = DVector::<Complex64>::zeros(len);

    let mut rec = Recorder::new(gen);
    let mut t = 0.0_f64;
    rec.push(t, y.as_slice())?;
    gen.apply_flat(y.as_slice(), k[0].as_mut_slice());

    let mut h = ctrl.dt_initial.unwrap_or(record_every).min(t_end);
    let mut next_sample: usize = 1;
    let mut attempts: usize = 0;
    let mut prev_rejected = false;
    let mut converged = false;

    loop {
        if auto && gen.chain_excitation_flat(y.as_slice()) <= steady {
            converged = true;
            break;
        }
        if t >= t_end {
            break;
        }
        attempts += 1;
        if attempts > MAX_STEP_ATTEMPTS {
            return Err(Error::IntegratorFailure {
                t,
                reason: "step limit exceeded".into(),
            });
        }
        let lands_on_end = h >= t_end - t;
        let h_step = if lands_on_end { t_end - t } else { h };
        if h_step <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::IntegratorFailure {
                t,
                reason: "step size underflow".into(),
            });
        }

        // stages 2..=7; the stage-7 node is the candidate new state
        let one = Complex64::new(1.0, 0.0);
        let tableau: [&[f64]; 6] = [&A2, &A3, &A4, &A5, &A6, &A7];
        for (s, row) in tableau.iter().enumerate() {
            y_stage.copy_from(&y);
            for (j, &a) in row.iter().enumerate() {
                if a != 0.0 {
                    y_stage.axpy(Complex64::new(h_step * a, 0.0), &k[j], one);
                }
            }
            if s == 5 {
                y_new.copy_from(&y_stage);
            }
            let (lo, hi) = k.split_at_mut(s + 1);
            let _ = lo;
            gen.apply_flat(y_stage.as_slice(), hi[0].as_mut_slice());
        }

        err_vec.fill(Complex64::new(0.0, 0.0));
        for (j, &e) in ERR.iter().enumerate() {
            if e != 0.0 {
                err_vec.axpy(Complex64::new(h_step * e, 0.0), &k[j], one);
            }
        }
        let mut acc = 0.0_f64;
        for i in 0..len {
            let sc = ctrl.abs_tol + ctrl.rel_tol * y[i].norm().max(y_new[i].norm());
            let r = err_vec[i].norm() / sc;
            acc += r * r;
        }
        let err = (acc / len as f64).sqrt();

        if err.is_finite() && err <= 1.0 {
            let t_new = if lands_on_end { t_end } else { t + h_step };

            // dense-output samples inside (t, t_new]
            let mut rcont: Option<[DVector<Complex64>; 5]> = None;
            while (next_sample as f64) * record_every <= t_new {
                let ts = next_sample as f64 * record_every;
                let rc = rcont.get_or_insert_with(|| {
                    let ydiff = &y_new - &y;
                    let bspl = &k[0] * Complex64::new(h_step, 0.0) - &ydiff;
                    let r4 = &ydiff - &k[6] * Complex64::new(h_step, 0.0) - &bspl;
                    let mut r5 = DVector::zeros(len);
                    for (j, &d) in DENSE.iter().enumerate() {
                        if d != 0.0 {
                            r5.axpy(Complex64::new(h_step * d, 0.0), &k[j], one);
                        }
                    }
                    [y.clone(), ydiff, bspl, r4, r5]
                });
                let th = ((ts - t) / h_step).clamp(0.0, 1.0);
                let theta = Complex64::new(th, 0.0);
                let omth = Complex64::new(1.0 - th, 0.0);
                let inner = &rc[3] + &rc[4] * omth;
                let mid = &rc[2] + inner * theta;
                let outer = &rc[1] + mid * omth;
                let ys = &rc[0] + outer * theta;
                rec.push(ts, ys.as_slice())?;
                next_sample += 1;
            }

            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            t = t_new;

            let fac_max = if prev_rejected { 1.0 } else { FAC_MAX };
            let fac = if err == 0.0 {
                fac_max
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, fac_max)
            };
            h = h_step * fac;
            prev_rejected = false;
        } else {
            let fac = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0)
            } else {
                FAC_MIN
            };
            h = h_step * fac;
            prev_rejected = true;
        }
    }

    if *rec.times.last().expect("at least the initial sample") < t {
        rec.push(t, y.as_slice())?;
    }
    let residual = gen.chain_excitation_flat(y.as_slice());
    if !auto {
        converged = residual <= steady;
    }

    Ok(Trajectory {
        spec,
        times: rec.times,
        sink_population: rec.sink,
        last_site_population: rec.last_site,
        coherence: rec.coherence,
        trace_error: rec.trace_error,
        hermiticity_error: rec.herm_error,
        min_eigenvalue: rec.min_eig,
        final_state: gen.flat_to_state(y.as_slice()),
        converged,
        termination_time: t,
        chain_residual: residual,
        record_every,
        steady_eps: steady,
    })
}

/// Composite trapezoid rule over a recorded grid.
pub(crate) fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..times.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
    }
    acc
}

/// Transport efficiency of a converged trajectory with its flux-identity
/// cross-check η = Γ_s ∫ ρ_NN dt (the sink fills at exactly Γ_s ρ_NN).
#[derive(Debug, Clone, Copy)]
pub struct Efficiency {
    /// Final sink population.
    pub eta: f64,
    /// Independent estimate from the integrated site-N population.
    pub flux_eta: f64,
    pub discrepancy: f64,
}

pub fn efficiency(traj: &Trajectory) -> Result<Efficiency> {
    if !traj.converged {
        return Err(Error::NotConverged {
            t: traj.termination_time,
            residual: traj.chain_residual,
        });
    }
    let eta = *traj.sink_population.last().expect("non-empty trajectory");
    let flux_eta = traj.spec.gamma_sink * trapezoid(&traj.times, &traj.last_site_population);
    Ok(Efficiency {
        eta,
        flux_eta,
        discrepancy: (eta - flux_eta).abs(),
    })
}
