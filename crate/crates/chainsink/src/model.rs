//! Right-hand sides of the quantum and classical master equations.
//!
//! Both scenarios share the free Hamiltonian H_F = (ω/2) Σ_j σ_j^z, per-site
//! jump dissipation at rate Γ, per-site dephasing γ(σ^zρσ^z − ρ) and an
//! incoherent transfer from site N into the sink at rate Γ_s. The quantum
//! scenario adds the hopping Hamiltonian
//! H_I = λ Σ (σ_j⁺σ_{j+1}⁻ + σ_j⁻σ_{j+1}⁺); the classical scenario replaces
//! it with bidirectional incoherent hopping dissipators of the same strength.
//!
//! Jump channels enter as r(JρJ† − ½{J†J, ρ}), so r is directly the
//! population transfer rate: site populations decay at Γ, feed the sink at
//! Γ_s, and hop classically at λ per direction. The dephasing term decays a
//! single-site coherence at 2γ (4γ between two distinct excited-site states).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    embed_site_op, sigma_minus, sigma_plus, sigma_z, CMatrix, DensityState, Representation,
    SiteIndex,
};

/// Which transport mechanism couples neighbouring sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Coherent hopping through H_I.
    Quantum,
    /// Incoherent bidirectional hopping at rate λ; never generates coherence.
    Classical,
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Scenario::Quantum => "quantum",
            Scenario::Classical => "classical",
        }
    }
}

/// Scenario-agnostic physical parameters of a run.
///
/// All rates share one inverse-time unit of the caller's choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseParams {
    /// Number of chain sites, sink excluded.
    pub n: usize,
    /// Site energy ω. Observables are independent of it; default 0.
    #[serde(default)]
    pub omega: f64,
    /// Inter-site coupling strength λ.
    pub lambda: f64,
    /// Local dephasing rate γ.
    pub gamma: f64,
    /// Local dissipation rate Γ.
    pub big_gamma: f64,
    /// Sink transfer rate Γ_s.
    pub gamma_sink: f64,
}

impl BaseParams {
    pub fn new(
        n: usize,
        omega: f64,
        lambda: f64,
        gamma: f64,
        big_gamma: f64,
        gamma_sink: f64,
    ) -> Result<Self> {
        let p = BaseParams {
            n,
            omega,
            lambda,
            gamma,
            big_gamma,
            gamma_sink,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.check_rates()?;
        if self.gamma_sink <= 0.0 {
            return Err(invalid(
                "gamma_sink",
                "must be strictly positive",
                self.gamma_sink,
            ));
        }
        Ok(())
    }

    /// Finite and non-negative rates only. Generator construction accepts
    /// Γ_s = 0 (the sink term simply vanishes, e.g. in the unitary limit);
    /// transport runs require the strict [`BaseParams::validate`].
    pub(crate) fn check_rates(&self) -> Result<()> {
        if self.n < 1 {
            return Err(invalid("n", "must be at least 1", self.n as f64));
        }
        check_rate("omega", self.omega)?;
        check_rate("lambda", self.lambda)?;
        check_rate("gamma", self.gamma)?;
        check_rate("big_gamma", self.big_gamma)?;
        check_rate("gamma_sink", self.gamma_sink)?;
        Ok(())
    }

    pub fn spec(&self, scenario: Scenario) -> ChainSpec {
        ChainSpec {
            n: self.n,
            omega: self.omega,
            lambda: self.lambda,
            gamma: self.gamma,
            big_gamma: self.big_gamma,
            gamma_sink: self.gamma_sink,
            scenario,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }
}

fn invalid(name: &'static str, what: &str, got: f64) -> Error {
    Error::InvalidParameter {
        name,
        reason: format!("{what} (got {got})"),
    }
}

fn check_rate(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(invalid(name, "must be finite", v));
    }
    if v < 0.0 {
        return Err(invalid(name, "must be non-negative", v));
    }
    Ok(())
}

/// Full parameter set of a run: chain parameters plus the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: usize,
    pub omega: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub big_gamma: f64,
    pub gamma_sink: f64,
    pub scenario: Scenario,
}

impl ChainSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        omega: f64,
        lambda: f64,
        gamma: f64,
        big_gamma: f64,
        gamma_sink: f64,
        scenario: Scenario,
    ) -> Result<Self> {
        Ok(BaseParams::new(n, omega, lambda, gamma, big_gamma, gamma_sink)?.spec(scenario))
    }

    pub fn params(&self) -> BaseParams {
        BaseParams {
            n: self.n,
            omega: self.omega,
            lambda: self.lambda,
            gamma: self.gamma,
            big_gamma: self.big_gamma,
            gamma_sink: self.gamma_sink,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()
    }

    pub fn with_scenario(mut self, scenario: Scenario) -> Self {
        self.scenario = scenario;
        self
    }

    /// Number of two-level systems including the sink.
    pub fn n_systems(&self) -> usize {
        self.n + 1
    }

    /// Dimension of the full composite Hilbert space, 2^(N+1).
    pub fn full_dim(&self) -> usize {
        1 << self.n_systems()
    }

    /// Dimension of the one-excitation block, N+1.
    pub fn block_dim(&self) -> usize {
        self.n + 1
    }

    /// Fastest decay rate in play: a site population drains at up to
    /// λ + Γ + Γ_s when every channel acts on it, and coherences dephase at
    /// up to 4γ. Sets the observable sampling resolution.
    pub fn fastest_rate(&self) -> f64 {
        let r = (self.lambda + self.big_gamma + self.gamma_sink).max(4.0 * self.gamma);
        if r > 0.0 {
            r
        } else {
            1.0
        }
    }

    /// Slowest strictly positive rate among λ, Γ, Γ_s; bounds the horizon of
    /// automatic steady-state detection.
    pub fn slowest_transport_rate(&self) -> f64 {
        [self.lambda, self.big_gamma, self.gamma_sink]
            .into_iter()
            .filter(|r| *r > 0.0)
            .fold(f64::INFINITY, f64::min)
            .min(1e300)
            .max(f64::MIN_POSITIVE)
    }
}

/// Chain-plus-sink Hamiltonian H = H_F + H_I on the full composite space;
/// the sink carries no Hamiltonian term.
pub fn build_hamiltonian(spec: &ChainSpec) -> Result<CMatrix> {
    spec.params().check_rates()?;
    let ns = spec.n_systems();
    let dim = spec.full_dim();
    let mut h = CMatrix::zeros(dim, dim);
    let z = sigma_z();
    for j in 1..=spec.n {
        h += embed_site_op(&z, SiteIndex::new(j, ns)?, ns)? * Complex64::new(spec.omega / 2.0, 0.0);
    }
    let (sp, sm) = (sigma_plus(), sigma_minus());
    for j in 1..spec.n {
        let a = embed_site_op(&sp, SiteIndex::new(j, ns)?, ns)?
            * embed_site_op(&sm, SiteIndex::new(j + 1, ns)?, ns)?;
        let hop = (&a + a.adjoint()) * Complex64::new(spec.lambda, 0.0);
        h += hop;
    }
    Ok(h)
}

/// The dissipator rate·(2JρJ† − J†Jρ − ρJ†J).
///
/// Note the explicit factor 2: a jump of rate r relaxes populations at 2r.
pub fn dissipator(jump: &CMatrix, rate: f64, rho: &CMatrix) -> Result<CMatrix> {
    if jump.nrows() != rho.nrows() || jump.ncols() != rho.ncols() || rho.nrows() != rho.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "jump is {}x{}, state is {}x{}",
            jump.nrows(),
            jump.ncols(),
            rho.nrows(),
            rho.ncols()
        )));
    }
    let jdag = jump.adjoint();
    let jdj = &jdag * jump;
    let out = (jump * rho * &jdag) * Complex64::new(2.0, 0.0) - &jdj * rho - rho * &jdj;
    Ok(out * Complex64::new(rate, 0.0))
}

struct Jump {
    op: CMatrix,
    op_dag: CMatrix,
    dag_op: CMatrix,
    rate: f64,
}

impl Jump {
    fn new(op: CMatrix, rate: f64) -> Self {
        let op_dag = op.adjoint();
        let dag_op = &op_dag * &op;
        Jump {
            op,
            op_dag,
            dag_op,
            rate,
        }
    }
}

struct FullForm {
    hamiltonian: CMatrix,
    jumps: Vec<Jump>,
    dephasers: Vec<CMatrix>,
    dephasing_rate: f64,
}

struct ReducedForm {
    h_block: CMatrix,
    decay: DMatrix<f64>,
    hop_rate: f64,
    sink_rate: f64,
    loss_rate: f64,
}

enum Form {
    Full(FullForm),
    Reduced(ReducedForm),
}

/// A materialized master-equation right-hand side.
///
/// Immutable once built; applying it to distinct states from several threads
/// is safe.
pub struct Generator {
    spec: ChainSpec,
    representation: Representation,
    form: Form,
}

/// Full-space generator for the quantum scenario:
/// ∂ρ/∂t = −i[H,ρ] + L_sink(ρ) + Σ_j L_j(ρ).
pub fn build_quantum_generator(spec: &ChainSpec) -> Result<Generator> {
    if spec.scenario != Scenario::Quantum {
        return Err(Error::InvalidParameter {
            name: "scenario",
            reason: "quantum generator requires scenario = quantum".into(),
        });
    }
    build_full(spec)
}

/// Full-space generator for the classical scenario: the H_I commutator is
/// replaced by bidirectional nearest-neighbour hopping dissipators of
/// strength λ.
pub fn build_classical_generator(spec: &ChainSpec) -> Result<Generator> {
    if spec.scenario != Scenario::Classical {
        return Err(Error::InvalidParameter {
            name: "scenario",
            reason: "classical generator requires scenario = classical".into(),
        });
    }
    build_full(spec)
}

fn build_full(spec: &ChainSpec) -> Result<Generator> {
    spec.params().check_rates()?;
    let ns = spec.n_systems();
    let (sp, sm, z) = (sigma_plus(), sigma_minus(), sigma_z());

    let hamiltonian = match spec.scenario {
        Scenario::Quantum => build_hamiltonian(spec)?,
        Scenario::Classical => {
            let free = ChainSpec {
                lambda: 0.0,
                ..*spec
            };
            build_hamiltonian(&free)?
        }
    };

    let mut jumps = Vec::new();
    if spec.big_gamma > 0.0 {
        for j in 1..=spec.n {
            let op = embed_site_op(&sp, SiteIndex::new(j, ns)?, ns)?;
            jumps.push(Jump::new(op, spec.big_gamma));
        }
    }
    // Excitation transfer from site N into the sink (σ_N⁺ σ_s⁻).
    let sink_op = embed_site_op(&sp, SiteIndex::new(spec.n, ns)?, ns)?
        * embed_site_op(&sm, SiteIndex::new(ns, ns)?, ns)?;
    jumps.push(Jump::new(sink_op, spec.gamma_sink));

    if spec.scenario == Scenario::Classical && spec.lambda > 0.0 {
        for j in 1..spec.n {
            let fwd = embed_site_op(&sp, SiteIndex::new(j, ns)?, ns)?
                * embed_site_op(&sm, SiteIndex::new(j + 1, ns)?, ns)?;
            let bwd = embed_site_op(&sm, SiteIndex::new(j, ns)?, ns)?
                * embed_site_op(&sp, SiteIndex::new(j + 1, ns)?, ns)?;
            jumps.push(Jump::new(fwd, spec.lambda));
            jumps.push(Jump::new(bwd, spec.lambda));
        }
    }

    let mut dephasers = Vec::new();
    if spec.gamma > 0.0 {
        for j in 1..=spec.n {
            dephasers.push(embed_site_op(&z, SiteIndex::new(j, ns)?, ns)?);
        }
    }

    Ok(Generator {
        spec: *spec,
        representation: Representation::FullSpace,
        form: Form::Full(FullForm {
            hamiltonian,
            jumps,
            dephasers,
            dephasing_rate: spec.gamma,
        }),
    })
}

/// Generator on the one-excitation block plus vacuum scalar for either
/// scenario. Its action agrees with the full-space generator restricted to
/// states carrying at most one excitation.
pub fn build_reduced_generator(spec: &ChainSpec) -> Result<Generator> {
    spec.params().check_rates()?;
    let n = spec.n;
    let b = spec.block_dim();
    let sink = b - 1; // block index of the sink state
    let last = n - 1; // block index of the excitation on site N

    let mut h_block = CMatrix::zeros(b, b);
    for j in 0..n {
        h_block[(j, j)] = Complex64::new(spec.omega / 2.0 * (2.0 - n as f64), 0.0);
    }
    h_block[(sink, sink)] = Complex64::new(-spec.omega / 2.0 * n as f64, 0.0);
    if spec.scenario == Scenario::Quantum {
        for j in 0..n.saturating_sub(1) {
            h_block[(j, j + 1)] = Complex64::new(spec.lambda, 0.0);
            h_block[(j + 1, j)] = Complex64::new(spec.lambda, 0.0);
        }
    }

    let mut decay = DMatrix::<f64>::zeros(b, b);
    for j in 0..b {
        for k in 0..b {
            let chain_j = j < n;
            let chain_k = k < n;
            // site loss: −(Γ/2){σ⁻σ⁺, ·} per index carrying the excitation
            // on a chain site; a chain population decays at exactly Γ
            decay[(j, k)] += 0.5 * spec.big_gamma * (chain_j as u8 + chain_k as u8) as f64;
            // dephasing: −4γ between two distinct chain-site excitations,
            // −2γ between a chain-site excitation and the sink excitation
            if j != k {
                decay[(j, k)] += match (chain_j, chain_k) {
                    (true, true) => 4.0 * spec.gamma,
                    (true, false) | (false, true) => 2.0 * spec.gamma,
                    (false, false) => 0.0,
                };
            }
            // sink transfer anticommutator touches row/column of site N
            decay[(j, k)] +=
                0.5 * spec.gamma_sink * ((j == last) as u8 + (k == last) as u8) as f64;
            if spec.scenario == Scenario::Classical {
                for m in 0..n.saturating_sub(1) {
                    let touches = |i: usize| (i == m) as u8 + (i == m + 1) as u8;
                    decay[(j, k)] += 0.5 * spec.lambda * (touches(j) + touches(k)) as f64;
                }
            }
        }
    }

    let hop_rate = match spec.scenario {
        Scenario::Classical => spec.lambda,
        Scenario::Quantum => 0.0,
    };

    Ok(Generator {
        spec: *spec,
        representation: Representation::ReducedSingleExcitation,
        form: Form::Reduced(ReducedForm {
            h_block,
            decay,
            hop_rate,
            sink_rate: spec.gamma_sink,
            loss_rate: spec.big_gamma,
        }),
    })
}

impl Generator {
    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    /// Length of the flattened state vector this generator acts on.
    pub fn flat_len(&self) -> usize {
        match self.representation {
            Representation::FullSpace => {
                let d = self.spec.full_dim();
                d * d
            }
            Representation::ReducedSingleExcitation => {
                let b = self.spec.block_dim();
                b * b + 1
            }
        }
    }

    /// Flatten a state into the integrator layout (column-major matrix, with
    /// the vacuum population appended in the reduced representation).
    pub fn state_to_flat(&self, state: &DensityState) -> Result<DVector<Complex64>> {
        if state.representation != self.representation {
            return Err(Error::DimensionMismatch(
                "state representation does not match generator".into(),
            ));
        }
        let expected = match self.representation {
            Representation::FullSpace => self.spec.full_dim(),
            Representation::ReducedSingleExcitation => self.spec.block_dim(),
        };
        if state.dim() != expected {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} does not match generator dimension {expected}",
                state.dim()
            )));
        }
        let mut y = DVector::zeros(self.flat_len());
        let m = state.dim();
        y.as_mut_slice()[..m * m].copy_from_slice(state.matrix.as_slice());
        if self.representation == Representation::ReducedSingleExcitation {
            y[m * m] = Complex64::new(state.vacuum_population, 0.0);
        }
        Ok(y)
    }

    /// Inverse of [`Generator::state_to_flat`].
    pub fn flat_to_state(&self, y: &[Complex64]) -> DensityState {
        match self.representation {
            Representation::FullSpace => {
                let d = self.spec.full_dim();
                DensityState::full(CMatrix::from_column_slice(d, d, &y[..d * d]))
            }
            Representation::ReducedSingleExcitation => {
                let b = self.spec.block_dim();
                DensityState::reduced(
                    CMatrix::from_column_slice(b, b, &y[..b * b]),
                    y[b * b].re,
                )
            }
        }
    }

    /// Time derivative of a state under this generator.
    pub fn apply(&self, state: &DensityState) -> Result<DensityState> {
        let y = self.state_to_flat(state)?;
        let mut dy = DVector::zeros(y.len());
        self.apply_flat(y.as_slice(), dy.as_mut_slice());
        Ok(self.flat_to_state(dy.as_slice()))
    }

    /// Derivative on the flattened layout; `dy` is overwritten.
    pub fn apply_flat(&self, y: &[Complex64], dy: &mut [Complex64]) {
        match &self.form {
            Form::Full(f) => {
                let d = self.spec.full_dim();
                let rho = CMatrix::from_column_slice(d, d, &y[..d * d]);
                let mut out = (&f.hamiltonian * &rho - &rho * &f.hamiltonian)
                    * Complex64::new(0.0, -1.0);
                for jump in &f.jumps {
                    let gain = &jump.op * &rho * &jump.op_dag;
                    let loss = (&jump.dag_op * &rho + &rho * &jump.dag_op)
                        * Complex64::new(0.5, 0.0);
                    out += (gain - loss) * Complex64::new(jump.rate, 0.0);
                }
                for z in &f.dephasers {
                    out += (z * &rho * z - &rho) * Complex64::new(f.dephasing_rate, 0.0);
                }
                dy[..d * d].copy_from_slice(out.as_slice());
            }
            Form::Reduced(r) => {
                let n = self.spec.n;
                let b = self.spec.block_dim();
                let rho = CMatrix::from_column_slice(b, b, &y[..b * b]);
                let mut out =
                    (&r.h_block * &rho - &rho * &r.h_block) * Complex64::new(0.0, -1.0);
                for j in 0..b {
                    for k in 0..b {
                        out[(j, k)] -= Complex64::new(r.decay[(j, k)], 0.0) * rho[(j, k)];
                    }
                }
                if r.hop_rate > 0.0 {
                    for m in 0..n - 1 {
                        let fwd = Complex64::new(r.hop_rate, 0.0) * rho[(m, m)];
                        let bwd = Complex64::new(r.hop_rate, 0.0) * rho[(m + 1, m + 1)];
                        out[(m + 1, m + 1)] += fwd;
                        out[(m, m)] += bwd;
                    }
                }
                out[(b - 1, b - 1)] += Complex64::new(r.sink_rate, 0.0) * rho[(n - 1, n - 1)];
                let mut chain = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    chain += rho[(j, j)];
                }
                dy[..b * b].copy_from_slice(out.as_slice());
                dy[b * b] = Complex64::new(r.loss_rate, 0.0) * chain;
            }
        }
    }

    /// Population of the sink excited state, read off the flattened layout.
    pub(crate) fn sink_population_flat(&self, y: &[Complex64]) -> f64 {
        match self.representation {
            Representation::FullSpace => {
                let d = self.spec.full_dim();
                // sink is the fastest (least significant) index bit
                (0..d).filter(|i| i & 1 == 1).map(|i| y[i * d + i].re).sum()
            }
            Representation::ReducedSingleExcitation => {
                let b = self.spec.block_dim();
                y[(b - 1) * b + (b - 1)].re
            }
        }
    }

    /// Excited-state population of chain site N.
    pub(crate) fn last_site_population_flat(&self, y: &[Complex64]) -> f64 {
        match self.representation {
            Representation::FullSpace => {
                let d = self.spec.full_dim();
                (0..d).filter(|i| i & 2 == 2).map(|i| y[i * d + i].re).sum()
            }
            Representation::ReducedSingleExcitation => {
                let b = self.spec.block_dim();
                let last = self.spec.n - 1;
                y[last * b + last].re
            }
        }
    }

    /// Total excitation remaining on the chain (sink and vacuum excluded).
    pub(crate) fn chain_excitation_flat(&self, y: &[Complex64]) -> f64 {
        match self.representation {
            Representation::FullSpace => {
                let d = self.spec.full_dim();
                (0..d)
                    .map(|i| (i >> 1).count_ones() as f64 * y[i * d + i].re)
                    .sum()
            }
            Representation::ReducedSingleExcitation => {
                let b = self.spec.block_dim();
                (0..self.spec.n).map(|j| y[j * b + j].re).sum()
            }
        }
    }

    /// Total trace (matrix trace plus vacuum in the reduced layout).
    pub(crate) fn total_trace_flat(&self, y: &[Complex64]) -> f64 {
        match self.representation {
            Representation::FullSpace => {
                let d = self.spec.full_dim();
                (0..d).map(|i| y[i * d + i].re).sum()
            }
            Representation::ReducedSingleExcitation => {
                let b = self.spec.block_dim();
                (0..b).map(|i| y[i * b + i].re).sum::<f64>() + y[b * b].re
            }
        }
    }
}

/// Generator for `spec` in the requested representation.
pub fn build_generator(spec: &ChainSpec, representation: Representation) -> Result<Generator> {
    match representation {
        Representation::ReducedSingleExcitation => build_reduced_generator(spec),
        Representation::FullSpace => match spec.scenario {
            Scenario::Quantum => build_quantum_generator(spec),
            Scenario::Classical => build_classical_generator(spec),
        },
    }
}
