//! Operator algebra on the composite Hilbert space of the chain plus sink.
//!
//! Each of the `N` chain sites and the sink is a two-level system with basis
//! ordered (|g⟩, |e⟩). Composite basis ordering is fixed as
//! site 1 ⊗ site 2 ⊗ … ⊗ site N ⊗ sink, i.e. site 1 is the slowest index and
//! the sink the fastest.
//!
//! Ladder operator convention used throughout the model: σ⁻ = |e⟩⟨g| and
//! σ⁺ = |g⟩⟨e|. This is the transpose of the more common convention (where
//! σ⁻ lowers); here σ⁻ *raises* the qubit and σ⁺ *lowers* it, so the
//! dissipation jump operator is σ⁺ and σ⁻σ⁺ = |e⟩⟨e| is the number operator.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ChainSpec;

/// Dense complex square matrix on the composite space (or a block of it).
pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues below `-POSITIVITY_TOL` signal a broken propagation; anything
/// in `[-POSITIVITY_TOL, 0)` is integrator noise and is clamped silently.
pub const POSITIVITY_TOL: f64 = 1e-9;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Pauli z, `diag(-1, +1)` in the (|g⟩, |e⟩) basis.
pub fn sigma_z() -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::dvector![c(-1.0), c(1.0)])
}

/// σ⁻ = |e⟩⟨g| (raises the qubit in the convention of this crate).
pub fn sigma_minus() -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(1, 0)] = c(1.0);
    m
}

/// σ⁺ = |g⟩⟨e| = (σ⁻)† (lowers the qubit; the spontaneous-emission jump).
pub fn sigma_plus() -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 1)] = c(1.0);
    m
}

/// |e⟩⟨e|, the excited-state projector (= σ⁻σ⁺ in this convention).
pub fn excited_projector() -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(1, 1)] = c(1.0);
    m
}

/// 1-based position of a two-level system in the composite ordering.
///
/// Values `1..=n_systems`; by convention the sink sits at position
/// `n_systems` (= N + 1 for a chain of N sites).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteIndex(usize);

impl SiteIndex {
    pub fn new(site: usize, n_systems: usize) -> Result<Self> {
        if site == 0 || site > n_systems {
            return Err(Error::SiteOutOfRange { site, n_systems });
        }
        Ok(SiteIndex(site))
    }

    /// Chain site `j` (1-based, `j <= spec.n`).
    pub fn chain(j: usize, spec: &ChainSpec) -> Result<Self> {
        if j == 0 || j > spec.n {
            return Err(Error::SiteOutOfRange {
                site: j,
                n_systems: spec.n_systems(),
            });
        }
        Ok(SiteIndex(j))
    }

    /// The sink position, N + 1.
    pub fn sink(spec: &ChainSpec) -> Self {
        SiteIndex(spec.n_systems())
    }

    pub fn value(self) -> usize {
        self.0
    }
}

/// Embed a single-qubit operator at 1-based position `site` of `n_systems`
/// two-level systems: I ⊗ … ⊗ local ⊗ … ⊗ I.
pub fn embed_site_op(local: &CMatrix, site: SiteIndex, n_systems: usize) -> Result<CMatrix> {
    if local.nrows() != 2 || local.ncols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "local operator must be 2x2, got {}x{}",
            local.nrows(),
            local.ncols()
        )));
    }
    let site = site.value();
    if site == 0 || site > n_systems {
        return Err(Error::SiteOutOfRange { site, n_systems });
    }
    let left = CMatrix::identity(1 << (site - 1), 1 << (site - 1));
    let right = CMatrix::identity(1 << (n_systems - site), 1 << (n_systems - site));
    Ok(left.kronecker(local).kronecker(&right))
}

/// Which state layout a [`DensityState`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Representation {
    /// Full 2^(N+1)-dimensional density matrix.
    FullSpace,
    /// (N+1)×(N+1) one-excitation block (sites 1..N, then sink) plus a
    /// scalar vacuum population. Exact whenever at most one excitation is
    /// ever present, which holds for every generator in this crate.
    ReducedSingleExcitation,
}

/// A density matrix tagged with its representation.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    pub representation: Representation,
    pub matrix: CMatrix,
    /// Population of the zero-excitation state; always 0 for `FullSpace`.
    pub vacuum_population: f64,
}

impl DensityState {
    pub fn full(matrix: CMatrix) -> Self {
        DensityState {
            representation: Representation::FullSpace,
            matrix,
            vacuum_population: 0.0,
        }
    }

    pub fn reduced(block: CMatrix, vacuum_population: f64) -> Self {
        DensityState {
            representation: Representation::ReducedSingleExcitation,
            matrix: block,
            vacuum_population,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Trace of the matrix plus, in the reduced representation, the vacuum.
    pub fn total_trace(&self) -> f64 {
        let tr: Complex64 = self.matrix.diagonal().iter().sum();
        match self.representation {
            Representation::FullSpace => tr.re,
            Representation::ReducedSingleExcitation => tr.re + self.vacuum_population,
        }
    }

    /// All probabilities of the state: matrix eigenvalues, plus the vacuum
    /// population in the reduced representation.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev = hermitian_eigenvalues(&self.matrix);
        if self.representation == Representation::ReducedSingleExcitation {
            ev.push(self.vacuum_population);
        }
        ev
    }

    /// Diagonal of the state in the decoupled energy eigenbasis, including
    /// the vacuum entry in the reduced representation.
    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.matrix.diagonal().iter().map(|z| z.re).collect();
        if self.representation == Representation::ReducedSingleExcitation {
            d.push(self.vacuum_population);
        }
        d
    }

    /// Check the density-matrix invariants: unit total trace (1e-9),
    /// Hermiticity (1e-12) and positivity (eigenvalues ≥ -1e-9).
    pub fn validate(&self) -> Result<()> {
        let tr = self.total_trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter {
                name: "state",
                reason: format!("total trace {tr} deviates from 1 by more than 1e-9"),
            });
        }
        let herm = hermiticity_error(&self.matrix);
        if herm > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "state",
                reason: format!("Hermiticity error {herm:.3e} exceeds 1e-12"),
            });
        }
        let min = self
            .eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -POSITIVITY_TOL {
            return Err(Error::PositivityViolation {
                eigenvalue: min,
                tolerance: POSITIVITY_TOL,
            });
        }
        Ok(())
    }
}

/// Initial state: one excitation on site 1, everything else (including the
/// sink) in the ground state.
pub fn initial_state(spec: &ChainSpec, representation: Representation) -> DensityState {
    match representation {
        Representation::FullSpace => {
            let dim = spec.full_dim();
            let mut m = CMatrix::zeros(dim, dim);
            // site 1 is the most significant bit of the basis index
            let idx = 1 << spec.n;
            m[(idx, idx)] = c(1.0);
            DensityState::full(m)
        }
        Representation::ReducedSingleExcitation => {
            let b = spec.block_dim();
            let mut m = CMatrix::zeros(b, b);
            m[(0, 0)] = c(1.0);
            DensityState::reduced(m, 0.0)
        }
    }
}

/// max_ij |M_ij - conj(M_ji)|.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix (unsorted).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    m.symmetric_eigenvalues().iter().copied().collect()
}

/// Shannon entropy -Σ p ln p of a probability vector, with 0·ln 0 := 0.
///
/// Entries below `-POSITIVITY_TOL` are an error; entries in
/// `[-POSITIVITY_TOL, 0)` or above 1 are clamped to [0, 1].
pub fn entropy_of_probabilities(probs: &[f64]) -> Result<f64> {
    for &p in probs {
        if p < -POSITIVITY_TOL {
            return Err(Error::PositivityViolation {
                eigenvalue: p,
                tolerance: POSITIVITY_TOL,
            });
        }
    }
    Ok(entropy_clamped(probs))
}

/// As [`entropy_of_probabilities`] but clamping without the positivity gate;
/// the caller is responsible for having checked the spectrum.
pub(crate) fn entropy_clamped(probs: &[f64]) -> f64 {
    let mut s = 0.0;
    for &p in probs {
        let p = p.clamp(0.0, 1.0);
        if p > 0.0 {
            s -= p * p.ln();
        }
    }
    s
}

/// Von Neumann entropy S(ρ) = -Tr[ρ ln ρ] in nats.
pub fn von_neumann_entropy(rho: &DensityState) -> Result<f64> {
    entropy_of_probabilities(&rho.eigenvalues())
}
