//! Time evolution and steady-state computation.
//!
//! Backends: an adaptive Dormand–Prince integrator (default), a Krylov
//! exponential-action stepper (same interface, cheaper for long
//! trajectories of large generators) and the spectral expansion
//! ρ(t) = Σ_i A_i η_i e^{λ_i t} (dense-gated). Steady states come from a
//! bordered linear solve of L̂ with a trace-normalization row.

pub mod krylov;
pub mod rk;
pub mod spectral;
pub mod steady;

use serde::{Deserialize, Serialize};

use crate::liouville::{DensityMatrix, Superoperator};
use crate::{Error, Result};

pub use spectral::{spectral_solve, SpectralSolution};
pub use steady::steady_state;

/// Default dimensionless final time.
pub const DEFAULT_T_MAX: f64 = 1000.0;
/// Default number of output points.
pub const DEFAULT_N_POINTS: usize = 2000;
/// Default relative tolerance.
pub const DEFAULT_RTOL: f64 = 1e-8;
/// Default absolute tolerance.
pub const DEFAULT_ATOL: f64 = 1e-10;

/// Successive-snapshot threshold for convergence detection.
pub const CONVERGENCE_TOL: f64 = 1e-9;
/// Trailing window length (number of consecutive sub-threshold diffs).
pub const CONVERGENCE_WINDOW: usize = 10;

/// Integration backend selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Adaptive explicit Runge–Kutta (Dormand–Prince 5(4)).
    RkAdaptive,
    /// Arnoldi approximation of the exponential action per output stride.
    Krylov,
    /// Dense spectral expansion, gated to N ≤ 4 sites.
    Spectral,
}

impl Default for Backend {
    fn default() -> Self {
        Backend::RkAdaptive
    }
}

/// Output grid in dimensionless time T = ω·t with integrator tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionGrid {
    output_times: Vec<f64>,
    pub rtol: f64,
    pub atol: f64,
}

impl EvolutionGrid {
    /// `n_points` uniformly spaced output times covering [0, t_max],
    /// including both endpoints.
    pub fn uniform(t_max: f64, n_points: usize) -> Self {
        assert!(t_max > 0.0 && n_points >= 2);
        let times = (0..n_points)
            .map(|k| t_max * k as f64 / (n_points - 1) as f64)
            .collect();
        Self { output_times: times, rtol: DEFAULT_RTOL, atol: DEFAULT_ATOL }
    }

    pub fn from_times(times: Vec<f64>, rtol: f64, atol: f64) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidParams("output grid is empty".into()));
        }
        if times[0] < 0.0 {
            return Err(Error::InvalidParams("output times must be >= 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams("output times must be strictly ascending".into()));
        }
        Ok(Self { output_times: times, rtol, atol })
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.output_times
    }

    pub fn t_max(&self) -> f64 {
        *self.output_times.last().unwrap()
    }
}

impl Default for EvolutionGrid {
    fn default() -> Self {
        Self::uniform(DEFAULT_T_MAX, DEFAULT_N_POINTS)
    }
}

/// Observer verdict after each emitted snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepControl {
    Continue,
    /// Stop integrating; remaining output times are not produced.
    Stop,
}

/// What the integrator did.
#[derive(Debug, Clone)]
pub struct IntegrationOutcome {
    /// Number of output snapshots emitted.
    pub snapshots: usize,
    /// True if the observer requested an early stop.
    pub stopped_early: bool,
    /// State at the last emitted time.
    pub final_state: DensityMatrix,
}

/// Integrates ρ̇ = L̂ρ and collects a snapshot at every grid time.
pub fn integrate(
    gen: &Superoperator,
    rho0: &DensityMatrix,
    grid: &EvolutionGrid,
    backend: Backend,
) -> Result<Vec<DensityMatrix>> {
    let mut out = Vec::with_capacity(grid.times().len());
    integrate_observed(gen, rho0, grid, backend, |_, _, rho| {
        out.push(rho.clone());
        StepControl::Continue
    })?;
    Ok(out)
}

/// Streaming variant of [`integrate`]: the observer is invoked once per
/// output time with (index, time, state) and may stop the run early.
/// Snapshots are not retained, so memory stays at O(4^N) regardless of
/// grid length.
pub fn integrate_observed(
    gen: &Superoperator,
    rho0: &DensityMatrix,
    grid: &EvolutionGrid,
    backend: Backend,
    mut observer: impl FnMut(usize, f64, &DensityMatrix) -> StepControl,
) -> Result<IntegrationOutcome> {
    if rho0.dim() != gen.dim_hilbert() {
        return Err(Error::DimensionMismatch { expected: gen.dim_hilbert(), got: rho0.dim() });
    }
    match backend {
        Backend::RkAdaptive => rk::integrate_rk(gen, rho0, grid, &mut observer),
        Backend::Krylov => krylov::integrate_krylov(gen, rho0, grid, &mut observer),
        Backend::Spectral => {
            let sol = spectral::spectral_solve(gen, rho0)?;
            let mut last = rho0.clone();
            let mut emitted = 0;
            let mut stopped = false;
            for (k, &t) in grid.times().iter().enumerate() {
                last = sol.evaluate(t);
                emitted += 1;
                if observer(k, t, &last) == StepControl::Stop {
                    stopped = true;
                    break;
                }
            }
            Ok(IntegrationOutcome { snapshots: emitted, stopped_early: stopped, final_state: last })
        }
    }
}

/// Convergence verdict over a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub t_converged: Option<f64>,
}

/// Declares convergence at the first time index k for which the last
/// [`CONVERGENCE_WINDOW`] successive-snapshot differences (in entrywise
/// max norm) all fall below [`CONVERGENCE_TOL`].
pub fn detect_convergence(times: &[f64], states: &[DensityMatrix]) -> ConvergenceReport {
    assert!(states.len() >= 2, "need at least two snapshots");
    assert_eq!(times.len(), states.len());
    let mut monitor = ConvergenceMonitor::new(CONVERGENCE_TOL, CONVERGENCE_WINDOW);
    for (t, s) in times.iter().zip(states) {
        if let Some(tc) = monitor.push(*t, s) {
            return ConvergenceReport { converged: true, t_converged: Some(tc) };
        }
    }
    ConvergenceReport { converged: false, t_converged: None }
}

/// Streaming form of [`detect_convergence`].
pub struct ConvergenceMonitor {
    tol: f64,
    window: usize,
    run: usize,
    prev: Option<DensityMatrix>,
    fired_at: Option<f64>,
}

impl ConvergenceMonitor {
    pub fn new(tol: f64, window: usize) -> Self {
        Self { tol, window, run: 0, prev: None, fired_at: None }
    }

    /// Feeds one snapshot; returns Some(t) once the trailing window has
    /// filled with sub-threshold differences.
    pub fn push(&mut self, t: f64, state: &DensityMatrix) -> Option<f64> {
        if let Some(prev) = &self.prev {
            if state.max_abs_diff(prev) < self.tol {
                self.run += 1;
            } else {
                self.run = 0;
            }
        }
        self.prev = Some(state.clone());
        if self.fired_at.is_none() && self.run >= self.window {
            self.fired_at = Some(t);
        }
        self.fired_at
    }

    pub fn converged(&self) -> bool {
        self.fired_at.is_some()
    }

    pub fn t_converged(&self) -> Option<f64> {
        self.fired_at
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::liouville::SuperRepr;
    use crate::spin_ops::{build_lindblad_ops, site_operator, ModelParams, SpinOp};
    use crate::sparse::CsrMatrix;
    use crate::C64;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn single_spin_damping(gamma: f64, nbar: f64) -> Superoperator {
        let h = CsrMatrix::zeros(2, 2);
        let params = ModelParams { bath_coupling: gamma, nbar, ..ModelParams::default() };
        let jumps = build_lindblad_ops(&params, 1).unwrap();
        Superoperator::build(&h, &jumps, SuperRepr::Dense).unwrap()
    }

    fn sz_expectation(rho: &DensityMatrix) -> f64 {
        let sz = site_operator(SpinOp::Sz, 1, 1).unwrap().to_dense();
        rho.matrix().dot(&sz).diag().sum().re
    }

    /// ⟨Sz⟩(t) = −½ + e^{−Γt}(⟨Sz⟩₀ + ½) for a single damped spin.
    #[test]
    fn single_spin_analytic_relaxation() {
        let gamma = 0.05;
        let gen = single_spin_damping(gamma, 0.0);
        let rho0 = DensityMatrix::from_pure(&array![c(1.0, 0.0), c(0.0, 0.0)]);
        let grid = EvolutionGrid::uniform(100.0, 201);
        for backend in [Backend::RkAdaptive, Backend::Krylov, Backend::Spectral] {
            let states = integrate(&gen, &rho0, &grid, backend).unwrap();
            let mut worst = 0.0f64;
            for (t, rho) in grid.times().iter().zip(&states) {
                let expect = -0.5 + (-gamma * t).exp() * (0.5 + 0.5);
                worst = worst.max((sz_expectation(rho) - expect).abs());
            }
            assert!(worst < 1e-8, "{backend:?}: max error {worst:.3e}");
        }
    }

    /// Γ = 0 keeps the evolution unitary: purity is conserved.
    #[test]
    fn closed_system_conserves_purity() {
        let lat = LatticeSpec::from_edges(2, &[(1, 2)], None).unwrap();
        let params = ModelParams { bath_coupling: 0.0, gamma: 0.5, delta: 1.0, ..ModelParams::default() };
        let fields = crate::lattice::assign_fields(&lat, 1.0, 1.0).unwrap();
        let h = crate::spin_ops::build_hamiltonian(&params, &lat, &fields).unwrap();
        let gen = Superoperator::build(&h, &[], SuperRepr::MatrixFree).unwrap();
        let psi = array![c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0), c(0.0, 0.0)];
        let rho0 = DensityMatrix::from_pure(&psi);
        let grid = EvolutionGrid::uniform(100.0, 101);
        let states = integrate(&gen, &rho0, &grid, Backend::RkAdaptive).unwrap();
        for rho in &states {
            assert!((rho.purity() - 1.0).abs() < 1e-9);
        }
    }

    /// Integrator and spectral expansion agree entrywise at N = 3.
    #[test]
    fn rk_matches_spectral_snapshots() {
        let lat = LatticeSpec::from_edges(3, &[(1, 2), (2, 3), (1, 3)], None).unwrap();
        let params = ModelParams { gamma: 0.37, delta: 0.81, nbar: 0.02, ..ModelParams::default() };
        let fields = crate::lattice::assign_fields(&lat, 0.8, 0.3).unwrap();
        let h = crate::spin_ops::build_hamiltonian(&params, &lat, &fields).unwrap();
        let jumps = build_lindblad_ops(&params, 3).unwrap();
        let gen = Superoperator::build(&h, &jumps, SuperRepr::Dense).unwrap();
        let rho0 = crate::observables::initial_state(crate::observables::InitialState::WState, 3).unwrap();
        let grid = EvolutionGrid::uniform(50.0, 11);
        let rk = integrate(&gen, &rho0, &grid, Backend::RkAdaptive).unwrap();
        let sp = integrate(&gen, &rho0, &grid, Backend::Spectral).unwrap();
        for (a, b) in rk.iter().zip(&sp) {
            assert!(a.max_abs_diff(b) < 1e-8);
        }
    }

    /// Krylov stepping reproduces the adaptive RK trajectory.
    #[test]
    fn krylov_matches_rk() {
        let lat = LatticeSpec::from_edges(3, &[(1, 2), (2, 3)], None).unwrap();
        let params = ModelParams { gamma: 0.5, delta: 1.0, nbar: 0.01, ..ModelParams::default() };
        let fields = crate::lattice::assign_fields(&lat, 1.0, 0.1).unwrap();
        let h = crate::spin_ops::build_hamiltonian(&params, &lat, &fields).unwrap();
        let jumps = build_lindblad_ops(&params, 3).unwrap();
        let gen = Superoperator::build(&h, &jumps, SuperRepr::MatrixFree).unwrap();
        let rho0 = crate::observables::initial_state(crate::observables::InitialState::Separable, 3).unwrap();
        let grid = EvolutionGrid::uniform(80.0, 161);
        let rk = integrate(&gen, &rho0, &grid, Backend::RkAdaptive).unwrap();
        let kv = integrate(&gen, &rho0, &grid, Backend::Krylov).unwrap();
        for (a, b) in rk.iter().zip(&kv) {
            assert!(a.max_abs_diff(b) < 1e-8);
        }
    }

    #[test]
    fn constant_series_converges_at_first_window() {
        let rho = DensityMatrix::maximally_mixed(2);
        let n = 2 * CONVERGENCE_WINDOW;
        let times: Vec<f64> = (0..n).map(|k| k as f64).collect();
        let states = vec![rho; n];
        let report = detect_convergence(&times, &states);
        assert!(report.converged);
        assert_eq!(report.t_converged, Some(CONVERGENCE_WINDOW as f64));
    }

    #[test]
    fn oscillatory_series_never_converges() {
        // unitary rotation with Γ = 0 keeps moving forever
        let h = site_operator(SpinOp::Sz, 1, 1).unwrap();
        let gen = Superoperator::build(&h, &[], SuperRepr::Dense).unwrap();
        let psi = array![
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        ];
        let rho0 = DensityMatrix::from_pure(&psi);
        let grid = EvolutionGrid::uniform(100.0, 101);
        let states = integrate(&gen, &rho0, &grid, Backend::RkAdaptive).unwrap();
        let report = detect_convergence(grid.times(), &states);
        assert!(!report.converged);
        assert_eq!(report.t_converged, None);
    }

    /// The detector fires where the closed-form amplitude-damping solution
    /// predicts. With snapshots ρ(t_k) = ρ_ss + e^{−Γ t_k}·Δ on a uniform
    /// grid of stride s, successive diffs are
    /// d_k = |Δ|_max · e^{−Γ t_k}(e^{Γs} − 1), so the first sub-threshold
    /// diff ends at t* = ln(|Δ|_max(e^{Γs}−1)/tol)/Γ rounded up to the
    /// grid, and the window adds CONVERGENCE_WINDOW − 1 strides.
    #[test]
    fn decay_convergence_time_matches_analytic_prediction() {
        let gamma = 0.05;
        let stride = 0.5;
        let n = 2000usize;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * stride).collect();
        let states: Vec<DensityMatrix> = times
            .iter()
            .map(|t| {
                let p = (-gamma * t).exp();
                DensityMatrix::from_matrix_unchecked(array![
                    [c(p, 0.0), c(0.0, 0.0)],
                    [c(0.0, 0.0), c(1.0 - p, 0.0)]
                ])
            })
            .collect();
        let report = detect_convergence(&times, &states);
        assert!(report.converged);
        let dmax = 1.0;
        let t_star = ((dmax * ((gamma * stride).exp() - 1.0)) / CONVERGENCE_TOL).ln() / gamma;
        let k_star = (t_star / stride).ceil() as usize;
        let expect = times[k_star + CONVERGENCE_WINDOW - 1];
        let got = report.t_converged.unwrap();
        assert!(
            (got - expect).abs() <= stride + 1e-12,
            "fired at {got}, predicted {expect}"
        );
    }

    #[test]
    fn grid_validation() {
        assert!(EvolutionGrid::from_times(vec![0.0, 1.0, 2.0], 1e-8, 1e-10).is_ok());
        assert!(EvolutionGrid::from_times(vec![1.0, 1.0], 1e-8, 1e-10).is_err());
        assert!(EvolutionGrid::from_times(vec![-1.0, 1.0], 1e-8, 1e-10).is_err());
        assert!(EvolutionGrid::from_times(vec![], 1e-8, 1e-10).is_err());
        let g = EvolutionGrid::default();
        assert_eq!(g.times().len(), DEFAULT_N_POINTS);
        assert_eq!(g.t_max(), DEFAULT_T_MAX);
        assert_eq!(g.times()[0], 0.0);
    }

    #[test]
    fn early_stop_halts_emission() {
        let gen = single_spin_damping(0.05, 0.0);
        let rho0 = DensityMatrix::maximally_mixed(2);
        let grid = EvolutionGrid::uniform(10.0, 21);
        let mut seen = 0;
        let outcome = integrate_observed(&gen, &rho0, &grid, Backend::RkAdaptive, |k, _, _| {
            seen += 1;
            if k >= 4 {
                StepControl::Stop
            } else {
                StepControl::Continue
            }
        })
        .unwrap();
        assert_eq!(seen, 5);
        assert_eq!(outcome.snapshots, 5);
        assert!(outcome.stopped_early);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let gen = single_spin_damping(0.05, 0.0);
        let rho0 = DensityMatrix::maximally_mixed(4);
        let grid = EvolutionGrid::uniform(1.0, 3);
        assert!(matches!(
            integrate(&gen, &rho0, &grid, Backend::RkAdaptive),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    /// Wiring check for the matrix-free path at 7 sites: trace pinned,
    /// Hermitian, and purity strictly between ½ and 1 after a short run.
    #[test]
    fn seven_site_short_run_is_physical() {
        let lat = crate::lattice::build_triangular7();
        let params = ModelParams::default();
        let fields = crate::lattice::assign_fields(&lat, 1.0, 1.0).unwrap();
        let h = crate::spin_ops::build_hamiltonian(&params, &lat, &fields).unwrap();
        let jumps = build_lindblad_ops(&params, 7).unwrap();
        let gen = Superoperator::build(&h, &jumps, SuperRepr::MatrixFree).unwrap();
        let rho0 = crate::observables::initial_state(crate::observables::InitialState::Separable, 7).unwrap();
        let grid = EvolutionGrid::uniform(5.0, 11);
        let states = integrate(&gen, &rho0, &grid, Backend::Krylov).unwrap();
        let last = states.last().unwrap();
        assert!((last.trace() - c(1.0, 0.0)).norm() < 1e-10);
        assert!(last.herm_residual() < 1e-10);
        assert!(last.purity() < 1.0);
        assert!(last.purity() > 0.5);
    }
}
