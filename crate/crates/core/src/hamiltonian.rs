//! The initial Hamiltonian H_I, the target Hamiltonian H_P, the interpolation
//! between them, and the schedule functions that drive it.
//!
//! H_I = (a†_x − θ*_x)(a_x − θ_x) + (a†_y − θ*_y)(a_y − θ_y) is positive
//! semidefinite with the two-mode coherent state |θ_x θ_y⟩ as its (truncated)
//! ground state. H_P is diagonal in the number basis with entries given by the
//! factorisation objective evaluated at the occupation numbers, so its ground
//! state encodes the factor pair. The interpolation H(s) = f(s)H_I + g(s)H_P
//! runs over normalised time s = t/T.

use std::sync::Arc;

use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::diophantine::{eval_objective_extended, ObjectiveKind};
use crate::error::{Error, Result};
use crate::fock::{
    annihilation, coherent_state, tensor_product, FockSpace, OperatorMatrix, StateVector,
    DEFAULT_N_MAX,
};

/// Boundary conditions of a schedule must hold within this tolerance.
pub const SCHEDULE_BOUNDARY_TOL: f64 = 1e-12;
/// Number of grid points used to verify g ≥ 0 on construction.
const SCHEDULE_POSITIVITY_GRID: usize = 1000;

type ScheduleFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Interpolation weight pair (f, g) on [0, 1] with f(0) = 1, f(1) = 0,
/// g(0) = 0, g(1) = 1 and g nonnegative.
#[derive(Clone)]
pub struct Schedule {
    f: ScheduleFn,
    g: ScheduleFn,
    label: String,
}

impl std::fmt::Debug for Schedule {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("Schedule").field("label", &self.label).finish()
    }
}

impl Schedule {
    /// Wrap a pair of weight functions, verifying the boundary conditions
    /// and that g stays nonnegative on a 1000-point grid.
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let schedule = Schedule {
            f: Arc::new(f),
            g: Arc::new(g),
            label: label.into(),
        };
        for (name, value, want) in [
            ("f(0)", schedule.f(0.0), 1.0),
            ("f(1)", schedule.f(1.0), 0.0),
            ("g(0)", schedule.g(0.0), 0.0),
            ("g(1)", schedule.g(1.0), 1.0),
        ] {
            if (value - want).abs() > SCHEDULE_BOUNDARY_TOL {
                return Err(Error::domain(format!(
                    "schedule '{}' violates boundary condition {name} = {want} (got {value})",
                    schedule.label
                )));
            }
        }
        for k in 0..=SCHEDULE_POSITIVITY_GRID {
            let s = k as f64 / SCHEDULE_POSITIVITY_GRID as f64;
            if schedule.g(s) < 0.0 {
                return Err(Error::domain(format!(
                    "schedule '{}' has g({s}) < 0",
                    schedule.label
                )));
            }
        }
        Ok(schedule)
    }

    /// The paper's default: f(s) = 1 − s, g(s) = s.
    pub fn linear() -> Self {
        Schedule {
            f: Arc::new(|s| 1.0 - s),
            g: Arc::new(|s| s),
            label: "linear".into(),
        }
    }

    pub fn f(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    pub fn g(&self, s: f64) -> f64 {
        (self.g)(s)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Everything that defines one simulation instance.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub n: u64,
    pub kind: ObjectiveKind,
    pub theta_x: Complex64,
    pub theta_y: Complex64,
    pub space: FockSpace,
    pub schedule: Schedule,
    /// Total evolution time T (ħ = 1 units).
    pub total_time: f64,
}

/// The default θ choice: θ_x = θ_y = N^(1/4), which calibrates the initial
/// state to ⟨n̂_x n̂_y⟩ = N.
pub fn auto_theta(n: u64) -> f64 {
    (n as f64).powf(0.25)
}

impl ProblemSpec {
    /// Defaults: objective Q, θ = N^(1/4) on both modes, 23-state truncation
    /// per mode, linear schedule, T = 100.
    pub fn new(n: u64) -> Result<Self> {
        let spec = ProblemSpec {
            n,
            kind: ObjectiveKind::Q,
            theta_x: Complex64::new(auto_theta(n), 0.0),
            theta_y: Complex64::new(auto_theta(n), 0.0),
            space: FockSpace::symmetric(DEFAULT_N_MAX),
            schedule: Schedule::linear(),
            total_time: 100.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_kind(mut self, kind: ObjectiveKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_theta(mut self, theta: Complex64) -> Result<Self> {
        self.theta_x = theta;
        self.theta_y = theta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_n_max(mut self, n_max: usize) -> Result<Self> {
        self.space = FockSpace::symmetric(n_max);
        self.validate()?;
        Ok(self)
    }

    pub fn with_total_time(mut self, total_time: f64) -> Result<Self> {
        self.total_time = total_time;
        self.validate()?;
        Ok(self)
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    /// Check the domain constraints, including that both truncated coherent
    /// states exist within the tail tolerance.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::domain(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.total_time > 0.0) {
            return Err(Error::domain(format!(
                "total_time must be positive, got {}",
                self.total_time
            )));
        }
        coherent_state(self.theta_x, self.space.n_max_x())?;
        coherent_state(self.theta_y, self.space.n_max_y())?;
        Ok(())
    }

    /// The initial state |g_I⟩ = |θ_x⟩ ⊗ |θ_y⟩ on the product basis.
    pub fn initial_state(&self) -> Result<StateVector> {
        let cx = coherent_state(self.theta_x, self.space.n_max_x())?;
        let cy = coherent_state(self.theta_y, self.space.n_max_y())?;
        Ok(cx.state.tensor(&cy.state))
    }
}

/// Single-mode (a† − θ*)(a − θ) on a mode truncated at `n_max`.
pub fn single_mode_h_i(theta: Complex64, n_max: usize) -> Result<OperatorMatrix> {
    let a = annihilation(n_max)?;
    let shift = OperatorMatrix::identity(n_max + 1).scale(-theta);
    let shifted = a.add_scaled(Complex64::new(1.0, 0.0), &shift)?;
    let product = shifted.adjoint().matmul(&shifted)?;
    // M†M is Hermitian up to rounding; promote with verification
    OperatorMatrix::new_hermitian(product.into_data())
}

/// The initial Hamiltonian on the product space:
/// (a†_x − θ*_x)(a_x − θ_x) ⊗ 1 + 1 ⊗ (a†_y − θ*_y)(a_y − θ_y).
pub fn build_h_i(theta_x: Complex64, theta_y: Complex64, space: &FockSpace) -> Result<OperatorMatrix> {
    let hx = single_mode_h_i(theta_x, space.n_max_x())?;
    let hy = single_mode_h_i(theta_y, space.n_max_y())?;
    let ix = OperatorMatrix::identity(space.n_max_x() + 1);
    let iy = OperatorMatrix::identity(space.n_max_y() + 1);
    tensor_product(&hx, &iy, space)?.add_scaled(
        Complex64::new(1.0, 0.0),
        &tensor_product(&ix, &hy, space)?,
    )
}

/// Diagonal of the target Hamiltonian in index order: the objective evaluated
/// literally at the occupation numbers, zeros included.
pub fn h_p_diagonal(n: u64, kind: ObjectiveKind, space: &FockSpace) -> Vec<f64> {
    space
        .labels()
        .map(|label| {
            eval_objective_extended(n, kind, label.n_x as u64, label.m_y as u64)
                .to_f64()
                .unwrap_or(f64::INFINITY)
        })
        .collect()
}

/// The target Hamiltonian, diagonal in the number basis.
///
/// Warns when the truncation cannot represent the solution pair, which needs
/// occupations up to ⌈√n⌉ on the smaller side.
pub fn build_h_p(n: u64, kind: ObjectiveKind, space: &FockSpace) -> Result<OperatorMatrix> {
    if n < 2 {
        return Err(Error::domain(format!("n must be at least 2, got {n}")));
    }
    let sqrt_ceil = (n as f64).sqrt().ceil() as usize;
    if space.n_max_x().min(space.n_max_y()) < sqrt_ceil {
        log::warn!(
            "truncation ({}, {}) cannot hold the solution pair for n = {n}: \
             n_max below ceil(sqrt(n)) = {sqrt_ceil}",
            space.n_max_x(),
            space.n_max_y()
        );
    }
    let diag = h_p_diagonal(n, kind, space);
    let mut data = ndarray::Array2::zeros((space.dim(), space.dim()));
    for (i, v) in diag.iter().enumerate() {
        data[(i, i)] = Complex64::new(*v, 0.0);
    }
    OperatorMatrix::new_hermitian(data)
}

/// H_I and H_P built once, ready to be interpolated.
#[derive(Debug, Clone)]
pub struct HamiltonianPair {
    pub h_i: OperatorMatrix,
    pub h_p: OperatorMatrix,
    pub schedule: Schedule,
}

impl HamiltonianPair {
    pub fn build(spec: &ProblemSpec) -> Result<Self> {
        spec.validate()?;
        Ok(HamiltonianPair {
            h_i: build_h_i(spec.theta_x, spec.theta_y, &spec.space)?,
            h_p: build_h_p(spec.n, spec.kind, &spec.space)?,
            schedule: spec.schedule.clone(),
        })
    }

    /// H(s) = f(s) H_I + g(s) H_P.
    pub fn at(&self, s: f64) -> Result<OperatorMatrix> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::domain(format!(
                "interpolation parameter s = {s} outside [0, 1]"
            )));
        }
        self.h_i
            .scale(Complex64::new(self.schedule.f(s), 0.0))
            .add_scaled(Complex64::new(self.schedule.g(s), 0.0), &self.h_p)
    }
}

/// One-off interpolated Hamiltonian; loops should build a
/// [`HamiltonianPair`] once instead.
pub fn interpolated_h(spec: &ProblemSpec, s: f64) -> Result<OperatorMatrix> {
    HamiltonianPair::build(spec)?.at(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::eval_objective;
    use crate::fock::{number_operator, BasisLabel};
    use approx::assert_abs_diff_eq;
    use num_traits::ToPrimitive;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn schedule_linear_examples() {
        let s = Schedule::linear();
        assert_eq!(s.f(0.25), 0.75);
        assert_eq!(s.g(0.25), 0.25);
        assert_eq!(s.label(), "linear");
    }

    #[test]
    fn schedule_boundary_validation() {
        assert!(Schedule::new("bad", |_| 1.0, |s| s).is_err());
        assert!(Schedule::new("negative-g", |s| 1.0 - s, |s| s * (2.0 * s - 1.0)).is_err());
        // a valid nonlinear pair: f = (1-s)^2, g = s^2
        let sched = Schedule::new("quadratic", |s| (1.0 - s) * (1.0 - s), |s| s * s).unwrap();
        assert_eq!(sched.g(0.5), 0.25);
    }

    #[test]
    fn h_i_vacuum_case() {
        // theta = 0 reduces H_I to n̂_x + n̂_y with ground state |0,0>
        let space = FockSpace::symmetric(5);
        let h = build_h_i(c(0.0), c(0.0), &space).unwrap();
        let n_op = number_operator(5);
        let id = OperatorMatrix::identity(6);
        let want = tensor_product(&n_op, &id, &space)
            .unwrap()
            .add_scaled(c(1.0), &tensor_product(&id, &n_op, &space).unwrap())
            .unwrap();
        for (a, b) in h.data().iter().zip(want.data().iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        let vacuum = StateVector::basis_state(36, 0).unwrap();
        assert_eq!(h.expectation(&vacuum).unwrap(), 0.0);
    }

    #[test]
    fn h_i_paper_ground_state_energy() {
        let spec = ProblemSpec::new(6).unwrap();
        let h = build_h_i(spec.theta_x, spec.theta_y, &spec.space).unwrap();
        let g_i = spec.initial_state().unwrap();
        let energy = h.expectation(&g_i).unwrap();
        assert!(energy.abs() < 1e-6, "<g_I|H_I|g_I> = {energy}");
    }

    #[test]
    fn h_i_positive_semidefinite() {
        for theta in [c(0.0), c(1.0), c(6.0_f64.powf(0.25)), Complex64::new(0.7, 0.4)] {
            let h = single_mode_h_i(theta, 12).unwrap();
            let eigs = h.eigenvalues().unwrap();
            assert!(eigs[0] >= -1e-12, "min eig {} for theta {theta}", eigs[0]);
        }
    }

    #[test]
    fn h_p_paper_entries() {
        let space = FockSpace::symmetric(22);
        let h = build_h_p(6, ObjectiveKind::Q, &space).unwrap();
        let at = |n_x, m_y| h.data()[(space.index(BasisLabel { n_x, m_y }).unwrap(), space.index(BasisLabel { n_x, m_y }).unwrap())].re;
        assert_eq!(at(2, 3), 2.0);
        assert_eq!(at(3, 2), 3.0);
        for m in 0..=22 {
            assert_eq!(at(0, m), 1296.0);
        }
        // the two smallest entries are the factor states, and the minimum
        // is unique
        let diag = h_p_diagonal(6, ObjectiveKind::Q, &space);
        let mut sorted = diag.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(&sorted[..2], &[2.0, 3.0]);
        assert_eq!(diag.iter().filter(|v| **v == 2.0).count(), 1);
    }

    #[test]
    fn h_p_matches_classical_objective() {
        let space = FockSpace::symmetric(12);
        for (n, kind) in [(6, ObjectiveKind::Q), (6, ObjectiveKind::R), (10, ObjectiveKind::Q)] {
            let diag = h_p_diagonal(n, kind, &space);
            for label in space.labels() {
                let (x, y) = (label.n_x as u64, label.m_y as u64);
                if x >= 1 && y >= 1 && x <= n && y <= n {
                    let want = eval_objective(n, kind, x, y).unwrap().to_f64().unwrap();
                    assert_eq!(diag[space.index(label).unwrap()], want);
                }
            }
        }
    }

    #[test]
    fn h_p_argmin_matches_oracle() {
        let space = FockSpace::symmetric(16);
        for n in [6u64, 12, 15] {
            let diag = h_p_diagonal(n, ObjectiveKind::Q, &space);
            let argmin = diag
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            let label = space.label(argmin);
            let oracle = crate::diophantine::brute_force_min(n, ObjectiveKind::Q).unwrap();
            assert_eq!((label.n_x as u64, label.m_y as u64), (oracle.x, oracle.y));
        }
    }

    #[test]
    fn interpolation_boundaries_exact() {
        let spec = ProblemSpec::new(6).unwrap().with_n_max(13).unwrap();
        let pair = HamiltonianPair::build(&spec).unwrap();
        assert_eq!(pair.at(0.0).unwrap().data(), pair.h_i.data());
        assert_eq!(pair.at(1.0).unwrap().data(), pair.h_p.data());
        // linear midpoint is the entrywise average
        let mid = pair.at(0.5).unwrap();
        for (v, (a, b)) in mid
            .data()
            .iter()
            .zip(pair.h_i.data().iter().zip(pair.h_p.data().iter()))
        {
            assert_eq!(*v, 0.5 * a + 0.5 * b);
        }
        assert!(matches!(pair.at(1.5), Err(Error::Domain(_))));
        assert!(matches!(pair.at(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn interpolation_hermitian_on_grid() {
        let spec = ProblemSpec::new(6).unwrap().with_n_max(13).unwrap();
        let pair = HamiltonianPair::build(&spec).unwrap();
        for k in 0..=100 {
            let s = k as f64 / 100.0;
            let h = pair.at(s).unwrap();
            assert!(h.is_hermitian(), "H({s}) lost hermiticity");
        }
    }

    #[test]
    fn problem_spec_validation() {
        assert!(ProblemSpec::new(1).is_err());
        assert!(ProblemSpec::new(6).unwrap().with_total_time(0.0).is_err());
        // a theta too large for the truncation is rejected through the
        // coherent tail check
        assert!(ProblemSpec::new(6).unwrap().with_theta(c(4.0)).is_err());
    }

    #[test]
    fn initial_state_mean_occupation_product() {
        let spec = ProblemSpec::new(6).unwrap();
        let g_i = spec.initial_state().unwrap();
        let n_op = number_operator(22);
        let id = OperatorMatrix::identity(23);
        let nx = tensor_product(&n_op, &id, &spec.space).unwrap();
        let ny = tensor_product(&id, &n_op, &spec.space).unwrap();
        let nxny = OperatorMatrix::new_hermitian(nx.matmul(&ny).unwrap().into_data()).unwrap();
        assert_abs_diff_eq!(nxny.expectation(&g_i).unwrap(), 6.0, epsilon = 1e-6);
    }
}
