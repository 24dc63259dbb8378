//! Minimal-time computation by bisection on the value function
//! `d(T) = min_{‖u‖≤M} ‖y(T)‖`.
//!
//! `d(T+s) ≤ e^{-λ_1 s} d(T)` makes `{T : d(T) ≤ r}` a half-line `[t*, ∞)`,
//! so the first crossing can be bracketed and bisected directly.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::spectral::{
    build_basis, indicator_matrix, ControlSpace, DomainSpec, Field, ImpulseOperator,
    IndicatorMatrix, SpectralBasis,
};
use crate::subproblem::{
    assemble_terminal_map, solve_ball_least_norm, SecularOptions, SubproblemSolution,
    TerminalMap,
};

pub const DEFAULT_MODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Final bisection bracket width.
    pub time: f64,
    /// Relative tolerance of the secular equation.
    pub secular: f64,
    /// Threshold applied to certificate residuals.
    pub cert: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { time: 1e-8, secular: 1e-12, cert: 1e-6 }
    }
}

/// One instance of the minimal-time impulse control problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub y0: Field,
    pub domain: DomainSpec,
    /// Target radius.
    pub r: f64,
    /// Control bound.
    pub bound: f64,
    /// Impulse time.
    pub tau: f64,
    pub n_modes: usize,
    pub control_space: ControlSpace,
    pub tolerances: Tolerances,
}

impl ProblemSpec {
    /// Spec with default modes, tolerances and control space; `y0` is
    /// resized to the default mode count.
    pub fn new(y0: Field, domain: DomainSpec, r: f64, bound: f64, tau: f64) -> Self {
        Self {
            y0: y0.resized(DEFAULT_MODES),
            domain,
            r,
            bound,
            tau,
            n_modes: DEFAULT_MODES,
            control_space: ControlSpace::default(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_modes(mut self, n: usize) -> Self {
        self.y0 = self.y0.resized(n);
        self.n_modes = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes == 0 {
            return Err(Error::InvalidModes(0));
        }
        if self.y0.len() != self.n_modes {
            return Err(Error::DimensionMismatch { expected: self.n_modes, got: self.y0.len() });
        }
        if !self.y0.is_finite() {
            return Err(Error::NonFinite("initial state"));
        }
        for (name, v) in [("r", self.r), ("M", self.bound), ("tau", self.tau)] {
            if !v.is_finite() {
                return Err(Error::NonFinite(match name {
                    "r" => "target radius",
                    "M" => "control bound",
                    _ => "impulse time",
                }));
            }
        }
        if self.r <= 0.0 {
            return Err(Error::InvalidProblem(format!("target radius must be positive (got {})", self.r)));
        }
        if self.bound < 0.0 {
            return Err(Error::NegativeBound(self.bound));
        }
        if self.tau < 0.0 {
            return Err(Error::NegativeTime(self.tau));
        }
        let t = &self.tolerances;
        if !(t.time > 0.0 && t.secular > 0.0 && t.cert > 0.0) {
            return Err(Error::InvalidProblem("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// The impulse alone can place the state in the target at `τ`.
    Trivial,
    Nontrivial,
    /// The uncontrolled state is already inside the target at `τ`.
    AlreadyInside,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Trivial => "trivial",
            Status::Nontrivial => "nontrivial",
            Status::AlreadyInside => "already_inside",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "trivial" => Some(Status::Trivial),
            "nontrivial" => Some(Status::Nontrivial),
            "already_inside" => Some(Status::AlreadyInside),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinTimeSolution {
    pub t_star: f64,
    pub u_star: Field,
    pub d_at_t_star: f64,
    pub status: Status,
    pub bisection_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nontriviality {
    pub nontrivial: bool,
    /// `d(τ) - r`.
    pub margin: f64,
}

/// A [`ProblemSpec`] with its discretization assembled once.
#[derive(Debug, Clone)]
pub struct Problem {
    spec: ProblemSpec,
    basis: SpectralBasis,
    indicator: IndicatorMatrix,
    impulse: ImpulseOperator,
}

impl Problem {
    pub fn new(spec: &ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let basis = build_basis(&spec.domain, spec.n_modes)?;
        let indicator = indicator_matrix(&basis, &spec.domain);
        let impulse = ImpulseOperator::new(&indicator, spec.control_space);
        Ok(Self { spec: spec.clone(), basis, indicator, impulse })
    }

    /// Same discretization with a different bound and impulse time.
    pub fn reparametrize(&self, bound: f64, tau: f64) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.bound = bound;
        spec.tau = tau;
        spec.validate()?;
        Ok(Self { spec, ..self.clone() })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn indicator(&self) -> &IndicatorMatrix {
        &self.indicator
    }

    pub fn impulse(&self) -> &ImpulseOperator {
        &self.impulse
    }

    fn secular(&self) -> SecularOptions {
        SecularOptions { tol: self.spec.tolerances.secular, ..SecularOptions::default() }
    }

    pub fn terminal_map(&self, t: f64) -> Result<TerminalMap> {
        assemble_terminal_map(&self.basis, &self.impulse, &self.spec.y0, self.spec.tau, t)
    }

    /// Subproblem solution at observation time `t`.
    pub fn subproblem(&self, t: f64) -> Result<SubproblemSolution> {
        solve_ball_least_norm(&self.terminal_map(t)?, self.spec.bound, self.secular())
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.subproblem(t)?.value)
    }

    pub fn check_nontrivial(&self) -> Result<Nontriviality> {
        let margin = self.value(self.spec.tau)? - self.spec.r;
        Ok(Nontriviality { nontrivial: margin > 0.0, margin })
    }

    /// `max(τ, ln(‖y0‖/r)/λ_1)`: the zero control reaches the target by then.
    pub fn admissible_time_bound(&self) -> Result<f64> {
        let norm = self.spec.y0.norm();
        if norm == 0.0 {
            return Err(Error::ZeroInitialState);
        }
        let t = (norm / self.spec.r).ln() / self.basis.lambda1();
        Ok(t.max(self.spec.tau))
    }

    pub fn solve(&self) -> Result<MinTimeSolution> {
        let spec = &self.spec;
        let tau = spec.tau;
        let n = spec.n_modes;

        let free = self.basis.semigroup_apply(&spec.y0, tau)?.norm();
        if free <= spec.r {
            return Ok(MinTimeSolution {
                t_star: tau,
                u_star: Field::zeros(n),
                d_at_t_star: free,
                status: Status::AlreadyInside,
                bisection_iters: 0,
            });
        }

        let at_tau = self.subproblem(tau)?;
        if at_tau.value <= spec.r {
            return Ok(MinTimeSolution {
                t_star: tau,
                u_star: at_tau.u,
                d_at_t_star: at_tau.value,
                status: Status::Trivial,
                bisection_iters: 0,
            });
        }

        let mut lo = tau;
        let mut hi = self.admissible_time_bound()?;
        if hi <= lo {
            return Err(Error::InconsistentBracket(format!(
                "admissible-time bound {hi} does not exceed tau = {tau} although d(tau) > r"
            )));
        }
        let mut upper = self.subproblem(hi)?;
        // Rounding can leave d(T_up) a hair above r.
        let mut widen = 0;
        while upper.value > spec.r {
            widen += 1;
            if widen > 60 {
                return Err(Error::InconsistentBracket(format!(
                    "d({hi}) = {} stays above r = {}",
                    upper.value, spec.r
                )));
            }
            lo = hi;
            hi = tau + 2.0 * (hi - tau);
            upper = self.subproblem(hi)?;
        }

        let mut iters = 0;
        while hi - lo > spec.tolerances.time {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            iters += 1;
            let s = self.subproblem(mid)?;
            if s.value <= spec.r {
                hi = mid;
                upper = s;
            } else {
                lo = mid;
            }
        }

        Ok(MinTimeSolution {
            t_star: hi,
            u_star: upper.u,
            d_at_t_star: upper.value,
            status: Status::Nontrivial,
            bisection_iters: iters,
        })
    }
}

pub fn check_nontrivial(spec: &ProblemSpec) -> Result<Nontriviality> {
    Problem::new(spec)?.check_nontrivial()
}

pub fn admissible_time_bound(spec: &ProblemSpec) -> Result<f64> {
    Problem::new(spec)?.admissible_time_bound()
}

pub fn value_function(spec: &ProblemSpec, t: f64) -> Result<f64> {
    Problem::new(spec)?.value(t)
}

pub fn solve_min_time(spec: &ProblemSpec) -> Result<MinTimeSolution> {
    Problem::new(spec)?.solve()
}

/// Largest mode count the brute-force oracle accepts.
pub const ORACLE_MAX_MODES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleGrid {
    pub directions: usize,
    pub radii: usize,
    pub time_step: f64,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self { directions: 240, radii: 60, time_step: 5e-4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub t: f64,
    pub u: Field,
    pub value: f64,
}

/// Exhaustive search over a polar grid of the control ball and a uniform
/// time grid for the first time some grid control reaches the target.
///
/// The actuator matrix is rebuilt here by Simpson quadrature rather than the
/// closed-form entries, and no subproblem solver is involved.
pub fn oracle_min_time(spec: &ProblemSpec, grid: &OracleGrid) -> Result<OracleResult> {
    spec.validate()?;
    let n = spec.n_modes;
    if n > ORACLE_MAX_MODES {
        return Err(Error::OracleTooLarge { max: ORACLE_MAX_MODES, got: n });
    }
    if grid.directions < 2 || grid.radii < 1 || !(grid.time_step > 0.0) {
        return Err(Error::InvalidProblem("oracle grid too coarse".into()));
    }
    let len = spec.domain.length();
    let lambdas: Vec<f64> = (1..=n).map(|k| (k as f64 * PI / len).powi(2)).collect();
    let impulse = oracle_impulse(spec);

    let candidates = ball_grid(n, spec.bound, grid);
    let pushed: Vec<Vec<f64>> = candidates
        .iter()
        .map(|u| (0..n).map(|i| (0..n).map(|j| impulse[(i, j)] * u[j]).sum()).collect())
        .collect();

    let y0 = spec.y0.as_slice();
    let y0_norm = spec.y0.norm();
    let horizon = if y0_norm > 0.0 {
        ((y0_norm / spec.r).ln() / lambdas[0]).max(spec.tau)
    } else {
        spec.tau
    };
    let steps = ((horizon - spec.tau) / grid.time_step).ceil() as usize + 1;

    for step in 0..=steps {
        let t = spec.tau + step as f64 * grid.time_step;
        let pre: Vec<f64> =
            (0..n).map(|k| (-lambdas[k] * spec.tau).exp() * y0[k]).collect();
        let after: Vec<f64> = (0..n).map(|k| (-lambdas[k] * (t - spec.tau)).exp()).collect();
        let mut best = (f64::INFINITY, 0usize);
        for (idx, bu) in pushed.iter().enumerate() {
            let v = (0..n)
                .map(|k| (after[k] * (pre[k] + bu[k])).powi(2))
                .sum::<f64>()
                .sqrt();
            if v < best.0 {
                best = (v, idx);
            }
        }
        if best.0 <= spec.r {
            return Ok(OracleResult {
                t,
                u: Field::from_slice(&candidates[best.1]),
                value: best.0,
            });
        }
    }
    Err(Error::InconsistentBracket("oracle found no admissible time up to the decay bound".into()))
}

fn oracle_impulse(spec: &ProblemSpec) -> DMatrix<f64> {
    let n = spec.n_modes;
    let len = spec.domain.length();
    let (a, b) = (spec.domain.omega_lo(), spec.domain.omega_hi());
    let panels = 4000;
    let h = (b - a) / panels as f64;
    let phi = |k: usize, x: f64| (2.0 / len).sqrt() * (k as f64 * PI * x / len).sin();
    let mut x = DMatrix::zeros(n, n);
    for i in 1..=n {
        for j in 1..=n {
            let f = |s: f64| phi(i, s) * phi(j, s);
            let mut acc = f(a) + f(b);
            for m in 1..panels {
                acc += if m % 2 == 1 { 4.0 } else { 2.0 } * f(a + m as f64 * h);
            }
            x[(i - 1, j - 1)] = acc * h / 3.0;
        }
    }
    match spec.control_space {
        ControlSpace::Truncated => x,
        ControlSpace::Actuator => {
            let eig = SymmetricEigen::new(x);
            let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
            &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
        }
    }
}

/// Origin plus `radii` shells of `directions` unit vectors scaled up to `bound`.
fn ball_grid(n: usize, bound: f64, grid: &OracleGrid) -> Vec<Vec<f64>> {
    let dirs: Vec<Vec<f64>> = match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..grid.directions)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / grid.directions as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            // Fibonacci sphere
            let m = grid.directions;
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let th = golden * i as f64;
                    vec![rho * th.cos(), rho * th.sin(), z]
                })
                .collect()
        }
    };
    let mut out = vec![vec![0.0; n]];
    for s in 1..=grid.radii {
        let rad = bound * s as f64 / grid.radii as f64;
        for d in &dirs {
            out.push(d.iter().map(|c| c * rad).collect());
        }
    }
    out
}
