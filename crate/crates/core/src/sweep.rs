//! Parameter studies of `t*(M, τ)`: grid sweeps, monotonicity in `M`,
//! continuity ladders, control convergence and the robustness margin.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::min_time::{MinTimeSolution, Problem, ProblemSpec, Status};
use crate::optimality::{verify, Certificate};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub m_values: Vec<f64>,
    pub tau_values: Vec<f64>,
    pub base: ProblemSpec,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        let ascending = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if self.m_values.is_empty() || self.tau_values.is_empty() {
            return Err(Error::InvalidProblem("sweep axes must be nonempty".into()));
        }
        if !ascending(&self.m_values) || !ascending(&self.tau_values) {
            return Err(Error::InvalidProblem("sweep axes must be strictly ascending".into()));
        }
        if self.m_values.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidProblem("sweep M values must be positive".into()));
        }
        if self.tau_values.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
            return Err(Error::InvalidProblem("sweep tau values must be non-negative".into()));
        }
        self.base.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub t_star: f64,
    pub d_at_t_star: f64,
    pub status: Status,
    /// `None` when the certificate does not apply (trivial cells).
    pub certificate: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub m: f64,
    pub tau: f64,
    pub outcome: std::result::Result<CellResult, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub m: f64,
    pub tau: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Row-major in `(M_i, τ_j)`.
    pub cells: Vec<SweepCell>,
    pub m_values: Vec<f64>,
    pub tau_values: Vec<f64>,
    pub failures: Vec<CellFailure>,
}

impl SweepResult {
    pub fn cell(&self, i: usize, j: usize) -> &SweepCell {
        &self.cells[i * self.tau_values.len() + j]
    }
}

fn solve_cell(problem: &Problem, m: f64, tau: f64) -> std::result::Result<CellResult, Error> {
    let p = problem.reparametrize(m, tau)?;
    let sol = p.solve()?;
    let certificate = match sol.status {
        Status::Nontrivial => {
            let c = verify(&p, &sol)?;
            Some((c.bang_bang_residual, c.collinearity_residual))
        }
        _ => None,
    };
    Ok(CellResult {
        t_star: sol.t_star,
        d_at_t_star: sol.d_at_t_star,
        status: sol.status,
        certificate,
    })
}

/// Solves every cell on the current rayon pool.
pub fn run_sweep(grid: &SweepGrid) -> Result<SweepResult> {
    grid.validate()?;
    let problem = Problem::new(&grid.base)?;
    let coords: Vec<(f64, f64)> = grid
        .m_values
        .iter()
        .flat_map(|&m| grid.tau_values.iter().map(move |&t| (m, t)))
        .collect();
    // indexed collect keeps row-major order regardless of scheduling
    let cells: Vec<SweepCell> = coords
        .par_iter()
        .map(|&(m, tau)| SweepCell { m, tau, outcome: solve_cell(&problem, m, tau) })
        .collect();
    let failures = cells
        .iter()
        .filter_map(|c| match &c.outcome {
            Err(e) => Some(CellFailure { m: c.m, tau: c.tau, error: e.clone() }),
            Ok(_) => None,
        })
        .collect();
    Ok(SweepResult {
        cells,
        m_values: grid.m_values.clone(),
        tau_values: grid.tau_values.clone(),
        failures,
    })
}

/// [`run_sweep`] on a dedicated pool with `threads` workers.
pub fn run_sweep_with_threads(grid: &SweepGrid, threads: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidProblem(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(grid))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneViolation {
    pub m_lo: f64,
    pub m_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneColumn {
    pub tau: f64,
    pub compared_pairs: usize,
    pub min_decrement: Option<f64>,
    pub violations: Vec<MonotoneViolation>,
}

impl MonotoneColumn {
    pub fn skipped(&self) -> bool {
        self.compared_pairs == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneReport {
    pub columns: Vec<MonotoneColumn>,
}

impl MonotoneReport {
    pub fn passed(&self) -> bool {
        self.columns.iter().all(|c| c.violations.is_empty())
    }

    pub fn min_decrement(&self) -> Option<f64> {
        self.columns.iter().filter_map(|c| c.min_decrement).reduce(f64::min)
    }
}

/// For each `τ`, checks `t*(M_{i+1}) < t*(M_i)` over consecutive nontrivial cells.
pub fn check_monotone_in_m(result: &SweepResult) -> MonotoneReport {
    let columns = result
        .tau_values
        .iter()
        .enumerate()
        .map(|(j, &tau)| {
            let row: Vec<(f64, f64)> = (0..result.m_values.len())
                .filter_map(|i| {
                    let c = result.cell(i, j);
                    match &c.outcome {
                        Ok(r) if r.status == Status::Nontrivial => Some((c.m, r.t_star)),
                        _ => None,
                    }
                })
                .collect();
            let mut min_decrement: Option<f64> = None;
            let mut violations = Vec::new();
            for w in row.windows(2) {
                let ((m_lo, t_lo), (m_hi, t_hi)) = (w[0], w[1]);
                let dec = t_lo - t_hi;
                min_decrement = Some(min_decrement.map_or(dec, |m| m.min(dec)));
                if !(t_hi < t_lo) {
                    violations.push(MonotoneViolation { m_lo, m_hi, t_lo, t_hi });
                }
            }
            MonotoneColumn {
                tau,
                compared_pairs: row.len().saturating_sub(1),
                min_decrement,
                violations,
            }
        })
        .collect();
    MonotoneReport { columns }
}

fn nontrivial_solution(problem: &Problem, what: &str) -> Result<MinTimeSolution> {
    let sol = problem.solve()?;
    if sol.status != Status::Nontrivial {
        return Err(Error::LeftNontrivialRegion(format!(
            "{what} (M = {}, tau = {}) is {}",
            problem.spec().bound,
            problem.spec().tau,
            sol.status.name()
        )));
    }
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityOptions {
    pub h0: f64,
    /// Number of halvings after `h0`; the ladder has `levels + 1` entries.
    pub levels: usize,
    pub slack: f64,
    pub tol: f64,
}

impl Default for ContinuityOptions {
    fn default() -> Self {
        Self { h0: 0.02, levels: 6, slack: 0.1, tol: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub t_star: f64,
    /// `(h, J(h))` with `J(h)` the worst `|Δt*|` over the four axis perturbations.
    pub ladder: Vec<(f64, f64)>,
    pub monotone: bool,
    pub converged: bool,
}

impl ContinuityReport {
    pub fn passed(&self) -> bool {
        self.monotone && self.converged
    }
}

pub fn check_continuity(base: &ProblemSpec, opts: ContinuityOptions) -> Result<ContinuityReport> {
    if !(opts.h0 > 0.0) {
        return Err(Error::InvalidProblem("continuity ladder needs h0 > 0".into()));
    }
    let problem = Problem::new(base)?;
    let t0 = nontrivial_solution(&problem, "base instance")?.t_star;
    let (m, tau) = (base.bound, base.tau);
    let mut ladder = Vec::with_capacity(opts.levels + 1);
    for k in 0..=opts.levels {
        let h = opts.h0 / 2f64.powi(k as i32);
        let mut perturbed = vec![(m + h, tau), (m, tau + h)];
        if m - h >= 0.0 {
            perturbed.push((m - h, tau));
        }
        if tau - h >= 0.0 {
            perturbed.push((m, tau - h));
        }
        let mut worst: f64 = 0.0;
        for (pm, pt) in perturbed {
            let p = problem.reparametrize(pm, pt)?;
            let t = nontrivial_solution(&p, "perturbed instance")?.t_star;
            worst = worst.max((t - t0).abs());
        }
        ladder.push((h, worst));
    }
    let monotone = ladder.windows(2).all(|w| w[1].1 <= (1.0 + opts.slack) * w[0].1);
    let converged = ladder.last().is_some_and(|&(_, j)| j <= opts.tol);
    Ok(ContinuityReport { t_star: t0, ladder, monotone, converged })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStep {
    pub n: usize,
    pub bound: f64,
    pub tau: f64,
    pub t_star: f64,
    /// `‖u*_n - u*‖`.
    pub error: f64,
    pub bang_bang_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub steps: Vec<ConvergenceStep>,
    pub decreasing: bool,
    pub converged: bool,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.decreasing && self.converged
    }
}

/// Optimal controls along `(M_n, τ_n) = (M + 2^{-n} M/10, τ + 2^{-n} max(τ, 0.01))`.
pub fn check_control_convergence(base: &ProblemSpec, n_max: usize) -> Result<ConvergenceReport> {
    let problem = Problem::new(base)?;
    let reference = nontrivial_solution(&problem, "base instance")?;
    let (m, tau) = (base.bound, base.tau);
    let mut steps = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let scale = 2f64.powi(-(n as i32));
        let (mn, tn) = (m + scale * m / 10.0, tau + scale * tau.max(0.01));
        let p = problem.reparametrize(mn, tn)?;
        let sol = nontrivial_solution(&p, "sequence instance")?;
        let cert: Certificate = verify(&p, &sol)?;
        steps.push(ConvergenceStep {
            n,
            bound: mn,
            tau: tn,
            t_star: sol.t_star,
            error: (&sol.u_star - &reference.u_star).norm(),
            bang_bang_residual: cert.bang_bang_residual,
        });
    }
    let decreasing = steps.windows(2).all(|w| w[1].error <= 1.1 * w[0].error);
    let converged = steps.last().is_some_and(|s| s.error <= 1e-3 * m);
    Ok(ConvergenceReport { steps, decreasing, converged })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessReport {
    pub epsilon0: f64,
    /// Number of `(M+ε, τ̃)` points evaluated.
    pub samples: usize,
}

pub const ROBUSTNESS_TAU_SAMPLES: usize = 17;

/// Largest `ε` in `ladder` for which `min_{‖u‖≤M+ε} ‖D_τ̃ y0 + B u‖ > r` at
/// every sampled `τ̃ ∈ [max(0, τ-ε), τ+ε]`. Zero when no rung passes.
pub fn robustness_margin(base: &ProblemSpec, ladder: &[f64]) -> Result<RobustnessReport> {
    let problem = Problem::new(base)?;
    if !problem.check_nontrivial()?.nontrivial {
        return Err(Error::InvalidProblem("robustness margin needs a nontrivial base".into()));
    }
    let mut samples = 0;
    for &eps in ladder {
        if !(eps > 0.0) {
            return Err(Error::InvalidProblem("ladder values must be positive".into()));
        }
        let lo = (base.tau - eps).max(0.0);
        let hi = base.tau + eps;
        let mut ok = true;
        for s in 0..ROBUSTNESS_TAU_SAMPLES {
            let tt = lo + (hi - lo) * s as f64 / (ROBUSTNESS_TAU_SAMPLES - 1) as f64;
            samples += 1;
            let p = problem.reparametrize(base.bound + eps, tt)?;
            if p.check_nontrivial()?.margin <= 0.0 {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(RobustnessReport { epsilon0: eps, samples });
        }
    }
    Ok(RobustnessReport { epsilon0: 0.0, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{DomainSpec, Field};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const PI2: f64 = PI * PI;

    fn base(tau: f64) -> ProblemSpec {
        ProblemSpec::new(Field::unit(1, 1), DomainSpec::full(1.0).unwrap(), 0.1, 0.5, tau)
            .with_modes(16)
    }

    fn closed_form_t(m: f64) -> f64 {
        ((1.0 - m) / 0.1).ln() / PI2
    }

    #[test]
    fn closed_form_row_with_trivial_cell() {
        let grid = SweepGrid { m_values: vec![0.3, 0.5, 0.7, 0.95], tau_values: vec![0.0], base: base(0.0) };
        let res = run_sweep(&grid).unwrap();
        assert!(res.failures.is_empty());
        for (i, &m) in [0.3, 0.5, 0.7].iter().enumerate() {
            let c = res.cell(i, 0).outcome.as_ref().unwrap();
            assert_eq!(c.status, Status::Nontrivial);
            assert_relative_eq!(c.t_star, closed_form_t(m), epsilon = 1e-7);
        }
        let last = res.cell(3, 0).outcome.as_ref().unwrap();
        assert_eq!(last.status, Status::Trivial);
        assert_eq!(last.t_star, 0.0);
        assert!(last.certificate.is_none());

        let rep = check_monotone_in_m(&res);
        assert!(rep.passed());
        assert_eq!(rep.columns[0].compared_pairs, 2);
        let expected = closed_form_t(0.3) - closed_form_t(0.5);
        assert_relative_eq!(rep.min_decrement().unwrap(), expected, epsilon = 1e-7);
        assert_relative_eq!(expected, 0.0341, epsilon = 1e-4);
    }

    #[test]
    fn single_cell_matches_direct_solve() {
        let grid = SweepGrid { m_values: vec![0.5], tau_values: vec![0.05], base: base(0.0) };
        let res = run_sweep(&grid).unwrap();
        let direct = Problem::new(&base(0.05)).unwrap().solve().unwrap();
        let c = res.cell(0, 0).outcome.as_ref().unwrap();
        assert_eq!(c.t_star, direct.t_star);
        assert!(check_monotone_in_m(&res).columns[0].skipped());
    }

    #[test]
    fn grid_validation() {
        let mut g = SweepGrid { m_values: vec![0.5, 0.3], tau_values: vec![0.0], base: base(0.0) };
        assert!(run_sweep(&g).is_err());
        g.m_values = vec![];
        assert!(run_sweep(&g).is_err());
    }

    #[test]
    fn continuity_spot_value() {
        let t0 = Problem::new(&base(0.0)).unwrap().solve().unwrap().t_star;
        let p = Problem::new(&base(0.0)).unwrap().reparametrize(0.51, 0.0).unwrap();
        let t1 = p.solve().unwrap().t_star;
        assert_relative_eq!((t1 - t0).abs(), (0.5f64 / 0.49).ln() / PI2, epsilon = 1e-7);
        assert_relative_eq!((t1 - t0).abs(), 0.002_046, epsilon = 1e-6);
    }

    #[test]
    fn robustness_ladder_descends_past_failing_rungs() {
        let rep = robustness_margin(&base(0.0), &[0.1, 0.05, 0.02, 0.01]).unwrap();
        // e^{-π²ε} - (0.5 + ε) > 0.1 fails at ε = 0.05 and holds at ε = 0.02
        assert_eq!(rep.epsilon0, 0.02);

        let all_fail = robustness_margin(&base(0.0), &[0.6, 0.55]).unwrap();
        assert_eq!(all_fail.epsilon0, 0.0);

        let mut trivial = base(0.0);
        trivial.bound = 2.0;
        assert!(robustness_margin(&trivial, &[0.01]).is_err());
    }

    #[test]
    fn control_convergence_closed_form() {
        let rep = check_control_convergence(&base(0.0), 8).unwrap();
        for s in &rep.steps {
            assert_relative_eq!(s.error, 2f64.powi(-(s.n as i32)) * 0.05, epsilon = 1e-9);
            assert!(s.bang_bang_residual < 1e-9);
        }
        assert!(rep.passed());
    }
}
