//! Ball-constrained least-norm subproblem at a fixed observation time.
//!
//! For `T ≥ τ` the terminal state is affine in the control,
//! `y(T) = b + A·u` with `b = D_T y0` and `A = D_{T-τ} B`, where `D_t` is the
//! diagonal semigroup and `B` the impulse operator. The subproblem computes
//! `d(T) = min_{‖u‖≤M} ‖b + A·u‖` and its minimizer.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::spectral::{Field, ImpulseOperator, SpectralBasis};

#[derive(Debug, Clone, PartialEq)]
pub struct TerminalMap {
    pub a: DMatrix<f64>,
    pub b: Field,
    pub t: f64,
    pub tau: f64,
}

impl TerminalMap {
    /// Build a map directly from `A` and `b` (used for synthetic instances).
    pub fn from_parts(a: DMatrix<f64>, b: Field) -> Result<Self> {
        if !a.is_square() || a.nrows() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.len() });
        }
        Ok(Self { a, b, t: 0.0, tau: 0.0 })
    }

    pub fn terminal(&self, u: &Field) -> Field {
        Field::from(&self.a * u.coeffs() + self.b.coeffs())
    }

    pub fn value(&self, u: &Field) -> f64 {
        self.terminal(u).norm()
    }

    /// `Aᵀ(b + A·u)`, the gradient of `½‖b + A·u‖²`.
    pub fn gradient(&self, u: &Field) -> Field {
        Field::from(self.a.tr_mul(self.terminal(u).coeffs()))
    }
}

pub fn assemble_terminal_map(
    basis: &SpectralBasis,
    impulse: &ImpulseOperator,
    y0: &Field,
    tau: f64,
    t: f64,
) -> Result<TerminalMap> {
    basis.check_len(y0)?;
    if !(t.is_finite() && tau.is_finite()) {
        return Err(Error::NonFinite("time"));
    }
    if tau < 0.0 {
        return Err(Error::NegativeTime(tau));
    }
    if t < tau {
        return Err(Error::TimeBeforeImpulse { t, tau });
    }
    let after = basis.decay_factors(t - tau)?;
    let mut a = impulse.matrix().clone();
    for (mut row, d) in a.row_iter_mut().zip(after.iter()) {
        row *= *d;
    }
    let b = basis.semigroup_apply(y0, t)?;
    Ok(TerminalMap { a, b, t, tau })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub u: Field,
    pub value: f64,
    /// Lagrange multiplier of `‖u‖² ≤ M²`. Infinite when `M = 0` and the
    /// constraint binds (no finite multiplier exists).
    pub multiplier: f64,
    pub active: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularOptions {
    /// Relative tolerance on `|‖u(μ)‖ - M| ≤ tol·M`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SecularOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200 }
    }
}

/// SVD of `A` with `β = Uᵀb`, enough to evaluate `u(μ)` for any `μ ≥ 0`.
struct SecularSystem {
    v: DMatrix<f64>,
    sigma: DVector<f64>,
    beta: DVector<f64>,
}

impl SecularSystem {
    fn new(map: &TerminalMap) -> Self {
        let svd = SVD::new(map.a.clone(), true, true);
        let u = svd.u.expect("left singular vectors requested");
        let v_t = svd.v_t.expect("right singular vectors requested");
        let beta = u.tr_mul(map.b.coeffs());
        Self { v: v_t.transpose(), sigma: svd.singular_values, beta }
    }

    /// Coefficients of `-u(μ)` in the right singular basis.
    fn weights(&self, mu: f64) -> DVector<f64> {
        self.sigma.zip_map(&self.beta, |s, b| {
            if mu == 0.0 {
                if s > 0.0 { b / s } else { 0.0 }
            } else {
                s * b / (s * s + mu)
            }
        })
    }

    fn norm(&self, mu: f64) -> f64 {
        self.weights(mu).norm()
    }

    /// Derivative of `‖u(μ)‖²` with respect to `μ`.
    fn norm_sq_derivative(&self, mu: f64) -> f64 {
        self.sigma
            .iter()
            .zip(self.beta.iter())
            .map(|(&s, &b)| {
                let den = s * s + mu;
                -2.0 * (s * b).powi(2) / (den * den * den)
            })
            .sum()
    }

    fn control(&self, mu: f64) -> Field {
        Field::from(-(&self.v * self.weights(mu)))
    }
}

/// Solves `min ‖b + A·u‖` over `‖u‖ ≤ M` through the SVD of `A` and the
/// secular equation `‖u(μ)‖ = M`, `u(μ) = -(AᵀA + μI)⁻¹Aᵀb`.
pub fn solve_ball_least_norm(
    map: &TerminalMap,
    bound: f64,
    opts: SecularOptions,
) -> Result<SubproblemSolution> {
    if bound.is_nan() {
        return Err(Error::NonFinite("control bound"));
    }
    if bound < 0.0 {
        return Err(Error::NegativeBound(bound));
    }
    let n = map.b.len();
    if map.b.coeffs().iter().all(|&c| c == 0.0) {
        return Ok(SubproblemSolution {
            u: Field::zeros(n),
            value: 0.0,
            multiplier: 0.0,
            active: false,
            iterations: 0,
        });
    }
    if bound == 0.0 {
        return Ok(SubproblemSolution {
            u: Field::zeros(n),
            value: map.b.norm(),
            multiplier: f64::INFINITY,
            active: true,
            iterations: 0,
        });
    }

    let sys = SecularSystem::new(map);
    if sys.norm(0.0) <= bound {
        let u = sys.control(0.0);
        return Ok(SubproblemSolution {
            value: map.value(&u),
            u,
            multiplier: 0.0,
            active: false,
            iterations: 0,
        });
    }

    // ‖u(μ)‖ ≤ ‖Aᵀb‖/μ, so the root lies below this.
    let mut hi = map.a.tr_mul(map.b.coeffs()).norm() / bound;
    let mut lo = 0.0_f64;
    let mut mu = hi;
    let target = 1.0 / bound;
    for it in 1..=opts.max_iter {
        let norm = sys.norm(mu);
        let gap = norm - bound;
        if gap.abs() <= opts.tol * bound {
            let u = sys.control(mu);
            return Ok(SubproblemSolution {
                value: map.value(&u),
                u,
                multiplier: mu,
                active: true,
                iterations: it,
            });
        }
        if gap > 0.0 {
            lo = lo.max(mu);
        } else {
            hi = hi.min(mu);
        }
        // Newton on ψ(μ) = 1/‖u(μ)‖ - 1/M, which is close to linear in μ.
        let dn2 = sys.norm_sq_derivative(mu);
        let psi = 1.0 / norm - target;
        let dpsi = -dn2 / (2.0 * norm.powi(3));
        let newton = mu - psi / dpsi;
        mu = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else if lo == 0.0 {
            hi * 1e-3
        } else if hi > 1e3 * lo {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::SecularNotConverged {
        iterations: opts.max_iter,
        gap: (sys.norm(mu) - bound).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    /// Stop once `‖u_{k+1} - u_k‖ ≤ tol·M`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { tol: 1e-14, max_iter: 200_000 }
    }
}

/// Iterates the optimality formula `u = -M·Aᵀ(b+Au)/‖Aᵀ(b+Au)‖`.
///
/// Each step takes `v = s·u - Aᵀ(b+Au)` with `s ≈ ‖A‖²` and maps it back to
/// the ball, rescaling to `‖u‖ = M` whenever `‖v‖ > s·M`. On the sphere this
/// is the optimality formula with a shift (same fixed points), overall it is
/// projected gradient with step `1/s`, so it converges from any start.
/// Ending strictly inside the ball means the constraint is inactive.
pub fn solve_ball_fixed_point(
    map: &TerminalMap,
    bound: f64,
    u_init: &Field,
    opts: FixedPointOptions,
) -> Result<SubproblemSolution> {
    if bound.is_nan() {
        return Err(Error::NonFinite("control bound"));
    }
    if bound <= 0.0 {
        return Err(Error::NegativeBound(bound));
    }
    if u_init.len() != map.b.len() {
        return Err(Error::DimensionMismatch { expected: map.b.len(), got: u_init.len() });
    }
    if map.b.coeffs().iter().all(|&c| c == 0.0) {
        return Err(Error::ConstraintInactive);
    }
    let frobenius = map.a.norm_squared();
    let shift = (1.05 * gram_spectral_radius(&map.a)).min(frobenius);
    if !(shift > 0.0) {
        return Err(Error::ConstraintInactive);
    }
    let mut u = project_to_ball(u_init.clone(), bound);

    let mut step = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let v = &u.scale(shift) - &map.gradient(&u);
        if !v.is_finite() {
            return Err(Error::NonFinite("fixed-point iterate"));
        }
        let next = project_to_ball(v.scale(1.0 / shift), bound);
        step = (&next - &u).norm();
        u = next;
        if step <= opts.tol * bound {
            if u.norm() < bound * (1.0 - 1e-12) {
                return Err(Error::ConstraintInactive);
            }
            let grad = map.gradient(&u);
            let multiplier = -u.inner(&grad) / (bound * bound);
            if multiplier <= 0.0 {
                return Err(Error::ConstraintInactive);
            }
            return Ok(SubproblemSolution {
                value: map.value(&u),
                u,
                multiplier,
                active: true,
                iterations: it,
            });
        }
    }
    Err(Error::FixedPointNotConverged { iterations: opts.max_iter, step })
}

fn project_to_ball(u: Field, bound: f64) -> Field {
    let n = u.norm();
    if n > bound { u.scale(bound / n) } else { u }
}

/// Largest eigenvalue of `AᵀA` by power iteration.
fn gram_spectral_radius(a: &DMatrix<f64>) -> f64 {
    let n = a.ncols();
    let mut x = DVector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64);
    x /= x.norm();
    let mut est = 0.0;
    for _ in 0..500 {
        let y = a.tr_mul(&(a * &x));
        let ny = y.norm();
        if ny == 0.0 {
            return f64::MIN_POSITIVE;
        }
        let prev = est;
        est = ny;
        x = y / ny;
        if (est - prev).abs() <= 1e-12 * est {
            break;
        }
    }
    est
}
