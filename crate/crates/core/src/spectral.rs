//! Sine-eigenbasis discretization of the Dirichlet Laplacian on `(0, L)`.
//!
//! The basis functions are `φ_k(x) = √(2/L)·sin(kπx/L)` with eigenvalues
//! `λ_k = (kπ/L)²`. A state or control is a [`Field`] of coefficients in
//! this basis, so the heat semigroup is diagonal and the L² geometry is the
//! Euclidean one on coefficients.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// The spatial interval `(0, L)` together with the actuator interval `ω = (a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    length: f64,
    omega_lo: f64,
    omega_hi: f64,
}

impl DomainSpec {
    pub fn new(length: f64, omega_lo: f64, omega_hi: f64) -> Result<Self> {
        if !(length.is_finite() && omega_lo.is_finite() && omega_hi.is_finite()) {
            return Err(Error::NonFinite("domain"));
        }
        if length <= 0.0 {
            return Err(Error::InvalidDomain(format!("length must be positive (got {length})")));
        }
        if !(0.0 <= omega_lo && omega_lo < omega_hi && omega_hi <= length) {
            return Err(Error::InvalidDomain(format!(
                "actuator interval ({omega_lo}, {omega_hi}) must satisfy 0 <= a < b <= {length}"
            )));
        }
        Ok(Self { length, omega_lo, omega_hi })
    }

    /// Actuator covering the whole interval.
    pub fn full(length: f64) -> Result<Self> {
        Self::new(length, 0.0, length)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn omega_lo(&self) -> f64 {
        self.omega_lo
    }

    pub fn omega_hi(&self) -> f64 {
        self.omega_hi
    }

    pub fn is_full(&self) -> bool {
        self.omega_lo == 0.0 && self.omega_hi == self.length
    }
}

/// Coefficient vector of an L² function in the sine eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct Field(DVector<f64>);

impl Field {
    pub fn zeros(n: usize) -> Self {
        Field(DVector::zeros(n))
    }

    /// Unit vector on mode `k` (1-based, so `unit(n, 1)` is the first eigenmode).
    pub fn unit(n: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= n, "mode {k} out of range 1..={n}");
        let mut v = DVector::zeros(n);
        v[k - 1] = 1.0;
        Field(v)
    }

    pub fn from_vec(coeffs: Vec<f64>) -> Self {
        Field(DVector::from_vec(coeffs))
    }

    pub fn from_slice(coeffs: &[f64]) -> Self {
        Field(DVector::from_column_slice(coeffs))
    }

    /// Copy of `self` truncated or zero-padded to `n` modes.
    pub fn resized(&self, n: usize) -> Self {
        let mut v = DVector::zeros(n);
        let m = n.min(self.len());
        v.rows_mut(0, m).copy_from(&self.0.rows(0, m));
        Field(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn norm(&self) -> f64 {
        l2_norm(self)
    }

    pub fn inner(&self, other: &Field) -> f64 {
        inner(self, other)
    }

    pub fn scale(&self, s: f64) -> Field {
        Field(&self.0 * s)
    }
}

impl From<DVector<f64>> for Field {
    fn from(v: DVector<f64>) -> Self {
        Field(v)
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        Field(&self.0 + &rhs.0)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        Field(&self.0 - &rhs.0)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        Field(-&self.0)
    }
}

impl Mul<&Field> for f64 {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        Field(&rhs.0 * self)
    }
}

/// L² norm via Parseval.
pub fn l2_norm(f: &Field) -> f64 {
    f.0.norm()
}

/// L² inner product via Parseval.
pub fn inner(f: &Field, g: &Field) -> f64 {
    f.0.dot(&g.0)
}

/// First `N` Dirichlet eigenpairs on `(0, L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    length: f64,
    eigenvalues: Vec<f64>,
}

pub fn build_basis(domain: &DomainSpec, n_modes: usize) -> Result<SpectralBasis> {
    SpectralBasis::new(domain.length(), n_modes)
}

impl SpectralBasis {
    pub fn new(length: f64, n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidModes(n_modes));
        }
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::InvalidDomain(format!("length must be positive (got {length})")));
        }
        let eigenvalues = (1..=n_modes)
            .map(|k| {
                let w = k as f64 * PI / length;
                w * w
            })
            .collect();
        Ok(Self { length, eigenvalues })
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Smallest eigenvalue `λ_1 = (π/L)²`.
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Diagonal of `e^{tΔ}`: `e^{-λ_k t}` for each mode.
    pub fn decay_factors(&self, t: f64) -> Result<DVector<f64>> {
        check_time(t)?;
        Ok(DVector::from_iterator(
            self.n_modes(),
            self.eigenvalues.iter().map(|&l| (-l * t).exp()),
        ))
    }

    pub fn semigroup_apply(&self, f: &Field, t: f64) -> Result<Field> {
        self.check_len(f)?;
        let d = self.decay_factors(t)?;
        Ok(Field(f.0.component_mul(&d)))
    }

    /// Value of mode `k` (1-based) at `x`.
    pub fn basis_fn(&self, k: usize, x: f64) -> f64 {
        (2.0 / self.length).sqrt() * (k as f64 * PI * x / self.length).sin()
    }

    /// Point evaluation of the truncated series.
    pub fn evaluate(&self, f: &Field, x: f64) -> f64 {
        f.0.iter()
            .enumerate()
            .map(|(i, c)| c * self.basis_fn(i + 1, x))
            .sum()
    }

    pub(crate) fn check_len(&self, f: &Field) -> Result<()> {
        if f.len() != self.n_modes() {
            return Err(Error::DimensionMismatch { expected: self.n_modes(), got: f.len() });
        }
        Ok(())
    }
}

pub fn semigroup_apply(basis: &SpectralBasis, f: &Field, t: f64) -> Result<Field> {
    basis.semigroup_apply(f, t)
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() {
        return Err(Error::NonFinite("time"));
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// `sin(π x)` with exact zeros at integers and argument reduction mod 2.
fn sin_pi(x: f64) -> f64 {
    let m = x.rem_euclid(2.0);
    if m.fract() == 0.0 {
        return 0.0;
    }
    (PI * m).sin()
}

/// Galerkin compression `X_ij = ⟨φ_i, χ_ω φ_j⟩` of multiplication by the
/// actuator indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorMatrix(DMatrix<f64>);

impl IndicatorMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn apply(&self, f: &Field) -> Field {
        Field(&self.0 * &f.0)
    }
}

pub fn indicator_matrix(basis: &SpectralBasis, domain: &DomainSpec) -> IndicatorMatrix {
    let n = basis.n_modes();
    let len = basis.length();
    if domain.is_full() && domain.length() == len {
        return IndicatorMatrix(DMatrix::identity(n, n));
    }
    let fa = domain.omega_lo() / len;
    let fb = domain.omega_hi() / len;
    let width = (domain.omega_hi() - domain.omega_lo()) / len;
    // [sin(mπx/L)/(mπ)] evaluated between a and b
    let bracket = |m: usize| -> f64 {
        let mf = m as f64;
        (sin_pi(mf * fb) - sin_pi(mf * fa)) / (mf * PI)
    };
    let mut x = DMatrix::zeros(n, n);
    for i in 1..=n {
        x[(i - 1, i - 1)] = width - bracket(2 * i);
        for j in 1..i {
            let v = bracket(i - j) - bracket(i + j);
            x[(i - 1, j - 1)] = v;
            x[(j - 1, i - 1)] = v;
        }
    }
    IndicatorMatrix(x)
}

/// How the control enters the truncated state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControlSpace {
    /// Control is an arbitrary L² function supported in ω, written in an
    /// orthonormal basis of `span{χ_ω φ_k}`. The impulse operator is `X_ω^{1/2}`.
    #[default]
    Actuator,
    /// Control lives in the first N sine modes and the impulse adds `X_ω u`.
    Truncated,
}

impl ControlSpace {
    pub fn name(&self) -> &'static str {
        match self {
            ControlSpace::Actuator => "actuator",
            ControlSpace::Truncated => "truncated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "actuator" => Some(ControlSpace::Actuator),
            "truncated" => Some(ControlSpace::Truncated),
            _ => None,
        }
    }
}

/// Symmetric positive-definite matrix `B` such that the impulse at `τ` adds
/// `B·u` to the state coefficients, with `‖u‖` equal to the L² norm of the
/// control.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseOperator {
    space: ControlSpace,
    matrix: DMatrix<f64>,
}

impl ImpulseOperator {
    pub fn new(indicator: &IndicatorMatrix, space: ControlSpace) -> Self {
        let matrix = match space {
            ControlSpace::Truncated => indicator.0.clone(),
            ControlSpace::Actuator => symmetric_sqrt(&indicator.0),
        };
        Self { space, matrix }
    }

    pub fn space(&self) -> ControlSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, u: &Field) -> Field {
        Field(&self.matrix * &u.0)
    }
}

fn symmetric_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if *m == DMatrix::identity(n, n) {
        return m.clone();
    }
    let eig = SymmetricEigen::new(m.clone());
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    let s = v * DMatrix::from_diagonal(&roots) * v.transpose();
    // symmetrize away rounding
    (&s + s.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_basis(n: usize) -> SpectralBasis {
        SpectralBasis::new(1.0, n).unwrap()
    }

    #[test]
    fn eigenvalues_match_formula() {
        assert_relative_eq!(unit_basis(1).lambda1(), PI * PI, epsilon = 1e-14);
        let b = SpectralBasis::new(2.0, 2).unwrap();
        assert_relative_eq!(b.eigenvalues()[1], PI * PI, epsilon = 1e-13);
        let b = unit_basis(64);
        assert_relative_eq!(b.eigenvalues()[63], (64.0 * PI).powi(2), max_relative = 1e-15);
        assert!(b.eigenvalues().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn build_basis_rejects_bad_input() {
        let d = DomainSpec::full(1.0).unwrap();
        assert_eq!(build_basis(&d, 0), Err(Error::InvalidModes(0)));
        assert!(SpectralBasis::new(-1.0, 4).is_err());
        assert!(DomainSpec::new(0.0, 0.0, 0.0).is_err());
        assert!(DomainSpec::new(1.0, 0.5, 0.5).is_err());
        assert!(DomainSpec::new(1.0, 0.2, 1.1).is_err());
        assert!(DomainSpec::new(1.0, -0.1, 0.5).is_err());
    }

    #[test]
    fn semigroup_examples() {
        let b = unit_basis(8);
        let f = Field::from_vec((1..=8).map(|k| 1.0 / k as f64).collect());
        assert_eq!(b.semigroup_apply(&f, 0.0).unwrap(), f);

        let g = b.semigroup_apply(&Field::unit(8, 1), 0.1).unwrap();
        assert_relative_eq!(g.as_slice()[0], 0.372_708, epsilon = 1e-6);
        assert_relative_eq!(g.as_slice()[0], (-PI * PI / 10.0).exp(), epsilon = 1e-15);

        let h = &Field::unit(8, 1) + &Field::unit(8, 2);
        let far = b.semigroup_apply(&h, 50.0).unwrap();
        assert!(far.norm() < 1e-200);

        assert_eq!(b.semigroup_apply(&f, -1e-3), Err(Error::NegativeTime(-1e-3)));
    }

    #[test]
    fn norms_and_inner_products() {
        assert_eq!(l2_norm(&Field::zeros(4)), 0.0);
        assert_relative_eq!(l2_norm(&Field::unit(4, 1).scale(3.0)), 3.0);
        let f = &Field::unit(4, 1) + &Field::unit(4, 2);
        let g = &Field::unit(4, 1) - &Field::unit(4, 2);
        assert_eq!(inner(&f, &g), 0.0);
    }

    #[test]
    fn full_actuator_gives_identity() {
        let b = unit_basis(16);
        let x = indicator_matrix(&b, &DomainSpec::full(1.0).unwrap());
        assert_eq!(*x.matrix(), DMatrix::identity(16, 16));
        let imp = ImpulseOperator::new(&x, ControlSpace::Actuator);
        assert_eq!(*imp.matrix(), DMatrix::identity(16, 16));
    }

    #[test]
    fn half_interval_first_entry() {
        let b = unit_basis(6);
        let x = indicator_matrix(&b, &DomainSpec::new(1.0, 0.0, 0.5).unwrap());
        assert_relative_eq!(x.matrix()[(0, 0)], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn indicator_entries_match_quadrature() {
        let len = 2.0;
        let dom = DomainSpec::new(len, 0.3, 1.45).unwrap();
        let b = SpectralBasis::new(len, 7).unwrap();
        let x = indicator_matrix(&b, &dom);
        let steps = 4000;
        let h = (dom.omega_hi() - dom.omega_lo()) / steps as f64;
        for i in 1..=7 {
            for j in 1..=7 {
                // composite Simpson
                let f = |s: f64| b.basis_fn(i, s) * b.basis_fn(j, s);
                let mut acc = f(dom.omega_lo()) + f(dom.omega_hi());
                for m in 1..steps {
                    let w = if m % 2 == 1 { 4.0 } else { 2.0 };
                    acc += w * f(dom.omega_lo() + m as f64 * h);
                }
                let q = acc * h / 3.0;
                assert_relative_eq!(x.matrix()[(i - 1, j - 1)], q, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn actuator_sqrt_squares_back() {
        let b = unit_basis(12);
        let x = indicator_matrix(&b, &DomainSpec::new(1.0, 0.1, 0.35).unwrap());
        let s = ImpulseOperator::new(&x, ControlSpace::Actuator);
        let sq = s.matrix() * s.matrix();
        assert!((sq - x.matrix()).amax() < 1e-12);
        let t = ImpulseOperator::new(&x, ControlSpace::Truncated);
        assert_eq!(t.matrix(), x.matrix());
    }

    #[test]
    fn resize_pads_and_truncates() {
        let f = Field::from_vec(vec![1.0, 2.0, 3.0]);
        assert_eq!(f.resized(5).as_slice(), &[1.0, 2.0, 3.0, 0.0, 0.0]);
        assert_eq!(f.resized(2).as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn evaluate_reconstructs_mode() {
        let b = unit_basis(3);
        let f = Field::unit(3, 2);
        assert_relative_eq!(b.evaluate(&f, 0.25), 2f64.sqrt(), epsilon = 1e-14);
    }
}
