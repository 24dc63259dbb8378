//! Named initial states.
//!
//! * `mode:k`: the k-th eigenmode.
//! * `mixture:c1,c2,…`: explicit leading coefficients.
//! * `bump:center,width`: projection of the C∞ bump `exp(-1/(1-s²))`,
//!   `s = (x-center)/width`, normalized to unit L² norm.
//! * `random:seed,decay`: `c_k = decay^k·g_k` with `g_k` standard normal from
//!   a ChaCha8 stream, normalized to unit L² norm.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::spectral::{Field, SpectralBasis};

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Mode(usize),
    Mixture(Vec<f64>),
    Bump { center: f64, width: f64 },
    Random { seed: u64, decay: f64 },
}

impl InitialState {
    pub fn to_field(&self, basis: &SpectralBasis) -> Result<Field> {
        let n = basis.n_modes();
        match self {
            InitialState::Mode(k) => {
                if *k == 0 || *k > n {
                    return Err(Error::InvalidProblem(format!("mode {k} outside 1..={n}")));
                }
                Ok(Field::unit(n, *k))
            }
            InitialState::Mixture(c) => {
                if c.len() > n {
                    return Err(Error::InvalidProblem(format!(
                        "mixture has {} coefficients but only {n} modes",
                        c.len()
                    )));
                }
                Ok(Field::from_slice(c).resized(n))
            }
            InitialState::Bump { center, width } => bump(basis, *center, *width),
            InitialState::Random { seed, decay } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut w = 1.0;
                let coeffs: Vec<f64> = (0..n)
                    .map(|_| {
                        w *= decay;
                        let g: f64 = StandardNormal.sample(&mut rng);
                        w * g
                    })
                    .collect();
                normalized(Field::from_vec(coeffs))
            }
        }
    }

    /// Same preset with a different seed (no-op for deterministic presets).
    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            InitialState::Random { decay, .. } => InitialState::Random { seed, decay: *decay },
            other => other.clone(),
        }
    }
}

fn normalized(f: Field) -> Result<Field> {
    let n = f.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidProblem("preset produced a zero or non-finite state".into()));
    }
    Ok(f.scale(1.0 / n))
}

fn bump(basis: &SpectralBasis, center: f64, width: f64) -> Result<Field> {
    let len = basis.length();
    if !(width > 0.0) || center - width < 0.0 || center + width > len {
        return Err(Error::InvalidProblem(format!(
            "bump support ({}, {}) must lie inside (0, {len})",
            center - width,
            center + width
        )));
    }
    let profile = |x: f64| {
        let s = (x - center) / width;
        if s.abs() < 1.0 { (-1.0 / (1.0 - s * s)).exp() } else { 0.0 }
    };
    // composite Simpson over the support; the integrand is smooth
    let panels = 4096;
    let (a, b) = (center - width, center + width);
    let h = (b - a) / panels as f64;
    let coeffs = (1..=basis.n_modes())
        .map(|k| {
            let f = |x: f64| profile(x) * basis.basis_fn(k, x);
            let mut acc = f(a) + f(b);
            for m in 1..panels {
                acc += if m % 2 == 1 { 4.0 } else { 2.0 } * f(a + m as f64 * h);
            }
            acc * h / 3.0
        })
        .collect();
    normalized(Field::from_vec(coeffs))
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Mode(k) => write!(f, "mode:{k}"),
            InitialState::Mixture(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "mixture:{}", parts.join(","))
            }
            InitialState::Bump { center, width } => write!(f, "bump:{center},{width}"),
            InitialState::Random { seed, decay } => write!(f, "random:{seed},{decay}"),
        }
    }
}

impl FromStr for InitialState {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| format!("initial state `{s}` must look like kind:args"))?;
        let floats = |n: Option<usize>| -> std::result::Result<Vec<f64>, String> {
            let v = args
                .split(',')
                .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err("non-finite coefficient".into());
            }
            match n {
                Some(n) if v.len() != n => Err(format!("{kind} takes {n} arguments")),
                _ => Ok(v),
            }
        };
        match kind {
            "mode" => args
                .trim()
                .parse::<usize>()
                .map(InitialState::Mode)
                .map_err(|e| format!("mode index `{args}`: {e}")),
            "mixture" => floats(None).map(InitialState::Mixture),
            "bump" => floats(Some(2)).map(|v| InitialState::Bump { center: v[0], width: v[1] }),
            "random" => {
                let (seed, decay) = args
                    .split_once(',')
                    .ok_or_else(|| "random takes seed,decay".to_string())?;
                let seed = seed.trim().parse::<u64>().map_err(|e| format!("seed `{seed}`: {e}"))?;
                let decay =
                    decay.trim().parse::<f64>().map_err(|e| format!("decay `{decay}`: {e}"))?;
                if !(decay > 0.0 && decay.is_finite()) {
                    return Err("decay must be positive".into());
                }
                Ok(InitialState::Random { seed, decay })
            }
            other => Err(format!("unknown initial state kind `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parse_and_display_agree() {
        for s in ["mode:3", "mixture:1,0.5,-0.25", "bump:0.4,0.1", "random:7,0.6"] {
            let p: InitialState = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("mode:x".parse::<InitialState>().is_err());
        assert!("bump:0.5".parse::<InitialState>().is_err());
        assert!("wave:1".parse::<InitialState>().is_err());
        assert!("random:1,-2".parse::<InitialState>().is_err());
    }

    #[test]
    fn presets_produce_expected_fields() {
        let b = SpectralBasis::new(1.0, 8).unwrap();
        assert_eq!(InitialState::Mode(2).to_field(&b).unwrap(), Field::unit(8, 2));
        assert!(InitialState::Mode(9).to_field(&b).is_err());
        let m = InitialState::Mixture(vec![1.0, 2.0]).to_field(&b).unwrap();
        assert_eq!(m.as_slice()[..3], [1.0, 2.0, 0.0]);

        let r1 = InitialState::Random { seed: 3, decay: 0.5 }.to_field(&b).unwrap();
        let r2 = InitialState::Random { seed: 3, decay: 0.5 }.to_field(&b).unwrap();
        let r3 = InitialState::Random { seed: 4, decay: 0.5 }.to_field(&b).unwrap();
        assert_eq!(r1, r2);
        assert_ne!(r1, r3);
        assert_relative_eq!(r1.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn bump_is_symmetric_about_center() {
        let b = SpectralBasis::new(1.0, 10).unwrap();
        let f = InitialState::Bump { center: 0.5, width: 0.2 }.to_field(&b).unwrap();
        assert_relative_eq!(f.norm(), 1.0, epsilon = 1e-12);
        // even modes are odd about x = 1/2
        for k in (1..10).step_by(2) {
            assert!(f.as_slice()[k].abs() < 1e-12);
        }
        assert!(InitialState::Bump { center: 0.05, width: 0.1 }.to_field(&b).is_err());
    }
}
