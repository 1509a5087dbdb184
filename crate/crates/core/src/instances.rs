//! Named and random test elements.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{FsaError, Result};
use crate::matrix::CMat;
use crate::path::MatPath;

/// Target sup norm for random elements.
pub const RANDOM_NORM: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSpec {
    /// `0.99·(2s − 1)`, n = 1.
    ScalarLine,
    /// `0.9·[[2s−1, γ], [γ, 1−2s]]`.
    AvoidedCrossing(f64),
    ConstantDiag(Vec<f64>),
    /// `Σ_{q≤Q} A_q cos 2πqs + B_q sin 2πqs`, rescaled to norm 0.9.
    Random { n: usize, q: usize, seed: u64 },
}

impl InstanceSpec {
    pub fn build(&self, m: usize) -> Result<MatPath> {
        match self {
            Self::ScalarLine => MatPath::from_fn(1, m, |s| CMat::diag(&[0.99 * (2.0 * s - 1.0)])),
            Self::AvoidedCrossing(g) => MatPath::from_fn(2, m, |s| {
                let a = 2.0 * s - 1.0;
                CMat::from_real_rows(&[&[0.9 * a, 0.9 * g], &[0.9 * g, -0.9 * a]])
                    .expect("2x2 rows")
            }),
            Self::ConstantDiag(v) => {
                if v.is_empty() {
                    return Err(FsaError::EmptyMatrix);
                }
                MatPath::constant(&CMat::diag(v), m)
            }
            Self::Random { n, q, seed } => random_trig_path(*n, m, *q, *seed),
        }
    }
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ScalarLine => write!(f, "scalar-line"),
            Self::AvoidedCrossing(g) => write!(f, "avoided-crossing({g})"),
            Self::ConstantDiag(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "constant-diag({})", parts.join(","))
            }
            Self::Random { n, q, seed } => write!(f, "random(n={n},q={q},seed={seed})"),
        }
    }
}

fn parse_args(text: &str, name: &str) -> Result<Vec<f64>> {
    let inner = text
        .strip_prefix(name)
        .and_then(|r| r.trim().strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| FsaError::UnknownInstance(text.to_string()))?;
    inner
        .split(',')
        .map(|p| {
            // Accept the unicode minus sign as well.
            p.trim()
                .replace('\u{2212}', "-")
                .parse::<f64>()
                .map_err(|_| FsaError::UnknownInstance(text.to_string()))
        })
        .collect()
}

impl FromStr for InstanceSpec {
    type Err = FsaError;

    /// Parses a named instance. Random instances take their parameters from
    /// the command line and are not named here.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "scalar-line" {
            return Ok(Self::ScalarLine);
        }
        if s.starts_with("avoided-crossing") {
            let args = parse_args(s, "avoided-crossing")?;
            return match args.as_slice() {
                [g] if g.is_finite() => Ok(Self::AvoidedCrossing(*g)),
                _ => Err(FsaError::UnknownInstance(s.to_string())),
            };
        }
        if s.starts_with("constant-diag") {
            let args = parse_args(s, "constant-diag")?;
            if args.iter().any(|v| !v.is_finite()) {
                return Err(FsaError::UnknownInstance(s.to_string()));
            }
            return Ok(Self::ConstantDiag(args));
        }
        Err(FsaError::UnknownInstance(s.to_string()))
    }
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut h = CMat::zeros(n);
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        h.set(i, i, Complex64::new(d, 0.0));
        for j in i + 1..n {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let z = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            h.set(i, j, z);
            h.set(j, i, z.conj());
        }
    }
    h
}

/// Random Hermitian matrix with standard normal entries (GUE-like).
pub fn random_hermitian_seeded(n: usize, seed: u64) -> CMat {
    random_hermitian(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_trig_path(n: usize, m: usize, q: usize, seed: u64) -> Result<MatPath> {
    if n == 0 {
        return Err(FsaError::EmptyMatrix);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(CMat, CMat)> = (0..=q)
        .map(|_| (random_hermitian(n, &mut rng), random_hermitian(n, &mut rng)))
        .collect();
    let raw = MatPath::from_fn(n, m, |s| {
        coeffs
            .iter()
            .enumerate()
            .fold(CMat::zeros(n), |acc, (k, (a, b))| {
                let w = TAU * k as f64 * s;
                &(&acc + &a.scale(w.cos())) + &b.scale(w.sin())
            })
    })?;
    let norm = raw.sup_norm().value;
    if norm == 0.0 {
        return Ok(raw);
    }
    Ok(raw.scalar_mul(RANDOM_NORM / norm))
}
