use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::numeric::RngStream;
use crate::{Error, Result};

use super::{Direction, PairDataset};

/// Bumped whenever generated bytes for a fixed spec change.
pub const GENERATOR_VERSION: &str = "comic-gen-1";

/// Synthetic cause-effect families.
///
/// - `AN`: `Y = f(X) + E`, `f` drawn from a Gaussian process.
/// - `AN-s`: as `AN` with an injective sigmoid-type `f`.
/// - `LS`: `Y = f(X) + g(X)·E` with GP draws for `f` and `g`.
/// - `LS-s`: as `LS` with sigmoid-type `f`, `g`.
/// - `MN-U`: `Y = f(X)·E`, sigmoid-type `f`, `E ~ U[0.5, 1.5]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "AN")]
    An,
    #[serde(rename = "AN-s")]
    AnS,
    #[serde(rename = "LS")]
    Ls,
    #[serde(rename = "LS-s")]
    LsS,
    #[serde(rename = "MN-U")]
    MnU,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::An, Family::AnS, Family::Ls, Family::LsS, Family::MnU];

    pub fn name(self) -> &'static str {
        match self {
            Family::An => "AN",
            Family::AnS => "AN-s",
            Family::Ls => "LS",
            Family::LsS => "LS-s",
            Family::MnU => "MN-U",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('_', "-");
        Family::ALL
            .into_iter()
            .find(|f| f.name().to_ascii_uppercase() == norm)
            .ok_or_else(|| Error::argument(format!("unknown family {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n_pairs: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 {
            return Err(Error::argument("n_pairs must be at least 1"));
        }
        if self.n_samples < 2 {
            return Err(Error::argument(format!(
                "n_samples must be at least 2, got {}",
                self.n_samples
            )));
        }
        Ok(())
    }
}

/// Noise-free mechanism values at the sampled causes.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedTruth {
    /// `f(x_i)`.
    pub location: Vec<f64>,
    /// `g(x_i)` for location-scale families, 1 otherwise.
    pub scale: Vec<f64>,
}

const GP_JITTER: f64 = 1e-8;
const GP_MAX_JITTER: f64 = 1e-4;
const LS_SCALE_FLOOR: f64 = 0.3;

/// Lower Cholesky factor of a symmetric positive definite row-major matrix.
fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let row_j = j * n;
        let d = a[row_j + j] - l[row_j..row_j + j].iter().map(|v| v * v).sum::<f64>();
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        let ljj = d.sqrt();
        l[row_j + j] = ljj;
        for i in j + 1..n {
            let row_i = i * n;
            let dot: f64 = l[row_i..row_i + j]
                .iter()
                .zip(&l[row_j..row_j + j])
                .map(|(a, b)| a * b)
                .sum();
            l[row_i + j] = (a[row_i + j] - dot) / ljj;
        }
    }
    Some(l)
}

/// Draws a zero-mean GP function with a unit squared-exponential kernel at
/// the points `x`, escalating the diagonal jitter tenfold on failure.
fn gp_draw(x: &[f64], rng: &mut impl Rng) -> Result<Vec<f64>> {
    let n = x.len();
    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d = x[i] - x[j];
            kernel[i * n + j] = (-0.5 * d * d).exp();
        }
    }
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let mut jitter = GP_JITTER;
    loop {
        let mut k = kernel.clone();
        for i in 0..n {
            k[i * n + i] += jitter;
        }
        if let Some(l) = cholesky(&k, n) {
            return Ok((0..n)
                .map(|i| l[i * n..i * n + i + 1].iter().zip(&z).map(|(a, b)| a * b).sum())
                .collect());
        }
        jitter *= 10.0;
        if jitter > GP_MAX_JITTER * (1.0 + 1e-9) {
            return Err(Error::numeric("GP kernel Cholesky factorization"));
        }
    }
}

/// Injective sigmoid-type map `t -> a·b(t+c) / (1 + |b(t+c)|)` with random
/// amplitude, slope and offset.
#[derive(Clone, Copy, Debug)]
struct Sigmoid {
    a: f64,
    b: f64,
    c: f64,
}

impl Sigmoid {
    fn draw(rng: &mut impl Rng) -> Self {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        Self {
            a: sign * rng.random_range(1.0..3.0),
            b: rng.random_range(0.5..2.0),
            c: rng.random_range(-2.0..2.0),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let u = self.b * (t + self.c);
        self.a * u / (1.0 + u.abs())
    }
}

fn sigmoid_draw(x: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let s = Sigmoid::draw(rng);
    x.iter().map(|&t| s.eval(t)).collect()
}

/// Generates pair `index` of `spec` along with the mechanism values.
pub fn generate_pair_with_truth(spec: &GeneratorSpec, index: usize) -> Result<(PairDataset, GeneratedTruth)> {
    spec.validate()?;
    let stream = RngStream::new(spec.seed).tag("generate").tag(spec.family).tag(index);
    let mut rng = stream.rng();
    let n = spec.n_samples;
    let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();

    let (location, scale, y) = match spec.family {
        Family::An | Family::AnS | Family::Ls | Family::LsS => {
            let location = match spec.family {
                Family::An | Family::Ls => gp_draw(&x, &mut rng)?,
                _ => sigmoid_draw(&x, &mut rng),
            };
            let scale = match spec.family {
                Family::Ls => gp_draw(&x, &mut rng)?.iter().map(|g| g.abs() + LS_SCALE_FLOOR).collect(),
                Family::LsS => sigmoid_draw(&x, &mut rng)
                    .iter()
                    .map(|g| g.abs() + LS_SCALE_FLOOR)
                    .collect(),
                _ => vec![1.0; n],
            };
            let sigma = rng.random_range(0.2..0.6);
            let noise = Normal::new(0.0, sigma).map_err(|e| Error::argument(e.to_string()))?;
            let y = location
                .iter()
                .zip(&scale)
                .map(|(f, g)| f + g * noise.sample(&mut rng))
                .collect();
            (location, scale, y)
        }
        Family::MnU => {
            let location = sigmoid_draw(&x, &mut rng);
            let noise = Uniform::new(0.5, 1.5).map_err(|e| Error::argument(e.to_string()))?;
            let y = location.iter().map(|f| f * noise.sample(&mut rng)).collect();
            (location, vec![1.0; n], y)
        }
    };

    let pair = PairDataset::new(format!("{:04}", index + 1), x, y)?.with_label(Direction::XCausesY);
    Ok((pair, GeneratedTruth { location, scale }))
}

/// Generates pair `index` of `spec`; the first column is always the cause.
pub fn generate_pair(spec: &GeneratorSpec, index: usize) -> Result<PairDataset> {
    Ok(generate_pair_with_truth(spec, index)?.0)
}

/// All `n_pairs` pairs of `spec` with balanced ground truth: odd-indexed
/// pairs have their columns swapped and are labelled `y_causes_x`.
pub fn generate_benchmark(spec: &GeneratorSpec) -> Result<Vec<PairDataset>> {
    spec.validate()?;
    (0..spec.n_pairs)
        .map(|i| {
            let pair = generate_pair(spec, i)?;
            Ok(if i % 2 == 1 { pair.swapped() } else { pair })
        })
        .collect()
}
