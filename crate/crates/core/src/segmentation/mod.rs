//! Convex multi-label segmentation.
//!
//! A relaxed labelling `u in [0,1]^{q N^2}` (layer-major, one layer per
//! label) minimises `<u, s> + R(u)` subject to every pixel's layers summing
//! to one. Two ADMM solvers are provided: [`admm_shearlet`], which exploits
//! the Parseval property for a closed-form `u` step, and [`admm_generic`]
//! for any [`LinearOp`](crate::regularizers::LinearOp) regularizer with
//! isotropic coupling (TV, non-local).

mod generic;
mod prox;
mod shearlet;

use std::io::{self, Write};

pub use generic::admm_generic;
pub use prox::{group_shrink, project_simplex, soft_shrink};
pub use shearlet::{admm_shearlet, u_update, ScaleWeights};

use crate::error::{Error, Result};
use crate::image::ImagePlane;
use crate::Real;

/// Codebook of `q >= 2` label colours, each with the image's channel count.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook<T> {
    entries: Vec<Vec<T>>,
}

impl<T: Real> Codebook<T> {
    pub fn new(entries: Vec<Vec<T>>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InvalidCodebook(format!("need at least 2 labels, got {}", entries.len())));
        }
        let channels = entries[0].len();
        if channels == 0 || entries.iter().any(|e| e.len() != channels) {
            return Err(Error::InvalidCodebook("every label needs the same, non-zero channel count".into()));
        }
        if entries.iter().flatten().any(|x| !x.is_finite() || *x < T::zero() || *x > T::one()) {
            return Err(Error::InvalidCodebook("entries must lie in [0, 1]".into()));
        }
        Ok(Self { entries })
    }

    /// Gray codebook from scalar levels.
    pub fn gray(levels: &[T]) -> Result<Self> {
        Self::new(levels.iter().map(|&x| vec![x]).collect())
    }

    pub fn labels(&self) -> usize {
        self.entries.len()
    }

    pub fn channels(&self) -> usize {
        self.entries[0].len()
    }

    pub fn entry(&self, k: usize) -> &[T] {
        &self.entries[k]
    }
}

/// Exponent `p` of the per-pixel distance `||f[r] - c[k]||_p^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataExponent {
    One,
    #[default]
    Two,
}

/// Layer-major per-label, per-pixel costs `s[r + k N^2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTerm<T> {
    labels: usize,
    pixels: usize,
    values: Vec<T>,
}

impl<T: Real> DataTerm<T> {
    pub fn from_values(labels: usize, pixels: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != labels * pixels {
            return Err(Error::DimensionMismatch { expected: labels * pixels, got: values.len() });
        }
        if labels < 2 {
            return Err(Error::InvalidCodebook("need at least 2 labels".into()));
        }
        Ok(Self { labels, pixels, values })
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn pixels(&self) -> usize {
        self.pixels
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn layer(&self, k: usize) -> &[T] {
        &self.values[k * self.pixels..(k + 1) * self.pixels]
    }

    /// Per-pixel label of minimal cost (lowest index on ties): the solution without regularizer.
    pub fn argmin_labels(&self) -> Vec<usize> {
        (0..self.pixels)
            .map(|r| {
                let mut best = 0;
                for k in 1..self.labels {
                    if self.values[k * self.pixels + r] < self.values[best * self.pixels + r] {
                        best = k;
                    }
                }
                best
            })
            .collect()
    }
}

/// Per-pixel, per-label distance between the image and the codebook.
pub fn data_term<T: Real>(image: &[ImagePlane<T>], codebook: &Codebook<T>, p: DataExponent) -> Result<DataTerm<T>> {
    if image.len() != codebook.channels() {
        return Err(Error::ChannelMismatch { image: image.len(), codebook: codebook.channels() });
    }
    let side = image[0].side();
    if let Some(bad) = image.iter().find(|c| c.side() != side) {
        return Err(Error::ShapeMismatch { expected: side, rows: bad.side(), cols: bad.side() });
    }
    let pixels = side * side;
    let q = codebook.labels();
    let mut values = vec![T::zero(); q * pixels];
    for k in 0..q {
        let entry = codebook.entry(k);
        let layer = &mut values[k * pixels..(k + 1) * pixels];
        for (ch, plane) in image.iter().enumerate() {
            for (s, &x) in layer.iter_mut().zip(plane.as_slice()) {
                let d = (x - entry[ch]).abs();
                *s += match p {
                    DataExponent::One => d,
                    DataExponent::Two => d * d,
                };
            }
        }
    }
    Ok(DataTerm { labels: q, pixels, values })
}

/// Relaxed labelling, same layout as [`DataTerm`].
#[derive(Debug, Clone, PartialEq)]
pub struct LabelField<T> {
    labels: usize,
    pixels: usize,
    values: Vec<T>,
}

impl<T: Real> LabelField<T> {
    pub fn from_values(labels: usize, pixels: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != labels * pixels {
            return Err(Error::DimensionMismatch { expected: labels * pixels, got: values.len() });
        }
        Ok(Self { labels, pixels, values })
    }

    /// Every pixel at `1/q` in every layer.
    pub fn uniform(labels: usize, pixels: usize) -> Self {
        Self { labels, pixels, values: vec![T::one() / T::of_usize(labels); labels * pixels] }
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn pixels(&self) -> usize {
        self.pixels
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn layer(&self, k: usize) -> &[T] {
        &self.values[k * self.pixels..(k + 1) * self.pixels]
    }

    /// Largest violation of the constraint set: box excursion or layer-sum error.
    pub fn feasibility_error(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.pixels {
            let mut sum = T::zero();
            for k in 0..self.labels {
                let x = self.values[k * self.pixels + r];
                sum += x;
                worst = worst.max(-x).max(x - T::one());
            }
            worst = worst.max((sum - T::one()).abs());
        }
        worst
    }
}

/// Per-pixel index of the largest layer, lowest index on ties. Labels are 0-based.
pub fn extract_labels<T: Real>(u: &LabelField<T>) -> Vec<usize> {
    (0..u.pixels)
        .map(|r| {
            let mut best = 0;
            for k in 1..u.labels {
                if u.values[k * u.pixels + r] > u.values[best * u.pixels + r] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Fraction of pixels whose labels differ.
pub fn mislabel_rate(labels: &[usize], truth: &[usize]) -> Result<f64> {
    if labels.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: labels.len() });
    }
    if labels.is_empty() {
        return Ok(0.0);
    }
    let wrong = labels.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / labels.len() as f64)
}

/// Step size, iteration budget and early-exit threshold shared by both solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmConfig<T> {
    pub gamma: T,
    pub max_iters: usize,
    /// Stop once `||u_new - u_old|| / ||u_old|| < tol`; `0` runs all `max_iters`.
    pub tol: T,
}

impl<T: Real> AdmmConfig<T> {
    pub fn new(gamma: T, max_iters: usize) -> Self {
        Self { gamma, max_iters, tol: T::zero() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > T::zero()) || !self.gamma.is_finite() {
            return Err(Error::InvalidConfig(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        if !(self.tol >= T::zero()) {
            return Err(Error::InvalidConfig(format!("tol must be non-negative, got {}", self.tol)));
        }
        Ok(())
    }
}

/// One line of the convergence log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    /// `||u - w||_inf`
    pub primal_gap: T,
    /// `<u, s> + R(u)` at the current `u`.
    pub energy: T,
    /// `||u - u_prev|| / ||u_prev||`
    pub relative_change: T,
}

/// Solver output: the feasible field `w`, the last unconstrained `u`, and the log.
#[derive(Debug, Clone)]
pub struct AdmmResult<T> {
    pub field: LabelField<T>,
    pub u: Vec<T>,
    pub history: Vec<IterationRecord<T>>,
}

impl<T: Real> AdmmResult<T> {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn labels(&self) -> Vec<usize> {
        extract_labels(&self.field)
    }
}

/// Write the convergence log as CSV.
pub fn write_log<T: Real, W: Write>(history: &[IterationRecord<T>], mut w: W) -> io::Result<()> {
    writeln!(w, "iteration,primal_gap,energy,relative_change")?;
    for rec in history {
        writeln!(
            w,
            "{},{:e},{:e},{:e}",
            rec.iteration,
            rec.primal_gap.as_f64(),
            rec.energy.as_f64(),
            rec.relative_change.as_f64()
        )?;
    }
    Ok(())
}

/// State shared by both solvers: the `w` block with its multiplier.
struct SimplexBlock<T> {
    labels: usize,
    pixels: usize,
    w: Vec<T>,
    b_w: Vec<T>,
}

impl<T: Real> SimplexBlock<T> {
    fn new(labels: usize, pixels: usize) -> Self {
        let n = labels * pixels;
        Self { labels, pixels, w: vec![T::one() / T::of_usize(labels); n], b_w: vec![T::zero(); n] }
    }

    /// `g = b_w + u; w = P_C(g); b_w = g - w`, pixel by pixel.
    fn update(&mut self, u: &[T]) {
        let (q, p) = (self.labels, self.pixels);
        let mut g = vec![T::zero(); q];
        for r in 0..p {
            for k in 0..q {
                g[k] = self.b_w[k * p + r] + u[k * p + r];
            }
            let x = project_simplex(&g);
            for k in 0..q {
                self.w[k * p + r] = x[k];
                self.b_w[k * p + r] = g[k] - x[k];
            }
        }
    }

    fn gap(&self, u: &[T]) -> T {
        u.iter().zip(&self.w).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    fn into_field(self) -> LabelField<T> {
        LabelField { labels: self.labels, pixels: self.pixels, values: self.w }
    }
}

fn all_finite<T: Real>(x: &[T]) -> bool {
    x.iter().all(|v| v.is_finite())
}

fn relative_change<T: Real>(new: &[T], old: &[T]) -> T {
    let (mut num, mut den) = (T::zero(), T::zero());
    for (a, b) in new.iter().zip(old) {
        num += (*a - *b) * (*a - *b);
        den += *b * *b;
    }
    if den > T::zero() {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codebook_validation() {
        assert!(Codebook::<f64>::gray(&[0.5]).is_err());
        assert!(Codebook::<f64>::gray(&[0.0, 1.5]).is_err());
        assert!(Codebook::<f64>::new(vec![vec![0.0, 0.0], vec![1.0]]).is_err());
        let fish = Codebook::<f64>::new(vec![
            vec![0.7451, 0.8314, 0.8196],
            vec![0.1843, 0.2784, 0.2275],
            vec![0.3686, 0.5569, 0.6353],
            vec![0.8353, 0.7333, 0.3020],
        ])
        .unwrap();
        assert_eq!((fish.labels(), fish.channels()), (4, 3));
    }

    #[test]
    fn data_term_examples() {
        let cb = Codebook::<f64>::gray(&[0.0, 1.0]).unwrap();
        let f = ImagePlane::filled(2, 0.5);
        let s = data_term(&[f], &cb, DataExponent::Two).unwrap();
        assert!(s.as_slice().iter().all(|&x| (x - 0.25).abs() < 1e-15));

        let f = ImagePlane::filled(2, 1.0);
        let s = data_term(std::slice::from_ref(&f), &cb, DataExponent::One).unwrap();
        assert!(s.layer(1).iter().all(|&x| x == 0.0));
        assert!(s.layer(0).iter().all(|&x| x == 1.0));

        let rgb = Codebook::<f64>::new(vec![vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]]).unwrap();
        let planes = [ImagePlane::filled(2, 1.0), ImagePlane::zeros(2), ImagePlane::zeros(2)];
        let s = data_term(&planes, &rgb, DataExponent::Two).unwrap();
        assert_eq!(s.layer(0), &[1.0; 4]);
        assert_eq!(s.layer(1), &[2.0; 4]);

        assert!(matches!(data_term(&[f], &rgb, DataExponent::Two), Err(Error::ChannelMismatch { .. })));
    }

    #[test]
    fn label_extraction() {
        let u = LabelField::<f64>::from_values(2, 3, vec![1.0, 0.0, 0.5, 0.0, 1.0, 0.5]).unwrap();
        assert_eq!(extract_labels(&u), vec![0, 1, 0]);
        let u = LabelField::<f64>::from_values(3, 1, vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(extract_labels(&u), vec![2]);
    }

    #[test]
    fn mislabel_rates() {
        let a = vec![0usize; 100];
        assert_eq!(mislabel_rate(&a, &a).unwrap(), 0.0);
        assert_eq!(mislabel_rate(&a, &[1; 100]).unwrap(), 1.0);
        let mut b = a.clone();
        b[17] = 1;
        assert!((mislabel_rate(&a, &b).unwrap() - 0.01).abs() < 1e-15);
        assert!(mislabel_rate(&a, &b[..99]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(AdmmConfig::new(0.0f64, 10).validate().is_err());
        assert!(AdmmConfig::new(1.0f64, 0).validate().is_err());
        assert!(AdmmConfig { gamma: 1.0f64, max_iters: 1, tol: -1.0 }.validate().is_err());
        assert!(AdmmConfig::new(0.05f64, 10).validate().is_ok());
    }

    #[test]
    fn feasibility_measure() {
        assert_eq!(LabelField::<f64>::uniform(4, 9).feasibility_error(), 0.0);
        let u = LabelField::<f64>::from_values(2, 1, vec![1.2, -0.2]).unwrap();
        assert!((u.feasibility_error() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn log_format() {
        let rec = IterationRecord { iteration: 1, primal_gap: 0.5f64, energy: 2.0, relative_change: 1.0 };
        let mut buf = Vec::new();
        write_log(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iteration,primal_gap,energy"));
        assert_eq!(text.lines().count(), 2);
    }
}
