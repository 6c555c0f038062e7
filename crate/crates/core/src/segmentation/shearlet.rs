//! ADMM with the shearlet regularizer `|| Lambda (I_q ⊗ S) u ||_1`.
//!
//! Splitting `v = (I_q ⊗ S) u`, `w = u` gives `A^T A = 2 I` because
//! `S^T S = I`, so the `u` step is one synthesis per layer.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{ShearletSystem, SubbandKind};
use crate::segmentation::prox::soft_shrink;
use crate::segmentation::{
    all_finite, dot, relative_change, AdmmConfig, AdmmResult, DataTerm, IterationRecord, SimplexBlock,
};
use crate::Real;

/// Per-scale weights `(lambda_0, lambda_1, ..., lambda_j0)`: `lambda_0` for the
/// low-pass plane, `lambda_{j+1}` for every subband of scale `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleWeights<T>(Vec<T>);

impl<T: Real> ScaleWeights<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidConfig("scale weights must not be empty".into()));
        }
        if weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidConfig("scale weights must be finite and non-negative".into()));
        }
        Ok(Self(weights))
    }

    /// The same weight on the low-pass plane and every scale.
    pub fn uniform(lambda: T, scales: usize) -> Result<Self> {
        Self::new(vec![lambda; scales + 1])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// Resize to `1 + scales` entries, truncating or repeating the last
    /// weight, with a warning when the length changes.
    pub fn fit(mut self, scales: usize) -> Self {
        let want = scales + 1;
        if self.0.len() != want {
            log::warn!(
                "scale weight vector has {} entries, grid needs {}; {}",
                self.0.len(),
                want,
                if self.0.len() > want { "truncating" } else { "repeating the last entry" }
            );
            let last = *self.0.last().expect("non-empty");
            self.0.resize(want, last);
        }
        self
    }

    /// Threshold weight of every subband of `system`, in subband order.
    pub fn per_subband(&self, system: &ShearletSystem<T>) -> Result<Vec<T>> {
        let scales = system.grid().scales();
        if self.0.len() != scales + 1 {
            return Err(Error::InvalidConfig(format!("expected {} scale weights, got {}", scales + 1, self.0.len())));
        }
        Ok(system
            .subbands()
            .iter()
            .map(|sb| if sb.kind == SubbandKind::Lowpass { self.0[0] } else { self.0[sb.j + 1] })
            .collect())
    }
}

/// Closed-form `u` step of [`admm_shearlet`]: `u = (S^T (v - b_v) + (w - b_w) - gamma s) / 2`, layer by layer.
#[allow(clippy::too_many_arguments)]
pub fn u_update<T: Real>(
    system: &ShearletSystem<T>,
    v: &[T],
    b_v: &[T],
    w: &[T],
    b_w: &[T],
    s: &[T],
    gamma: T,
    u: &mut [T],
) -> Result<()> {
    let n2 = system.side() * system.side();
    let plane_len = system.len() * n2;
    let half = T::lit(0.5);
    let mut diff = vec![T::zero(); plane_len];
    for (layer, u_layer) in u.chunks_exact_mut(n2).enumerate() {
        let coeffs = layer * plane_len..(layer + 1) * plane_len;
        diff.par_iter_mut().zip(&v[coeffs.clone()]).zip(&b_v[coeffs]).for_each(|((d, &a), &b)| *d = a - b);
        system.synthesize_into(&diff, u_layer)?;
        let px = layer * n2..(layer + 1) * n2;
        for (((x, &wi), &bi), &si) in u_layer.iter_mut().zip(&w[px.clone()]).zip(&b_w[px.clone()]).zip(&s[px]) {
            *x = half * (*x + wi - bi - gamma * si);
        }
    }
    Ok(())
}

/// Segment with the shearlet regularizer.
///
/// Starts from `v = 0`, `b = 0`, `w = 1/q`, runs `cfg.max_iters` iterations
/// (or until the relative change of `u` drops below `cfg.tol`) and returns the
/// feasible iterate `w`.
pub fn admm_shearlet<T: Real>(
    s: &DataTerm<T>,
    system: &ShearletSystem<T>,
    weights: &ScaleWeights<T>,
    cfg: &AdmmConfig<T>,
) -> Result<AdmmResult<T>> {
    cfg.validate()?;
    let n2 = system.side() * system.side();
    if s.pixels() != n2 {
        return Err(Error::DimensionMismatch { expected: n2, got: s.pixels() });
    }
    let lambdas = weights.per_subband(system)?;
    let q = s.labels();
    let eta = system.len();
    let plane_len = eta * n2;
    let gamma = cfg.gamma;
    let thresholds: Vec<T> = lambdas.iter().map(|&l| gamma * l).collect();

    let mut v = vec![T::zero(); q * plane_len];
    let mut b_v = vec![T::zero(); q * plane_len];
    let mut simplex = SimplexBlock::new(q, n2);
    let mut u = vec![T::zero(); q * n2];
    let mut u_prev = simplex.w.clone();
    let mut su = vec![T::zero(); plane_len];
    let mut history = Vec::with_capacity(cfg.max_iters);

    for iteration in 1..=cfg.max_iters {
        u_update(system, &v, &b_v, &simplex.w, &simplex.b_w, s.as_slice(), gamma, &mut u)?;
        if !all_finite(&u) {
            return Err(Error::Diverged { iteration, stage: "u-update" });
        }

        let mut reg = T::zero();
        for layer in 0..q {
            system.analyze_into(&u[layer * n2..(layer + 1) * n2], &mut su)?;
            let range = layer * plane_len..(layer + 1) * plane_len;
            reg += v[range.clone()]
                .par_chunks_exact_mut(n2)
                .zip(b_v[range].par_chunks_exact_mut(n2))
                .zip(su.par_chunks_exact(n2))
                .enumerate()
                .map(|(sb, ((vp, bp), sp))| {
                    let (tau, lambda) = (thresholds[sb], lambdas[sb]);
                    let mut l1 = T::zero();
                    for ((vi, bi), &x) in vp.iter_mut().zip(bp.iter_mut()).zip(sp) {
                        let g = *bi + x;
                        *vi = soft_shrink(g, tau);
                        *bi = g - *vi;
                        l1 += x.abs();
                    }
                    lambda * l1
                })
                .sum::<T>();
        }
        if !all_finite(&v) {
            return Err(Error::Diverged { iteration, stage: "v-update" });
        }

        simplex.update(&u);
        if !all_finite(&simplex.w) {
            return Err(Error::Diverged { iteration, stage: "w-update" });
        }

        let change = relative_change(&u, &u_prev);
        history.push(IterationRecord {
            iteration,
            primal_gap: simplex.gap(&u),
            energy: dot(&u, s.as_slice()) + reg,
            relative_change: change,
        });
        log::debug!("shearlet admm {iteration}: gap {:e} change {:e}", simplex.gap(&u).as_f64(), change.as_f64());
        u_prev.copy_from_slice(&u);
        if cfg.tol > T::zero() && change < cfg.tol {
            break;
        }
    }

    Ok(AdmmResult { field: simplex.into_field(), u, history })
}
