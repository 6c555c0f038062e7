//! Patch-similarity neighbour graph and the non-local difference operator.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::ImagePlane;
use crate::regularizers::{GramStructure, LinearOp};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlParams {
    /// Patch side `p` (odd).
    pub patch: usize,
    /// Search window side (odd), centered on the reference pixel.
    pub window: usize,
    /// Standard deviation of the Gaussian patch weights.
    pub sigma: f64,
    /// Neighbour budget `m~`; rows of the graph hold at most `2 m~` edges.
    pub neighbors: usize,
}

impl Default for NlParams {
    fn default() -> Self {
        Self { patch: 5, window: 15, sigma: 2.0, neighbors: 5 }
    }
}

impl NlParams {
    pub fn validate(&self) -> Result<()> {
        if self.patch.is_multiple_of(2) || self.window.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "patch ({}) and window ({}) sides must be odd",
                self.patch, self.window
            )));
        }
        if !(self.sigma > 0.0) || self.neighbors == 0 {
            return Err(Error::InvalidParameter("sigma and neighbour budget must be positive".into()));
        }
        Ok(())
    }
}

/// Gaussian patch weights on a `p x p` stencil, normalised to unit sum.
#[derive(Debug, Clone)]
pub struct PatchKernel<T> {
    half: isize,
    weights: Vec<T>,
}

impl<T: Real> PatchKernel<T> {
    pub fn new(patch: usize, sigma: f64) -> Self {
        let half = (patch as isize - 1) / 2;
        let mut weights = Vec::with_capacity(patch * patch);
        for t1 in -half..=half {
            for t2 in -half..=half {
                let r2 = (t1 * t1 + t2 * t2) as f64;
                weights.push((-r2 / (2.0 * sigma * sigma)).exp());
            }
        }
        let total: f64 = weights.iter().sum();
        Self { half, weights: weights.into_iter().map(|w| T::lit(w / total)).collect() }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

/// Half-sample symmetric reflection into `0..n`.
#[inline]
fn reflect(i: isize, n: isize) -> usize {
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Gaussian-weighted squared difference of the patches around pixels `i` and
/// `j` (given as `(row, col)`), with mirror extension at the border.
pub fn patch_distance<T: Real>(f: &ImagePlane<T>, i: (usize, usize), j: (usize, usize), kernel: &PatchKernel<T>) -> T {
    let n = f.side() as isize;
    let h = kernel.half;
    let mut acc = T::zero();
    let mut w = kernel.weights.iter();
    for t1 in -h..=h {
        let ri = reflect(i.0 as isize + t1, n);
        let rj = reflect(j.0 as isize + t1, n);
        for t2 in -h..=h {
            let d = f.get(ri, reflect(i.1 as isize + t2, n)) - f.get(rj, reflect(j.1 as isize + t2, n));
            acc += *w.next().unwrap() * d * d;
        }
    }
    acc
}

/// Symmetric 0/1 adjacency over pixels, each row with at most `2 m~` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct NlGraph {
    side: usize,
    params: NlParams,
    /// Sorted neighbour lists per pixel (raster index).
    adjacency: Vec<Vec<u32>>,
}

impl NlGraph {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn params(&self) -> &NlParams {
        &self.params
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&(j as u32)).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Plain-text edge list, one undirected edge `i j` (`i < j`, raster indices) per line.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# side {} edges {}", self.side, self.edge_count())?;
        for (i, row) in self.adjacency.iter().enumerate() {
            for &j in row.iter().filter(|&&j| j as usize > i) {
                writeln!(w, "{i} {j}")?;
            }
        }
        Ok(())
    }
}

const ROW_BLOCK: usize = 8;

/// Build the neighbour graph of `f`.
///
/// Pixels are visited in raster order. Pixel `i`, already holding `l`
/// edges, links to the `max(0, min(m~, 2m~ - l))` most similar pixels `j`
/// of its search window that are not yet adjacent to `i` and still have
/// room (fewer than `2 m~` edges). Ties go to the lower raster index.
pub fn build_nl_graph<T: Real>(f: &ImagePlane<T>, params: NlParams) -> Result<NlGraph> {
    params.validate()?;
    let n = f.side();
    let kernel = PatchKernel::<T>::new(params.patch, params.sigma);
    let reach = (params.window / 2) as isize;
    let budget = params.neighbors;
    let cap = 2 * budget;
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n * n];

    for block_start in (0..n).step_by(ROW_BLOCK) {
        let block_end = (block_start + ROW_BLOCK).min(n);
        // rank candidates in parallel, link sequentially
        let ranked: Vec<Vec<u32>> = (block_start * n..block_end * n)
            .into_par_iter()
            .map(|i| {
                let (r, c) = (i / n, i % n);
                let mut cand: Vec<(T, u32)> = Vec::with_capacity(params.window * params.window);
                let rows = (r as isize - reach).max(0) as usize..=((r as isize + reach) as usize).min(n - 1);
                for rr in rows {
                    let cols = (c as isize - reach).max(0) as usize..=((c as isize + reach) as usize).min(n - 1);
                    for cc in cols {
                        let j = rr * n + cc;
                        if j != i {
                            cand.push((patch_distance(f, (r, c), (rr, cc), &kernel), j as u32));
                        }
                    }
                }
                cand.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
                cand.into_iter().map(|(_, j)| j).collect()
            })
            .collect();

        for (offset, candidates) in ranked.into_iter().enumerate() {
            let i = block_start * n + offset;
            let held = adjacency[i].len();
            let mut want = budget.min(cap.saturating_sub(held));
            for j in candidates {
                if want == 0 {
                    break;
                }
                let ju = j as usize;
                if adjacency[ju].len() >= cap || adjacency[i].contains(&j) {
                    continue;
                }
                adjacency[i].push(j);
                adjacency[ju].push(i as u32);
                want -= 1;
            }
        }
    }
    adjacency.iter_mut().for_each(|row| row.sort_unstable());
    Ok(NlGraph { side: n, params, adjacency })
}

/// Non-local difference operator `D`: `2 m~` blocks of `N^2` rows; row
/// `(b, i)` is `x[j] - x[i]` for the `b`-th neighbour `j` of `i`, or zero.
#[derive(Debug, Clone)]
pub struct NlOperator {
    pixels: usize,
    slots: usize,
    /// `slots * pixels` entries, `u32::MAX` for an empty slot.
    partner: Vec<u32>,
}

const EMPTY: u32 = u32::MAX;

impl NlOperator {
    pub fn new(graph: &NlGraph) -> Self {
        let pixels = graph.side * graph.side;
        let slots = 2 * graph.params.neighbors;
        let mut partner = vec![EMPTY; slots * pixels];
        for (i, row) in graph.adjacency.iter().enumerate() {
            for (b, &j) in row.iter().enumerate() {
                partner[b * pixels + i] = j;
            }
        }
        Self { pixels, slots, partner }
    }
}

impl<T: Real> LinearOp<T> for NlOperator {
    fn input_dim(&self) -> usize {
        self.pixels
    }

    fn output_dim(&self) -> usize {
        self.slots * self.pixels
    }

    fn apply(&self, x: &[T], out: &mut [T]) -> Result<()> {
        if x.len() != self.pixels || out.len() != self.partner.len() {
            return Err(Error::DimensionMismatch { expected: self.pixels, got: x.len() });
        }
        for (row, (&j, o)) in self.partner.iter().zip(out.iter_mut()).enumerate() {
            *o = if j == EMPTY { T::zero() } else { x[j as usize] - x[row % self.pixels] };
        }
        Ok(())
    }

    fn apply_adjoint(&self, y: &[T], out: &mut [T]) -> Result<()> {
        if out.len() != self.pixels || y.len() != self.partner.len() {
            return Err(Error::DimensionMismatch { expected: self.partner.len(), got: y.len() });
        }
        out.iter_mut().for_each(|o| *o = T::zero());
        for (row, (&j, &yv)) in self.partner.iter().zip(y).enumerate() {
            if j != EMPTY {
                out[j as usize] += yv;
                out[row % self.pixels] -= yv;
            }
        }
        Ok(())
    }

    fn gram_structure(&self) -> GramStructure<T> {
        GramStructure::General
    }
}
