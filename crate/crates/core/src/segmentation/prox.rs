use crate::Real;

/// Soft threshold, the proximal map of `lambda |x|`.
#[inline]
pub fn soft_shrink<T: Real>(x: T, lambda: T) -> T {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        T::zero()
    }
}

/// Shrink a vector towards zero along its direction, the proximal map of
/// `threshold * ||g||_2`: `g * max(0, 1 - threshold / ||g||)`.
pub fn group_shrink<T: Real>(g: &mut [T], threshold: T) {
    let norm = g.iter().map(|&x| x * x).sum::<T>().sqrt();
    let factor = if norm > threshold { T::one() - threshold / norm } else { T::zero() };
    g.iter_mut().for_each(|x| *x *= factor);
}

/// Euclidean projection onto the probability simplex.
///
/// Project onto the hyperplane `sum x = 1`; while some coordinates come out
/// negative, pin them to zero and repeat on the remaining coordinates. Each
/// round pins at least one coordinate, so it ends after at most `q` rounds.
pub fn project_simplex<T: Real>(g: &[T]) -> Vec<T> {
    let q = g.len();
    let mut free = vec![true; q];
    let mut x = vec![T::zero(); q];
    let mut count = q;
    loop {
        let sum: T = g.iter().zip(&free).filter(|(_, &f)| f).map(|(&v, _)| v).sum();
        let shift = (T::one() - sum) / T::of_usize(count);
        let mut pinned = false;
        for k in 0..q {
            if free[k] {
                x[k] = g[k] + shift;
                if x[k] < T::zero() {
                    pinned = true;
                }
            }
        }
        if !pinned {
            return x;
        }
        for k in 0..q {
            if free[k] && x[k] < T::zero() {
                free[k] = false;
                x[k] = T::zero();
                count -= 1;
            }
        }
    }
}
