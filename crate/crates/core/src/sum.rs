//! Fixed-width accumulators used for per-point moment sums.

/// Clouds larger than this are summed with Neumaier compensation.
pub const COMPENSATED_THRESHOLD: usize = 100_000;

/// Component-wise sum of `N`-wide rows, optionally compensated.
#[derive(Debug, Clone)]
pub struct Accumulator<const N: usize> {
    sum: [f64; N],
    comp: [f64; N],
    compensated: bool,
}

impl<const N: usize> Accumulator<N> {
    /// Picks the compensated mode when `count` exceeds
    /// [`COMPENSATED_THRESHOLD`].
    pub fn for_count(count: usize) -> Self {
        Self {
            sum: [0.0; N],
            comp: [0.0; N],
            compensated: count > COMPENSATED_THRESHOLD,
        }
    }

    #[inline]
    pub fn add(&mut self, row: &[f64; N]) {
        if self.compensated {
            for ((sum, comp), &x) in self.sum.iter_mut().zip(&mut self.comp).zip(row) {
                let s = *sum;
                let t = s + x;
                if s.abs() >= x.abs() {
                    *comp += (s - t) + x;
                } else {
                    *comp += (x - t) + s;
                }
                *sum = t;
            }
        } else {
            for (sum, &x) in self.sum.iter_mut().zip(row) {
                *sum += x;
            }
        }
    }

    pub fn total(&self) -> [f64; N] {
        let mut out = self.sum;
        for (o, c) in out.iter_mut().zip(&self.comp) {
            *o += c;
        }
        out
    }

    pub fn mean(&self, count: usize) -> [f64; N] {
        let n = count as f64;
        self.total().map(|s| s / n)
    }
}
