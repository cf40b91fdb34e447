use num_complex::Complex64;

use super::EngineError;

/// Element count above which a buffer is refused.
const MAX_ELEMENTS: usize = 1 << 28;

/// Truncated storage for two-time variables `b(t_i, t_j)`, `i ≥ j`.
///
/// Line `j` is opened at step `j` and evolves until its offset `i − j`
/// reaches `width`. Each line keeps a ring of the last
/// `min(width, delay_steps) + 1` values, which is everything a delayed
/// lookup can reach, and `max(width, delay_steps) + 2` lines are retained.
#[derive(Debug, Clone)]
pub struct BandBuffer {
    vars: usize,
    width: usize,
    delay_steps: usize,
    lines: usize,
    ring: usize,
    data: Vec<Complex64>,
}

impl BandBuffer {
    pub fn new(vars: usize, width: usize, delay_steps: usize) -> Result<Self, EngineError> {
        let width = width.max(1);
        let lines = width.max(delay_steps) + 2;
        let ring = width.min(delay_steps) + 1;
        let elements = vars
            .checked_mul(lines)
            .and_then(|x| x.checked_mul(ring))
            .filter(|&x| x <= MAX_ELEMENTS)
            .ok_or(EngineError::StorageTooLarge { vars, lines, ring })?;
        Ok(Self {
            vars,
            width,
            delay_steps,
            lines,
            ring,
            data: vec![Complex64::new(0.0, 0.0); elements],
        })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Largest stored offset `i − j`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn delay_steps(&self) -> usize {
        self.delay_steps
    }

    pub fn lines(&self) -> usize {
        self.lines
    }

    pub fn ring(&self) -> usize {
        self.ring
    }

    #[inline]
    fn slot(&self, var: usize, i: usize, j: usize) -> usize {
        (var * self.lines + j % self.lines) * self.ring + i % self.ring
    }

    /// `b_var(t_i, t_j)`. Zero below the diagonal, before the start, and past
    /// the truncation width.
    #[inline]
    pub fn get(&self, var: usize, i: i64, j: i64) -> Complex64 {
        if j < 0 || i < j || (i - j) as usize > self.width {
            return Complex64::new(0.0, 0.0);
        }
        self.data[self.slot(var, i as usize, j as usize)]
    }

    #[inline]
    pub(crate) fn set(&mut self, var: usize, i: usize, j: usize, value: Complex64) {
        debug_assert!(i >= j && i - j <= self.width);
        let s = self.slot(var, i, j);
        self.data[s] = value;
    }

    /// Whether `(i, j)` is still held once step `current` is complete.
    pub fn retains(&self, i: usize, j: usize, current: usize) -> bool {
        if i < j || i > current || i - j > self.width || j + self.lines <= current + 1 {
            return false;
        }
        let last = current.min(j + self.width);
        last - i < self.ring
    }
}
