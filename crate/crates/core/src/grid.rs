//! Trigonometric tables on uniform grids `t_j = j T / M` and the direct
//! synthesis/analysis sums built on them.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// `sin(2 pi m / M)` and `cos(2 pi m / M)` for `m = 0..M`.
///
/// The sine table is exactly antisymmetric (`s[M - m] == -s[m]`) and the cosine
/// table exactly symmetric, so sampled odd series are odd to the last bit.
pub(crate) struct TrigTable {
    sin: Vec<f64>,
    cos: Vec<f64>,
}

impl TrigTable {
    pub(crate) fn new(points: usize) -> Self {
        let m_total = points;
        let mut sin = vec![0.0; m_total];
        let mut cos = vec![0.0; m_total];
        let step = 2.0 * PI / m_total as f64;
        for m in 0..=m_total / 2 {
            // Fold into [0, M/4] before calling the library routines.
            let (s, c) = if 4 * m <= m_total {
                let x = m as f64 * step;
                (libm::sin(x), libm::cos(x))
            } else {
                let x = (m_total as f64 / 2.0 - m as f64) * step;
                (libm::sin(x), -libm::cos(x))
            };
            sin[m] = s;
            cos[m] = c;
            if m > 0 && m < m_total - m {
                sin[m_total - m] = -s;
                cos[m_total - m] = c;
            }
        }
        if m_total.is_multiple_of(2) {
            sin[m_total / 2] = 0.0;
        }
        sin[0] = 0.0;
        cos[0] = 1.0;
        TrigTable { sin, cos }
    }

    pub(crate) fn len(&self) -> usize {
        self.sin.len()
    }

    /// Values of `sum_n b_n sin(2 pi n j / M)` for `j = 0..M`, with `coeffs[n-1] = b_n`.
    pub(crate) fn synth_sine(&self, coeffs: &[f64]) -> Vec<f64> {
        self.synth(coeffs, &self.sin)
    }

    /// Values of `sum_n a_n cos(2 pi n j / M)` for `j = 0..M`.
    pub(crate) fn synth_cosine(&self, coeffs: &[f64]) -> Vec<f64> {
        self.synth(coeffs, &self.cos)
    }

    fn synth(&self, coeffs: &[f64], table: &[f64]) -> Vec<f64> {
        let m_total = self.len();
        let mut out = vec![0.0; m_total];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut idx = 0usize;
            let mut acc = 0.0;
            for &b in coeffs {
                idx += j;
                if idx >= m_total {
                    idx -= m_total;
                }
                acc += b * table[idx];
            }
            *slot = acc;
        }
        out
    }

    /// Discrete sine analysis: `b_n = (2/M) sum_j s_j sin(2 pi n j / M)` for
    /// `n = 1..=M/2`. The Nyquist mode `n = M/2` vanishes on the grid and is
    /// returned as zero.
    pub(crate) fn analyze_sine(&self, samples: &[f64]) -> Vec<f64> {
        let m_total = self.len();
        debug_assert_eq!(samples.len(), m_total);
        let half = m_total / 2;
        let scale = 2.0 / m_total as f64;
        let mut coeffs = vec![0.0; half];
        for (slot, n) in coeffs.iter_mut().zip(1..half) {
            let mut idx = 0usize;
            let mut acc = 0.0;
            for &s in samples {
                acc += s * self.sin[idx];
                idx += n;
                if idx >= m_total {
                    idx -= m_total;
                }
            }
            *slot = acc * scale;
        }
        coeffs
    }
}
