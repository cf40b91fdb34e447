//! Bath correlation functions made of delayed delta functions.
//!
//! For the slab pair the correlation between cavities `μ` and `η` reduces to
//! `C_μη(s) = 2 V_μη ħ² (Θ(s) δ(s − τ_μη) + Θ(−s) δ(s + τ_μη))`, with
//! `τ_μη = τ` across the gap and zero on the diagonal. Convolving such a
//! kernel with a history is a handful of delayed lookups, which is all the
//! engine ever needs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR_EV_FS;
use crate::qnm::{Cavity, CavityParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Emission at `t'`, reabsorption at `t = t' + delay`.
    Forward,
    /// The `Θ(t' − t)` branch. It never fires while time runs forward.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelTerm {
    /// `2 V_μη ħ²` in eV²·fs².
    pub weight: Complex64,
    pub delay_fs: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DelayKernel {
    terms: Vec<KernelTerm>,
}

impl DelayKernel {
    pub fn new(terms: Vec<KernelTerm>) -> Self {
        debug_assert!(terms.iter().all(|t| t.delay_fs >= 0.0));
        Self { terms }
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    pub fn forward_terms(&self) -> impl Iterator<Item = &KernelTerm> {
        self.terms.iter().filter(|t| t.direction == Direction::Forward)
    }

    /// Sum of the forward weights divided by `ħ²`, i.e. `2V_μη` in eV.
    pub fn forward_coupling_ev(&self) -> Complex64 {
        self.forward_terms().map(|t| t.weight).sum::<Complex64>() / (HBAR_EV_FS * HBAR_EV_FS)
    }

    /// The kernel seen by operators acting from the right of the density
    /// matrix: every weight conjugated.
    pub fn conjugate(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| KernelTerm {
                    weight: t.weight.conj(),
                    ..*t
                })
                .collect(),
        }
    }
}

/// `C_μη` for the cavity pair described by `params`.
pub fn correlation_kernel(params: &CavityParams, mu: Cavity, eta: Cavity) -> DelayKernel {
    let weight = 2.0 * params.coupling(mu, eta) * HBAR_EV_FS * HBAR_EV_FS;
    let delay_fs = params.delay(mu, eta);
    if mu == eta {
        // Both branches collapse onto s = 0.
        DelayKernel::new(vec![KernelTerm {
            weight,
            delay_fs,
            direction: Direction::Forward,
        }])
    } else {
        DelayKernel::new(vec![
            KernelTerm {
                weight,
                delay_fs,
                direction: Direction::Forward,
            },
            KernelTerm {
                weight,
                delay_fs,
                direction: Direction::Backward,
            },
        ])
    }
}

/// A complex series sampled on a uniform grid `start_fs + n * step_fs`.
#[derive(Debug, Clone, Copy)]
pub struct GridHistory<'a> {
    pub start_fs: f64,
    pub step_fs: f64,
    pub values: &'a [Complex64],
}

impl GridHistory<'_> {
    /// Value at time `t`, or zero when `t` falls before the start or after
    /// the last sample. `t` must coincide with a grid point.
    pub fn at(&self, t: f64) -> Complex64 {
        let x = (t - self.start_fs) / self.step_fs;
        let n = x.round();
        debug_assert!(
            (x - n).abs() < 1e-6,
            "lookup at t = {t} is off the grid by {} steps",
            x - n
        );
        if n < 0.0 || n as usize >= self.values.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[n as usize]
        }
    }
}

/// `∫ dt₁ C(t − t₁) f(t₁)` for a delta kernel: `Σ_forward weight · f(t − delay)`.
pub fn kernel_convolve_sample(kernel: &DelayKernel, history: &GridHistory<'_>, t: f64) -> Complex64 {
    kernel
        .forward_terms()
        .map(|term| term.weight * history.at(t - term.delay_fs))
        .sum()
}
