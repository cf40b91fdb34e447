//! Hierarchical equations of motion (HEOM) for open quantum systems whose
//! bath introduces a propagation delay, specialised to two quasinormal-mode
//! (QNM) cavities that exchange photons through a 1D background medium.
//!
//! The crate is organised bottom-up:
//!
//! * [`qnm`] derives cavity frequencies, decay rates, couplings and the delay
//!   from the geometry of two dielectric slabs.
//! * [`kernel`] represents the bath correlation function as a short list of
//!   weighted, delayed delta terms.
//! * [`engine`] integrates generic linear equation sets that mix one-time
//!   system variables with two-time auxiliary ("band") variables.
//! * [`models`] transcribes the single-excitation and two-photon equations
//!   into [`engine::EquationSet`]s.
//! * [`oracle`] holds two independent reference solvers: the delay
//!   differential equation for the wave-function amplitudes and a brute-force
//!   discretised bath.
//! * [`cli`] covers configuration files, CSV output and the comparison report
//!   used by the `delay-heom` binary.
//!
//! ```
//! use delay_heom::engine::{run, RunConfig};
//! use delay_heom::models::build_single_excitation;
//! use delay_heom::qnm::CavityParams;
//!
//! // gamma * tau = 1 (in units of hbar), no carrier phase.
//! let tau_fs = 1000.0;
//! let gamma_ev = delay_heom::constants::HBAR_EV_FS / tau_fs;
//! let params = CavityParams::identical(0.0, gamma_ev, tau_fs).unwrap();
//! let eqs = build_single_excitation(&params).unwrap();
//!
//! let cfg = RunConfig::new(tau_fs / 50.0, 3.0 * tau_fs);
//! let traj = run(&eqs, &[("p_a", 1.0.into())], &cfg).unwrap();
//! let p_b = traj.series("p_b").unwrap();
//! assert!(p_b.iter().all(|v| v.re >= -1e-12));
//! ```

pub mod cli;
pub mod constants;
pub mod engine;
pub mod kernel;
pub mod models;
pub mod oracle;
pub mod qnm;

pub use num_complex::Complex64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/qnm.md")]
    mod qnm {}
    #[doc = include_str!("../../../book/src/hierarchy.md")]
    mod hierarchy {}
    #[doc = include_str!("../../../book/src/engine.md")]
    mod engine {}
    #[doc = include_str!("../../../book/src/two_photon.md")]
    mod two_photon {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
