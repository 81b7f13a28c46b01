//! Max-min fair precoding for multi-group multicasting in a single-cell
//! massive MIMO downlink.
//!
//! The crate covers the whole chain: user drops and Rayleigh channels,
//! MMSE estimation with dedicated pilots or per-group co-pilots, six linear
//! precoders (MRT/ZF × unicast/multicast × pilot strategy), their
//! closed-form effective SINRs, closed-form max-min fair power control with
//! an exhaustive pilot-length search, and Monte Carlo estimators that check
//! every closed form term by term.

pub mod channel;
pub mod config;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod linalg;
pub mod omnicast;
pub mod mmf;
pub mod power;
pub mod precoding;
pub mod rng;
pub mod sinr;
pub mod validation;

pub use config::{normalize_power, scheme_feasible, SchemeId, SystemConfig};
pub use error::{Error, Result};
pub use mmf::{optimize_pilot_length, solve, MmfSolution};
pub use power::{DlPowers, PilotGammas};
