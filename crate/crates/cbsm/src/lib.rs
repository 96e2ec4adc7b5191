//! Simulation of the concatenated Bell-state measurement (CBSM) of
//! coherent-state qubits under modified parity encoding, with photon loss.
//!
//! The crate is layered bottom-up:
//!
//! * [`types`] — Bell states, PNPD outcomes, code/loss parameters, encoding
//!   constants.
//! * [`povm`] — closed-form POVM matrix elements of one lossy physical BSM.
//! * [`physbsm`] — outcome interpretation of a single BSM and exact
//!   success/error/failure rates.
//! * [`dist`] — exact joint distributions of full outcome matrices via 4x4
//!   and 2x2 transfer-matrix chains.
//! * [`sampler`] — sequential exact sampling of outcome matrices, one PLS at
//!   a time.
//! * [`decision`] — unoptimized and hardware-efficient CBSM decision logic
//!   and cost accounting.
//! * [`montecarlo`] — deterministic data-parallel trial engine.
//! * [`repeater`] — secret-key-rate and effective-cost metrics plus grid
//!   sweeps.
//! * [`oracle`] — independent brute-force validators (truncated Fock sums,
//!   permutation sums, exhaustive enumeration); desk scale only.

pub mod decision;
pub mod dist;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod physbsm;
pub mod povm;
pub mod repeater;
pub mod sampler;
pub mod types;

pub use error::{Error, Result};
pub use types::{BellState, CodeParams, Letter, LossParams, OutcomeMatrix, PnpdOutcome, Sign};
