//! Simulation, analysis and exact computation for self-stabilizing bit
//! dissemination with memoryless agents in the PULL model.
//!
//! * [`protocol`]: protocols as adoption tables, built-ins, file format.
//! * [`dynamics`]: aggregated, agent-level and sequential steppers.
//! * [`analyzer`]: the characteristic polynomial, its roots, classification.
//! * [`oracle`]: exact transition matrices and hitting times.
//! * [`dual`]: backward coalescing walks for the Voter dynamics.
//! * [`harness`]: sweeps, scaling fits and reports.

pub mod analyzer;
pub mod dual;
pub mod dynamics;
pub mod harness;
pub mod numeric;
pub mod oracle;
pub mod protocol;
pub mod rng;
pub mod stats;
