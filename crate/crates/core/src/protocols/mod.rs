//! Circuit-based sensing protocols on small chains.
//!
//! A [`LocalCircuit`] of depth `T` prepares `U|0>`. The noiseless optimum
//! is the Loschmidt echo ([`echo_probability`]); under noise the
//! group-wise time-reversal observable ([`TimeReversalObservable`]) keeps a
//! constant fraction of the QFI as long as the groups are long compared to
//! `T`. [`theorem1_check`] tests the grouped-SLD conditions on arbitrary states.

mod circuit;
mod echo;
mod endmatter;
mod theorem1;
mod timerev;

pub use circuit::{Gate, LocalCircuit};
pub use echo::{echo_probability, magnetization_weights, pure_state_qfi, EchoProbability};
pub use endmatter::{endmatter_expansion_check, ExpansionReport, GroupExpansion};
pub use theorem1::{theorem1_check, Theorem1Report, Theorem1Thresholds};
pub use timerev::{default_offset, timerev_fi, TimeReversalObservable, TimeReversalReport};
