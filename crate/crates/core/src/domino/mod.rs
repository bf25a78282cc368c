//! Domain-wall dynamics of the domino Hamiltonian and the observables built on it.
//!
//! `H_do` flips a spin only when its two neighbors disagree, so it conserves
//! the number of domain walls. Starting from `|+>` on one site, the state
//! stays a superposition of the vacuum and blocks of ones:
//!
//! * a source on the chain edge releases one wall, solved exactly in
//!   [`one_dw_evolve`];
//! * an interior source releases two walls, evolved inside a window with
//!   [`two_dw_evolve`].
//!
//! Metrology happens through rotated `Y`-strings whose noisy moments are
//! computed in the sector, so chains of hundreds of sites cost only a few
//! thousand amplitudes. The dense [`DominoChain`] is the reference these
//! fast paths are checked against.

mod hamiltonian;
mod moments;
mod observable;
mod one_dw;
mod partition;
mod sector;
mod single;
mod strings;
mod sweep;

pub use hamiltonian::{source_state, DominoChain, MAX_STATEVECTOR_QUBITS};
pub use moments::{transverse_lambda, window_moment_fi};
pub use observable::{
    build_o_do, dyadic_window, DominoObservable, DyadicWindow, YString, DEFAULT_CONCENTRATION,
};
pub use one_dw::{one_dw_evolve, velocity_estimate, OneDwState, BOUNDARY_LIMIT};
pub use partition::{
    build_partitioned_observable, partitioned_fi, CoefficientRule, DominoLayout, GroupWindow,
    PartitionSettings, PartitionedDomino, PartitionedReport, DEFAULT_STRING_CAP,
};
pub use sector::{two_dw_evolve, TwoDwState, LEAKAGE_LIMIT, MAX_SECTOR_DIM};
pub use single::{domino_single, one_dw_moment_fi, SingleReport, SingleSettings};
pub use sweep::{
    figure2_sweep, reference_velocity, CellStatus, Figure2Config, Figure2Row, Figure2Table,
};
