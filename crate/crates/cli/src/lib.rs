//! Experiment-runner internals behind the `radbound` binary: the
//! spin-glass sweep, the CNF bound tables, and the self-check battery.

pub mod satrun;
pub mod sweep;
pub mod verify;
