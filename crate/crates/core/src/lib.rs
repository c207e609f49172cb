//! Contract-based black-box testing for software doping.
//!
//! A [`Contract`] fixes input and output domains, past-forgetful distances,
//! tolerances κ_in and κ_out, and a standard behaviour. An implementation is
//! clean when every input within κ_in of a standard input is answered within
//! κ_out of what the standard allows. [`dt_run`] drives a system through a
//! bounded test and judges each observed output with the bounded acceptance
//! [`Oracle`]; [`monitor_verdict`] does the same for a recorded trace.

pub mod budget;
pub mod cli;
pub mod contract;
pub mod engine;
pub mod error;
pub mod model;
pub mod monitor;
pub mod nedc;
pub mod oracle;
pub mod sut;
pub mod value;

pub use budget::NodeBudget;
pub use contract::{check_satisfiable_bounded, Contract, Satisfiability, Thresholds, UnsatWitness, ValueDomain};
pub use engine::{dt_run, random_strategy, scripted_strategy, RunConfig, RunRecord, Strategy, Verdict};
pub use error::{Error, Result};
pub use model::{quiescence_closure, Lts, StandardLts, Symbol, Trace};
pub use monitor::{load_trace, monitor_verdict, TraceFormat};
pub use oracle::{acc_b, build_reference_bounded, AcceptanceSet, Oracle};
pub use sut::{ExternalProcess, LtsPlayer, NoisyMirror, SutConnection};
pub use value::{Dist, Value};
