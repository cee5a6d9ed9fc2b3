//! Discrete-time reachability checking for closed timed automata.
//!
//! Two engines decide whether a location is reachable:
//!
//! * [`naive`] enumerates configurations of the bounded discrete semantics
//!   one by one;
//! * [`dart`] stores time-darts, each of which covers a whole diagonal ray of
//!   delay successors with a single passed-waiting entry.
//!
//! Both share the model in [`model`], its JSON format in [`format`] and the
//! clock arithmetic in [`semantics`].

pub mod bench;
pub mod dart;
pub mod format;
pub mod model;
pub mod modelgen;
pub mod naive;
pub mod search;
pub mod semantics;

pub use dart::{reach_darts, AnchorPoint, DartSearch, PassedWaitingList, TimeDart};
pub use format::{dump_model, load_model, ModelError, ParseError};
pub use model::{ClockId, LocationId, NatInf, TimedAutomaton, ValidatedModel};
pub use naive::{min_goal_delay, reach_naive};
pub use search::{Limits, ReachResult, ResourceLimit, SearchOptions, SearchOrder};
