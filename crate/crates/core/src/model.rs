//! Timed-automaton model: locations, clocks, guarded edges with resets.
//!
//! Locations and clocks are addressed by dense indices; their names are
//! metadata used only for I/O and diagnostics. Guards are stored total: every
//! edge carries one interval per clock of the automaton.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Dense index of a location in [`TimedAutomaton::locations`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocationId(pub usize);

/// Dense index of a clock in [`TimedAutomaton::clocks`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockId(pub usize);

impl fmt::Display for LocationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A natural number or infinity. `Finite(n) < Infinite` for every `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NatInf {
    Finite(u32),
    Infinite,
}

impl NatInf {
    pub fn finite(self) -> Option<u32> {
        match self {
            NatInf::Finite(n) => Some(n),
            NatInf::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, NatInf::Infinite)
    }
}

impl From<u32> for NatInf {
    fn from(n: u32) -> Self {
        NatInf::Finite(n)
    }
}

impl fmt::Display for NatInf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NatInf::Finite(n) => write!(f, "{n}"),
            NatInf::Infinite => f.write_str("inf"),
        }
    }
}

/// Closed interval `[lower, upper]` or `[lower, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeInterval {
    pub lower: u32,
    pub upper: NatInf,
}

impl TimeInterval {
    /// `[0, ∞)`, satisfied by every value.
    pub const TRUE: TimeInterval = TimeInterval {
        lower: 0,
        upper: NatInf::Infinite,
    };

    pub fn closed(lower: u32, upper: u32) -> Self {
        TimeInterval {
            lower,
            upper: NatInf::Finite(upper),
        }
    }

    pub fn at_least(lower: u32) -> Self {
        TimeInterval {
            lower,
            upper: NatInf::Infinite,
        }
    }

    pub fn is_well_formed(&self) -> bool {
        NatInf::Finite(self.lower) <= self.upper
    }

    pub fn contains(&self, value: u32) -> bool {
        value >= self.lower && NatInf::Finite(value) <= self.upper
    }

    pub fn is_trivial(&self) -> bool {
        *self == Self::TRUE
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.upper {
            NatInf::Finite(u) => write!(f, "[{},{}]", self.lower, u),
            NatInf::Infinite => write!(f, "[{},inf)", self.lower),
        }
    }
}

/// A total clock guard: one interval per clock, indexed by [`ClockId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Guard {
    intervals: Vec<TimeInterval>,
}

impl Guard {
    /// The guard that is always satisfied.
    pub fn trivial(clock_count: usize) -> Self {
        Guard {
            intervals: vec![TimeInterval::TRUE; clock_count],
        }
    }

    pub fn from_intervals(intervals: Vec<TimeInterval>) -> Self {
        Guard { intervals }
    }

    pub fn intervals(&self) -> &[TimeInterval] {
        &self.intervals
    }

    pub fn interval(&self, clock: ClockId) -> TimeInterval {
        self.intervals[clock.0]
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Replaces the interval of one clock, builder style.
    pub fn with(mut self, clock: ClockId, interval: TimeInterval) -> Self {
        self.intervals[clock.0] = interval;
        self
    }
}

/// Expands a sparse guard into a total one: clocks missing from `partial`
/// map to `[0, ∞)`.
pub fn normalize_guard(partial: &BTreeMap<ClockId, TimeInterval>, clock_count: usize) -> Guard {
    let mut guard = Guard::trivial(clock_count);
    for (&clock, &interval) in partial {
        assert!(
            clock.0 < clock_count,
            "guard mentions clock {} outside 0..{clock_count}",
            clock.0
        );
        guard.intervals[clock.0] = interval;
    }
    guard
}

/// An edge `from --guard, reset--> to`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: LocationId,
    pub to: LocationId,
    pub guard: Guard,
    /// Reset clocks, sorted and free of duplicates.
    pub reset: Vec<ClockId>,
    /// Position in the model's edge list; fixes exploration order.
    pub ordinal: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedAutomaton {
    pub locations: Vec<String>,
    pub clocks: Vec<String>,
    pub edges: Vec<Edge>,
    pub initial: LocationId,
}

impl TimedAutomaton {
    pub fn location_id(&self, name: &str) -> Option<LocationId> {
        self.locations
            .iter()
            .position(|l| l == name)
            .map(LocationId)
    }

    pub fn clock_id(&self, name: &str) -> Option<ClockId> {
        self.clocks.iter().position(|c| c == name).map(ClockId)
    }

    pub fn location_name(&self, id: LocationId) -> &str {
        &self.locations[id.0]
    }

    pub fn clock_name(&self, id: ClockId) -> &str {
        &self.clocks[id.0]
    }

    /// The largest integer appearing as a finite bound in any guard.
    pub fn max_constant(&self) -> u32 {
        self.edges
            .iter()
            .flat_map(|e| e.guard.intervals())
            .flat_map(|i| [Some(i.lower), i.upper.finite()])
            .flatten()
            .max()
            .unwrap_or(0)
    }

    /// Checks every structural invariant, collecting all violations.
    pub fn validate(self) -> Result<ValidatedModel, ValidationError> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(ValidatedModel::new_unchecked(self))
        } else {
            Err(ValidationError { violations })
        }
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.locations.is_empty() {
            out.push(Violation::NoLocations);
        }
        if self.clocks.is_empty() {
            out.push(Violation::NoClocks);
        }
        for (kind, names) in [("location", &self.locations), ("clock", &self.clocks)] {
            let mut seen = HashSet::new();
            for name in names {
                if name.is_empty() {
                    out.push(Violation::EmptyName { kind });
                } else if !seen.insert(name.as_str()) {
                    out.push(Violation::DuplicateName {
                        kind,
                        name: name.clone(),
                    });
                }
            }
        }
        if self.initial.0 >= self.locations.len() {
            out.push(Violation::DanglingInitial {
                index: self.initial.0,
            });
        }
        for (position, edge) in self.edges.iter().enumerate() {
            if edge.ordinal != position {
                out.push(Violation::OrdinalMismatch {
                    position,
                    ordinal: edge.ordinal,
                });
            }
            for end in [edge.from, edge.to] {
                if end.0 >= self.locations.len() {
                    out.push(Violation::DanglingLocation {
                        edge: edge.ordinal,
                        location: format!("#{}", end.0),
                    });
                }
            }
            if edge.guard.len() != self.clocks.len() {
                out.push(Violation::NonTotalGuard {
                    edge: edge.ordinal,
                    expected: self.clocks.len(),
                    found: edge.guard.len(),
                });
            }
            for (c, interval) in edge.guard.intervals().iter().enumerate() {
                if !interval.is_well_formed() {
                    out.push(Violation::EmptyInterval {
                        edge: edge.ordinal,
                        clock: self
                            .clocks
                            .get(c)
                            .cloned()
                            .unwrap_or_else(|| format!("#{c}")),
                        interval: *interval,
                    });
                }
            }
            for clock in &edge.reset {
                if clock.0 >= self.clocks.len() {
                    out.push(Violation::UnknownClock {
                        edge: edge.ordinal,
                        clock: format!("#{}", clock.0),
                    });
                }
            }
            if edge.reset.windows(2).any(|w| w[0] >= w[1]) {
                out.push(Violation::UnsortedReset { edge: edge.ordinal });
            }
        }
        out
    }
}

/// A single structural problem found by [`TimedAutomaton::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("model has no locations")]
    NoLocations,
    #[error("model has no clocks")]
    NoClocks,
    #[error("empty {kind} name")]
    EmptyName { kind: &'static str },
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("initial location {index} does not exist")]
    DanglingInitial { index: usize },
    #[error("edge {edge}: dangling location `{location}`")]
    DanglingLocation { edge: usize, location: String },
    #[error("initial location `{name}` does not exist")]
    UnknownInitial { name: String },
    #[error("edge {edge}: unknown clock `{clock}`")]
    UnknownClock { edge: usize, clock: String },
    #[error("edge {edge}, clock `{clock}`: interval lower > upper in {interval}")]
    EmptyInterval {
        edge: usize,
        clock: String,
        interval: TimeInterval,
    },
    #[error("edge {edge}: guard covers {found} clocks, model has {expected}")]
    NonTotalGuard {
        edge: usize,
        expected: usize,
        found: usize,
    },
    #[error("edge {edge}: reset set is not sorted or has duplicates")]
    UnsortedReset { edge: usize },
    #[error("edge at position {position} carries ordinal {ordinal}")]
    OrdinalMismatch { position: usize, ordinal: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid model: {}", join_violations(.violations))]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// A model that passed validation, with derived lookup tables.
///
/// Immutable after construction; engines borrow it and may run concurrently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedModel {
    automaton: TimedAutomaton,
    max_constant: u32,
    outgoing: Vec<Vec<usize>>,
    /// `reset_flags[edge][clock]`: whether the edge resets the clock.
    reset_flags: Vec<Vec<bool>>,
}

impl ValidatedModel {
    fn new_unchecked(automaton: TimedAutomaton) -> Self {
        let mut outgoing = vec![Vec::new(); automaton.locations.len()];
        for edge in &automaton.edges {
            outgoing[edge.from.0].push(edge.ordinal);
        }
        let reset_flags = automaton
            .edges
            .iter()
            .map(|e| {
                let mut flags = vec![false; automaton.clocks.len()];
                for c in &e.reset {
                    flags[c.0] = true;
                }
                flags
            })
            .collect();
        ValidatedModel {
            max_constant: automaton.max_constant(),
            automaton,
            outgoing,
            reset_flags,
        }
    }

    pub fn automaton(&self) -> &TimedAutomaton {
        &self.automaton
    }

    pub fn into_inner(self) -> TimedAutomaton {
        self.automaton
    }

    pub fn max_constant(&self) -> u32 {
        self.max_constant
    }

    pub fn clock_count(&self) -> usize {
        self.automaton.clocks.len()
    }

    pub fn location_count(&self) -> usize {
        self.automaton.locations.len()
    }

    pub fn initial(&self) -> LocationId {
        self.automaton.initial
    }

    pub fn edges(&self) -> &[Edge] {
        &self.automaton.edges
    }

    /// Edges leaving `location`, in ordinal order.
    pub fn outgoing(&self, location: LocationId) -> impl Iterator<Item = &Edge> + '_ {
        self.outgoing[location.0]
            .iter()
            .map(move |&i| &self.automaton.edges[i])
    }

    /// `true` if edge `ordinal` resets `clock`.
    pub fn resets(&self, ordinal: usize, clock: ClockId) -> bool {
        self.reset_flags[ordinal][clock.0]
    }

    pub fn location_id(&self, name: &str) -> Option<LocationId> {
        self.automaton.location_id(name)
    }

    pub fn location_name(&self, id: LocationId) -> &str {
        self.automaton.location_name(id)
    }
}

impl std::ops::Deref for ValidatedModel {
    type Target = TimedAutomaton;

    fn deref(&self) -> &TimedAutomaton {
        &self.automaton
    }
}
