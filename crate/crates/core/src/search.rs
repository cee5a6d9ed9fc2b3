//! Types shared by the search engines: options, limits, results.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

/// Which waiting element is expanded next.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum SearchOrder {
    /// Oldest first (breadth-first).
    #[default]
    Fifo,
    /// Newest first (depth-first).
    Lifo,
}

impl FromStr for SearchOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fifo" => Ok(SearchOrder::Fifo),
            "lifo" => Ok(SearchOrder::Lifo),
            other => Err(format!(
                "unknown search order `{other}` (expected fifo|lifo)"
            )),
        }
    }
}

impl fmt::Display for SearchOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchOrder::Fifo => "fifo",
            SearchOrder::Lifo => "lifo",
        })
    }
}

/// Caps that turn a run into a [`ResourceLimit`] instead of a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum size of the passed-waiting structure.
    pub max_stored: usize,
    pub timeout: Duration,
}

impl Limits {
    pub const DEFAULT_MAX_STORED: usize = 10_000_000;
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);

    pub fn unlimited() -> Self {
        Limits {
            max_stored: usize::MAX,
            timeout: Duration::MAX,
        }
    }
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_stored: Self::DEFAULT_MAX_STORED,
            timeout: Self::DEFAULT_TIMEOUT,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchOptions {
    pub order: SearchOrder,
    pub limits: Limits,
}

impl SearchOptions {
    pub fn with_order(order: SearchOrder) -> Self {
        SearchOptions {
            order,
            ..Default::default()
        }
    }
}

/// Verdict and statistics of one engine run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReachResult {
    pub reachable: bool,
    /// Calls to the add-to-passed-waiting routine, duplicates included.
    pub discovered: u64,
    /// Size of the passed-waiting structure at termination.
    pub stored: u64,
    /// Main-loop bodies executed.
    pub iterations: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitKind {
    StoredStates,
    WallTime,
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitKind::StoredStates => "stored-state cap",
            LimitKind::WallTime => "wall-clock timeout",
        })
    }
}

/// The run was interrupted; `partial` holds the statistics at that moment
/// (`partial.reachable` is always `false` and carries no meaning).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("search interrupted by {kind} after {} stored states", partial.stored)]
pub struct ResourceLimit {
    pub kind: LimitKind,
    pub partial: ReachResult,
}

/// Running counters plus the limit checks shared by the engines.
#[derive(Debug)]
pub(crate) struct Meter {
    started: Instant,
    limits: Limits,
    pub discovered: u64,
    pub iterations: u64,
}

impl Meter {
    pub fn start(limits: Limits) -> Self {
        Meter {
            started: Instant::now(),
            limits,
            discovered: 0,
            iterations: 0,
        }
    }

    pub fn result(&self, reachable: bool, stored: usize) -> ReachResult {
        ReachResult {
            reachable,
            discovered: self.discovered,
            stored: stored as u64,
            iterations: self.iterations,
            elapsed: self.started.elapsed(),
        }
    }

    pub fn check(&self, stored: usize) -> Result<(), ResourceLimit> {
        let kind = if stored > self.limits.max_stored {
            LimitKind::StoredStates
        } else if self.started.elapsed() >= self.limits.timeout {
            LimitKind::WallTime
        } else {
            return Ok(());
        };
        Err(ResourceLimit {
            kind,
            partial: self.result(false, stored),
        })
    }
}
