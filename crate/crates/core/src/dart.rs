//! Time-dart engine.
//!
//! A time-dart `(anchor, w, p)` stands for the diagonal ray of valuations
//! `anchor + d`: offsets `w <= d < p` are still waiting to be explored, offsets
//! `d >= p` have been explored. The passed-waiting list maps
//! `(location, anchor)` to `(w, p)`; it is the whole search state.
//!
//! Picking is driven by a FIFO (or LIFO) queue of keys. A key is enqueued at
//! most once at a time (tracked by a per-entry flag) and revalidated when
//! popped: a popped key whose entry no longer has `w < p` is skipped.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};
use std::ops::ControlFlow;

use indexmap::map::Entry;
use indexmap::IndexMap;

use crate::model::{ClockId, Guard, LocationId, NatInf, ValidatedModel};
use crate::search::{Meter, ReachResult, ResourceLimit, SearchOptions, SearchOrder};
use crate::semantics::{bounded_sum, write_tuple, ClockValuation};

/// A valuation with at least one clock at zero: the origin of a dart.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnchorPoint(Box<[u32]>);

impl AnchorPoint {
    pub fn zero(clock_count: usize) -> Self {
        AnchorPoint(vec![0; clock_count].into_boxed_slice())
    }

    /// `None` unless some coordinate is zero.
    pub fn new(values: Vec<u32>) -> Option<Self> {
        values
            .contains(&0)
            .then(|| AnchorPoint(values.into_boxed_slice()))
    }

    fn new_unchecked(values: Vec<u32>) -> Self {
        AnchorPoint(values.into_boxed_slice())
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    /// `anchor + d` with plain addition.
    pub fn shifted(&self, d: u32) -> ClockValuation {
        self.0.iter().map(|&x| x + d).collect::<Vec<_>>().into()
    }
}

impl fmt::Display for AnchorPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimeDart {
    pub anchor: AnchorPoint,
    /// Waiting distance.
    pub waiting: u32,
    /// Passed distance.
    pub passed: NatInf,
}

impl TimeDart {
    pub fn new(anchor: AnchorPoint, waiting: u32, passed: NatInf) -> Self {
        debug_assert!(NatInf::Finite(waiting) <= passed);
        TimeDart {
            anchor,
            waiting,
            passed,
        }
    }
}

/// `anchor + d` for `w <= d < min(p, cutoff)`.
pub fn waiting_points(dart: &TimeDart, cutoff: u32) -> Vec<ClockValuation> {
    let end = match dart.passed {
        NatInf::Finite(p) => p.min(cutoff),
        NatInf::Infinite => cutoff,
    };
    (dart.waiting..end)
        .map(|d| dart.anchor.shifted(d))
        .collect()
}

/// `anchor + d` for `p <= d < cutoff`.
pub fn passed_points(dart: &TimeDart, cutoff: u32) -> Vec<ClockValuation> {
    match dart.passed {
        NatInf::Finite(p) => (p..cutoff).map(|d| dart.anchor.shifted(d)).collect(),
        NatInf::Infinite => Vec::new(),
    }
}

/// Last delay (from the anchor) at which a guard still holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WindowEnd {
    /// May be negative when an upper bound is already exceeded at the anchor.
    Finite(i64),
    Infinite,
}

/// Range of delays from the anchor during which an edge is enabled, clipped
/// below by the waiting distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuccessorWindow {
    pub start: u32,
    pub end: WindowEnd,
}

impl SuccessorWindow {
    /// `start < p` and `start <= end`.
    pub fn is_enabled(&self, passed: NatInf) -> bool {
        NatInf::Finite(self.start) < passed && WindowEnd::Finite(i64::from(self.start)) <= self.end
    }
}

/// `start = max(w, max_x lb(g(x)) - anchor(x))`,
/// `end = min_x ub(g(x)) - anchor(x)` (infinite bounds stay infinite).
pub fn successor_window(anchor: &[u32], waiting: u32, guard: &Guard) -> SuccessorWindow {
    let mut start = i64::from(waiting);
    let mut end = WindowEnd::Infinite;
    for (&a, interval) in anchor.iter().zip(guard.intervals()) {
        let a = i64::from(a);
        start = start.max(i64::from(interval.lower) - a);
        if let NatInf::Finite(u) = interval.upper {
            end = end.min(WindowEnd::Finite(i64::from(u) - a));
        }
    }
    SuccessorWindow {
        start: u32::try_from(start).expect("start is at least the waiting distance"),
        end,
    }
}

/// Upper bound for the delays worth enumerating on a resetting edge:
/// `max(start, mc + 1 - min over non-reset clocks of anchor(x))`. When every
/// clock is reset the minimum is over the empty set, taken as +infinity, and
/// the result is `start`.
pub fn reset_stop(anchor: &[u32], start: u32, is_reset: impl Fn(ClockId) -> bool, mc: u32) -> u32 {
    let kept_min = anchor
        .iter()
        .enumerate()
        .filter(|&(c, _)| !is_reset(ClockId(c)))
        .map(|(_, &a)| a)
        .min();
    match kept_min {
        Some(m) => start.max((mc + 1).saturating_sub(m)),
        None => start,
    }
}

/// One add-to-passed-waiting call produced by exploring a dart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emission {
    pub location: LocationId,
    pub dart: TimeDart,
}

/// Generates, in edge-ordinal order, every dart that expanding
/// `(location, anchor, w, p)` adds to the passed-waiting list. `emit` may
/// stop the enumeration early by returning `Break`.
///
/// `passed` must be the value captured when the dart was picked, before the
/// picked entry is overwritten with `(w, w)`.
pub fn explore_dart<F>(
    model: &ValidatedModel,
    location: LocationId,
    anchor: &AnchorPoint,
    waiting: u32,
    passed: NatInf,
    mut emit: F,
) -> ControlFlow<()>
where
    F: FnMut(Emission) -> ControlFlow<()>,
{
    let mc = model.max_constant();
    let a = anchor.values();
    for edge in model.outgoing(location) {
        let window = successor_window(a, waiting, &edge.guard);
        debug_assert!(
            window.start <= mc,
            "window start {} > MC {mc}",
            window.start
        );
        if !window.is_enabled(passed) {
            continue;
        }
        let start = window.start;
        if edge.reset.is_empty() {
            let shifted = a
                .iter()
                .map(|&x| bounded_sum(x, start, mc) - start)
                .collect();
            emit(Emission {
                location: edge.to,
                dart: TimeDart::new(AnchorPoint::new_unchecked(shifted), start, NatInf::Infinite),
            })?;
        } else {
            let stop = reset_stop(a, start, |c| model.resets(edge.ordinal, c), mc);
            let mut last = i64::from(stop);
            if let WindowEnd::Finite(end) = window.end {
                last = last.min(end);
            }
            if let NatInf::Finite(p) = passed {
                last = last.min(i64::from(p) - 1);
            }
            for n in i64::from(start)..=last {
                let n = n as u32;
                let mut next: Vec<u32> = a.iter().map(|&x| bounded_sum(x, n, mc)).collect();
                for c in &edge.reset {
                    next[c.0] = 0;
                }
                emit(Emission {
                    location: edge.to,
                    dart: TimeDart::new(AnchorPoint::new_unchecked(next), 0, NatInf::Infinite),
                })?;
            }
        }
    }
    ControlFlow::Continue(())
}

/// Convenience wrapper collecting every emission of [`explore_dart`].
pub fn dart_successors(
    model: &ValidatedModel,
    location: LocationId,
    dart: &TimeDart,
) -> Vec<Emission> {
    let mut out = Vec::new();
    let _ = explore_dart(
        model,
        location,
        &dart.anchor,
        dart.waiting,
        dart.passed,
        |e| {
            out.push(e);
            ControlFlow::Continue(())
        },
    );
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PwEntry {
    waiting: u32,
    passed: NatInf,
    queued: bool,
}

/// What a store did to an entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Merge {
    pub previous: Option<(u32, NatInf)>,
    pub current: (u32, NatInf),
}

/// Map `(location, anchor) -> (w, p)` plus the queue of keys with `w < p`.
#[derive(Debug, Clone, Default)]
pub struct PassedWaitingList {
    entries: IndexMap<(LocationId, AnchorPoint), PwEntry>,
    dirty: VecDeque<usize>,
}

impl PassedWaitingList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of present keys.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, location: LocationId, anchor: &AnchorPoint) -> Option<(u32, NatInf)> {
        self.entries
            .get(&(location, anchor.clone()))
            .map(|e| (e.waiting, e.passed))
    }

    /// Entries in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (LocationId, &AnchorPoint, u32, NatInf)> + '_ {
        self.entries
            .iter()
            .map(|((l, a), e)| (*l, a, e.waiting, e.passed))
    }

    /// Entries sorted by location index, then anchor.
    pub fn sorted(&self) -> Vec<(LocationId, &AnchorPoint, u32, NatInf)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        v
    }

    /// Keys currently queued for expansion, in queue order.
    pub fn queued(&self) -> impl Iterator<Item = (LocationId, &AnchorPoint)> + '_ {
        self.dirty.iter().map(|&i| {
            let ((l, a), _) = self.entries.get_index(i).expect("queued index exists");
            (*l, a)
        })
    }

    /// Stores `(w, p)` for an absent key, otherwise takes the componentwise
    /// minimum with the stored pair. Enqueues the key if it now has `w < p`
    /// and is not already queued.
    pub fn store(
        &mut self,
        location: LocationId,
        anchor: AnchorPoint,
        waiting: u32,
        passed: NatInf,
    ) -> Merge {
        let (index, previous, entry) = match self.entries.entry((location, anchor)) {
            Entry::Vacant(v) => {
                let index = v.index();
                let entry = v.insert(PwEntry {
                    waiting,
                    passed,
                    queued: false,
                });
                (index, None, entry)
            }
            Entry::Occupied(o) => {
                let index = o.index();
                let entry = o.into_mut();
                let previous = (entry.waiting, entry.passed);
                entry.waiting = entry.waiting.min(waiting);
                entry.passed = entry.passed.min(passed);
                (index, Some(previous), entry)
            }
        };
        let current = (entry.waiting, entry.passed);
        if NatInf::Finite(entry.waiting) < entry.passed && !entry.queued {
            entry.queued = true;
            self.dirty.push_back(index);
        }
        Merge { previous, current }
    }

    /// Pops queued keys until one still has `w < p`; returns its index and
    /// `(w, p)`, or `None` when the queue runs dry.
    fn pick(&mut self, order: SearchOrder) -> Option<(usize, u32, NatInf)> {
        loop {
            let index = match order {
                SearchOrder::Fifo => self.dirty.pop_front(),
                SearchOrder::Lifo => self.dirty.pop_back(),
            }?;
            let (_, entry) = self
                .entries
                .get_index_mut(index)
                .expect("queued index exists");
            entry.queued = false;
            if NatInf::Finite(entry.waiting) < entry.passed {
                return Some((index, entry.waiting, entry.passed));
            }
        }
    }

    fn key(&self, index: usize) -> (LocationId, &AnchorPoint) {
        let ((l, a), _) = self.entries.get_index(index).expect("index exists");
        (*l, a)
    }

    /// Marks every point of the dart at `index` as passed: `(w, p) := (w, w)`.
    fn pass_all(&mut self, index: usize) {
        let (_, entry) = self.entries.get_index_mut(index).expect("index exists");
        entry.passed = NatInf::Finite(entry.waiting);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddOutcome {
    GoalHit,
    Stored(Merge),
}

/// Goal test, then store-or-merge. The list is untouched on a goal hit.
pub fn add_to_pw(
    pw: &mut PassedWaitingList,
    location: LocationId,
    anchor: AnchorPoint,
    waiting: u32,
    passed: NatInf,
    goal: Option<LocationId>,
) -> AddOutcome {
    if Some(location) == goal {
        return AddOutcome::GoalHit;
    }
    AddOutcome::Stored(pw.store(location, anchor, waiting, passed))
}

/// The dart expanded by one iteration of the main loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Picked {
    pub location: LocationId,
    /// `(w, p)` as found when picked.
    pub dart: TimeDart,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// A dart was expanded without reaching the goal.
    Expanded(Picked),
    /// The goal was discovered, while expanding `Some(picked)` or by the
    /// initial seed (`None`).
    GoalReached(Option<Picked>),
    /// No dart has waiting points left; the goal is unreachable.
    Exhausted,
}

/// A broken engine invariant observed while auditing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantViolation {
    pub iteration: u64,
    pub message: String,
}

/// Incremental run of the time-dart reachability algorithm.
///
/// The constructor seeds the list with `(initial, 0-anchor, 0, ∞)`; each
/// [`step`](Self::step) performs one iteration of the main loop.
pub struct DartSearch<'m> {
    model: &'m ValidatedModel,
    goal: Option<LocationId>,
    order: SearchOrder,
    pw: PassedWaitingList,
    meter: Meter,
    verdict: Option<bool>,
    audit: Option<Vec<InvariantViolation>>,
    history: Option<Vec<(LocationId, TimeDart)>>,
}

impl<'m> DartSearch<'m> {
    /// With `goal = None` the search explores the whole state space.
    pub fn new(
        model: &'m ValidatedModel,
        goal: Option<LocationId>,
        options: SearchOptions,
    ) -> Self {
        let mut search = DartSearch {
            model,
            goal,
            order: options.order,
            pw: PassedWaitingList::new(),
            meter: Meter::start(options.limits),
            verdict: None,
            audit: None,
            history: None,
        };
        let seed = AnchorPoint::zero(model.clock_count());
        if search.add(model.initial(), seed, 0, NatInf::Infinite) {
            search.verdict = Some(true);
        }
        search
    }

    /// Checks the list, anchor, window and monotonicity invariants on every
    /// mutation and records violations instead of panicking.
    pub fn with_audit(mut self) -> Self {
        self.audit = Some(Vec::new());
        self.audit_all_entries();
        self
    }

    /// Records the post-state of every stored or merged entry.
    pub fn with_history(mut self) -> Self {
        self.history = Some(
            self.pw
                .iter()
                .map(|(l, a, w, p)| (l, TimeDart::new(a.clone(), w, p)))
                .collect(),
        );
        self
    }

    pub fn passed_waiting(&self) -> &PassedWaitingList {
        &self.pw
    }

    /// Every state an entry has held, in mutation order (requires
    /// [`with_history`](Self::with_history)).
    pub fn history(&self) -> &[(LocationId, TimeDart)] {
        self.history.as_deref().unwrap_or(&[])
    }

    pub fn violations(&self) -> &[InvariantViolation] {
        self.audit.as_deref().unwrap_or(&[])
    }

    pub fn verdict(&self) -> Option<bool> {
        self.verdict
    }

    pub fn result(&self) -> ReachResult {
        self.meter
            .result(self.verdict.unwrap_or(false), self.pw.len())
    }

    /// Runs to completion.
    pub fn run(&mut self) -> Result<ReachResult, ResourceLimit> {
        loop {
            match self.step()? {
                Step::Expanded(_) => {}
                Step::GoalReached(_) | Step::Exhausted => return Ok(self.result()),
            }
        }
    }

    /// One iteration of the main loop. Once finished, repeats the final step.
    pub fn step(&mut self) -> Result<Step, ResourceLimit> {
        match self.verdict {
            Some(true) => return Ok(Step::GoalReached(None)),
            Some(false) => return Ok(Step::Exhausted),
            None => {}
        }
        self.meter.check(self.pw.len())?;
        let Some((index, waiting, passed)) = self.pw.pick(self.order) else {
            self.verdict = Some(false);
            return Ok(Step::Exhausted);
        };
        self.meter.iterations += 1;
        let (location, anchor) = self.pw.key(index);
        let anchor = anchor.clone();
        let picked = Picked {
            location,
            dart: TimeDart::new(anchor.clone(), waiting, passed),
        };

        self.pw.pass_all(index);
        self.record(location, &anchor, None, (waiting, NatInf::Finite(waiting)));
        if self.audit.is_some() {
            self.audit_windows(location, &anchor, waiting);
        }

        let model = self.model;
        let flow = explore_dart(model, location, &anchor, waiting, passed, |e| {
            if self.add(e.location, e.dart.anchor, e.dart.waiting, e.dart.passed) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        if flow.is_break() {
            self.verdict = Some(true);
            return Ok(Step::GoalReached(Some(picked)));
        }
        Ok(Step::Expanded(picked))
    }

    /// Returns `true` on a goal hit.
    fn add(
        &mut self,
        location: LocationId,
        anchor: AnchorPoint,
        waiting: u32,
        passed: NatInf,
    ) -> bool {
        self.meter.discovered += 1;
        if self.audit.is_some() {
            self.audit_anchor(&anchor);
        }
        let key_anchor = (self.audit.is_some() || self.history.is_some()).then(|| anchor.clone());
        match add_to_pw(&mut self.pw, location, anchor, waiting, passed, self.goal) {
            AddOutcome::GoalHit => true,
            AddOutcome::Stored(merge) => {
                if let Some(a) = key_anchor {
                    self.record(location, &a, merge.previous, merge.current);
                }
                false
            }
        }
    }

    fn record(
        &mut self,
        location: LocationId,
        anchor: &AnchorPoint,
        previous: Option<(u32, NatInf)>,
        current: (u32, NatInf),
    ) {
        if let Some(history) = &mut self.history {
            history.push((
                location,
                TimeDart::new(anchor.clone(), current.0, current.1),
            ));
        }
        if self.audit.is_none() {
            return;
        }
        if let Some((w0, p0)) = previous {
            if current.0 > w0 || current.1 > p0 {
                self.violation(format!(
                    "merge at {},{anchor} raised ({w0},{p0}) to ({},{})",
                    self.model.location_name(location),
                    current.0,
                    current.1
                ));
            }
        }
        self.audit_entry(location, anchor, current.0, current.1);
    }

    fn audit_entry(
        &mut self,
        location: LocationId,
        anchor: &AnchorPoint,
        waiting: u32,
        passed: NatInf,
    ) {
        let mc = self.model.max_constant();
        let w_ok = waiting <= mc && NatInf::Finite(waiting) <= passed;
        let p_ok = passed.is_infinite() || passed <= NatInf::Finite(mc);
        if !(w_ok && p_ok) {
            self.violation(format!(
                "entry {},{anchor} = ({waiting},{passed}) breaks 0 <= w <= MC={mc}, w <= p, p <= MC or p = inf",
                self.model.location_name(location)
            ));
        }
    }

    fn audit_all_entries(&mut self) {
        let entries: Vec<_> = self
            .pw
            .iter()
            .map(|(l, a, w, p)| (l, a.clone(), w, p))
            .collect();
        for (l, a, w, p) in entries {
            self.audit_anchor(&a);
            self.audit_entry(l, &a, w, p);
        }
    }

    fn audit_anchor(&mut self, anchor: &AnchorPoint) {
        let mc = self.model.max_constant();
        if !anchor.values().contains(&0) {
            self.violation(format!("anchor {anchor} has no zero clock"));
        }
        if anchor.values().iter().any(|&x| x > mc + 1) {
            self.violation(format!("anchor {anchor} exceeds MC+1 = {}", mc + 1));
        }
    }

    fn audit_windows(&mut self, location: LocationId, anchor: &AnchorPoint, waiting: u32) {
        let mc = self.model.max_constant();
        let model = self.model;
        for edge in model.outgoing(location) {
            let window = successor_window(anchor.values(), waiting, &edge.guard);
            if window.start > mc {
                self.violation(format!(
                    "edge {} from {anchor}: start {} exceeds MC {mc}",
                    edge.ordinal, window.start
                ));
            }
        }
    }

    fn violation(&mut self, message: String) {
        let iteration = self.meter.iterations;
        if let Some(v) = &mut self.audit {
            v.push(InvariantViolation { iteration, message });
        }
    }
}

/// Decides whether `goal` is reachable using time-darts.
pub fn reach_darts(
    model: &ValidatedModel,
    goal: LocationId,
    options: SearchOptions,
) -> Result<ReachResult, ResourceLimit> {
    DartSearch::new(model, Some(goal), options).run()
}

/// One trace line: `iter=<k> picked=<loc>,<anchor> pw={<loc>,<anchor>=(w,p); ...}`,
/// entries sorted by location index then anchor, infinity written `inf`.
pub fn trace_line(
    model: &ValidatedModel,
    iteration: u64,
    picked: &Picked,
    pw: &PassedWaitingList,
) -> String {
    let mut line = format!(
        "iter={iteration} picked={},{} pw={{",
        model.location_name(picked.location),
        picked.dart.anchor
    );
    for (i, (l, a, w, p)) in pw.sorted().into_iter().enumerate() {
        if i > 0 {
            line.push_str("; ");
        }
        let _ = write!(line, "{},{a}=({w},{p})", model.location_name(l));
    }
    line.push('}');
    line
}
