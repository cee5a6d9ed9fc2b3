//! Deterministic model generators for tests and benchmarks.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{ClockId, Edge, Guard, LocationId, NatInf, TimeInterval, TimedAutomaton};

/// Small edge-list builder keyed by location names.
struct Builder {
    locations: Vec<String>,
    index: HashMap<String, usize>,
    clocks: Vec<String>,
    edges: Vec<Edge>,
}

impl Builder {
    fn new(clocks: Vec<String>) -> Self {
        Builder {
            locations: Vec::new(),
            index: HashMap::new(),
            clocks,
            edges: Vec::new(),
        }
    }

    fn location(&mut self, name: &str) -> LocationId {
        if let Some(&i) = self.index.get(name) {
            return LocationId(i);
        }
        self.locations.push(name.to_owned());
        self.index.insert(name.to_owned(), self.locations.len() - 1);
        LocationId(self.locations.len() - 1)
    }

    fn edge(&mut self, from: LocationId, to: LocationId, guard: Guard, mut reset: Vec<ClockId>) {
        reset.sort_unstable();
        reset.dedup();
        let ordinal = self.edges.len();
        self.edges.push(Edge {
            from,
            to,
            guard,
            reset,
            ordinal,
        });
    }

    fn guard(&self) -> Guard {
        Guard::trivial(self.clocks.len())
    }

    fn finish(self, initial: LocationId) -> TimedAutomaton {
        TimedAutomaton {
            locations: self.locations,
            clocks: self.clocks,
            edges: self.edges,
            initial,
        }
    }
}

/// Four locations, clocks `x`, `y`:
/// `l0 -(x>=2)-> l1`, `l1 -(x:=0)-> l1`, `l1 -(x>=2, y>=2; x,y:=0)-> l2`,
/// `l2 -(x>=1)-> l1`, `l2 -(x<=1, y>=2)-> l3`. `l3` is unreachable.
pub fn gen_fig4() -> TimedAutomaton {
    let (x, y) = (ClockId(0), ClockId(1));
    let mut b = Builder::new(vec!["x".into(), "y".into()]);
    let [l0, l1, l2, l3] = ["l0", "l1", "l2", "l3"].map(|n| b.location(n));
    let ge2 = TimeInterval::at_least(2);
    b.edge(l0, l1, b.guard().with(x, ge2), vec![]);
    b.edge(l1, l1, b.guard(), vec![x]);
    b.edge(l1, l2, b.guard().with(x, ge2).with(y, ge2), vec![x, y]);
    b.edge(l2, l1, b.guard().with(x, TimeInterval::at_least(1)), vec![]);
    b.edge(
        l2,
        l3,
        b.guard().with(x, TimeInterval::closed(0, 1)).with(y, ge2),
        vec![],
    );
    b.finish(l0)
}

/// Clocks `x1..xn` and `y`. Location `Loop` has a self-loop per `xi` guarded
/// by `xi = i` that resets `xi`; the edge `Loop -> Goal` requires every `xi`
/// to be 0 and `y` in `[1, bound]`. `Goal` is reachable iff
/// `lcm(1..n) <= bound`, at minimum delay `lcm(1..n)`.
///
/// # Panics
///
/// If `n == 0` or `bound` is finite and zero.
pub fn gen_lcm(n: u32, bound: NatInf) -> TimedAutomaton {
    assert!(n >= 1, "gen_lcm needs at least one counter clock");
    assert!(
        bound >= NatInf::Finite(1),
        "gen_lcm bound must be at least 1"
    );
    let mut clocks: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    clocks.push("y".into());
    let y = ClockId(n as usize);
    let mut b = Builder::new(clocks);
    let looping = b.location("Loop");
    let goal = b.location("Goal");
    for i in 1..=n {
        let xi = ClockId(i as usize - 1);
        b.edge(
            looping,
            looping,
            b.guard().with(xi, TimeInterval::closed(i, i)),
            vec![xi],
        );
    }
    let mut all_zero = b.guard().with(
        y,
        TimeInterval {
            lower: 1,
            upper: bound,
        },
    );
    for i in 0..n as usize {
        all_zero = all_zero.with(ClockId(i), TimeInterval::closed(0, 0));
    }
    b.edge(looping, goal, all_zero, vec![]);
    b.finish(looping)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Phase {
    Idle,
    Request,
    Wait,
    Critical,
}

impl Phase {
    fn tag(self) -> char {
        match self {
            Phase::Idle => 'A',
            Phase::Request => 'B',
            Phase::Wait => 'C',
            Phase::Critical => 'D',
        }
    }
}

/// Two-process Fischer mutual exclusion, flattened into one automaton.
///
/// Each process `i` (clock `xi`, shared variable `id` folded into the
/// location) runs:
///
/// * idle -> request when `id = 0`, resetting `xi`;
/// * request -> wait within `xi ∈ [0, k-1]`, setting `id := i` and resetting `xi`;
/// * wait -> request when `id = 0`, resetting `xi`;
/// * wait -> critical after `xi ∈ [k, ∞)` when `id = i`;
/// * critical -> idle, setting `id := 0`.
///
/// A move that would put both processes in the critical section goes to the
/// sink location `violation` instead; it is unreachable. Locations are named
/// `<p1><p2>_<id>` with phases `A` (idle), `B` (request), `C` (wait) and `D`
/// (critical). Only locations reachable in the untimed product are emitted.
/// The maximum constant is `k`.
///
/// # Panics
///
/// If `k < 2`.
pub fn gen_fischer(k: u32) -> TimedAutomaton {
    assert!(k >= 2, "gen_fischer needs k >= 2");
    type State = ([Phase; 2], u8);

    let name = |(p, id): State| format!("{}{}_{}", p[0].tag(), p[1].tag(), id);
    let mut b = Builder::new(vec!["x1".into(), "x2".into()]);
    let start: State = ([Phase::Idle, Phase::Idle], 0);
    let initial = b.location(&name(start));
    let violation = b.location("violation");

    let mut seen = HashMap::from([(start, initial)]);
    let mut queue = VecDeque::from([start]);
    while let Some(state @ (phases, id)) = queue.pop_front() {
        let from = seen[&state];
        for proc in 0..2 {
            let pid = proc as u8 + 1;
            let clock = ClockId(proc);
            let mut moves: Vec<(Phase, u8, TimeInterval, bool)> = Vec::new();
            match phases[proc] {
                Phase::Idle if id == 0 => {
                    moves.push((Phase::Request, id, TimeInterval::TRUE, true))
                }
                Phase::Request => {
                    moves.push((Phase::Wait, pid, TimeInterval::closed(0, k - 1), true))
                }
                Phase::Wait => {
                    if id == 0 {
                        moves.push((Phase::Request, id, TimeInterval::TRUE, true));
                    }
                    if id == pid {
                        moves.push((Phase::Critical, id, TimeInterval::at_least(k), false));
                    }
                }
                Phase::Critical => moves.push((Phase::Idle, 0, TimeInterval::TRUE, false)),
                Phase::Idle => {}
            }
            for (phase, next_id, interval, resets) in moves {
                let mut next_phases = phases;
                next_phases[proc] = phase;
                let to = if next_phases == [Phase::Critical, Phase::Critical] {
                    violation
                } else {
                    let next = (next_phases, next_id);
                    *seen.entry(next).or_insert_with(|| {
                        queue.push_back(next);
                        b.location(&name(next))
                    })
                };
                let reset = if resets { vec![clock] } else { vec![] };
                b.edge(from, to, b.guard().with(clock, interval), reset);
            }
        }
    }
    b.finish(initial)
}

/// Knobs for [`gen_random`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomModelParams {
    /// 1..=4
    pub clocks: usize,
    /// 2..=8
    pub locations: usize,
    pub edges: usize,
    /// Largest guard constant, at most 6.
    pub max_bound: u32,
    /// Probability that an edge resets a given clock.
    pub reset_prob: f64,
    /// Probability that an edge constrains a given clock.
    pub guard_density: f64,
    pub seed: u64,
}

impl RandomModelParams {
    /// Parameters for exhaustive cross-checks: up to 3 clocks, 6 locations,
    /// bounds up to 4, all drawn from `seed`.
    pub fn small_from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe);
        let locations = rng.gen_range(2..=6);
        RandomModelParams {
            clocks: rng.gen_range(1..=3),
            locations,
            edges: rng.gen_range(locations..=3 * locations),
            max_bound: rng.gen_range(1..=4),
            reset_prob: 0.35,
            guard_density: 0.6,
            seed,
        }
    }

    /// Fixed mid-sized parameters (2 clocks, 4 locations, 8 edges, bound 3).
    pub fn small() -> Self {
        RandomModelParams {
            clocks: 2,
            locations: 4,
            edges: 8,
            max_bound: 3,
            reset_prob: 0.35,
            guard_density: 0.6,
            seed: 0,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if !(1..=4).contains(&self.clocks) {
            return Err(format!("clocks must be in 1..=4, got {}", self.clocks));
        }
        if !(2..=8).contains(&self.locations) {
            return Err(format!(
                "locations must be in 2..=8, got {}",
                self.locations
            ));
        }
        if self.max_bound > 6 {
            return Err(format!(
                "max_bound must be at most 6, got {}",
                self.max_bound
            ));
        }
        for (what, p) in [
            ("reset_prob", self.reset_prob),
            ("guard_density", self.guard_density),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{what} must be in [0,1], got {p}"));
            }
        }
        Ok(())
    }
}

/// A random model and a goal drawn from the same seed stream; the goal is
/// uniform over the non-initial locations.
///
/// # Panics
///
/// If `params` fails [`RandomModelParams::check`].
pub fn gen_random_instance(params: &RandomModelParams) -> (TimedAutomaton, LocationId) {
    if let Err(e) = params.check() {
        panic!("invalid random model parameters: {e}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let clocks = (0..params.clocks).map(|i| format!("c{i}")).collect();
    let mut b = Builder::new(clocks);
    let locs: Vec<_> = (0..params.locations)
        .map(|i| b.location(&format!("q{i}")))
        .collect();

    for _ in 0..params.edges {
        let from = locs[rng.gen_range(0..locs.len())];
        let to = locs[rng.gen_range(0..locs.len())];
        let mut guard = b.guard();
        let mut constrained = false;
        for c in 0..params.clocks {
            if rng.gen_bool(params.guard_density) {
                guard = guard.with(ClockId(c), random_interval(&mut rng, params.max_bound));
                constrained = true;
            }
        }
        if !constrained && params.guard_density > 0.0 {
            let c = rng.gen_range(0..params.clocks);
            guard = guard.with(ClockId(c), random_interval(&mut rng, params.max_bound));
        }
        let reset = (0..params.clocks)
            .filter(|_| rng.gen_bool(params.reset_prob))
            .map(ClockId)
            .collect();
        b.edge(from, to, guard, reset);
    }
    let goal = locs[rng.gen_range(1..locs.len())];
    (b.finish(locs[0]), goal)
}

/// [`gen_random_instance`] without the goal.
pub fn gen_random(params: &RandomModelParams) -> TimedAutomaton {
    gen_random_instance(params).0
}

fn random_interval(rng: &mut ChaCha8Rng, max_bound: u32) -> TimeInterval {
    let lower = rng.gen_range(0..=max_bound);
    // `[0, ∞)` would constrain nothing.
    if lower > 0 && rng.gen_bool(0.5) {
        TimeInterval::at_least(lower)
    } else {
        TimeInterval::closed(lower, rng.gen_range(lower..=max_bound))
    }
}
