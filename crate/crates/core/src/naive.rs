//! Explicit-state engine: explores the bounded discrete semantics one
//! configuration at a time.
//!
//! `Passed ∪ Waiting` is a single hash set; the waiting deque holds exactly
//! the members not yet expanded. Every successor goes through [`NaiveSearch::add`],
//! which tests the goal only for configurations not seen before.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::model::{LocationId, NatInf, ValidatedModel};
use crate::search::{Limits, Meter, ReachResult, ResourceLimit, SearchOptions, SearchOrder};
use crate::semantics::{bounded_add, reset, satisfies, ClockValuation, Configuration};

struct NaiveSearch<'m> {
    model: &'m ValidatedModel,
    goal: Option<LocationId>,
    seen: HashSet<Configuration>,
    waiting: VecDeque<Configuration>,
    meter: Meter,
}

impl<'m> NaiveSearch<'m> {
    fn new(model: &'m ValidatedModel, goal: Option<LocationId>, limits: Limits) -> Self {
        NaiveSearch {
            model,
            goal,
            seen: HashSet::new(),
            waiting: VecDeque::new(),
            meter: Meter::start(limits),
        }
    }

    /// Returns `true` when a fresh configuration sits in the goal location.
    fn add(&mut self, config: Configuration) -> bool {
        self.meter.discovered += 1;
        if self.seen.contains(&config) {
            return false;
        }
        if Some(config.location) == self.goal {
            return true;
        }
        self.seen.insert(config.clone());
        self.waiting.push_back(config);
        false
    }

    fn run(&mut self, order: SearchOrder) -> Result<bool, ResourceLimit> {
        let mc = self.model.max_constant();
        let initial = Configuration {
            location: self.model.initial(),
            valuation: ClockValuation::zero(self.model.clock_count()),
        };
        if self.add(initial) {
            return Ok(true);
        }
        while !self.waiting.is_empty() {
            self.meter.check(self.seen.len())?;
            let current = match order {
                SearchOrder::Fifo => self.waiting.pop_front(),
                SearchOrder::Lifo => self.waiting.pop_back(),
            }
            .expect("waiting is nonempty");
            self.meter.iterations += 1;

            let model = self.model;
            for edge in model.outgoing(current.location) {
                if satisfies(&current.valuation, &edge.guard) {
                    let next = Configuration {
                        location: edge.to,
                        valuation: reset(&current.valuation, &edge.reset),
                    };
                    if self.add(next) {
                        return Ok(true);
                    }
                }
            }
            let delayed = Configuration {
                location: current.location,
                valuation: bounded_add(&current.valuation, 1, mc),
            };
            if self.add(delayed) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Decides whether `goal` is reachable by explicit enumeration.
pub fn reach_naive(
    model: &ValidatedModel,
    goal: LocationId,
    options: SearchOptions,
) -> Result<ReachResult, ResourceLimit> {
    let mut search = NaiveSearch::new(model, Some(goal), options.limits);
    let reachable = search.run(options.order)?;
    Ok(search.meter.result(reachable, search.seen.len()))
}

/// Every configuration reachable in the bounded semantics.
pub fn reachable_configurations(
    model: &ValidatedModel,
    limits: Limits,
) -> Result<HashSet<Configuration>, ResourceLimit> {
    let mut search = NaiveSearch::new(model, None, limits);
    search.run(SearchOrder::Fifo)?;
    Ok(search.seen)
}

/// Minimum total delay over all runs reaching `goal`, or infinity.
///
/// 0-1 breadth-first search over the bounded semantics: switches cost 0,
/// unit delays cost 1.
pub fn min_goal_delay(
    model: &ValidatedModel,
    goal: LocationId,
    limits: Limits,
) -> Result<NatInf, ResourceLimit> {
    let mc = model.max_constant();
    let mut meter = Meter::start(limits);
    let initial = Configuration {
        location: model.initial(),
        valuation: ClockValuation::zero(model.clock_count()),
    };
    let mut dist: HashMap<Configuration, u32> = HashMap::from([(initial.clone(), 0)]);
    let mut deque = VecDeque::from([(initial, 0u32)]);

    while let Some((config, d)) = deque.pop_front() {
        meter.check(dist.len())?;
        if dist[&config] < d {
            continue;
        }
        if config.location == goal {
            return Ok(NatInf::Finite(d));
        }
        meter.iterations += 1;
        for edge in model.outgoing(config.location) {
            if satisfies(&config.valuation, &edge.guard) {
                let next = Configuration {
                    location: edge.to,
                    valuation: reset(&config.valuation, &edge.reset),
                };
                if dist.get(&next).is_none_or(|&old| d < old) {
                    dist.insert(next.clone(), d);
                    deque.push_front((next, d));
                }
            }
        }
        let next = Configuration {
            location: config.location,
            valuation: bounded_add(&config.valuation, 1, mc),
        };
        if dist.get(&next).is_none_or(|&old| d + 1 < old) {
            dist.insert(next.clone(), d + 1);
            deque.push_back((next, d + 1));
        }
    }
    Ok(NatInf::Infinite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelgen::{gen_fig4, gen_lcm, gen_random_instance, RandomModelParams};
    use std::time::Duration;

    fn fig4() -> ValidatedModel {
        gen_fig4().validate().unwrap()
    }

    #[test]
    fn fig4_goal_l3_unreachable() {
        let m = fig4();
        for order in [SearchOrder::Fifo, SearchOrder::Lifo] {
            let r = reach_naive(&m, LocationId(3), SearchOptions::with_order(order)).unwrap();
            assert!(!r.reachable);
            assert!(r.stored <= r.discovered);
            assert!(r.iterations <= r.discovered);
            // Full search pops every stored configuration exactly once.
            assert_eq!(r.iterations, r.stored);
        }
    }

    #[test]
    fn initial_goal_is_found_by_the_seed() {
        let r = reach_naive(&fig4(), LocationId(0), SearchOptions::default()).unwrap();
        assert!(r.reachable);
        assert_eq!(r.discovered, 1);
        assert_eq!(r.stored, 0);
        assert_eq!(r.iterations, 0);
    }

    /// Clock values of the only schedule that keeps every `x_i` alive: each
    /// `x_i` is reset exactly when it reaches `i`.
    fn lcm_schedule_hits_zero(n: u32, t: u32) -> bool {
        (1..=n).all(|i| t.is_multiple_of(i))
    }

    #[test]
    fn lcm3_reachable_at_delay_6() {
        let oracle = (1..).find(|&t| lcm_schedule_hits_zero(3, t)).unwrap();
        assert_eq!(oracle, 6);
        let m = gen_lcm(3, NatInf::Infinite).validate().unwrap();
        let goal = m.location_id("Goal").unwrap();
        assert!(
            reach_naive(&m, goal, SearchOptions::default())
                .unwrap()
                .reachable
        );
        assert_eq!(
            min_goal_delay(&m, goal, Limits::default()).unwrap(),
            NatInf::Finite(6)
        );
    }

    #[test]
    fn min_goal_delay_examples() {
        let m = gen_lcm(4, NatInf::Infinite).validate().unwrap();
        let oracle = (1..).find(|&t| lcm_schedule_hits_zero(4, t)).unwrap();
        assert_eq!(oracle, 12);
        let goal = m.location_id("Goal").unwrap();
        assert_eq!(
            min_goal_delay(&m, goal, Limits::default()).unwrap(),
            NatInf::Finite(12)
        );
        assert_eq!(
            min_goal_delay(&m, m.initial(), Limits::default()).unwrap(),
            NatInf::Finite(0)
        );
        assert_eq!(
            min_goal_delay(&fig4(), LocationId(3), Limits::default()).unwrap(),
            NatInf::Infinite
        );
    }

    #[test]
    fn stored_cap_interrupts() {
        let m = gen_lcm(4, NatInf::Infinite).validate().unwrap();
        let goal = m.location_id("Goal").unwrap();
        let options = SearchOptions {
            order: SearchOrder::Fifo,
            limits: Limits {
                max_stored: 10,
                timeout: Duration::MAX,
            },
        };
        let err = reach_naive(&m, goal, options).unwrap_err();
        assert_eq!(err.kind, crate::search::LimitKind::StoredStates);
        assert!(err.partial.stored > 10);
    }

    #[test]
    fn zero_timeout_interrupts() {
        let m = fig4();
        let options = SearchOptions {
            order: SearchOrder::Fifo,
            limits: Limits {
                max_stored: usize::MAX,
                timeout: Duration::ZERO,
            },
        };
        let err = reach_naive(&m, LocationId(3), options).unwrap_err();
        assert_eq!(err.kind, crate::search::LimitKind::WallTime);
        assert_eq!(err.partial.discovered, 1);
    }

    #[test]
    fn configuration_count_respects_finiteness_bound() {
        for seed in 0..40 {
            let params = RandomModelParams {
                seed,
                ..RandomModelParams::small()
            };
            let (m, _) = gen_random_instance(&params);
            let m = m.validate().unwrap();
            let all = reachable_configurations(&m, Limits::default()).unwrap();
            let bound = m.location_count() as u64
                * u64::from(m.max_constant() + 2).pow(m.clock_count() as u32);
            assert!(all.len() as u64 <= bound);
            let mc = m.max_constant();
            assert!(all.iter().all(|c| c.valuation.iter().all(|&x| x <= mc + 1)));
        }
    }

    #[test]
    fn fifo_and_lifo_agree() {
        for seed in 0..100 {
            let params = RandomModelParams {
                seed,
                ..RandomModelParams::small()
            };
            let (m, goal) = gen_random_instance(&params);
            let m = m.validate().unwrap();
            let fifo = reach_naive(&m, goal, SearchOptions::with_order(SearchOrder::Fifo)).unwrap();
            let lifo = reach_naive(&m, goal, SearchOptions::with_order(SearchOrder::Lifo)).unwrap();
            assert_eq!(fifo.reachable, lifo.reachable, "seed {seed}");
        }
    }
}
