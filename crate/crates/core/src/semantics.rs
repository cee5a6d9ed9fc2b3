//! Discrete clock semantics shared by both engines.

use std::fmt;
use std::ops::Deref;

use crate::model::{ClockId, Edge, Guard, LocationId, ValidatedModel};

/// Integer clock values, one per clock, indexed by [`ClockId`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockValuation(Box<[u32]>);

impl ClockValuation {
    pub fn zero(clock_count: usize) -> Self {
        ClockValuation(vec![0; clock_count].into_boxed_slice())
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, clock: ClockId) -> u32 {
        self.0[clock.0]
    }

    pub fn as_mut_slice(&mut self) -> &mut [u32] {
        &mut self.0
    }
}

impl From<Vec<u32>> for ClockValuation {
    fn from(values: Vec<u32>) -> Self {
        ClockValuation(values.into_boxed_slice())
    }
}

impl<const N: usize> From<[u32; N]> for ClockValuation {
    fn from(values: [u32; N]) -> Self {
        ClockValuation(Box::new(values))
    }
}

impl Deref for ClockValuation {
    type Target = [u32];

    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for ClockValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

pub(crate) fn write_tuple(f: &mut fmt::Formatter<'_>, values: &[u32]) -> fmt::Result {
    f.write_str("(")?;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    f.write_str(")")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub location: LocationId,
    pub valuation: ClockValuation,
}

/// `v + d`, pointwise.
pub fn delay(v: &ClockValuation, d: u32) -> ClockValuation {
    v.iter().map(|&x| x + d).collect::<Vec<_>>().into()
}

/// `n ⊕ m`: the sum, or `mc + 1` once it exceeds `mc`.
#[inline]
pub fn bounded_sum(n: u32, m: u32, mc: u32) -> u32 {
    let sum = u64::from(n) + u64::from(m);
    if sum > u64::from(mc) {
        mc + 1
    } else {
        sum as u32
    }
}

/// Pointwise [`bounded_sum`].
///
/// # Panics
///
/// If some entry of `v` exceeds `mc + 1`; the bounded semantics never
/// produces such values.
pub fn bounded_add(v: &ClockValuation, d: u32, mc: u32) -> ClockValuation {
    let mut out = v.clone();
    bounded_add_in_place(&mut out, d, mc);
    out
}

pub(crate) fn bounded_add_in_place(v: &mut ClockValuation, d: u32, mc: u32) {
    for x in v.as_mut_slice() {
        assert!(*x <= mc + 1, "clock value {x} exceeds MC+1 = {}", mc + 1);
        *x = bounded_sum(*x, d, mc);
    }
}

/// `v[R := 0]`.
pub fn reset(v: &ClockValuation, clocks: &[ClockId]) -> ClockValuation {
    let mut out = v.clone();
    for c in clocks {
        out.as_mut_slice()[c.0] = 0;
    }
    out
}

/// `v ⊨ g`: every clock value lies in its interval.
pub fn satisfies(v: &[u32], guard: &Guard) -> bool {
    debug_assert_eq!(v.len(), guard.len());
    v.iter()
        .zip(guard.intervals())
        .all(|(&x, interval)| interval.contains(x))
}

/// Per clock: equal values, or both strictly above `mc`.
pub fn mc_equivalent(v: &[u32], w: &[u32], mc: u32) -> bool {
    v.len() == w.len() && v.iter().zip(w).all(|(&a, &b)| a == b || (a > mc && b > mc))
}

/// Caps every value at `mc + 1`: the canonical representative of the
/// `mc`-equivalence class.
pub fn saturate(v: &[u32], mc: u32) -> ClockValuation {
    v.iter().map(|&x| x.min(mc + 1)).collect::<Vec<_>>().into()
}

/// Enabled edges out of `config` with their switch targets, in ordinal order.
pub fn switch_successors<'m>(
    config: &Configuration,
    model: &'m ValidatedModel,
) -> Vec<(&'m Edge, Configuration)> {
    model
        .outgoing(config.location)
        .filter(|e| satisfies(&config.valuation, &e.guard))
        .map(|e| {
            (
                e,
                Configuration {
                    location: e.to,
                    valuation: reset(&config.valuation, &e.reset),
                },
            )
        })
        .collect()
}
