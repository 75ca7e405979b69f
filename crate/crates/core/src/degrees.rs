//! Degrees of responsibility for a queried coalition.
//!
//! The structural degree compares the coalition against every weakly
//! responsible coalition and rewards overlap with the closest one. The
//! functional degree measures how many transitions the system would have to
//! take before the coalition reaches a state where it holds preclusive
//! power. Both are exact rationals in [0, 1]; no floating point enters any
//! comparison.

use std::collections::VecDeque;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::cgs::{ActionProfile, Cgs, Coalition, StateId, StateOfAffairs, StateSet};
use crate::responsibility::{
    responsible_coalitions, responsible_states, PreclusionSemantics, ResponsibleSet,
};

/// An exact rational degree, kept within [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DegreeValue(Rational64);

impl DegreeValue {
    pub fn new(value: Rational64) -> DegreeValue {
        assert!(
            value >= Rational64::zero() && value <= Rational64::one(),
            "degree out of range: {value}"
        );
        DegreeValue(value)
    }

    pub fn zero() -> DegreeValue {
        DegreeValue(Rational64::zero())
    }

    pub fn one() -> DegreeValue {
        DegreeValue(Rational64::one())
    }

    pub fn value(&self) -> Rational64 {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    /// Reduced fraction, e.g. "1/2"; integers render without a denominator.
    pub fn fraction(&self) -> String {
        if self.0.is_integer() {
            format!("{}", self.0.numer())
        } else {
            format!("{}/{}", self.0.numer(), self.0.denom())
        }
    }

    /// Fixed-point decimal with banker's rounding on the last digit.
    /// Precision is capped at 18 so the scaling stays within i128.
    pub fn decimal(&self, precision: usize) -> String {
        let precision = precision.min(18);
        let num = *self.0.numer() as i128;
        let den = *self.0.denom() as i128;
        let scale = 10i128.pow(precision as u32);
        let scaled = num * scale;
        let mut q = scaled / den;
        let rem = scaled % den;
        match (2 * rem).cmp(&den) {
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                if q % 2 != 0 {
                    q += 1;
                }
            }
            std::cmp::Ordering::Less => {}
        }
        if precision == 0 {
            return format!("{q}");
        }
        format!("{}.{:0width$}", q / scale, q % scale, width = precision)
    }
}

impl fmt::Display for DegreeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fraction())
    }
}

/// Length of a shortest power-acquisition sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distance {
    Finite(usize),
    Infinite,
}

impl Distance {
    pub fn is_finite(&self) -> bool {
        matches!(self, Distance::Finite(_))
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(n) => write!(f, "{n}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Distance::Finite(a), Distance::Finite(b)) => a.cmp(b),
            (Distance::Finite(_), Distance::Infinite) => std::cmp::Ordering::Less,
            (Distance::Infinite, Distance::Finite(_)) => std::cmp::Ordering::Greater,
            (Distance::Infinite, Distance::Infinite) => std::cmp::Ordering::Equal,
        }
    }
}

/// A concrete shortest path into the responsible region: `states` lists the
/// visited states starting at the query state, `profiles` the full action
/// profile taken at each step. `profiles.len() + 1 == states.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerAcquisitionSequence {
    pub states: Vec<StateId>,
    pub profiles: Vec<ActionProfile>,
}

/// Structural degree of responsibility. `value` is `None` exactly when no
/// coalition at all is weakly responsible; `witness` is the responsible
/// coalition realizing the maximum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdrResult {
    pub value: Option<DegreeValue>,
    pub witness: Option<Coalition>,
}

/// Functional degree of responsibility together with the distance it is
/// derived from. `witness` is present exactly when the distance is finite
/// and positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FdrResult {
    pub value: DegreeValue,
    pub distance: Distance,
    pub witness: Option<PowerAcquisitionSequence>,
}

/// Number of agents the responsible coalition has beyond the queried one.
pub fn power_difference(responsible: Coalition, query: Coalition) -> usize {
    responsible.difference(query).len()
}

/// Maximize 1 - |C_hat \ C| / |C_hat| over the given responsible set. Ties
/// resolve to the earliest coalition in canonical order, i.e. the smallest
/// witness by cardinality, then by bitset value.
pub fn sdr_over(responsible: &ResponsibleSet, query: Coalition) -> SdrResult {
    let mut best: Option<(DegreeValue, Coalition)> = None;
    for &hat in responsible.coalitions() {
        let theta = power_difference(hat, query) as i64;
        let size = hat.len() as i64;
        let value = DegreeValue::new(Rational64::one() - Rational64::new(theta, size));
        match &best {
            Some((top, _)) if value <= *top => {}
            _ => best = Some((value, hat)),
        }
    }
    match best {
        Some((value, witness)) => SdrResult {
            value: Some(value),
            witness: Some(witness),
        },
        None => SdrResult {
            value: None,
            witness: None,
        },
    }
}

/// Structural degree of responsibility of `query` at `state`.
pub fn sdr(
    model: &Cgs,
    state: StateId,
    affairs: &StateOfAffairs,
    query: Coalition,
    semantics: PreclusionSemantics,
) -> SdrResult {
    let responsible = responsible_coalitions(model, state, affairs, semantics);
    sdr_over(&responsible, query)
}

/// Breadth-first search for a shortest path from `start` into `target` along
/// the transitions of the model, every available full profile contributing
/// an edge. Successors are explored in ascending (state index, profile code)
/// order, so the returned witness is deterministic.
pub fn shortest_power_acquisition(
    model: &Cgs,
    start: StateId,
    target: &StateSet,
) -> (Distance, Option<PowerAcquisitionSequence>) {
    if target.contains(start) {
        return (Distance::Finite(0), None);
    }
    let n = model.num_states();
    let mut dist: Vec<Option<u32>> = vec![None; n];
    let mut parent: Vec<Option<(StateId, usize)>> = vec![None; n];
    dist[start.index()] = Some(0);
    let mut queue = VecDeque::new();
    queue.push_back(start);
    let mut edges: Vec<(StateId, usize)> = Vec::new();
    while let Some(u) = queue.pop_front() {
        edges.clear();
        for code in 0..model.num_profiles(u) {
            edges.push((model.successor_by_code(u, code), code));
        }
        edges.sort_unstable();
        let next_dist = dist[u.index()].unwrap() + 1;
        for &(v, code) in &edges {
            if dist[v.index()].is_some() {
                continue;
            }
            dist[v.index()] = Some(next_dist);
            parent[v.index()] = Some((u, code));
            if target.contains(v) {
                let mut states = vec![v];
                let mut profiles = Vec::new();
                let mut cur = v;
                while let Some((p, c)) = parent[cur.index()] {
                    profiles.push(model.decode_profile(p, c));
                    states.push(p);
                    cur = p;
                }
                states.reverse();
                profiles.reverse();
                return (
                    Distance::Finite(next_dist as usize),
                    Some(PowerAcquisitionSequence { states, profiles }),
                );
            }
            queue.push_back(v);
        }
    }
    (Distance::Infinite, None)
}

/// Distance from `state` to the nearest state where `query` is weakly
/// responsible, with a witnessing sequence when one exists and has positive
/// length.
pub fn power_acquisition_distance(
    model: &Cgs,
    state: StateId,
    affairs: &StateOfAffairs,
    query: Coalition,
    semantics: PreclusionSemantics,
) -> (Distance, Option<PowerAcquisitionSequence>) {
    let target = responsible_states(model, query, affairs, semantics);
    shortest_power_acquisition(model, state, &target)
}

/// Map a distance to the functional degree: 1 / (distance + 1), with 0 for
/// an unreachable responsible region.
pub fn fdr_value(distance: Distance) -> DegreeValue {
    match distance {
        Distance::Finite(n) => DegreeValue::new(Rational64::new(1, n as i64 + 1)),
        Distance::Infinite => DegreeValue::zero(),
    }
}

/// Functional degree of responsibility of `query` at `state`.
pub fn fdr(
    model: &Cgs,
    state: StateId,
    affairs: &StateOfAffairs,
    query: Coalition,
    semantics: PreclusionSemantics,
) -> FdrResult {
    let (distance, witness) = power_acquisition_distance(model, state, affairs, query, semantics);
    FdrResult {
        value: fdr_value(distance),
        distance,
        witness,
    }
}
