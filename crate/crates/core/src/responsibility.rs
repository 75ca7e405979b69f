//! Preclusive power: which coalitions can keep the system out of a state of
//! affairs forever.
//!
//! "Coalition C can preclude S from q" is decided as a safety game. The safe
//! region is the greatest set X of non-S states such that C can force the
//! next state back into X (a greatest fixpoint of the controllable
//! predecessor); perpetual avoidance is a safety objective, so positional
//! strategies suffice and the fixpoint characterization is exact. Two
//! semantics are offered for the initial state: the default requires all
//! steps from 1 on to avoid S, the alternative also requires the initial
//! state itself to lie outside S.

use std::collections::HashSet;
use std::fmt;

use crate::cgs::{coalitions_ascending, Cgs, Coalition, StateId, StateOfAffairs, StateSet};

/// How the initial state of a play is treated when deciding preclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PreclusionSemantics {
    /// Every play from the state must avoid the affair at all steps >= 1;
    /// the state itself may lie inside it.
    #[default]
    FutureAvoidance,
    /// Every play must avoid the affair at all steps >= 0.
    IncludeInitial,
}

impl fmt::Display for PreclusionSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreclusionSemantics::FutureAvoidance => f.write_str("future"),
            PreclusionSemantics::IncludeInitial => f.write_str("include-initial"),
        }
    }
}

/// Per-state projection tables from full profile codes to joint action codes
/// of one fixed coalition. Built once per coalition and reused across all
/// fixpoint iterations.
struct CoalitionView {
    /// Number of joint actions of the coalition at each state.
    num_joint: Vec<usize>,
    /// `proj[state][profile_code]` = joint action code of the coalition.
    proj: Vec<Vec<u32>>,
}

impl CoalitionView {
    fn build(model: &Cgs, coalition: Coalition) -> CoalitionView {
        let k = model.num_agents();
        let member_mask: Vec<bool> = (0..k)
            .map(|i| coalition.contains(crate::cgs::AgentId(i as u32)))
            .collect();
        let mut num_joint = Vec::with_capacity(model.num_states());
        let mut proj = Vec::with_capacity(model.num_states());
        for q in model.states() {
            let radices: Vec<usize> = (0..k)
                .map(|i| model.available(q, crate::cgs::AgentId(i as u32)).len())
                .collect();
            // Big-endian joint weights over the members only.
            let mut jweight = vec![0u64; k];
            let mut w = 1u64;
            for i in (0..k).rev() {
                if member_mask[i] {
                    jweight[i] = w;
                    w = w.checked_mul(radices[i] as u64).expect("joint action space overflow");
                }
            }
            let total = model.num_profiles(q);
            let mut table = Vec::with_capacity(total);
            let mut digits = vec![0usize; k];
            let mut jcode = 0u64;
            for code in 0..total {
                debug_assert!(jcode <= u32::MAX as u64);
                table.push(jcode as u32);
                if code + 1 == total {
                    break;
                }
                // big-endian odometer, keeping the joint code in step
                for pos in (0..k).rev() {
                    if digits[pos] + 1 < radices[pos] {
                        digits[pos] += 1;
                        jcode += jweight[pos];
                        break;
                    }
                    jcode -= jweight[pos] * (radices[pos] - 1) as u64;
                    digits[pos] = 0;
                }
            }
            num_joint.push(w as usize);
            proj.push(table);
        }
        CoalitionView { num_joint, proj }
    }
}

/// Stamp-based scratch marking joint actions spoiled in the current state.
struct CpreScratch {
    stamps: Vec<u32>,
    generation: u32,
}

impl CpreScratch {
    fn new(view: &CoalitionView) -> CpreScratch {
        let max_joint = view.num_joint.iter().copied().max().unwrap_or(0);
        CpreScratch {
            stamps: vec![0; max_joint],
            generation: 0,
        }
    }
}

fn cpre_with_view(
    model: &Cgs,
    view: &CoalitionView,
    target: &StateSet,
    candidates: Option<&StateSet>,
    scratch: &mut CpreScratch,
) -> StateSet {
    let mut out = StateSet::empty(model.num_states());
    let visit = |q: StateId, out: &mut StateSet, scratch: &mut CpreScratch| {
        scratch.generation += 1;
        let generation = scratch.generation;
        let mut good = view.num_joint[q.index()];
        let proj = &view.proj[q.index()];
        for (code, &slot) in proj.iter().enumerate() {
            if !target.contains(model.successor_by_code(q, code)) {
                let j = slot as usize;
                if scratch.stamps[j] != generation {
                    scratch.stamps[j] = generation;
                    good -= 1;
                    if good == 0 {
                        break;
                    }
                }
            }
        }
        if good > 0 {
            out.insert(q);
        }
    };
    match candidates {
        Some(set) => {
            for q in set.iter() {
                visit(q, &mut out, scratch);
            }
        }
        None => {
            for q in model.states() {
                visit(q, &mut out, scratch);
            }
        }
    }
    out
}

/// Controllable predecessor: the states where `coalition` has a joint action
/// such that every completion by the remaining agents lands in `target`.
pub fn cpre(model: &Cgs, coalition: Coalition, target: &StateSet) -> StateSet {
    let view = CoalitionView::build(model, coalition);
    let mut scratch = CpreScratch::new(&view);
    cpre_with_view(model, &view, target, None, &mut scratch)
}

/// Greatest set X of non-affair states with X subseteq cpre(coalition, X):
/// the region from which the coalition can keep play outside the affair
/// forever. Computed by iterating to a fixpoint from the full complement,
/// which stabilizes within |Q| passes.
pub fn safe_region(model: &Cgs, coalition: Coalition, affairs: &StateOfAffairs) -> StateSet {
    let view = CoalitionView::build(model, coalition);
    let mut scratch = CpreScratch::new(&view);
    let mut region = affairs.avoid_region();
    loop {
        let next = cpre_with_view(model, &view, &region, Some(&region), &mut scratch);
        if next == region {
            return region;
        }
        region = next;
    }
}

/// All states where `coalition` is weakly responsible for `affairs` under the
/// given semantics.
pub fn responsible_states(
    model: &Cgs,
    coalition: Coalition,
    affairs: &StateOfAffairs,
    semantics: PreclusionSemantics,
) -> StateSet {
    let safe = safe_region(model, coalition, affairs);
    match semantics {
        // A state can preclude from the next step on iff it can force play
        // into the safe region right away.
        PreclusionSemantics::FutureAvoidance => cpre(model, coalition, &safe),
        PreclusionSemantics::IncludeInitial => safe,
    }
}

/// Whether `coalition` can preclude `affairs` at `state`.
pub fn can_preclude(
    model: &Cgs,
    coalition: Coalition,
    state: StateId,
    affairs: &StateOfAffairs,
    semantics: PreclusionSemantics,
) -> bool {
    responsible_states(model, coalition, affairs, semantics).contains(state)
}

/// The set of all weakly responsible coalitions at one state, i.e. the
/// non-empty coalitions that can preclude the affair there. Upward closed.
#[derive(Debug, Clone)]
pub struct ResponsibleSet {
    state: StateId,
    affairs: StateOfAffairs,
    /// Canonical order: ascending cardinality, then ascending bitset value.
    coalitions: Vec<Coalition>,
}

impl ResponsibleSet {
    pub fn new(state: StateId, affairs: StateOfAffairs, mut coalitions: Vec<Coalition>) -> Self {
        coalitions.sort_by_key(|c| c.enumeration_key());
        ResponsibleSet {
            state,
            affairs,
            coalitions,
        }
    }

    pub fn state(&self) -> StateId {
        self.state
    }

    pub fn affairs(&self) -> &StateOfAffairs {
        &self.affairs
    }

    /// Member coalitions in canonical order.
    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    pub fn is_empty(&self) -> bool {
        self.coalitions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coalitions.len()
    }

    pub fn contains(&self, c: Coalition) -> bool {
        self.coalitions
            .binary_search_by_key(&c.enumeration_key(), |m| m.enumeration_key())
            .is_ok()
    }
}

/// Enumerate all non-empty responsible coalitions at `state`.
///
/// Preclusive power is monotone: a superset inherits any guarantee by fixing
/// arbitrary actions for its extra members. Enumeration in ascending
/// cardinality therefore only runs the fixpoint for coalitions that contain
/// no previously found responsible coalition; everything above the growing
/// antichain of minimal responsible coalitions is marked directly.
pub fn responsible_coalitions(
    model: &Cgs,
    state: StateId,
    affairs: &StateOfAffairs,
    semantics: PreclusionSemantics,
) -> ResponsibleSet {
    let mut found = Vec::new();
    let mut antichain: Vec<Coalition> = Vec::new();
    for coalition in coalitions_ascending(model.num_agents()) {
        let responsible = if antichain.iter().any(|m| m.is_subset_of(coalition)) {
            true
        } else if can_preclude(model, coalition, state, affairs, semantics) {
            // All strict subsets were already enumerated and none was
            // responsible, so this coalition is minimal.
            antichain.push(coalition);
            true
        } else {
            false
        };
        if responsible {
            found.push(coalition);
        }
    }
    ResponsibleSet {
        state,
        affairs: affairs.clone(),
        coalitions: found,
    }
}

/// The inclusion-minimal members of an upward-closed responsible set. Their
/// upward closure regenerates the input.
pub fn minimal_responsible_coalitions(responsible: &ResponsibleSet) -> Vec<Coalition> {
    let bits: HashSet<u64> = responsible.coalitions().iter().map(|c| c.bits()).collect();
    responsible
        .coalitions()
        .iter()
        .copied()
        .filter(|c| {
            // Upward closure means any responsible strict subset implies a
            // responsible subset one member smaller.
            c.members().all(|agent| {
                let without = c.difference(Coalition::singleton(agent));
                without.is_empty() || !bits.contains(&without.bits())
            })
        })
        .collect()
}
