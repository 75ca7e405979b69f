//! Brute-force reference implementation of preclusive power.
//!
//! Instead of a fixpoint, the oracle enumerates every positional strategy of
//! the coalition outright and forward-checks the plays it induces. It shares
//! no machinery with the engine beyond the model accessors, which makes it a
//! meaningful differential-testing partner, and it is exponential in
//! `|coalition| * |Q|`, which is why every entry point takes an explicit
//! strategy budget.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cgs::{
    validate_model, ActionId, AgentId, Cgs, Coalition, StateId, StateOfAffairs, StateSet,
    ValidatedModel,
};
use crate::degrees::Distance;
use crate::parser::{ModelDocument, TransitionRecord};
use crate::responsibility::PreclusionSemantics;

/// Strategy budget accepted by default: generous for the small differential
/// models the oracle is meant for, far below anything the engine handles.
pub const DEFAULT_STRATEGY_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{count} positional strategies exceed the oracle budget of {budget}")]
    BudgetExceeded { count: u128, budget: u64 },
}

/// A memoryless strategy: one action per member per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionalStrategy {
    coalition: Coalition,
    /// `choices[member_position][state_index]`, member positions aligned
    /// with ascending agent order inside the coalition.
    choices: Vec<Vec<ActionId>>,
}

impl PositionalStrategy {
    pub fn coalition(&self) -> Coalition {
        self.coalition
    }

    /// The action the strategy plays for `agent` at `state`, if the agent is
    /// a coalition member.
    pub fn action_for(&self, agent: AgentId, state: StateId) -> Option<ActionId> {
        let position = self
            .coalition
            .members()
            .position(|member| member == agent)?;
        Some(self.choices[position][state.index()])
    }
}

/// A fixed assignment of digits to (member, state) slots, interpreted
/// against the availability sets of the model.
struct StrategySpace {
    members: Vec<AgentId>,
    num_states: usize,
    /// radix of slot `member_position * num_states + state_index`
    radices: Vec<usize>,
}

impl StrategySpace {
    fn new(model: &Cgs, coalition: Coalition) -> StrategySpace {
        let members: Vec<AgentId> = coalition.members().collect();
        let num_states = model.num_states();
        let mut radices = Vec::with_capacity(members.len() * num_states);
        for &member in &members {
            for state in model.states() {
                radices.push(model.available(state, member).len());
            }
        }
        StrategySpace {
            members,
            num_states,
            radices,
        }
    }

    fn count(&self) -> u128 {
        self.radices
            .iter()
            .fold(1u128, |acc, &r| acc.saturating_mul(r as u128))
    }

    fn digit(&self, digits: &[usize], member_position: usize, state: StateId) -> usize {
        digits[member_position * self.num_states + state.index()]
    }

    /// Advance the slot odometer; false once all assignments are exhausted.
    fn advance(&self, digits: &mut [usize]) -> bool {
        for pos in (0..digits.len()).rev() {
            if digits[pos] + 1 < self.radices[pos] {
                digits[pos] += 1;
                return true;
            }
            digits[pos] = 0;
        }
        false
    }

    fn materialize(&self, model: &Cgs, coalition: Coalition, digits: &[usize]) -> PositionalStrategy {
        let choices = self
            .members
            .iter()
            .enumerate()
            .map(|(position, &member)| {
                model
                    .states()
                    .map(|state| model.available(state, member)[self.digit(digits, position, state)])
                    .collect()
            })
            .collect();
        PositionalStrategy {
            coalition,
            choices,
        }
    }
}

/// Forward-check one strategy: walk every state reachable from `start` when
/// the members play their assigned digits, over all completions by the other
/// agents, and fail as soon as any step lands inside the affair.
fn strategy_precludes(
    model: &Cgs,
    space: &StrategySpace,
    digits: &[usize],
    start: StateId,
    affairs: &StateOfAffairs,
) -> bool {
    let k = model.num_agents();
    let member_position: Vec<Option<usize>> = (0..k)
        .map(|i| {
            space
                .members
                .iter()
                .position(|&m| m.index() == i)
        })
        .collect();
    let mut visited = StateSet::empty(model.num_states());
    visited.insert(start);
    let mut stack = vec![start];
    while let Some(q) = stack.pop() {
        let radices: Vec<usize> = (0..k)
            .map(|i| model.available(q, AgentId(i as u32)).len())
            .collect();
        let mut weight = vec![0usize; k];
        let mut w = 1usize;
        for i in (0..k).rev() {
            weight[i] = w;
            w *= radices[i];
        }
        let mut base = 0usize;
        let free: Vec<usize> = (0..k)
            .filter(|&i| match member_position[i] {
                Some(position) => {
                    base += space.digit(digits, position, q) * weight[i];
                    false
                }
                None => true,
            })
            .collect();
        let mut fdigits = vec![0usize; free.len()];
        let mut fsum = 0usize;
        loop {
            let succ = model.successor_by_code(q, base + fsum);
            if affairs.contains(succ) {
                return false;
            }
            if !visited.contains(succ) {
                visited.insert(succ);
                stack.push(succ);
            }
            let mut advanced = false;
            for pos in (0..free.len()).rev() {
                let agent = free[pos];
                if fdigits[pos] + 1 < radices[agent] {
                    fdigits[pos] += 1;
                    fsum += weight[agent];
                    advanced = true;
                    break;
                }
                fsum -= weight[agent] * (radices[agent] - 1);
                fdigits[pos] = 0;
            }
            if !advanced {
                break;
            }
        }
    }
    true
}

/// Search the full strategy space for one that precludes the affair from
/// `state`. Returns the first hit in slot-odometer order.
pub fn find_preclusion_strategy(
    model: &Cgs,
    coalition: Coalition,
    state: StateId,
    affairs: &StateOfAffairs,
    semantics: PreclusionSemantics,
    budget: u64,
) -> Result<Option<PositionalStrategy>, OracleError> {
    if semantics == PreclusionSemantics::IncludeInitial && affairs.contains(state) {
        return Ok(None);
    }
    let space = StrategySpace::new(model, coalition);
    let count = space.count();
    if count > budget as u128 {
        return Err(OracleError::BudgetExceeded {
            count,
            budget,
        });
    }
    let mut digits = vec![0usize; space.radices.len()];
    loop {
        if strategy_precludes(model, &space, &digits, state, affairs) {
            return Ok(Some(space.materialize(model, coalition, &digits)));
        }
        if !space.advance(&mut digits) {
            return Ok(None);
        }
    }
}

/// Whether the coalition can preclude the affair at `state`, decided purely
/// by strategy enumeration.
pub fn oracle_can_preclude(
    model: &Cgs,
    coalition: Coalition,
    state: StateId,
    affairs: &StateOfAffairs,
    semantics: PreclusionSemantics,
    budget: u64,
) -> Result<bool, OracleError> {
    Ok(find_preclusion_strategy(model, coalition, state, affairs, semantics, budget)?.is_some())
}

/// Shortest distance from `state` to any state where the coalition can
/// preclude the affair, by breadth-first level expansion over all available
/// profiles. Levels are capped at |Q|, beyond which no new state can appear.
pub fn oracle_distance(
    model: &Cgs,
    coalition: Coalition,
    state: StateId,
    affairs: &StateOfAffairs,
    semantics: PreclusionSemantics,
    budget: u64,
) -> Result<Distance, OracleError> {
    let n = model.num_states();
    let mut memo: Vec<Option<bool>> = vec![None; n];
    let mut level = StateSet::empty(n);
    level.insert(state);
    for steps in 0..=n {
        for q in level.iter() {
            let responsible = match memo[q.index()] {
                Some(cached) => cached,
                None => {
                    let fresh =
                        oracle_can_preclude(model, coalition, q, affairs, semantics, budget)?;
                    memo[q.index()] = Some(fresh);
                    fresh
                }
            };
            if responsible {
                return Ok(Distance::Finite(steps));
            }
        }
        let mut next = StateSet::empty(n);
        for q in level.iter() {
            for code in 0..model.num_profiles(q) {
                next.insert(model.successor_by_code(q, code));
            }
        }
        level = next;
    }
    Ok(Distance::Infinite)
}

/// Shape of the models produced by [`random_document`]. Sizes are drawn
/// uniformly from the given ranges; availability starts from one uniformly
/// chosen action per agent and state, and every further action of the
/// alphabet joins independently with `extra_action_probability`.
#[derive(Debug, Clone)]
pub struct GeneratorParams {
    pub agents: RangeInclusive<usize>,
    pub states: RangeInclusive<usize>,
    /// Size of the action alphabet shared by all agents.
    pub actions: RangeInclusive<usize>,
    pub extra_action_probability: f64,
    /// Probability for each state to enter the generated "bad" affair, so
    /// empty and all-state affairs occur naturally on small models.
    pub affair_probability: f64,
}

impl Default for GeneratorParams {
    fn default() -> GeneratorParams {
        GeneratorParams {
            agents: 1..=3,
            states: 1..=4,
            actions: 1..=2,
            extra_action_probability: 0.5,
            affair_probability: 0.35,
        }
    }
}

/// Generate a random but always well-formed model document. The same seed
/// and parameters yield the same document on every run and platform.
pub fn random_document(params: &GeneratorParams, seed: u64) -> ModelDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_agents = rng.gen_range(params.agents.clone());
    let num_states = rng.gen_range(params.states.clone());
    let num_actions = rng.gen_range(params.actions.clone());
    let agents: Vec<String> = (0..num_agents).map(|i| format!("a{i}")).collect();
    let states: Vec<String> = (0..num_states).map(|i| format!("q{i}")).collect();
    let actions: Vec<String> = (0..num_actions).map(|i| format!("x{i}")).collect();

    let mut available = BTreeMap::new();
    // index-based copy so the transition odometer below sees the same sets
    let mut avail_index: Vec<Vec<Vec<usize>>> = Vec::with_capacity(num_states);
    for state in &states {
        let mut per_agent = BTreeMap::new();
        let mut per_agent_index = Vec::with_capacity(num_agents);
        for agent in &agents {
            let forced = rng.gen_range(0..num_actions);
            let set: Vec<usize> = (0..num_actions)
                .filter(|&a| a == forced || rng.gen_bool(params.extra_action_probability))
                .collect();
            per_agent.insert(
                agent.clone(),
                set.iter().map(|&a| actions[a].clone()).collect(),
            );
            per_agent_index.push(set);
        }
        available.insert(state.clone(), per_agent);
        avail_index.push(per_agent_index);
    }

    let mut transitions = Vec::new();
    for (qi, state) in states.iter().enumerate() {
        let sets = &avail_index[qi];
        let mut digits = vec![0usize; num_agents];
        loop {
            let profile: BTreeMap<String, String> = agents
                .iter()
                .enumerate()
                .map(|(i, agent)| (agent.clone(), actions[sets[i][digits[i]]].clone()))
                .collect();
            transitions.push(TransitionRecord {
                from: state.clone(),
                profile,
                to: states[rng.gen_range(0..num_states)].clone(),
            });
            let mut advanced = false;
            for pos in (0..num_agents).rev() {
                if digits[pos] + 1 < sets[pos].len() {
                    digits[pos] += 1;
                    advanced = true;
                    break;
                }
                digits[pos] = 0;
            }
            if !advanced {
                break;
            }
        }
    }

    let bad: Vec<String> = states
        .iter()
        .filter(|_| rng.gen_bool(params.affair_probability))
        .cloned()
        .collect();
    let mut affairs = BTreeMap::new();
    affairs.insert("bad".to_string(), bad);

    ModelDocument {
        agents,
        states,
        actions,
        available,
        transitions,
        affairs,
    }
}

/// Generate and validate a random model. Generated documents are well
/// formed by construction, so validation cannot fail.
pub fn random_model(params: &GeneratorParams, seed: u64) -> ValidatedModel {
    let document = random_document(params, seed);
    validate_model(&document).expect("generated documents are always valid")
}
