//! In-memory model of a concurrent game structure.
//!
//! A model consists of agents, states, and actions (all referred to by dense
//! 0-based indices with a name table kept aside), a per-state per-agent set of
//! available actions, and a deterministic transition table. Within a state,
//! a full action profile is identified by its mixed-radix code: agent 0 is the
//! most significant digit, and each digit is the position of the chosen action
//! in that agent's (index-sorted) available set. All transition storage and
//! every tie-break in the analysis layers is expressed in terms of this code.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::parser::ModelDocument;

/// Maximum number of agents a model may have. Coalitions are machine-word
/// bitsets, so one word bounds the agent count.
pub const MAX_AGENTS: usize = 64;

/// Dense 0-based agent index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u32);

/// Dense 0-based state index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

/// Dense 0-based action index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub u32);

impl AgentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ActionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A set of agents, stored as a single-word bitset (bit i = agent i).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Coalition(u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_bits(bits: u64) -> Self {
        Coalition(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(agent: AgentId) -> Self {
        Coalition(1 << agent.0)
    }

    pub fn from_members<I: IntoIterator<Item = AgentId>>(members: I) -> Self {
        let mut c = Coalition::EMPTY;
        for a in members {
            c.insert(a);
        }
        c
    }

    /// The grand coalition over `num_agents` agents.
    pub fn grand(num_agents: usize) -> Self {
        debug_assert!(num_agents <= MAX_AGENTS);
        if num_agents == MAX_AGENTS {
            Coalition(u64::MAX)
        } else {
            Coalition((1u64 << num_agents) - 1)
        }
    }

    pub fn contains(self, agent: AgentId) -> bool {
        self.0 & (1 << agent.0) != 0
    }

    pub fn insert(&mut self, agent: AgentId) {
        self.0 |= 1 << agent.0;
    }

    /// Number of members.
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members of `self` that are not in `other`.
    pub fn difference(self, other: Coalition) -> Coalition {
        Coalition(self.0 & !other.0)
    }

    pub fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    pub fn complement(self, num_agents: usize) -> Coalition {
        Coalition(Coalition::grand(num_agents).0 & !self.0)
    }

    /// Members in ascending index order.
    pub fn members(self) -> impl Iterator<Item = AgentId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros();
                bits &= bits - 1;
                Some(AgentId(i))
            }
        })
    }

    /// Sort key realizing the canonical enumeration order:
    /// ascending cardinality, ties broken by ascending bitset value.
    pub fn enumeration_key(self) -> (u32, u64) {
        (self.0.count_ones(), self.0)
    }
}

/// All non-empty coalitions over `num_agents` agents, in canonical order
/// (ascending cardinality, then ascending bitset value).
pub fn coalitions_ascending(num_agents: usize) -> impl Iterator<Item = Coalition> {
    assert!(num_agents <= MAX_AGENTS);
    let k = num_agents as u32;
    let top = Coalition::grand(num_agents).0;
    (1..=k).flat_map(move |card| {
        let mut next = Some(if card == 64 {
            u64::MAX
        } else {
            (1u64 << card) - 1
        });
        std::iter::from_fn(move || {
            let cur = next?;
            if cur > top {
                next = None;
                return None;
            }
            // Gosper's hack: next larger integer with the same popcount.
            next = {
                let c = cur & cur.wrapping_neg();
                cur.checked_add(c)
                    .map(|r| ((cur ^ r) >> (2 + c.trailing_zeros())) | r)
            };
            Some(Coalition(cur))
        })
    })
}

/// A set of states, stored as a bitset over the model's state indices.
#[derive(Clone, PartialEq, Eq)]
pub struct StateSet {
    blocks: Vec<u64>,
    universe: usize,
}

impl StateSet {
    pub fn empty(universe: usize) -> Self {
        StateSet {
            blocks: vec![0; universe.div_ceil(64)],
            universe,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = StateSet::empty(universe);
        for b in &mut s.blocks {
            *b = u64::MAX;
        }
        s.mask_tail();
        s
    }

    pub fn from_states<I: IntoIterator<Item = StateId>>(universe: usize, states: I) -> Self {
        let mut s = StateSet::empty(universe);
        for q in states {
            s.insert(q);
        }
        s
    }

    fn mask_tail(&mut self) {
        let rem = self.universe % 64;
        if rem != 0 {
            if let Some(last) = self.blocks.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Size of the underlying state space.
    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn contains(&self, q: StateId) -> bool {
        let i = q.index();
        debug_assert!(i < self.universe);
        self.blocks[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn insert(&mut self, q: StateId) {
        let i = q.index();
        debug_assert!(i < self.universe);
        self.blocks[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, q: StateId) {
        let i = q.index();
        debug_assert!(i < self.universe);
        self.blocks[i / 64] &= !(1 << (i % 64));
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    /// Keep only states also in `other`; reports whether anything was removed.
    pub fn intersect_with(&mut self, other: &StateSet) -> bool {
        debug_assert_eq!(self.universe, other.universe);
        let mut changed = false;
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            let next = *a & b;
            changed |= next != *a;
            *a = next;
        }
        changed
    }

    pub fn union_with(&mut self, other: &StateSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    pub fn complement(&self) -> StateSet {
        let mut out = self.clone();
        for b in &mut out.blocks {
            *b = !*b;
        }
        out.mask_tail();
        out
    }

    pub fn is_subset_of(&self, other: &StateSet) -> bool {
        debug_assert_eq!(self.universe, other.universe);
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & !b == 0)
    }

    /// Member states in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.blocks.iter().enumerate().flat_map(|(w, &block)| {
            let mut bits = block;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let i = bits.trailing_zeros();
                    bits &= bits - 1;
                    Some(StateId((w * 64) as u32 + i))
                }
            })
        })
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|q| q.0)).finish()
    }
}

/// The set of states whose avoidance is under analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateOfAffairs {
    states: StateSet,
}

impl StateOfAffairs {
    pub fn new(states: StateSet) -> Self {
        StateOfAffairs { states }
    }

    pub fn states(&self) -> &StateSet {
        &self.states
    }

    /// The complement: all states outside the affair.
    pub fn avoid_region(&self) -> StateSet {
        self.states.complement()
    }

    pub fn contains(&self, q: StateId) -> bool {
        self.states.contains(q)
    }
}

/// One action per agent, indexed by agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionProfile {
    choices: Vec<ActionId>,
}

impl ActionProfile {
    pub fn new(choices: Vec<ActionId>) -> Self {
        ActionProfile { choices }
    }

    pub fn action_for(&self, agent: AgentId) -> ActionId {
        self.choices[agent.index()]
    }

    pub fn choices(&self) -> &[ActionId] {
        &self.choices
    }
}

/// A choice of actions for the members of one coalition only.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointAction {
    coalition: Coalition,
    /// Aligned with `coalition.members()` (ascending agent index).
    choices: Vec<ActionId>,
}

impl JointAction {
    pub fn new(coalition: Coalition, choices: Vec<ActionId>) -> Self {
        debug_assert_eq!(coalition.len(), choices.len());
        JointAction { coalition, choices }
    }

    pub fn coalition(&self) -> Coalition {
        self.coalition
    }

    pub fn choices(&self) -> &[ActionId] {
        &self.choices
    }

    pub fn action_for(&self, agent: AgentId) -> Option<ActionId> {
        self.coalition
            .members()
            .position(|m| m == agent)
            .map(|pos| self.choices[pos])
    }
}

/// Which kind of name an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameKind {
    Agent,
    State,
    Action,
    Affair,
}

impl fmt::Display for NameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NameKind::Agent => f.write_str("agent"),
            NameKind::State => f.write_str("state"),
            NameKind::Action => f.write_str("action"),
            NameKind::Affair => f.write_str("affair"),
        }
    }
}

/// Validation and access errors for concurrent game structures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("empty {kind} name")]
    EmptyName { kind: NameKind },
    #[error("duplicate {kind} name \"{name}\"")]
    DuplicateName { kind: NameKind, name: String },
    #[error("unknown {kind} name \"{name}\"")]
    UnknownName { kind: NameKind, name: String },
    #[error("model has {count} agents, at most {max} are supported")]
    TooManyAgents { count: usize, max: usize },
    #[error("no available actions for agent \"{agent}\" at state \"{state}\"")]
    EmptyAvailableSet { state: String, agent: String },
    #[error("duplicate action \"{action}\" in the available set of agent \"{agent}\" at state \"{state}\"")]
    DuplicateAvailableAction {
        state: String,
        agent: String,
        action: String,
    },
    #[error("transition from \"{state}\" gives no action for agent \"{agent}\"")]
    IncompleteProfile { state: String, agent: String },
    #[error("missing transition at state \"{state}\" for profile {profile}")]
    MissingTransition { state: String, profile: String },
    #[error("duplicate transition at state \"{state}\" for profile {profile}")]
    DuplicateTransition { state: String, profile: String },
    #[error("action \"{action}\" is not available for agent \"{agent}\" at state \"{state}\"")]
    UnavailableAction {
        state: String,
        agent: String,
        action: String,
    },
    #[error("duplicate state \"{state}\" in affair \"{label}\"")]
    DuplicateAffairState { label: String, state: String },
}

/// A validated concurrent game structure.
///
/// Immutable after construction; every accessor is pure, so a model can be
/// shared freely across concurrent analysis tasks.
#[derive(Debug, Clone)]
pub struct Cgs {
    agent_names: Vec<String>,
    state_names: Vec<String>,
    action_names: Vec<String>,
    /// `available[state][agent]`, each sorted by action index.
    available: Vec<Vec<Vec<ActionId>>>,
    /// `succ[state][profile_code]`.
    succ: Vec<Vec<StateId>>,
    agent_lookup: HashMap<String, AgentId>,
    state_lookup: HashMap<String, StateId>,
    action_lookup: HashMap<String, ActionId>,
}

/// A validated model together with the named affairs carried by its document.
#[derive(Debug, Clone)]
pub struct ValidatedModel {
    pub cgs: Cgs,
    pub affairs: BTreeMap<String, StateOfAffairs>,
}

impl Cgs {
    pub fn num_agents(&self) -> usize {
        self.agent_names.len()
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.agent_names.len() as u32).map(AgentId)
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.state_names.len() as u32).map(StateId)
    }

    pub fn agent_name(&self, a: AgentId) -> &str {
        &self.agent_names[a.index()]
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.state_names[q.index()]
    }

    pub fn action_name(&self, x: ActionId) -> &str {
        &self.action_names[x.index()]
    }

    pub fn agent_by_name(&self, name: &str) -> Option<AgentId> {
        self.agent_lookup.get(name).copied()
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.state_lookup.get(name).copied()
    }

    pub fn action_by_name(&self, name: &str) -> Option<ActionId> {
        self.action_lookup.get(name).copied()
    }

    pub fn grand_coalition(&self) -> Coalition {
        Coalition::grand(self.num_agents())
    }

    /// Available actions of `agent` at `state`, sorted by action index.
    pub fn available(&self, state: StateId, agent: AgentId) -> &[ActionId] {
        &self.available[state.index()][agent.index()]
    }

    /// Number of full action profiles available at `state`.
    pub fn num_profiles(&self, state: StateId) -> usize {
        self.succ[state.index()].len()
    }

    /// Successor for a profile given by its mixed-radix code at `state`.
    pub fn successor_by_code(&self, state: StateId, code: usize) -> StateId {
        self.succ[state.index()][code]
    }

    /// Mixed-radix code of a full profile at `state`. Fails if any chosen
    /// action is not available there.
    pub fn encode_profile(&self, state: StateId, profile: &ActionProfile) -> Result<usize, ModelError> {
        debug_assert_eq!(profile.choices().len(), self.num_agents());
        let mut code = 0usize;
        for agent in self.agents() {
            let avail = self.available(state, agent);
            let chosen = profile.action_for(agent);
            let pos = avail.binary_search(&chosen).map_err(|_| ModelError::UnavailableAction {
                state: self.state_name(state).to_string(),
                agent: self.agent_name(agent).to_string(),
                action: self.action_name(chosen).to_string(),
            })?;
            code = code * avail.len() + pos;
        }
        Ok(code)
    }

    /// Inverse of [`Cgs::encode_profile`].
    pub fn decode_profile(&self, state: StateId, code: usize) -> ActionProfile {
        let k = self.num_agents();
        let mut choices = vec![ActionId(0); k];
        let mut rest = code;
        for agent_idx in (0..k).rev() {
            let avail = &self.available[state.index()][agent_idx];
            choices[agent_idx] = avail[rest % avail.len()];
            rest /= avail.len();
        }
        debug_assert_eq!(rest, 0);
        ActionProfile::new(choices)
    }

    /// The unique successor of `state` under `profile`.
    pub fn outcome(&self, state: StateId, profile: &ActionProfile) -> Result<StateId, ModelError> {
        let code = self.encode_profile(state, profile)?;
        Ok(self.succ[state.index()][code])
    }

    /// All joint actions of `coalition` at `state`: the Cartesian product of
    /// the members' available sets. The empty coalition has exactly one
    /// (empty) joint action. Ordered by joint mixed-radix code.
    pub fn joint_actions(&self, state: StateId, coalition: Coalition) -> Vec<JointAction> {
        let members: Vec<AgentId> = coalition.members().collect();
        let radices: Vec<usize> = members
            .iter()
            .map(|&m| self.available(state, m).len())
            .collect();
        let total: usize = radices.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut digits = vec![0usize; members.len()];
        for _ in 0..total {
            let choices: Vec<ActionId> = members
                .iter()
                .zip(&digits)
                .map(|(&m, &d)| self.available(state, m)[d])
                .collect();
            out.push(JointAction::new(coalition, choices));
            // big-endian odometer
            for pos in (0..members.len()).rev() {
                digits[pos] += 1;
                if digits[pos] < radices[pos] {
                    break;
                }
                digits[pos] = 0;
            }
        }
        out
    }

    /// All full profiles agreeing with `joint` on its coalition, with the
    /// remaining agents drawing from their available sets. Ordered by full
    /// profile code.
    pub fn completions(&self, state: StateId, joint: &JointAction) -> Result<Vec<ActionProfile>, ModelError> {
        let k = self.num_agents();
        let mut fixed: Vec<Option<ActionId>> = vec![None; k];
        for (member, &action) in joint.coalition().members().zip(joint.choices()) {
            let avail = self.available(state, member);
            if avail.binary_search(&action).is_err() {
                return Err(ModelError::UnavailableAction {
                    state: self.state_name(state).to_string(),
                    agent: self.agent_name(member).to_string(),
                    action: self.action_name(action).to_string(),
                });
            }
            fixed[member.index()] = Some(action);
        }
        let free: Vec<usize> = (0..k).filter(|&i| fixed[i].is_none()).collect();
        let radices: Vec<usize> = free
            .iter()
            .map(|&i| self.available[state.index()][i].len())
            .collect();
        let total: usize = radices.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut digits = vec![0usize; free.len()];
        for _ in 0..total {
            let mut choices = vec![ActionId(0); k];
            for i in 0..k {
                choices[i] = match fixed[i] {
                    Some(a) => a,
                    None => {
                        let pos = free.iter().position(|&f| f == i).unwrap();
                        self.available[state.index()][i][digits[pos]]
                    }
                };
            }
            out.push(ActionProfile::new(choices));
            for pos in (0..free.len()).rev() {
                digits[pos] += 1;
                if digits[pos] < radices[pos] {
                    break;
                }
                digits[pos] = 0;
            }
        }
        Ok(out)
    }

    /// Render a coalition as `{a1,a2}` using agent names in index order.
    pub fn coalition_string(&self, c: Coalition) -> String {
        let names: Vec<&str> = c.members().map(|a| self.agent_name(a)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Render a profile as `(a,b)` using action names in agent index order.
    pub fn profile_string(&self, profile: &ActionProfile) -> String {
        let names: Vec<&str> = profile.choices().iter().map(|&x| self.action_name(x)).collect();
        format!("({})", names.join(","))
    }

    /// Render a state set as `{q0,q1}` using state names in index order.
    pub fn state_set_string(&self, set: &StateSet) -> String {
        let names: Vec<&str> = set.iter().map(|q| self.state_name(q)).collect();
        format!("{{{}}}", names.join(","))
    }
}

fn check_names(
    kind: NameKind,
    names: &[String],
    errors: &mut Vec<ModelError>,
) -> HashMap<String, u32> {
    let mut lookup = HashMap::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            errors.push(ModelError::EmptyName { kind });
            continue;
        }
        if lookup.insert(name.clone(), i as u32).is_some() {
            errors.push(ModelError::DuplicateName {
                kind,
                name: name.clone(),
            });
        }
    }
    lookup
}

/// Check a decoded document against every model invariant and build the
/// validated structure. All violations are collected and reported together.
pub fn validate_model(doc: &ModelDocument) -> Result<ValidatedModel, Vec<ModelError>> {
    let mut errors = Vec::new();

    if doc.agents.len() > MAX_AGENTS {
        errors.push(ModelError::TooManyAgents {
            count: doc.agents.len(),
            max: MAX_AGENTS,
        });
    }
    let agent_lookup = check_names(NameKind::Agent, &doc.agents, &mut errors);
    let state_lookup = check_names(NameKind::State, &doc.states, &mut errors);
    let action_lookup = check_names(NameKind::Action, &doc.actions, &mut errors);
    if !errors.is_empty() {
        // Broken name tables make every later index unreliable.
        return Err(errors);
    }

    let num_agents = doc.agents.len();
    let num_states = doc.states.len();

    // Availability: reject unknown keys, then require a non-empty entry for
    // every (state, agent) pair.
    for (state_name, by_agent) in &doc.available {
        if !state_lookup.contains_key(state_name) {
            errors.push(ModelError::UnknownName {
                kind: NameKind::State,
                name: state_name.clone(),
            });
            continue;
        }
        for agent_name in by_agent.keys() {
            if !agent_lookup.contains_key(agent_name) {
                errors.push(ModelError::UnknownName {
                    kind: NameKind::Agent,
                    name: agent_name.clone(),
                });
            }
        }
    }

    let mut available: Vec<Vec<Vec<ActionId>>> = vec![vec![Vec::new(); num_agents]; num_states];
    // Tracks (state, agent) pairs whose availability could not be resolved,
    // so the totality check below does not pile on spurious errors.
    let mut availability_ok: Vec<bool> = vec![true; num_states];
    for (state_idx, state_name) in doc.states.iter().enumerate() {
        for (agent_idx, agent_name) in doc.agents.iter().enumerate() {
            let entry = doc
                .available
                .get(state_name)
                .and_then(|m| m.get(agent_name));
            let actions = match entry {
                Some(list) if !list.is_empty() => list,
                _ => {
                    errors.push(ModelError::EmptyAvailableSet {
                        state: state_name.clone(),
                        agent: agent_name.clone(),
                    });
                    availability_ok[state_idx] = false;
                    continue;
                }
            };
            let mut resolved: Vec<ActionId> = Vec::with_capacity(actions.len());
            for action_name in actions {
                match action_lookup.get(action_name) {
                    None => {
                        errors.push(ModelError::UnknownName {
                            kind: NameKind::Action,
                            name: action_name.clone(),
                        });
                        availability_ok[state_idx] = false;
                    }
                    Some(&idx) => {
                        if resolved.contains(&ActionId(idx)) {
                            errors.push(ModelError::DuplicateAvailableAction {
                                state: state_name.clone(),
                                agent: agent_name.clone(),
                                action: action_name.clone(),
                            });
                        } else {
                            resolved.push(ActionId(idx));
                        }
                    }
                }
            }
            resolved.sort();
            available[state_idx][agent_idx] = resolved;
        }
    }

    // Transition table: resolve each record, then check determinism and
    // totality per state over the mixed-radix profile space.
    let mut provided: Vec<HashMap<usize, StateId>> = vec![HashMap::new(); num_states];
    for record in &doc.transitions {
        let from = match state_lookup.get(&record.from) {
            Some(&idx) => StateId(idx),
            None => {
                errors.push(ModelError::UnknownName {
                    kind: NameKind::State,
                    name: record.from.clone(),
                });
                continue;
            }
        };
        let to = match state_lookup.get(&record.to) {
            Some(&idx) => StateId(idx),
            None => {
                errors.push(ModelError::UnknownName {
                    kind: NameKind::State,
                    name: record.to.clone(),
                });
                continue;
            }
        };
        for agent_name in record.profile.keys() {
            if !agent_lookup.contains_key(agent_name) {
                errors.push(ModelError::UnknownName {
                    kind: NameKind::Agent,
                    name: agent_name.clone(),
                });
            }
        }
        if !availability_ok[from.index()] {
            continue;
        }
        let mut code = 0usize;
        let mut record_ok = true;
        for (agent_idx, agent_name) in doc.agents.iter().enumerate() {
            let action_name = match record.profile.get(agent_name) {
                Some(name) => name,
                None => {
                    errors.push(ModelError::IncompleteProfile {
                        state: record.from.clone(),
                        agent: agent_name.clone(),
                    });
                    record_ok = false;
                    break;
                }
            };
            let action = match action_lookup.get(action_name) {
                Some(&idx) => ActionId(idx),
                None => {
                    errors.push(ModelError::UnknownName {
                        kind: NameKind::Action,
                        name: action_name.clone(),
                    });
                    record_ok = false;
                    break;
                }
            };
            let avail = &available[from.index()][agent_idx];
            match avail.binary_search(&action) {
                Ok(pos) => code = code * avail.len() + pos,
                Err(_) => {
                    errors.push(ModelError::UnavailableAction {
                        state: record.from.clone(),
                        agent: agent_name.clone(),
                        action: action_name.clone(),
                    });
                    record_ok = false;
                    break;
                }
            }
        }
        if !record_ok {
            continue;
        }
        if provided[from.index()].insert(code, to).is_some() {
            errors.push(ModelError::DuplicateTransition {
                state: record.from.clone(),
                profile: profile_names(doc, &available, from, code),
            });
        }
    }

    let mut succ: Vec<Vec<StateId>> = Vec::with_capacity(num_states);
    for state_idx in 0..num_states {
        if !availability_ok[state_idx] {
            succ.push(Vec::new());
            continue;
        }
        let expected: u128 = available[state_idx]
            .iter()
            .map(|a| a.len() as u128)
            .product();
        let got = &provided[state_idx];
        if (got.len() as u128) < expected {
            // The smallest absent code is at most `got.len()`, so this scan
            // never needs the full profile space.
            let mut missing = 0usize;
            while got.contains_key(&missing) {
                missing += 1;
            }
            errors.push(ModelError::MissingTransition {
                state: doc.states[state_idx].clone(),
                profile: profile_names(doc, &available, StateId(state_idx as u32), missing),
            });
            succ.push(Vec::new());
            continue;
        }
        let mut table = vec![StateId(0); got.len()];
        for (&code, &to) in got {
            table[code] = to;
        }
        succ.push(table);
    }

    // Named affairs.
    let mut affairs = BTreeMap::new();
    for (label, state_list) in &doc.affairs {
        let mut set = StateSet::empty(num_states);
        for state_name in state_list {
            match state_lookup.get(state_name) {
                None => errors.push(ModelError::UnknownName {
                    kind: NameKind::State,
                    name: state_name.clone(),
                }),
                Some(&idx) => {
                    let q = StateId(idx);
                    if set.contains(q) {
                        errors.push(ModelError::DuplicateAffairState {
                            label: label.clone(),
                            state: state_name.clone(),
                        });
                    } else {
                        set.insert(q);
                    }
                }
            }
        }
        affairs.insert(label.clone(), StateOfAffairs::new(set));
    }

    if !errors.is_empty() {
        return Err(errors);
    }

    let cgs = Cgs {
        agent_names: doc.agents.clone(),
        state_names: doc.states.clone(),
        action_names: doc.actions.clone(),
        available,
        succ,
        agent_lookup: agent_lookup
            .into_iter()
            .map(|(name, idx)| (name, AgentId(idx)))
            .collect(),
        state_lookup: state_lookup
            .into_iter()
            .map(|(name, idx)| (name, StateId(idx)))
            .collect(),
        action_lookup: action_lookup
            .into_iter()
            .map(|(name, idx)| (name, ActionId(idx)))
            .collect(),
    };
    Ok(ValidatedModel { cgs, affairs })
}

fn profile_names(
    doc: &ModelDocument,
    available: &[Vec<Vec<ActionId>>],
    state: StateId,
    code: usize,
) -> String {
    let avail = &available[state.index()];
    let mut digits = vec![0usize; avail.len()];
    let mut rest = code;
    for i in (0..avail.len()).rev() {
        let r = avail[i].len().max(1);
        digits[i] = rest % r;
        rest /= r;
    }
    let names: Vec<&str> = avail
        .iter()
        .zip(&digits)
        .map(|(actions, &d)| doc.actions[actions[d].index()].as_str())
        .collect();
    format!("({})", names.join(","))
}
