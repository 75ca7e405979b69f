//! Acceptance gate for the whole workspace: one end-to-end check per
//! release criterion, each reported as a single `PASS`/`FAIL` line. The
//! test fails when any criterion fails; run with `-- --nocapture` to see
//! the lines on a passing run too.
//!
//! The checks are, in order:
//!
//! 1. exact expected values on the two-agent fixture, reproduced by the
//!    brute-force oracle first and then asserted against the engine;
//! 2. engine ≡ oracle on a corpus of seeded random models, for every
//!    state, every coalition (including the empty one) and both
//!    semantics, covering preclusion and acquisition distance;
//! 3. monotonicity of preclusive power and of both degrees under
//!    coalition inclusion;
//! 4. definitional shape of both degrees (range, attained extremes,
//!    reciprocal form of the functional degree);
//! 5. the structural degree computed over the full responsible set equals
//!    the one computed over the upward closure of its minimal antichain;
//! 6. canonical round-trip stability of the model format plus a fuzz run
//!    that must produce structured errors, never a crash;
//! 7. byte-identical `respdeg report` output across repeated runs and
//!    thread counts on a 255-coalition model, within a time budget.

use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use respdeg_core::cgs::coalitions_ascending;
use respdeg_core::degrees::shortest_power_acquisition;
use respdeg_core::oracle::{
    oracle_can_preclude, oracle_distance, random_model, GeneratorParams, DEFAULT_STRATEGY_BUDGET,
};
use respdeg_core::parser::parse_model_bytes;
use respdeg_core::{
    can_preclude, fdr, fdr_value, minimal_responsible_coalitions, parse_model,
    power_acquisition_distance, responsible_coalitions, responsible_states, sdr, sdr_over,
    serialize_model, validate_model, Cgs, Coalition, Distance, PreclusionSemantics,
    ResponsibleSet, StateSet, ValidatedModel,
};

/// Time budget for the fixture-exactness check.
const FIXTURE_TIME_LIMIT: Duration = Duration::from_secs(1);
/// Time budget for the full oracle-equivalence sweep.
const CORPUS_TIME_LIMIT: Duration = Duration::from_secs(300);
/// Time budget for a single run of `respdeg report` on the large model.
const REPORT_TIME_LIMIT: Duration = Duration::from_secs(30);
/// Number of seeded models in the differential corpus.
const CORPUS_MODELS: usize = 220;
/// Number of fuzz inputs fed to the parser.
const FUZZ_INPUTS: usize = 100_000;
const FUZZ_SEED: u64 = 42;
/// Seed for the 8-agent, 100-state model used by the determinism check.
const LARGE_MODEL_SEED: u64 = 2026;

const SEMANTICS: [PreclusionSemantics; 2] = [
    PreclusionSemantics::FutureAvoidance,
    PreclusionSemantics::IncludeInitial,
];

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/e1.json")
}

fn load_fixture() -> ValidatedModel {
    let text = std::fs::read_to_string(fixture_path()).expect("fixture is readable");
    let doc = parse_model(&text).expect("fixture parses");
    validate_model(&doc).expect("fixture validates")
}

/// The empty coalition followed by every non-empty one, in canonical order.
fn all_coalitions(num_agents: usize) -> impl Iterator<Item = Coalition> {
    std::iter::once(Coalition::EMPTY).chain(coalitions_ascending(num_agents))
}

fn fmt_duration(d: Duration) -> String {
    if d < Duration::from_secs(1) {
        format!("{} ms", d.as_millis())
    } else {
        format!("{:.1} s", d.as_secs_f64())
    }
}

/// Criterion 1: exact values on the fixture, oracle first, engine second.
fn fixture_exactness() -> Result<String, String> {
    let started = Instant::now();
    let model = load_fixture();
    let cgs = &model.cgs;
    let bad = model.affairs.get("bad").ok_or("fixture lacks affair \"bad\"")?;
    let sem = PreclusionSemantics::FutureAvoidance;
    let budget = DEFAULT_STRATEGY_BUDGET;
    let mut problems: Vec<String> = Vec::new();

    let q0 = cgs.state_by_name("q0").unwrap();
    let q1 = cgs.state_by_name("q1").unwrap();
    let q2 = cgs.state_by_name("q2").unwrap();
    let c1 = Coalition::singleton(cgs.agent_by_name("a1").unwrap());
    let c2 = Coalition::singleton(cgs.agent_by_name("a2").unwrap());
    let c12 = Coalition::grand(2);

    // Responsible sets per state, derived from the oracle alone.
    let mut oracle_sets = Vec::new();
    for q in [q0, q1, q2] {
        let mut members = Vec::new();
        for coalition in coalitions_ascending(cgs.num_agents()) {
            let responsible = oracle_can_preclude(cgs, coalition, q, bad, sem, budget)
                .map_err(|e| e.to_string())?;
            if responsible {
                members.push(coalition);
            }
        }
        oracle_sets.push(ResponsibleSet::new(q, bad.clone(), members));
    }
    if oracle_sets[0].coalitions() != [c12] {
        problems.push("oracle responsible set at q0 is not {{a1,a2}}".into());
    }
    if oracle_sets[1].coalitions() != [c1, c2, c12] {
        problems.push("oracle responsible set at q1 is not {{a1},{a2},{a1,a2}}".into());
    }
    if !oracle_sets[2].is_empty() {
        problems.push("oracle responsible set at q2 is not empty".into());
    }
    for (set, q) in oracle_sets.iter().zip([q0, q1, q2]) {
        let engine = responsible_coalitions(cgs, q, bad, sem);
        if engine.coalitions() != set.coalitions() {
            problems.push(format!(
                "engine responsible set at {} differs from oracle",
                cgs.state_name(q)
            ));
        }
    }

    // Structural degree, computed over the oracle-derived sets.
    let expect_sdr = |set: &ResponsibleSet, query: Coalition, want: Option<&str>| {
        let got = sdr_over(set, query);
        let got_fraction = got.value.map(|v| v.fraction());
        (got, got_fraction.as_deref() == want)
    };
    let sdr_cases = [
        (0usize, c1, Some("1/2")),
        (0, c2, Some("1/2")),
        (0, c12, Some("1")),
        (0, Coalition::EMPTY, Some("0")),
        (2, c1, None),
        (2, c12, None),
        (2, Coalition::EMPTY, None),
    ];
    for (set_idx, query, want) in sdr_cases {
        let q = [q0, q1, q2][set_idx];
        let (oracle_result, matches) = expect_sdr(&oracle_sets[set_idx], query, want);
        if !matches {
            problems.push(format!(
                "oracle-derived structural degree at {} for {} is {:?}, expected {:?}",
                cgs.state_name(q),
                cgs.coalition_string(query),
                oracle_result.value.map(|v| v.fraction()),
                want
            ));
        }
        if sdr(cgs, q, bad, query, sem) != oracle_result {
            problems.push(format!(
                "engine structural degree at {} for {} differs from oracle",
                cgs.state_name(q),
                cgs.coalition_string(query)
            ));
        }
    }

    // Functional degree, from oracle distances first.
    let mut fdr_cases = vec![(q1, c1, "1"), (q0, c1, "1/2")];
    for coalition in all_coalitions(cgs.num_agents()) {
        fdr_cases.push((q2, coalition, "0"));
    }
    for (q, coalition, want) in fdr_cases {
        let oracle_d =
            oracle_distance(cgs, coalition, q, bad, sem, budget).map_err(|e| e.to_string())?;
        let oracle_value = fdr_value(oracle_d);
        if oracle_value.fraction() != want {
            problems.push(format!(
                "oracle functional degree at {} for {} is {}, expected {}",
                cgs.state_name(q),
                cgs.coalition_string(coalition),
                oracle_value.fraction(),
                want
            ));
        }
        let engine = fdr(cgs, q, bad, coalition, sem);
        if engine.value != oracle_value || engine.distance != oracle_d {
            problems.push(format!(
                "engine functional degree at {} for {} differs from oracle",
                cgs.state_name(q),
                cgs.coalition_string(coalition)
            ));
        }
    }

    let elapsed = started.elapsed();
    if elapsed >= FIXTURE_TIME_LIMIT {
        problems.push(format!(
            "took {}, limit {}",
            fmt_duration(elapsed),
            fmt_duration(FIXTURE_TIME_LIMIT)
        ));
    }
    if problems.is_empty() {
        Ok(format!(
            "oracle reproduces every pinned value and the engine matches ({})",
            fmt_duration(elapsed)
        ))
    } else {
        Err(problems.join("; "))
    }
}

/// Criterion 2: engine ≡ oracle on the whole corpus, both semantics,
/// every state and coalition, preclusion and acquisition distance.
fn oracle_equivalence(corpus: &[ValidatedModel]) -> Result<String, String> {
    let started = Instant::now();
    if corpus.len() < 200 {
        return Err(format!("corpus has only {} models", corpus.len()));
    }
    let shape_ok = corpus.iter().all(|m| {
        m.cgs.num_agents() <= 3
            && m.cgs.num_states() <= 4
            && m.cgs.states().all(|q| {
                m.cgs
                    .agents()
                    .all(|a| m.cgs.available(q, a).len() <= 2)
            })
    });
    if !shape_ok {
        return Err("corpus violates the size bounds (agents ≤ 3, states ≤ 4, actions ≤ 2)".into());
    }

    let mut checks = 0usize;
    let mut disagreements = 0usize;
    let mut first: Option<String> = None;
    for (seed, model) in corpus.iter().enumerate() {
        let cgs = &model.cgs;
        let bad = &model.affairs["bad"];
        for sem in SEMANTICS {
            for coalition in all_coalitions(cgs.num_agents()) {
                let region = responsible_states(cgs, coalition, bad, sem);
                for q in cgs.states() {
                    let oracle_p =
                        oracle_can_preclude(cgs, coalition, q, bad, sem, DEFAULT_STRATEGY_BUDGET)
                            .map_err(|e| format!("seed {seed}: {e}"))?;
                    if region.contains(q) != oracle_p {
                        disagreements += 1;
                        first.get_or_insert_with(|| {
                            format!(
                                "preclusion mismatch: seed {seed}, {sem}, state {}, coalition {}",
                                cgs.state_name(q),
                                cgs.coalition_string(coalition)
                            )
                        });
                    }
                    let (engine_d, _) = power_acquisition_distance(cgs, q, bad, coalition, sem);
                    let oracle_d =
                        oracle_distance(cgs, coalition, q, bad, sem, DEFAULT_STRATEGY_BUDGET)
                            .map_err(|e| format!("seed {seed}: {e}"))?;
                    if engine_d != oracle_d {
                        disagreements += 1;
                        first.get_or_insert_with(|| {
                            format!(
                                "distance mismatch: seed {seed}, {sem}, state {}, coalition {}",
                                cgs.state_name(q),
                                cgs.coalition_string(coalition)
                            )
                        });
                    }
                    checks += 2;
                }
            }
        }
    }

    let elapsed = started.elapsed();
    if disagreements > 0 {
        return Err(format!(
            "{disagreements} disagreements out of {checks} checks; first: {}",
            first.unwrap_or_default()
        ));
    }
    if elapsed >= CORPUS_TIME_LIMIT {
        return Err(format!(
            "took {}, limit {}",
            fmt_duration(elapsed),
            fmt_duration(CORPUS_TIME_LIMIT)
        ));
    }
    Ok(format!(
        "{} models × 2 semantics, {checks} checks, 0 disagreements ({})",
        corpus.len(),
        fmt_duration(elapsed)
    ))
}

/// Criterion 3: preclusive power and both degrees are monotone under
/// coalition inclusion, on every corpus model and both semantics.
fn monotonicity(corpus: &[ValidatedModel]) -> Result<String, String> {
    let started = Instant::now();
    let mut pairs = 0usize;
    let mut violations = 0usize;
    let mut first: Option<String> = None;
    for (seed, model) in corpus.iter().enumerate() {
        let cgs = &model.cgs;
        let bad = &model.affairs["bad"];
        let coalitions: Vec<Coalition> = all_coalitions(cgs.num_agents()).collect();
        for sem in SEMANTICS {
            let regions: Vec<StateSet> = coalitions
                .iter()
                .map(|&c| responsible_states(cgs, c, bad, sem))
                .collect();
            let distances: Vec<Vec<Distance>> = regions
                .iter()
                .map(|region| {
                    cgs.states()
                        .map(|q| shortest_power_acquisition(cgs, q, region).0)
                        .collect()
                })
                .collect();
            let sdr_values: Vec<Vec<_>> = cgs
                .states()
                .map(|q| {
                    let set = responsible_coalitions(cgs, q, bad, sem);
                    coalitions
                        .iter()
                        .map(|&c| sdr_over(&set, c).value)
                        .collect()
                })
                .collect();
            for (i, &small) in coalitions.iter().enumerate() {
                for (j, &large) in coalitions.iter().enumerate() {
                    if !small.is_subset_of(large) {
                        continue;
                    }
                    pairs += 1;
                    for q in cgs.states() {
                        let mut note = |what: &str| {
                            violations += 1;
                            first.get_or_insert_with(|| {
                                format!(
                                    "{what} not monotone: seed {seed}, {sem}, state {}, {} ⊆ {}",
                                    cgs.state_name(q),
                                    cgs.coalition_string(small),
                                    cgs.coalition_string(large)
                                )
                            });
                        };
                        if regions[i].contains(q) && !regions[j].contains(q) {
                            note("preclusion");
                        }
                        if let (Some(a), Some(b)) =
                            (sdr_values[q.index()][i], sdr_values[q.index()][j])
                        {
                            if a > b {
                                note("structural degree");
                            }
                        }
                        if fdr_value(distances[i][q.index()])
                            > fdr_value(distances[j][q.index()])
                        {
                            note("functional degree");
                        }
                    }
                }
            }
        }
    }
    let elapsed = started.elapsed();
    if violations > 0 {
        return Err(format!(
            "{violations} violations; first: {}",
            first.unwrap_or_default()
        ));
    }
    Ok(format!(
        "{pairs} inclusion pairs across {} models, 0 violations ({})",
        corpus.len(),
        fmt_duration(elapsed)
    ))
}

/// Criterion 4: the degrees have their definitional shape at every corpus
/// query: structural degree in [0,1] with the maximum attained exactly on
/// supersets of responsible coalitions; functional degree of the form
/// 1/(n+1) or 0, equal to 1 exactly at responsible states, and strictly
/// between 0 and 1 whenever the distance is finite and positive.
fn definition_shapes(corpus: &[ValidatedModel]) -> Result<String, String> {
    let started = Instant::now();
    let mut queries = 0usize;
    let mut violations = 0usize;
    let mut first: Option<String> = None;
    for (seed, model) in corpus.iter().enumerate() {
        let cgs = &model.cgs;
        let bad = &model.affairs["bad"];
        for sem in SEMANTICS {
            for q in cgs.states() {
                let set = responsible_coalitions(cgs, q, bad, sem);
                for query in all_coalitions(cgs.num_agents()) {
                    queries += 1;
                    let mut note = |what: String| {
                        violations += 1;
                        first.get_or_insert_with(|| {
                            format!(
                                "{what}: seed {seed}, {sem}, state {}, coalition {}",
                                cgs.state_name(q),
                                cgs.coalition_string(query)
                            )
                        });
                    };

                    let s = sdr_over(&set, query);
                    if set.is_empty() {
                        if s.value.is_some() {
                            note("structural degree defined without responsible sets".into());
                        }
                    } else {
                        match s.value {
                            None => note("structural degree undefined despite responsible sets".into()),
                            Some(v) => {
                                let zero = respdeg_core::DegreeValue::zero();
                                let one = respdeg_core::DegreeValue::one();
                                if v < zero || v > one {
                                    note(format!("structural degree {} out of range", v.fraction()));
                                }
                                let has_responsible_subset = set
                                    .coalitions()
                                    .iter()
                                    .any(|c| c.is_subset_of(query));
                                if v.is_one() != has_responsible_subset {
                                    note("structural degree 1 without a responsible subset".into());
                                }
                            }
                        }
                    }

                    let (distance, witness) =
                        power_acquisition_distance(cgs, q, bad, query, sem);
                    let value = fdr_value(distance);
                    let responsible = can_preclude(cgs, query, q, bad, sem);
                    if (distance == Distance::Finite(0)) != responsible {
                        note("distance 0 does not coincide with preclusive power".into());
                    }
                    if value.is_one() != responsible {
                        note("functional degree 1 does not coincide with preclusive power".into());
                    }
                    match distance {
                        Distance::Finite(n) => {
                            if value.fraction() != format!("1/{}", n + 1)
                                && !(n == 0 && value.is_one())
                            {
                                note(format!(
                                    "functional degree {} is not the reciprocal of {} + 1",
                                    value.fraction(),
                                    n
                                ));
                            }
                            if n > 0 && (value.is_zero() || value.is_one()) {
                                note("functional degree not strictly between 0 and 1".into());
                            }
                            if (n > 0) != witness.is_some() {
                                note("acquisition witness presence does not match distance".into());
                            }
                        }
                        Distance::Infinite => {
                            if !value.is_zero() {
                                note("functional degree nonzero despite unreachable power".into());
                            }
                            if witness.is_some() {
                                note("acquisition witness despite unreachable power".into());
                            }
                        }
                    }
                }
            }
        }
    }
    let elapsed = started.elapsed();
    if violations > 0 {
        return Err(format!(
            "{violations} violations; first: {}",
            first.unwrap_or_default()
        ));
    }
    Ok(format!(
        "{queries} queries across {} models, 0 violations ({})",
        corpus.len(),
        fmt_duration(elapsed)
    ))
}

/// Criterion 5: the structural degree over the full responsible set equals
/// the one over the upward closure of its minimal antichain, everywhere.
fn antichain_consistency(corpus: &[ValidatedModel]) -> Result<String, String> {
    let started = Instant::now();
    let mut comparisons = 0usize;
    let mut violations = 0usize;
    let mut first: Option<String> = None;
    for (seed, model) in corpus.iter().enumerate() {
        let cgs = &model.cgs;
        let bad = &model.affairs["bad"];
        for sem in SEMANTICS {
            for q in cgs.states() {
                let set = responsible_coalitions(cgs, q, bad, sem);
                let minimal = minimal_responsible_coalitions(&set);
                let closure: Vec<Coalition> = coalitions_ascending(cgs.num_agents())
                    .filter(|c| minimal.iter().any(|m| m.is_subset_of(*c)))
                    .collect();
                if closure != set.coalitions() {
                    violations += 1;
                    first.get_or_insert_with(|| {
                        format!(
                            "closure of the antichain differs from the responsible set: \
                             seed {seed}, {sem}, state {}",
                            cgs.state_name(q)
                        )
                    });
                }
                let closure_set = ResponsibleSet::new(q, bad.clone(), closure);
                for query in all_coalitions(cgs.num_agents()) {
                    comparisons += 1;
                    if sdr_over(&set, query) != sdr_over(&closure_set, query) {
                        violations += 1;
                        first.get_or_insert_with(|| {
                            format!(
                                "structural degree differs over the closure: seed {seed}, {sem}, \
                                 state {}, coalition {}",
                                cgs.state_name(q),
                                cgs.coalition_string(query)
                            )
                        });
                    }
                }
            }
        }
    }
    let elapsed = started.elapsed();
    if violations > 0 {
        return Err(format!(
            "{violations} violations; first: {}",
            first.unwrap_or_default()
        ));
    }
    Ok(format!(
        "{comparisons} comparisons across {} models, antichain closure agrees everywhere ({})",
        corpus.len(),
        fmt_duration(elapsed)
    ))
}

fn same_transition_structure(a: &Cgs, b: &Cgs) -> bool {
    a.num_agents() == b.num_agents()
        && a.num_states() == b.num_states()
        && a.num_actions() == b.num_actions()
        && a.states().all(|q| {
            a.num_profiles(q) == b.num_profiles(q)
                && (0..a.num_profiles(q))
                    .all(|code| a.successor_by_code(q, code) == b.successor_by_code(q, code))
        })
}

/// Criterion 6: canonical serialization is a round-trip fixpoint on the
/// corpus and the fixture, and fuzzed inputs never crash the parser.
fn parser_round_trip_and_fuzz(corpus: &[ValidatedModel]) -> Result<String, String> {
    let started = Instant::now();

    let mut canonical: Vec<String> = Vec::with_capacity(corpus.len());
    for (seed, model) in corpus.iter().enumerate() {
        let bytes = serialize_model(&model.cgs, &model.affairs);
        let doc = parse_model(&bytes)
            .map_err(|e| format!("seed {seed}: canonical output does not parse: {e:?}"))?;
        let reloaded = validate_model(&doc)
            .map_err(|e| format!("seed {seed}: canonical output does not validate: {e:?}"))?;
        let again = serialize_model(&reloaded.cgs, &reloaded.affairs);
        if again != bytes {
            return Err(format!("seed {seed}: canonical bytes are not a fixpoint"));
        }
        if !same_transition_structure(&model.cgs, &reloaded.cgs) {
            return Err(format!("seed {seed}: round trip changed the transition structure"));
        }
        if reloaded.affairs != model.affairs {
            return Err(format!("seed {seed}: round trip changed the affairs"));
        }
        canonical.push(bytes);
    }
    let fixture_text = std::fs::read_to_string(fixture_path()).map_err(|e| e.to_string())?;
    let fixture = load_fixture();
    if serialize_model(&fixture.cgs, &fixture.affairs) != fixture_text {
        return Err("fixture file is not in canonical form".into());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(FUZZ_SEED);
    for i in 0..FUZZ_INPUTS {
        let input: Vec<u8> = if i % 2 == 0 {
            let len = rng.gen_range(0..=256);
            (0..len).map(|_| rng.gen()).collect()
        } else {
            let mut bytes = canonical[i % canonical.len()].as_bytes().to_vec();
            for _ in 0..rng.gen_range(1..=8) {
                match rng.gen_range(0u8..3) {
                    0 if !bytes.is_empty() => {
                        let at = rng.gen_range(0..bytes.len());
                        bytes[at] = rng.gen();
                    }
                    1 => {
                        let at = rng.gen_range(0..=bytes.len());
                        bytes.insert(at, rng.gen());
                    }
                    _ if !bytes.is_empty() => {
                        let at = rng.gen_range(0..bytes.len());
                        bytes.remove(at);
                    }
                    _ => {}
                }
            }
            bytes
        };
        let outcome = catch_unwind(AssertUnwindSafe(|| match parse_model_bytes(&input) {
            Ok(doc) => {
                let _ = validate_model(&doc);
                true
            }
            Err(errors) => !errors.is_empty(),
        }));
        match outcome {
            Ok(true) => {}
            Ok(false) => return Err(format!("fuzz input {i} produced an empty error list")),
            Err(_) => return Err(format!("fuzz input {i} crashed the parser")),
        }
    }

    let elapsed = started.elapsed();
    Ok(format!(
        "{} models round-trip byte-identically, {FUZZ_INPUTS} fuzz inputs without a crash ({})",
        corpus.len(),
        fmt_duration(elapsed)
    ))
}

/// Criterion 7: `respdeg report` on an 8-agent, 100-state, 3-action model
/// is byte-identical across runs and thread counts and stays within the
/// time budget.
fn report_determinism() -> Result<String, String> {
    let params = GeneratorParams {
        agents: 8..=8,
        states: 100..=100,
        actions: 3..=3,
        extra_action_probability: 0.5,
        affair_probability: 0.3,
    };
    let model = random_model(&params, LARGE_MODEL_SEED);
    if model.cgs.num_agents() != 8 || model.cgs.num_states() != 100 || model.cgs.num_actions() != 3
    {
        return Err("generated model does not have the required dimensions".into());
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("large.json");
    std::fs::write(&path, serialize_model(&model.cgs, &model.affairs))
        .map_err(|e| e.to_string())?;
    let path = path.display().to_string();

    let run = |extra: &[&str]| -> Result<(Vec<u8>, Duration), String> {
        let begun = Instant::now();
        let output = Command::new(env!("CARGO_BIN_EXE_respdeg"))
            .args(["report", "--model", &path, "--state", "q0", "--affairs", "@bad"])
            .args(extra)
            .output()
            .map_err(|e| e.to_string())?;
        let elapsed = begun.elapsed();
        if output.status.code() != Some(0) {
            return Err(format!(
                "report exited with {:?}: {}",
                output.status.code(),
                String::from_utf8_lossy(&output.stderr)
            ));
        }
        Ok((output.stdout, elapsed))
    };

    let (first, t1) = run(&[])?;
    let (second, t2) = run(&[])?;
    let (threaded, t3) = run(&["--threads", "4"])?;
    if first != second || first != threaded {
        return Err("report output differs between runs or thread counts".into());
    }
    let rows = first
        .split(|&b| b == b'\n')
        .filter(|line| line.first() == Some(&b'{'))
        .count();
    if rows != 255 {
        return Err(format!("expected 255 coalition rows, found {rows}"));
    }
    let slowest = t1.max(t2).max(t3);
    if slowest >= REPORT_TIME_LIMIT {
        return Err(format!(
            "slowest run took {}, limit {}",
            fmt_duration(slowest),
            fmt_duration(REPORT_TIME_LIMIT)
        ));
    }
    Ok(format!(
        "255 rows byte-identical across two runs and --threads 4, slowest run {}",
        fmt_duration(slowest)
    ))
}

type Check<'a> = Box<dyn Fn() -> Result<String, String> + 'a>;

#[test]
fn acceptance() {
    let corpus: Vec<ValidatedModel> = (0..CORPUS_MODELS as u64)
        .map(|seed| random_model(&GeneratorParams::default(), seed))
        .collect();

    let checks: [(&str, Check<'_>); 7] = [
        ("fixture exactness", Box::new(fixture_exactness)),
        ("oracle equivalence", Box::new(|| oracle_equivalence(&corpus))),
        ("monotonicity", Box::new(|| monotonicity(&corpus))),
        ("definition shapes", Box::new(|| definition_shapes(&corpus))),
        ("antichain consistency", Box::new(|| antichain_consistency(&corpus))),
        ("parser round-trip and fuzz", Box::new(|| parser_round_trip_and_fuzz(&corpus))),
        ("report determinism", Box::new(report_determinism)),
    ];

    let mut report = String::new();
    let mut failures = 0usize;
    for (number, (name, check)) in checks.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let line = match outcome {
            Ok(Ok(detail)) => format!("PASS  criterion {}: {name} — {detail}", number + 1),
            Ok(Err(reason)) => {
                failures += 1;
                format!("FAIL  criterion {}: {name} — {reason}", number + 1)
            }
            Err(panic) => {
                failures += 1;
                let message = panic
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| panic.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "unknown panic".into());
                format!("FAIL  criterion {}: {name} — panicked: {message}", number + 1)
            }
        };
        println!("{line}");
        writeln!(report, "{line}").unwrap();
    }
    assert!(failures == 0, "{failures} acceptance criteria failed:\n{report}");
}
