//! Full per-coalition responsibility reports and their three renderings.
//!
//! A report evaluates every non-empty coalition at one state: weak
//! responsibility, structural and functional degree, acquisition distance,
//! and the witnesses behind them. Rows are generated in canonical coalition
//! order and every rendering is byte-deterministic, so two runs over the
//! same inputs produce identical output regardless of thread count.

use serde_json::{json, Value};

use respdeg_core::cgs::coalitions_ascending;
use respdeg_core::degrees::{sdr_over, shortest_power_acquisition};
use respdeg_core::responsibility::ResponsibleSet;
use respdeg_core::{
    fdr_value, minimal_responsible_coalitions, responsible_states, Cgs, Coalition, Distance,
    FdrResult, PowerAcquisitionSequence, PreclusionSemantics, SdrResult, StateId, StateOfAffairs,
};

pub struct ReportRow {
    pub coalition: Coalition,
    pub responsible: bool,
    pub sdr: SdrResult,
    pub fdr: FdrResult,
}

pub struct ResponsibilityReport {
    pub model_path: String,
    pub model_sha256: String,
    pub state: StateId,
    pub affairs: StateOfAffairs,
    pub semantics: PreclusionSemantics,
    pub precision: usize,
    /// One row per non-empty coalition, in (cardinality, bitset) order.
    pub rows: Vec<ReportRow>,
    pub minimal: Vec<Coalition>,
}

struct RowCore {
    responsible: bool,
    distance: Distance,
    witness: Option<PowerAcquisitionSequence>,
}

fn row_core(
    cgs: &Cgs,
    coalition: Coalition,
    state: StateId,
    affairs: &StateOfAffairs,
    semantics: PreclusionSemantics,
) -> RowCore {
    let target = responsible_states(cgs, coalition, affairs, semantics);
    let responsible = target.contains(state);
    let (distance, witness) = shortest_power_acquisition(cgs, state, &target);
    RowCore {
        responsible,
        distance,
        witness,
    }
}

pub fn build_report(ctx: &super::QueryContext, threads: usize) -> ResponsibilityReport {
    let cgs = ctx.cgs();
    let state = ctx.state;
    let affairs = &ctx.affairs;
    let semantics = ctx.semantics;
    let coalitions: Vec<Coalition> = coalitions_ascending(cgs.num_agents()).collect();
    let mut cores: Vec<Option<RowCore>> = Vec::with_capacity(coalitions.len());
    cores.resize_with(coalitions.len(), || None);

    let threads = threads.clamp(1, coalitions.len().max(1));
    if threads <= 1 {
        for (slot, &coalition) in cores.iter_mut().zip(&coalitions) {
            *slot = Some(row_core(cgs, coalition, state, affairs, semantics));
        }
    } else {
        // Results land in per-coalition slots, so the assembled report is
        // identical to the sequential one for any thread count.
        let chunk = coalitions.len().div_ceil(threads);
        std::thread::scope(|scope| {
            for (slots, work) in cores.chunks_mut(chunk).zip(coalitions.chunks(chunk)) {
                scope.spawn(move || {
                    for (slot, &coalition) in slots.iter_mut().zip(work) {
                        *slot = Some(row_core(cgs, coalition, state, affairs, semantics));
                    }
                });
            }
        });
    }

    let responsible_list: Vec<Coalition> = coalitions
        .iter()
        .zip(&cores)
        .filter(|(_, core)| core.as_ref().is_some_and(|c| c.responsible))
        .map(|(&coalition, _)| coalition)
        .collect();
    let responsible_set = ResponsibleSet::new(state, affairs.clone(), responsible_list);
    let minimal = minimal_responsible_coalitions(&responsible_set);

    let rows = coalitions
        .into_iter()
        .zip(cores)
        .map(|(coalition, core)| {
            let core = core.expect("every coalition slot is filled");
            ReportRow {
                coalition,
                responsible: core.responsible,
                sdr: sdr_over(&responsible_set, coalition),
                fdr: FdrResult {
                    value: fdr_value(core.distance),
                    distance: core.distance,
                    witness: core.witness,
                },
            }
        })
        .collect();

    ResponsibilityReport {
        model_path: ctx.path.clone(),
        model_sha256: ctx.sha256.clone(),
        state,
        affairs: ctx.affairs.clone(),
        semantics,
        precision: ctx.precision,
        rows,
        minimal,
    }
}

impl ResponsibilityReport {
    /// Whether no coalition at all is weakly responsible at the state.
    pub fn is_degenerate(&self) -> bool {
        self.rows.iter().all(|r| !r.responsible)
    }

    pub fn render(&self, cgs: &Cgs, format: super::OutputFormat) -> String {
        match format {
            super::OutputFormat::Table => self.render_table(cgs),
            super::OutputFormat::Json => self.render_json(cgs),
            super::OutputFormat::Csv => self.render_csv(cgs),
        }
    }

    fn sdr_cell(&self, row: &ReportRow) -> String {
        match row.sdr.value {
            Some(v) => format!("{} ({})", v.fraction(), v.decimal(self.precision)),
            None => "undefined".to_string(),
        }
    }

    fn fdr_cell(&self, row: &ReportRow) -> String {
        format!(
            "{} ({})",
            row.fdr.value.fraction(),
            row.fdr.value.decimal(self.precision)
        )
    }

    pub fn render_table(&self, cgs: &Cgs) -> String {
        let mut out = String::new();
        out.push_str(&format!("model: {}\n", self.model_path));
        out.push_str(&format!("sha256: {}\n", self.model_sha256));
        out.push_str(&format!("state: {}\n", cgs.state_name(self.state)));
        out.push_str(&format!(
            "affairs: {}\n",
            cgs.state_set_string(self.affairs.states())
        ));
        out.push_str(&format!("semantics: {}\n\n", self.semantics));

        let header = ["coalition", "responsible", "sdr", "fdr", "distance"];
        let cells: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|row| {
                [
                    cgs.coalition_string(row.coalition),
                    if row.responsible { "yes" } else { "no" }.to_string(),
                    self.sdr_cell(row),
                    self.fdr_cell(row),
                    row.fdr.distance.to_string(),
                ]
            })
            .collect();
        let mut widths: [usize; 5] = header.map(str::len);
        for row in &cells {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let emit = |out: &mut String, row: &[String; 5]| {
            for (i, (cell, width)) in row.iter().zip(widths).enumerate() {
                if i > 0 {
                    out.push_str("  ");
                }
                out.push_str(cell);
                if i + 1 < row.len() {
                    for _ in cell.len()..width {
                        out.push(' ');
                    }
                }
            }
            out.push('\n');
        };
        emit(&mut out, &header.map(str::to_string));
        for row in &cells {
            emit(&mut out, row);
        }

        let minimal = if self.minimal.is_empty() {
            "(none)".to_string()
        } else {
            self.minimal
                .iter()
                .map(|&c| cgs.coalition_string(c))
                .collect::<Vec<_>>()
                .join(", ")
        };
        out.push_str(&format!("\nminimal responsible: {minimal}\n"));
        out
    }

    pub fn render_json(&self, cgs: &Cgs) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                json!({
                    "coalition": coalition_names(cgs, row.coalition),
                    "responsible": row.responsible,
                    "sdr": match row.sdr.value {
                        Some(v) => Value::String(v.fraction()),
                        None => Value::String("undefined".to_string()),
                    },
                    "sdr_decimal": match row.sdr.value {
                        Some(v) => Value::String(v.decimal(self.precision)),
                        None => Value::Null,
                    },
                    "sdr_witness": match row.sdr.witness {
                        Some(w) => json!(coalition_names(cgs, w)),
                        None => Value::Null,
                    },
                    "fdr": row.fdr.value.fraction(),
                    "fdr_decimal": row.fdr.value.decimal(self.precision),
                    "fdr_witness": sequence_json(cgs, row.fdr.witness.as_ref()),
                    "distance": distance_json(row.fdr.distance),
                })
            })
            .collect();
        let report = json!({
            "model": {
                "path": self.model_path,
                "sha256": self.model_sha256,
            },
            "state": cgs.state_name(self.state),
            "affairs": state_names(cgs, &self.affairs),
            "semantics": self.semantics.to_string(),
            "precision": self.precision,
            "rows": rows,
            "minimal_responsible": self.minimal
                .iter()
                .map(|&c| json!(coalition_names(cgs, c)))
                .collect::<Vec<Value>>(),
        });
        let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn render_csv(&self, cgs: &Cgs) -> String {
        let mut out = String::from("coalition,responsible,sdr,fdr,distance\n");
        for row in &self.rows {
            let sdr = match row.sdr.value {
                Some(v) => v.fraction(),
                None => "undefined".to_string(),
            };
            out.push_str(&format!(
                "\"{}\",{},{},{},{}\n",
                cgs.coalition_string(row.coalition),
                row.responsible,
                sdr,
                row.fdr.value.fraction(),
                row.fdr.distance,
            ));
        }
        out
    }
}

pub fn coalition_names(cgs: &Cgs, c: Coalition) -> Vec<String> {
    c.members().map(|a| cgs.agent_name(a).to_string()).collect()
}

pub fn state_names(cgs: &Cgs, affairs: &StateOfAffairs) -> Vec<String> {
    affairs
        .states()
        .iter()
        .map(|q| cgs.state_name(q).to_string())
        .collect()
}

pub fn distance_json(distance: Distance) -> Value {
    match distance {
        Distance::Finite(n) => json!(n),
        Distance::Infinite => json!("inf"),
    }
}

pub fn sequence_json(cgs: &Cgs, sequence: Option<&PowerAcquisitionSequence>) -> Value {
    match sequence {
        None => Value::Null,
        Some(seq) => {
            let states: Vec<String> = seq
                .states
                .iter()
                .map(|&q| cgs.state_name(q).to_string())
                .collect();
            let profiles: Vec<Vec<String>> = seq
                .profiles
                .iter()
                .map(|p| {
                    p.choices()
                        .iter()
                        .map(|&x| cgs.action_name(x).to_string())
                        .collect()
                })
                .collect();
            json!({ "states": states, "profiles": profiles })
        }
    }
}
