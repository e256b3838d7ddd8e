//! Output formatting: floats at 9 significant digits, versioned JSON
//! documents, and CSV tables that parse back to the emitted values exactly.

use cvmdi_core::{KeyRateReport, McReport};
use serde_json::{json, Map, Value};

use crate::find::FinderResult;
use crate::scenario::Scenario;
use crate::sweep::{SweepRow, SweepVariable};
use crate::CliError;

/// Schema tag on every JSON document this crate emits.
pub const REPORT_SCHEMA: &str = "cvmdi-report/1";
pub const SWEEP_SCHEMA: &str = "cvmdi-sweep/1";
pub const FIND_SCHEMA: &str = "cvmdi-find/1";
pub const MC_SCHEMA: &str = "cvmdi-mc/1";
pub const DECOY_SCHEMA: &str = "cvmdi-decoy/1";

/// Nearest double to the 9-significant-digit decimal rendering of `x`.
/// Non-finite values pass through unchanged.
pub fn round_sig9(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.8e}").parse().expect("formatted float parses")
    } else {
        x
    }
}

/// 9-significant-digit text for `x`; infinities become `inf`/`-inf`.
///
/// Parsing the result recovers exactly [`round_sig9`]`(x)`, and re-formatting
/// that value reproduces the same text, so emitted tables round-trip.
pub fn format_sig9(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Rounds every float in a JSON tree to 9 significant digits in place.
/// Integers stay integers.
fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if !n.is_i64() && !n.is_u64() {
                if let Some(f) = n.as_f64() {
                    if let Some(rounded) = serde_json::Number::from_f64(round_sig9(f)) {
                        *value = Value::Number(rounded);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn tagged(schema: &str, mut body: Value) -> Value {
    round_json(&mut body);
    if let Value::Object(map) = &mut body {
        map.insert("schema".into(), Value::String(schema.into()));
    }
    body
}

/// Report document: rate quantities plus the scenario that produced them.
/// An unbounded repeaterless cap (zero total loss) appears as `plob: null`.
pub fn report_json(report: &KeyRateReport, scenario: &Scenario) -> Result<Value, CliError> {
    let mut map = Map::new();
    map.insert("i_ab".into(), serde_json::to_value(report.i_ab)?);
    map.insert("kappa".into(), serde_json::to_value(report.kappa)?);
    map.insert("chi_be".into(), serde_json::to_value(report.chi_be)?);
    map.insert("key_rate".into(), serde_json::to_value(report.key_rate)?);
    map.insert("plob".into(), serde_json::to_value(report.plob)?);
    map.insert("scenario".into(), serde_json::to_value(scenario)?);
    Ok(tagged(REPORT_SCHEMA, Value::Object(map)))
}

pub fn finder_json(result: &FinderResult) -> Result<Value, CliError> {
    Ok(tagged(FIND_SCHEMA, serde_json::to_value(result)?))
}

pub fn mc_json(report: &McReport) -> Result<Value, CliError> {
    Ok(tagged(MC_SCHEMA, serde_json::to_value(report)?))
}

pub fn sweep_json(variable: SweepVariable, rows: &[SweepRow]) -> Result<Value, CliError> {
    Ok(tagged(
        SWEEP_SCHEMA,
        json!({
            "variable": variable,
            "rows": serde_json::to_value(rows)?,
        }),
    ))
}

pub fn decoy_json(body: Value) -> Value {
    tagged(DECOY_SCHEMA, body)
}

/// CSV cell for an error message: commas and line breaks would break the
/// row structure, so they are replaced.
fn sanitize_csv(text: &str) -> String {
    text.replace([',', '\n', '\r'], ";")
}

/// Sweep table: `<variable>,key_rate,i_ab,chi_be,plob,status`. Failed rows
/// keep the grid value, leave the numeric cells empty, and put the error in
/// `status`.
pub fn sweep_csv(variable: SweepVariable, rows: &[SweepRow]) -> String {
    let mut out = format!("{},key_rate,i_ab,chi_be,plob,status\n", variable.column());
    for row in rows {
        match (&row.report, &row.error) {
            (Some(r), _) => {
                out.push_str(&format!(
                    "{},{},{},{},{},ok\n",
                    format_sig9(row.value),
                    format_sig9(r.key_rate),
                    format_sig9(r.i_ab),
                    format_sig9(r.chi_be),
                    format_sig9(r.plob),
                ));
            }
            (None, err) => {
                out.push_str(&format!(
                    "{},,,,,{}\n",
                    format_sig9(row.value),
                    sanitize_csv(err.as_deref().unwrap_or("unknown error")),
                ));
            }
        }
    }
    out
}

pub fn to_pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON tree serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{run_sweep, SweepSpec};

    #[test]
    fn sig9_round_trip_is_exact() {
        let samples = [
            0.002519920377,
            -1.0 / 3.0,
            1.4e-17,
            6.02214076e23,
            0.1 + 0.2,
            f64::MIN_POSITIVE,
            1.0,
            -0.0,
        ];
        for &x in &samples {
            let text = format_sig9(x);
            let parsed: f64 = text.parse().unwrap();
            assert_eq!(parsed.to_bits(), round_sig9(x).to_bits(), "{x} via {text}");
            assert_eq!(format_sig9(parsed), text, "re-format must be stable");
            // rounding is idempotent
            assert_eq!(round_sig9(parsed).to_bits(), parsed.to_bits());
        }
        assert_eq!(format_sig9(f64::INFINITY), "inf");
        assert_eq!("inf".parse::<f64>().unwrap(), f64::INFINITY);
    }

    #[test]
    fn report_json_has_contract_keys_and_schema() {
        let scenario = Scenario::dm_default();
        let report = scenario.run().unwrap();
        let doc = report_json(&report, &scenario).unwrap();
        for key in ["schema", "i_ab", "kappa", "chi_be", "key_rate", "plob", "scenario"] {
            assert!(doc.get(key).is_some(), "missing key {key}");
        }
        assert_eq!(doc["schema"], REPORT_SCHEMA);
        assert_eq!(doc["kappa"].as_array().unwrap().len(), 3);
        let k = doc["key_rate"].as_f64().unwrap();
        assert_eq!(k.to_bits(), round_sig9(report.key_rate).to_bits());
        assert_eq!(doc["scenario"]["beta"].as_f64().unwrap(), 0.9);
    }

    #[test]
    fn zero_distance_plob_serializes_as_null() {
        let scenario = Scenario::dm_default().with_distance(0.0).unwrap();
        let report = scenario.run().unwrap();
        assert!(report.plob.is_infinite());
        let doc = report_json(&report, &scenario).unwrap();
        assert!(doc["plob"].is_null());
    }

    #[test]
    fn sweep_csv_round_trips_bit_exactly() {
        let spec = SweepSpec {
            variable: SweepVariable::Distance,
            lo: 0.0,
            hi: 30.0,
            steps: 7,
            log: false,
            base: Scenario::dm_default(),
        };
        let rows = run_sweep(&spec).unwrap();
        let text = sweep_csv(spec.variable, &rows);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "distance_km,key_rate,i_ab,chi_be,plob,status");
        for (line, row) in lines.zip(&rows) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 6);
            assert_eq!(cells[5], "ok");
            let report = row.report.as_ref().unwrap();
            for (cell, original) in [
                (cells[0], row.value),
                (cells[1], report.key_rate),
                (cells[2], report.i_ab),
                (cells[3], report.chi_be),
                (cells[4], report.plob),
            ] {
                let parsed: f64 = cell.parse().unwrap();
                assert_eq!(parsed.to_bits(), round_sig9(original).to_bits());
            }
        }
    }

    #[test]
    fn failed_sweep_rows_keep_the_table_rectangular() {
        let spec = SweepSpec {
            variable: SweepVariable::Beta,
            lo: 0.9,
            hi: 1.2,
            steps: 4,
            log: false,
            base: Scenario::dm_default(),
        };
        let rows = run_sweep(&spec).unwrap();
        let text = sweep_csv(spec.variable, &rows);
        for line in text.lines().skip(1) {
            assert_eq!(line.split(',').count(), 6, "row not rectangular: {line}");
        }
        let last = text.lines().last().unwrap();
        assert!(!last.ends_with(",ok"), "last row should fail: {last}");
        assert!(!last.contains('\n') && last.matches(',').count() == 5);
    }

    #[test]
    fn json_rounding_keeps_integers() {
        let result = FinderResult {
            target: crate::find::FindTarget::BetaThreshold,
            value: 0.763316558512345,
            achieved_tolerance: 7.45e-8,
            iterations: 25,
        };
        let doc = finder_json(&result).unwrap();
        assert_eq!(doc["iterations"], serde_json::json!(25));
        assert_eq!(doc["target"], "beta-threshold");
        let v = doc["value"].as_f64().unwrap();
        assert_eq!(v.to_bits(), round_sig9(result.value).to_bits());
    }
}
