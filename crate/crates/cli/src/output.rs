//! Result files: `results.csv`, `summary.json`, `config.resolved` and the
//! optional `spectra.bin`.
//!
//! `results.csv` is long format, one value per row, columns [`COLUMNS`].
//! Reals are written with Rust's shortest round-trip formatting (`{:?}`), so
//! equal runs give equal bytes. Empty cells mean "not applicable".
//!
//! `spectra.bin` is the concatenation, in task order, of each dumped
//! spectrum's eigenvalues as interleaved little-endian `f64` pairs
//! `(re, im)`. `summary.json` lists `{task, seed, offset, count}` for each
//! block, `offset` counting eigenvalues from the start of the file.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use nhlab_core::stats::{iqr, linear_fit, median, quantile};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{Experiment, ExperimentConfig};
use crate::run::{ResultTable, Row, COLUMNS};

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_csv<W: Write>(table: &ResultTable, out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in &table.rows {
        w.write_record([
            r.task.to_string(),
            r.seed.to_string(),
            r.cells.to_string(),
            r.boundary.name().into(),
            r.disorder.name().into(),
            num(r.gamma.re),
            num(r.gamma.im),
            opt(r.mu),
            opt(r.beta),
            opt(r.u),
            r.scenario.map(|s| s.name().to_string()).unwrap_or_default(),
            opt(r.lambda),
            r.quantity.into(),
            r.index.map(|i| i.to_string()).unwrap_or_default(),
            num(r.value.re),
            num(r.value.im),
            r.label.clone(),
            r.error.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `(quantity, component)` pairs aggregated per coordinate in the summary.
const SUMMARIZED: [(&str, &str); 13] = [
    ("v", "im"),
    ("v", "re"),
    ("v_per_site", "im"),
    ("w_opt", "re"),
    ("v_free", "im"),
    ("s2", "re"),
    ("min_fidelity", "re"),
    ("peak_distance_median", "re"),
    ("ipr_right_median", "re"),
    ("ipr_left_median", "re"),
    ("eps_im_max", "re"),
    ("flagged", "re"),
    ("power_law_slope", "re"),
];

fn coordinate(r: &Row) -> Value {
    json!({
        "L": r.cells,
        "boundary": r.boundary.name(),
        "disorder": r.disorder.name(),
        "gamma_re": r.gamma.re,
        "gamma_im": r.gamma.im,
        "mu": r.mu,
        "beta": r.beta.map(|b| if b.is_finite() { json!(b) } else { json!("inf") }),
        "u": r.u,
        "scenario": r.scenario.map(|s| s.name()),
    })
}

fn stats(samples: &[f64]) -> Value {
    json!({
        "n": samples.len(),
        "median": median(samples),
        "iqr": iqr(samples),
        "q25": quantile(samples, 0.25),
        "q75": quantile(samples, 0.75),
        "min": samples.iter().copied().reduce(f64::min),
        "max": samples.iter().copied().reduce(f64::max),
    })
}

/// Per-coordinate ensemble statistics and experiment-specific digests.
pub fn summarize(table: &ResultTable, cfg: &ExperimentConfig) -> Value {
    let valid: Vec<&Row> = table.rows.iter().filter(|r| !r.is_error()).collect();
    let errors = table.rows.len() - valid.len();

    // group rows by coordinate, preserving the table's order
    let mut groups: BTreeMap<(usize, usize, usize), Vec<&Row>> = BTreeMap::new();
    for r in &valid {
        groups.entry(r.group_key()).or_default().push(r);
    }
    let mut out_groups = Vec::new();
    let mut decay = Vec::new();
    for rows in groups.values() {
        let mut quantities = serde_json::Map::new();
        for (q, comp) in SUMMARIZED {
            let xs: Vec<f64> = rows
                .iter()
                .filter(|r| r.quantity == q && r.index.is_none())
                .map(|r| if comp == "im" { r.value.im } else { r.value.re })
                .filter(|x| x.is_finite())
                .collect();
            if !xs.is_empty() {
                quantities.insert(format!("{q}.{comp}"), stats(&xs));
            }
        }
        if !quantities.is_empty() {
            out_groups.push(json!({ "coordinate": coordinate(rows[0]), "quantities": quantities }));
        }
        let classes: Vec<&str> =
            rows.iter().filter(|r| r.quantity == "decay_class").map(|r| r.label.as_str()).collect();
        if !classes.is_empty() {
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for c in &classes {
                *counts.entry(c).or_default() += 1;
            }
            let (top, n) = counts.iter().max_by_key(|(_, n)| **n).map(|(c, n)| (*c, *n)).unwrap();
            let majority = if 2 * n > classes.len() { Some(top) } else { None };
            decay.push(json!({
                "coordinate": coordinate(rows[0]),
                "counts": counts,
                "majority": majority,
                "fraction": n as f64 / classes.len() as f64,
            }));
        }
    }

    let mut summary = json!({
        "schema_version": table.schema_version,
        "experiment": cfg.experiment.name(),
        "scheduled_tasks": cfg.scheduled_tasks(),
        "units": table.units,
        "failed_units": table.failed_units,
        "rows": table.rows.len(),
        "valid_rows": valid.len(),
        "error_rows": errors,
        "failed": valid.is_empty() || table.failed_units == table.units,
        "conventions": {
            "correlation": "<c_x^dagger c_y> = C[y, x], C = sum_n f_n |R_n><L_n|",
            "velocity": "v = tr(V C), V = -i sum_bonds d t |row><col| with minimal-image d",
            "fidelity": "right-right: |det(Qa^dagger Qb)| of orthonormalized occupied right subspaces",
            "renyi": "S2 complex; Re S2 used for fits",
            "ensemble": "median and IQR (type-7 quantiles) over realizations",
        },
        "groups": out_groups,
    });
    if cfg.experiment == Experiment::Correlation {
        summary["decay_classification"] = Value::Array(decay);
    }
    if cfg.experiment == Experiment::RenyiScaling {
        summary["renyi_fits"] = renyi_fits(&valid);
    }
    if !table.spectra.is_empty() {
        let mut offset = 0;
        let blocks: Vec<Value> = table
            .spectra
            .iter()
            .map(|s| {
                let b = json!({"task": s.task, "seed": s.seed, "offset": offset, "count": s.eigenvalues.len()});
                offset += s.eigenvalues.len();
                b
            })
            .collect();
        summary["spectra"] = json!({"file": "spectra.bin", "format": "f64 little-endian, interleaved re/im", "blocks": blocks});
    }
    summary
}

/// `Re S2` against `ln L`, per coordinate other than `L`: one fit of the
/// ensemble-median curve, plus the median of per-realization slopes.
fn renyi_fits(rows: &[&Row]) -> Value {
    type Key = (String, String, String, String, String);
    let key = |r: &Row| -> Key {
        (
            r.boundary.name().into(),
            r.disorder.name().into(),
            format!("{:?}", r.gamma.re),
            format!("{:?}", r.gamma.im),
            format!("{:?}", r.mu),
        )
    };
    // L -> realization -> Re S2
    type PerL = BTreeMap<usize, BTreeMap<usize, f64>>;
    let mut by: BTreeMap<Key, (Value, PerL)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.quantity == "s2") {
        let e = by.entry(key(r)).or_insert_with(|| {
            let mut c = coordinate(r);
            c.as_object_mut().unwrap().remove("L");
            (c, BTreeMap::new())
        });
        e.1.entry(r.cells).or_default().insert(r.sort_key.3, r.value.re);
    }
    let mut fits = Vec::new();
    for (coord, per_l) in by.values() {
        let ls: Vec<f64> = per_l.keys().map(|&l| (l as f64).ln()).collect();
        let medians: Vec<f64> = per_l.values().map(|m| median(&m.values().copied().collect::<Vec<_>>()).unwrap()).collect();
        let fit = linear_fit(&ls, &medians);
        // realizations present at every L
        let reals: Vec<usize> = per_l
            .values()
            .next()
            .map(|m| m.keys().copied().filter(|k| per_l.values().all(|mm| mm.contains_key(k))).collect())
            .unwrap_or_default();
        let seed_slopes: Vec<f64> = reals
            .iter()
            .filter_map(|k| {
                let ys: Vec<f64> = per_l.values().map(|m| m[k]).collect();
                linear_fit(&ls, &ys).map(|f| f.slope)
            })
            .collect();
        fits.push(json!({
            "coordinate": coord,
            "L": per_l.keys().collect::<Vec<_>>(),
            "median_re_s2": medians,
            "slope": fit.map(|f| f.slope),
            "intercept": fit.map(|f| f.intercept),
            "r_squared": fit.map(|f| f.r_squared),
            "median_realization_slope": median(&seed_slopes),
        }));
    }
    Value::Array(fits)
}

pub fn write_spectra<W: Write>(table: &ResultTable, mut out: W) -> anyhow::Result<()> {
    for s in &table.spectra {
        for e in &s.eigenvalues {
            out.write_all(&e.re.to_le_bytes())?;
            out.write_all(&e.im.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    Sha256::digest(cfg.resolved().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes every output file into `dir` and returns the summary.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, table: &ResultTable) -> anyhow::Result<Value> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut csv = Vec::new();
    write_csv(table, &mut csv)?;
    fs::write(dir.join("results.csv"), csv)?;
    fs::write(dir.join("config.resolved"), cfg.resolved())?;
    if cfg.dump_spectra {
        let mut bin = Vec::new();
        write_spectra(table, &mut bin)?;
        fs::write(dir.join("spectra.bin"), bin)?;
    }
    let mut summary = summarize(table, cfg);
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    summary["run"] = json!({
        "config_sha256": config_hash(cfg),
        "code_version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": timestamp,
    });
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::run::SCHEMA_VERSION;
    use nhlab_core::{Boundary, DisorderMode, C64};

    fn cfg() -> ExperimentConfig {
        parse_config("experiment = \"imv_sweep\"\n[model]\nL = 4\n", None).unwrap()
    }

    fn row(value: f64, error: &str, realization: usize) -> Row {
        Row {
            task: realization,
            seed: 9,
            cells: 4,
            boundary: Boundary::Periodic,
            disorder: DisorderMode::None,
            gamma: C64::new(0.0, 0.0),
            mu: Some(0.0),
            beta: Some(f64::INFINITY),
            u: None,
            scenario: None,
            lambda: None,
            quantity: if error.is_empty() { "v" } else { "error" },
            index: None,
            value: C64::new(0.0, value),
            label: String::new(),
            error: error.into(),
            sort_key: (0, 0, 0, realization, 0),
        }
    }

    fn table(rows: Vec<Row>, failed_units: usize) -> ResultTable {
        let units = rows.len();
        ResultTable { schema_version: SCHEMA_VERSION, rows, units, failed_units, spectra: vec![] }
    }

    #[test]
    fn single_row_median_is_the_row() {
        let s = summarize(&table(vec![row(2.5, "", 0)], 0), &cfg());
        let q = &s["groups"][0]["quantities"]["v.im"];
        assert_eq!(q["median"], 2.5);
        assert_eq!(q["iqr"], 0.0);
        assert_eq!(q["n"], 1);
        assert_eq!(s["failed"], false);
    }

    #[test]
    fn all_error_table_is_flagged() {
        let s = summarize(&table(vec![row(0.0, "boom", 0), row(0.0, "bang", 1)], 2), &cfg());
        assert_eq!(s["valid_rows"], 0);
        assert_eq!(s["error_rows"], 2);
        assert_eq!(s["failed"], true);
        assert!(s["groups"].as_array().unwrap().is_empty());
    }

    #[test]
    fn csv_is_byte_stable() {
        let t = table(vec![row(0.1, "", 0), row(-1.0 / 3.0, "", 1)], 0);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_csv(&t, &mut a).unwrap();
        write_csv(&t, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let line = text.lines().nth(2).unwrap();
        assert!(line.contains("-0.3333333333333333"), "{line}");
        assert!(line.contains(",inf,"), "{line}");
    }

    #[test]
    fn spectra_are_little_endian_pairs() {
        let mut t = table(vec![], 0);
        t.spectra.push(crate::run::SpectrumDump { task: 0, seed: 1, eigenvalues: vec![C64::new(1.5, -2.0)] });
        let mut bin = Vec::new();
        write_spectra(&t, &mut bin).unwrap();
        assert_eq!(bin.len(), 16);
        assert_eq!(f64::from_le_bytes(bin[..8].try_into().unwrap()), 1.5);
        assert_eq!(f64::from_le_bytes(bin[8..].try_into().unwrap()), -2.0);
    }
}
