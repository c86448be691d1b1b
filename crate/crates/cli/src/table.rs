//! CSV tables. Floats are written in Rust's shortest round-trip form, so
//! reading a table back reproduces the in-memory values bit for bit.

use stmcirc_core::sweep::{LocusPoint, SweepCell, SweepMap};

pub fn to_csv<S: AsRef<str>>(header: &[&str], rows: &[Vec<S>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory cannot fail");
    for r in rows {
        w.write_record(r.iter().map(|s| s.as_ref())).expect("writing to memory cannot fail");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is UTF-8")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

const MAP_HEADER: [&str; 9] = [
    "fm_ratio",
    "dc_ratio",
    "feasible",
    "bound_frac",
    "bode_fano",
    "modulation_limit",
    "center_Hz",
    "il_dB",
    "reason",
];

pub fn map_to_csv(map: &SweepMap) -> String {
    let rows: Vec<Vec<String>> = map
        .iter()
        .map(|c| {
            vec![
                c.fm_ratio.to_string(),
                c.dc_ratio.to_string(),
                c.feasible.to_string(),
                opt(c.bound_frac),
                opt(c.bode_fano),
                opt(c.modulation_limit),
                opt(c.center),
                opt(c.il_db),
                c.reason.clone().unwrap_or_default(),
            ]
        })
        .collect();
    to_csv(&MAP_HEADER, &rows)
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Field { row: usize, message: String },
}

/// Rebuilds a sweep map from [`map_to_csv`] output.
pub fn map_from_csv(text: &str) -> Result<SweepMap, TableError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut cells = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |m: &str| TableError::Field {
            row: i + 1,
            message: m.to_string(),
        };
        let num = |k: usize| -> Result<f64, TableError> { rec[k].parse().map_err(|_| bad("bad number")) };
        let opt = |k: usize| -> Result<Option<f64>, TableError> {
            if rec[k].is_empty() {
                Ok(None)
            } else {
                num(k).map(Some)
            }
        };
        if rec.len() != MAP_HEADER.len() {
            return Err(bad("wrong field count"));
        }
        cells.push(SweepCell {
            fm_ratio: num(0)?,
            dc_ratio: num(1)?,
            feasible: rec[2].parse().map_err(|_| bad("bad flag"))?,
            bound_frac: opt(3)?,
            bode_fano: opt(4)?,
            modulation_limit: opt(5)?,
            center: opt(6)?,
            il_db: opt(7)?,
            reason: (!rec[8].is_empty()).then(|| rec[8].to_string()),
        });
    }
    let mut fm: Vec<f64> = Vec::new();
    let mut dc: Vec<f64> = Vec::new();
    for c in &cells {
        if !fm.contains(&c.fm_ratio) {
            fm.push(c.fm_ratio);
        }
        if !dc.contains(&c.dc_ratio) {
            dc.push(c.dc_ratio);
        }
    }
    if fm.len() * dc.len() != cells.len() {
        return Err(TableError::Field {
            row: 0,
            message: "cells do not form a full grid".into(),
        });
    }
    let rows = cells.chunks(dc.len()).map(|r| r.to_vec()).collect();
    Ok(SweepMap {
        fm_ratios: fm,
        dc_ratios: dc,
        cells: rows,
    })
}

pub fn locus_to_csv(locus: &[LocusPoint]) -> String {
    let rows: Vec<Vec<String>> = locus
        .iter()
        .map(|p| vec![p.fm_ratio.to_string(), p.dc_ratio.to_string(), p.bound.to_string()])
        .collect();
    to_csv(&["fm_ratio", "dc_ratio", "bound_frac"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting_and_round_trip() {
        let cells = vec![vec![
            SweepCell {
                fm_ratio: 0.1,
                dc_ratio: 1.0 / 3.0,
                feasible: false,
                bound_frac: None,
                bode_fano: None,
                modulation_limit: None,
                center: Some(1e9 + 0.1),
                il_db: Some(3.25),
                reason: Some("center IL 3.250 dB exceeds 3 dB, \"weak\"".into()),
            },
            SweepCell {
                fm_ratio: 0.1,
                dc_ratio: 0.7,
                feasible: true,
                bound_frac: Some(0.123456789012345),
                bode_fano: Some(0.3),
                modulation_limit: Some(0.2 + 1e-17),
                center: Some(999_999_999.5),
                il_db: Some(1e-7),
                reason: None,
            },
        ]];
        let map = SweepMap {
            fm_ratios: vec![0.1],
            dc_ratios: vec![1.0 / 3.0, 0.7],
            cells,
        };
        let text = map_to_csv(&map);
        assert_eq!(map_from_csv(&text).unwrap(), map);
    }
}
