//! Rendering of result tables: full-precision CSV with run-level detail,
//! and two-decimal markdown tables for reading.

use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::experiments::{Cell, ResultTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" => Ok(ReportFormat::Markdown),
            other => Err(Error::Usage(format!(
                "unknown report format {other:?}; use csv or markdown"
            ))),
        }
    }
}

/// CSV serialization: one row per (system, method) with the mean, standard
/// deviation, and every per-run loss at full precision.
pub fn table_to_csv(table: &ResultTable) -> String {
    let n_runs = table
        .cells
        .first()
        .and_then(|row| row.first())
        .map(|c| c.runs.len())
        .unwrap_or(0);
    let mut out = String::from("system,method,mean,std");
    for r in 1..=n_runs {
        out.push_str(&format!(",run_{r}"));
    }
    out.push('\n');
    for (si, system) in table.systems.iter().enumerate() {
        for (mi, method) in table.methods.iter().enumerate() {
            let cell = &table.cells[si][mi];
            out.push_str(system);
            out.push(',');
            out.push_str(method);
            out.push(',');
            out.push_str(&crate::dynamics::trajectory::fmt_f64(cell.mean));
            out.push(',');
            out.push_str(&crate::dynamics::trajectory::fmt_f64(cell.std));
            for &v in &cell.runs {
                out.push(',');
                out.push_str(&crate::dynamics::trajectory::fmt_f64(v));
            }
            out.push('\n');
        }
    }
    out
}

pub fn table_from_csv(name: &str, text: &str, origin: &Path) -> Result<ResultTable> {
    let parse_err = |detail: String| Error::Parse {
        path: origin.to_path_buf(),
        detail,
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| parse_err("empty table".into()))?;
    if !header.starts_with("system,method,mean,std") {
        return Err(parse_err(format!("malformed header: {header}")));
    }

    let mut systems: Vec<String> = Vec::new();
    let mut methods: Vec<String> = Vec::new();
    let mut entries: Vec<(String, String, Cell)> = Vec::new();
    for (row_idx, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 5 {
            return Err(parse_err(format!("row {} too short", row_idx + 2)));
        }
        let system = fields[0].to_string();
        let method = fields[1].to_string();
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| parse_err(format!("row {}: {e}", row_idx + 2)))
        };
        let mean = parse(fields[2])?;
        let std = parse(fields[3])?;
        let runs: Vec<f64> = fields[4..]
            .iter()
            .map(|s| parse(s))
            .collect::<Result<_>>()?;
        if !systems.contains(&system) {
            systems.push(system.clone());
        }
        if !methods.contains(&method) {
            methods.push(method.clone());
        }
        entries.push((system, method, Cell { runs, mean, std }));
    }

    let mut cells: Vec<Vec<Option<Cell>>> = vec![vec![None; methods.len()]; systems.len()];
    for (system, method, cell) in entries {
        let si = systems.iter().position(|s| *s == system).unwrap();
        let mi = methods.iter().position(|m| *m == method).unwrap();
        cells[si][mi] = Some(cell);
    }
    let cells: Vec<Vec<Cell>> = cells
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|c| c.ok_or_else(|| parse_err("missing (system, method) cell".into())))
                .collect::<Result<Vec<Cell>>>()
        })
        .collect::<Result<_>>()?;

    Ok(ResultTable {
        name: name.to_string(),
        systems,
        methods,
        cells,
        failures: Vec::new(),
    })
}

/// Markdown rendering with two-decimal cells, one section per table.
pub fn tables_to_markdown(tables: &[ResultTable]) -> String {
    let mut out = String::new();
    for table in tables {
        out.push_str(&format!("## {}\n\n", table.name));
        out.push_str("| System |");
        for method in &table.methods {
            out.push_str(&format!(" {method} |"));
        }
        out.push('\n');
        out.push_str("|---|");
        for _ in &table.methods {
            out.push_str("---|");
        }
        out.push('\n');
        for (si, system) in table.systems.iter().enumerate() {
            out.push_str(&format!("| {system} |"));
            for mi in 0..table.methods.len() {
                out.push_str(&format!(" {:.2} |", table.cells[si][mi].mean));
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Render tables into named documents: one CSV file per table, or a single
/// markdown report.
pub fn emit_report(tables: &[ResultTable], format: ReportFormat) -> Result<Vec<(String, String)>> {
    if tables.is_empty() {
        return Err(Error::Input("emit_report: no tables to render".into()));
    }
    Ok(match format {
        ReportFormat::Csv => tables
            .iter()
            .map(|t| (format!("{}.csv", t.name), table_to_csv(t)))
            .collect(),
        ReportFormat::Markdown => vec![("report.md".to_string(), tables_to_markdown(tables))],
    })
}
