//! Truth table of the 8-qubit Toffoli decomposition with every intermediate
//! time cycle, and comparison against a transcribed reference table.

use serde::{Deserialize, Serialize};

use crate::digits::parse_digits;
use crate::error::{Error, Result};
use crate::state::StateVector;
use crate::toffoli::decompose;

/// Transcribed reference table: inputs with target digit 0.
pub const FIXTURE: &str = include_str!("../fixtures/table3.csv");
/// Same table for target digit 1.
pub const FIXTURE_TARGET1: &str = include_str!("../fixtures/table3_target1.csv");
/// Cells of [`FIXTURE`] known to be misprinted, with the simulated value.
pub const ERRATA: &str = include_str!("../fixtures/table3_errata.csv");

pub const N: usize = 8;
pub const D: usize = 2;
/// Forward time cycles shown per row; the root gate is the last of them.
pub const FORWARD_CYCLES: usize = 7;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub input: String,
    pub cycles: Vec<String>,
    pub output: String,
}

impl Row {
    pub fn columns(&self) -> impl Iterator<Item = (String, &str)> {
        self.cycles
            .iter()
            .enumerate()
            .map(|(k, s)| (format!("cycle{}", k + 1), s.as_str()))
            .chain(std::iter::once(("output".to_string(), self.output.as_str())))
    }
}

/// Simulates one input through `decompose(8, 2)`.
pub fn trace_row(input: &str) -> Result<Row> {
    let circuit = decompose(N, D)?;
    let dims = circuit.dims();
    let digits = parse_digits(input, &dims)?;
    let mut sv = StateVector::prepare_basis(&dims, &digits)?;
    let records = sv.run(&circuit, true)?;
    let labels: Vec<String> = records.iter().map(|r| r.label()).collect();
    Ok(Row {
        input: input.to_string(),
        cycles: labels[..FORWARD_CYCLES].to_vec(),
        output: labels.last().cloned().unwrap_or_default(),
    })
}

/// All 128 rows whose target digit is `target`, in increasing input order.
pub fn generate(target: usize) -> Result<Vec<Row>> {
    if target >= D {
        return Err(Error::domain(format!("target digit {target} is not a qubit value")));
    }
    (0..1usize << (N - 1))
        .map(|ctrl| {
            let input = format!("{ctrl:07b}{target}");
            trace_row(&input)
        })
        .collect()
}

#[derive(Debug, Deserialize, Serialize)]
struct CsvRow {
    input: String,
    cycle1: String,
    cycle2: String,
    cycle3: String,
    cycle4: String,
    cycle5: String,
    cycle6: String,
    cycle7: String,
    output: String,
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        reason: e.to_string(),
    }
}

pub fn parse_csv(text: &str) -> Result<Vec<Row>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize::<CsvRow>()
        .map(|r| {
            let r = r.map_err(csv_err)?;
            Ok(Row {
                input: r.input,
                cycles: vec![r.cycle1, r.cycle2, r.cycle3, r.cycle4, r.cycle5, r.cycle6, r.cycle7],
                output: r.output,
            })
        })
        .collect()
}

pub fn to_csv(rows: &[Row]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        let c = &r.cycles;
        w.serialize(CsvRow {
            input: r.input.clone(),
            cycle1: c[0].clone(),
            cycle2: c[1].clone(),
            cycle3: c[2].clone(),
            cycle4: c[3].clone(),
            cycle5: c[4].clone(),
            cycle6: c[5].clone(),
            cycle7: c[6].clone(),
            output: r.output.clone(),
        })
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize, Serialize)]
pub struct Erratum {
    pub input: String,
    pub column: String,
    pub printed: String,
    pub simulated: String,
}

pub fn parse_errata(text: &str) -> Result<Vec<Erratum>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellDiff {
    pub input: String,
    pub column: String,
    pub printed: String,
    pub simulated: String,
    /// Listed in the errata file.
    pub known: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub rows: usize,
    pub exact_rows: usize,
    pub diffs: Vec<CellDiff>,
    /// Reference rows with no simulated counterpart, or vice versa.
    pub missing: Vec<String>,
}

impl Report {
    pub fn exact(&self) -> bool {
        self.diffs.is_empty() && self.missing.is_empty()
    }

    /// Every discrepancy is a listed erratum.
    pub fn explained(&self) -> bool {
        self.missing.is_empty() && self.diffs.iter().all(|d| d.known)
    }
}

/// Cell-by-cell comparison of simulated rows against a reference table.
pub fn compare(reference: &[Row], simulated: &[Row], errata: &[Erratum]) -> Report {
    let mut report = Report {
        rows: reference.len(),
        exact_rows: 0,
        diffs: Vec::new(),
        missing: Vec::new(),
    };
    for r in reference {
        let Some(s) = simulated.iter().find(|s| s.input == r.input) else {
            report.missing.push(r.input.clone());
            continue;
        };
        let before = report.diffs.len();
        for ((column, printed), (_, got)) in r.columns().zip(s.columns()) {
            if printed != got {
                let known = errata.iter().any(|e| {
                    e.input == r.input && e.column == column && e.printed == printed && e.simulated == got
                });
                report.diffs.push(CellDiff {
                    input: r.input.clone(),
                    column,
                    printed: printed.to_string(),
                    simulated: got.to_string(),
                    known,
                });
            }
        }
        if report.diffs.len() == before {
            report.exact_rows += 1;
        }
    }
    for s in simulated {
        if !reference.iter().any(|r| r.input == s.input) {
            report.missing.push(s.input.clone());
        }
    }
    report
}
