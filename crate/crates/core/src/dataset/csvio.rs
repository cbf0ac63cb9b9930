//! Reading and writing the alloy dataset and augmented-sample CSV formats.

use std::fmt::Write as _;

use super::record::{AlloyRecord, Element, ProcessRoute, PropertyVector, RangeSpec};
use super::{DataError, EncodingPolicy, Sample, Split};

/// Header of the raw dataset CSV.
pub const RECORD_HEADER: [&str; 24] = [
    "id", "fe_min", "fe_max", "c_min", "c_max", "mn_min", "mn_max", "p_min", "p_max", "s_min",
    "s_max", "si_min", "si_max", "ni_min", "ni_max", "cr_min", "cr_max", "mo_min", "mo_max",
    "process", "hardness", "tensile", "yield", "elongation",
];

/// Header of an augmented per-property CSV.
pub const SAMPLE_HEADER: [&str; 13] = [
    "source_id", "split", "fe", "c", "mn", "p", "s", "si", "ni", "cr", "mo", "process", "target",
];

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<(), DataError> {
    if found.len() != expected.len() {
        return Err(DataError::Header(format!(
            "expected {} columns, found {}",
            expected.len(),
            found.len()
        )));
    }
    for (i, (f, e)) in found.iter().zip(expected).enumerate() {
        if f.trim() != *e {
            return Err(DataError::Header(format!(
                "column {} should be `{}`, found `{}`",
                i + 1,
                e,
                f
            )));
        }
    }
    Ok(())
}

fn field_f64(row: &csv::StringRecord, line: u64, col: usize, name: &str) -> Result<f64, DataError> {
    let raw = row.get(col).unwrap_or("").trim();
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| DataError::Parse {
            line,
            column: name.to_string(),
            message: format!("`{raw}` is not a finite number"),
        })
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes())
}

/// Parses the raw dataset CSV. `line` in errors is the 1-based line in `text`.
pub fn parse_records(text: &str) -> Result<Vec<AlloyRecord>, DataError> {
    let mut rdr = reader(text);
    let header = rdr.headers().map_err(|e| DataError::Header(e.to_string()))?.clone();
    check_header(&header, &RECORD_HEADER)?;

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| DataError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            column: String::new(),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != RECORD_HEADER.len() {
            return Err(DataError::Parse {
                line,
                column: String::new(),
                message: format!(
                    "expected {} columns, found {}",
                    RECORD_HEADER.len(),
                    row.len()
                ),
            });
        }
        let id = row[0].trim().to_string();
        if id.is_empty() {
            return Err(DataError::Parse {
                line,
                column: "id".into(),
                message: "empty record id".into(),
            });
        }

        let mut composition = [RangeSpec::fixed(0.0); Element::COUNT];
        for e in Element::ALL {
            let col = 1 + 2 * e.index();
            let min = field_f64(&row, line, col, RECORD_HEADER[col])?;
            let max = field_f64(&row, line, col + 1, RECORD_HEADER[col + 1])?;
            composition[e.index()] = RangeSpec::new(e, min, max).map_err(|err| DataError::Record {
                line,
                record: id.clone(),
                source: Box::new(err),
            })?;
        }

        let code = field_f64(&row, line, 19, "process")?;
        let route = if code.fract() == 0.0 && (0.0..=255.0).contains(&code) {
            ProcessRoute::new(code as u8)
        } else {
            Err(DataError::InvalidRoute(code as i64))
        }
        .map_err(|err| DataError::Record {
            line,
            record: id.clone(),
            source: Box::new(err),
        })?;

        let t: Vec<f64> = (20..24)
            .map(|c| field_f64(&row, line, c, RECORD_HEADER[c]))
            .collect::<Result<_, _>>()?;
        let targets = PropertyVector::new(t[0], t[1], t[2], t[3]).map_err(|err| DataError::Record {
            line,
            record: id.clone(),
            source: Box::new(err),
        })?;

        records.push(AlloyRecord {
            record_id: id,
            composition,
            process: route,
            targets,
        });
    }
    Ok(records)
}

/// Serializes records in the dataset CSV format. Floats use the shortest
/// round-trip representation, so `parse_records(write_records(r)) == r`.
pub fn write_records(records: &[AlloyRecord]) -> String {
    let mut out = RECORD_HEADER.join(",");
    out.push('\n');
    for r in records {
        out.push_str(&r.record_id);
        for range in &r.composition {
            let _ = write!(out, ",{},{}", range.min, range.max);
        }
        let t = &r.targets;
        let _ = writeln!(
            out,
            ",{},{},{},{},{}",
            r.process.code(),
            t.hardness,
            t.tensile_strength,
            t.yield_strength,
            t.elongation
        );
    }
    out
}

/// Writes samples in the augmented CSV format. The encoded route is decoded
/// back to its numeric code so the file is independent of the encoding.
pub fn write_samples(samples: &[Sample], encoding: EncodingPolicy) -> String {
    let mut out = SAMPLE_HEADER.join(",");
    out.push('\n');
    for s in samples {
        out.push_str(&s.source_record_id);
        out.push(',');
        out.push_str(s.split.name());
        for v in &s.features[..Element::COUNT] {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{},{}", s.route_code(encoding), s.target);
    }
    out
}

/// Parses an augmented CSV, re-encoding the route with `encoding`.
pub fn parse_samples(text: &str, encoding: EncodingPolicy) -> Result<Vec<Sample>, DataError> {
    let mut rdr = reader(text);
    let header = rdr.headers().map_err(|e| DataError::Header(e.to_string()))?.clone();
    check_header(&header, &SAMPLE_HEADER)?;
    let mut samples = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| DataError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            column: String::new(),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != SAMPLE_HEADER.len() {
            return Err(DataError::Parse {
                line,
                column: String::new(),
                message: format!("expected {} columns, found {}", SAMPLE_HEADER.len(), row.len()),
            });
        }
        let split = match row[1].trim() {
            "train_val" => Split::TrainVal,
            "test" => Split::Test,
            other => {
                return Err(DataError::Parse {
                    line,
                    column: "split".into(),
                    message: format!("unknown split `{other}`"),
                })
            }
        };
        let mut composition = [0.0; Element::COUNT];
        for (i, slot) in composition.iter_mut().enumerate() {
            *slot = field_f64(&row, line, 2 + i, SAMPLE_HEADER[2 + i])?;
        }
        let code = field_f64(&row, line, 11, "process")?;
        let route = ProcessRoute::new(code as u8)
            .ok()
            .filter(|_| code.fract() == 0.0)
            .ok_or_else(|| DataError::Parse {
                line,
                column: "process".into(),
                message: format!("invalid route code {code}"),
            })?;
        let target = field_f64(&row, line, 12, "target")?;
        samples.push(Sample {
            source_record_id: row[0].trim().to_string(),
            features: super::encode_features(&composition, route, encoding),
            target,
            split,
        });
    }
    Ok(samples)
}
