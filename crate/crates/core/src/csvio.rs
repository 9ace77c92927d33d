//! CSV serialization for experiment artifacts.
//!
//! Writers are byte-deterministic: fixed headers, LF line endings, UTF-8,
//! and floats formatted at six significant digits with trailing zeros
//! trimmed. Readers validate headers and name the offending column on any
//! mismatch.

use crate::engine::TraceRow;
use crate::error::Error;
use crate::experiments::{ExperimentRow, ExperimentTable, Metric};
use crate::model::{FactorName, FactorVector};
use crate::search::EvalRecord;
use crate::stats::Summary;

pub const EXPERIMENT_HEADER: &str = "factor,level,metric,year,mean,sd,min,q1,median,q3,max,reps";
pub const TRACE_HEADER: &str =
    "run_seed,year,agent_id,role,status,teacher_links,student_links,cell_x,cell_y";
pub const TRAJECTORY_HEADER: &str =
    "search_id,evaluation,goal,academic,skill,integration,fitness,best_so_far";

/// Format a float with six significant digits, plain decimal notation, and
/// trailing zeros trimmed (`156.96`, `0.45`, `1`).
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.5e}"); // mantissa with 6 significant digits
    let (mantissa, exp) = sci.split_once('e').expect("{:e} always carries an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-12..=15).contains(&exp) {
        // out of plain-decimal comfort zone; keep scientific form
        return sci;
    }
    let neg = mantissa.starts_with('-');
    let digits: Vec<u8> = mantissa
        .bytes()
        .filter(|b| b.is_ascii_digit())
        .collect();
    debug_assert_eq!(digits.len(), 6);
    // decimal point sits `exp + 1` digits into the digit string
    let point = exp + 1;
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        for _ in 0..(-point) {
            out.push('0');
        }
        out.push_str(std::str::from_utf8(&digits).expect("ascii digits"));
    } else if point as usize >= digits.len() {
        out.push_str(std::str::from_utf8(&digits).expect("ascii digits"));
        for _ in 0..(point as usize - digits.len()) {
            out.push('0');
        }
    } else {
        out.push_str(std::str::from_utf8(&digits[..point as usize]).expect("ascii digits"));
        out.push('.');
        out.push_str(std::str::from_utf8(&digits[point as usize..]).expect("ascii digits"));
    }
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

fn check_header(line: Option<&str>, expected: &str) -> Result<(), Error> {
    let line = line.ok_or(Error::EmptyInput("csv file has no header"))?;
    if line == expected {
        return Ok(());
    }
    let got: Vec<&str> = line.split(',').collect();
    let want: Vec<&str> = expected.split(',').collect();
    for (w, g) in want.iter().zip(&got) {
        if w != g {
            return Err(Error::schema(*w, format!("header has `{g}`")));
        }
    }
    Err(Error::schema(
        "header",
        format!("expected {} columns, found {}", want.len(), got.len()),
    ))
}

fn parse_field<T: std::str::FromStr>(field: &str, column: &str) -> Result<T, Error> {
    field
        .parse::<T>()
        .map_err(|_| Error::schema(column, format!("cannot parse `{field}`")))
}

/// Serialize an experiment table; one row per `(level, metric[, year])`.
pub fn write_experiment_csv(table: &ExperimentTable) -> String {
    let mut out = String::with_capacity(64 * (table.rows.len() + 1));
    out.push_str(EXPERIMENT_HEADER);
    out.push('\n');
    for row in &table.rows {
        let s = &row.summary;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.factor.as_str(),
            format_float(row.level),
            row.metric.as_str(),
            row.year.map(|y| y.to_string()).unwrap_or_default(),
            format_float(s.mean),
            format_float(s.sd),
            format_float(s.min),
            format_float(s.q1),
            format_float(s.median),
            format_float(s.q3),
            format_float(s.max),
            row.reps,
        ));
    }
    out
}

/// Parse an experiment table written by [`write_experiment_csv`].
pub fn read_experiment_csv(text: &str) -> Result<ExperimentTable, Error> {
    let mut lines = text.lines();
    check_header(lines.next(), EXPERIMENT_HEADER)?;
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(Error::schema(
                "header",
                format!("row has {} fields, expected 12", fields.len()),
            ));
        }
        let factor = FactorName::parse(fields[0])
            .map_err(|_| Error::schema("factor", format!("unknown factor `{}`", fields[0])))?;
        let level: f64 = parse_field(fields[1], "level")?;
        let metric = Metric::parse(fields[2])?;
        let year = if fields[3].is_empty() {
            None
        } else {
            Some(parse_field::<u8>(fields[3], "year")?)
        };
        let summary = Summary {
            mean: parse_field(fields[4], "mean")?,
            sd: parse_field(fields[5], "sd")?,
            min: parse_field(fields[6], "min")?,
            q1: parse_field(fields[7], "q1")?,
            median: parse_field(fields[8], "median")?,
            q3: parse_field(fields[9], "q3")?,
            max: parse_field(fields[10], "max")?,
        };
        let reps: u32 = parse_field(fields[11], "reps")?;
        rows.push(ExperimentRow {
            factor,
            level,
            metric,
            year,
            summary,
            reps,
        });
    }
    Ok(ExperimentTable { rows })
}

/// Serialize per-agent trace rows; cell columns stay empty without a grid.
pub fn write_trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::with_capacity(48 * (rows.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for row in rows {
        let (cx, cy) = match row.cell {
            Some(c) => (c.x.to_string(), c.y.to_string()),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.run_seed,
            row.year,
            row.agent_id,
            row.role,
            row.status.as_str(),
            row.teacher_links,
            row.student_links,
            cx,
            cy,
        ));
    }
    out
}

/// Serialize search evaluations, one row per fresh fitness evaluation.
pub fn write_trajectory_csv(records: &[EvalRecord]) -> String {
    let mut out = String::with_capacity(48 * (records.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.search_id,
            r.evaluation,
            format_float(r.point.goal),
            format_float(r.point.academic_experience),
            format_float(r.point.social_skill),
            format_float(r.point.social_integration),
            format_float(r.fitness),
            format_float(r.best_so_far),
        ));
    }
    out
}

/// Parse trajectory rows written by [`write_trajectory_csv`].
pub fn read_trajectory_csv(text: &str) -> Result<Vec<EvalRecord>, Error> {
    let mut lines = text.lines();
    check_header(lines.next(), TRAJECTORY_HEADER)?;
    let mut records = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::schema(
                "header",
                format!("row has {} fields, expected 8", fields.len()),
            ));
        }
        records.push(EvalRecord {
            search_id: parse_field(fields[0], "search_id")?,
            evaluation: parse_field(fields[1], "evaluation")?,
            point: FactorVector {
                goal: parse_field(fields[2], "goal")?,
                academic_experience: parse_field(fields[3], "academic")?,
                social_skill: parse_field(fields[4], "skill")?,
                social_integration: parse_field(fields[5], "integration")?,
            },
            fitness: parse_field(fields[6], "fitness")?,
            best_so_far: parse_field(fields[7], "best_so_far")?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Summary;

    #[test]
    fn float_formatting_examples() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(-0.0), "0");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(0.45), "0.45");
        assert_eq!(format_float(156.96), "156.96");
        assert_eq!(format_float(-156.96), "-156.96");
        assert_eq!(format_float(0.506857142857), "0.506857");
        assert_eq!(format_float(123456.0), "123456");
        assert_eq!(format_float(1234567.0), "1234570");
        assert_eq!(format_float(0.000123456789), "0.000123457");
    }

    #[test]
    fn format_is_idempotent_through_parse() {
        for &v in &[
            0.1, 0.3, 1.0 / 3.0, 156.96, 88.7, 0.49314285714, 199.0, 0.05, 2.5e-4,
        ] {
            let s = format_float(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(format_float(back), s, "value {v}");
            let rel = ((back - v) / v).abs();
            assert!(rel < 1e-5, "value {v} drifted: {back}");
        }
    }

    fn sample_table() -> ExperimentTable {
        let summary = Summary::from_samples(&[10.0, 12.0, 11.0, 15.0]).unwrap();
        ExperimentTable {
            rows: vec![
                ExperimentRow {
                    factor: FactorName::Goal,
                    level: 0.3,
                    metric: Metric::Persisted,
                    year: Some(1),
                    summary,
                    reps: 4,
                },
                ExperimentRow {
                    factor: FactorName::Goal,
                    level: 0.3,
                    metric: Metric::Quitters,
                    year: None,
                    summary,
                    reps: 4,
                },
            ],
        }
    }

    #[test]
    fn empty_table_writes_header_only() {
        let csv = write_experiment_csv(&ExperimentTable::default());
        assert_eq!(csv, format!("{EXPERIMENT_HEADER}\n"));
        assert!(read_experiment_csv(&csv).unwrap().rows.is_empty());
    }

    #[test]
    fn experiment_round_trip_is_stable() {
        let csv = write_experiment_csv(&sample_table());
        let table = read_experiment_csv(&csv).unwrap();
        assert_eq!(write_experiment_csv(&table), csv);
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0].year, Some(1));
        assert_eq!(table.rows[1].year, None);
    }

    #[test]
    fn header_mismatch_names_offending_column() {
        let bad = "factor,levl,metric,year,mean,sd,min,q1,median,q3,max,reps\n";
        let err = read_experiment_csv(bad).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("`level`"), "got: {msg}");

        let bad_metric = format!("{EXPERIMENT_HEADER}\ngoal,0.3,departures,,1,0,1,1,1,1,1,4\n");
        let err = read_experiment_csv(&bad_metric).unwrap_err();
        assert!(format!("{err}").contains("metric"));

        let bad_value = format!("{EXPERIMENT_HEADER}\ngoal,abc,quitters,,1,0,1,1,1,1,1,4\n");
        let err = read_experiment_csv(&bad_value).unwrap_err();
        assert!(format!("{err}").contains("level"));
    }

    #[test]
    fn trajectory_round_trip() {
        let records = vec![EvalRecord {
            search_id: 1,
            evaluation: 1,
            point: FactorVector {
                goal: 0.3,
                academic_experience: 1.0,
                social_skill: 0.1,
                social_integration: 0.5,
            },
            fitness: 42.5,
            best_so_far: 42.5,
        }];
        let csv = write_trajectory_csv(&records);
        assert!(csv.starts_with(TRAJECTORY_HEADER));
        let back = read_trajectory_csv(&csv).unwrap();
        assert_eq!(back, records);
        assert_eq!(write_trajectory_csv(&back), csv);
    }
}
