//! Trajectory logs: the plain-text carrier for pre-extracted object tracks.
//!
//! Format: a header line `#ego=<id> rate=<hz>`, then CSV rows
//! `t,id,class,x,y,z,yaw,speed` sorted by (t, id). Further `#` lines are
//! comments. Yaw lifts to a rotation matrix and yaw rates are estimated by
//! finite differences when elements are built.

use scenarium_core::math::{wrap_angle, Mat3, Vec3};
use scenarium_core::model::{Element, ElementId, StateSample};
use scenarium_core::vocab::ElementClass;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::ParseError;

/// One log row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub id: ElementId,
    pub class: ElementClass,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
    pub speed: f64,
}

/// A parsed trajectory log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub ego_id: ElementId,
    pub rate_hz: f64,
    pub rows: Vec<TrajectoryRow>,
}

fn parse_number(token: &str, line: usize, column: usize, what: &str) -> Result<f64, ParseError> {
    let v: f64 = token
        .trim()
        .parse()
        .map_err(|_| ParseError::new(line, column, format!("{what} is not a number: `{token}`")))?;
    if !v.is_finite() {
        return Err(ParseError::new(line, column, format!("{what} must be finite")));
    }
    Ok(v)
}

/// Parses a trajectory log. Total: collects every problem it can find.
pub fn parse_trajectory_log(text: &str) -> Result<TrajectoryLog, Vec<ParseError>> {
    let mut errors: Vec<ParseError> = Vec::new();
    let mut header: Option<(ElementId, f64)> = None;
    let mut rows: Vec<TrajectoryRow> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if header.is_none() && rest.trim_start().starts_with("ego=") {
                let mut ego = None;
                let mut rate = None;
                for token in rest.split_whitespace() {
                    if let Some(v) = token.strip_prefix("ego=") {
                        ego = Some(ElementId::from(v));
                    } else if let Some(v) = token.strip_prefix("rate=") {
                        match parse_number(v, line_no, 1, "rate") {
                            Ok(r) if r > 0.0 => rate = Some(r),
                            Ok(_) => errors.push(ParseError::new(
                                line_no,
                                1,
                                "sample rate must be positive",
                            )),
                            Err(e) => errors.push(e),
                        }
                    }
                }
                match (ego, rate) {
                    (Some(e), Some(r)) => header = Some((e, r)),
                    _ => errors.push(ParseError::new(
                        line_no,
                        1,
                        "header must carry `ego=<id> rate=<hz>`",
                    )),
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            errors.push(ParseError::new(
                line_no,
                1,
                format!(
                    "expected 8 columns `t,id,class,x,y,z,yaw,speed`, got {}",
                    fields.len()
                ),
            ));
            continue;
        }
        let parse_at = |i: usize, what: &str| parse_number(fields[i], line_no, i + 1, what);
        let t = parse_at(0, "t");
        let x = parse_at(3, "x");
        let y = parse_at(4, "y");
        let z = parse_at(5, "z");
        let yaw = parse_at(6, "yaw");
        let speed = parse_at(7, "speed");
        match (t, x, y, z, yaw, speed) {
            (Ok(t), Ok(x), Ok(y), Ok(z), Ok(yaw), Ok(speed)) => rows.push(TrajectoryRow {
                t,
                id: ElementId::from(fields[1].trim()),
                class: ElementClass::from_token(fields[2].trim()),
                x,
                y,
                z,
                yaw,
                speed,
            }),
            (a, b, c, d, e, f) => {
                for r in [a, b, c, d, e, f] {
                    if let Err(err) = r {
                        errors.push(err);
                    }
                }
            }
        }
    }

    let Some((ego_id, rate_hz)) = header else {
        errors.insert(
            0,
            ParseError::new(1, 1, "missing header line `#ego=<id> rate=<hz>`"),
        );
        return Err(errors);
    };

    // Rows must arrive sorted by (t, id); report the first offender.
    for (i, pair) in rows.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        if (b.t, &b.id) < (a.t, &a.id) {
            errors.push(ParseError::new(
                data_line_number(text, i + 1),
                1,
                format!(
                    "rows out of order: t={} id={} follows t={} id={}",
                    b.t, b.id, a.t, a.id
                ),
            ));
            break;
        }
    }

    if errors.is_empty() {
        Ok(TrajectoryLog {
            ego_id,
            rate_hz,
            rows,
        })
    } else {
        Err(errors)
    }
}

/// Physical line number of the n-th data row (0-based).
fn data_line_number(text: &str, row_index: usize) -> usize {
    let mut seen = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if seen == row_index {
            return idx + 1;
        }
        seen += 1;
    }
    1
}

impl TrajectoryLog {
    /// Groups rows into elements; yaw rate estimated by backward differences.
    pub fn to_elements(&self) -> Vec<Element> {
        let mut grouped: BTreeMap<ElementId, Vec<&TrajectoryRow>> = BTreeMap::new();
        for row in &self.rows {
            grouped.entry(row.id.clone()).or_default().push(row);
        }
        grouped
            .into_iter()
            .map(|(id, rows)| {
                let trajectory = rows
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        let yaw_rate = if i == 0 {
                            rows.get(1).map(|next| {
                                wrap_angle(next.yaw - row.yaw) / (next.t - row.t)
                            })
                        } else {
                            let prev = rows[i - 1];
                            Some(wrap_angle(row.yaw - prev.yaw) / (row.t - prev.t))
                        };
                        StateSample {
                            t: row.t,
                            position: Vec3(row.x, row.y, row.z),
                            orientation: Mat3::from_yaw(row.yaw),
                            speed: row.speed,
                            yaw_rate,
                        }
                    })
                    .collect();
                Element { id, trajectory }
            })
            .collect()
    }

    /// Class stated for each element (last row wins).
    pub fn class_hints(&self) -> BTreeMap<ElementId, ElementClass> {
        let mut hints = BTreeMap::new();
        for row in &self.rows {
            hints.insert(row.id.clone(), row.class.clone());
        }
        hints
    }
}

/// Writes a log deterministically, numbers in shortest exact form.
pub fn write_trajectory_log(log: &TrajectoryLog) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#ego={} rate={}", log.ego_id, log.rate_hz);
    for r in &log.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.t,
            r.id,
            r.class.token(),
            r.x,
            r.y,
            r.z,
            r.yaw,
            r.speed
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_element_parses_to_constant_trajectory() {
        let text = "#ego=ego rate=2\n\
                    0.0,crate_1,static_object,1,2,0,0,0\n\
                    0.5,crate_1,static_object,1,2,0,0,0\n\
                    1.0,crate_1,static_object,1,2,0,0,0\n";
        let log = parse_trajectory_log(text).unwrap();
        assert_eq!(log.rate_hz, 2.0);
        let elements = log.to_elements();
        assert_eq!(elements.len(), 1);
        let positions: Vec<_> = elements[0].trajectory.iter().map(|s| s.position).collect();
        assert!(positions.iter().all(|p| *p == positions[0]));
    }

    #[test]
    fn shuffled_rows_name_the_offending_line() {
        let text = "#ego=ego rate=2\n\
                    0.5,a,vehicle,0,0,0,0,1\n\
                    0.0,a,vehicle,0,0,0,0,1\n";
        let errs = parse_trajectory_log(text).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, 3);
        assert!(errs[0].message.contains("out of order"));
    }

    #[test]
    fn missing_columns_and_bad_numbers_are_reported() {
        let text = "#ego=ego rate=2\n\
                    0.0,a,vehicle,0,0,0,0\n\
                    0.5,a,vehicle,zero,0,0,0,1\n";
        let errs = parse_trajectory_log(text).unwrap_err();
        assert_eq!(errs.len(), 2);
        assert!(errs[0].message.contains("8 columns"));
        assert!(errs[1].message.contains("not a number"));
    }

    #[test]
    fn missing_header_is_an_error() {
        let errs = parse_trajectory_log("0.0,a,vehicle,0,0,0,0,1\n").unwrap_err();
        assert!(errs[0].message.contains("header"));
    }

    #[test]
    fn write_parse_round_trip() {
        let text = "#ego=ego rate=2\n\
                    -1.0,a,vehicle,0.1,0.25,0,1.5707963267948966,3.5\n\
                    -0.5,a,vehicle,0.1,2,0,1.5707963267948966,3.5\n";
        let log = parse_trajectory_log(text).unwrap();
        let round = parse_trajectory_log(&write_trajectory_log(&log)).unwrap();
        assert_eq!(log, round);
    }
}
