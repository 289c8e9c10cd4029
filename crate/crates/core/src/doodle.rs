//! Newline-delimited doodle records in the QuickDraw "simplified drawing"
//! layout: one JSON object per line with an optional `word` label and a
//! `drawing` holding `[[x0, x1, ...], [y0, y1, ...]]` per stroke.
//!
//! `strokes` and `label` are accepted as aliases on read. Unknown keys
//! (`key_id`, `countrycode`, `recognized`, ...) are ignored.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stroke::{Stroke, StrokeSequence};

#[derive(Debug, Clone, PartialEq)]
pub struct DoodleRecord {
    pub label: Option<String>,
    pub sketch: StrokeSequence,
}

#[derive(Serialize, Deserialize)]
struct RawRecord {
    #[serde(alias = "label", default, skip_serializing_if = "Option::is_none")]
    word: Option<String>,
    #[serde(alias = "strokes")]
    drawing: Vec<[Vec<f64>; 2]>,
}

impl DoodleRecord {
    pub fn new(label: Option<String>, sketch: StrokeSequence) -> Self {
        Self { label, sketch }
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        let raw: RawRecord = serde_json::from_str(line)?;
        let strokes = raw
            .drawing
            .iter()
            .map(|[xs, ys]| Stroke::from_xy(xs, ys))
            .collect::<Result<Vec<_>>>()?;
        if strokes.is_empty() {
            return Err(Error::invalid("doodle record has no strokes"));
        }
        Ok(Self {
            label: raw.word,
            sketch: StrokeSequence::new(strokes),
        })
    }

    pub fn to_json_line(&self) -> String {
        let raw = RawRecord {
            word: self.label.clone(),
            drawing: self
                .sketch
                .strokes()
                .iter()
                .map(|s| {
                    [
                        s.points().iter().map(|p| p.x).collect(),
                        s.points().iter().map(|p| p.y).collect(),
                    ]
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("doodle record serializes")
    }
}

/// Reads every non-blank line. Errors name the offending line number.
pub fn read_records(reader: impl BufRead) -> Result<Vec<DoodleRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<doodle stream>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = DoodleRecord::from_json_line(&line)
            .map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))?;
        out.push(record);
    }
    Ok(out)
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Vec<DoodleRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(std::io::BufReader::new(file))
}

pub fn write_records<'a>(
    mut writer: impl Write,
    records: impl IntoIterator<Item = &'a DoodleRecord>,
) -> std::io::Result<()> {
    for r in records {
        writeln!(writer, "{}", r.to_json_line())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_quickdraw_simplified_line() {
        let line = r#"{"word":"house","countrycode":"US","timestamp":"2017-03-09 00:28:55.63 UTC","recognized":true,"key_id":"5","drawing":[[[0,255,100],[10,10,200]],[[5],[7]]]}"#;
        let r = DoodleRecord::from_json_line(line).unwrap();
        assert_eq!(r.label.as_deref(), Some("house"));
        assert_eq!(r.sketch.len(), 2);
        assert_eq!(r.sketch.strokes()[0].len(), 3);
        assert_eq!(r.sketch.strokes()[1].points()[0].y, 7.0);
    }

    #[test]
    fn accepts_strokes_alias_and_missing_label() {
        let r = DoodleRecord::from_json_line(r#"{"strokes":[[[0.5,1],[0,0.25]]]}"#).unwrap();
        assert!(r.label.is_none());
        assert_eq!(r.sketch.point_count(), 2);
    }

    #[test]
    fn rejects_mismatched_lengths_and_empty() {
        assert!(DoodleRecord::from_json_line(r#"{"drawing":[[[0,1],[0]]]}"#).is_err());
        assert!(DoodleRecord::from_json_line(r#"{"drawing":[]}"#).is_err());
        assert!(DoodleRecord::from_json_line(r#"{"drawing":[[[],[]]]}"#).is_err());
    }

    #[test]
    fn write_then_read() {
        let line = r#"{"word":"star","drawing":[[[0.0,1.5],[2.0,3.25]]]}"#;
        let r = DoodleRecord::from_json_line(line).unwrap();
        assert_eq!(r.to_json_line(), line);
        let mut buf = Vec::new();
        write_records(&mut buf, [&r, &r]).unwrap();
        let back = read_records(buf.as_slice()).unwrap();
        assert_eq!(back, vec![r.clone(), r]);
    }

    #[test]
    fn error_names_line() {
        let input = "{\"drawing\":[[[0],[0]]]}\n\nnot json\n";
        let err = read_records(input.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }
}
