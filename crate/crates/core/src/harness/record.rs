//! Result records and their JSON-lines form.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// One measured inequality instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub kind: String,
    pub params: Value,
    pub seed: u64,
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub files: Map<String, Value>,
}

impl RatioRecord {
    /// Builds a record; `ratio = lhs/rhs`, `0` when both vanish, and a
    /// degenerate-trial error when only `rhs` vanishes.
    pub fn new(kind: &str, params: Value, seed: u64, trial: usize, lhs: f64, rhs: f64) -> Result<Self> {
        Ok(Self {
            kind: kind.to_string(),
            params,
            seed,
            trial,
            lhs,
            rhs,
            ratio: ratio(trial, lhs, rhs)?,
            files: Map::new(),
        })
    }
}

pub(crate) fn ratio(trial: usize, lhs: f64, rhs: f64) -> Result<f64> {
    if !(lhs >= 0.0) || !(rhs >= 0.0) {
        return Err(Error::InvariantBreach(format!(
            "trial {trial}: negative or undefined side (lhs {lhs}, rhs {rhs})"
        )));
    }
    if rhs == 0.0 {
        if lhs > 0.0 {
            return Err(Error::DegenerateTrial { trial, lhs });
        }
        return Ok(0.0);
    }
    Ok(lhs / rhs)
}

pub fn to_jsonl(records: &[RatioRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn from_jsonl(text: &str) -> Result<Vec<RatioRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Largest ratio, `0` for no records.
pub fn max_ratio(records: &[RatioRecord]) -> f64 {
    records.iter().map(|r| r.ratio).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn ratio_rules() {
        assert_eq!(ratio(0, 0.0, 0.0).unwrap(), 0.0);
        assert!(matches!(ratio(3, 1.0, 0.0), Err(Error::DegenerateTrial { trial: 3, .. })));
        assert_eq!(ratio(0, 1.0, 4.0).unwrap(), 0.25);
        assert!(ratio(0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn schema_order_and_round_trip() {
        let r = RatioRecord::new("FS_M", json!({"p": 2.0}), 7, 1, 1.5, 3.0).unwrap();
        let line = serde_json::to_string(&r).unwrap();
        assert!(line.starts_with(r#"{"kind":"FS_M","params":{"p":2.0},"seed":7,"trial":1,"lhs":1.5,"rhs":3.0,"ratio":0.5,"files":{}}"#));
        let back = from_jsonl(&to_jsonl(&[r.clone(), r.clone()]).unwrap()).unwrap();
        assert_eq!(back, vec![r.clone(), r]);
        assert!(matches!(from_jsonl("{}\n").unwrap_err(), Error::Parse { line: 1, .. }));
    }
}
