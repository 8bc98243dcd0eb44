//! Dataset files: CSV with header `x1,...,xm[,label]`, or a JSON array of
//! objects with the same keys.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use aeframe::{Dataset, ToleranceConfig};
use serde_json::Value;

/// Coordinate column index for `x<k>` headers (1-based in the file).
fn coord_index(name: &str) -> Option<usize> {
    name.strip_prefix('x')?.parse::<usize>().ok().filter(|&k| k >= 1)
}

/// Maps header names to coordinate slots, checking they are exactly `x1..xm`.
fn column_layout(names: &[String]) -> Result<(Vec<Option<usize>>, usize, bool), String> {
    let mut slots = Vec::with_capacity(names.len());
    let mut seen = BTreeMap::new();
    let mut has_label = false;
    for n in names {
        let n = n.trim();
        if n == "label" {
            if has_label {
                return Err("duplicate 'label' column".into());
            }
            has_label = true;
            slots.push(None);
        } else if let Some(k) = coord_index(n) {
            if seen.insert(k, ()).is_some() {
                return Err(format!("duplicate column '{n}'"));
            }
            slots.push(Some(k - 1));
        } else {
            return Err(format!("unexpected column '{n}' (want x1..xm and optional label)"));
        }
    }
    let m = seen.len();
    if m == 0 || seen.keys().next_back() != Some(&m) {
        return Err("coordinate columns must be exactly x1..xm".into());
    }
    Ok((slots, m, has_label))
}

/// Coordinate rows and optional labels.
type Parsed = (Vec<Vec<f64>>, Option<Vec<String>>);

fn parse_csv(text: &str) -> Result<Parsed, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_owned)
        .collect();
    let (slots, m, has_label) = column_layout(&header)?;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let mut row = vec![0.0; m];
        for (field, slot) in rec.iter().zip(&slots) {
            match slot {
                Some(k) => {
                    row[*k] = field
                        .parse::<f64>()
                        .map_err(|_| format!("row {}: '{field}' is not a number", i + 1))?;
                }
                None => labels.push(field.to_owned()),
            }
        }
        rows.push(row);
    }
    Ok((rows, has_label.then_some(labels)))
}

fn parse_json(text: &str) -> Result<Parsed, String> {
    let items: Vec<BTreeMap<String, Value>> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let first = items.first().ok_or("dataset is empty")?;
    let names: Vec<String> = first.keys().cloned().collect();
    let (slots, m, has_label) = column_layout(&names)?;
    let mut rows = Vec::with_capacity(items.len());
    let mut labels = Vec::new();
    for (i, item) in items.iter().enumerate() {
        if item.len() != names.len() || !names.iter().all(|n| item.contains_key(n)) {
            return Err(format!("record {i} has different keys from record 0"));
        }
        let mut row = vec![0.0; m];
        for (name, slot) in names.iter().zip(&slots) {
            let v = &item[name];
            match slot {
                Some(k) => {
                    row[*k] = v
                        .as_f64()
                        .ok_or_else(|| format!("record {i}: '{name}' is not a number"))?
                }
                None => labels.push(match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                }),
            }
        }
        rows.push(row);
    }
    Ok((rows, has_label.then_some(labels)))
}

/// Reads a dataset, choosing the format from the `.json` extension.
pub fn load(path: &Path, tol: &ToleranceConfig) -> Result<Dataset, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let (rows, labels) =
        if is_json { parse_json(&text) } else { parse_csv(&text) }.map_err(|e| format!("{}: {e}", path.display()))?;
    Dataset::from_rows(&rows, labels, tol).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_columns_may_be_reordered() {
        let (rows, labels) = parse_csv("label,x2,x1\na,1,2\nb,3,4\n").unwrap();
        assert_eq!(rows, vec![vec![2.0, 1.0], vec![4.0, 3.0]]);
        assert_eq!(labels.unwrap(), vec!["a", "b"]);
    }

    #[test]
    fn csv_rejects_gaps_and_junk() {
        assert!(parse_csv("x1,x3\n1,2\n").is_err());
        assert!(parse_csv("x1,y\n1,2\n").is_err());
        assert!(parse_csv("x1,x2\n1,nope\n").is_err());
    }

    #[test]
    fn json_mirrors_csv() {
        let (rows, labels) =
            parse_json(r#"[{"x1": 1, "x2": 2, "label": "a"}, {"x1": 3, "x2": 4, "label": 7}]"#).unwrap();
        assert_eq!(rows, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(labels.unwrap(), vec!["a", "7"]);
        assert!(parse_json(r#"[{"x1": 1}, {"x2": 1}]"#).is_err());
    }
}
