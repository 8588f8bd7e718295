//! Artifact writing: manifests, rounded JSON, CSV with a provenance comment line.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use vhj_core::ModelParams;

use crate::error::CliError;

/// Significant digits kept in every floating output.
pub const DIGITS: usize = 12;

pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{:.*e}", DIGITS - 1, v).parse().unwrap_or(v)
}

/// Rounds every float inside a JSON value.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamsRecord {
    pub p: f64,
    pub beta: f64,
    pub k: f64,
    pub alpha: f64,
    pub c_p: f64,
}

impl From<&ModelParams> for ParamsRecord {
    fn from(m: &ModelParams) -> Self {
        Self {
            p: m.p,
            beta: m.beta,
            k: m.k,
            alpha: m.alpha,
            c_p: m.c_p,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub id: String,
    pub command: String,
    pub config_path: Option<String>,
    /// Everything that determines the outputs: flags and the parsed config.
    pub inputs: Value,
    pub params: Option<ParamsRecord>,
    pub files: BTreeMap<String, String>,
    pub versions: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
}

impl Manifest {
    /// The id hashes the command and its inputs, so identical requests share it.
    pub fn new(command: &str, inputs: impl Serialize, params: Option<&ModelParams>) -> Self {
        let inputs = round_value(serde_json::to_value(inputs).unwrap_or(Value::Null));
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(inputs.to_string().as_bytes());
        let id: String = h.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect();
        let mut versions = BTreeMap::new();
        versions.insert("vhj-core".to_string(), vhj_core::VERSION.to_string());
        versions.insert("vhj-cli".to_string(), env!("CARGO_PKG_VERSION").to_string());
        Self {
            id,
            command: command.to_string(),
            config_path: None,
            inputs,
            params: params.map(ParamsRecord::from),
            files: BTreeMap::new(),
            versions,
            seeds: Vec::new(),
        }
    }

    pub fn stamp(&self) -> String {
        match &self.params {
            Some(p) => format!("# manifest={} p={} beta={} k={} alpha={}", self.id, p.p, p.beta, p.k, p.alpha),
            None => format!("# manifest={}", self.id),
        }
    }
}

/// `{"manifest": ..., "result": ...}`, floats rounded.
pub fn envelope(manifest: &Manifest, result: impl Serialize) -> Result<String, CliError> {
    let v = serde_json::json!({
        "manifest": serde_json::to_value(manifest)?,
        "result": serde_json::to_value(result)?,
    });
    Ok(serde_json::to_string_pretty(&round_value(v))? + "\n")
}

/// Output directory plus the manifest that lists what went into it.
pub struct Artifacts {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl Artifacts {
    pub fn create(dir: &Path, manifest: Manifest) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
        })
    }

    fn register(&mut self, key: &str, rel: &str) -> PathBuf {
        self.manifest.files.insert(key.to_string(), rel.to_string());
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            let _ = fs::create_dir_all(parent);
        }
        path
    }

    pub fn json(&mut self, key: &str, rel: &str, result: impl Serialize) -> Result<(), CliError> {
        let path = self.register(key, rel);
        fs::write(path, envelope(&self.manifest, result)?)?;
        Ok(())
    }

    /// One rounded JSON object per line, after a provenance line.
    pub fn json_lines<T: Serialize>(&mut self, key: &str, rel: &str, rows: &[T]) -> Result<(), CliError> {
        let path = self.register(key, rel);
        let mut f = fs::File::create(path)?;
        let head = serde_json::json!({ "manifest": self.manifest.id, "params": self.manifest.params });
        writeln!(f, "{}", round_value(head))?;
        for r in rows {
            writeln!(f, "{}", round_value(serde_json::to_value(r)?))?;
        }
        Ok(())
    }

    pub fn csv(&mut self, key: &str, rel: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let path = self.register(key, rel);
        write_csv(&path, &self.manifest.stamp(), header, rows)
    }

    /// Writes manifest.json last, so it lists every file.
    pub fn finish(self) -> Result<Manifest, CliError> {
        let text = serde_json::to_string_pretty(&round_value(serde_json::to_value(&self.manifest)?))? + "\n";
        fs::write(self.dir.join("manifest.json"), text)?;
        Ok(self.manifest)
    }
}

pub fn fmt_num(v: f64) -> String {
    format!("{}", round_sig(v))
}

pub fn write_csv(path: &Path, stamp: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "{stamp}")?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| fmt_num(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a numeric CSV, skipping `#` lines. Returns the header and the rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| CliError::Domain(format!("{}: row {}: not a number: {s:?}", path.display(), i + 1)))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if row.len() != header.len() {
            return Err(CliError::Domain(format!("{}: row {} has {} fields", path.display(), i + 1, row.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// File name for a snapshot at time t.
pub fn snapshot_name(t: f64) -> String {
    format!("t={:.*e}.csv", DIGITS - 1, t)
}

/// Time parsed back from a snapshot file name.
pub fn snapshot_time(path: &Path) -> Option<f64> {
    let stem = path.file_stem()?.to_str()?;
    stem.strip_prefix("t=")?.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(0.1234567890123456), 0.123456789012);
        assert_eq!(round_sig(-2.0 / 3.0), -0.666666666667);
        assert_eq!(round_sig(0.0), 0.0);
        let v = round_value(serde_json::json!({"a": [1.0 / 3.0, 2], "b": "x"}));
        assert_eq!(v.to_string(), r#"{"a":[0.333333333333,2],"b":"x"}"#);
    }

    #[test]
    fn snapshot_names_round_trip() {
        let t = 0.01796712345;
        let name = snapshot_name(t);
        assert_eq!(snapshot_time(Path::new(&name)), Some(round_sig(t)));
    }

    #[test]
    fn manifest_id_depends_on_inputs() {
        let a = Manifest::new("spectrum", serde_json::json!({"p": 3.0}), None);
        let b = Manifest::new("spectrum", serde_json::json!({"p": 3.0}), None);
        let c = Manifest::new("spectrum", serde_json::json!({"p": 4.0}), None);
        assert_eq!(a.id, b.id);
        assert_ne!(a.id, c.id);
    }
}
