//! JSON-lines training data: one record per labeled design,
//! `{"graph": <path>, "application": <stage>, "runtimes": {"1": s, "2": s, "4": s, "8": s}}`.
//! Relative graph paths resolve against the dataset file's directory.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::load_design;
use crate::stage::{Stage, VCPU_OPTIONS};

use super::model::OUTPUTS;
use super::train::TrainSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub graph: String,
    pub application: Stage,
    pub runtimes: BTreeMap<String, f64>,
}

impl DatasetRecord {
    pub fn new(graph: impl Into<String>, application: Stage, runtimes: [f64; OUTPUTS]) -> Self {
        DatasetRecord {
            graph: graph.into(),
            application,
            runtimes: VCPU_OPTIONS
                .iter()
                .zip(runtimes)
                .map(|(v, r)| (v.to_string(), r))
                .collect(),
        }
    }

    pub fn runtime_array(&self) -> Result<[f64; OUTPUTS]> {
        if self.runtimes.len() != OUTPUTS {
            return Err(Error::Validation(format!(
                "`{}`: expected runtimes for exactly {{1,2,4,8}} vCPUs",
                self.graph
            )));
        }
        let mut out = [0.0; OUTPUTS];
        for (j, v) in VCPU_OPTIONS.iter().enumerate() {
            out[j] = *self.runtimes.get(&v.to_string()).ok_or_else(|| {
                Error::Validation(format!("`{}`: missing runtime for {v} vCPU(s)", self.graph))
            })?;
        }
        Ok(out)
    }
}

pub fn parse_dataset_records(text: &str) -> Result<Vec<DatasetRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::parse("dataset", i + 1, e.to_string()))
        })
        .collect()
}

/// Load every record of a JSON-lines dataset, parsing the referenced graphs.
pub fn load_dataset(path: &Path) -> Result<Vec<TrainSample>> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_dataset_records(&text)?
        .into_iter()
        .map(|rec| {
            let gpath = resolve(&base, &rec.graph);
            let graph = load_design(&gpath)?;
            TrainSample::new(Arc::new(graph), rec.application, rec.runtime_array()?)
        })
        .collect()
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn write_dataset_records(path: &Path, records: &[DatasetRecord]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trip() {
        let r = DatasetRecord::new("g.aag", Stage::Synthesis, [4.0, 3.0, 2.0, 1.0]);
        let line = serde_json::to_string(&r).unwrap();
        assert_eq!(
            line,
            r#"{"graph":"g.aag","application":"synthesis","runtimes":{"1":4.0,"2":3.0,"4":2.0,"8":1.0}}"#
        );
        let back = parse_dataset_records(&line).unwrap();
        assert_eq!(back[0].runtime_array().unwrap(), [4.0, 3.0, 2.0, 1.0]);
    }

    #[test]
    fn bad_records() {
        assert!(parse_dataset_records("{\"graph\":1}").is_err());
        let r: DatasetRecord = serde_json::from_str(
            r#"{"graph":"g","application":"sta","runtimes":{"1":1,"2":1,"4":1,"16":1}}"#,
        )
        .unwrap();
        assert!(r.runtime_array().is_err());
    }
}
