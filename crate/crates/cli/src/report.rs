use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// What a command did, with everything needed to reproduce it.
///
/// Keys are sorted and no timings are recorded, so identical inputs give
/// byte-identical reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    /// SHA-256 over the arguments and the contents of every input file.
    pub inputs_digest: String,
    pub parameters: BTreeMap<String, Value>,
    pub results: Value,
    pub warnings: Vec<String>,
}

pub fn inputs_digest(args: &[String], files: &[Vec<u8>]) -> String {
    let mut h = Sha256::new();
    for a in args {
        h.update(a.as_bytes());
        h.update([0u8]);
    }
    for f in files {
        h.update((f.len() as u64).to_le_bytes());
        h.update(f);
    }
    hex::encode(h.finalize())
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
