// Copyright 2026 The relucert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Reading inputs and writing stamped outputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::{CliResult, Failure};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance attached to every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Stamp {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub config_digest: String,
    pub seed: Option<u64>,
}

impl Stamp {
    pub fn new(config_bytes: &[u8], seed: Option<u64>) -> Self {
        Stamp {
            tool: "relucert",
            tool_version: TOOL_VERSION,
            config_digest: hex::encode(Sha256::digest(config_bytes)),
            seed,
        }
    }

    pub fn csv_comment(&self) -> String {
        let seed = self.seed.map_or("none".to_string(), |s| s.to_string());
        format!(
            "# {} {} config_sha256={} seed={}\n",
            self.tool, self.tool_version, self.config_digest, seed
        )
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Parses JSON (`.json`) or TOML (anything else), reporting the path of the
/// offending field on schema errors.
pub fn parse_config<T: DeserializeOwned>(path: &Path, text: &str) -> CliResult<T> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let shown = path.display();
    if is_json {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de)
            .map_err(|e| Failure::Usage(format!("{shown}: field `{}`: {}", e.path(), e.inner())))
    } else {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner().message().to_string();
            Failure::Usage(format!("{shown}: field `{}`: {inner}", e.path()))
        })
    }
}

pub fn out_path(dir: &Path, file: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir.join(file))
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

/// Serializes `value` and adds the stamp under `key`.
pub fn stamped_json<T: Serialize>(value: &T, key: &str, stamp: &Stamp) -> String {
    let mut v = serde_json::to_value(value).expect("serializable");
    if let serde_json::Value::Object(map) = &mut v {
        map.insert(key.to_string(), serde_json::to_value(stamp).expect("serializable"));
    }
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

/// Writes rows as CSV after a stamp comment line.
pub fn write_csv<R: Serialize>(path: &Path, stamp: &Stamp, rows: &[R]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Internal(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| Failure::Internal(e.to_string()))?;
    let mut text = stamp.csv_comment();
    text.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    write_file(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_sha256_hex() {
        let s = Stamp::new(b"abc", Some(4));
        assert_eq!(
            s.config_digest,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert!(s.csv_comment().starts_with("# relucert "));
    }

    #[derive(serde::Deserialize, Debug)]
    #[serde(deny_unknown_fields)]
    #[allow(dead_code)]
    struct Inner {
        a: u32,
    }

    #[derive(serde::Deserialize, Debug)]
    #[serde(deny_unknown_fields)]
    #[allow(dead_code)]
    struct Outer {
        inner: Inner,
    }

    #[test]
    fn schema_errors_name_the_field() {
        let e = parse_config::<Outer>(Path::new("c.toml"), "[inner]\na = \"x\"\n").unwrap_err();
        assert!(e.to_string().contains("inner.a"), "{e}");
        let e = parse_config::<Outer>(Path::new("c.json"), r#"{"inner": {"a": 1, "b": 2}}"#).unwrap_err();
        assert!(e.to_string().contains("inner"), "{e}");
        assert_eq!(e.code(), 64);
    }
}
