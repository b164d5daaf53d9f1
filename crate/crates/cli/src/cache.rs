//! File cache of JSON reports keyed by sha256 over (version, command, config).

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::io;
use std::path::PathBuf;

pub fn key(version: &str, command: &str, config: &Value) -> String {
    let material = json!({ "version": version, "command": command, "config": config });
    hex::encode(Sha256::digest(material.to_string().as_bytes()))
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: PathBuf) -> Self {
        Cache { dir }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A missing or unreadable entry is a miss.
    pub fn get(&self, key: &str) -> Option<Value> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    /// Writes through a temporary file so a concurrent reader never sees half an entry.
    pub fn put(&self, key: &str, v: &Value) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let tmp = self.dir.join(format!("{key}.json.tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_string_pretty(v)?)?;
        fs::rename(tmp, self.path(key))
    }
}
