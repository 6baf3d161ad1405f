//! Run manifest: enough to tie every output back to its exact input.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "run_manifest.txt";
/// Canonical copy of the effective config, written next to the outputs.
pub const CONFIG_COPY: &str = "config.cfg";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    /// Path the config was read from, as given.
    pub source_config: String,
    /// Hash of the canonical config text in [`CONFIG_COPY`].
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    /// `(file name, sha256)` in write order.
    pub outputs: Vec<(String, String)>,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# rerun: ringberry {} --config {CONFIG_COPY}", self.subcommand);
        let _ = writeln!(s, "subcommand = {}", self.subcommand);
        let _ = writeln!(s, "version = {}", self.version);
        let _ = writeln!(s, "source_config = {}", self.source_config);
        let _ = writeln!(s, "config = {CONFIG_COPY}");
        let _ = writeln!(s, "config_sha256 = {}", self.config_sha256);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "threads = {}", self.threads);
        let _ = writeln!(s, "wall_time_s = {:.3}", self.wall_time_s);
        let _ = writeln!(s, "\n[outputs]");
        for (name, hash) in &self.outputs {
            let _ = writeln!(s, "{name} = {hash}");
        }
        s
    }

    /// Read back `key = value` lines written by [`RunManifest::render`].
    pub fn parse(text: &str) -> Option<RunManifest> {
        let mut m = RunManifest {
            subcommand: String::new(),
            version: String::new(),
            source_config: String::new(),
            config_sha256: String::new(),
            seed: 0,
            threads: 0,
            wall_time_s: 0.0,
            outputs: Vec::new(),
        };
        let mut in_outputs = false;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == "[outputs]" {
                in_outputs = true;
                continue;
            }
            let (k, v) = line.split_once(" = ")?;
            if in_outputs {
                m.outputs.push((k.to_string(), v.to_string()));
                continue;
            }
            match k {
                "subcommand" => m.subcommand = v.into(),
                "version" => m.version = v.into(),
                "source_config" => m.source_config = v.into(),
                "config_sha256" => m.config_sha256 = v.into(),
                "seed" => m.seed = v.parse().ok()?,
                "threads" => m.threads = v.parse().ok()?,
                "wall_time_s" => m.wall_time_s = v.parse().ok()?,
                _ => {}
            }
        }
        Some(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vectors() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn manifest_round_trips() {
        let m = RunManifest {
            subcommand: "sweep".into(),
            version: "0.1.0".into(),
            source_config: "a.cfg".into(),
            config_sha256: sha256_hex(b"x"),
            seed: 42,
            threads: 3,
            wall_time_s: 1.25,
            outputs: vec![("sweep.csv".into(), sha256_hex(b"y"))],
        };
        assert_eq!(RunManifest::parse(&m.render()), Some(m));
    }
}
