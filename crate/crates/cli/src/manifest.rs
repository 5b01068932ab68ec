//! The `report` bundle: every CSV and JSON output of the analysis stages
//! copied under `<out>/report/` with a manifest of content hashes.

use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::commands::STAGES;
use crate::config::RunConfig;
use crate::Failure;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct FileEntry {
    /// Relative to the output directory for inputs under it and for
    /// artifacts; as given otherwise.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub nftmarket_cli: &'static str,
    pub nftmarket_core: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: &'static str,
    pub versions: Versions,
    pub seed: u64,
    pub config_sha256: String,
    pub inputs: Vec<FileEntry>,
    pub artifacts: Vec<FileEntry>,
}

pub struct BundleSummary {
    pub artifacts: usize,
    pub manifest_sha256: String,
}

pub fn sha256_file(path: &Path) -> Result<(String, u64), Failure> {
    let mut f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = f.read(&mut buf).with_context(|| format!("reading {}", path.display()))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        total += n as u64;
    }
    Ok((hex::encode(hasher.finalize()), total))
}

/// Path relative to the output directory when under it, with `/` separators.
pub fn display_path(cfg: &RunConfig, path: &Path) -> String {
    let rel = path.strip_prefix(&cfg.out).unwrap_or(path);
    rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
}

fn bundled_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let mut files = Vec::new();
    if !dir.is_dir() {
        return Ok(files);
    }
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let p = entry.map_err(anyhow::Error::from)?.path();
        let ext = p.extension().and_then(|e| e.to_str()).unwrap_or("");
        if p.is_file() && (ext == "csv" || ext == "json") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// Rebuilds `<out>/report/` from the stage outputs and writes the manifest.
pub fn bundle(cfg: &RunConfig) -> Result<BundleSummary, Failure> {
    let report = cfg.dir("report");
    if report.exists() {
        std::fs::remove_dir_all(&report).with_context(|| format!("clearing {}", report.display()))?;
    }
    let mut artifacts = Vec::new();
    for stage in STAGES {
        let files = bundled_files(&cfg.dir(stage))?;
        if files.is_empty() {
            continue;
        }
        let dest = report.join(stage);
        std::fs::create_dir_all(&dest).with_context(|| format!("creating {}", dest.display()))?;
        for src in files {
            let to = dest.join(src.file_name().expect("listed files have names"));
            std::fs::copy(&src, &to).with_context(|| format!("copying {}", src.display()))?;
            let (sha256, bytes) = sha256_file(&to)?;
            let path = display_path(&RunConfig { out: report.clone(), ..cfg.clone() }, &to);
            artifacts.push(FileEntry { path, sha256, bytes });
        }
    }
    if artifacts.is_empty() {
        return Err(Failure::Validation(format!(
            "no stage outputs under {}; run the pipeline first",
            cfg.out.display()
        )));
    }
    let mut inputs = Vec::new();
    for p in cfg.input_files() {
        if p.is_file() {
            let (sha256, bytes) = sha256_file(&p)?;
            inputs.push(FileEntry { path: display_path(cfg, &p), sha256, bytes });
        }
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: "nftmarket",
        versions: Versions { nftmarket_cli: env!("CARGO_PKG_VERSION"), nftmarket_core: nftmarket::VERSION },
        seed: cfg.seed,
        config_sha256: cfg.hash(),
        inputs,
        artifacts,
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(anyhow::Error::from)?;
    text.push('\n');
    let path = report.join(MANIFEST_FILE);
    std::fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    Ok(BundleSummary {
        artifacts: manifest.artifacts.len(),
        manifest_sha256: hex::encode(Sha256::digest(text.as_bytes())),
    })
}
