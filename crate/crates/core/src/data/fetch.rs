use std::fs;
use std::io::Write;
use std::path::Path;
use std::thread;
use std::time::Duration;

use log::{info, warn};

use crate::{Error, Result};

use super::pairfile::parse_columns;
use super::tuebingen::parse_meta;

/// Base URL of the public cause-effect pairs corpus.
pub const TUEBINGEN_URL: &str = "https://webdav.tuebingen.mpg.de/cause-effect/";

/// Source of remote files.
pub trait Transport {
    fn get(&self, url: &str) -> Result<Vec<u8>>;
}

/// Blocking HTTP(S) transport.
pub struct HttpTransport {
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build();
        Self {
            agent: config.into(),
        }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(60))
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<Vec<u8>> {
        let mut response = self
            .agent
            .get(url)
            .call()
            .map_err(|e| Error::Network(format!("{url}: {e}")))?;
        response
            .body_mut()
            .with_config()
            .limit(256 * 1024 * 1024)
            .read_to_vec()
            .map_err(|e| Error::Network(format!("{url}: {e}")))
    }
}

#[derive(Clone, Debug)]
pub struct FetchOptions {
    /// Attempts per file, including the first.
    pub attempts: usize,
    /// Pause before retry `k` is `k × backoff`.
    pub backoff: Duration,
}

impl Default for FetchOptions {
    fn default() -> Self {
        Self {
            attempts: 3,
            backoff: Duration::from_millis(500),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FetchSummary {
    /// Files newly written, meta included.
    pub written: usize,
    /// Files already present and valid.
    pub skipped: usize,
    /// `(file name, reason)` for files that could not be fetched.
    pub failed: Vec<(String, String)>,
}

fn get_with_retry(transport: &dyn Transport, url: &str, opts: &FetchOptions) -> Result<Vec<u8>> {
    let attempts = opts.attempts.max(1);
    let mut last = None;
    for attempt in 1..=attempts {
        match transport.get(url) {
            Ok(bytes) => return Ok(bytes),
            Err(e) => {
                warn!("attempt {attempt}/{attempts} for {url} failed: {e}");
                last = Some(e);
                if attempt < attempts {
                    thread::sleep(opts.backoff * attempt as u32);
                }
            }
        }
    }
    Err(last.unwrap_or_else(|| Error::Network(url.to_string())))
}

/// Writes via a temporary file in the same directory and renames it into
/// place, so an interrupted run never leaves a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn existing_data_is_valid(path: &Path) -> bool {
    fs::read_to_string(path)
        .map(|text| parse_columns(&text, path, false).is_ok())
        .unwrap_or(false)
}

/// Downloads `pairmeta.txt` and every `pairNNNN.txt` it lists from
/// `base_url` into `out_dir`, skipping files already present and valid.
///
/// A failure on the meta file aborts the run; failures on individual data
/// files are collected in the summary.
pub fn fetch_with(
    transport: &dyn Transport,
    base_url: &str,
    out_dir: &Path,
    opts: &FetchOptions,
) -> Result<FetchSummary> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let base = base_url.trim_end_matches('/');
    let mut summary = FetchSummary::default();

    let meta_path = out_dir.join("pairmeta.txt");
    let existing_meta = fs::read_to_string(&meta_path)
        .ok()
        .and_then(|text| parse_meta(&text, &meta_path).ok().map(|m| (text, m)));
    let entries = match existing_meta {
        Some((_, entries)) if !entries.is_empty() => {
            summary.skipped += 1;
            entries
        }
        _ => {
            let bytes = get_with_retry(transport, &format!("{base}/pairmeta.txt"), opts)?;
            let text = String::from_utf8_lossy(&bytes).into_owned();
            let entries = parse_meta(&text, &meta_path)?;
            write_atomic(&meta_path, &bytes)?;
            summary.written += 1;
            entries
        }
    };

    for entry in &entries {
        let name = entry.data_file_name();
        let path = out_dir.join(&name);
        if existing_data_is_valid(&path) {
            summary.skipped += 1;
            continue;
        }
        let fetched = get_with_retry(transport, &format!("{base}/{name}"), opts).and_then(|bytes| {
            let text = String::from_utf8_lossy(&bytes);
            parse_columns(&text, &path, false)?;
            Ok(bytes)
        });
        match fetched.and_then(|bytes| write_atomic(&path, &bytes)) {
            Ok(()) => {
                info!("fetched {name}");
                summary.written += 1;
            }
            Err(e) => {
                warn!("discarding {name}: {e}");
                summary.failed.push((name, e.to_string()));
            }
        }
    }
    Ok(summary)
}

/// [`fetch_with`] over HTTP with default retry settings.
pub fn fetch_tuebingen(base_url: &str, out_dir: impl AsRef<Path>) -> Result<FetchSummary> {
    fetch_with(&HttpTransport::default(), base_url, out_dir.as_ref(), &FetchOptions::default())
}
