//! Append-only checkpoint journal.
//!
//! Every line is `crc32-hex json\n`. The first line describes the scan; each
//! later line holds the records of one completed class, in grid order. A
//! final line without its newline is a write torn by a crash and is dropped;
//! any complete line with a bad checksum is reported as corruption.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::record::ScanRecord;

pub const MAGIC: &str = "shaforge-journal/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalHeader {
    pub magic: String,
    pub version: String,
    pub n: (u32, u32),
    pub p: (i64, i64),
    pub k: u32,
    pub max_terms: u64,
    pub conductor_only: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub n: u32,
    pub p: i64,
    pub records: Vec<ScanRecord>,
}

pub struct Journal {
    path: PathBuf,
    file: File,
}

fn encode_line(json: &str) -> String {
    format!("{:08x} {json}\n", crc32fast::hash(json.as_bytes()))
}

fn decode_line<'a>(path: &Path, lineno: usize, line: &'a str) -> CliResult<&'a str> {
    let corrupt = |reason: &str| CliError::CheckpointCorrupt { path: path.into(), line: lineno, reason: reason.into() };
    let (crc, json) = line.split_once(' ').ok_or_else(|| corrupt("missing checksum"))?;
    let crc = u32::from_str_radix(crc, 16).map_err(|_| corrupt("malformed checksum"))?;
    if crc32fast::hash(json.as_bytes()) != crc {
        return Err(corrupt("checksum mismatch"));
    }
    Ok(json)
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let tmp = tmp_path(path);
    let mut f = File::create(&tmp).map_err(CliError::io(&tmp))?;
    f.write_all(contents).map_err(CliError::io(&tmp))?;
    f.sync_all().map_err(CliError::io(&tmp))?;
    fs::rename(&tmp, path).map_err(CliError::io(path))
}

impl Journal {
    /// Opens an existing journal for `header`, or starts a new one.
    /// Returns the classes already completed.
    pub fn open(path: &Path, header: &JournalHeader) -> CliResult<(Journal, Vec<ClassEntry>)> {
        let mut entries = Vec::new();
        if path.exists() {
            let bytes = fs::read(path).map_err(CliError::io(path))?;
            let text = String::from_utf8_lossy(&bytes);
            let mut lines: Vec<&str> = text.split('\n').collect();
            let torn = lines.pop().is_some_and(|last| !last.is_empty());
            if lines.is_empty() {
                // nothing complete, not even the header
                write_atomic(path, encode_line(&to_json(header)).as_bytes())?;
            } else {
                let head = decode_line(path, 1, lines[0])?;
                let found: JournalHeader = serde_json::from_str(head).map_err(|e| CliError::CheckpointCorrupt {
                    path: path.into(),
                    line: 1,
                    reason: e.to_string(),
                })?;
                if &found != header {
                    return Err(CliError::CheckpointMismatch {
                        path: path.into(),
                        reason: format!("journal has {}, this run is {}", to_json(&found), to_json(header)),
                    });
                }
                for (i, line) in lines.iter().enumerate().skip(1) {
                    let json = decode_line(path, i + 1, line)?;
                    let e: ClassEntry = serde_json::from_str(json).map_err(|e| CliError::CheckpointCorrupt {
                        path: path.into(),
                        line: i + 1,
                        reason: e.to_string(),
                    })?;
                    entries.push(e);
                }
                if torn {
                    log::warn!("{}: dropping a torn final line", path.display());
                    let keep: String = lines.iter().map(|l| format!("{l}\n")).collect();
                    write_atomic(path, keep.as_bytes())?;
                }
            }
        } else {
            write_atomic(path, encode_line(&to_json(header)).as_bytes())?;
        }
        let file = OpenOptions::new().append(true).open(path).map_err(CliError::io(path))?;
        Ok((Journal { path: path.into(), file }, entries))
    }

    pub fn append(&mut self, entry: &ClassEntry) -> CliResult<()> {
        let line = encode_line(&to_json(entry));
        self.file.write_all(line.as_bytes()).map_err(CliError::io(&self.path))?;
        self.file.sync_data().map_err(CliError::io(&self.path))
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}
