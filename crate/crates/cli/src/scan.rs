//! Family scan: a pool of workers over isogeny classes and one ordered writer.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use shaforge_core::ap::ApTable;
use shaforge_core::family::{isogeny_class, scan_grid, IsogenyClass};
use shaforge_core::lseries::sum_plan;
use shaforge_core::{analyze_class, isogeny_class_report, AnalyzeOptions, Error, FamilyId, ShaStatus};

use crate::error::{CliError, CliResult};
use crate::journal::{write_atomic, ClassEntry, Journal, JournalHeader, MAGIC};
use crate::record::{ScanRecord, CSV_HEADER, STATUS_CONDUCTOR_ONLY};

/// Classes whose series needs at least this many coefficients keep their a_p
/// table on disk next to the checkpoint.
pub const AP_CACHE_MIN_TERMS: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OnError {
    Skip,
    Halt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ScanFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub n: (u32, u32),
    pub p: (i64, i64),
    pub k: u32,
    pub max_terms: u64,
    pub conductor_only: bool,
    pub on_error: OnError,
    pub workers: usize,
    pub format: ScanFormat,
    pub checkpoint: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScanSummary {
    pub classes: usize,
    pub resumed: usize,
    pub rows: usize,
    pub ok_rows: usize,
}

struct ClassOutcome {
    entry: ClassEntry,
    error: Option<Error>,
}

fn ids(n: u32, p: i64) -> Vec<FamilyId> {
    (1..=4).map(|i| FamilyId { i, n, p }).collect()
}

fn failed(n: u32, p: i64, e: Error, class: Option<&IsogenyClass>) -> ClassOutcome {
    let records = ids(n, p)
        .into_iter()
        .enumerate()
        .map(|(j, id)| {
            let mut r = ScanRecord::bare(id, e.kind());
            if let Some(c) = class {
                r.conductor = Some(c.members[j].data.conductor.to_string());
                r.c_fin_i = Some(c.members[j].data.c_fin.to_string());
            }
            r
        })
        .collect();
    ClassOutcome { entry: ClassEntry { n, p, records }, error: Some(e) }
}

fn ap_cache_path(dir: &Path, n: u32, p: i64) -> PathBuf {
    dir.join(format!("{n}_{p}.apc"))
}

fn load_table(dir: Option<&Path>, class: &IsogenyClass, m: u64) -> Option<ApTable> {
    let path = ap_cache_path(dir?, class.n, class.p);
    let f = File::open(&path).ok()?;
    match ApTable::read_cache(&class.members[0].data, m, io::BufReader::new(f)) {
        Ok(t) => Some(t),
        Err(e) => {
            log::warn!("ignoring a_p cache {}: {e}", path.display());
            None
        }
    }
}

fn store_table(dir: &Path, class: &IsogenyClass, table: &ApTable) -> CliResult<()> {
    let mut buf = Vec::new();
    table.write_cache(&class.members[0].data, &mut buf).map_err(CliError::io(dir))?;
    write_atomic(&ap_cache_path(dir, class.n, class.p), &buf)
}

/// Runs the pipeline on one class and turns the result into rows.
fn scan_class(n: u32, p: i64, cfg: &ScanConfig, cache_dir: Option<&Path>) -> ClassOutcome {
    let class = match isogeny_class(n, p) {
        Ok(c) => c,
        Err(e) => return failed(n, p, e, None),
    };
    if cfg.conductor_only {
        let records = class
            .members
            .iter()
            .map(|m| {
                let mut r = ScanRecord::bare(m.id, STATUS_CONDUCTOR_ONLY);
                r.conductor = Some(m.data.conductor.to_string());
                r.c_fin_i = Some(m.data.c_fin.to_string());
                r
            })
            .collect();
        return ClassOutcome { entry: ClassEntry { n, p, records }, error: None };
    }
    let opts = AnalyzeOptions { k: cfg.k, max_terms: cfg.max_terms };
    let plan = sum_plan(class.conductor(), cfg.k);
    let mut table = None;
    if plan.m <= cfg.max_terms && plan.m_a >= AP_CACHE_MIN_TERMS {
        table = load_table(cache_dir, &class, plan.m_a);
        if table.is_none() {
            let t = ApTable::compute(&class.members[0].data, plan.m_a);
            if let Some(dir) = cache_dir {
                if let Err(e) = store_table(dir, &class, &t) {
                    log::warn!("could not store a_p cache: {e}");
                }
            }
            table = Some(t);
        }
    }
    let analyses = match analyze_class(&class, opts, table.as_ref()) {
        Ok(a) => a,
        Err(e) => return failed(n, p, e, Some(&class)),
    };
    let records: Vec<ScanRecord> =
        class.members.iter().zip(&analyses).map(|(m, a)| ScanRecord::from_analysis(m.id, a)).collect();
    let mut error = analyses.iter().find_map(|a| a.report.clone().into_result().err());
    if matches!(error, Some(Error::ApparentPositiveRank)) {
        // a status, not a failure
        error = None;
    }
    if error.is_none() && analyses.iter().all(|a| a.report.status == ShaStatus::Ok) {
        let reports: Vec<_> = analyses.iter().map(|a| a.report.clone()).collect();
        if let Err(e) = isogeny_class_report(&reports) {
            return ClassOutcome {
                entry: ClassEntry {
                    n,
                    p,
                    records: records
                        .into_iter()
                        .map(|mut r| {
                            r.status = e.kind().into();
                            r
                        })
                        .collect(),
                },
                error: Some(e),
            };
        }
    }
    ClassOutcome { entry: ClassEntry { n, p, records }, error }
}

enum Sink {
    Stdout(io::Stdout),
    File(BufWriter<File>, PathBuf),
}

impl Sink {
    fn write_entry(&mut self, e: &ClassEntry, format: ScanFormat) -> CliResult<()> {
        let mut s = String::new();
        for r in &e.records {
            s.push_str(&match format {
                ScanFormat::Csv => r.csv_row(),
                ScanFormat::Json => r.json_row(),
            });
            s.push('\n');
        }
        match self {
            Sink::Stdout(o) => o.write_all(s.as_bytes()).and_then(|_| o.flush()).map_err(CliError::io("<stdout>")),
            Sink::File(w, path) => w.write_all(s.as_bytes()).and_then(|_| w.flush()).map_err(CliError::io(&*path)),
        }
    }
}

fn open_sink(cfg: &ScanConfig, done: &[ClassEntry]) -> CliResult<Sink> {
    let mut prefix = String::new();
    if cfg.format == ScanFormat::Csv {
        prefix.push_str(CSV_HEADER);
        prefix.push('\n');
    }
    for e in done {
        for r in &e.records {
            prefix.push_str(&match cfg.format {
                ScanFormat::Csv => r.csv_row(),
                ScanFormat::Json => r.json_row(),
            });
            prefix.push('\n');
        }
    }
    match &cfg.output {
        None => {
            let mut out = io::stdout();
            out.write_all(prefix.as_bytes()).map_err(CliError::io("<stdout>"))?;
            Ok(Sink::Stdout(out))
        }
        Some(path) => {
            // rebuilt from the journal so a resumed file matches an uninterrupted one
            write_atomic(path, prefix.as_bytes())?;
            let f = OpenOptions::new().append(true).open(path).map_err(CliError::io(path))?;
            Ok(Sink::File(BufWriter::new(f), path.clone()))
        }
    }
}

pub fn run_scan(cfg: &ScanConfig) -> CliResult<ScanSummary> {
    if cfg.n.0 > cfg.n.1 || cfg.p.0 > cfg.p.1 {
        return Err(CliError::Usage("empty range".into()));
    }
    let grid = scan_grid(cfg.n, cfg.p);
    let header = JournalHeader {
        magic: MAGIC.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        n: cfg.n,
        p: cfg.p,
        k: cfg.k,
        max_terms: cfg.max_terms,
        conductor_only: cfg.conductor_only,
    };
    let (mut journal, done) = match &cfg.checkpoint {
        Some(path) => {
            let (j, d) = Journal::open(path, &header)?;
            (Some(j), d)
        }
        None => (None, Vec::new()),
    };
    for (j, e) in done.iter().enumerate() {
        if grid.get(j) != Some(&(e.n, e.p)) {
            return Err(CliError::CheckpointCorrupt {
                path: cfg.checkpoint.clone().unwrap_or_default(),
                line: j + 2,
                reason: format!("class ({},{}) is out of grid order", e.n, e.p),
            });
        }
    }
    let cache_dir = cfg.checkpoint.as_ref().map(|c| {
        let mut name = c.file_name().unwrap_or_default().to_os_string();
        name.push(".apc");
        c.with_file_name(name)
    });
    if let Some(d) = &cache_dir {
        std::fs::create_dir_all(d).map_err(CliError::io(d))?;
    }
    let mut sink = open_sink(cfg, &done)?;
    let mut summary = ScanSummary { classes: grid.len(), resumed: done.len(), ..Default::default() };
    for e in &done {
        summary.rows += e.records.len();
        summary.ok_rows += e.records.iter().filter(|r| r.status == "ok").count();
    }
    let todo: Vec<(usize, (u32, i64))> = grid.iter().copied().enumerate().skip(done.len()).collect();
    log::info!("{} classes in grid, {} already done", grid.len(), done.len());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let cancel = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, ClassOutcome)>();
    let started = Instant::now();

    std::thread::scope(|s| -> CliResult<()> {
        let cancel = &cancel;
        let todo = &todo;
        let cache_dir = cache_dir.as_deref();
        s.spawn(move || {
            pool.install(|| {
                todo.par_iter().for_each_with(tx, |tx, &(j, (n, p))| {
                    if cancel.load(Ordering::Relaxed) {
                        return;
                    }
                    let t = Instant::now();
                    let out = scan_class(n, p, cfg, cache_dir);
                    log::debug!("class ({n},{p}) took {:.3}s", t.elapsed().as_secs_f64());
                    let _ = tx.send((j, out));
                });
            });
        });

        let mut pending: BTreeMap<usize, ClassOutcome> = BTreeMap::new();
        let mut next = done.len();
        let result = (|| {
            for (j, out) in rx.iter() {
                pending.insert(j, out);
                while let Some(out) = pending.remove(&next) {
                    if let Some(e) = &out.error {
                        log::warn!("class ({},{}): {e}", out.entry.n, out.entry.p);
                        if cfg.on_error == OnError::Halt {
                            return Err(CliError::Core(e.clone()));
                        }
                    }
                    if let Some(j) = journal.as_mut() {
                        j.append(&out.entry)?;
                    }
                    sink.write_entry(&out.entry, cfg.format)?;
                    summary.rows += out.entry.records.len();
                    summary.ok_rows += out.entry.records.iter().filter(|r| r.status == "ok").count();
                    next += 1;
                }
            }
            Ok(())
        })();
        if result.is_err() {
            cancel.store(true, Ordering::Relaxed);
        }
        result
    })?;
    log::info!("scan finished in {:.2}s", started.elapsed().as_secs_f64());
    Ok(summary)
}
