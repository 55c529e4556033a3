//! A stderr logger that also keeps every warning, so warnings raised inside
//! the numerical modules end up in the report (and fail the run under
//! `--strict`).

use std::sync::{Mutex, OnceLock};

use log::{Level, LevelFilter, Log, Metadata, Record};

struct CaptureLogger {
    verbose: bool,
}

static WARNINGS: Mutex<Vec<String>> = Mutex::new(Vec::new());
static LOGGER: OnceLock<CaptureLogger> = OnceLock::new();

impl Log for CaptureLogger {
    fn enabled(&self, metadata: &Metadata) -> bool {
        metadata.level() <= Level::Warn || self.verbose
    }

    fn log(&self, record: &Record) {
        if !self.enabled(record.metadata()) {
            return;
        }
        if record.level() <= Level::Warn {
            let message = format!("{}: {}", record.target(), record.args());
            if let Ok(mut w) = WARNINGS.lock() {
                w.push(message);
            }
        }
        eprintln!("[{}] {}: {}", record.level(), record.target(), record.args());
    }

    fn flush(&self) {}
}

/// Installs the logger once per process; later calls are no-ops.
pub fn install(verbose: bool) {
    let logger = LOGGER.get_or_init(|| CaptureLogger { verbose });
    if log::set_logger(logger).is_ok() {
        log::set_max_level(if verbose { LevelFilter::Info } else { LevelFilter::Warn });
    }
}

/// Warnings recorded since the last call.
pub fn drain() -> Vec<String> {
    WARNINGS.lock().map(|mut w| std::mem::take(&mut *w)).unwrap_or_default()
}
