//! JSON-lines files: trial logs and optimizer traces.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use adaptifont_core::session::{LogEvent, TextItem, TraceRecord};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let reader = BufReader::new(File::open(path).map_err(Error::io(path))?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| Error::JsonLine {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?);
    }
    Ok(out)
}

fn write_lines<T: Serialize>(w: &mut impl Write, items: &[T], path: &Path) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut *w, item).map_err(Error::json(path))?;
        w.write_all(b"\n").map_err(Error::io(path))?;
    }
    Ok(())
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(Error::io(path))?);
    write_lines(&mut w, items, path)?;
    w.flush().map_err(Error::io(path))
}

/// Appends and syncs, so the lines are durable when this returns.
pub fn append_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(Error::io(path))?;
    let mut w = BufWriter::new(file);
    write_lines(&mut w, items, path)?;
    w.flush().map_err(Error::io(path))?;
    w.get_ref().sync_data().map_err(Error::io(path))
}

pub fn read_trial_log(path: &Path) -> Result<Vec<LogEvent>> {
    read_jsonl(path)
}

pub fn write_trial_log(path: &Path, events: &[LogEvent]) -> Result<()> {
    write_jsonl(path, events)
}

pub fn write_trace(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    write_jsonl(path, trace)
}

/// Text corpus: a JSON array of texts.
pub fn read_corpus(path: &Path) -> Result<Vec<TextItem>> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    let items: Vec<TextItem> = serde_json::from_str(&text).map_err(Error::json(path))?;
    for t in &items {
        t.validate()?;
    }
    Ok(items)
}

pub fn write_corpus(path: &Path, texts: &[TextItem]) -> Result<()> {
    let json = serde_json::to_string_pretty(texts).map_err(Error::json(path))?;
    std::fs::write(path, json).map_err(Error::io(path))
}
