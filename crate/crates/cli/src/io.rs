//! File helpers that keep the path in error messages.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use gridiron_core::league::{read_games, read_rosters, Games, Rosters};
use gridiron_core::pbp::{parse_plays, read_plays, Play, SchemaConfig};
use gridiron_core::value::{read_annotated, AnnotatedPlay};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::Missing(format!("{} does not exist", path.display()))
        } else {
            CliError::io(path, e)
        }
    })
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r).map_err(gridiron_core::CoreError::from)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let rows: std::result::Result<Vec<T>, csv::Error> = r.deserialize().collect();
    Ok(rows.map_err(gridiron_core::CoreError::from)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(gridiron_core::CoreError::from)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(open(path)?).map_err(gridiron_core::CoreError::from)?)
}

/// Reads plays from either a raw play-by-play export or an ingested file.
pub fn load_plays(path: &Path) -> Result<Vec<Play>> {
    let mut first = String::new();
    open(path)?.read_line(&mut first).map_err(|e| CliError::io(path, e))?;
    if first.split(',').any(|h| h.trim() == "yardline_100") {
        Ok(parse_plays(open(path)?, &SchemaConfig::default())?.plays)
    } else {
        Ok(read_plays(open(path)?)?)
    }
}

pub fn load_games(path: &Path) -> Result<Games> {
    Ok(read_games(open(path)?)?)
}

pub fn load_rosters(path: &Path) -> Result<Rosters> {
    Ok(read_rosters(open(path)?)?)
}

pub fn load_annotated(path: &Path) -> Result<Vec<AnnotatedPlay>> {
    Ok(read_annotated(open(path)?)?)
}

pub fn file_hash(path: &Path) -> Result<String> {
    let mut r = open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = r.read(&mut buf).map_err(|e| CliError::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

pub fn text_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}
