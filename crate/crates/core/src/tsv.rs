//! Minimal tab-separated reader/writer. Fields are never quoted; tabs and
//! newlines inside fields are rejected.

use std::fs;
use std::path::Path;

use crate::{Error, Result};

pub(crate) struct Row<'a> {
    pub line: usize,
    pub fields: Vec<&'a str>,
}

pub(crate) fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn file_name(path: &Path) -> String {
    path.display().to_string()
}

/// Splits `text` into rows of exactly `width` fields. Blank lines are
/// skipped; a trailing `\r` is tolerated.
pub(crate) fn rows<'a>(text: &'a str, width: usize, file: &str) -> Result<Vec<Row<'a>>> {
    let mut out = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != width {
            return Err(Error::malformed(
                file,
                idx + 1,
                format!("expected {width} tab-separated fields, found {}", fields.len()),
            ));
        }
        out.push(Row { line: idx + 1, fields });
    }
    Ok(out)
}

/// Checks that a value can be written as a TSV field.
pub(crate) fn check_field(value: &str) -> Result<()> {
    if value.contains(['\t', '\n', '\r']) {
        return Err(Error::InvalidArgument(format!(
            "field {value:?} contains a tab or newline"
        )));
    }
    Ok(())
}

pub(crate) fn join(fields: &[&str]) -> Result<String> {
    for f in fields {
        check_field(f)?;
    }
    Ok(fields.join("\t"))
}
