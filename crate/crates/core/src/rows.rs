//! Line-oriented reader for the simple comma-separated sidecar formats.
//! Fields are unquoted and trimmed; blank lines and `#` comments are skipped,
//! and every row carries its 1-based physical line number.

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) struct Row<'a> {
    pub line: u64,
    pub fields: Vec<&'a str>,
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|e| {
        let line = 1 + e.as_bytes()[..e.utf8_error().valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count() as u64;
        parse_error(path, line, "file is not valid UTF-8")
    })
}

pub(crate) fn rows(text: &str) -> impl Iterator<Item = Row<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return None;
        }
        Some(Row {
            line: i as u64 + 1,
            fields: trimmed.split(',').map(str::trim).collect(),
        })
    })
}

pub(crate) fn parse_error(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_comments_and_blanks_but_counts_them() {
        let text = "# c\n\n 1, 2 \n#x\n3,4\r\n";
        let got: Vec<(u64, Vec<&str>)> = rows(text).map(|r| (r.line, r.fields)).collect();
        assert_eq!(got, vec![(3, vec!["1", "2"]), (5, vec!["3", "4"])]);
    }
}
