//! Output formats: RFC-4180 CSV, sorted-key JSON, ASCII PGM, atomic file writes.

use crate::error::{invalid, Result, SandlabError};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV text with CRLF line ends.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut out = String::new();
    out.push_str(&header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(","));
    out.push_str("\r\n");
    for (i, r) in rows.iter().enumerate() {
        if r.len() != header.len() {
            return invalid(format!("csv row {i} has {} fields, header has {}", r.len(), header.len()));
        }
        out.push_str(&r.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(","));
        out.push_str("\r\n");
    }
    Ok(out)
}

/// Parses CSV produced by `csv` (quoted fields, doubled quotes, CRLF or LF).
pub fn parse_csv(text: &str) -> Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    let mut row = Vec::new();
    let mut field = String::new();
    let mut quoted = false;
    let mut chars = text.chars().peekable();
    let mut any = false;
    while let Some(c) = chars.next() {
        any = true;
        if quoted {
            match c {
                '"' if chars.peek() == Some(&'"') => {
                    chars.next();
                    field.push('"');
                }
                '"' => quoted = false,
                _ => field.push(c),
            }
            continue;
        }
        match c {
            '"' if field.is_empty() => quoted = true,
            ',' => row.push(std::mem::take(&mut field)),
            '\r' => {}
            '\n' => {
                row.push(std::mem::take(&mut field));
                rows.push(std::mem::take(&mut row));
                any = false;
            }
            _ => field.push(c),
        }
    }
    if quoted {
        return invalid("unterminated quoted field");
    }
    if any {
        row.push(field);
        rows.push(row);
    }
    Ok(rows)
}

/// Pretty JSON with object keys in sorted order and a trailing newline.
pub fn json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| SandlabError::Internal(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| SandlabError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// ASCII PGM (P2), rows top to bottom.
pub fn pgm(width: usize, height: usize, maxval: u16, pixels: &[u16]) -> Result<String> {
    if pixels.len() != width * height {
        return invalid("pixel count does not match image size");
    }
    if maxval == 0 || pixels.iter().any(|&p| p > maxval) {
        return invalid("pixel values must lie in 0..=maxval with maxval ≥ 1");
    }
    let mut s = format!("P2\n{width} {height}\n{maxval}\n");
    for row in pixels.chunks(width.max(1)) {
        let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    Ok(s)
}

/// (width, height, maxval, pixels)
pub fn parse_pgm(text: &str) -> Result<(usize, usize, u16, Vec<u16>)> {
    let mut tok = text.split_whitespace();
    if tok.next() != Some("P2") {
        return invalid("not an ASCII PGM");
    }
    let mut num = || -> Result<usize> {
        tok.next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| SandlabError::InvalidArgument("truncated PGM".into()))
    };
    let (w, h, m) = (num()?, num()?, num()?);
    let px = (0..w * h).map(|_| num().map(|v| v as u16)).collect::<Result<Vec<_>>>()?;
    Ok((w, h, m as u16, px))
}

/// Writes via a temporary sibling file and rename, so readers never see partial output.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let name = path.file_name().ok_or_else(|| SandlabError::Io("path has no file name".into()))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn unix_seconds() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Provenance record written next to every artifact set. Data files never embed timestamps,
/// so equal manifests (up to the times) give byte-identical data.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub flags: BTreeMap<String, String>,
    pub seed: u64,
    pub version: String,
    pub tolerances: BTreeMap<String, f64>,
    pub started: u64,
    pub finished: Option<u64>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn start(subcommand: &str, flags: BTreeMap<String, String>, seed: u64) -> RunManifest {
        RunManifest {
            subcommand: subcommand.to_string(),
            flags,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            tolerances: BTreeMap::new(),
            started: unix_seconds(),
            finished: None,
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self) {
        self.finished = Some(unix_seconds());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let rows = vec![vec!["1".into(), "a,b".into()], vec!["2".into(), "say \"hi\"\nnow".into()]];
        let text = csv(&["k", "v"], &rows).unwrap();
        let back = parse_csv(&text).unwrap();
        assert_eq!(back[0], vec!["k", "v"]);
        assert_eq!(&back[1..], &rows[..]);
        assert!(csv(&["a"], &[vec![]]).is_err());
    }

    #[test]
    fn json_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: u8,
            alpha: u8,
        }
        let s = json(&S { zeta: 1, alpha: 2 }).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }

    #[test]
    fn pgm_round_trip() {
        let text = pgm(3, 2, 3, &[0, 1, 2, 3, 2, 1]).unwrap();
        assert_eq!(parse_pgm(&text).unwrap(), (3, 2, 3, vec![0, 1, 2, 3, 2, 1]));
        assert!(pgm(2, 2, 3, &[0, 1, 2]).is_err());
    }

    #[test]
    fn atomic_write() {
        let dir = std::env::temp_dir().join(format!("sandlab-io-{}", std::process::id()));
        let p = dir.join("sub/out.txt");
        write_atomic(&p, "hello").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "hello");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
