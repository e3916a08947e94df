//! File loading and atomic output.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use seqcompact_core::sequence::{load_sequence, parse_records};
use seqcompact_core::{Alphabet, Code, FeatureSet, Format, Sequence};

use crate::error::AppError;

pub fn read_file(path: &Path) -> Result<Vec<u8>, AppError> {
    fs::read(path).map_err(|e| AppError::io(path, e))
}

/// `Fasta` if the first non-blank byte is `>`, else `Plain`.
pub fn detect_format(bytes: &[u8]) -> Format {
    match bytes.iter().find(|b| !b.is_ascii_whitespace()) {
        Some(b'>') => Format::Fasta,
        _ => Format::Plain,
    }
}

pub fn load_training(path: &Path, format: Option<Format>, alphabet: Option<&Alphabet>) -> Result<(Sequence, Alphabet), AppError> {
    let bytes = read_file(path)?;
    let format = format.unwrap_or_else(|| detect_format(&bytes));
    load_sequence(&bytes, format, alphabet).map_err(|e| AppError::data_in(path, e))
}

/// A test sequence encoded against the training alphabet.
#[derive(Clone, Debug)]
pub struct TestSeq {
    pub name: String,
    pub codes: Vec<Code>,
    /// The symbols as read.
    pub symbols: Vec<u8>,
    /// Symbols outside the alphabet; they never match.
    pub unknown: usize,
}

/// Every record becomes a test. Unnamed records are called `<stem>#<k>`.
pub fn load_tests(path: &Path, format: Option<Format>, alphabet: &Alphabet) -> Result<Vec<TestSeq>, AppError> {
    let bytes = read_file(path)?;
    let format = format.unwrap_or_else(|| detect_format(&bytes));
    let records = parse_records(&bytes, format).map_err(|e| AppError::data_in(path, e))?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(records
        .into_iter()
        .enumerate()
        .map(|(k, r)| {
            let (codes, unknown) = alphabet.encode_lenient(&r.symbols);
            let name = r.name.unwrap_or_else(|| format!("{stem}#{}", k + 1));
            TestSeq { name, codes, symbols: r.symbols, unknown }
        })
        .collect())
}

/// Feature manifest: one feature per line in context order, optionally
/// followed by tab-separated columns; blank lines and `#` lines are skipped.
pub fn parse_manifest(text: &str, alphabet: &Alphabet) -> Result<FeatureSet, seqcompact_core::Error> {
    let features = text
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| alphabet.encode(l.split('\t').next().unwrap_or("").trim().as_bytes()))
        .collect::<Result<Vec<_>, _>>()?;
    FeatureSet::new(features)
}

pub fn load_manifest(path: &Path, alphabet: &Alphabet) -> Result<FeatureSet, AppError> {
    let bytes = read_file(path)?;
    let text = String::from_utf8_lossy(&bytes);
    parse_manifest(&text, alphabet).map_err(|e| AppError::data_in(path, e))
}

/// Writes FASTA with 80-column lines.
pub fn write_fasta(w: &mut impl Write, name: &str, symbols: &[u8]) -> io::Result<()> {
    writeln!(w, ">{name}")?;
    for line in symbols.chunks(80) {
        w.write_all(line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes `path` through a temporary file in the same directory, renamed
/// into place only after `body` succeeds; nothing is left behind on error.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<(), AppError>
where
    F: FnOnce(&mut BufWriter<&mut fs::File>) -> Result<(), AppError>,
{
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| AppError::io(&dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w)?;
        w.flush().map_err(|e| AppError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| AppError::io(path, e.error))?;
    Ok(())
}

/// Output path: the explicit one, else `default_name` under the default
/// output directory.
pub fn resolve_out(explicit: Option<PathBuf>, out_dir: Option<&Path>, default_name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| out_dir.unwrap_or(Path::new(".")).join(default_name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_format() {
        assert_eq!(detect_format(b"\n >x\nAC"), Format::Fasta);
        assert_eq!(detect_format(b"ACGT"), Format::Plain);
    }

    #[test]
    fn manifest_skips_comments_and_columns() {
        let a = Alphabet::new(b"ABCDE").unwrap();
        let f = parse_manifest("# config {}\nA\t3\nBA\n\nCD\t1\t2\nC\n", &a).unwrap();
        assert_eq!(f.len(), 4);
        assert!(f.contains(&a.encode(b"BA").unwrap()));
        assert!(parse_manifest("AX\n", &a).is_err());
        assert!(parse_manifest("# only\n", &a).is_err());
    }

    #[test]
    fn atomic_write_leaves_nothing_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.bin");
        let r = write_atomic(&path, |w| {
            w.write_all(b"partial").unwrap();
            Err(AppError::Usage("boom".into()))
        });
        assert!(r.is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
        write_atomic(&path, |w| w.write_all(b"ok").map_err(|e| AppError::io(Path::new("x"), e))).unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"ok");
    }

    #[test]
    fn unnamed_tests_get_stem_names() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("probe.txt");
        fs::write(&path, "ACGN").unwrap();
        let a = Alphabet::new(b"ACGT").unwrap();
        let t = load_tests(&path, None, &a).unwrap();
        assert_eq!(t[0].name, "probe#1");
        assert_eq!(t[0].unknown, 1);
    }
}
