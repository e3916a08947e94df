//! Alphabets, sequence ingestion, backward contexts and sliding windows.
//!
//! Positions are 1-based in this module's public functions, matching the
//! usual `(y_1, …, y_N')` notation; the backing storage is an ordinary
//! 0-based `Vec<Code>`.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{Error, Result};

/// Dense symbol code in `[0, A)`.
pub type Code = u8;

/// Code given to test-sequence symbols that the training alphabet lacks.
/// Such positions never match any context.
pub const UNKNOWN: Code = u8::MAX;

#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<u8>,
    lookup: [Code; 256],
}

impl core::fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_tuple("Alphabet")
            .field(&String::from_utf8_lossy(&self.symbols))
            .finish()
    }
}

impl Alphabet {
    /// Builds an alphabet from distinct, printable, non-whitespace symbols.
    /// Codes follow the order given.
    pub fn new(symbols: &[u8]) -> Result<Self> {
        if symbols.len() < 2 {
            return Err(Error::AlphabetTooSmall(symbols.len()));
        }
        if symbols.len() > 254 {
            return Err(Error::AlphabetTooLarge(symbols.len()));
        }
        let mut lookup = [UNKNOWN; 256];
        for (code, &s) in symbols.iter().enumerate() {
            if !s.is_ascii_graphic() || s == b'>' || lookup[s as usize] != UNKNOWN {
                return Err(Error::InvalidSymbol(s as char));
            }
            lookup[s as usize] = code as Code;
        }
        Ok(Alphabet { symbols: symbols.to_vec(), lookup })
    }

    /// Sorted distinct symbols of `data`.
    pub fn infer(data: &[u8]) -> Result<Self> {
        let mut seen = [false; 256];
        for &b in data {
            seen[b as usize] = true;
        }
        let symbols: Vec<u8> = (0..=255u8).filter(|&b| seen[b as usize]).collect();
        Alphabet::new(&symbols)
    }

    /// The first `size` symbols of `ACGT` for `size == 4`, else `A, B, C, …`
    /// followed by lowercase letters and digits.
    pub fn synthetic(size: usize) -> Result<Self> {
        if size == 4 {
            return Alphabet::new(b"ACGT");
        }
        let pool: Vec<u8> = (b'A'..=b'Z').chain(b'a'..=b'z').chain(b'0'..=b'9').collect();
        if size > pool.len() {
            return Err(Error::AlphabetTooLarge(size));
        }
        Alphabet::new(&pool[..size])
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn code(&self, symbol: u8) -> Option<Code> {
        match self.lookup[symbol as usize] {
            UNKNOWN => None,
            c => Some(c),
        }
    }

    pub fn symbol(&self, code: Code) -> Option<u8> {
        self.symbols.get(code as usize).copied()
    }

    /// Strict encoding: every symbol must be in the alphabet.
    pub fn encode(&self, data: &[u8]) -> Result<Vec<Code>> {
        data.iter()
            .enumerate()
            .map(|(offset, &b)| {
                self.code(b).ok_or(Error::UnknownSymbol { symbol: b as char, offset })
            })
            .collect()
    }

    /// Lenient encoding for test sequences: unseen symbols become [`UNKNOWN`].
    /// Returns the codes and the number of unseen symbols.
    pub fn encode_lenient(&self, data: &[u8]) -> (Vec<Code>, usize) {
        let mut unknown = 0;
        let codes = data
            .iter()
            .map(|&b| {
                let c = self.lookup[b as usize];
                unknown += usize::from(c == UNKNOWN);
                c
            })
            .collect();
        (codes, unknown)
    }

    /// Renders codes back to symbols; [`UNKNOWN`] renders as `?`.
    pub fn decode(&self, codes: &[Code]) -> Vec<u8> {
        codes.iter().map(|&c| self.symbol(c).unwrap_or(b'?')).collect()
    }
}

/// An immutable, nonempty symbol-code string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequence {
    codes: Vec<Code>,
    name: Option<String>,
}

impl Sequence {
    pub fn new(codes: Vec<Code>, name: Option<String>) -> Result<Self> {
        if codes.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Sequence { codes, name })
    }

    pub fn from_symbols(alphabet: &Alphabet, data: &[u8]) -> Result<Self> {
        Sequence::new(alphabet.encode(data)?, None)
    }

    pub fn codes(&self) -> &[Code] {
        &self.codes
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn into_codes(self) -> Vec<Code> {
        self.codes
    }

    /// Backward context at 1-based position `i`, unbounded on the left.
    pub fn context(&self, i: usize) -> impl Iterator<Item = Code> + '_ {
        self.codes[..i].iter().rev().copied()
    }

    /// Plain-format rendering: the symbols followed by a newline.
    pub fn to_plain(&self, alphabet: &Alphabet) -> Vec<u8> {
        let mut out = alphabet.decode(&self.codes);
        out.push(b'\n');
        out
    }
}

impl AsRef<[Code]> for Sequence {
    fn as_ref(&self) -> &[Code] {
        &self.codes
    }
}

impl Deref for Sequence {
    type Target = [Code];

    fn deref(&self) -> &[Code] {
        &self.codes
    }
}

/// A backward context `Y_i(j)`: `j` symbols read leftwards from position `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Context {
    pub position: usize,
    pub length: usize,
}

impl Context {
    pub fn new(position: usize, length: usize, seq_len: usize) -> Result<Self> {
        if length == 0 || length > position || position > seq_len {
            return Err(Error::ContextOutOfRange { position, length, len: seq_len });
        }
        Ok(Context { position, length })
    }

    pub fn materialize(&self, seq: &[Code]) -> Vec<Code> {
        seq[self.position - self.length..self.position].iter().rev().copied().collect()
    }
}

/// `(s_i, s_{i-1}, …, s_{i-j+1})` for 1-based `i`; requires `1 <= j <= i <= len`.
pub fn context_at(seq: &[Code], i: usize, j: usize) -> Result<Vec<Code>> {
    Ok(Context::new(i, j, seq.len())?.materialize(seq))
}

/// The `len - n` windows of length `n`, as `(1-based start, window)`.
pub fn windows(seq: &[Code], n: usize) -> Result<impl ExactSizeIterator<Item = (usize, &[Code])>> {
    if n == 0 || n >= seq.len() {
        return Err(Error::WindowOutOfRange { window: n, len: seq.len() });
    }
    let count = seq.len() - n;
    Ok((0..count).map(move |s| (s + 1, &seq[s..s + n])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Plain,
    Fasta,
}

/// One raw record: the header (FASTA only) and its symbols with all
/// whitespace removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub name: Option<String>,
    pub symbols: Vec<u8>,
}

pub fn parse_records(input: &[u8], format: Format) -> Result<Vec<Record>> {
    match format {
        Format::Plain => {
            let symbols: Vec<u8> =
                input.iter().copied().filter(|b| !b.is_ascii_whitespace()).collect();
            if symbols.is_empty() {
                return Err(Error::EmptyInput);
            }
            Ok(alloc::vec![Record { name: None, symbols }])
        }
        Format::Fasta => {
            let mut records: Vec<Record> = Vec::new();
            for (lineno, line) in input.split(|&b| b == b'\n').enumerate() {
                if let Some(header) = line.strip_prefix(b">") {
                    let name = String::from_utf8_lossy(header).trim().into();
                    records.push(Record { name: Some(name), symbols: Vec::new() });
                    continue;
                }
                let mut data = line.iter().copied().filter(|b| !b.is_ascii_whitespace()).peekable();
                if data.peek().is_none() {
                    continue;
                }
                match records.last_mut() {
                    Some(r) => r.symbols.extend(data),
                    None => return Err(Error::DataBeforeHeader(lineno + 1)),
                }
            }
            if records.is_empty() {
                return Err(Error::EmptyInput);
            }
            if let Some(r) = records.iter().find(|r| r.symbols.is_empty()) {
                return Err(Error::EmptyRecord(r.name.clone().unwrap_or_default()));
            }
            Ok(records)
        }
    }
}

/// Loads a single sequence. The alphabet is inferred unless one is supplied,
/// in which case symbols outside it are an error.
pub fn load_sequence(
    input: &[u8],
    format: Format,
    alphabet: Option<&Alphabet>,
) -> Result<(Sequence, Alphabet)> {
    let mut records = parse_records(input, format)?;
    if records.len() != 1 {
        return Err(Error::MultipleRecords(records.len()));
    }
    let record = records.pop().expect("one record");
    let alphabet = match alphabet {
        Some(a) => a.clone(),
        None => Alphabet::infer(&record.symbols)?,
    };
    let seq = Sequence::new(alphabet.encode(&record.symbols)?, record.name)?;
    Ok((seq, alphabet))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_y() -> (Sequence, Alphabet) {
        load_sequence(b"ABACDCBEDEDE", Format::Plain, None).unwrap()
    }

    #[test]
    fn loads_plain_training_sequence() {
        let (y, a) = toy_y();
        assert_eq!(y.len(), 12);
        assert_eq!(a.symbols(), b"ABCDE");
    }

    #[test]
    fn loads_fasta_record() {
        let (x, a) = load_sequence(b">id\nAAB\nDADAD\n", Format::Fasta, None).unwrap();
        assert_eq!(a.decode(&x), b"AABDADAD");
        assert_eq!(x.len(), 8);
        assert_eq!(x.name(), Some("id"));
    }

    #[test]
    fn rejects_empty_and_malformed_input() {
        assert_eq!(load_sequence(b"", Format::Plain, None).unwrap_err(), Error::EmptyInput);
        assert_eq!(load_sequence(b" \n\t", Format::Plain, None).unwrap_err(), Error::EmptyInput);
        assert_eq!(load_sequence(b"", Format::Fasta, None).unwrap_err(), Error::EmptyInput);
        assert_eq!(
            load_sequence(b"AC\n>x\nAC", Format::Fasta, None).unwrap_err(),
            Error::DataBeforeHeader(1)
        );
        assert!(matches!(
            load_sequence(b">a\n>b\nAC\n", Format::Fasta, None),
            Err(Error::EmptyRecord(_))
        ));
        assert_eq!(
            load_sequence(b">a\nAC\n>b\nCA\n", Format::Fasta, None).unwrap_err(),
            Error::MultipleRecords(2)
        );
    }

    #[test]
    fn supplied_alphabet_rejects_foreign_symbols() {
        let a = Alphabet::new(b"AB").unwrap();
        let err = load_sequence(b"ABX", Format::Plain, Some(&a)).unwrap_err();
        assert_eq!(err, Error::UnknownSymbol { symbol: 'X', offset: 2 });
        let (codes, unknown) = a.encode_lenient(b"ABX");
        assert_eq!(codes, [0, 1, UNKNOWN]);
        assert_eq!(unknown, 1);
    }

    #[test]
    fn multi_record_fasta_stays_separate() {
        let recs = parse_records(b">a\nAC\nG\n>b desc\nTT\n", Format::Fasta).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].symbols, b"ACG");
        assert_eq!(recs[1].name.as_deref(), Some("b desc"));
        assert_eq!(recs[1].symbols, b"TT");
    }

    #[test]
    fn contexts_read_backwards() {
        let (y, a) = toy_y();
        assert_eq!(a.decode(&context_at(&y, 2, 2).unwrap()), b"BA");
        let (x, _) = load_sequence(b"AABDADAD", Format::Plain, Some(&a)).unwrap();
        assert_eq!(a.decode(&context_at(&x, 3, 2).unwrap()), b"BA");
        for k in 1..=y.len() {
            assert_eq!(context_at(&y, k, 1).unwrap(), [y[k - 1]]);
        }
        assert!(context_at(&y, 2, 3).is_err());
        assert!(context_at(&y, 13, 1).is_err());
        assert!(context_at(&y, 3, 0).is_err());
    }

    #[test]
    fn window_counts() {
        let (y, a) = toy_y();
        assert_eq!(windows(&y, 11).unwrap().len(), 1);
        let w: Vec<_> = windows(&y, 4).unwrap().collect();
        assert_eq!(w.len(), 8);
        assert_eq!(w[0].0, 1);
        assert_eq!(a.decode(w[0].1), b"ABAC");
        assert_eq!(w[7].0, 8);
        assert!(windows(&y, 12).is_err());
        assert!(windows(&y, 0).is_err());
    }

    #[test]
    fn alphabet_validation() {
        assert_eq!(Alphabet::new(b"A").unwrap_err(), Error::AlphabetTooSmall(1));
        assert!(Alphabet::new(b"AA").is_err());
        assert!(Alphabet::new(b"A ").is_err());
        assert_eq!(Alphabet::infer(b"AAAA").unwrap_err(), Error::AlphabetTooSmall(1));
        assert_eq!(Alphabet::synthetic(4).unwrap().symbols(), b"ACGT");
        assert_eq!(Alphabet::synthetic(20).unwrap().len(), 20);
    }
}
