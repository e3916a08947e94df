//! On-disk containers for indexes and compacted trees.
//!
//! All integers are little-endian.
//!
//! Index container:
//!
//! | field            | size      |
//! |------------------|-----------|
//! | magic `SQCXIDX\0`| 8         |
//! | format version   | u32       |
//! | kind length `k`  | u8        |
//! | structure kind   | `k` bytes |
//! | alphabet size `a`| u8        |
//! | alphabet symbols | `a` bytes |
//! | `N'`             | u64       |
//! | `L_max`          | u64       |
//! | config length `c`| u32       |
//! | config JSON      | `c` bytes |
//! | reversed `Y`     | `N'` bytes|
//! | suffix array     | `N'` × u32|
//!
//! Binary tree container:
//!
//! | field                 | size          |
//! |-----------------------|---------------|
//! | magic `SQCXTRE\0`     | 8             |
//! | format version        | u32           |
//! | alphabet size, symbols| u8 + `a`      |
//! | `N'`, `L_max`, `N`, `f` | 4 × u64     |
//! | `ε` numerator, denominator | 2 × i128 |
//! | `min_count`           | u64           |
//! | `Y` match sum, matched, length | 3 × u64 |
//! | config length, JSON   | u32 + `c`     |
//! | leaf count            | u64           |
//! | per leaf: length, codes, count | u16 + len + u64 |
//!
//! The text tree form carries the same header as `# key value` lines
//! followed by one `<context>\t<count>` line per leaf.

use std::io::{self, BufRead, Read, Write};

use seqcompact_core::{
    rational, Alphabet, AvgMode, CompactionParams, Leaf, Rational, StandaloneTree, SuffixIndex, TrainingStats,
};

pub const FORMAT_VERSION: u32 = 1;
pub const INDEX_MAGIC: &[u8; 8] = b"SQCXIDX\0";
pub const TREE_MAGIC: &[u8; 8] = b"SQCXTRE\0";
const TEXT_TREE_TAG: &str = "seqcompact-tree";

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a seqcompact {0} file")]
    BadMagic(&'static str),
    #[error("format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("unsupported structure kind {0:?}")]
    Kind(String),
    #[error("alphabet mismatch: expected {expected:?}, file has {found:?}")]
    AlphabetMismatch { expected: String, found: String },
    #[error("truncated file")]
    Truncated,
    #[error("trailing bytes after the body")]
    Trailing,
    #[error("malformed {0}")]
    Malformed(String),
    #[error(transparent)]
    Data(#[from] seqcompact_core::Error),
}

pub type Result<T, E = PersistError> = std::result::Result<T, E>;

fn read_exact_or_truncated(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => PersistError::Truncated,
        _ => PersistError::Io(e),
    })
}

fn read_u8(r: &mut impl Read) -> Result<u8> {
    let mut b = [0u8; 1];
    read_exact_or_truncated(r, &mut b)?;
    Ok(b[0])
}

fn read_u16(r: &mut impl Read) -> Result<u16> {
    let mut b = [0u8; 2];
    read_exact_or_truncated(r, &mut b)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact_or_truncated(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact_or_truncated(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_i128(r: &mut impl Read) -> Result<i128> {
    let mut b = [0u8; 16];
    read_exact_or_truncated(r, &mut b)?;
    Ok(i128::from_le_bytes(b))
}

fn read_vec(r: &mut impl Read, len: usize) -> Result<Vec<u8>> {
    let mut v = vec![0u8; len];
    read_exact_or_truncated(r, &mut v)?;
    Ok(v)
}

fn expect_end(r: &mut impl Read) -> Result<()> {
    let mut b = [0u8; 1];
    match r.read(&mut b)? {
        0 => Ok(()),
        _ => Err(PersistError::Trailing),
    }
}

fn read_header(r: &mut impl Read, magic: &[u8; 8], what: &'static str) -> Result<()> {
    let mut m = [0u8; 8];
    r.read_exact(&mut m).map_err(|_| PersistError::BadMagic(what))?;
    if &m != magic {
        return Err(PersistError::BadMagic(what));
    }
    let version = read_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(PersistError::Version { found: version, expected: FORMAT_VERSION });
    }
    Ok(())
}

fn write_alphabet(w: &mut impl Write, a: &Alphabet) -> io::Result<()> {
    w.write_all(&[a.len() as u8])?;
    w.write_all(a.symbols())
}

fn read_alphabet(r: &mut impl Read, expected: Option<&Alphabet>) -> Result<Alphabet> {
    let len = usize::from(read_u8(r)?);
    let symbols = read_vec(r, len)?;
    check_alphabet(&symbols, expected)?;
    Ok(Alphabet::new(&symbols)?)
}

fn check_alphabet(found: &[u8], expected: Option<&Alphabet>) -> Result<()> {
    match expected {
        Some(e) if e.symbols() != found => Err(PersistError::AlphabetMismatch {
            expected: String::from_utf8_lossy(e.symbols()).into_owned(),
            found: String::from_utf8_lossy(found).into_owned(),
        }),
        _ => Ok(()),
    }
}

fn read_config(r: &mut impl Read) -> Result<String> {
    let len = read_u32(r)? as usize;
    String::from_utf8(read_vec(r, len)?).map_err(|_| PersistError::Malformed("config (not UTF-8)".into()))
}

fn write_config(w: &mut impl Write, config: &str) -> io::Result<()> {
    w.write_all(&(config.len() as u32).to_le_bytes())?;
    w.write_all(config.as_bytes())
}

const SA_CHUNK: usize = 1 << 16;

pub fn write_index(w: &mut impl Write, index: &SuffixIndex, config: &str) -> io::Result<()> {
    let (text, sa) = index.parts();
    w.write_all(INDEX_MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    let kind = SuffixIndex::STRUCTURE_KIND.as_bytes();
    w.write_all(&[kind.len() as u8])?;
    w.write_all(kind)?;
    write_alphabet(w, index.alphabet())?;
    w.write_all(&index.n_prime().to_le_bytes())?;
    w.write_all(&(index.l_max() as u64).to_le_bytes())?;
    write_config(w, config)?;
    w.write_all(text)?;
    let mut buf = Vec::with_capacity(4 * SA_CHUNK);
    for chunk in sa.chunks(SA_CHUNK) {
        buf.clear();
        for &v in chunk {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// Reads an index, rejecting other versions, kinds, and (when given) a
/// different alphabet. Returns the index and its embedded config.
pub fn read_index(r: &mut impl Read, expected: Option<&Alphabet>) -> Result<(SuffixIndex, String)> {
    read_header(r, INDEX_MAGIC, "index")?;
    let kind_len = usize::from(read_u8(r)?);
    let kind = read_vec(r, kind_len)?;
    if kind != SuffixIndex::STRUCTURE_KIND.as_bytes() {
        return Err(PersistError::Kind(String::from_utf8_lossy(&kind).into_owned()));
    }
    let alphabet = read_alphabet(r, expected)?;
    let n = usize::try_from(read_u64(r)?).map_err(|_| PersistError::Malformed("index length".into()))?;
    let l_max = usize::try_from(read_u64(r)?).map_err(|_| PersistError::Malformed("L_max".into()))?;
    let config = read_config(r)?;
    let text = read_vec(r, n)?;
    let mut sa = Vec::with_capacity(n);
    let mut buf = vec![0u8; 4 * SA_CHUNK];
    while sa.len() < n {
        let take = (n - sa.len()).min(SA_CHUNK);
        read_exact_or_truncated(r, &mut buf[..4 * take])?;
        sa.extend(buf[..4 * take].chunks_exact(4).map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]])));
    }
    expect_end(r)?;
    Ok((SuffixIndex::from_parts(alphabet, text, sa, l_max)?, config))
}

/// A standalone tree plus what is needed to score against it without `Y`.
#[derive(Clone, Debug)]
pub struct PersistedTree {
    pub tree: StandaloneTree,
    /// Match sum, matched positions, and length of `Y` against the tree.
    pub y_stats: (u64, u64, u64),
    pub config: String,
}

impl PersistedTree {
    pub fn training_stats(&self, mode: AvgMode) -> seqcompact_core::Result<TrainingStats> {
        let (sum, matched, len) = self.y_stats;
        TrainingStats::from_counts(sum, matched, len, self.tree.l_max(), mode)
    }
}

pub fn write_tree_binary(w: &mut impl Write, t: &PersistedTree) -> io::Result<()> {
    let tree = &t.tree;
    let p = tree.params();
    w.write_all(TREE_MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    write_alphabet(w, tree.alphabet())?;
    for v in [tree.n_prime(), tree.l_max() as u64, p.n(), p.f()] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&p.epsilon().numer().to_le_bytes())?;
    w.write_all(&p.epsilon().denom().to_le_bytes())?;
    let (sum, matched, len) = t.y_stats;
    for v in [tree.min_count(), sum, matched, len] {
        w.write_all(&v.to_le_bytes())?;
    }
    write_config(w, &t.config)?;
    w.write_all(&tree.leaf_count().to_le_bytes())?;
    for leaf in tree.leaves() {
        w.write_all(&(leaf.context.len() as u16).to_le_bytes())?;
        w.write_all(&leaf.context)?;
        w.write_all(&leaf.count.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_tree_binary(r: &mut impl Read, expected: Option<&Alphabet>) -> Result<PersistedTree> {
    read_header(r, TREE_MAGIC, "tree")?;
    let alphabet = read_alphabet(r, expected)?;
    let n_prime = read_u64(r)?;
    let l_max = read_u64(r)? as usize;
    let n = read_u64(r)?;
    let f = read_u64(r)?;
    let (num, den) = (read_i128(r)?, read_i128(r)?);
    if den <= 0 {
        return Err(PersistError::Malformed("epsilon".into()));
    }
    let min_count = read_u64(r)?;
    let y_stats = (read_u64(r)?, read_u64(r)?, read_u64(r)?);
    let config = read_config(r)?;
    let count = read_u64(r)?;
    if count > n_prime {
        return Err(PersistError::Malformed("leaf count".into()));
    }
    let mut leaves = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let len = usize::from(read_u16(r)?);
        let context = read_vec(r, len)?;
        leaves.push(Leaf { context, count: read_u64(r)? });
    }
    expect_end(r)?;
    let params = CompactionParams::new(Rational::new(num, den), n, f)?;
    finish_tree(alphabet, n_prime, l_max, params, min_count, leaves, y_stats, config)
}

#[allow(clippy::too_many_arguments)]
fn finish_tree(
    alphabet: Alphabet,
    n_prime: u64,
    l_max: usize,
    params: CompactionParams,
    min_count: u64,
    leaves: Vec<Leaf>,
    y_stats: (u64, u64, u64),
    config: String,
) -> Result<PersistedTree> {
    if params.min_count(n_prime) != min_count {
        return Err(PersistError::Malformed("min_count disagrees with epsilon, N, f and N'".into()));
    }
    if y_stats.2 != n_prime || y_stats.1 > n_prime || y_stats.0 > n_prime.saturating_mul(l_max as u64) {
        return Err(PersistError::Malformed("training match statistics".into()));
    }
    let tree = StandaloneTree::from_leaves(alphabet, n_prime, l_max, params, leaves)?;
    Ok(PersistedTree { tree, y_stats, config })
}

pub fn write_tree_text(w: &mut impl Write, t: &PersistedTree) -> io::Result<()> {
    let tree = &t.tree;
    let p = tree.params();
    let (sum, matched, len) = t.y_stats;
    writeln!(w, "# {TEXT_TREE_TAG} {FORMAT_VERSION}")?;
    writeln!(w, "# alphabet {}", String::from_utf8_lossy(tree.alphabet().symbols()))?;
    writeln!(w, "# n_prime {}", tree.n_prime())?;
    writeln!(w, "# l_max {}", tree.l_max())?;
    writeln!(w, "# N {}", p.n())?;
    writeln!(w, "# f {}", p.f())?;
    writeln!(w, "# epsilon {}", p.epsilon())?;
    writeln!(w, "# min_count {}", tree.min_count())?;
    writeln!(w, "# y_stats {sum} {matched} {len}")?;
    writeln!(w, "# leaves {}", tree.leaf_count())?;
    writeln!(w, "# config {}", t.config)?;
    for leaf in tree.leaves() {
        w.write_all(&tree.alphabet().decode(&leaf.context))?;
        writeln!(w, "\t{}", leaf.count)?;
    }
    Ok(())
}

fn field<T: std::str::FromStr>(value: Option<&str>, key: &str) -> Result<T> {
    value
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| PersistError::Malformed(format!("tree header field {key:?}")))
}

pub fn read_tree_text(r: impl BufRead, expected: Option<&Alphabet>) -> Result<PersistedTree> {
    let mut lines = r.lines();
    let first = lines.next().transpose()?.ok_or(PersistError::BadMagic("tree"))?;
    let mut tag = first.strip_prefix("# ").unwrap_or("").split(' ');
    if tag.next() != Some(TEXT_TREE_TAG) {
        return Err(PersistError::BadMagic("tree"));
    }
    let version: u32 = field(tag.next(), "version")?;
    if version != FORMAT_VERSION {
        return Err(PersistError::Version { found: version, expected: FORMAT_VERSION });
    }
    let mut header = std::collections::BTreeMap::new();
    let mut body = Vec::new();
    for line in lines {
        let line = line?;
        match line.strip_prefix("# ") {
            Some(h) if body.is_empty() => {
                let (k, v) = h.split_once(' ').unwrap_or((h, ""));
                header.insert(k.to_string(), v.to_string());
            }
            _ if line.is_empty() => {}
            _ => body.push(line),
        }
    }
    let get = |k: &str| header.get(k).map(String::as_str);
    let symbols = get("alphabet").ok_or_else(|| PersistError::Malformed("tree header field \"alphabet\"".into()))?;
    check_alphabet(symbols.as_bytes(), expected)?;
    let alphabet = Alphabet::new(symbols.as_bytes())?;
    let n_prime: u64 = field(get("n_prime"), "n_prime")?;
    let l_max: usize = field(get("l_max"), "l_max")?;
    let n: u64 = field(get("N"), "N")?;
    let f: u64 = field(get("f"), "f")?;
    let epsilon = rational::parse(get("epsilon").unwrap_or(""))
        .map_err(|_| PersistError::Malformed("tree header field \"epsilon\"".into()))?;
    let min_count: u64 = field(get("min_count"), "min_count")?;
    let mut ys = get("y_stats").unwrap_or("").split(' ');
    let y_stats = (field(ys.next(), "y_stats")?, field(ys.next(), "y_stats")?, field(ys.next(), "y_stats")?);
    let declared: u64 = field(get("leaves"), "leaves")?;
    let config = get("config").unwrap_or("").to_string();
    let mut leaves = Vec::with_capacity(body.len());
    for line in &body {
        let (ctx, count) =
            line.split_once('\t').ok_or_else(|| PersistError::Malformed(format!("leaf line {line:?}")))?;
        let count: u64 = field(Some(count), "leaf count")?;
        leaves.push(Leaf { context: alphabet.encode(ctx.as_bytes())?, count });
    }
    if leaves.len() as u64 != declared {
        return Err(PersistError::Malformed("leaf count disagrees with header".into()));
    }
    let params = CompactionParams::new(epsilon, n, f)?;
    finish_tree(alphabet, n_prime, l_max, params, min_count, leaves, y_stats, config)
}

/// Reads either tree form, telling them apart by the leading magic.
pub fn read_tree(bytes: &[u8], expected: Option<&Alphabet>) -> Result<PersistedTree> {
    if bytes.starts_with(TREE_MAGIC) {
        read_tree_binary(&mut &bytes[..], expected)
    } else {
        read_tree_text(bytes, expected)
    }
}
