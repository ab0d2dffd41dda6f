//! HPEMB: the binary embedding file exchanged with feature extractors.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic           8 bytes  "HPEMB\0\0" + version byte (currently 1)
//! dim             u32
//! count           u64
//! model_tag       u32 byte length + UTF-8
//! feature_source  u32 byte length + UTF-8
//! count × record:
//!   sample_id     u32 byte length + UTF-8
//!   label         u8 (0 = distorted, 1 = normal)
//!   vector        dim × f32
//! ```
//!
//! Nothing may follow the last record.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use super::{DataIoError, EmbeddingRecord, EmbeddingSet};

pub const MAGIC_PREFIX: &[u8; 7] = b"HPEMB\0\0";
pub const FORMAT_VERSION: u8 = 1;

/// Size in bytes of the fixed and tag portion of the header.
pub fn header_len(model_tag: &str, feature_source: &str) -> usize {
    8 + 4 + 8 + 4 + model_tag.len() + 4 + feature_source.len()
}

/// Size in bytes of one encoded record.
pub fn record_len(sample_id: &str, dim: usize) -> usize {
    4 + sample_id.len() + 1 + 4 * dim
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    BadMagic([u8; 8]),
    UnsupportedVersion(u8),
    /// File ended early: `needed` bytes were required at the offset, `available` remained.
    Truncated {
        needed: u64,
        available: u64,
        file_len: u64,
    },
    ZeroDim,
    InvalidUtf8,
    InvalidLabel(u8),
    NonFinite {
        record: u64,
        sample_id: String,
        component: u32,
    },
    DuplicateId(String),
    TrailingBytes(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub offset: u64,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: ", self.offset)?;
        match &self.kind {
            ParseErrorKind::BadMagic(m) => write!(f, "bad magic {m:02x?}"),
            ParseErrorKind::UnsupportedVersion(v) => write!(f, "unsupported format version {v}"),
            ParseErrorKind::Truncated {
                needed,
                available,
                file_len,
            } => write!(
                f,
                "truncated: expected at least {} bytes, file has {} ({needed} needed, {available} left)",
                self.offset + needed,
                file_len
            ),
            ParseErrorKind::ZeroDim => write!(f, "dimension 0"),
            ParseErrorKind::InvalidUtf8 => write!(f, "string is not UTF-8"),
            ParseErrorKind::InvalidLabel(v) => write!(f, "label byte {v} is neither 0 nor 1"),
            ParseErrorKind::NonFinite {
                record,
                sample_id,
                component,
            } => write!(f, "record {record} ({sample_id}) component {component} is not finite"),
            ParseErrorKind::DuplicateId(id) => write!(f, "duplicate sample id {id:?}"),
            ParseErrorKind::TrailingBytes(n) => write!(f, "{n} unexpected trailing bytes"),
        }
    }
}

impl std::error::Error for ParseError {}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            offset: self.pos as u64,
            kind,
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ParseError> {
        let available = self.buf.len() - self.pos;
        if n > available {
            return Err(self.err(ParseErrorKind::Truncated {
                needed: n as u64,
                available: available as u64,
                file_len: self.buf.len() as u64,
            }));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], ParseError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32, ParseError> {
        self.array().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Result<u64, ParseError> {
        self.array().map(u64::from_le_bytes)
    }

    fn string(&mut self) -> Result<String, ParseError> {
        let len = self.u32()? as usize;
        let start = self.pos;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| ParseError {
            offset: start as u64,
            kind: ParseErrorKind::InvalidUtf8,
        })
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

/// Serialize a set. Fails without producing output if any invariant is violated.
pub fn encode(set: &EmbeddingSet) -> Result<Vec<u8>, DataIoError> {
    set.validate()?;
    let body: usize = set.records.iter().map(|r| record_len(&r.sample_id, set.dim)).sum();
    let mut out = Vec::with_capacity(header_len(&set.model_tag, &set.feature_source) + body);
    out.extend_from_slice(MAGIC_PREFIX);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&(set.dim as u32).to_le_bytes());
    out.extend_from_slice(&(set.records.len() as u64).to_le_bytes());
    put_str(&mut out, &set.model_tag);
    put_str(&mut out, &set.feature_source);
    for r in &set.records {
        put_str(&mut out, &r.sample_id);
        out.push(u8::from(r.label));
        for v in &r.vector {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

/// Parse and fully validate an HPEMB byte buffer.
pub fn decode(buf: &[u8]) -> Result<EmbeddingSet, ParseError> {
    let mut c = Cursor { buf, pos: 0 };
    let magic: [u8; 8] = c.array()?;
    if &magic[..7] != MAGIC_PREFIX {
        return Err(ParseError {
            offset: 0,
            kind: ParseErrorKind::BadMagic(magic),
        });
    }
    if magic[7] != FORMAT_VERSION {
        return Err(ParseError {
            offset: 7,
            kind: ParseErrorKind::UnsupportedVersion(magic[7]),
        });
    }
    let dim_at = c.pos;
    let dim = c.u32()? as usize;
    if dim == 0 {
        return Err(ParseError {
            offset: dim_at as u64,
            kind: ParseErrorKind::ZeroDim,
        });
    }
    let count = c.u64()?;
    let model_tag = c.string()?;
    let feature_source = c.string()?;

    // A hostile count must not drive allocation; each record takes at least 5 + 4·dim bytes.
    let min_record = 5 + 4 * dim;
    let plausible = (buf.len() - c.pos) / min_record;
    let mut records = Vec::with_capacity((count as usize).min(plausible));
    let mut ids = HashSet::new();
    for index in 0..count {
        let id_at = c.pos;
        let sample_id = c.string()?;
        let label_at = c.pos;
        let label = match c.array::<1>()?[0] {
            0 => false,
            1 => true,
            v => {
                return Err(ParseError {
                    offset: label_at as u64,
                    kind: ParseErrorKind::InvalidLabel(v),
                })
            }
        };
        let mut vector = Vec::with_capacity(dim);
        for component in 0..dim {
            let at = c.pos;
            let v = f32::from_le_bytes(c.array()?);
            if !v.is_finite() {
                return Err(ParseError {
                    offset: at as u64,
                    kind: ParseErrorKind::NonFinite {
                        record: index,
                        sample_id,
                        component: component as u32,
                    },
                });
            }
            vector.push(v);
        }
        if !ids.insert(sample_id.clone()) {
            return Err(ParseError {
                offset: id_at as u64,
                kind: ParseErrorKind::DuplicateId(sample_id),
            });
        }
        records.push(EmbeddingRecord {
            sample_id,
            label,
            vector,
        });
    }
    if c.pos != buf.len() {
        return Err(c.err(ParseErrorKind::TrailingBytes((buf.len() - c.pos) as u64)));
    }
    Ok(EmbeddingSet {
        model_tag,
        feature_source,
        dim,
        records,
    })
}

pub fn write_embeddings(set: &EmbeddingSet, path: &Path) -> Result<(), DataIoError> {
    let bytes = encode(set)?;
    std::fs::write(path, bytes).map_err(|e| DataIoError::io(path, e))
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingSet, DataIoError> {
    let bytes = std::fs::read(path).map_err(|e| DataIoError::io(path, e))?;
    decode(&bytes).map_err(|source| DataIoError::Parse {
        path: path.to_path_buf(),
        source,
    })
}
