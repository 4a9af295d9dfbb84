//! Shared low-level pieces of the binary container formats.
//!
//! Every binary artifact starts with an ASCII magic line, a plain-text
//! `key value` header terminated by a `payload` line, then little-endian
//! 64-bit floats, then a 64-bit FNV-1a checksum of the float bytes.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::io::{Read, Write};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over a byte slice.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Plain-text header: ordered `key value` lines plus the raw magic line.
pub struct Header {
    pub fields: BTreeMap<String, String>,
}

impl Header {
    pub fn get(&self, path: &str, key: &str) -> Result<&str> {
        self.fields
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Header {
                path: path.to_string(),
                detail: format!("missing field `{key}`"),
            })
    }

    pub fn get_usize(&self, path: &str, key: &str) -> Result<usize> {
        self.get(path, key)?.parse().map_err(|_| Error::Header {
            path: path.to_string(),
            detail: format!("field `{key}` is not an integer"),
        })
    }

    pub fn get_f64(&self, path: &str, key: &str) -> Result<f64> {
        self.get(path, key)?.parse().map_err(|_| Error::Header {
            path: path.to_string(),
            detail: format!("field `{key}` is not a number"),
        })
    }
}

/// Writer for one container file. Collects the payload so the checksum can
/// be appended at the end.
pub struct ContainerWriter {
    buf: Vec<u8>,
    payload_start: Option<usize>,
}

impl ContainerWriter {
    pub fn new(magic: &str) -> Self {
        let mut buf = Vec::new();
        buf.extend_from_slice(magic.as_bytes());
        ContainerWriter {
            buf,
            payload_start: None,
        }
    }

    pub fn field(&mut self, key: &str, value: impl std::fmt::Display) {
        assert!(self.payload_start.is_none(), "header already closed");
        self.buf
            .extend_from_slice(format!("{key} {value}\n").as_bytes());
    }

    /// Full-precision float header field (17 significant digits).
    pub fn field_f64(&mut self, key: &str, value: f64) {
        self.field(key, format!("{value:.16e}"));
    }

    pub fn begin_payload(&mut self) {
        assert!(self.payload_start.is_none(), "payload already started");
        self.buf.extend_from_slice(b"payload\n");
        self.payload_start = Some(self.buf.len());
    }

    pub fn floats(&mut self, values: impl IntoIterator<Item = f64>) {
        assert!(self.payload_start.is_some(), "payload not started");
        for v in values {
            self.buf.extend_from_slice(&v.to_le_bytes());
        }
    }

    pub fn finish(mut self, path: &std::path::Path) -> Result<()> {
        let start = self.payload_start.expect("payload not started");
        let checksum = fnv1a(&self.buf[start..]);
        self.buf.extend_from_slice(&checksum.to_le_bytes());
        let mut file = std::fs::File::create(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        file.write_all(&self.buf)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(())
    }
}

/// Reader for one container file.
pub struct ContainerReader {
    path: String,
    bytes: Vec<u8>,
    cursor: usize,
    payload_start: usize,
}

impl ContainerReader {
    pub fn open(path: &std::path::Path, magic: &'static str) -> Result<(Self, Header)> {
        let display = path.display().to_string();
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(&display, e))?;

        if bytes.len() < magic.len() || &bytes[..magic.len()] != magic.as_bytes() {
            return Err(Error::BadMagic {
                path: display,
                expected: magic,
            });
        }

        let mut fields = BTreeMap::new();
        let mut pos = magic.len();
        loop {
            let rest = &bytes[pos..];
            let nl = rest.iter().position(|&b| b == b'\n').ok_or_else(|| {
                Error::Header {
                    path: display.clone(),
                    detail: "unterminated header".to_string(),
                }
            })?;
            let line = std::str::from_utf8(&rest[..nl]).map_err(|_| Error::Header {
                path: display.clone(),
                detail: "header is not valid UTF-8".to_string(),
            })?;
            pos += nl + 1;
            if line == "payload" {
                break;
            }
            let (key, value) = line.split_once(' ').ok_or_else(|| Error::Header {
                path: display.clone(),
                detail: format!("malformed header line `{line}`"),
            })?;
            if fields
                .insert(key.to_string(), value.to_string())
                .is_some()
            {
                return Err(Error::Header {
                    path: display.clone(),
                    detail: format!("duplicate header field `{key}`"),
                });
            }
        }

        Ok((
            ContainerReader {
                path: display,
                bytes,
                cursor: pos,
                payload_start: pos,
            },
            Header { fields },
        ))
    }

    pub fn floats(&mut self, count: usize) -> Result<Vec<f64>> {
        let wanted = count * 8;
        // The trailing 8 bytes are the checksum, not payload.
        let available = self.bytes.len().saturating_sub(self.cursor + 8);
        if available < wanted {
            return Err(Error::Truncated {
                path: self.path.clone(),
                wanted,
                got: available,
            });
        }
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let at = self.cursor + i * 8;
            let mut raw = [0u8; 8];
            raw.copy_from_slice(&self.bytes[at..at + 8]);
            out.push(f64::from_le_bytes(raw));
        }
        self.cursor += wanted;
        Ok(out)
    }

    /// Verifies the trailing checksum against everything between the
    /// `payload` marker and the checksum itself, and that the payload was
    /// fully consumed.
    pub fn finish(self) -> Result<()> {
        let end = self.bytes.len();
        if end < self.cursor + 8 {
            return Err(Error::Truncated {
                path: self.path,
                wanted: 8,
                got: end.saturating_sub(self.cursor),
            });
        }
        if end != self.cursor + 8 {
            return Err(Error::Header {
                path: self.path,
                detail: format!(
                    "payload has {} unread bytes",
                    end - self.cursor - 8
                ),
            });
        }
        let mut raw = [0u8; 8];
        raw.copy_from_slice(&self.bytes[end - 8..]);
        let stored = u64::from_le_bytes(raw);
        let computed = fnv1a(&self.bytes[self.payload_start..end - 8]);
        if stored != computed {
            return Err(Error::Checksum {
                path: self.path,
                stored,
                computed,
            });
        }
        Ok(())
    }
}
