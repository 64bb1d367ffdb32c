//! Little-endian field encoding shared by the checkpoint and model files.

use crate::error::{Error, Result};

pub(crate) struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new(magic: &[u8; 8]) -> Self {
        Writer {
            buf: magic.to_vec(),
        }
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }

    pub fn f32(&mut self, v: f32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn bytes(&mut self, v: &[u8]) {
        self.buf.extend_from_slice(v);
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub(crate) struct Reader<'a> {
    kind: &'static str,
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(kind: &'static str, buf: &'a [u8], magic: &[u8; 8]) -> Result<Self> {
        if buf.len() < 8 || &buf[..8] != magic {
            return Err(Error::format(
                kind,
                format!("missing magic {:?}", String::from_utf8_lossy(magic)),
            ));
        }
        Ok(Reader { kind, buf, pos: 8 })
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::format(
                self.kind,
                format!("truncated at byte {}", self.pos),
            ));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::format(self.kind, format!("count {v} too large")))
    }

    pub fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Guards allocation sizes against corrupt counts.
    pub fn check_remaining(&self, count: usize, width: usize) -> Result<()> {
        match count.checked_mul(width) {
            Some(n) if n <= self.buf.len() - self.pos => Ok(()),
            _ => Err(Error::format(
                self.kind,
                format!("count {count} exceeds remaining data"),
            )),
        }
    }

    pub fn is_at_end(&self) -> bool {
        self.pos == self.buf.len()
    }

    pub fn expect_end(&self) -> Result<()> {
        if !self.is_at_end() {
            return Err(Error::format(
                self.kind,
                format!("{} trailing bytes", self.buf.len() - self.pos),
            ));
        }
        Ok(())
    }

    pub fn error(&self, reason: impl Into<String>) -> Error {
        Error::format(self.kind, reason)
    }
}
