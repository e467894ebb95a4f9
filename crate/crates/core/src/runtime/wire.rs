//! Payload framing: a tag byte followed by fixed-width or length-prefixed
//! items. Field elements travel as 8-byte little-endian canonical values.

use super::RuntimeError;

#[derive(Clone, Debug)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new(tag: u8) -> Self {
        Self { buf: vec![tag] }
    }

    pub fn u8(mut self, v: u8) -> Self {
        self.buf.push(v);
        self
    }

    pub fn u32(mut self, v: u32) -> Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn u64(mut self, v: u64) -> Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn elems(mut self, vs: &[u64]) -> Self {
        self = self.u32(vs.len() as u32);
        for &v in vs {
            self = self.u64(v);
        }
        self
    }

    pub fn bytes(mut self, bs: &[u8]) -> Self {
        self = self.u32(bs.len() as u32);
        self.buf.extend_from_slice(bs);
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Clone, Debug)]
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn short(what: &str) -> RuntimeError {
    RuntimeError::Decode(format!("truncated payload reading {what}"))
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    /// Reads the tag and checks it.
    pub fn expect(buf: &'a [u8], tag: u8) -> Result<Self, RuntimeError> {
        let mut r = Self::new(buf);
        let got = r.u8()?;
        if got != tag {
            return Err(RuntimeError::Decode(format!("expected tag {tag:#04x}, got {got:#04x}")));
        }
        Ok(r)
    }

    pub fn peek_tag(buf: &[u8]) -> Option<u8> {
        buf.first().copied()
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], RuntimeError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| short(what))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, RuntimeError> {
        Ok(self.take(1, "u8")?[0])
    }

    pub fn u32(&mut self) -> Result<u32, RuntimeError> {
        Ok(u32::from_le_bytes(self.take(4, "u32")?.try_into().expect("4 bytes")))
    }

    pub fn u64(&mut self) -> Result<u64, RuntimeError> {
        Ok(u64::from_le_bytes(self.take(8, "u64")?.try_into().expect("8 bytes")))
    }

    pub fn elems(&mut self) -> Result<Vec<u64>, RuntimeError> {
        let n = self.u32()? as usize;
        if n > (self.buf.len() - self.pos) / 8 {
            return Err(short("element list"));
        }
        (0..n).map(|_| self.u64()).collect()
    }

    pub fn bytes(&mut self) -> Result<Vec<u8>, RuntimeError> {
        let n = self.u32()? as usize;
        Ok(self.take(n, "byte string")?.to_vec())
    }

    /// Fails unless every byte was consumed.
    pub fn end(self) -> Result<(), RuntimeError> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(RuntimeError::Decode(format!("{} trailing bytes", self.buf.len() - self.pos)))
        }
    }
}
