//! Little-endian primitives shared by the cache and model formats.

use handcraft_core::Matrix;

use crate::error::{BenchError, Result};

#[derive(Default)]
pub(crate) struct Writer {
    pub buf: Vec<u8>,
}

impl Writer {
    pub fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }

    pub fn len(&mut self, v: usize) {
        self.u64(v as u64);
    }

    pub fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }

    pub fn f64s(&mut self, v: &[f64]) {
        self.len(v.len());
        v.iter().for_each(|&x| self.f64(x));
    }

    pub fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.bytes(s.as_bytes());
    }

    pub fn matrix_header(&mut self, m: &Matrix) {
        self.len(m.rows());
        self.len(m.cols());
    }

    pub fn matrix(&mut self, m: &Matrix) {
        self.matrix_header(m);
        m.as_slice().iter().for_each(|&x| self.f64(x));
    }
}

pub(crate) struct Reader<'a> {
    data: &'a [u8],
    at: usize,
    what: &'static str,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8], what: &'static str) -> Self {
        Self { data, at: 0, what }
    }

    pub fn fail<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(BenchError::Format { what: self.what, msg: msg.into() })
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.at < n {
            return self.fail(format!("truncated at byte {}", self.at));
        }
        let s = &self.data[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    /// A length or index, rejected when larger than the bytes left could hold
    /// at `unit` bytes per element.
    pub fn len(&mut self, unit: usize) -> Result<usize> {
        let v = self.u64()?;
        let left = (self.data.len() - self.at) as u64;
        if unit > 0 && v > left / unit as u64 {
            return self.fail(format!("length {v} exceeds remaining {left} bytes"));
        }
        Ok(v as usize)
    }

    pub fn index(&mut self, bound: usize, name: &str) -> Result<usize> {
        let v = self.u64()?;
        if v >= bound as u64 {
            return self.fail(format!("{name} {v} out of range 0..{bound}"));
        }
        Ok(v as usize)
    }

    pub fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.len(8)?;
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn str(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        match String::from_utf8(self.take(n)?.to_vec()) {
            Ok(s) => Ok(s),
            Err(_) => self.fail("string is not UTF-8"),
        }
    }

    pub fn matrix(&mut self) -> Result<Matrix> {
        let rows = self.u64()? as usize;
        let cols = self.u64()? as usize;
        self.matrix_body(rows, cols)
    }

    pub fn matrix_body(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        let Some(n) = rows.checked_mul(cols).filter(|n| n.checked_mul(8).is_some_and(|b| b <= self.data.len() - self.at))
        else {
            return self.fail(format!("matrix {rows}x{cols} exceeds file size"));
        };
        let data = (0..n).map(|_| self.f64()).collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_vec(rows, cols, data)?)
    }

    pub fn magic(&mut self, magic: &[u8]) -> Result<()> {
        if self.take(magic.len()).ok() != Some(magic) {
            return self.fail("wrong magic bytes");
        }
        Ok(())
    }

    pub fn finish(&self) -> Result<()> {
        if self.at != self.data.len() {
            return self.fail(format!("{} trailing bytes", self.data.len() - self.at));
        }
        Ok(())
    }
}
