//! `.ten` dense tensors: magic `TENS`, u8 rank, rank × u32 LE dims, then
//! row-major f32 LE payload.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const TEN_MAGIC: &[u8; 4] = b"TENS";

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        if dims.is_empty() || dims.len() > u8::MAX as usize {
            return Err(Error::Argument(format!("tensor rank {} not in 1..=255", dims.len())));
        }
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Argument("tensor dims overflow".into()))?;
        if n != data.len() {
            return Err(Error::Argument(format!(
                "tensor dims {dims:?} need {n} values, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(5 + 4 * self.dims.len() + 4 * self.data.len());
        out.extend_from_slice(TEN_MAGIC);
        out.push(self.dims.len() as u8);
        for &d in &self.dims {
            let d = u32::try_from(d).map_err(|_| Error::Format(format!("dim {d} does not fit in u32")))?;
            out.extend_from_slice(&d.to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 5 || &bytes[..4] != TEN_MAGIC {
            return Err(Error::Format("bad tensor magic, expected TENS".into()));
        }
        let rank = bytes[4] as usize;
        if rank == 0 {
            return Err(Error::Format("tensor rank 0".into()));
        }
        let header = 5 + 4 * rank;
        if bytes.len() < header {
            return Err(Error::Format("truncated tensor header".into()));
        }
        let dims: Vec<usize> = bytes[5..header]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
            .collect();
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::Format("tensor dims overflow".into()))?;
        let payload = &bytes[header..];
        if payload.len() != n {
            return Err(Error::Length {
                expected: n,
                actual: payload.len(),
            });
        }
        let data = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { dims, data })
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = fs::File::create(path).map_err(|e| Error::io_at(path, e))?;
        f.write_all(&self.encode()?).map_err(|e| Error::io_at(path, e))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::decode(&fs::read(path).map_err(|e| Error::io_at(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_exact() {
        let t = Tensor::new(vec![1, 2], vec![1.0, -2.5]).unwrap();
        let b = t.encode().unwrap();
        assert_eq!(&b[..4], b"TENS");
        assert_eq!(b[4], 2);
        assert_eq!(&b[5..13], &[1, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(&b[13..17], &1.0f32.to_le_bytes());
        assert_eq!(&b[17..21], &(-2.5f32).to_le_bytes());
        assert_eq!(Tensor::decode(&b).unwrap(), t);
    }

    #[test]
    fn malformed_inputs() {
        assert!(Tensor::new(vec![2, 2], vec![0.0; 3]).is_err());
        assert!(Tensor::new(vec![], vec![]).is_err());
        let b = Tensor::new(vec![3], vec![0.0; 3]).unwrap().encode().unwrap();
        assert!(matches!(Tensor::decode(&b[..b.len() - 2]), Err(Error::Length { .. })));
        assert!(matches!(Tensor::decode(b"TENX\x01"), Err(Error::Format(_))));
        assert!(matches!(Tensor::decode(b"TENS\x02\x01\x00"), Err(Error::Format(_))));
    }
}
