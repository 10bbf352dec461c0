//! Little-endian parameter files:
//!
//! ```text
//! magic  b"OODAE\0\x01\0"
//! u32    input_h, input_w, n_channels, channels..., latent_dim
//! f64    leaky_slope
//! u64    seed
//! f32    every tensor in declaration order
//! ```

use std::path::Path;

use crate::scalar::Scalar;

use super::model::{AeConfig, AeParams};
use super::VisDivError;

const MAGIC: &[u8; 8] = b"OODAE\0\x01\0";

pub fn encode_params<T: Scalar>(p: &AeParams<T>) -> Vec<u8> {
    let c = &p.config;
    let mut out = MAGIC.to_vec();
    let mut u32s = vec![c.input_h, c.input_w, c.enc_channels.len()];
    u32s.extend(&c.enc_channels);
    u32s.push(c.latent_dim);
    for v in u32s {
        out.extend((v as u32).to_le_bytes());
    }
    out.extend(c.leaky_slope.to_le_bytes());
    out.extend(c.seed.to_le_bytes());
    for t in p.tensors() {
        for v in t {
            out.extend((v.as_f64() as f32).to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], VisDivError> {
        let end = self.pos + N;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| VisDivError::Format(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(slice.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<usize, VisDivError> {
        Ok(u32::from_le_bytes(self.take()?) as usize)
    }
}

pub fn decode_params<T: Scalar>(bytes: &[u8]) -> Result<AeParams<T>, VisDivError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(VisDivError::Format("missing magic".into()));
    }
    let mut cur = Cursor {
        bytes,
        pos: MAGIC.len(),
    };
    let (input_h, input_w, n) = (cur.u32()?, cur.u32()?, cur.u32()?);
    if n > 64 {
        return Err(VisDivError::Format(format!("{n} channel entries")));
    }
    let enc_channels = (0..n).map(|_| cur.u32()).collect::<Result<Vec<_>, _>>()?;
    let latent_dim = cur.u32()?;
    let leaky_slope = f64::from_le_bytes(cur.take()?);
    let seed = u64::from_le_bytes(cur.take()?);
    let config = AeConfig {
        input_h,
        input_w,
        enc_channels,
        latent_dim,
        leaky_slope,
        seed,
    };
    let mut p = AeParams::zeros(&config)?;
    let expected = p.num_params() * 4;
    if bytes.len() - cur.pos != expected {
        return Err(VisDivError::Format(format!(
            "expected {expected} bytes of tensors, found {}",
            bytes.len() - cur.pos
        )));
    }
    for t in p.tensors_mut() {
        for v in t.iter_mut() {
            let x = f32::from_le_bytes(cur.take()?);
            if !x.is_finite() {
                return Err(VisDivError::Format(format!(
                    "non-finite parameter at byte {}",
                    cur.pos - 4
                )));
            }
            *v = T::lit(x as f64);
        }
    }
    Ok(p)
}

pub fn save_params<T: Scalar>(p: &AeParams<T>, path: &Path) -> Result<(), VisDivError> {
    std::fs::write(path, encode_params(p)).map_err(|e| VisDivError::io(path, e))
}

pub fn load_params<T: Scalar>(path: &Path) -> Result<AeParams<T>, VisDivError> {
    let bytes = std::fs::read(path).map_err(|e| VisDivError::io(path, e))?;
    decode_params(&bytes)
}
