//! RHD1 block format.
//!
//! A block is `b"RHD1"`, then little-endian `u32` version, kind tag and
//! dimension count, the dimensions as `u32`, and a row-major payload of
//! `product(dims)` little-endian `f32` values (or bytes for `u8` kinds).
//! Files are plain concatenations of blocks.

use std::io::{Read, Write};

use crate::dsp::{AzimuthGrid, ImageKind, PolarImage};
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"RHD1";
pub const VERSION: u32 = 1;

/// Set on image kinds whose azimuth axis is beamspace (uniform in sine).
pub const BEAMSPACE_FLAG: u32 = 0x100;

pub mod kind {
    pub const MAGNITUDE: u32 = 1;
    pub const NORMALIZED: u32 = 2;
    pub const PROBABILITY: u32 = 3;
    /// `u8` payload of 0/1.
    pub const BINARY: u32 = 4;
    pub const POSE: u32 = 0x10;
    /// `u8` payload of UTF-8 JSON.
    pub const META: u32 = 0x20;
    pub const PARAM: u32 = 0x21;
    pub const ADAM_M: u32 = 0x22;
    pub const ADAM_V: u32 = 0x23;
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    F32(Vec<f32>),
    U8(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub kind: u32,
    pub dims: Vec<u32>,
    pub payload: Payload,
}

fn is_u8_kind(kind: u32) -> bool {
    matches!(kind & !BEAMSPACE_FLAG, kind::BINARY | kind::META)
}

impl Block {
    pub fn f32(kind: u32, dims: &[usize], data: Vec<f32>) -> Self {
        Self {
            kind,
            dims: dims.iter().map(|&d| d as u32).collect(),
            payload: Payload::F32(data),
        }
    }

    pub fn u8(kind: u32, dims: &[usize], data: Vec<u8>) -> Self {
        Self {
            kind,
            dims: dims.iter().map(|&d| d as u32).collect(),
            payload: Payload::U8(data),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.dims.iter().map(|&d| d as usize).collect()
    }

    pub fn n_elements(&self) -> usize {
        self.dims.iter().map(|&d| d as usize).product()
    }

    pub fn encoded_len(&self) -> usize {
        let width = if is_u8_kind(self.kind) { 1 } else { 4 };
        16 + 4 * self.dims.len() + width * self.n_elements()
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let mut buf = Vec::with_capacity(self.encoded_len());
        buf.extend_from_slice(&MAGIC);
        for v in [VERSION, self.kind, self.dims.len() as u32] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for d in &self.dims {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        match &self.payload {
            Payload::F32(v) => v.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes())),
            Payload::U8(v) => buf.extend_from_slice(v),
        }
        w.write_all(&buf)
    }

    /// Next block, or `None` at a clean end of input.
    pub fn read_from<R: Read>(r: &mut R) -> Result<Option<Self>> {
        let mut magic = [0u8; 4];
        match read_full(r, &mut magic)? {
            0 => return Ok(None),
            4 => {}
            n => return Err(Error::Data(format!("truncated block header ({n} bytes)"))),
        }
        if magic != MAGIC {
            return Err(Error::Data(format!("bad magic {magic:?}")));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(Error::Data(format!("unsupported RHD1 version {version}")));
        }
        let kind = read_u32(r)?;
        let ndims = read_u32(r)?;
        if ndims > 8 {
            return Err(Error::Data(format!("block has {ndims} dimensions")));
        }
        let dims = (0..ndims).map(|_| read_u32(r)).collect::<Result<Vec<_>>>()?;
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
            .filter(|&n| n <= 1 << 31)
            .ok_or_else(|| Error::Data(format!("block dims {dims:?} too large")))?;
        let payload = if is_u8_kind(kind) {
            let mut v = vec![0u8; n];
            read_exact(r, &mut v)?;
            Payload::U8(v)
        } else {
            let mut raw = vec![0u8; 4 * n];
            read_exact(r, &mut raw)?;
            Payload::F32(
                raw.chunks_exact(4)
                    .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                    .collect(),
            )
        };
        Ok(Some(Self { kind, dims, payload }))
    }

    pub fn expect_kind(&self, kind: u32) -> Result<&Self> {
        if self.kind != kind {
            return Err(Error::Data(format!(
                "expected block kind {kind:#x}, found {:#x}",
                self.kind
            )));
        }
        Ok(self)
    }

    pub fn into_f32(self) -> Result<Vec<f32>> {
        match self.payload {
            Payload::F32(v) => Ok(v),
            Payload::U8(_) => Err(Error::Data(format!("block {:#x} is not f32", self.kind))),
        }
    }

    pub fn into_u8(self) -> Result<Vec<u8>> {
        match self.payload {
            Payload::U8(v) => Ok(v),
            Payload::F32(_) => Err(Error::Data(format!("block {:#x} is not u8", self.kind))),
        }
    }
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..]) {
            Ok(0) => break,
            Ok(n) => got += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(Error::Data(format!("read failed: {e}"))),
        }
    }
    Ok(got)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    let n = read_full(r, buf)?;
    if n != buf.len() {
        return Err(Error::Data(format!(
            "truncated block: wanted {} bytes, got {n}",
            buf.len()
        )));
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Block that always follows; a clean end of input is an error.
pub fn read_block<R: Read>(r: &mut R) -> Result<Block> {
    Block::read_from(r)?.ok_or_else(|| Error::Data("unexpected end of file".into()))
}

fn image_tag(img: &PolarImage) -> u32 {
    let base = match img.kind {
        ImageKind::Magnitude => kind::MAGNITUDE,
        ImageKind::Normalized => kind::NORMALIZED,
        ImageKind::Probability => kind::PROBABILITY,
        ImageKind::Binary => kind::BINARY,
    };
    match img.grid {
        AzimuthGrid::Beamspace => base | BEAMSPACE_FLAG,
        AzimuthGrid::Uniform => base,
    }
}

/// Image block; binary images are stored one byte per pixel.
pub fn image_block(img: &PolarImage) -> Block {
    let dims = [img.n_range, img.n_azimuth];
    match img.kind {
        ImageKind::Binary => Block::u8(
            image_tag(img),
            &dims,
            img.data.iter().map(|&v| u8::from(v != 0.0)).collect(),
        ),
        _ => Block::f32(image_tag(img), &dims, img.data.clone()),
    }
}

/// Inverse of [`image_block`]. `max_range` is not part of the block.
pub fn block_image(block: Block, max_range: f64) -> Result<PolarImage> {
    let grid = if block.kind & BEAMSPACE_FLAG != 0 {
        AzimuthGrid::Beamspace
    } else {
        AzimuthGrid::Uniform
    };
    let kind = match block.kind & !BEAMSPACE_FLAG {
        kind::MAGNITUDE => ImageKind::Magnitude,
        kind::NORMALIZED => ImageKind::Normalized,
        kind::PROBABILITY => ImageKind::Probability,
        kind::BINARY => ImageKind::Binary,
        other => return Err(Error::Data(format!("block kind {other:#x} is not an image"))),
    };
    let [r, a] = block.dims()[..] else {
        return Err(Error::Data(format!("image block has dims {:?}", block.dims)));
    };
    let data = match block.payload {
        Payload::F32(v) => v,
        Payload::U8(v) => v.into_iter().map(f32::from).collect(),
    };
    PolarImage::from_data(r, a, data, max_range, kind, grid)
}
