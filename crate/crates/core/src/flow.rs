//! Dense optical flow fields and the Middlebury `.flo` file format.
//!
//! A `.flo` file is: the float32 tag `202021.25` (bytes `PIEH`), width and
//! height as int32, then `height * width` interleaved `(dx, dy)` float32
//! pairs in row-major order. Everything is little-endian.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const FLO_TAG: f32 = 202021.25;

/// Per-pixel displacement from frame `t` to `t + 1`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    height: u32,
    width: u32,
    vectors: Vec<[f32; 2]>,
}

impl FlowField {
    pub fn zeros(height: u32, width: u32) -> Self {
        FlowField::uniform(height, width, 0.0, 0.0)
    }

    pub fn uniform(height: u32, width: u32, dx: f32, dy: f32) -> Self {
        FlowField {
            height,
            width,
            vectors: vec![[dx, dy]; height as usize * width as usize],
        }
    }

    /// Builds a field from row-major `(dx, dy)` vectors. Non-finite values are rejected.
    pub fn from_vectors(height: u32, width: u32, vectors: Vec<[f32; 2]>) -> Result<Self> {
        if vectors.len() != height as usize * width as usize {
            return Err(Error::contract(format!(
                "flow has {} vectors, expected {height}x{width}",
                vectors.len()
            )));
        }
        if let Some(i) = vectors
            .iter()
            .position(|v| !v[0].is_finite() || !v[1].is_finite())
        {
            return Err(Error::format(
                "flow",
                format!("non-finite vector at pixel {i}"),
            ));
        }
        Ok(FlowField {
            height,
            width,
            vectors,
        })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.height, self.width)
    }

    /// `(dx, dy)` at pixel (`row`, `col`).
    pub fn at(&self, row: u32, col: u32) -> (f32, f32) {
        let v = self.vectors[row as usize * self.width as usize + col as usize];
        (v[0], v[1])
    }

    pub fn set(&mut self, row: u32, col: u32, dx: f32, dy: f32) {
        assert!(dx.is_finite() && dy.is_finite(), "flow vectors must be finite");
        self.vectors[row as usize * self.width as usize + col as usize] = [dx, dy];
    }

    pub fn vectors(&self) -> &[[f32; 2]] {
        &self.vectors
    }

    pub fn to_flo_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.vectors.len() * 8);
        out.extend_from_slice(&FLO_TAG.to_le_bytes());
        out.extend_from_slice(&(self.width as i32).to_le_bytes());
        out.extend_from_slice(&(self.height as i32).to_le_bytes());
        for v in &self.vectors {
            out.extend_from_slice(&v[0].to_le_bytes());
            out.extend_from_slice(&v[1].to_le_bytes());
        }
        out
    }

    /// Parses `.flo` bytes. `origin` is used in error messages.
    pub fn from_flo_bytes(bytes: &[u8], origin: &str) -> Result<Self> {
        let err = |msg: String| Error::format(origin, msg);
        if bytes.len() < 12 {
            return Err(err(format!("file too short ({} bytes)", bytes.len())));
        }
        let word = |i: usize| <[u8; 4]>::try_from(&bytes[i..i + 4]).unwrap();
        let tag = f32::from_le_bytes(word(0));
        if tag != FLO_TAG {
            return Err(err(format!("bad magic tag {tag}, expected {FLO_TAG}")));
        }
        let width = i32::from_le_bytes(word(4));
        let height = i32::from_le_bytes(word(8));
        if width <= 0 || height <= 0 {
            return Err(err(format!("invalid dimensions {width}x{height}")));
        }
        let n = width as usize * height as usize;
        let expected = 12 + n * 8;
        if bytes.len() != expected {
            return Err(err(format!(
                "expected {expected} bytes for {width}x{height} flow, found {}",
                bytes.len()
            )));
        }
        let mut vectors = Vec::with_capacity(n);
        for (i, chunk) in bytes[12..].chunks_exact(8).enumerate() {
            let dx = f32::from_le_bytes(chunk[0..4].try_into().unwrap());
            let dy = f32::from_le_bytes(chunk[4..8].try_into().unwrap());
            if !dx.is_finite() || !dy.is_finite() {
                return Err(err(format!(
                    "non-finite flow at row {}, col {}",
                    i / width as usize,
                    i % width as usize
                )));
            }
            vectors.push([dx, dy]);
        }
        Ok(FlowField {
            height: height as u32,
            width: width as u32,
            vectors,
        })
    }

    pub fn read_flo(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        FlowField::from_flo_bytes(&bytes, &path.display().to_string())
    }

    pub fn write_flo(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_flo_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// File name for the flow mapping `frame` to `frame + 1`.
pub fn flo_file_name(frame: usize) -> String {
    format!("{frame:06}.flo")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flo_layout_is_bit_exact() {
        let mut f = FlowField::zeros(1, 2);
        f.set(0, 1, 1.5, -2.0);
        let bytes = f.to_flo_bytes();
        assert_eq!(&bytes[0..4], b"PIEH");
        assert_eq!(&bytes[4..8], &2i32.to_le_bytes());
        assert_eq!(&bytes[8..12], &1i32.to_le_bytes());
        assert_eq!(&bytes[20..24], &1.5f32.to_le_bytes());
        assert_eq!(&bytes[24..28], &(-2.0f32).to_le_bytes());
        assert_eq!(FlowField::from_flo_bytes(&bytes, "t").unwrap(), f);
    }

    #[test]
    fn rejects_bad_files() {
        let good = FlowField::uniform(2, 2, 0.5, 0.5).to_flo_bytes();

        let mut bad_tag = good.clone();
        bad_tag[0] = 0;
        assert!(FlowField::from_flo_bytes(&bad_tag, "t").is_err());

        assert!(FlowField::from_flo_bytes(&good[..good.len() - 1], "t").is_err());

        let mut nan = good.clone();
        nan[12..16].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(FlowField::from_flo_bytes(&nan, "t").is_err());

        let mut inf = good;
        inf[16..20].copy_from_slice(&f32::INFINITY.to_le_bytes());
        assert!(FlowField::from_flo_bytes(&inf, "t").is_err());
    }

    #[test]
    fn row_major_indexing() {
        let f = FlowField::from_vectors(2, 3, (0..6).map(|i| [i as f32, 0.0]).collect()).unwrap();
        assert_eq!(f.at(1, 0).0, 3.0);
        assert_eq!(f.at(0, 2).0, 2.0);
    }

    #[test]
    fn file_names() {
        assert_eq!(flo_file_name(7), "000007.flo");
    }
}
