//! Float RGBA images and their PNG / raw encodings.

use std::io::{self, Write};

use super::params::Rgb;
use super::RenderError;

/// Row-major RGBA image with straight `f32` channels in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbaImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<[f32; 4]>,
}

/// Magic prefix of raw float dumps.
pub const RAW_MAGIC: &[u8; 8] = b"HXLRAW01";

impl RgbaImage {
    pub fn new(width: u32, height: u32, fill: Rgb) -> RgbaImage {
        let px = [fill[0] as f32, fill[1] as f32, fill[2] as f32, 1.0];
        RgbaImage {
            width,
            height,
            pixels: vec![px; (width * height) as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> [f32; 4] {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, px: [f32; 4]) {
        self.pixels[(y * self.width + x) as usize] = px;
    }

    /// 8-bit RGBA bytes, rounding each clamped channel.
    pub fn to_rgba8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .flat_map(|p| p.map(|c| (c.clamp(0.0, 1.0) * 255.0).round() as u8))
            .collect()
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, RenderError> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width, self.height);
            enc.set_color(png::ColorType::Rgba);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header()?;
            writer.write_image_data(&self.to_rgba8())?;
        }
        Ok(out)
    }

    pub fn decode_png(bytes: &[u8]) -> Result<RgbaImage, RenderError> {
        let decoder = png::Decoder::new(io::Cursor::new(bytes));
        let mut reader = decoder.read_info()?;
        let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
        let info = reader.next_frame(&mut buf)?;
        if info.color_type != png::ColorType::Rgba || info.bit_depth != png::BitDepth::Eight {
            return Err(RenderError::InvalidParam("expected 8-bit RGBA PNG".into()));
        }
        let pixels = buf[..info.buffer_size()]
            .chunks_exact(4)
            .map(|c| [0, 1, 2, 3].map(|k| c[k] as f32 / 255.0))
            .collect();
        Ok(RgbaImage {
            width: info.width,
            height: info.height,
            pixels,
        })
    }

    /// Raw dump: magic, width and height as little-endian `u32`, then the
    /// RGBA channels as little-endian `f32`.
    pub fn write_raw<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(RAW_MAGIC)?;
        out.write_all(&self.width.to_le_bytes())?;
        out.write_all(&self.height.to_le_bytes())?;
        for p in &self.pixels {
            for c in p {
                out.write_all(&c.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_raw(bytes: &[u8]) -> Option<RgbaImage> {
        let rest = bytes.strip_prefix(RAW_MAGIC)?;
        let width = u32::from_le_bytes(rest.get(0..4)?.try_into().ok()?);
        let height = u32::from_le_bytes(rest.get(4..8)?.try_into().ok()?);
        let data = &rest[8..];
        if data.len() != width as usize * height as usize * 16 {
            return None;
        }
        let floats: Vec<f32> = data
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        Some(RgbaImage {
            width,
            height,
            pixels: floats.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip() {
        let mut img = RgbaImage::new(3, 2, [0.0, 0.5, 1.0]);
        img.set(2, 1, [1.0, 0.0, 0.0, 1.0]);
        let back = RgbaImage::decode_png(&img.encode_png().unwrap()).unwrap();
        assert_eq!(back.to_rgba8(), img.to_rgba8());
        assert_eq!(back.get(1, 0)[1], 128.0 / 255.0);
    }

    #[test]
    fn raw_round_trip() {
        let img = RgbaImage::new(2, 2, [0.25, 0.5, 0.75]);
        let mut buf = Vec::new();
        img.write_raw(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 4 * 16);
        assert_eq!(RgbaImage::read_raw(&buf).unwrap(), img);
        assert!(RgbaImage::read_raw(&buf[..20]).is_none());
    }
}
