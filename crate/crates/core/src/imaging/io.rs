use std::path::Path;

use image::{DynamicImage, ExtendedColorType, ImageFormat};

use super::{quantize, Image};
use crate::error::{Error, Result};

impl Image {
    /// Decodes PNG or JPEG. Gray sources stay single-channel, everything
    /// else becomes RGB; alpha is dropped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let decoded = image::open(path.as_ref())?;
        Self::from_dynamic(decoded)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        Self::from_dynamic(image::load_from_memory(bytes)?)
    }

    fn from_dynamic(img: DynamicImage) -> Result<Self> {
        let (w, h) = (img.width() as usize, img.height() as usize);
        match img {
            DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) => {
                Self::from_u8(w, h, 1, img.to_luma8().as_raw())
            }
            DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) => {
                Self::from_u8(w, h, 1, img.to_luma8().as_raw())
            }
            other => Self::from_u8(w, h, 3, other.to_rgb8().as_raw()),
        }
    }

    /// 8-bit PNG, `round(v * 255)` per sample.
    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let color = match self.channels {
            1 => ExtendedColorType::L8,
            _ => ExtendedColorType::Rgb8,
        };
        let mut buf = Vec::new();
        image::write_buffer_with_format(
            &mut std::io::Cursor::new(&mut buf),
            &self.data.iter().map(|&v| quantize(v)).collect::<Vec<_>>(),
            u32::try_from(self.width).map_err(|_| Error::input("image too wide"))?,
            u32::try_from(self.height).map_err(|_| Error::input("image too tall"))?,
            color,
            ImageFormat::Png,
        )?;
        Ok(buf)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.encode_png()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_is_exact_on_8bit_grid() {
        let img = Image::from_fn(7, 5, 3, |x, y, c| ((x * 31 + y * 17 + c * 5) % 256) as f32 / 255.0).unwrap();
        let back = Image::decode(&img.encode_png().unwrap()).unwrap();
        assert_eq!(back.channels(), 3);
        assert_eq!(back.to_u8(), img.to_u8());

        let gray = Image::from_fn(4, 4, 1, |x, y, _| (x + 4 * y) as f32 / 15.0).unwrap();
        let back = Image::decode(&gray.encode_png().unwrap()).unwrap();
        assert_eq!(back.channels(), 1);
        assert_eq!(back.to_u8(), gray.to_u8());
    }

    #[test]
    fn garbage_bytes_are_an_error() {
        assert!(Image::decode(b"definitely not a png").is_err());
    }
}
