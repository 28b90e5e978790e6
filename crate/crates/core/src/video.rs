//! In-memory video clips: `K×H×W×3`, floating point in `[−1, 1]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VideoError {
    #[error("video shape mismatch: {0}")]
    Shape(String),
    #[error("a video needs at least one frame")]
    Empty,
}

/// 8-bit RGB image, row-major, 3 bytes per pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl Image {
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let n = (width * height) as usize;
        let mut data = Vec::with_capacity(3 * n);
        for _ in 0..n {
            data.extend_from_slice(&rgb);
        }
        Self { width, height, data }
    }

    pub fn pixel(&self, u: u32, v: u32) -> [u8; 3] {
        let i = 3 * (v * self.width + u) as usize;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, u: u32, v: u32, rgb: [u8; 3]) {
        let i = 3 * (v * self.width + u) as usize;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VideoTensor<T = f64> {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub fps: f64,
    /// `frames·height·width·3` values, frame-major then row-major.
    pub data: Vec<T>,
}

pub fn u8_to_unit<T: Real>(v: u8) -> T {
    T::lit(f64::from(v) / 127.5 - 1.0)
}

pub fn unit_to_u8<T: Real>(x: T) -> u8 {
    ((x.as_f64() + 1.0) * 127.5).round().clamp(0.0, 255.0) as u8
}

impl<T: Real> VideoTensor<T> {
    pub fn zeros(frames: usize, height: usize, width: usize, fps: f64) -> Self {
        Self { frames, height, width, fps, data: vec![T::zero(); frames * height * width * 3] }
    }

    pub fn from_data(frames: usize, height: usize, width: usize, fps: f64, data: Vec<T>) -> Result<Self, VideoError> {
        if frames == 0 {
            return Err(VideoError::Empty);
        }
        if data.len() != frames * height * width * 3 {
            return Err(VideoError::Shape(format!("{} values for {frames}×{height}×{width}×3", data.len())));
        }
        Ok(Self { frames, height, width, fps, data })
    }

    pub fn from_images(images: &[Image], fps: f64) -> Result<Self, VideoError> {
        let first = images.first().ok_or(VideoError::Empty)?;
        let (w, h) = (first.width, first.height);
        let mut data = Vec::with_capacity(images.len() * first.data.len());
        for img in images {
            if img.width != w || img.height != h {
                return Err(VideoError::Shape(format!("frame is {}×{}, expected {w}×{h}", img.width, img.height)));
            }
            data.extend(img.data.iter().map(|&b| u8_to_unit::<T>(b)));
        }
        Ok(Self { frames: images.len(), height: h as usize, width: w as usize, fps, data })
    }

    pub fn to_images(&self) -> Vec<Image> {
        (0..self.frames)
            .map(|k| Image {
                width: self.width as u32,
                height: self.height as u32,
                data: self.frame(k).iter().map(|&x| unit_to_u8(x)).collect(),
            })
            .collect()
    }

    pub fn frame_len(&self) -> usize {
        self.height * self.width * 3
    }

    pub fn frame(&self, k: usize) -> &[T] {
        let n = self.frame_len();
        &self.data[k * n..(k + 1) * n]
    }

    pub fn frame_mut(&mut self, k: usize) -> &mut [T] {
        let n = self.frame_len();
        &mut self.data[k * n..(k + 1) * n]
    }

    #[inline]
    pub fn index(&self, k: usize, y: usize, x: usize, c: usize) -> usize {
        ((k * self.height + y) * self.width + x) * 3 + c
    }

    pub fn at(&self, k: usize, y: usize, x: usize, c: usize) -> T {
        self.data[self.index(k, y, x, c)]
    }

    pub fn set(&mut self, k: usize, y: usize, x: usize, c: usize, v: T) {
        let i = self.index(k, y, x, c);
        self.data[i] = v;
    }

    pub fn same_shape(&self, o: &Self) -> bool {
        self.frames == o.frames && self.height == o.height && self.width == o.width
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.frames, self.height, self.width, 3]
    }

    pub fn cast<U: Real>(&self) -> VideoTensor<U> {
        VideoTensor {
            frames: self.frames,
            height: self.height,
            width: self.width,
            fps: self.fps,
            data: self.data.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u8_round_trip() {
        for b in 0..=255u8 {
            assert_eq!(unit_to_u8(u8_to_unit::<f64>(b)), b);
            assert_eq!(unit_to_u8(u8_to_unit::<f32>(b)), b);
        }
        assert_eq!(u8_to_unit::<f64>(0), -1.0);
        assert_eq!(u8_to_unit::<f64>(255), 1.0);
    }

    #[test]
    fn images_round_trip_and_layout() {
        let mut a = Image::filled(4, 3, [10, 20, 30]);
        a.set(3, 2, [255, 0, 128]);
        let b = Image::filled(4, 3, [0, 0, 0]);
        let v: VideoTensor = VideoTensor::from_images(&[a.clone(), b.clone()], 8.0).unwrap();
        assert_eq!(v.shape(), [2, 3, 4, 3]);
        assert_eq!(v.at(0, 2, 3, 0), 1.0);
        assert_eq!(v.to_images(), vec![a, b]);
        assert!(
            VideoTensor::<f64>::from_images(&[Image::filled(4, 3, [0; 3]), Image::filled(3, 3, [0; 3])], 8.0).is_err()
        );
        assert!(VideoTensor::<f64>::from_images(&[], 8.0).is_err());
        assert!(VideoTensor::<f64>::from_data(1, 2, 2, 8.0, vec![0.0; 11]).is_err());
    }
}
