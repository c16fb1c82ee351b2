//! Single-channel float rasters and binary masks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which of the three detection channels a raster carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Region,
    Character,
    Orientation,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Region, Channel::Character, Channel::Orientation];

    pub fn tag(self) -> u16 {
        match self {
            Channel::Region => 0,
            Channel::Character => 1,
            Channel::Orientation => 2,
        }
    }

    pub fn from_tag(tag: u16) -> Option<Channel> {
        match tag {
            0 => Some(Channel::Region),
            1 => Some(Channel::Character),
            2 => Some(Channel::Orientation),
            _ => None,
        }
    }

    /// Conventional file stem used by the CLI.
    pub fn file_stem(self) -> &'static str {
        match self {
            Channel::Region => "region",
            Channel::Character => "character",
            Channel::Orientation => "orientation",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RasterError {
    #[error("raster dimensions must be positive, got {width}x{height}")]
    EmptyDims { width: usize, height: usize },
    #[error("expected {expected} values for the raster, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("value {value} at index {index} outside [0, 1]")]
    OutOfRange { index: usize, value: f32 },
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimMismatch(usize, usize, usize, usize),
}

/// Row-major float image with values in `[0, 1]`, top-left origin.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMap {
    width: usize,
    height: usize,
    channel: Channel,
    data: Vec<f32>,
}

impl RasterMap {
    pub fn zeros(width: usize, height: usize, channel: Channel) -> Self {
        Self::filled(width, height, channel, 0.0)
    }

    pub fn filled(width: usize, height: usize, channel: Channel, value: f32) -> Self {
        assert!((0.0..=1.0).contains(&value), "raster value outside [0, 1]");
        Self {
            width,
            height,
            channel,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(
        width: usize,
        height: usize,
        channel: Channel,
        data: Vec<f32>,
    ) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyDims { width, height });
        }
        if data.len() != width * height {
            return Err(RasterError::LengthMismatch {
                expected: width * height,
                actual: data.len(),
            });
        }
        if let Some((index, &value)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(RasterError::OutOfRange { index, value });
        }
        Ok(Self {
            width,
            height,
            channel,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// Stores `value` clamped into `[0, 1]`.
    pub fn set(&mut self, x: usize, y: usize, value: f32) {
        self.data[y * self.width + x] = value.clamp(0.0, 1.0);
    }

    pub fn same_dims(&self, other: &RasterMap) -> Result<(), RasterError> {
        if self.width != other.width || self.height != other.height {
            return Err(RasterError::DimMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    /// Pixels with value `>= threshold`.
    pub fn threshold(&self, threshold: f32) -> Mask {
        Mask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| v >= threshold).collect(),
        }
    }

    /// Area-weighted resampling to `new_width x new_height`.
    pub fn resized(&self, new_width: usize, new_height: usize) -> RasterMap {
        if new_width == self.width && new_height == self.height {
            return self.clone();
        }
        let sx = self.width as f64 / new_width as f64;
        let sy = self.height as f64 / new_height as f64;
        let mut out = RasterMap::zeros(new_width, new_height, self.channel);
        for oy in 0..new_height {
            let (y0, y1) = (oy as f64 * sy, (oy + 1) as f64 * sy);
            for ox in 0..new_width {
                let (x0, x1) = (ox as f64 * sx, (ox + 1) as f64 * sx);
                let (mut acc, mut wsum) = (0.0f64, 0.0f64);
                for y in y0.floor() as usize..(y1.ceil() as usize).min(self.height) {
                    let wy = (y1.min((y + 1) as f64) - y0.max(y as f64)).max(0.0);
                    for x in x0.floor() as usize..(x1.ceil() as usize).min(self.width) {
                        let wx = (x1.min((x + 1) as f64) - x0.max(x as f64)).max(0.0);
                        acc += wx * wy * self.get(x, y) as f64;
                        wsum += wx * wy;
                    }
                }
                let v = if wsum > 0.0 { acc / wsum } else { 0.0 };
                out.set(ox, oy, v as f32);
            }
        }
        out
    }
}

/// The three detection channels of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSet {
    pub region: RasterMap,
    pub character: RasterMap,
    pub orientation: RasterMap,
}

impl MapSet {
    /// Checks that all channels share dimensions.
    pub fn new(
        region: RasterMap,
        character: RasterMap,
        orientation: RasterMap,
    ) -> Result<Self, RasterError> {
        region.same_dims(&character)?;
        region.same_dims(&orientation)?;
        Ok(Self {
            region,
            character,
            orientation,
        })
    }

    pub fn width(&self) -> usize {
        self.region.width()
    }

    pub fn height(&self) -> usize {
        self.region.height()
    }

    pub fn get(&self, channel: Channel) -> &RasterMap {
        match channel {
            Channel::Region => &self.region,
            Channel::Character => &self.character,
            Channel::Orientation => &self.orientation,
        }
    }

    pub fn resized(&self, width: usize, height: usize) -> MapSet {
        MapSet {
            region: self.region.resized(width, height),
            character: self.character.resized(width, height),
            orientation: self.orientation.resized(width, height),
        }
    }
}

/// Binary raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn to_raster(&self, channel: Channel) -> RasterMap {
        RasterMap {
            width: self.width,
            height: self.height,
            channel,
            data: self
                .data
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    /// Chebyshev dilation by `radius` pixels.
    pub fn dilated(&self, radius: usize) -> Mask {
        let mut out = Mask::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                if !self.get(x, y) {
                    continue;
                }
                for yy in y.saturating_sub(radius)..(y + radius + 1).min(self.height) {
                    for xx in x.saturating_sub(radius)..(x + radius + 1).min(self.width) {
                        out.set(xx, yy, true);
                    }
                }
            }
        }
        out
    }
}
