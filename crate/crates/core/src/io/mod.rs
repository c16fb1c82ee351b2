//! File formats: raw float rasters, annotations, detection lists and the
//! flat key=value configuration.

pub mod annotation;
pub mod config;
pub mod detections;
pub mod tmap;

pub use annotation::{parse_annotation, read_annotation, write_annotation, AnnotationParseError};
pub use config::{Config, ConfigError};
pub use detections::{DetectionFile, DetectionRecord};
pub use tmap::{decode_tmap, encode_tmap, read_tmap, write_tmap, TmapError};
