//! Plain-text annotation files.
//!
//! ```text
//! dims: 320 240
//! # polygon | character polygons separated by ';' | orientation
//! 10,10,90,10,90,30,10,30|12,12,20,12,20,28,12,28;30,12,38,12,38,28|auto
//! 10,50,90,50,90,70,10,70||0.1
//! ```
//! Blank lines and lines starting with `#` are ignored. The orientation is
//! `auto` or an angle in radians.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::geometry::polygon::bounding_box;
use crate::geometry::{wrap_orientation, Point2};
use crate::labelgen::{AnnotationError, AnnotationSet, OrientationSource, RegionAnnotation};

#[derive(Debug, Error)]
pub enum AnnotationParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: AnnotationError,
    },
    #[error("missing 'dims: W H' header")]
    MissingHeader,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> AnnotationParseError {
    AnnotationParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_points(text: &str, line: usize, what: &str) -> Result<Vec<Point2>, AnnotationParseError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| syntax(line, format!("{what}: invalid number '{t}'")))
        })
        .collect::<Result<_, _>>()?;
    if !values.len().is_multiple_of(2) {
        return Err(syntax(line, format!("{what}: odd number of coordinates")));
    }
    Ok(values.chunks(2).map(|c| Point2::new(c[0], c[1])).collect())
}

fn parse_region(text: &str, line: usize) -> Result<RegionAnnotation, AnnotationParseError> {
    let fields: Vec<&str> = text.split('|').collect();
    if fields.len() != 3 {
        return Err(syntax(
            line,
            format!("expected 3 '|'-separated fields, found {}", fields.len()),
        ));
    }
    let polygon = parse_points(fields[0], line, "region polygon")?;
    let characters = if fields[1].trim().is_empty() {
        Vec::new()
    } else {
        fields[1]
            .split(';')
            .enumerate()
            .map(|(k, c)| parse_points(c, line, &format!("character {k}")))
            .collect::<Result<_, _>>()?
    };
    let o = fields[2].trim();
    let orientation = if o.eq_ignore_ascii_case("auto") {
        OrientationSource::Auto
    } else {
        let v: f64 = o
            .parse()
            .map_err(|_| syntax(line, format!("invalid orientation '{o}'")))?;
        OrientationSource::Explicit(
            wrap_orientation(v).map_err(|_| syntax(line, format!("invalid orientation '{o}'")))?,
        )
    };
    Ok(RegionAnnotation {
        polygon,
        characters,
        orientation,
    })
}

pub fn parse_annotation(text: &str) -> Result<AnnotationSet, AnnotationParseError> {
    let mut dims = None;
    let mut regions = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if dims.is_none() {
            let rest = t
                .strip_prefix("dims:")
                .ok_or_else(|| syntax(line, "expected 'dims: W H' header"))?;
            let parts: Vec<usize> = rest
                .split_whitespace()
                .map(|p| p.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| syntax(line, "dims must be two positive integers"))?;
            match parts[..] {
                [w, h] if w > 0 && h > 0 => dims = Some((w, h)),
                _ => return Err(syntax(line, "dims must be two positive integers")),
            }
            continue;
        }
        let (w, h) = dims.unwrap();
        let region = parse_region(t, line)?;
        AnnotationSet::new(w, h, vec![region.clone()])
            .map_err(|source| AnnotationParseError::Invalid { line, source })?;
        regions.push(region);
    }
    let (w, h) = dims.ok_or(AnnotationParseError::MissingHeader)?;
    Ok(AnnotationSet::new(w, h, regions).expect("regions validated one by one"))
}

pub fn read_annotation(path: &Path) -> Result<AnnotationSet, AnnotationParseError> {
    let text = fs::read_to_string(path).map_err(|source| AnnotationParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_annotation(&text)
}

fn push_points(out: &mut String, pts: &[Point2]) {
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{},{}", p.x, p.y).unwrap();
    }
}

/// Canonical text: regions ordered by the top-left corner of their
/// bounding box (row first), full-precision coordinates.
pub fn format_annotation(ann: &AnnotationSet) -> String {
    let mut order: Vec<usize> = (0..ann.regions().len()).collect();
    let key = |i: usize| {
        let (lo, _) = bounding_box(&ann.regions()[i].polygon);
        (lo.y, lo.x)
    };
    order.sort_by(|&a, &b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(a.cmp(&b))
    });
    let mut out = format!("dims: {} {}\n", ann.width(), ann.height());
    for i in order {
        let r = &ann.regions()[i];
        push_points(&mut out, &r.polygon);
        out.push('|');
        for (k, c) in r.characters.iter().enumerate() {
            if k > 0 {
                out.push(';');
            }
            push_points(&mut out, c);
        }
        out.push('|');
        match r.orientation {
            OrientationSource::Auto => out.push_str("auto"),
            OrientationSource::Explicit(o) => write!(out, "{}", o.radians()).unwrap(),
        }
        out.push('\n');
    }
    out
}

pub fn write_annotation(ann: &AnnotationSet, path: &Path) -> Result<(), AnnotationParseError> {
    fs::write(path, format_annotation(ann)).map_err(|source| AnnotationParseError::Io {
        path: path.display().to_string(),
        source,
    })
}
