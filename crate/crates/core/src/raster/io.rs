//! Image and label-sidecar I/O.
//!
//! Binary images are stored as 8-bit grayscale with values {0, 255}, either as
//! PNG or as plain-text PGM (`P2`, maxval 255). The format is chosen by file
//! extension; anything not ending in `.pgm` is treated as PNG.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use image::{ColorType, ImageReader};

use super::{BinaryImage, LabelPair};
use crate::{Error, Result};

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedImage {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn parse_pgm(path: &Path, text: &str) -> Result<(usize, usize, Vec<u8>)> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    if tokens.next() != Some("P2") {
        return Err(malformed(path, "expected plain PGM magic P2"));
    }
    let mut number = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| malformed(path, format!("missing {what}")))?
            .parse::<usize>()
            .map_err(|_| malformed(path, format!("bad {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval != 255 {
        return Err(malformed(path, format!("maxval must be 255, got {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(malformed(path, "zero dimension"));
    }
    let mut values = Vec::with_capacity(width * height);
    for _ in 0..width * height {
        let v = number("pixel")?;
        if v > 255 {
            return Err(malformed(path, format!("pixel value {v} exceeds maxval")));
        }
        values.push(v as u8);
    }
    Ok((width, height, values))
}

/// Loads an 8-bit grayscale raster. Color PNGs are converted to luma.
pub(crate) fn load_gray_raw(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    if is_pgm(path) {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        return parse_pgm(path, &text);
    }
    let img = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| malformed(path, e.to_string()))?;
    let gray = img.to_luma8();
    Ok((gray.width() as usize, gray.height() as usize, gray.into_raw()))
}

pub(crate) fn save_gray_raw(path: &Path, width: usize, height: usize, values: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    if is_pgm(path) {
        let mut out = format!("P2\n{width} {height}\n255\n");
        for row in values.chunks(width) {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        return fs::write(path, out).map_err(|e| Error::io(path, e));
    }
    image::save_buffer(path, values, width as u32, height as u32, ColorType::L8)
        .map_err(|e| malformed(path, e.to_string()))
}

/// Loads a binary image; any value other than 0 or 255 is rejected.
pub fn load_image(path: impl AsRef<Path>) -> Result<BinaryImage> {
    let path = path.as_ref();
    let (width, height, values) = if is_pgm(path) {
        load_gray_raw(path)?
    } else {
        let img = ImageReader::open(path)
            .map_err(|e| Error::io(path, e))?
            .decode()
            .map_err(|e| malformed(path, e.to_string()))?;
        if img.color() != ColorType::L8 {
            return Err(malformed(
                path,
                format!("expected 8-bit grayscale, found {:?}", img.color()),
            ));
        }
        let gray = img.into_luma8();
        (gray.width() as usize, gray.height() as usize, gray.into_raw())
    };
    let mut bits = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        match v {
            0 => bits.push(false),
            255 => bits.push(true),
            value => {
                return Err(Error::NonBinary {
                    x: (i % width) as u32,
                    y: (i / width) as u32,
                    value,
                })
            }
        }
    }
    BinaryImage::new(width, height, bits)
}

pub fn save_image(img: &BinaryImage, path: impl AsRef<Path>) -> Result<()> {
    let values: Vec<u8> = img.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    save_gray_raw(path.as_ref(), img.width(), img.height(), &values)
}

/// Writes `id,beta0,beta1` rows under a header line.
pub fn write_label_csv<'a>(
    path: impl AsRef<Path>,
    rows: impl IntoIterator<Item = (&'a str, LabelPair)>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("id,beta0,beta1\n");
    for (id, l) in rows {
        let _ = writeln!(out, "{id},{},{}", l.beta0, l.beta1);
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_label_csv(path: impl AsRef<Path>) -> Result<Vec<(String, LabelPair)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("id,beta0,beta1") {
        return Err(Error::Parse(format!("{}: expected header id,beta0,beta1", path.display())));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::Parse(format!("{}: bad label row {line:?}", path.display()));
            if f.len() != 3 {
                return Err(bad());
            }
            let b0 = f[1].trim().parse().map_err(|_| bad())?;
            let b1 = f[2].trim().parse().map_err(|_| bad())?;
            Ok((f[0].to_string(), LabelPair::new(b0, b1)))
        })
        .collect()
}
