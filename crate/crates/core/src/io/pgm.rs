use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{DataMatrix, FrameShape};

/// A decoded 8-bit grayscale image, pixels in raster order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub shape: FrameShape,
    pub pixels: Vec<u8>,
}

/// Where a data matrix loaded from a frame directory came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameStackManifest {
    pub directory: PathBuf,
    /// File names in column order (lexicographic).
    pub files: Vec<String>,
    pub frame_shape: FrameShape,
    pub bit_depth: u8,
}

/// Pulls whitespace-separated header tokens, skipping `#` comments.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn token(&mut self) -> Option<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.bytes.get(self.pos) == Some(&b'#') {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> std::result::Result<usize, String> {
        let tok = self.token().ok_or_else(|| format!("header ends before {what}"))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("bad {what} {:?}", String::from_utf8_lossy(tok)))
    }
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let mut h = Header { bytes, pos: 0 };
    match h.token() {
        Some(b"P5") => {}
        Some(m) => {
            return Err(format!(
                "expected binary PGM magic P5, found {:?}",
                String::from_utf8_lossy(m)
            ))
        }
        None => return Err("empty file".into()),
    }
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval != 255 {
        return Err(format!("maxval must be 255, found {maxval}"));
    }
    if width == 0 || height == 0 {
        return Err(format!("degenerate size {width}x{height}"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    let start = h.pos + 1;
    let len = width * height;
    let raster = bytes
        .get(start..)
        .filter(|r| r.len() >= len)
        .ok_or_else(|| format!("raster holds fewer than {len} bytes"))?;
    if raster.len() > len {
        return Err(format!("{} trailing bytes after the raster", raster.len() - len));
    }
    Ok(GrayImage {
        shape: FrameShape::new(height, width),
        pixels: raster.to_vec(),
    })
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes).map_err(|m| Error::format(path, m))
}

/// Canonical encoding: `P5\n<w> <h>\n255\n` followed by the raster.
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.shape.width, image.shape.height).into_bytes();
    out.extend_from_slice(&image.pixels);
    out
}

pub fn write_pgm(path: &Path, image: &GrayImage) -> Result<()> {
    fs::write(path, encode_pgm(image)).map_err(|e| Error::io(path, e))
}

/// Stack every `.pgm` file in `dir` as a column, in lexicographic file-name
/// order.
pub fn load_frame_stack(dir: &Path) -> Result<(DataMatrix, FrameStackManifest)> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let is_pgm = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
        if is_pgm && path.is_file() {
            files.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::format(dir, "no .pgm frames found"));
    }

    let first = read_pgm(&dir.join(&files[0]))?;
    let shape = first.shape;
    let mut x = DMatrix::zeros(shape.pixels(), files.len());
    for (j, name) in files.iter().enumerate() {
        let path = dir.join(name);
        let img = if j == 0 { first.clone() } else { read_pgm(&path)? };
        if img.shape != shape {
            return Err(Error::format(
                &path,
                format!(
                    "frame is {}x{}, expected {}x{} like {}",
                    img.shape.width, img.shape.height, shape.width, shape.height, files[0]
                ),
            ));
        }
        for (i, &p) in img.pixels.iter().enumerate() {
            x[(i, j)] = f64::from(p);
        }
    }
    let data = DataMatrix::new(x)?.with_frame_shape(shape)?;
    let manifest = FrameStackManifest {
        directory: dir.to_path_buf(),
        files,
        frame_shape: shape,
        bit_depth: 8,
    };
    Ok((data, manifest))
}

/// Turn one column into an image. Values are rounded and clamped to 0..=255.
pub fn column_to_image(column: &[f64], shape: FrameShape) -> Result<GrayImage> {
    if column.len() != shape.pixels() {
        return Err(Error::InvalidInput(format!(
            "column has {} entries, frame {}x{} needs {}",
            column.len(),
            shape.height,
            shape.width,
            shape.pixels()
        )));
    }
    Ok(GrayImage {
        shape,
        pixels: column.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect(),
    })
}

/// Write each column of `m` as `<prefix><j>.pgm`, with `j` zero-padded so the
/// files sort in column order. Returns the file names.
pub fn export_frames(m: &DMatrix<f64>, shape: FrameShape, dir: &Path, prefix: &str) -> Result<Vec<String>> {
    let width = m.ncols().saturating_sub(1).max(1).to_string().len().max(4);
    let mut names = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let col: Vec<f64> = m.column(j).iter().copied().collect();
        let name = format!("{prefix}{j:0width$}.pgm");
        write_pgm(&dir.join(&name), &column_to_image(&col, shape)?)?;
        names.push(name);
    }
    Ok(names)
}
