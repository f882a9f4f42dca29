//! File formats: point clouds as XYZ text or binary PLY, images as PGM.

use std::io::{self, BufRead, Read, Write};

use thiserror::Error;

use crate::csg::PointCloud;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("malformed {format}: {message}")]
    Malformed {
        format: &'static str,
        message: String,
    },
}

fn malformed(format: &'static str, message: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        format,
        message: message.into(),
    }
}

pub fn write_xyz(w: &mut impl Write, cloud: &PointCloud) -> io::Result<()> {
    for p in &cloud.points {
        writeln!(w, "{} {} {}", p[0], p[1], p[2])?;
    }
    Ok(())
}

pub fn read_xyz(r: impl BufRead) -> Result<PointCloud, FormatError> {
    let mut points = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| malformed("xyz", format!("line {}: {e}", i + 1)))?;
        if vals.len() != 3 {
            return Err(malformed(
                "xyz",
                format!("line {}: expected 3 values", i + 1),
            ));
        }
        points.push([vals[0], vals[1], vals[2]]);
    }
    Ok(PointCloud::raw(points))
}

/// Binary little-endian PLY with double-precision vertices.
pub fn write_ply(w: &mut impl Write, cloud: &PointCloud) -> io::Result<()> {
    write!(
        w,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        cloud.points.len()
    )?;
    for p in &cloud.points {
        for c in p {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads what [`write_ply`] writes (float or double vertex properties).
pub fn read_ply(mut r: impl BufRead) -> Result<PointCloud, FormatError> {
    let mut count = None;
    let mut props: Vec<usize> = Vec::new();
    let mut line = String::new();
    let mut first = true;
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(malformed("ply", "missing end_header"));
        }
        let t = line.trim_end();
        if first {
            if t != "ply" {
                return Err(malformed("ply", "missing magic"));
            }
            first = false;
            continue;
        }
        let words: Vec<&str> = t.split_whitespace().collect();
        match words.as_slice() {
            ["format", fmt, _] if *fmt != "binary_little_endian" => {
                return Err(malformed("ply", format!("unsupported format {fmt}")));
            }
            ["element", "vertex", n] => {
                count = Some(
                    n.parse::<usize>()
                        .map_err(|e| malformed("ply", e.to_string()))?,
                );
            }
            ["property", ty, _] => props.push(match *ty {
                "double" | "float64" => 8,
                "float" | "float32" => 4,
                other => {
                    return Err(malformed(
                        "ply",
                        format!("unsupported property type {other}"),
                    ))
                }
            }),
            ["end_header"] => break,
            _ => {}
        }
    }
    let count = count.ok_or_else(|| malformed("ply", "no vertex element"))?;
    if props.len() < 3 {
        return Err(malformed("ply", "vertex needs x, y, z"));
    }
    let stride: usize = props.iter().sum();
    let mut buf = vec![0u8; stride];
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        let mut p = [0.0; 3];
        let mut off = 0;
        for (k, size) in props.iter().enumerate().take(3) {
            p[k] = if *size == 8 {
                f64::from_le_bytes(buf[off..off + 8].try_into().expect("8 bytes"))
            } else {
                f64::from(f32::from_le_bytes(
                    buf[off..off + 4].try_into().expect("4 bytes"),
                ))
            };
            off += size;
        }
        points.push(p);
    }
    Ok(PointCloud::raw(points))
}

/// Grayscale image as stored in a binary PGM.
#[derive(Debug, Clone, PartialEq)]
pub struct Pgm {
    pub width: u32,
    pub height: u32,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

pub fn write_pgm8(w: &mut impl Write, width: u32, height: u32, pixels: &[u8]) -> io::Result<()> {
    write!(w, "P5\n{width} {height}\n255\n")?;
    w.write_all(pixels)
}

/// 16-bit PGM; samples are big-endian as the format requires.
pub fn write_pgm16(w: &mut impl Write, width: u32, height: u32, pixels: &[u16]) -> io::Result<()> {
    write!(w, "P5\n{width} {height}\n65535\n")?;
    for p in pixels {
        w.write_all(&p.to_be_bytes())?;
    }
    Ok(())
}

pub fn read_pgm(mut r: impl Read) -> Result<Pgm, FormatError> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let mut pos = 0;
    let mut fields = Vec::new();
    while fields.len() < 4 {
        while pos < data.len() && (data[pos].is_ascii_whitespace() || data[pos] == b'#') {
            if data[pos] == b'#' {
                while pos < data.len() && data[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(malformed("pgm", "truncated header"));
        }
        fields.push(String::from_utf8_lossy(&data[start..pos]).into_owned());
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    if fields[0] != "P5" {
        return Err(malformed("pgm", "not a binary PGM"));
    }
    let num = |s: &str| {
        s.parse::<u32>()
            .map_err(|e| malformed("pgm", e.to_string()))
    };
    let (width, height, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval == 0 || maxval > 65535 {
        return Err(malformed("pgm", "bad maxval"));
    }
    let n = (width * height) as usize;
    let bytes = if maxval < 256 { 1 } else { 2 };
    let body = data
        .get(pos..pos + n * bytes)
        .ok_or_else(|| malformed("pgm", "truncated raster"))?;
    let pixels = if bytes == 1 {
        body.iter().map(|b| u16::from(*b)).collect()
    } else {
        body.chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    Ok(Pgm {
        width,
        height,
        maxval: maxval as u16,
        pixels,
    })
}
