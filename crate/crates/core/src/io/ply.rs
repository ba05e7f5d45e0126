//! Binary PLY point clouds. Header written by this module:
//!
//! ```text
//! ply
//! format binary_little_endian 1.0
//! comment session_stamp <seconds>        (only when the cloud has one)
//! element vertex <N>
//! property float x
//! property float y
//! property float z
//! property float intensity
//! property uchar red                     (colored view only)
//! property uchar green                   (colored view only)
//! property uchar blue                    (colored view only)
//! end_header
//! ```
//!
//! Each line ends in `\n`. Intensity is the temperature in °C, NaN for points
//! without one. Positions are stored in single precision.

use std::path::Path;

use super::colormap::rainbow;
use super::{read_bytes, write_atomic};
use crate::cloud::{ThermalPoint, ThermalPointCloud};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

const STAMP_COMMENT: &str = "comment session_stamp ";

fn header(cloud: &ThermalPointCloud, colored: bool) -> String {
    let mut h = String::from("ply\nformat binary_little_endian 1.0\n");
    if let Some(s) = cloud.session_stamp {
        h.push_str(&format!("{STAMP_COMMENT}{s}\n"));
    }
    h.push_str(&format!(
        "element vertex {}\nproperty float x\nproperty float y\nproperty float z\nproperty float intensity\n",
        cloud.len()
    ));
    if colored {
        h.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    h.push_str("end_header\n");
    h
}

fn encode(cloud: &ThermalPointCloud, colors: Option<(f64, f64)>) -> Result<Vec<u8>> {
    if cloud.is_empty() {
        return Err(Error::InvalidArgument("refusing to write an empty point cloud".into()));
    }
    if let Some((lo, hi)) = colors {
        if !(lo < hi) {
            return Err(Error::InvalidArgument(format!("t_min {lo} must be below t_max {hi}")));
        }
    }
    let stride = if colors.is_some() { 19 } else { 16 };
    let mut out = header(cloud, colors.is_some()).into_bytes();
    out.reserve(cloud.len() * stride);
    for p in &cloud.points {
        let t = p.temperature.unwrap_or(f64::NAN);
        for v in [p.position.x, p.position.y, p.position.z, t] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        if let Some((lo, hi)) = colors {
            // Colored from the stored value so a reloaded cloud recolors identically.
            out.extend_from_slice(&rainbow(t as f32 as f64, lo, hi));
        }
    }
    Ok(out)
}

pub fn write_ply(cloud: &ThermalPointCloud) -> Result<Vec<u8>> {
    encode(cloud, None)
}

pub fn write_colored_ply(cloud: &ThermalPointCloud, t_min: f64, t_max: f64) -> Result<Vec<u8>> {
    encode(cloud, Some((t_min, t_max)))
}

/// Fails without touching the file system when the cloud is empty.
pub fn export_ply(cloud: &ThermalPointCloud, path: &Path) -> Result<()> {
    write_atomic(path, &write_ply(cloud)?)
}

pub fn export_colored_view(cloud: &ThermalPointCloud, path: &Path, t_min: f64, t_max: f64) -> Result<()> {
    write_atomic(path, &write_colored_ply(cloud, t_min, t_max)?)
}

pub fn load_ply(path: &Path) -> Result<ThermalPointCloud> {
    read_ply(&read_bytes(path)?).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            file: path.display().to_string(),
            line,
            message,
        },
        other => other,
    })
}

/// Reads clouds in either layout written by this module. Colors are ignored.
pub fn read_ply(bytes: &[u8]) -> Result<ThermalPointCloud> {
    let file = "<ply>";
    let mut pos = 0;
    let mut lines = Vec::new();
    loop {
        let Some(end) = bytes[pos..].iter().position(|&b| b == b'\n') else {
            return Err(Error::parse(file, lines.len() + 1, "header is not terminated"));
        };
        let line = std::str::from_utf8(&bytes[pos..pos + end])
            .map_err(|_| Error::parse(file, lines.len() + 1, "header is not valid UTF-8"))?;
        pos += end + 1;
        lines.push(line);
        if line == "end_header" {
            break;
        }
        if lines.len() > 64 {
            return Err(Error::parse(file, lines.len(), "header too long"));
        }
    }
    let mut it = lines.iter().enumerate().map(|(i, l)| (i + 1, *l));
    let mut expect = |want: &str| -> Result<()> {
        match it.next() {
            Some((_, l)) if l == want => Ok(()),
            Some((n, l)) => Err(Error::parse(file, n, format!("expected `{want}`, got `{l}`"))),
            None => Err(Error::parse(file, 0, format!("missing `{want}`"))),
        }
    };
    expect("ply")?;
    expect("format binary_little_endian 1.0")?;
    let mut rest: Vec<(usize, &str)> = lines.iter().enumerate().skip(2).map(|(i, l)| (i + 1, *l)).collect();
    let mut session_stamp = None;
    if let Some(&(n, l)) = rest.first() {
        if let Some(v) = l.strip_prefix(STAMP_COMMENT) {
            let s: f64 = v
                .parse()
                .ok()
                .filter(|s: &f64| s.is_finite())
                .ok_or_else(|| Error::parse(file, n, format!("bad session stamp `{v}`")))?;
            session_stamp = Some(s);
            rest.remove(0);
        }
    }
    let Some(&(n, l)) = rest.first() else {
        return Err(Error::parse(file, 0, "missing vertex element"));
    };
    let count: usize = l
        .strip_prefix("element vertex ")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| Error::parse(file, n, format!("expected `element vertex <N>`, got `{l}`")))?;
    let props: Vec<&str> = rest[1..].iter().map(|(_, l)| *l).collect();
    const PLAIN: [&str; 5] = [
        "property float x",
        "property float y",
        "property float z",
        "property float intensity",
        "end_header",
    ];
    const COLORED: [&str; 8] = [
        "property float x",
        "property float y",
        "property float z",
        "property float intensity",
        "property uchar red",
        "property uchar green",
        "property uchar blue",
        "end_header",
    ];
    let stride = if props == PLAIN {
        16
    } else if props == COLORED {
        19
    } else {
        return Err(Error::parse(file, n + 1, "unsupported vertex properties"));
    };
    let body = &bytes[pos..];
    if Some(body.len()) != count.checked_mul(stride) {
        return Err(Error::parse(
            file,
            lines.len(),
            format!("body has {} bytes, expected {count} vertices of {stride} bytes", body.len()),
        ));
    }
    if count == 0 {
        return Err(Error::parse(file, n, "cloud has no vertices"));
    }
    let f = |c: &[u8], k: usize| f32::from_le_bytes([c[4 * k], c[4 * k + 1], c[4 * k + 2], c[4 * k + 3]]) as f64;
    let mut points = Vec::with_capacity(count);
    for (i, c) in body.chunks_exact(stride).enumerate() {
        let position = Vec3::new(f(c, 0), f(c, 1), f(c, 2));
        if !position.iter().all(|v| v.is_finite()) {
            return Err(Error::parse(file, lines.len(), format!("vertex {i} has a non-finite coordinate")));
        }
        let t = f(c, 3);
        points.push(ThermalPoint {
            position,
            temperature: (!t.is_nan()).then_some(t),
        });
    }
    Ok(ThermalPointCloud { points, session_stamp })
}
