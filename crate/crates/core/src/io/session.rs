//! Session directory layout:
//!
//! ```text
//! <root>/scans.csv             stamp_ns,angle_min,angle_increment,range_max,ranges
//! <root>/imu.csv               stamp_ns,ax,ay,az
//! <root>/calib.txt             key=value
//! <root>/thermal/index.csv     stamp_ns,file
//! <root>/thermal/<file>.png    16-bit grayscale raw frames
//! <root>/groundtruth.csv       stamp_ns,x,y,theta_z        (simulated sessions only)
//! <root>/wall_temperatures.csv wall_id,x,y,z,temperature   (simulated sessions only)
//! ```
//!
//! Each `scans.csv` row carries the ranges as trailing columns; missing
//! returns are written as `nan`. Floats use the shortest representation that
//! reads back to the same value.

use std::fmt::Write;
use std::io::Cursor;
use std::path::Path;

use super::text::{expect_header, field, finite_field, KeyValueWriter, KeyValues};
use super::{create_dir, read_bytes, read_text, write_atomic};
use crate::dataset::{Calibration, GroundTruth, RawThermalFrame, SessionDataset, WallSample};
use crate::error::{Error, Result};
use crate::geometry::{PlanarPose, RigidTransform3, Vec3};
use crate::sensor::{CameraIntrinsics, ImuSample, Scan2D, Timestamp};

pub const SCANS_FILE: &str = "scans.csv";
pub const IMU_FILE: &str = "imu.csv";
pub const CALIB_FILE: &str = "calib.txt";
pub const THERMAL_DIR: &str = "thermal";
pub const THERMAL_INDEX: &str = "index.csv";
pub const GROUND_TRUTH_FILE: &str = "groundtruth.csv";
pub const WALL_TEMPERATURE_FILE: &str = "wall_temperatures.csv";

const SCANS_HEADER: &str = "stamp_ns,angle_min,angle_increment,range_max,ranges";
const IMU_HEADER: &str = "stamp_ns,ax,ay,az";
const INDEX_HEADER: &str = "stamp_ns,file";
const GT_HEADER: &str = "stamp_ns,x,y,theta_z";
const WALL_HEADER: &str = "wall_id,x,y,z,temperature";

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        v.to_string()
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty())
}

fn check_order(file: &str, line: usize, prev: &mut Option<Timestamp>, t: Timestamp) -> Result<()> {
    if prev.is_some_and(|p| t < p) {
        return Err(Error::NonMonotonicTime(format!("{file}:{line}: timestamp {} decreases", t.0)));
    }
    *prev = Some(t);
    Ok(())
}

pub fn format_scans(scans: &[Scan2D]) -> String {
    let mut out = String::from(SCANS_HEADER);
    out.push('\n');
    for s in scans {
        let _ = write!(
            out,
            "{},{},{},{}",
            s.stamp.0,
            fmt_f64(s.angle_min),
            fmt_f64(s.angle_increment),
            fmt_f64(s.range_max)
        );
        for r in &s.ranges {
            out.push(',');
            out.push_str(&fmt_f64(*r));
        }
        out.push('\n');
    }
    out
}

pub fn parse_scans(text: &str) -> Result<Vec<Scan2D>> {
    let file = SCANS_FILE;
    expect_header(file, text.lines().next(), SCANS_HEADER)?;
    let mut out = Vec::new();
    let mut prev = None;
    for (line, row) in data_lines(text) {
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() < 5 {
            return Err(Error::parse(file, line, "scan row needs at least one range"));
        }
        let stamp = Timestamp(field(file, line, &cols, 0, "stamp_ns")?);
        check_order(file, line, &mut prev, stamp)?;
        let angle_min = finite_field(file, line, &cols, 1, "angle_min")?;
        let inc = finite_field(file, line, &cols, 2, "angle_increment")?;
        let range_max = finite_field(file, line, &cols, 3, "range_max")?;
        let ranges = (4..cols.len())
            .map(|i| field::<f64>(file, line, &cols, i, "range"))
            .collect::<Result<Vec<_>>>()?;
        let scan = Scan2D::new(stamp, angle_min, inc, range_max, ranges)
            .map_err(|e| Error::parse(file, line, e.to_string()))?;
        out.push(scan);
    }
    Ok(out)
}

pub fn format_imu(imu: &[ImuSample]) -> String {
    let mut out = format!("{IMU_HEADER}\n");
    for s in imu {
        let _ = writeln!(out, "{},{},{},{}", s.stamp.0, s.accel.x, s.accel.y, s.accel.z);
    }
    out
}

pub fn parse_imu(text: &str) -> Result<Vec<ImuSample>> {
    let file = IMU_FILE;
    expect_header(file, text.lines().next(), IMU_HEADER)?;
    let mut out = Vec::new();
    let mut prev = None;
    for (line, row) in data_lines(text) {
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::parse(file, line, format!("expected 4 columns, got {}", cols.len())));
        }
        let stamp = Timestamp(field(file, line, &cols, 0, "stamp_ns")?);
        check_order(file, line, &mut prev, stamp)?;
        let accel = Vec3::new(
            finite_field(file, line, &cols, 1, "ax")?,
            finite_field(file, line, &cols, 2, "ay")?,
            finite_field(file, line, &cols, 3, "az")?,
        );
        out.push(ImuSample { stamp, accel });
    }
    Ok(out)
}

const CALIB_KEYS: [&str; 12] = [
    "fx",
    "fy",
    "cx",
    "cy",
    "width",
    "height",
    "cam_extrinsic",
    "sensor_height",
    "floor_height",
    "vertical_step",
    "thermal_scale",
    "thermal_offset",
];

pub fn format_calib(c: &Calibration) -> String {
    let k = &c.intrinsics;
    let mut w = KeyValueWriter::new();
    w.put("fx", k.fx)
        .put("fy", k.fy)
        .put("cx", k.cx)
        .put("cy", k.cy)
        .put("width", k.width)
        .put("height", k.height)
        .put_list("cam_extrinsic", &c.cam_extrinsic.to_row_major_12())
        .put("sensor_height", c.sensor_height)
        .put("floor_height", c.floor_height)
        .put("vertical_step", c.vertical_step)
        .put("thermal_scale", c.thermal_scale)
        .put("thermal_offset", c.thermal_offset);
    w.finish()
}

pub fn parse_calib(text: &str) -> Result<Calibration> {
    let kv = KeyValues::parse(CALIB_FILE, text)?;
    kv.check_known(&CALIB_KEYS)?;
    let intrinsics = CameraIntrinsics::new(
        kv.f64("fx")?,
        kv.f64("fy")?,
        kv.f64("cx")?,
        kv.f64("cy")?,
        kv.parsed("width")?,
        kv.parsed("height")?,
    )
    .map_err(|e| kv.error("fx", e.to_string()))?;
    let ext = kv.f64_list("cam_extrinsic")?;
    let ext: [f64; 12] = ext
        .try_into()
        .map_err(|v: Vec<f64>| kv.error("cam_extrinsic", format!("expected 12 values, got {}", v.len())))?;
    let cam_extrinsic = RigidTransform3::from_row_major_12(&ext);
    if !cam_extrinsic.is_valid(1e-6) {
        return Err(kv.error("cam_extrinsic", "rotation part is not orthonormal"));
    }
    let calib = Calibration {
        intrinsics,
        cam_extrinsic,
        sensor_height: kv.f64("sensor_height")?,
        floor_height: kv.f64("floor_height")?,
        vertical_step: kv.f64("vertical_step")?,
        thermal_scale: kv.f64("thermal_scale")?,
        thermal_offset: kv.f64("thermal_offset")?,
    };
    calib.extrusion().map_err(|e| kv.error("sensor_height", e.to_string()))?;
    if !(calib.thermal_scale > 0.0) {
        return Err(kv.error("thermal_scale", "thermal_scale must be positive"));
    }
    Ok(calib)
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.png")
}

pub fn format_thermal_index(frames: &[(Timestamp, String)]) -> String {
    let mut out = format!("{INDEX_HEADER}\n");
    for (t, f) in frames {
        let _ = writeln!(out, "{},{}", t.0, f);
    }
    out
}

pub fn parse_thermal_index(text: &str) -> Result<Vec<(Timestamp, String)>> {
    let file = "thermal/index.csv";
    expect_header(file, text.lines().next(), INDEX_HEADER)?;
    let mut out = Vec::new();
    let mut prev = None;
    for (line, row) in data_lines(text) {
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() != 2 {
            return Err(Error::parse(file, line, format!("expected 2 columns, got {}", cols.len())));
        }
        let stamp = Timestamp(field(file, line, &cols, 0, "stamp_ns")?);
        check_order(file, line, &mut prev, stamp)?;
        let name = cols[1].trim();
        let plain = !name.is_empty()
            && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
            && !name.starts_with('.');
        if !plain {
            return Err(Error::parse(file, line, format!("frame file `{name}` must be a plain file name")));
        }
        out.push((stamp, name.to_string()));
    }
    Ok(out)
}

/// Encodes a frame as a 16-bit grayscale PNG.
pub fn encode_png16(width: u32, height: u32, pixels: &[u16]) -> Result<Vec<u8>> {
    let image_err = |m: String| Error::Image {
        path: "<memory>".into(),
        message: m,
    };
    if pixels.len() != width as usize * height as usize {
        return Err(image_err(format!("{} pixels for {width}x{height}", pixels.len())));
    }
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width, height);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Sixteen);
        let mut writer = enc.write_header().map_err(|e| image_err(e.to_string()))?;
        let data: Vec<u8> = pixels.iter().flat_map(|p| p.to_be_bytes()).collect();
        writer.write_image_data(&data).map_err(|e| image_err(e.to_string()))?;
        writer.finish().map_err(|e| image_err(e.to_string()))?;
    }
    Ok(out)
}

/// Decodes a 16-bit grayscale PNG; any other pixel format is rejected.
pub fn decode_png16(bytes: &[u8]) -> std::result::Result<(u32, u32, Vec<u16>), String> {
    let mut dec = png::Decoder::new(Cursor::new(bytes));
    dec.set_transformations(png::Transformations::IDENTITY);
    let mut reader = dec.read_info().map_err(|e| e.to_string())?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Sixteen {
        return Err(format!(
            "expected 16-bit grayscale, got {:?} at {:?}",
            info.color_type, info.bit_depth
        ));
    }
    let (w, h) = (info.width, info.height);
    let expected = w as usize * h as usize * 2;
    if expected > bytes.len().saturating_mul(1100).max(1 << 20) {
        return Err(format!("implausible frame size {w}x{h}"));
    }
    let mut buf = vec![0u8; expected];
    let out = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
    if out.buffer_size() != expected {
        return Err(format!("decoded {} bytes, expected {expected}", out.buffer_size()));
    }
    Ok((w, h, buf.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()))
}

pub fn format_ground_truth(gt: &[(Timestamp, PlanarPose)]) -> String {
    let mut out = format!("{GT_HEADER}\n");
    for (t, p) in gt {
        let _ = writeln!(out, "{},{},{},{}", t.0, p.x, p.y, p.theta_z);
    }
    out
}

/// Also used for pipeline `trajectory.csv`, which has the same columns.
pub fn parse_ground_truth(file: &str, text: &str) -> Result<Vec<(Timestamp, PlanarPose)>> {
    expect_header(file, text.lines().next(), GT_HEADER)?;
    let mut out = Vec::new();
    let mut prev = None;
    for (line, row) in data_lines(text) {
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::parse(file, line, format!("expected 4 columns, got {}", cols.len())));
        }
        let stamp = Timestamp(field(file, line, &cols, 0, "stamp_ns")?);
        check_order(file, line, &mut prev, stamp)?;
        let pose = PlanarPose {
            x: finite_field(file, line, &cols, 1, "x")?,
            y: finite_field(file, line, &cols, 2, "y")?,
            theta_z: finite_field(file, line, &cols, 3, "theta_z")?,
        };
        out.push((stamp, pose));
    }
    Ok(out)
}

pub fn format_wall_samples(samples: &[WallSample]) -> String {
    let mut out = format!("{WALL_HEADER}\n");
    for s in samples {
        let p = s.position;
        let _ = writeln!(out, "{},{},{},{},{}", s.wall_id, p.x, p.y, p.z, s.temperature);
    }
    out
}

pub fn parse_wall_samples(text: &str) -> Result<Vec<WallSample>> {
    let file = WALL_TEMPERATURE_FILE;
    expect_header(file, text.lines().next(), WALL_HEADER)?;
    data_lines(text)
        .map(|(line, row)| {
            let cols: Vec<&str> = row.split(',').collect();
            if cols.len() != 5 {
                return Err(Error::parse(file, line, format!("expected 5 columns, got {}", cols.len())));
            }
            Ok(WallSample {
                wall_id: field(file, line, &cols, 0, "wall_id")?,
                position: Vec3::new(
                    finite_field(file, line, &cols, 1, "x")?,
                    finite_field(file, line, &cols, 2, "y")?,
                    finite_field(file, line, &cols, 3, "z")?,
                ),
                temperature: finite_field(file, line, &cols, 4, "temperature")?,
            })
        })
        .collect()
}

/// Writes the session directory. Existing files with the same names are replaced.
pub fn write_session(data: &SessionDataset, root: &Path) -> Result<()> {
    let thermal_dir = root.join(THERMAL_DIR);
    create_dir(&thermal_dir)?;
    write_atomic(&root.join(SCANS_FILE), format_scans(&data.scans).as_bytes())?;
    write_atomic(&root.join(IMU_FILE), format_imu(&data.imu).as_bytes())?;
    write_atomic(&root.join(CALIB_FILE), format_calib(&data.calib).as_bytes())?;
    let mut index = Vec::with_capacity(data.thermal.len());
    for (i, f) in data.thermal.iter().enumerate() {
        let name = frame_file_name(i);
        let path = thermal_dir.join(&name);
        let png = encode_png16(f.width, f.height, &f.pixels).map_err(|e| match e {
            Error::Image { message, .. } => Error::Image { path: path.clone(), message },
            other => other,
        })?;
        write_atomic(&path, &png)?;
        index.push((f.stamp, name));
    }
    write_atomic(&thermal_dir.join(THERMAL_INDEX), format_thermal_index(&index).as_bytes())?;
    if let Some(gt) = &data.ground_truth {
        write_atomic(&root.join(GROUND_TRUTH_FILE), format_ground_truth(&gt.trajectory).as_bytes())?;
        write_atomic(&root.join(WALL_TEMPERATURE_FILE), format_wall_samples(&gt.wall_samples).as_bytes())?;
    }
    Ok(())
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message, .. } => Error::Parse {
            file: path.display().to_string(),
            line,
            message,
        },
        Error::NonMonotonicTime(m) => Error::NonMonotonicTime(format!("{}: {m}", path.display())),
        Error::MissingKey { key, .. } => Error::MissingKey {
            file: path.display().to_string(),
            key,
        },
        other => other,
    }
}

/// Loads a session directory. Raw frames stay undecoded; see
/// [`SessionDataset::thermal_images`] for the °C conversion.
pub fn load_session(root: &Path) -> Result<SessionDataset> {
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "session directory not found"),
        ));
    }
    let load = |name: &str| -> Result<(std::path::PathBuf, String)> {
        let p = root.join(name);
        Ok((p.clone(), read_text(&p)?))
    };
    let (p, t) = load(CALIB_FILE)?;
    let calib = parse_calib(&t).map_err(|e| with_path(&p, e))?;
    let (p, t) = load(SCANS_FILE)?;
    let scans = parse_scans(&t).map_err(|e| with_path(&p, e))?;
    let (p, t) = load(IMU_FILE)?;
    let imu = parse_imu(&t).map_err(|e| with_path(&p, e))?;

    let thermal_dir = root.join(THERMAL_DIR);
    let index_path = thermal_dir.join(THERMAL_INDEX);
    let index = parse_thermal_index(&read_text(&index_path)?).map_err(|e| with_path(&index_path, e))?;
    let mut thermal = Vec::with_capacity(index.len());
    for (stamp, name) in index {
        let path = thermal_dir.join(&name);
        let (width, height, pixels) = decode_png16(&read_bytes(&path)?).map_err(|message| Error::Image {
            path: path.clone(),
            message,
        })?;
        if width != calib.intrinsics.width || height != calib.intrinsics.height {
            return Err(Error::Image {
                path,
                message: format!(
                    "frame is {width}x{height}, calibration says {}x{}",
                    calib.intrinsics.width, calib.intrinsics.height
                ),
            });
        }
        thermal.push(RawThermalFrame {
            stamp,
            width,
            height,
            pixels,
        });
    }

    let gt_path = root.join(GROUND_TRUTH_FILE);
    let ground_truth = if gt_path.is_file() {
        let trajectory = parse_ground_truth(GROUND_TRUTH_FILE, &read_text(&gt_path)?).map_err(|e| with_path(&gt_path, e))?;
        let wall_path = root.join(WALL_TEMPERATURE_FILE);
        let wall_samples = if wall_path.is_file() {
            parse_wall_samples(&read_text(&wall_path)?).map_err(|e| with_path(&wall_path, e))?
        } else {
            Vec::new()
        };
        Some(GroundTruth {
            trajectory,
            wall_samples,
        })
    } else {
        None
    };

    Ok(SessionDataset {
        scans,
        imu,
        thermal,
        calib,
        ground_truth,
    })
}
