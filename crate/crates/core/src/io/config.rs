//! Text formats for simulation inputs, pipeline settings and maturity series.
//!
//! Noise, trajectory and pipeline files are `key=value` lists. Site files are
//! line records:
//!
//! ```text
//! floor_height <m>
//! ambient <°C>
//! wall <x0> <y0> <x1> <y1> <height>
//! field constant <T>
//! field linear <base> <gx> <gy> <gz>
//! field sun <shade> <sun> <dx> <dy> <lo> <hi> <vertical_gradient>
//! ```
//!
//! Several `field` lines add up.

use std::fmt::Write;

use super::text::{expect_header, field, finite_field, parse_floats, KeyValueWriter, KeyValues};
use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};
use crate::pipeline::PipelineConfig;
use crate::sim::{NoiseSpec, SiteModel, TemperatureField, TrajectorySpec, Wall};
use crate::thermal::Sampling;

const NOISE_KEYS: [&str; 6] = [
    "range_sigma",
    "range_dropout_prob",
    "gravity_tilt_sigma",
    "accel_noise_sigma",
    "thermal_noise_sigma",
    "haze_attenuation",
];

pub fn format_noise(n: &NoiseSpec) -> String {
    let mut w = KeyValueWriter::new();
    w.put("range_sigma", n.range_sigma)
        .put("range_dropout_prob", n.range_dropout_prob)
        .put("gravity_tilt_sigma", n.gravity_tilt_sigma)
        .put("accel_noise_sigma", n.accel_noise_sigma)
        .put("thermal_noise_sigma", n.thermal_noise_sigma)
        .put("haze_attenuation", n.haze_attenuation);
    w.finish()
}

pub fn parse_noise(file: &str, text: &str) -> Result<NoiseSpec> {
    let kv = KeyValues::parse(file, text)?;
    kv.check_known(&NOISE_KEYS)?;
    let n = NoiseSpec {
        range_sigma: kv.f64("range_sigma")?,
        range_dropout_prob: kv.f64("range_dropout_prob")?,
        gravity_tilt_sigma: kv.f64("gravity_tilt_sigma")?,
        accel_noise_sigma: kv.f64("accel_noise_sigma")?,
        thermal_noise_sigma: kv.f64("thermal_noise_sigma")?,
        haze_attenuation: kv.f64("haze_attenuation")?,
    };
    n.validate().map_err(|e| Error::parse(file, 0, e.to_string()))?;
    Ok(n)
}

const TRAJ_KEYS: [&str; 7] = [
    "waypoints",
    "speed",
    "turn_rate",
    "hold_s",
    "scan_rate",
    "imu_rate",
    "thermal_rate",
];

/// Waypoints are written as `x y; x y; …`.
pub fn format_trajectory(t: &TrajectorySpec) -> String {
    let wp: Vec<String> = t.waypoints.iter().map(|p| format!("{} {}", p.x, p.y)).collect();
    let mut w = KeyValueWriter::new();
    w.put("waypoints", wp.join("; "))
        .put("speed", t.speed)
        .put("turn_rate", t.turn_rate)
        .put("hold_s", t.hold_s)
        .put("scan_rate", t.scan_rate)
        .put("imu_rate", t.imu_rate)
        .put("thermal_rate", t.thermal_rate);
    w.finish()
}

pub fn parse_trajectory(file: &str, text: &str) -> Result<TrajectorySpec> {
    let kv = KeyValues::parse(file, text)?;
    kv.check_known(&TRAJ_KEYS)?;
    let (_, wp) = kv.str("waypoints")?;
    let waypoints = wp
        .split(';')
        .map(|p| match parse_floats(p).as_deref() {
            Some([x, y]) => Ok(Vec2::new(*x, *y)),
            _ => Err(kv.error("waypoints", format!("bad waypoint `{}`", p.trim()))),
        })
        .collect::<Result<Vec<_>>>()?;
    let t = TrajectorySpec {
        waypoints,
        speed: kv.f64("speed")?,
        turn_rate: kv.f64_or("turn_rate", TrajectorySpec::DEFAULT_TURN_RATE)?,
        hold_s: kv.f64_or("hold_s", 0.0)?,
        scan_rate: kv.f64("scan_rate")?,
        imu_rate: kv.f64("imu_rate")?,
        thermal_rate: kv.f64("thermal_rate")?,
    };
    t.validate().map_err(|e| Error::parse(file, 0, e.to_string()))?;
    Ok(t)
}

fn field_terms(f: &TemperatureField, out: &mut Vec<String>) {
    match f {
        TemperatureField::Constant(t) => out.push(format!("field constant {t}")),
        TemperatureField::Linear { base, gradient: g } => {
            out.push(format!("field linear {base} {} {} {}", g.x, g.y, g.z))
        }
        TemperatureField::SunExposure {
            shade,
            sun,
            direction: d,
            lo,
            hi,
            vertical_gradient,
        } => out.push(format!(
            "field sun {shade} {sun} {} {} {lo} {hi} {vertical_gradient}",
            d.x, d.y
        )),
        TemperatureField::Sum(a, b) => {
            field_terms(a, out);
            field_terms(b, out);
        }
    }
}

pub fn format_site(site: &SiteModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "floor_height {}", site.floor_height);
    let _ = writeln!(out, "ambient {}", site.ambient);
    for w in &site.walls {
        let _ = writeln!(out, "wall {} {} {} {} {}", w.a.x, w.a.y, w.b.x, w.b.y, w.height);
    }
    let mut terms = Vec::new();
    field_terms(&site.field, &mut terms);
    for t in terms {
        out.push_str(&t);
        out.push('\n');
    }
    out
}

pub fn parse_site(file: &str, text: &str) -> Result<SiteModel> {
    let mut floor_height = None;
    let mut ambient = None;
    let mut walls = Vec::new();
    let mut fields: Vec<TemperatureField> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (kind, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        let bad = |m: &str| Error::parse(file, line, m.to_string());
        match kind {
            "floor_height" | "ambient" => {
                let v = match parse_floats(rest).as_deref() {
                    Some([v]) => *v,
                    _ => return Err(bad(&format!("`{kind}` takes one number"))),
                };
                let slot = if kind == "floor_height" { &mut floor_height } else { &mut ambient };
                if slot.replace(v).is_some() {
                    return Err(bad(&format!("duplicate `{kind}`")));
                }
            }
            "wall" => {
                let Some(&[x0, y0, x1, y1, h]) = parse_floats(rest).as_deref() else {
                    return Err(bad("`wall` takes x0 y0 x1 y1 height"));
                };
                walls.push(Wall::new(Vec2::new(x0, y0), Vec2::new(x1, y1), h).map_err(|e| bad(&e.to_string()))?);
            }
            "field" => {
                let (name, args) = rest.trim().split_once(char::is_whitespace).unwrap_or((rest.trim(), ""));
                let v = parse_floats(args).ok_or_else(|| bad("bad number in field"))?;
                let f = match (name, v.as_slice()) {
                    ("constant", [t]) => TemperatureField::Constant(*t),
                    ("linear", [base, gx, gy, gz]) => TemperatureField::Linear {
                        base: *base,
                        gradient: Vec3::new(*gx, *gy, *gz),
                    },
                    ("sun", [shade, sun, dx, dy, lo, hi, vg]) => TemperatureField::SunExposure {
                        shade: *shade,
                        sun: *sun,
                        direction: Vec2::new(*dx, *dy),
                        lo: *lo,
                        hi: *hi,
                        vertical_gradient: *vg,
                    },
                    _ => return Err(bad(&format!("unknown field `{}`", rest.trim()))),
                };
                fields.push(f);
            }
            other => return Err(bad(&format!("unknown record `{other}`"))),
        }
    }
    let field = fields
        .into_iter()
        .reduce(|a, b| TemperatureField::Sum(Box::new(a), Box::new(b)))
        .ok_or_else(|| Error::parse(file, 0, "site has no field"))?;
    let floor_height = floor_height.ok_or_else(|| Error::MissingKey {
        file: file.to_string(),
        key: "floor_height".into(),
    })?;
    let ambient = ambient.ok_or_else(|| Error::MissingKey {
        file: file.to_string(),
        key: "ambient".into(),
    })?;
    SiteModel::new(walls, field, floor_height, ambient).map_err(|e| Error::parse(file, 0, e.to_string()))
}

const PIPELINE_KEYS: [&str; 23] = [
    "gravity_alpha",
    "match_max_iterations",
    "match_gate_distance",
    "match_gate_angle_deg",
    "match_min_inliers",
    "keyframe_distance",
    "keyframe_angle_deg",
    "jump_edge_threshold",
    "jump_edge_ratio",
    "jump_edge_margin",
    "max_frame_gap_s",
    "sampling",
    "loop_max_distance",
    "loop_min_index_gap",
    "loop_max_rms",
    "loop_min_inlier_fraction",
    "pair_max_distance",
    "max_pairs",
    "translation_weight",
    "rotation_weight",
    "thermal_weight",
    "refine_rounds",
    "voxel_size",
];

pub fn format_pipeline_config(c: &PipelineConfig) -> String {
    let mut w = KeyValueWriter::new();
    w.put("gravity_alpha", c.gravity_alpha)
        .put("match_max_iterations", c.matcher.max_iterations)
        .put("match_gate_distance", c.matcher.distance_gate)
        .put("match_gate_angle_deg", c.matcher.normal_angle_gate.to_degrees())
        .put("match_min_inliers", c.matcher.min_inliers)
        .put("keyframe_distance", c.keyframe_distance)
        .put("keyframe_angle_deg", c.keyframe_angle.to_degrees())
        .put("jump_edge_threshold", c.jump_edge_threshold)
        .put("jump_edge_ratio", c.jump_edge_ratio)
        .put("jump_edge_margin", c.jump_edge_margin)
        .put("max_frame_gap_s", c.max_frame_gap_ns as f64 * 1e-9)
        .put(
            "sampling",
            match c.sampling {
                Sampling::Bilinear => "bilinear",
                Sampling::Nearest => "nearest",
            },
        )
        .put("loop_max_distance", c.loops.max_distance)
        .put("loop_min_index_gap", c.loops.min_index_gap)
        .put("loop_max_rms", c.loops.max_rms)
        .put("loop_min_inlier_fraction", c.loops.min_inlier_fraction)
        .put("pair_max_distance", c.pairs.max_distance)
        .put("max_pairs", c.pairs.max_pairs)
        .put("translation_weight", c.weights.translation_weight)
        .put("rotation_weight", c.weights.rotation_weight)
        .put("thermal_weight", c.weights.thermal_weight)
        .put("refine_rounds", c.refine_rounds)
        .put("voxel_size", c.voxel_size.map_or("none".to_string(), |v| v.to_string()));
    w.finish()
}

/// Every key is optional; missing keys keep their defaults.
pub fn parse_pipeline_config(file: &str, text: &str) -> Result<PipelineConfig> {
    let kv = KeyValues::parse(file, text)?;
    kv.check_known(&PIPELINE_KEYS)?;
    let d = PipelineConfig::default();
    let mut c = d.clone();
    c.gravity_alpha = kv.f64_or("gravity_alpha", d.gravity_alpha)?;
    c.matcher.max_iterations = kv.parsed_or("match_max_iterations", d.matcher.max_iterations)?;
    c.matcher.distance_gate = kv.f64_or("match_gate_distance", d.matcher.distance_gate)?;
    c.matcher.normal_angle_gate = kv.f64_or("match_gate_angle_deg", d.matcher.normal_angle_gate.to_degrees())?.to_radians();
    c.matcher.min_inliers = kv.parsed_or("match_min_inliers", d.matcher.min_inliers)?;
    c.keyframe_distance = kv.f64_or("keyframe_distance", d.keyframe_distance)?;
    c.keyframe_angle = kv.f64_or("keyframe_angle_deg", d.keyframe_angle.to_degrees())?.to_radians();
    c.jump_edge_threshold = kv.f64_or("jump_edge_threshold", d.jump_edge_threshold)?;
    c.jump_edge_ratio = kv.f64_or("jump_edge_ratio", d.jump_edge_ratio)?;
    c.jump_edge_margin = kv.parsed_or("jump_edge_margin", d.jump_edge_margin)?;
    let gap = kv.f64_or("max_frame_gap_s", d.max_frame_gap_ns as f64 * 1e-9)?;
    if gap < 0.0 {
        return Err(kv.error("max_frame_gap_s", "max_frame_gap_s must be non-negative"));
    }
    c.max_frame_gap_ns = (gap * 1e9).round() as u64;
    if kv.contains("sampling") {
        c.sampling = match kv.str("sampling")?.1 {
            "bilinear" => Sampling::Bilinear,
            "nearest" => Sampling::Nearest,
            other => return Err(kv.error("sampling", format!("unknown sampling `{other}`"))),
        };
    }
    c.loops.max_distance = kv.f64_or("loop_max_distance", d.loops.max_distance)?;
    c.loops.min_index_gap = kv.parsed_or("loop_min_index_gap", d.loops.min_index_gap)?;
    c.loops.max_rms = kv.f64_or("loop_max_rms", d.loops.max_rms)?;
    c.loops.min_inlier_fraction = kv.f64_or("loop_min_inlier_fraction", d.loops.min_inlier_fraction)?;
    c.pairs.max_distance = kv.f64_or("pair_max_distance", d.pairs.max_distance)?;
    c.pairs.max_pairs = kv.parsed_or("max_pairs", d.pairs.max_pairs)?;
    c.weights = crate::graph::SolverWeights::new(
        kv.f64_or("translation_weight", d.weights.translation_weight)?,
        kv.f64_or("rotation_weight", d.weights.rotation_weight)?,
        kv.f64_or("thermal_weight", d.weights.thermal_weight)?,
    )
    .map_err(|e| kv.error("translation_weight", e.to_string()))?;
    c.refine_rounds = kv.parsed_or("refine_rounds", d.refine_rounds)?;
    if kv.contains("voxel_size") {
        c.voxel_size = match kv.str("voxel_size")?.1 {
            "none" => None,
            _ => {
                let v = kv.f64("voxel_size")?;
                if v <= 0.0 {
                    return Err(kv.error("voxel_size", "voxel_size must be positive or `none`"));
                }
                Some(v)
            }
        };
    }
    for (key, v) in [
        ("gravity_alpha", c.gravity_alpha),
        ("keyframe_distance", c.keyframe_distance),
        ("pair_max_distance", c.pairs.max_distance),
        ("loop_max_distance", c.loops.max_distance),
    ] {
        if v <= 0.0 {
            return Err(kv.error(key, format!("`{key}` must be positive")));
        }
    }
    Ok(c)
}

const SERIES_HEADER: &str = "file,time_h";

/// Maturity series index: map file names with their capture time in hours.
pub fn format_series(entries: &[(String, f64)]) -> String {
    let mut out = format!("{SERIES_HEADER}\n");
    for (f, t) in entries {
        let _ = writeln!(out, "{f},{t}");
    }
    out
}

pub fn parse_series(file: &str, text: &str) -> Result<Vec<(String, f64)>> {
    expect_header(file, text.lines().next(), SERIES_HEADER)?;
    let mut out: Vec<(String, f64)> = Vec::new();
    for (i, row) in text.lines().enumerate().skip(1) {
        let line = i + 1;
        if row.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() != 2 {
            return Err(Error::parse(file, line, format!("expected 2 columns, got {}", cols.len())));
        }
        let name: String = field(file, line, &cols, 0, "file")?;
        if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(Error::parse(file, line, format!("`{name}` must be a plain file name")));
        }
        let t = finite_field(file, line, &cols, 1, "time_h")?;
        if out.last().is_some_and(|(_, p)| t <= *p) {
            return Err(Error::NonMonotonicTime(format!("{file}:{line}: time {t} h does not increase")));
        }
        out.push((name, t));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::presets;

    #[test]
    fn site_round_trip() {
        let mut site = presets::two_room().unwrap();
        site.field = TemperatureField::Sum(
            Box::new(site.field.clone()),
            Box::new(TemperatureField::Linear {
                base: 0.5,
                gradient: Vec3::new(0.1, 0.0, -0.2),
            }),
        );
        let text = format_site(&site);
        let back = parse_site("site.txt", &text).unwrap();
        assert_eq!(back, site);
        assert_eq!(format_site(&back), text);
        assert!(parse_site("s", "ambient 10\nwall 0 0 1 0 3\nfield constant 20\n").is_err());
        assert!(parse_site("s", "floor_height 3\nambient 10\nwall 0 0 1 0\nfield constant 20\n").is_err());
    }

    #[test]
    fn trajectory_and_noise_round_trip() {
        let t = presets::two_room_loop();
        let text = format_trajectory(&t);
        assert_eq!(parse_trajectory("t", &text).unwrap(), t);
        let n = NoiseSpec {
            range_sigma: 0.01,
            gravity_tilt_sigma: 1f64.to_radians(),
            ..NoiseSpec::zero()
        };
        let text = format_noise(&n);
        assert_eq!(parse_noise("n", &text).unwrap(), n);
        assert!(parse_noise("n", "range_sigma=0.1\n").is_err());
        assert!(parse_noise("n", &text.replace("range_sigma=0.01", "range_sigma=-1")).is_err());
    }

    #[test]
    fn pipeline_config_round_trip() {
        let c = PipelineConfig {
            voxel_size: Some(0.05),
            ..PipelineConfig::default()
        };
        let text = format_pipeline_config(&c);
        let back = parse_pipeline_config("c", &text).unwrap();
        assert_eq!(format_pipeline_config(&back), text);
        assert_eq!(parse_pipeline_config("c", "").unwrap().refine_rounds, 3);
        assert!(parse_pipeline_config("c", "bogus=1").is_err());
    }

    #[test]
    fn series() {
        let s = vec![("a.ply".to_string(), 0.0), ("b.ply".to_string(), 1.5)];
        let text = format_series(&s);
        assert_eq!(parse_series("s", &text).unwrap(), s);
        assert!(parse_series("s", "file,time_h\na.ply,2\nb.ply,1\n").is_err());
        assert!(parse_series("s", "file,time_h\n../a.ply,2\n").is_err());
    }
}
