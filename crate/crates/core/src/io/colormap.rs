//! Rainbow colormap for temperature views.
//!
//! | s    | red | green | blue |
//! |------|-----|-------|------|
//! | 0.00 |   0 |     0 |  255 |
//! | 0.25 |   0 |   255 |  255 |
//! | 0.50 |   0 |   255 |    0 |
//! | 0.75 | 255 |   255 |    0 |
//! | 1.00 | 255 |     0 |    0 |
//!
//! `s = (clamp(T, t_min, t_max) − t_min) / (t_max − t_min)`; channels are
//! interpolated linearly between anchors and rounded to the nearest integer.
//! Points without a temperature are drawn in [`UNSET_COLOR`].

pub const DEFAULT_T_MIN: f64 = 10.0;
pub const DEFAULT_T_MAX: f64 = 40.0;
pub const UNSET_COLOR: [u8; 3] = [128, 128, 128];

const ANCHORS: [[f64; 3]; 5] = [
    [0.0, 0.0, 255.0],
    [0.0, 255.0, 255.0],
    [0.0, 255.0, 0.0],
    [255.0, 255.0, 0.0],
    [255.0, 0.0, 0.0],
];

/// Caller guarantees `t_min < t_max`.
pub fn rainbow(t: f64, t_min: f64, t_max: f64) -> [u8; 3] {
    if !t.is_finite() {
        return UNSET_COLOR;
    }
    let s = (t.clamp(t_min, t_max) - t_min) / (t_max - t_min);
    let x = s * 4.0;
    let i = (x.floor() as usize).min(3);
    let f = x - i as f64;
    let (a, b) = (ANCHORS[i], ANCHORS[i + 1]);
    let ch = |k: usize| (a[k] + (b[k] - a[k]) * f).round().clamp(0.0, 255.0) as u8;
    [ch(0), ch(1), ch(2)]
}
