use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};
use crate::sensor::TEMPERATURE_RANGE;

const MIN_WALL_LENGTH: f64 = 0.01;

/// Vertical wall standing on the floor plane z = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wall {
    pub a: Vec2,
    pub b: Vec2,
    pub height: f64,
}

impl Wall {
    pub fn new(a: Vec2, b: Vec2, height: f64) -> Result<Self> {
        if !(a.iter().chain(b.iter()).all(|v| v.is_finite()) && (b - a).norm() > MIN_WALL_LENGTH) {
            return Err(Error::InvalidArgument(format!(
                "wall ({}, {})-({}, {}) is shorter than {MIN_WALL_LENGTH} m",
                a.x, a.y, b.x, b.y
            )));
        }
        if !(height.is_finite() && height > 0.0) {
            return Err(Error::InvalidArgument(format!("wall height must be positive, got {height}")));
        }
        Ok(Wall { a, b, height })
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn distance_to(&self, p: &Vec2) -> f64 {
        let e = self.b - self.a;
        let s = ((p - self.a).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
        (self.a + e * s - p).norm()
    }

    /// Proper or touching intersection with the segment `p`–`q`.
    pub fn crosses(&self, p: &Vec2, q: &Vec2) -> bool {
        let cross = |u: Vec2, v: Vec2| u.x * v.y - u.y * v.x;
        let e = self.b - self.a;
        let d = q - p;
        let denom = cross(d, e);
        if denom.abs() < 1e-15 {
            return false;
        }
        let w = self.a - p;
        let t = cross(w, e) / denom;
        let s = cross(w, d) / denom;
        (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&s)
    }
}

/// Surface a ray can hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Surface {
    Wall(usize),
    Floor,
    Ceiling,
}

/// Analytic surface temperature in °C over world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum TemperatureField {
    Constant(f64),
    /// `base + gradient · p`.
    Linear { base: f64, gradient: Vec3 },
    /// Shade temperature rising to `sun` along `direction`, ramped between
    /// the projections `lo` and `hi`, plus a vertical gradient.
    SunExposure {
        shade: f64,
        sun: f64,
        direction: Vec2,
        lo: f64,
        hi: f64,
        vertical_gradient: f64,
    },
    Sum(Box<TemperatureField>, Box<TemperatureField>),
}

impl TemperatureField {
    /// Continuous across walls, floor and ceiling.
    pub fn eval(&self, p: &Vec3) -> f64 {
        match self {
            TemperatureField::Constant(t) => *t,
            TemperatureField::Linear { base, gradient } => base + gradient.dot(p),
            TemperatureField::SunExposure {
                shade,
                sun,
                direction,
                lo,
                hi,
                vertical_gradient,
            } => {
                let s = ((direction.dot(&p.xy()) - lo) / (hi - lo)).clamp(0.0, 1.0);
                shade + s * (sun - shade) + vertical_gradient * p.z
            }
            TemperatureField::Sum(a, b) => a.eval(p) + b.eval(p),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            TemperatureField::Constant(t) => t.is_finite(),
            TemperatureField::Linear { base, gradient } => base.is_finite() && gradient.iter().all(|g| g.is_finite()),
            TemperatureField::SunExposure {
                shade,
                sun,
                direction,
                lo,
                hi,
                vertical_gradient,
            } => {
                [*shade, *sun, *lo, *hi, *vertical_gradient].iter().all(|v| v.is_finite())
                    && hi > lo
                    && (direction.norm() - 1.0).abs() < 1e-9
            }
            TemperatureField::Sum(a, b) => {
                a.validate()?;
                b.validate()?;
                true
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid temperature field {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteModel {
    pub walls: Vec<Wall>,
    pub field: TemperatureField,
    /// Ceiling height, m.
    pub floor_height: f64,
    /// Air temperature seen by rays that hit nothing, °C.
    pub ambient: f64,
}

/// Spacing of the sample grid used to check the field range and for the
/// ground-truth sidecar.
pub const WALL_SAMPLE_SPACING: f64 = 0.25;

impl SiteModel {
    pub fn new(walls: Vec<Wall>, field: TemperatureField, floor_height: f64, ambient: f64) -> Result<Self> {
        if walls.is_empty() {
            return Err(Error::InvalidArgument("site has no walls".into()));
        }
        if !(floor_height.is_finite() && floor_height > 0.0) {
            return Err(Error::InvalidArgument(format!("floor height must be positive, got {floor_height}")));
        }
        let in_range = |t: f64| t > TEMPERATURE_RANGE.0 && t < TEMPERATURE_RANGE.1;
        if !in_range(ambient) {
            return Err(Error::InvalidArgument(format!("ambient {ambient} °C outside plausible range")));
        }
        field.validate()?;
        let site = SiteModel {
            walls,
            field,
            floor_height,
            ambient,
        };
        if let Some(s) = site.wall_samples(WALL_SAMPLE_SPACING).iter().find(|s| !in_range(s.2)) {
            return Err(Error::InvalidArgument(format!(
                "field gives {} °C on wall {} at ({}, {}, {})",
                s.2, s.0, s.1.x, s.1.y, s.1.z
            )));
        }
        Ok(site)
    }

    pub fn temperature(&self, p: &Vec3) -> f64 {
        self.field.eval(p)
    }

    /// Grid of `(wall_id, point, temperature)` covering every wall including its edges.
    pub fn wall_samples(&self, spacing: f64) -> Vec<(usize, Vec3, f64)> {
        let mut out = Vec::new();
        for (id, w) in self.walls.iter().enumerate() {
            let nu = (w.length() / spacing).ceil().max(1.0) as usize;
            let nz = (w.height / spacing).ceil().max(1.0) as usize;
            for i in 0..=nu {
                let xy = w.a + (w.b - w.a) * (i as f64 / nu as f64);
                for k in 0..=nz {
                    let p = Vec3::new(xy.x, xy.y, w.height * k as f64 / nz as f64);
                    out.push((id, p, self.temperature(&p)));
                }
            }
        }
        out
    }

    /// Distance from `p` to the closest wall in the plan view.
    pub fn clearance(&self, p: &Vec2) -> f64 {
        self.walls.iter().map(|w| w.distance_to(p)).fold(f64::INFINITY, f64::min)
    }

    /// Closest wall to `p` in the plan view and its distance.
    pub fn nearest_wall(&self, p: &Vec2) -> (usize, f64) {
        self.walls
            .iter()
            .enumerate()
            .map(|(i, w)| (i, w.distance_to(p)))
            .fold((usize::MAX, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
    }
}
