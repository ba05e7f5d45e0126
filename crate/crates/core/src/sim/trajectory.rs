use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, PlanarPose, Vec2};
use crate::sensor::Timestamp;

/// Piecewise-linear path driven at constant speed. The robot turns in place at
/// each waypoint at `turn_rate` and stays at the last one for `hold_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub waypoints: Vec<Vec2>,
    pub speed: f64,
    pub turn_rate: f64,
    pub hold_s: f64,
    pub scan_rate: f64,
    pub imu_rate: f64,
    pub thermal_rate: f64,
}

impl TrajectorySpec {
    pub const DEFAULT_TURN_RATE: f64 = 0.5;

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.waypoints.is_empty() {
            return bad("trajectory has no waypoints".into());
        }
        if self.waypoints.iter().any(|w| !(w.x.is_finite() && w.y.is_finite())) {
            return bad("non-finite waypoint".into());
        }
        for (name, v) in [
            ("speed", self.speed),
            ("turn_rate", self.turn_rate),
            ("scan_rate", self.scan_rate),
            ("imu_rate", self.imu_rate),
            ("thermal_rate", self.thermal_rate),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.hold_s.is_finite() && self.hold_s >= 0.0) {
            return bad(format!("hold_s must be non-negative, got {}", self.hold_s));
        }
        if self.imu_rate < self.scan_rate {
            return bad(format!(
                "imu_rate {} is below scan_rate {}",
                self.imu_rate, self.scan_rate
            ));
        }
        if self.duration() <= 0.0 {
            return bad("trajectory has zero duration".into());
        }
        Ok(())
    }

    fn phases(&self) -> Vec<Phase> {
        let mut pts: Vec<Vec2> = Vec::with_capacity(self.waypoints.len());
        for w in &self.waypoints {
            if pts.last().is_none_or(|p| (w - p).norm() > 1e-12) {
                pts.push(*w);
            }
        }
        let heading = |a: Vec2, b: Vec2| (b.y - a.y).atan2(b.x - a.x);
        let mut theta = if pts.len() > 1 { heading(pts[0], pts[1]) } else { 0.0 };
        let mut out = Vec::new();
        for win in pts.windows(2) {
            let h = heading(win[0], win[1]);
            let turn = normalize_angle(h - theta);
            if turn != 0.0 {
                out.push(Phase {
                    start: PlanarPose::new(win[0].x, win[0].y, theta),
                    kind: PhaseKind::Turn(turn),
                    duration: turn.abs() / self.turn_rate,
                });
            }
            theta = h;
            out.push(Phase {
                start: PlanarPose::new(win[0].x, win[0].y, theta),
                kind: PhaseKind::Move(win[1] - win[0]),
                duration: (win[1] - win[0]).norm() / self.speed,
            });
        }
        let last = pts[pts.len() - 1];
        out.push(Phase {
            start: PlanarPose::new(last.x, last.y, theta),
            kind: PhaseKind::Hold,
            duration: self.hold_s,
        });
        out
    }

    pub fn duration(&self) -> f64 {
        self.phases().iter().map(|p| p.duration).sum()
    }

    /// Ground-truth pose at `t` seconds; clamps to the end pose past the end.
    pub fn pose_at(&self, t: f64) -> PlanarPose {
        let phases = self.phases();
        let mut t0 = 0.0;
        for p in &phases {
            if t < t0 + p.duration {
                return p.at((t - t0).max(0.0));
            }
            t0 += p.duration;
        }
        let last = phases.last().expect("at least the hold phase");
        last.at(last.duration)
    }

    /// Sample instants `k / rate` covering the trajectory duration.
    pub fn sample_times(&self, rate: f64) -> Vec<Timestamp> {
        let n = (self.duration() * rate - 1e-9).ceil().max(0.0) as usize;
        (0..n).map(|k| Timestamp::from_secs(k as f64 / rate)).collect()
    }
}

#[derive(Debug, Clone, Copy)]
enum PhaseKind {
    Turn(f64),
    Move(Vec2),
    Hold,
}

#[derive(Debug, Clone, Copy)]
struct Phase {
    start: PlanarPose,
    kind: PhaseKind,
    duration: f64,
}

impl Phase {
    fn at(&self, dt: f64) -> PlanarPose {
        let f = if self.duration > 0.0 { (dt / self.duration).min(1.0) } else { 1.0 };
        let s = self.start;
        match self.kind {
            PhaseKind::Turn(turn) => PlanarPose::new(s.x, s.y, s.theta_z + turn * f),
            PhaseKind::Move(d) => PlanarPose::new(s.x + d.x * f, s.y + d.y * f, s.theta_z),
            PhaseKind::Hold => s,
        }
    }
}
