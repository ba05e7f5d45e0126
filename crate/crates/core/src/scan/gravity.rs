use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};
use crate::sensor::{GravityVector, Scan2D, Timestamp};

/// Pairs further apart than this in time are dropped.
pub const MAX_ASSOCIATION_GAP_NS: u64 = 100_000_000;

/// Projected points shorter than this are treated as zero-range and discarded.
const MIN_PROJECTED_RANGE: f64 = 1e-9;

/// Scan points projected onto the plane orthogonal to gravity, in 2D plane
/// coordinates. `beams[k]` is the beam index `points_xy[k]` came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedScan {
    pub stamp: Timestamp,
    pub points_xy: Vec<Vec2>,
    pub beams: Vec<usize>,
}

impl ProjectedScan {
    pub fn new(stamp: Timestamp, points_xy: Vec<Vec2>) -> Self {
        let beams = (0..points_xy.len()).collect();
        ProjectedScan {
            stamp,
            points_xy,
            beams,
        }
    }

    pub fn len(&self) -> usize {
        self.points_xy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points_xy.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct GravityAssociation {
    pub pairs: Vec<(Scan2D, GravityVector)>,
    pub dropped: usize,
}

fn check_sorted<I: Iterator<Item = Timestamp>>(what: &str, stamps: I) -> Result<()> {
    let mut prev = None;
    for (i, s) in stamps.enumerate() {
        if let Some(p) = prev {
            if s < p {
                return Err(Error::NonMonotonicTime(format!(
                    "{what} entry {i} at {} precedes {}",
                    s.0, p.0
                )));
            }
        }
        prev = Some(s);
    }
    Ok(())
}

/// Index of the IMU sample closest in time to `t`; ties go to the earlier sample.
fn nearest_sample(imu: &[GravityVector], t: Timestamp) -> usize {
    let after = imu.partition_point(|g| g.stamp < t);
    if after == 0 {
        return 0;
    }
    if after == imu.len() {
        return imu.len() - 1;
    }
    let before = after - 1;
    if t.abs_diff(imu[before].stamp) <= t.abs_diff(imu[after].stamp) {
        before
    } else {
        after
    }
}

/// Pairs each scan with the gravity sample nearest in time.
pub fn associate_gravity(scans: &[Scan2D], imu: &[GravityVector]) -> Result<GravityAssociation> {
    associate_gravity_within(scans, imu, MAX_ASSOCIATION_GAP_NS)
}

pub fn associate_gravity_within(
    scans: &[Scan2D],
    imu: &[GravityVector],
    max_gap_ns: u64,
) -> Result<GravityAssociation> {
    if imu.is_empty() {
        return Err(Error::EmptyImuStream);
    }
    check_sorted("scan", scans.iter().map(|s| s.stamp))?;
    check_sorted("imu", imu.iter().map(|g| g.stamp))?;

    let mut pairs = Vec::with_capacity(scans.len());
    let mut dropped = 0;
    for scan in scans {
        let g = imu[nearest_sample(imu, scan.stamp)];
        if scan.stamp.abs_diff(g.stamp) > max_gap_ns {
            dropped += 1;
        } else {
            pairs.push((scan.clone(), g));
        }
    }
    Ok(GravityAssociation { pairs, dropped })
}

/// Nearest gravity sample to an arbitrary instant, used for camera frames.
pub fn gravity_at(imu: &[GravityVector], t: Timestamp) -> Option<GravityVector> {
    if imu.is_empty() {
        None
    } else {
        Some(imu[nearest_sample(imu, t)])
    }
}

/// Minimal rotation taking `g` onto −z. Fails when `g` points up.
pub fn leveling_rotation(g: &Vec3) -> Result<Matrix3<f64>> {
    let g = g.normalize();
    let down = Vec3::new(0.0, 0.0, -1.0);
    let c = g.dot(&down);
    if c <= -1.0 + 1e-9 {
        return Err(Error::InvalidArgument(
            "gravity points along +z; sensor is upside down".into(),
        ));
    }
    let v = g.cross(&down);
    let vx = Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0);
    Ok(Matrix3::identity() + vx + vx * vx / (1.0 + c))
}

/// Removes the component of `p` along `g`.
pub fn project_point(p: &Vec3, g: &Vec3) -> Vec3 {
    p - g * (p.dot(g) / g.dot(g))
}

/// Projects a point onto the gravity-orthogonal plane and returns its 2D
/// coordinates in the plane basis aligned with the leveled sensor frame.
pub fn plane_coordinates(p: &Vec3, g: &Vec3) -> Result<Vec2> {
    let level = leveling_rotation(g)?;
    let q = level * project_point(p, g);
    Ok(Vec2::new(q.x, q.y))
}

/// Converts polar returns to points in the scan plane and projects them onto
/// the horizontal plane defined by gravity.
pub fn gravity_project(scan: &Scan2D, g: &GravityVector) -> Result<ProjectedScan> {
    let level = leveling_rotation(&g.direction)?;
    let dir = g.direction;
    let mut points_xy = Vec::with_capacity(scan.ranges.len());
    let mut beams = Vec::with_capacity(scan.ranges.len());
    for (beam, p) in scan.points() {
        let q = level * project_point(&p, &dir);
        let xy = Vec2::new(q.x, q.y);
        if xy.norm() > MIN_PROJECTED_RANGE {
            points_xy.push(xy);
            beams.push(beam);
        }
    }
    if points_xy.len() < 2 {
        return Err(Error::DegenerateScan {
            stamp: scan.stamp.0,
            finite: points_xy.len(),
        });
    }
    Ok(ProjectedScan {
        stamp: scan.stamp,
        points_xy,
        beams,
    })
}
