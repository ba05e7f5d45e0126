//! End-to-end map building: gravity projection, scan-matching odometry,
//! keyframe wall clouds colored from thermal frames, loop closures and
//! pose-graph refinement.

use crate::cloud::ThermalPointCloud;
use crate::dataset::{Calibration, SessionDataset};
use crate::error::{Error, Result};
use crate::geometry::{planar_to_rigid3, PlanarPose, RigidTransform3};
use crate::graph::{
    detect_loop_closures, refine, EdgeKind, GraphEdge, GraphNode, LoopCandidate, LoopConfig, PairConfig, PoseGraph,
    RobustLosses, SolverOptions, SolverWeights,
};
use crate::scan::{
    associate_gravity, build_odometry_chain, gravity_at, gravity_project, leveling_rotation, MatcherConfig, ProjectedScan,
};
use crate::sensor::{GravityFilter, GravityVector, ImuSample, Scan2D, ThermalImage, Timestamp};
use crate::thermal::{accumulate_map, extrude_walls, project_to_thermal, Sampling, WallCloud};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub gravity_alpha: f64,
    pub matcher: MatcherConfig,
    /// A new keyframe starts once the robot moved this far (m) …
    pub keyframe_distance: f64,
    /// … or turned this much (rad) since the last one.
    pub keyframe_angle: f64,
    /// Neighboring returns whose ranges differ by more than
    /// `jump_edge_threshold + jump_edge_ratio · min(r)` mark a depth edge.
    pub jump_edge_threshold: f64,
    pub jump_edge_ratio: f64,
    /// Returns dropped on each side of a depth edge before extrusion.
    pub jump_edge_margin: usize,
    /// Keyframes without a thermal frame this close in time stay uncolored.
    pub max_frame_gap_ns: u64,
    pub sampling: Sampling,
    pub loops: LoopConfig,
    pub pairs: PairConfig,
    pub weights: SolverWeights,
    pub losses: RobustLosses,
    pub solver: SolverOptions,
    pub refine_rounds: usize,
    pub voxel_size: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            gravity_alpha: GravityFilter::DEFAULT_ALPHA,
            matcher: MatcherConfig::default(),
            keyframe_distance: 0.5,
            keyframe_angle: 20f64.to_radians(),
            jump_edge_threshold: 0.1,
            jump_edge_ratio: 0.1,
            jump_edge_margin: 3,
            max_frame_gap_ns: 100_000_000,
            sampling: Sampling::Bilinear,
            loops: LoopConfig::default(),
            pairs: PairConfig::default(),
            weights: SolverWeights::default(),
            losses: RobustLosses::default(),
            solver: SolverOptions::default(),
            refine_rounds: 3,
            voxel_size: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keyframe {
    /// Index into the projected scan sequence.
    pub scan_index: usize,
    pub stamp: Timestamp,
    pub odometry_pose: PlanarPose,
    pub pose: PlanarPose,
    /// Stamp of the thermal frame that colored this keyframe.
    pub frame: Option<Timestamp>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MapDiagnostics {
    pub scans_in: usize,
    pub scans_without_gravity: usize,
    pub degenerate_scans: Vec<u64>,
    pub odometry_fallbacks: Vec<u64>,
    pub keyframes: usize,
    pub uncolored_keyframes: usize,
    pub loop_candidates: usize,
    pub loop_rejected: usize,
    pub loop_edges: Vec<(usize, usize)>,
    pub point_pairs: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub pgo_iterations: usize,
    pub pgo_converged: bool,
    pub map_points: usize,
    pub temperature_set_points: usize,
}

#[derive(Debug, Clone)]
pub struct MapOutput {
    pub keyframes: Vec<Keyframe>,
    /// Scan-matching trajectory before refinement, in the frame of the first scan.
    pub odometry: Vec<(Timestamp, PlanarPose)>,
    /// Every projected scan after refinement.
    pub trajectory: Vec<(Timestamp, PlanarPose)>,
    pub graph: PoseGraph,
    /// Floor at z = 0, horizontal axes of the first scan.
    pub map: ThermalPointCloud,
    pub diagnostics: MapDiagnostics,
}

/// Drops `margin` returns on each side of every depth discontinuity and of
/// every missing return. `beam_count` and `wrap` describe the source scan so
/// the seam of a full circle is treated like any other neighbor pair.
pub fn filter_jump_edges(
    scan: &ProjectedScan,
    beam_count: usize,
    wrap: bool,
    threshold: f64,
    ratio: f64,
    margin: usize,
) -> ProjectedScan {
    let n = scan.len();
    if margin == 0 || n < 2 {
        return scan.clone();
    }
    let r: Vec<f64> = scan.points_xy.iter().map(|p| p.norm()).collect();
    let mut drop = vec![false; n];
    let pairs = if wrap { n } else { n - 1 };
    for i in 0..pairs {
        let j = (i + 1) % n;
        let gap = (scan.beams[j] + beam_count - scan.beams[i]) % beam_count;
        let jump = (r[i] - r[j]).abs() > threshold + ratio * r[i].min(r[j]);
        if gap != 1 || jump {
            for k in 0..margin.min(n) {
                drop[(i + n - k) % n] |= wrap || k <= i;
                drop[(j + k) % n] |= wrap || j + k < n;
            }
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&k| !drop[k]).collect();
    ProjectedScan {
        stamp: scan.stamp,
        points_xy: keep.iter().map(|&k| scan.points_xy[k]).collect(),
        beams: keep.iter().map(|&k| scan.beams[k]).collect(),
    }
}

/// Pose at `t` by linear interpolation between stamped poses, clamped at the ends.
fn interpolate(stamps: &[Timestamp], poses: &[PlanarPose], t: Timestamp) -> PlanarPose {
    let k = stamps.partition_point(|s| *s <= t);
    if k == 0 {
        return poses[0];
    }
    if k == stamps.len() {
        return poses[k - 1];
    }
    let (a, b) = (stamps[k - 1], stamps[k]);
    let f = (t.0 - a.0) as f64 / (b.0 - a.0) as f64;
    poses[k - 1].interpolate(&poses[k], f)
}

fn nearest_frame(frames: &[ThermalImage], t: Timestamp, max_gap: u64) -> Option<&ThermalImage> {
    let k = frames.partition_point(|f| f.stamp < t);
    let cands = [k.checked_sub(1), Some(k)];
    cands
        .iter()
        .flatten()
        .filter_map(|&i| frames.get(i))
        .filter(|f| f.stamp.abs_diff(t) <= max_gap)
        .min_by_key(|f| f.stamp.abs_diff(t))
}

/// Builds the thermal wall map of one session.
pub fn build_map(data: &SessionDataset, cfg: &PipelineConfig) -> Result<MapOutput> {
    let frames = data.thermal_images()?;
    build_map_from(&data.scans, &data.imu, &frames, &data.calib, cfg)
}

pub fn build_map_from(
    scans: &[Scan2D],
    imu: &[ImuSample],
    frames: &[ThermalImage],
    calib: &Calibration,
    cfg: &PipelineConfig,
) -> Result<MapOutput> {
    let extrusion = calib.extrusion()?;
    let mut diag = MapDiagnostics {
        scans_in: scans.len(),
        ..Default::default()
    };
    if frames.windows(2).any(|w| w[1].stamp < w[0].stamp) {
        return Err(Error::NonMonotonicTime("thermal frames are not time-sorted".into()));
    }

    let gravity: Vec<GravityVector> = GravityFilter::run(cfg.gravity_alpha, imu)?;
    let assoc = associate_gravity(scans, &gravity)?;
    diag.scans_without_gravity = assoc.dropped;

    let mut projected = Vec::with_capacity(assoc.pairs.len());
    let mut sources = Vec::with_capacity(assoc.pairs.len());
    for (scan, g) in &assoc.pairs {
        match gravity_project(scan, g) {
            Ok(p) => {
                projected.push(p);
                sources.push(scan);
            }
            Err(Error::DegenerateScan { stamp, .. }) => diag.degenerate_scans.push(stamp),
            Err(e) => return Err(e),
        }
    }
    if projected.is_empty() {
        return Err(Error::InvalidArgument("no usable scans".into()));
    }

    let chain = build_odometry_chain(&projected, &cfg.matcher);
    diag.odometry_fallbacks = chain.fallbacks.iter().map(|&k| projected[k + 1].stamp.0).collect();
    let odo = chain.pose_list();
    let stamps: Vec<Timestamp> = projected.iter().map(|p| p.stamp).collect();

    let mut kf_scans = vec![0];
    for k in 1..projected.len() {
        let last = odo[*kf_scans.last().expect("non-empty")];
        let rel = last.between(&odo[k]);
        if rel.translation().norm() >= cfg.keyframe_distance || rel.theta_z.abs() >= cfg.keyframe_angle {
            kf_scans.push(k);
        }
    }
    if *kf_scans.last().expect("non-empty") != projected.len() - 1 {
        kf_scans.push(projected.len() - 1);
    }

    let mut nodes = Vec::with_capacity(kf_scans.len());
    let mut used_frames = Vec::with_capacity(kf_scans.len());
    for (id, &s) in kf_scans.iter().enumerate() {
        let src = sources[s];
        let wrap = src.angle_increment.abs() * src.ranges.len() as f64 >= std::f64::consts::TAU - 1e-9;
        let walls = filter_jump_edges(
            &projected[s],
            src.ranges.len(),
            wrap,
            cfg.jump_edge_threshold,
            cfg.jump_edge_ratio,
            cfg.jump_edge_margin,
        );
        let mut cloud = extrude_walls(&walls, id, &extrusion);
        let mut used = None;
        if let Some(frame) = nearest_frame(frames, stamps[s], cfg.max_frame_gap_ns) {
            let g = gravity_at(&gravity, frame.stamp).expect("IMU stream checked non-empty");
            let level = leveling_rotation(&g.direction)?;
            let at_frame = interpolate(&stamps, &odo, frame.stamp);
            let motion = planar_to_rigid3(&odo[s].between(&at_frame), 0.0);
            let node_to_sensor = RigidTransform3::new(level.transpose(), Default::default()).compose(&motion.inverse());
            let camera = calib.cam_extrinsic.compose(&node_to_sensor);
            cloud = project_to_thermal(&cloud, &camera, &calib.intrinsics, frame, cfg.sampling)?;
            used = Some(frame.stamp);
        } else {
            diag.uncolored_keyframes += 1;
        }
        used_frames.push(used);
        nodes.push(GraphNode {
            id,
            pose: odo[s],
            cloud,
        });
    }

    let mut edges: Vec<GraphEdge> = kf_scans
        .windows(2)
        .enumerate()
        .map(|(k, w)| GraphEdge {
            from_id: k,
            to_id: k + 1,
            measured: odo[w[0]].between(&odo[w[1]]),
            kind: EdgeKind::Odometry,
            point_pairs: Vec::new(),
        })
        .collect();
    let candidates: Vec<LoopCandidate> = kf_scans
        .iter()
        .enumerate()
        .map(|(id, &s)| LoopCandidate {
            id,
            pose: odo[s],
            scan: &projected[s],
        })
        .collect();
    let loops = detect_loop_closures(&candidates, &cfg.loops, &cfg.matcher);
    diag.loop_candidates = loops.candidates;
    diag.loop_rejected = loops.rejected;
    diag.loop_edges = loops.edges.iter().map(|e| (e.from_id, e.to_id)).collect();
    edges.extend(loops.edges);

    let graph = PoseGraph { nodes, edges };
    let report = if graph.nodes.len() > 1 {
        let r = refine(&graph, &cfg.weights, &cfg.losses, &cfg.solver, &cfg.pairs, cfg.refine_rounds)?;
        diag.initial_cost = r.initial_cost;
        diag.final_cost = r.final_cost;
        diag.pgo_iterations = r.iterations;
        diag.pgo_converged = r.converged;
        r.graph
    } else {
        diag.pgo_converged = true;
        graph
    };
    diag.point_pairs = report.edges.iter().map(|e| e.point_pairs.len()).sum();
    let optimized = report.poses();

    let keyframes: Vec<Keyframe> = kf_scans
        .iter()
        .enumerate()
        .map(|(k, &s)| Keyframe {
            scan_index: s,
            stamp: stamps[s],
            odometry_pose: odo[s],
            pose: optimized[k],
            frame: used_frames[k],
        })
        .collect();
    diag.keyframes = keyframes.len();

    let mut trajectory = Vec::with_capacity(projected.len());
    let mut kf = 0;
    for s in 0..projected.len() {
        while kf + 1 < kf_scans.len() && kf_scans[kf + 1] <= s {
            kf += 1;
        }
        let correction = optimized[kf].compose(&odo[kf_scans[kf]].inverse());
        trajectory.push((stamps[s], correction.compose(&odo[s])));
    }

    let clouds: Vec<WallCloud> = report.nodes.iter().map(|n| n.cloud.clone()).collect();
    let map = accumulate_map(&clouds, &optimized, &extrusion, cfg.voxel_size)?;
    diag.map_points = map.len();
    diag.temperature_set_points = map.points.iter().filter(|p| p.temperature.is_some()).count();

    Ok(MapOutput {
        keyframes,
        odometry: stamps.iter().copied().zip(odo).collect(),
        trajectory,
        graph: report,
        map,
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    fn scan_from(ranges: &[f64]) -> ProjectedScan {
        let n = ranges.len();
        let pts: Vec<Vec2> = ranges
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let a = i as f64 * std::f64::consts::TAU / n as f64;
                Vec2::new(r * a.cos(), r * a.sin())
            })
            .collect();
        ProjectedScan::new(Timestamp(0), pts)
    }

    #[test]
    fn jump_edges_drop_neighbors() {
        let mut r = vec![2.0; 20];
        for v in r.iter_mut().skip(10) {
            *v = 5.0;
        }
        let f = filter_jump_edges(&scan_from(&r), 20, false, 0.1, 0.1, 2);
        assert_eq!(f.beams, vec![0, 1, 2, 3, 4, 5, 6, 7, 12, 13, 14, 15, 16, 17, 18, 19]);
        let f = filter_jump_edges(&scan_from(&r), 20, true, 0.1, 0.1, 2);
        assert_eq!(f.beams, vec![2, 3, 4, 5, 6, 7, 12, 13, 14, 15, 16, 17]);
    }

    #[test]
    fn missing_beam_is_an_edge() {
        let mut s = scan_from(&[2.0; 12]);
        s.points_xy.remove(6);
        s.beams.remove(6);
        let f = filter_jump_edges(&s, 12, true, 0.1, 0.1, 1);
        assert_eq!(f.beams, vec![0, 1, 2, 3, 4, 8, 9, 10, 11]);
    }

    #[test]
    fn interpolation_clamps() {
        let stamps = [Timestamp(10), Timestamp(20)];
        let poses = [PlanarPose::new(0.0, 0.0, 0.0), PlanarPose::new(1.0, 0.0, 0.0)];
        assert_eq!(interpolate(&stamps, &poses, Timestamp(0)).x, 0.0);
        assert_eq!(interpolate(&stamps, &poses, Timestamp(15)).x, 0.5);
        assert_eq!(interpolate(&stamps, &poses, Timestamp(25)).x, 1.0);
    }
}
