//! Fixtures shared by the pipeline benchmarks.

use thermal_slam::geometry::planar_to_rigid3;
use thermal_slam::graph::{EdgeKind, GraphEdge, GraphNode};
use thermal_slam::scan::{gravity_project, ProjectedScan};
use thermal_slam::sim::{presets, raycast_scan, simulate_session, NoiseSpec, TrajectorySpec};
use thermal_slam::{GravityVector, PlanarPose, PoseGraph, SessionDataset, ThermalPoint, ThermalPointCloud, Timestamp, Vec2};

/// Noise-free projected scan of the square room from `pose`.
pub fn room_scan(pose: &PlanarPose, stamp: u64) -> ProjectedScan {
    let site = presets::square_room().expect("preset");
    let rig = presets::default_rig();
    let scan = raycast_scan(
        &site,
        &planar_to_rigid3(pose, rig.sensor_height),
        Timestamp(stamp),
        rig.beam_count,
        rig.fov,
        rig.r_max,
    )
    .expect("scan");
    gravity_project(&scan, &GravityVector::down(Timestamp(stamp))).expect("projectable")
}

/// Short drive through room A with one turn, with the noisy end-to-end noise levels.
pub fn short_session(seed: u64) -> SessionDataset {
    let traj = TrajectorySpec {
        waypoints: vec![Vec2::new(1.5, 1.2), Vec2::new(3.5, 1.2), Vec2::new(3.5, 2.2)],
        ..presets::two_room_loop()
    };
    let noise = NoiseSpec {
        range_sigma: 0.01,
        gravity_tilt_sigma: 1f64.to_radians(),
        thermal_noise_sigma: 0.5,
        ..NoiseSpec::zero()
    };
    simulate_session(&presets::two_room().expect("preset"), &traj, &noise, seed).expect("simulate")
}

/// `n`-node square loop with drifted odometry and one closing edge.
pub fn drifted_loop(n: usize) -> PoseGraph {
    let side = n / 4;
    let steps: Vec<PlanarPose> = (1..n)
        .map(|k| PlanarPose::new(1.0, 0.0, if k % side == 0 { std::f64::consts::FRAC_PI_2 } else { 0.0 }))
        .collect();
    let mut poses = vec![PlanarPose::identity()];
    for s in &steps {
        let drifted = s.compose(&PlanarPose::new(0.01, 0.0, 0.01));
        poses.push(poses.last().unwrap().compose(&drifted));
    }
    let nodes = poses
        .iter()
        .enumerate()
        .map(|(id, &pose)| GraphNode {
            id,
            pose,
            cloud: Default::default(),
        })
        .collect();
    let mut edges: Vec<GraphEdge> = steps
        .iter()
        .enumerate()
        .map(|(k, s)| GraphEdge {
            from_id: k,
            to_id: k + 1,
            measured: s.compose(&PlanarPose::new(0.01, 0.0, 0.01)),
            kind: EdgeKind::Odometry,
            point_pairs: Vec::new(),
        })
        .collect();
    edges.push(GraphEdge {
        from_id: n - 1,
        to_id: 0,
        measured: PlanarPose::new(1.0, 0.0, std::f64::consts::FRAC_PI_2),
        kind: EdgeKind::LoopClosure,
        point_pairs: Vec::new(),
    });
    PoseGraph { nodes, edges }
}

/// Ground-truth wall samples of the two-room site as a thermal cloud.
pub fn site_cloud(spacing: f64) -> ThermalPointCloud {
    let site = presets::two_room().expect("preset");
    ThermalPointCloud::new(
        site.wall_samples(spacing)
            .into_iter()
            .map(|(_, position, t)| ThermalPoint {
                position,
                temperature: Some(t),
            })
            .collect(),
    )
}
