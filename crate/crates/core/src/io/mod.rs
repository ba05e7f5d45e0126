//! On-disk formats. Every parser works on in-memory text or bytes; the
//! path-based functions are thin wrappers that add file names to errors.

pub mod colormap;
pub mod config;
pub mod ply;
pub mod report;
pub mod session;
pub mod text;

pub use colormap::{rainbow, DEFAULT_T_MAX, DEFAULT_T_MIN};
pub use ply::{export_colored_view, export_ply, load_ply, read_ply, write_colored_ply, write_ply};
pub use report::Report;
pub use session::{load_session, write_session};

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pipeline::MapOutput;

pub const MAP_FILE: &str = "map.ply";
pub const COLORED_MAP_FILE: &str = "colored.ply";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.txt";

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes `map.ply`, `colored.ply`, `trajectory.csv` and `diagnostics.txt`
/// into `dir`, creating it if needed.
pub fn write_map_outputs(out: &MapOutput, dir: &Path, t_min: f64, t_max: f64) -> Result<()> {
    create_dir(dir)?;
    export_ply(&out.map, &dir.join(MAP_FILE))?;
    export_colored_view(&out.map, &dir.join(COLORED_MAP_FILE), t_min, t_max)?;
    write_atomic(
        &dir.join(TRAJECTORY_FILE),
        session::format_ground_truth(&out.trajectory).as_bytes(),
    )?;
    write_atomic(
        &dir.join(DIAGNOSTICS_FILE),
        report::diagnostics_report(&out.diagnostics).format().as_bytes(),
    )
}
