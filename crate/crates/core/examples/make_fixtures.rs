//! Regenerates the bundled fixtures.
//!
//! ```text
//! cargo run --example make_fixtures -- crates/core/fixtures
//! ```

use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use distmin::geom::io::{curve_to_json, mesh_to_obj};
use distmin::geom::{ClosedCurve, SurfaceMesh};
use distmin::morphing::Morph;
use distmin::Result;
use nalgebra::Vector2;

const CIRCLE_SEGMENTS: usize = 256;

fn run() -> Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    let write = |name: &str, text: String| std::fs::write(dir.join(name), text);

    for (name, length) in [
        ("circle_2pi.json", TAU),
        ("circle_4pi.json", 2.0 * TAU),
        ("circle_pi.json", PI),
    ] {
        let c = ClosedCurve::regular_polygon_with_length(CIRCLE_SEGMENTS, length)?;
        write(name, curve_to_json(&c) + "\n")?;
    }

    write(
        "icosphere3.obj",
        mesh_to_obj(&SurfaceMesh::icosphere(3, 1.0)?),
    )?;

    // Mirror image: vertex-to-vertex interpolation collapses the curve halfway.
    let square = ClosedCurve::new(vec![
        Vector2::new(0.0, 0.0),
        Vector2::new(1.0, 0.0),
        Vector2::new(1.0, 1.0),
        Vector2::new(0.0, 1.0),
    ])?;
    let mirrored = square.map_vertices(|v| Vector2::new(3.0 - v.x, v.y))?;
    write("fold_source.json", curve_to_json(&square) + "\n")?;
    write("fold_target.json", curve_to_json(&mirrored) + "\n")?;

    // Upper half of the unit 64-gon lifted to height 2y; lower half stays put.
    let m = ClosedCurve::regular_polygon(64, 1.0)?;
    let k = 8;
    let frames = (0..=k)
        .map(|j| {
            let t = j as f64 / k as f64;
            m.map_vertices(|p| {
                let bump = if p.y > 1e-12 { p.y } else { 0.0 };
                Vector2::new(p.x, p.y + t * bump)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write(
        "half_stretch_morph.json",
        Morph::new(frames)?.to_json() + "\n",
    )?;
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("make_fixtures: {e}");
        std::process::exit(1);
    }
}
