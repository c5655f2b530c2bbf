//! Walk the Mt. Hood patch grid along its sampling path and report where the
//! material class changes.

use regolith::campaign::presets;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let site = presets::mt_hood()?;
    let field = site.terrain.build()?;
    let path = site.terrain.sampling_path()?;
    let (nx, ny) = field.grid_size().ok_or("not a grid")?;
    println!("{nx} x {ny} cells, path {:.1} m", path.length());

    for s in field.class_boundaries_on_path(&path, 1000)? {
        let [x, y] = path.point(s);
        let before = field.column_on_path(&path, (s - 1e-3).max(0.0))?.class();
        let after = field.column_on_path(&path, (s + 1e-3).min(1.0))?.class();
        println!("s = {s:.3} ({x:.2}, {y:.2}) m: {before:?} -> {after:?}");
    }
    let geometry = site.geometry(&field)?;
    println!(
        "{} candidates, {} ROI boundaries",
        geometry.candidates.len(),
        geometry.roi_boundaries.len()
    );
    Ok(())
}
