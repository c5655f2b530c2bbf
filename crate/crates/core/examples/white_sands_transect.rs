//! Probe the White Sands transect preset with the standalone leg at a few
//! flagged locations and print what the force-depth curves look like.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regolith::campaign::presets;
use regolith::intrusion::classify_regime;
use regolith::leg::{simulate_measurement, GaitProtocol};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let site = presets::white_sands()?;
    let field = site.terrain.build()?;
    let path = site.terrain.sampling_path()?;
    let setup = site.measurement();
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    println!(
        "{:>6}  {:<14} {:>8} {:>9} {:>8} {:>8} {:>8}  regime",
        "x [m]", "class", "peak N", "at [cm]", "10 N", "20 N", "30 N"
    );
    for metres in [1.0, 3.0, 5.0, 15.0, 33.0, 38.0, 48.0] {
        let s = metres / path.length();
        let column = field.column_on_path(&path, s)?;
        let reading = simulate_measurement(&field, &path, s, &GaitProtocol::standalone(), 0.0, &setup, &mut rng)?;
        let curve = &reading.estimate;
        let (peak_at, peak) = curve
            .samples()
            .fold((0.0, 0.0), |a, (h, f)| if f > a.1 { (h, f) } else { a });
        let summary = reading.summary.ok_or("measurement aborted")?;
        let cm = |d: Option<f64>| d.map_or("-".to_string(), |d| format!("{:.2}", d * 100.0));
        let regime = classify_regime(curve)
            .map(|v| format!("{:?}", v.label))
            .unwrap_or_default();
        println!(
            "{metres:>6.1}  {:<14} {peak:>8.2} {:>9.2} {:>8} {:>8} {:>8}  {regime}",
            format!("{:?}", column.class()),
            peak_at * 100.0,
            cm(summary.depth_at_10n),
            cm(summary.depth_at_20n),
            cm(summary.depth_at_30n),
        );
    }
    Ok(())
}
