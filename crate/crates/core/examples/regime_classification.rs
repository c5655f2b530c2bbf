//! One curve per material class, run through the regime classifier.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regolith::intrusion::{classify_regime, synthesize, IntruderSpec, IntrusionProtocol, SynthesisConfig};
use regolith::terrain::{ClassParams, EnvironmentConfig, MaterialColumn};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sand = MaterialColumn::cohesionless(0.6, 2650.0, 2.5e-4, 0.55, 12.0);
    let columns = [
        ("dry sand", sand.clone()),
        (
            "cohesive powder",
            sand.clone()
                .with_params(ClassParams::CohesivePowder { yield_force: 3.0 }),
        ),
        (
            "ice-cemented",
            sand.clone()
                .with_params(ClassParams::IceCemented { ice_fraction: 0.12 }),
        ),
        (
            "salt crust",
            sand.clone().with_params(ClassParams::SaltCrusted {
                crust_thickness: 0.015,
                crust_strength: 25.0,
                substrate: Box::new(sand.clone()),
            }),
        ),
    ];
    let env = EnvironmentConfig::default();
    for (name, column) in columns {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let curve = synthesize(
            &column,
            &IntruderSpec::LAB_CYLINDER,
            &IntrusionProtocol::default(),
            &env,
            &SynthesisConfig::default(),
            &mut rng,
        )?;
        let v = classify_regime(&curve)?;
        println!(
            "{name:<16} -> {:<16} confidence {:.2}, {} ruptures, slope ratio {:.3}",
            format!("{:?}", v.label),
            v.confidence,
            v.rupture_count,
            v.slope_ratio
        );
    }
    Ok(())
}
