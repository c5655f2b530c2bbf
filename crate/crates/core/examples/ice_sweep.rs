//! Frozen regolith: terminal force and rupture count as ice content grows.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regolith::intrusion::{
    classify_regime, strength_summary, synthesize, IntruderSpec, IntrusionProtocol, SynthesisConfig,
};
use regolith::terrain::{ClassParams, EnvironmentConfig, MaterialColumn};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let env = EnvironmentConfig::default();
    println!("{:>6} {:>10} {:>9}  regime", "ice %", "terminal N", "ruptures");
    for ice in [0.01, 0.02, 0.05, 0.10, 0.15] {
        let column = MaterialColumn::cohesionless(0.6, 2650.0, 2.5e-4, 0.55, 12.0)
            .with_params(ClassParams::IceCemented { ice_fraction: ice });
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let curve = synthesize(
            &column,
            &IntruderSpec::FROZEN_CYLINDER,
            &IntrusionProtocol::default(),
            &env,
            &SynthesisConfig::default(),
            &mut rng,
        )?;
        let verdict = classify_regime(&curve)?;
        println!(
            "{:>6.0} {:>10.3} {:>9}  {:?}",
            ice * 100.0,
            strength_summary(&curve).terminal_force,
            verdict.rupture_count,
            verdict.label
        );
    }
    Ok(())
}
