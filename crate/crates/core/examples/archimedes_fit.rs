//! Synthesize a noisy intrusion into dry sand and recover K from the linear
//! part of the curve.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regolith::intrusion::{fit_k, synthesize, IntruderSpec, IntrusionProtocol, SynthesisConfig};
use regolith::terrain::{k_of_phi, EnvironmentConfig, MaterialColumn, MaterialPreset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let env = EnvironmentConfig::default();
    let intruder = IntruderSpec::LAB_CYLINDER;
    let preset = MaterialPreset::QUARTZ_SAND;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    println!("{:>6} {:>8} {:>8} {:>8}  flag", "phi", "K true", "K fit", "err %");
    for phi in [0.55, 0.57, 0.59, 0.61, 0.63] {
        let k = k_of_phi(phi, &preset)?;
        let column = MaterialColumn::cohesionless(phi, 2650.0, 2.5e-4, 0.55, k);
        let curve = synthesize(
            &column,
            &intruder,
            &IntrusionProtocol::default(),
            &env,
            &SynthesisConfig::default(),
            &mut rng,
        )?;
        let fit = fit_k(&curve, &intruder, &column, &env)?;
        println!(
            "{phi:>6.3} {k:>8.3} {:>8.3} {:>8.2}  {}",
            fit.k,
            100.0 * (fit.k - k) / k,
            if fit.low_confidence { "low confidence" } else { "" }
        );
    }
    Ok(())
}
