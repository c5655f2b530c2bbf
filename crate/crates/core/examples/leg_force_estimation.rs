//! Tip force from joint torques, and how gait choice changes the error of a
//! leg-sensed curve on tilted ground.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regolith::leg::{
    estimate_tip_force, inverse_kinematics, joint_torques, simulate_measurement, GaitProtocol, LegGeometry, LegState,
    MeasurementSetup,
};
use regolith::terrain::{
    make_transect, EnvironmentConfig, GradientSpec, MaterialClass, MaterialColumn, PathSpec, Segment,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let geom = LegGeometry::default();
    let (q1, q2) = inverse_kinematics(&geom, 0.05, -0.28).ok_or("contact point out of reach")?;
    let (tau1, tau2) = joint_torques(&geom, q1, q2, (0.0, 12.0));
    let f = estimate_tip_force(&geom, &LegState { q1, q2, tau1, tau2 })?;
    println!(
        "q = ({q1:.3}, {q2:.3}) rad, tau = ({tau1:.3}, {tau2:.3}) N m, recovered F = ({:.3}, {:.3}) N",
        f.0, f.1
    );

    let spec = GradientSpec {
        length: 10.0,
        segments: vec![Segment {
            span: [0.0, 1.0],
            class: MaterialClass::Cohesionless,
            start: MaterialColumn::cohesionless(0.6, 2650.0, 2.5e-4, 0.55, 20.0),
            end: None,
        }],
    };
    let field = make_transect(&spec, &EnvironmentConfig::default())?;
    let path = PathSpec::along_transect(10.0);
    let setup = MeasurementSetup::default();
    for gait in [
        GaitProtocol::standalone(),
        GaitProtocol::crawl_n_sense(),
        GaitProtocol::trot_walk(),
    ] {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = simulate_measurement(&field, &path, 0.5, &gait, 0.1, &setup, &mut rng)?;
        let n = r.estimate.len().min(r.truth.len());
        let rms = (r.estimate.force[..n]
            .iter()
            .zip(&r.truth.force[..n])
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / n as f64)
            .sqrt();
        println!(
            "{:<16} rms error {rms:.3} N over {n} samples, {:.1} s",
            format!("{:?}", gait.kind),
            r.cost_s
        );
    }
    Ok(())
}
