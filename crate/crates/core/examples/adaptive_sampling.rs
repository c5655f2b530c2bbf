//! Drive a transect campaign without a human: plan the ends, then accept the
//! top suggestion each round and watch the weight and confidence move.

use regolith::campaign::{presets, Clock, Session, SessionSpec};
use regolith::sampler::{Feedback, Outcome};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let site = presets::white_sands()?;
    let spec = SessionSpec::new(&site, 42)?.with_id("adaptive");
    let mut session = Session::create(spec, Clock::Fixed(0))?;
    session.run_initial_plan(&[0.0, 1.0], None)?;

    for _ in 0..8 {
        let round = session.suggestions(3)?;
        let top = &round.suggestions[0];
        println!(
            "round {:>2}  w = {:.2}  go to {:>5.1} m  ({})",
            round.round,
            round.weight,
            top.location * site.terrain.sampling_path()?.length(),
            top.explanation
        );
        session.decide_rank(round.round, 0, Outcome::Accepted, Feedback::None)?;
        session.measure_pending(None)?;
    }
    let c = session.confidence().map_or(f64::NAN, |c| c.value);
    println!(
        "{} measurements, hypothesis confidence {c:.3}",
        session.state().measurements.len()
    );
    Ok(())
}
