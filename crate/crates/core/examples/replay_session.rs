//! Record a session to disk, read the event log back and rebuild the state.

use regolith::campaign::{presets, Clock, Session, SessionSpec, Store};
use regolith::sampler::{Feedback, Objective, Outcome};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("regolith-replay-{}", std::process::id()));
    let store = Store::open(&dir)?;
    let site = presets::white_sands()?;
    let mut session = Session::create(SessionSpec::new(&site, 9)?.with_id("demo"), Clock::System)?;
    store.create(&session)?;

    session.run_initial_plan(&[0.0, 0.5, 1.0], None)?;
    let round = session.suggestions(2)?;
    session.decide_rank(
        round.round,
        1,
        Outcome::Accepted,
        Feedback::ObjectiveMismatch {
            stated: Objective::Verification,
        },
    )?;
    session.measure_pending(None)?;
    store.save(&session)?;

    let rebuilt = store.load("demo")?;
    println!(
        "{} events in {}",
        rebuilt.events().len(),
        store.events_path("demo").display()
    );
    println!(
        "identical state: {}",
        rebuilt.canonical_json() == session.canonical_json()
    );
    println!("effective weight after feedback: {:.3}", rebuilt.effective_weight());
    std::fs::remove_dir_all(dir)?;
    Ok(())
}
