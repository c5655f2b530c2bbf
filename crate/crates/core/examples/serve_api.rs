//! Run the campaign HTTP API on localhost with a throwaway store.
//!
//! Try `curl -X POST localhost:8080/sessions -H 'content-type: application/json' -d '{"id":"a"}'`.

use regolith::campaign::{serve, Store};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("regolith-serve");
    let store = Store::open(&dir)?;
    println!("sessions in {}", dir.display());
    serve(store, "127.0.0.1:8080".parse()?).await?;
    Ok(())
}
