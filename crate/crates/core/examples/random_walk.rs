//! Generates a seeded browsing session on a synthetic collection, prints
//! the first lines of its trace file, then replays it under every strategy
//! and checks that all of them pass through the same states.
//!
//! ```bash
//! cargo run -p tagbrowse --example random_walk -- [seed] [actions]
//! ```

use tagbrowse::simulator::{generate_session, replay};
use tagbrowse::synth::generate_synthetic_collection;
use tagbrowse::{Strategy, SynthParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(Ok(1), |s| s.parse())?;
    let actions: usize = args.next().map_or(Ok(2000), |s| s.parse())?;

    let c = generate_synthetic_collection(&SynthParams::default())?;
    let trace = generate_session(&c, seed, actions);
    for line in trace.to_jsonl(&c).lines().take(6) {
        println!("{line}");
    }
    println!("...");

    let reference: Vec<_> = replay(&c, &trace.actions, Strategy::None)?.digests().cloned().collect();
    for strategy in [Strategy::Query, Strategy::Resource] {
        let run = replay(&c, &trace.actions, strategy)?;
        let same = run.digests().eq(reference.iter());
        let hits = run.hits().iter().filter(|&&h| h).count();
        println!("{:>8}: {hits}/{} hits, states identical: {same}", strategy.as_str(), trace.actions.len());
    }
    println!("final state {}", reference.last().unwrap().hex());
    Ok(())
}
