//! Times the query-indexed and resource-indexed strategies on identical
//! random sessions over a synthetic collection and prints the comparison.
//!
//! ```bash
//! cargo run --release -p tagbrowse --example compare_strategies -- [sessions] [actions] [fanout]
//! ```
//!
//! `fanout` defaults to 4 (a hierarchical tag vocabulary); pass 0 for
//! independent tags.

use tagbrowse::bench::{compare_strategies, BenchConfig};
use tagbrowse::synth::{generate_synthetic_collection, SynthParams};
use tagbrowse::Strategy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let sessions: u64 = args.next().map_or(Ok(20), |s| s.parse())?;
    let actions: usize = args.next().map_or(Ok(10_000), |s| s.parse())?;
    let fanout: usize = args.next().map_or(Ok(4), |s| s.parse())?;

    let params = SynthParams {
        hierarchy_fanout: fanout,
        ..SynthParams::default()
    };
    let collection = generate_synthetic_collection(&params)?;
    println!(
        "collection: {} resources, {} tags",
        collection.n_resources(),
        collection.n_tags()
    );

    let config = BenchConfig {
        seeds: (0..sessions).collect(),
        n_actions: actions,
        strategies: vec![Strategy::Query, Strategy::Resource],
        ..BenchConfig::default()
    };
    let outcome = compare_strategies(&collection, &config)?;

    println!("{:>6} {:>14} {:>14} {:>9} {:>9} {:>9}", "seed", "query_ms", "resource_ms", "q_hits", "r_hits", "gain_%");
    for s in &outcome.report.sessions {
        let q = s.run(Strategy::Query).unwrap();
        let r = s.run(Strategy::Resource).unwrap();
        println!(
            "{:>6} {:>14.2} {:>14.2} {:>9} {:>9} {:>9.1}",
            s.seed,
            q.cumulative_us / 1e3,
            r.cumulative_us / 1e3,
            q.stats.hits,
            r.stats.hits,
            100.0 * (q.cumulative_us - r.cumulative_us) / q.cumulative_us
        );
    }
    if let Some(cmp) = &outcome.report.comparison {
        println!(
            "mean improvement {:.1}% (95% CI {:.1}..{:.1}), range {:.1}..{:.1}, resource faster in {:.0}% of sessions",
            cmp.mean_improvement,
            cmp.ci95.0,
            cmp.ci95.1,
            cmp.min_improvement,
            cmp.max_improvement,
            100.0 * cmp.resource_faster_fraction
        );
        if let Some(w) = &cmp.wilcoxon {
            println!("wilcoxon: W = {}, Z = {:.3}, p = {:.3e}", w.w, w.z, w.p);
        }
    }
    Ok(())
}
