//! Paired comparison statistics on made-up timings: improvement
//! percentages, a histogram, a bootstrap interval and the Wilcoxon
//! signed-rank test.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tagbrowse::stats::{bootstrap_mean_ci, histogram, improvement_percent, mean, wilcoxon_signed_rank};

fn main() -> tagbrowse::Result<()> {
    // (query ms, resource ms) per session
    let pairs = [
        (412.0, 301.5),
        (388.2, 290.1),
        (455.9, 350.0),
        (401.3, 402.8),
        (379.4, 260.7),
        (420.0, 333.3),
        (398.6, 310.2),
        (433.1, 297.4),
        (405.5, 318.9),
        (392.7, 288.0),
    ];
    let gains = pairs
        .iter()
        .map(|&(q, r)| improvement_percent(q, r))
        .collect::<tagbrowse::Result<Vec<f64>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (lo, hi) = bootstrap_mean_ci(&gains, 0.95, 2000, &mut rng)?;
    println!("mean improvement {:.1}% (95% CI {lo:.1}..{hi:.1})", mean(&gains));

    for bin in histogram(&gains, 5)? {
        println!("{:>7.1}% {}", bin.lower, "#".repeat(bin.count));
    }

    let w = wilcoxon_signed_rank(&pairs)?;
    println!("W+ = {}, W- = {}, Z = {:.3}, p = {:.4}", w.w_plus, w.w_minus, w.z, w.p);
    Ok(())
}
