//! Shows the one situation where the two caches disagree: two different
//! tag selections that filter down to the same resources.
//!
//! On the art collection every cave painting is prehistoric, so
//! `{Cave-Painting}` and `{Prehistoric, Cave-Painting}` select the same
//! resource. Only the resource-indexed cache notices.

use tagbrowse::{sample, Browser, Strategy, UserAction};

fn main() -> tagbrowse::Result<()> {
    let c = sample::spanish_art();
    let prehistoric = c.require_tag("Prehistoric")?;
    let painting = c.require_tag("Cave-Painting")?;
    let session = [
        UserAction::Add(prehistoric),
        UserAction::Add(painting),
        UserAction::Remove(prehistoric),
    ];

    for strategy in [Strategy::Query, Strategy::Resource] {
        let mut browser = Browser::new(&c, strategy);
        let hits = session
            .iter()
            .map(|&a| browser.apply(a))
            .collect::<tagbrowse::Result<Vec<bool>>>()?;
        println!("{:>8}: hits {hits:?}, {:?}", strategy.as_str(), browser.stats());
    }
    Ok(())
}
