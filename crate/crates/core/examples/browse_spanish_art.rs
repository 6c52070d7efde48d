//! Walks the bundled six-resource art collection the way a visitor would:
//! narrow by region, then by technique, then step back.
//!
//! ```bash
//! cargo run -p tagbrowse --example browse_spanish_art
//! ```

use tagbrowse::simulator::rank_selectable;
use tagbrowse::{sample, Browser, Collection, Strategy, UserAction};

fn show(c: &Collection, browser: &Browser<'_>) {
    let state = browser.state();
    let active: Vec<&str> = state.active_order().iter().map(|&t| c.tag_label(t)).collect();
    println!("active: {active:?}");
    for r in state.filtered().iter() {
        println!("  {}", c.resource(r).unwrap().label);
    }
    let tags: Vec<String> = rank_selectable(c, state)
        .into_iter()
        .map(|(t, n)| format!("{} ({n})", c.tag_label(t)))
        .collect();
    println!("  selectable: {}", tags.join(", "));
}

fn main() -> tagbrowse::Result<()> {
    let c = sample::spanish_art();
    let mut browser = Browser::new(&c, Strategy::Resource);
    show(&c, &browser);

    let levant = c.require_tag("Levant")?;
    let painting = c.require_tag("Cave-Painting")?;
    for (action, tag) in [
        (UserAction::Add(levant), "+Levant"),
        (UserAction::Add(painting), "+Cave-Painting"),
        (UserAction::Remove(painting), "-Cave-Painting"),
    ] {
        let hit = browser.apply(action)?;
        println!("\n{tag} (cache {})", if hit { "hit" } else { "miss" });
        show(&c, &browser);
    }
    println!("\n{:?}", browser.stats());
    Ok(())
}
