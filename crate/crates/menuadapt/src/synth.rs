//! Synthetic menus and interaction logs for benchmarks and tests.

use menuadapt_core::{EventDatabase, MenuModel, PageId, SelectorSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DAY_MS: u64 = 24 * 3_600_000;
/// 2024-01-01T00:00:00Z, start of generated logs.
pub const EPOCH_MS: u64 = 1_704_067_200_000;

/// A sidebar with `groups` groups of `items` links each.
pub fn menu_html(groups: usize, items: usize) -> String {
    let mut html = String::with_capacity(groups * items * 80 + 200);
    html.push_str("<!DOCTYPE html>\n<html><head><title>Synthetic</title></head>\n<body>\n<nav id=\"menu\">\n");
    for g in 0..groups {
        html.push_str(&format!("<section class=\"group\" id=\"g{g}\"><h3>Group {g}</h3>\n<ul>\n"));
        for i in 0..items {
            html.push_str(&format!("  <li class=\"item\"><a href=\"/s{g}/page{i}\">Section {g} page {i}</a></li>\n"));
        }
        html.push_str("</ul></section>\n");
    }
    html.push_str("</nav>\n<main><p>content</p></main>\n</body></html>\n");
    html
}

pub fn menu_selectors() -> SelectorSet {
    SelectorSet::new("#menu", Some(".group"), ".item").expect("static selectors parse")
}

/// `count` mixed events over 30 days: about 70% clicks on model items and
/// 30% visits to their pages, skewed towards the first items.
pub fn random_log(model: &MenuModel, count: usize, seed: u64) -> EventDatabase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items: Vec<_> = model.items().collect();
    let mut db = EventDatabase::new();
    if items.is_empty() {
        return db;
    }
    let span = 30 * DAY_MS;
    let mut times: Vec<u64> = (0..count).map(|_| EPOCH_MS + rng.gen_range(0..span)).collect();
    times.sort_unstable();
    for t in times {
        let u: f64 = rng.gen();
        let item = items[((u * u) * items.len() as f64) as usize % items.len()];
        if rng.gen_bool(0.7) {
            db.log_click(item.id.clone(), PageId::new("/"), t);
        } else {
            let page = item.page_target.clone().unwrap_or_else(|| PageId::new("/"));
            let dur = rng.gen_range(1_000..300_000);
            db.log_visit(page, t, t + dur).expect("positive duration");
        }
    }
    db
}
