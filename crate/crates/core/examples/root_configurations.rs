//! Builds the A_n family and its variants, then prints sizes and minimum angles.
//!
//! cargo run --example root_configurations -- 5

use lsc::rootsys::{
    gen_an_roots, interpolate, positive_subset, project_drop, project_isometric, shuffle, CenterConfiguration,
};

fn min_angle(cfg: &CenterConfiguration) -> f64 {
    let v = cfg.vectors();
    let mut best = f64::INFINITY;
    for a in 0..v.len() {
        for b in a + 1..v.len() {
            best = best.min(v.cos_between(a, b).clamp(-1.0, 1.0).acos().to_degrees());
        }
    }
    best
}

fn main() -> lsc::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let full = gen_an_roots(n)?;
    let variants = [
        ("A_n", full.clone()),
        ("A_np (positive)", positive_subset(&full)?),
        ("A_nr (shuffled, seed 3)", shuffle(&full, 3)?),
        ("drop projection", project_drop(&full)?),
        ("isometric projection", project_isometric(&full)?),
        ("one interpolation", interpolate(&full, 1)?),
    ];
    println!("{:<26} {:>8} {:>6} {:>10}", "configuration", "vectors", "dim", "min angle");
    for (name, cfg) in &variants {
        println!("{name:<26} {:>8} {:>6} {:>10.4}", cfg.len(), cfg.ambient_dim(), min_angle(cfg));
    }

    // the first rows of A_n, as dense vectors
    for k in 0..3.min(full.len()) {
        println!("root {k}: {:?}", full.vectors().dense_row(k));
    }
    Ok(())
}
