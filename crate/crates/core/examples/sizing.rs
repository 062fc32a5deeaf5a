//! Capacity of each rank and the smallest rank that hosts a class count.
//!
//! cargo run --example sizing -- 1281000

use lsc::rootsys::{capacity, min_n_dim};

fn main() -> lsc::Result<()> {
    let classes: Vec<usize> = match std::env::args().skip(1).map(|s| s.parse()).collect::<Result<Vec<_>, _>>() {
        Ok(v) if !v.is_empty() => v,
        _ => vec![1_000, 300_000, 600_000, 1_281_000],
    };
    for k in classes {
        let plain = min_n_dim(k, 0)?;
        let interp = min_n_dim(k, 1)?;
        println!(
            "{k:>9} classes: rank {plain} without interpolation (capacity {}), rank {interp} with one level (capacity {})",
            capacity(plain, 0),
            capacity(interp, 1)
        );
    }
    Ok(())
}
