//! Nearest-center lookup on root centers without scanning every class,
//! checked against the brute-force scan.

use std::time::Instant;

use lsc::fastassign::build_index;
use lsc::metric::assign_labels_cos;
use lsc::rootsys::{choose_centers, gen_an_roots, shuffle};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> lsc::Result<()> {
    let cfg = shuffle(&gen_an_roots(128)?, 1)?;
    let centers = choose_centers(&cfg, 10_000)?;
    let index = build_index(&cfg, &centers)?;
    println!("{} classes in {} dims, mode {:?}", index.n_classes(), cfg.ambient_dim(), index.mode());

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let z: Array2<f64> = Array2::from_shape_simple_fn((2_000, cfg.ambient_dim()), || StandardNormal.sample(&mut rng));

    let t = Instant::now();
    let fast = index.assign_batch(z.view())?;
    let fast_time = t.elapsed();
    let t = Instant::now();
    let brute = assign_labels_cos(z.view(), &centers)?;
    let brute_time = t.elapsed();
    let mismatches = fast.iter().zip(&brute).filter(|(a, b)| a != b).count();
    println!("indexed {fast_time:?}, brute force {brute_time:?}, mismatches {mismatches}");

    let q = z.row(0).to_vec();
    let (label, trace) = index.assign_fast_traced(&q)?;
    println!("query 0 -> class {label}, {trace:?}");
    println!("top 5: {:?}", index.assign_topk(&q, 5)?);
    Ok(())
}
