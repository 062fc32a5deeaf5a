//! Every sample gets its own class: 1000 classes on shuffled A_32 roots.

use lsc::data::{gen_blobs, unique_label_expand};
use lsc::rootsys::{choose_centers, gen_an_roots, shuffle};
use lsc::trainer::{train, TrainConfig, TrainState};

fn main() -> lsc::Result<()> {
    let ds = unique_label_expand(&gen_blobs(10, 32, 100, 0.5, 3)?);
    let cfg = shuffle(&gen_an_roots(32)?, 9)?;
    let centers = choose_centers(&cfg, ds.n_classes())?;
    println!("{} samples, {} classes, center dim {}", ds.len(), ds.n_classes(), centers.n_dim());

    let mut state = TrainState::init(&[32, 256, 256, 33], 2)?;
    let tc = TrainConfig {
        epochs: 50,
        batch_size: 32,
        learning_rate: 1e-3,
        seed: 2,
        ..TrainConfig::default()
    };
    train(&mut state, &ds, &centers, &tc)?;
    for rec in state.history.iter().filter(|r| r.epoch % 10 == 0) {
        println!("epoch {:>2}  accuracy {:.3}", rec.epoch, rec.train_accuracy);
    }
    Ok(())
}
