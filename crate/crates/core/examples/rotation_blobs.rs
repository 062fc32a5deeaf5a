//! Trains a small encoder on 2D blobs towards rotation centers with the
//! radius (distance) loss.

use lsc::data::gen_blobs;
use lsc::metric::LossKind;
use lsc::rootsys::gen_rotation_2d;
use lsc::trainer::{train, TrainConfig, TrainState};

fn main() -> lsc::Result<()> {
    let ds = gen_blobs(10, 2, 50, 0.5, 1)?;
    let centers = gen_rotation_2d(10, 5.0, 1.0)?;
    let mut state = TrainState::init(&[2, 64, 64, 2], 1)?;
    let cfg = TrainConfig {
        epochs: 100,
        batch_size: 32,
        learning_rate: 3e-3,
        loss: LossKind::Dist,
        seed: 1,
        ..TrainConfig::default()
    };
    train(&mut state, &ds, &centers, &cfg)?;
    for rec in state.history.iter().step_by(10) {
        println!("epoch {:>3}  loss {:>10.5}  accuracy {:.3}", rec.epoch, rec.loss, rec.train_accuracy);
    }
    let last = state.history.last().unwrap();
    println!("final: epoch {} accuracy {:.3}", last.epoch, last.train_accuracy);
    Ok(())
}
