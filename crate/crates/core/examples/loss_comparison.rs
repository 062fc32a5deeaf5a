//! Same data, centers and budget; cosine, distance and combined losses.

use lsc::data::gen_blobs;
use lsc::metric::LossKind;
use lsc::rootsys::{choose_centers, gen_an_roots, project_drop};
use lsc::trainer::{train, TrainConfig, TrainState};

fn main() -> lsc::Result<()> {
    let ds = gen_blobs(84, 16, 20, 0.5, 11)?;
    let centers = choose_centers(&project_drop(&gen_an_roots(64)?)?, 84)?;
    for loss in [LossKind::Cos, LossKind::Dist, LossKind::COMBINED_DEFAULT] {
        let mut state = TrainState::init(&[16, 128, 64], 1)?;
        let cfg = TrainConfig {
            epochs: 60,
            batch_size: 32,
            learning_rate: 1e-3,
            loss,
            seed: 1,
            ..TrainConfig::default()
        };
        train(&mut state, &ds, &centers, &cfg)?;
        println!("{loss:?}: final accuracy {:.4}", state.history.last().unwrap().train_accuracy);
    }
    Ok(())
}
