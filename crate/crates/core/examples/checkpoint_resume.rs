//! Centers and checkpoints on disk; a split run resumes to the same weights as
//! an uninterrupted one.

use lsc::data::gen_blobs;
use lsc::io::{load_centers, load_checkpoint, save_checkpoint, save_configuration, Checkpoint};
use lsc::rootsys::{gen_an_roots, shuffle};
use lsc::trainer::{train, TrainConfig, TrainState};

fn main() -> lsc::Result<()> {
    let dir = std::env::temp_dir().join("lsc-checkpoint-example");
    std::fs::create_dir_all(&dir)?;

    let cfg = shuffle(&gen_an_roots(6)?, 2)?;
    save_configuration(dir.join("centers.lsc"), &cfg, 12)?;
    let loaded = load_centers(dir.join("centers.lsc"))?;
    println!("loaded {} centers, family {:?}", loaded.centers.n_classes(), loaded.meta.family()?);

    let ds = gen_blobs(12, 5, 20, 0.5, 3)?;
    let tc = |epochs| TrainConfig {
        epochs,
        learning_rate: 1e-3,
        batch_size: 16,
        seed: 4,
        ..TrainConfig::default()
    };

    let mut straight = TrainState::init(&[5, 32, 7], 4)?;
    train(&mut straight, &ds, &loaded.centers, &tc(6))?;

    let mut first = TrainState::init(&[5, 32, 7], 4)?;
    train(&mut first, &ds, &loaded.centers, &tc(3))?;
    let path = dir.join("run.ckpt");
    let ck = Checkpoint {
        state: first,
        loss: tc(0).loss,
        label_permutation: None,
    };
    save_checkpoint(&path, &ck)?;
    let mut resumed = load_checkpoint(&path)?.state;
    train(&mut resumed, &ds, &loaded.centers, &tc(3))?;

    println!("epochs: {} resumed, {} straight", resumed.epochs_done(), straight.epochs_done());
    println!("identical weights: {}", resumed.params == straight.params);
    Ok(())
}
