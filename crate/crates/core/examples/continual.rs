//! Adds four classes to a trained 5-class model. The old centers stay fixed and
//! the encoder keeps its shape.

use lsc::data::{gen_blobs, LabeledDataset, Split};
use lsc::metric::LossKind;
use lsc::rootsys::gen_rotation_2d;
use lsc::trainer::{continual_extend, train, TrainConfig, TrainState};

fn main() -> lsc::Result<()> {
    let all = gen_blobs(9, 2, 60, 0.5, 4)?;
    let old = all.filter_labels(|l| l < 5);
    let old = LabeledDataset::new(old.features().clone(), old.labels().to_vec(), 5, Split::Train)?;
    let new = all.filter_labels(|l| l >= 5);

    let c5 = gen_rotation_2d(5, 5.0, 1.0)?;
    let c9 = gen_rotation_2d(9, 5.0, 1.0)?;
    c5.check_prefix_of(&c9)?;

    let cfg = TrainConfig {
        epochs: 150,
        batch_size: 32,
        learning_rate: 3e-3,
        loss: LossKind::Dist,
        seed: 6,
        ..TrainConfig::default()
    };
    let mut state = TrainState::init(&[2, 64, 64, 2], 6)?;
    train(&mut state, &old, &c5, &cfg)?;
    let r = continual_extend(&mut state, &c5, &old, &new, &c9, &cfg)?;
    println!("old classes: {:.3} before, {:.3} after", r.old_accuracy_before, r.old_accuracy_after);
    println!("new classes: {:?}", r.new_accuracy_after);
    println!("parameters: {} -> {}", r.param_count_before, r.param_count_after);
    Ok(())
}
