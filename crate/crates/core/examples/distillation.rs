//! A student learns the teacher's per-class mean embeddings, and a second run
//! trains with permuted class-to-center targets.

use lsc::data::{gen_blobs, random_label_permutation};
use lsc::metric::LabelMetric;
use lsc::rootsys::{choose_centers, gen_an_roots, project_drop};
use lsc::trainer::{distill, eval_accuracy_with, train, TrainConfig, TrainState};

fn main() -> lsc::Result<()> {
    let ds = gen_blobs(10, 8, 50, 0.5, 8)?;
    let centers = choose_centers(&project_drop(&gen_an_roots(4)?)?, 10)?;
    let cfg = TrainConfig {
        epochs: 100,
        batch_size: 32,
        learning_rate: 1e-3,
        seed: 7,
        ..TrainConfig::default()
    };

    let mut teacher = TrainState::init(&[8, 64, 64, 4], 7)?;
    train(&mut teacher, &ds, &centers, &cfg)?;
    println!("teacher: {:.3}", teacher.history.last().unwrap().train_accuracy);

    for dims in [[8, 64, 64, 4], [8, 32, 32, 4]] {
        let (student, ceembs) = distill(&teacher.params, &dims, &ds, &cfg)?;
        let acc = eval_accuracy_with(&student.params, &ds, &ceembs, LabelMetric::Cosine, None)?;
        println!("student {dims:?}: {acc:.3} ({} params)", student.params.param_count());
    }

    let perm = random_label_permutation(10, 7);
    let mut mixed = TrainState::init(&[8, 64, 64, 4], 7)?;
    train(&mut mixed, &ds, &centers, &TrainConfig { label_permutation: Some(perm.clone()), ..cfg })?;
    println!("permuted targets {perm:?}: {:.3}", mixed.history.last().unwrap().train_accuracy);
    Ok(())
}
