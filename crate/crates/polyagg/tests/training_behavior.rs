//! End-to-end behavior of the training loop on small generated corpora.

use polyagg::gnn::{
    build_dataset, load_model, mean_loss, save_model, train, DatasetSpec, GnnModel, TrainConfig,
};
use std::path::PathBuf;

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("polyagg-train-{}-{name}", std::process::id()))
}

fn small_spec() -> DatasetSpec {
    DatasetSpec {
        train_per_type: 3,
        val_per_type: 2,
        grid_sizes: (4, 6),
        voronoi_sizes: (16, 30),
        seed: 5,
    }
}

fn small_config(epochs: usize) -> TrainConfig {
    TrainConfig {
        learning_rate: 1e-3,
        l2_coeff: 1e-5,
        batch_size: 4,
        epochs,
        seed: 3,
    }
}

#[test]
fn history_covers_every_epoch_with_finite_losses() {
    let (train_items, val_items) = build_dataset(&small_spec()).unwrap();
    let outcome = train(GnnModel::new(1), &train_items, &val_items, &small_config(6)).unwrap();
    assert_eq!(outcome.history.len(), 6);
    for record in &outcome.history {
        assert!(record.train_loss.is_finite());
        assert!(record.val_loss.is_finite());
    }
    assert!(outcome.initial_val_loss.is_finite());
}

#[test]
fn training_lowers_the_validation_loss() {
    let (train_items, val_items) = build_dataset(&small_spec()).unwrap();
    let outcome = train(GnnModel::new(1), &train_items, &val_items, &small_config(8)).unwrap();
    let final_val = outcome.history.last().unwrap().val_loss;
    assert!(
        final_val < outcome.initial_val_loss,
        "validation went from {} to {final_val}",
        outcome.initial_val_loss
    );
}

#[test]
fn training_is_bitwise_reproducible() {
    let (train_items, val_items) = build_dataset(&small_spec()).unwrap();
    let run = || train(GnnModel::new(1), &train_items, &val_items, &small_config(4)).unwrap();
    let a = run();
    let b = run();
    assert_eq!(a.history, b.history);
    let fa = a.final_model.flatten();
    let fb = b.final_model.flatten();
    assert!(fa.iter().zip(&fb).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn best_checkpoint_attains_the_minimal_validation_loss() {
    let (train_items, val_items) = build_dataset(&small_spec()).unwrap();
    let outcome = train(GnnModel::new(1), &train_items, &val_items, &small_config(8)).unwrap();
    let best_epoch = outcome.best_epoch.unwrap();
    let min_val = outcome
        .history
        .iter()
        .map(|r| r.val_loss)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(outcome.history[best_epoch].val_loss, min_val);

    let revalidated = mean_loss(&outcome.best_model, &val_items).unwrap();
    assert!((revalidated - min_val).abs() <= 1e-12);
}

#[test]
fn trained_weights_round_trip_through_the_model_file() {
    let (train_items, val_items) = build_dataset(&small_spec()).unwrap();
    let outcome = train(GnnModel::new(1), &train_items, &val_items, &small_config(3)).unwrap();
    let path = temp_path("roundtrip.json");
    save_model(&outcome.final_model, &path).unwrap();
    let loaded = load_model(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let a = outcome.final_model.flatten();
    let b = loaded.flatten();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn empty_corpora_are_rejected() {
    let (train_items, val_items) = build_dataset(&small_spec()).unwrap();
    assert!(train(GnnModel::new(1), &[], &val_items, &small_config(2)).is_err());
    assert!(train(GnnModel::new(1), &train_items, &[], &small_config(2)).is_err());
}

#[test]
fn extreme_learning_rates_saturate_instead_of_diverging() {
    // Bounded activations and the guarded loss keep every recorded value
    // finite even under an absurd step size; the run completes.
    let (train_items, val_items) = build_dataset(&small_spec()).unwrap();
    let cfg = TrainConfig {
        learning_rate: 1e12,
        ..small_config(3)
    };
    let outcome = train(GnnModel::new(1), &train_items, &val_items, &cfg).unwrap();
    for record in &outcome.history {
        assert!(record.train_loss.is_finite());
        assert!(record.val_loss.is_finite());
    }
}

#[test]
fn corrupt_parameters_report_a_numerical_error() {
    let (train_items, val_items) = build_dataset(&small_spec()).unwrap();
    let mut model = GnnModel::new(1);
    let mut flat = model.flatten();
    flat[100] = f64::NAN;
    model.assign_flat(&flat).unwrap();
    let err = train(model, &train_items, &val_items, &small_config(2)).unwrap_err();
    assert!(err.is_numerical(), "unexpected error class: {err}");
}
