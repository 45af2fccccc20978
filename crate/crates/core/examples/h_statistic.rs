//! Interaction strength: the toy insurance model with and without its
//! interaction term, then the full matrix for the bundled expression model.

use std::path::Path;

use posthoc::interaction::{h_matrix, h_pairwise, HSample};
use posthoc::models::{load_model, ToyInteractionModel};
use posthoc::{load_dataset, Dataset, FnPredictor, Predictor};

fn main() -> posthoc::Result<()> {
    let design = Dataset::numeric(
        &["young", "high"],
        &[
            vec![1.0, 1.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 0.0],
        ],
    )?;
    for (label, toy) in [
        ("additive", ToyInteractionModel::additive()),
        ("interaction", ToyInteractionModel::with_interaction()),
    ] {
        let f = FnPredictor::new(2, move |x: &[f64]| toy.predict(x[0] == 1.0, x[1] == 1.0));
        println!(
            "toy {label:<12} H2 = {:.6}",
            h_pairwise(&f, &design, 0, 1, &HSample::Full)?
        );
    }

    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let (data, _) = load_dataset(root.join("synthetic.csv"), None)?.split_target("y")?;
    let model = load_model(root.join("expression.json"))?;
    let features: Vec<usize> = (0..model.arity()).collect();
    let m = h_matrix(
        &model,
        &data,
        &features,
        &HSample::Subsample { size: 120, seed: 9 },
    )?;
    for p in &m.pairs {
        let h = p.h2.map_or("undefined".to_string(), |v| format!("{v:.4}"));
        println!("  {} x {}: {h}", data.name(p.i), data.name(p.j));
    }
    Ok(())
}
