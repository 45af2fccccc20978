//! Load a JSON tree ensemble, score rows and draw the step-shaped PDP of one
//! feature.

use std::path::Path;

use posthoc::global::pdp_curve;
use posthoc::models::load_tree_ensemble;
use posthoc::{load_dataset, Grid, Predictor};

fn main() -> posthoc::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let (data, y) = load_dataset(root.join("synthetic.csv"), None)?.split_target("y")?;
    let trees = load_tree_ensemble(root.join("trees.json"))?;
    println!(
        "{} trees, {:?} aggregation, base score {}",
        trees.trees().len(),
        trees.aggregation(),
        trees.base_score()
    );
    for (i, observed) in y.iter().take(3).enumerate() {
        println!(
            "row {i}: prediction {:.3}, observed {observed:.3}",
            trees.predict_row(data.row(i))?
        );
    }

    let j = data.column_index("x2")?;
    println!("split thresholds on x2: {:?}", trees.thresholds(j));
    let grid = Grid::quantiles(&data, j, 9)?;
    let pdp = pdp_curve(&trees, &data, j, &grid)?;
    println!("PDP of x2:");
    for (t, v) in grid.points().iter().zip(pdp.aggregate().unwrap()) {
        println!("  {t:>7.3}  {v:>7.3}");
    }
    Ok(())
}
