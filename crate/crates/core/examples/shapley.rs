//! Exact, closed-form and Monte-Carlo Shapley attributions for one row.

use std::path::Path;

use posthoc::load_dataset;
use posthoc::local::{shapley_exact, shapley_linear, shapley_mc_all};
use posthoc::models::load_model;

fn main() -> posthoc::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let (data, _) = load_dataset(root.join("synthetic.csv"), None)?.split_target("y")?;
    let x = data.row(4).to_vec();

    let glm = load_model(root.join("glm.json"))?;
    let exact = shapley_exact(&glm, &data, &x)?;
    let linear = shapley_linear(glm.as_glm().unwrap(), &data, &x)?;
    let mc = shapley_mc_all(&glm, &data, &x, 4000, 7)?;
    println!(
        "{:<8} {:>10} {:>10} {:>10} {:>8}",
        "feature", "exact", "linear", "mc", "mc s.e."
    );
    for j in 0..data.n_cols() {
        println!(
            "{:<8} {:>10.4} {:>10.4} {:>10.4} {:>8.4}",
            data.name(j),
            exact.phis[j],
            linear.phis[j],
            mc.phis[j],
            mc.std_errors.as_ref().unwrap()[j]
        );
    }
    println!(
        "base {:.4} + sum(phi) {:.4} = prediction {:.4}",
        exact.base,
        exact.phis.iter().sum::<f64>(),
        exact.prediction
    );
    println!("efficiency gap {:.2e}", exact.efficiency_gap());
    Ok(())
}
