//! Sparse LIME surrogate and a LIVE neighbourhood around one row.

use std::path::Path;

use posthoc::load_dataset;
use posthoc::local::{lime_explain, live_neighborhood, LimeConfig};
use posthoc::models::load_model;

fn main() -> posthoc::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let (data, _) = load_dataset(root.join("synthetic.csv"), None)?.split_target("y")?;
    let model = load_model(root.join("trees.json"))?;
    let x = data.row(10).to_vec();

    let fit = lime_explain(&model, &data, &x, &LimeConfig::new(3).n_sim(2000).k(3))?;
    println!(
        "LIME surrogate, sigma {:.3}, intercept {:.4}",
        fit.kernel_sigma, fit.intercept
    );
    for (name, coef) in fit.coefficients.iter().filter(|(_, c)| *c != 0.0) {
        println!("  {name:<10} {coef:>9.4}");
    }

    let live = live_neighborhood(&data, &x, 6, 5)?;
    println!("LIVE neighbours of row 10:");
    for (row, &k) in live.data.rows().zip(&live.replaced) {
        let cells: Vec<String> = (0..row.len())
            .map(|j| data.display_value(j, row[j]))
            .collect();
        println!("  replaced {:<7} {}", data.name(k), cells.join(", "));
    }
    Ok(())
}
