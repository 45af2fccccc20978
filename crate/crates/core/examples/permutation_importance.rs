//! Permutation importance, per feature and per group, for the bundled expression model.

use std::path::Path;

use posthoc::importance::{pfi, pfi_grouped, FeatureGroup, PfiConfig};
use posthoc::models::load_model;
use posthoc::{load_dataset, LossKind};

fn main() -> posthoc::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let (data, y) = load_dataset(root.join("synthetic.csv"), None)?.split_target("y")?;
    let model = load_model(root.join("expression.json"))?;
    let cfg = PfiConfig::new(LossKind::Mse, 42).repeats(10);

    let report = pfi(&model, &data, &y, &cfg)?;
    println!("baseline MSE {:.4}", report.baseline_error);
    for e in &report.entries {
        println!("  {:<8} {:.3}", e.name, e.fi);
    }

    let groups = vec![
        FeatureGroup::new(
            "signal",
            vec![data.column_index("x2")?, data.column_index("x3")?],
        ),
        FeatureGroup::new(
            "other",
            vec![data.column_index("x1")?, data.column_index("region")?],
        ),
    ];
    let grouped = pfi_grouped(&model, &data, &y, &groups, &cfg)?;
    for e in &grouped.entries {
        println!("  group {:<8} {:.3}", e.name, e.fi);
    }
    Ok(())
}
