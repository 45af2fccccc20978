//! Partial dependence, ICE and centred ICE curves for the bundled expression model.

use std::path::Path;

use posthoc::global::{center_curves, ice_curves, ipd_importance, pdp_curve, IceSample};
use posthoc::models::load_model;
use posthoc::{load_dataset, Grid};

fn main() -> posthoc::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let (data, _) = load_dataset(root.join("synthetic.csv"), None)?.split_target("y")?;
    let model = load_model(root.join("expression.json"))?;

    let j = data.column_index("x2")?;
    let grid = Grid::quantiles(&data, j, 7)?;
    let pdp = pdp_curve(&model, &data, j, &grid)?;
    println!("PDP of x2:");
    for (g, v) in grid.points().iter().zip(pdp.aggregate().unwrap()) {
        println!("  {g:>8.3}  {v:>8.3}");
    }

    let ice = ice_curves(
        &model,
        &data,
        j,
        &grid,
        &IceSample::Indices(vec![0, 1, 2, 3]),
    )?;
    let centred = center_curves(&ice, 0)?;
    for (i, row) in centred
        .instances()
        .unwrap()
        .iter()
        .zip(centred.matrix().unwrap())
    {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:7.2}")).collect();
        println!("  c-ICE row {i}: {}", cells.join(" "));
    }

    for name in ["x1", "x2", "x3", "region"] {
        let k = data.column_index(name)?;
        let curve = pdp_curve(&model, &data, k, &Grid::default_for(&data, k)?)?;
        println!("IPD {name}: {:.4}", ipd_importance(&curve, data.kind(k))?);
    }
    Ok(())
}
