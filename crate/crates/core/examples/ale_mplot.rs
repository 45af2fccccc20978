//! ALE versus M-plot on correlated inputs: the M-plot mixes in the effect of
//! the correlated feature, the ALE curve does not.

use posthoc::global::{ale_curve, mplot_curve};
use posthoc::{Dataset, FnPredictor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> posthoc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows: Vec<Vec<f64>> = (0..400)
        .map(|_| {
            let a: f64 = rng.random_range(-1.0..1.0);
            vec![a, a + 0.1 * rng.random_range(-1.0..1.0)]
        })
        .collect();
    let data = Dataset::numeric(&["x1", "x2"], &rows)?;
    let model = FnPredictor::new(2, |x: &[f64]| x[0] + 4.0 * x[1]);

    let ale = ale_curve(&model, &data, 0, 8)?;
    let mplot = mplot_curve(&model, &data, 0, 8)?;
    println!("ALE of x1 (true slope 1):");
    for (z, v) in ale.grid.points().iter().zip(ale.aggregate().unwrap()) {
        println!("  {z:>7.3}  {v:>7.3}");
    }
    println!("M-plot of x1 (absorbs the x2 effect):");
    for (z, v) in mplot.grid.points().iter().zip(mplot.aggregate().unwrap()) {
        println!("  {z:>7.3}  {v:>7.3}");
    }
    Ok(())
}
