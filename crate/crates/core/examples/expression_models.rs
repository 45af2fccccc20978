//! Parse formulas into predictors and report positioned syntax errors.

use posthoc::models::expr::parse;
use posthoc::models::parse_expression;
use posthoc::Predictor;

fn main() -> posthoc::Result<()> {
    let model = parse_expression("0.2*x1 - 5*x2 + 10*x2*step(x3)", 3)?;
    for x in [[1.0, 1.0, -0.5], [1.0, 1.0, 0.5], [0.0, -2.0, 0.0]] {
        println!("f({x:?}) = {}", model.predict_row(&x)?);
    }
    let e = parse("exp(-x1^2 / 2) * (x2 > 0)", 2).unwrap();
    println!("pretty-printed: {e}");
    println!("at (1, 1): {}", e.eval(&[1.0, 1.0]).unwrap());

    for bad in ["1 + * 2", "log(x1", "x4 + 1", "sqrt(2)"] {
        let err = parse(bad, 3).unwrap_err();
        println!("  {bad}");
        println!("  {}^ {err}", " ".repeat(err.position));
    }
    Ok(())
}
