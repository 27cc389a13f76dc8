//! ADE, FDE, MSE and Gaussian NLL on hand-made sequences.

use trajpost::evaluation::{ade, fde, gaussian_nll, mse, GaussianPoint};
use trajpost::geometry::Point2;

fn main() -> trajpost::Result<()> {
    let grid = |f: &dyn Fn(f64) -> Point2| -> Vec<(f64, Point2)> {
        (1..=30).map(|k| k as f64 * 0.1).map(|t| (t, f(t))).collect()
    };
    let truth = grid(&|t| Point2::new(10.0 * t, 0.0));
    let pred = grid(&|t| Point2::new(10.0 * t, 0.3 * t * t));

    for h in [1.0, 3.0] {
        println!("h = {h} s: ADE {:.4} m, FDE {:.4} m", ade(&pred, &truth, h)?, fde(&pred, &truth, h)?);
    }
    let p: Vec<Point2> = pred.iter().map(|x| x.1).collect();
    let q: Vec<Point2> = truth.iter().map(|x| x.1).collect();
    println!("MSE {:.4} m²", mse(&p, &q)?);

    let unit = GaussianPoint::new(0.0, 0.0, 1.0, 1.0, 0.0)?;
    println!("NLL at the mean of a unit Gaussian: {:.6}", gaussian_nll(&[unit], &[Point2::new(0.0, 0.0)])?);
    Ok(())
}
