//! Extend a short trajectory with constant turn rate and velocity.

use trajpost::generation::extend_trajectory;
use trajpost::geometry::Point2;

fn main() -> trajpost::Result<()> {
    // 2 s on a circle of radius 30 at 6 m/s
    let (r, v) = (30.0, 6.0);
    let on_circle = |t: f64| {
        let a = v * t / r;
        Point2::new(r * a.sin(), r * (1.0 - a.cos()))
    };
    let short: Vec<(f64, Point2)> = (1..=20).map(|k| k as f64 * 0.1).map(|t| (t, on_circle(t))).collect();
    let long = extend_trajectory(&short, 5.0, 0.1)?;
    println!("{} points extended to {}", short.len(), long.len());
    for (t, p) in long.iter().step_by(10) {
        let exact = on_circle(*t);
        println!("t = {t:.1}: ({:>7.3}, {:>7.3}) off the circle by {:.1e}", p.x, p.y, p.distance(&exact));
    }
    Ok(())
}
