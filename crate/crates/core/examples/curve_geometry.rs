//! Arc-length evaluation, projection and curvature on a polyline.

use trajpost::geometry::{menger_curvature, Curve, Point2};

fn main() -> trajpost::Result<()> {
    // quarter circle of radius 20, sampled every 10 degrees
    let arc: Vec<Point2> = (0..=9)
        .map(|k| {
            let a = (k as f64 * 10.0).to_radians();
            Point2::new(20.0 * a.cos(), 20.0 * a.sin())
        })
        .collect();
    let curve = Curve::new(arc)?;
    println!("length {:.4} m (exact arc {:.4} m)", curve.length(), 20.0 * std::f64::consts::FRAC_PI_2);

    for s in [0.0, 10.0, 25.0, 40.0] {
        let (p, heading) = curve.point_at_s(s)?;
        println!(
            "s = {s:>5.1}: ({:>7.3}, {:>7.3}) heading {:>6.3} curvature {:.4}",
            p.x,
            p.y,
            heading,
            curve.curvature_at_s(s)
        );
    }

    let q = Point2::new(15.0, 15.0);
    let proj = curve.project_point(&q);
    println!(
        "({}, {}) projects to s = {:.3}, lateral {:.3}",
        q.x, q.y, proj.s, proj.lateral_offset
    );

    let k = menger_curvature(&Point2::new(1.0, 0.0), &Point2::new(0.0, 1.0), &Point2::new(-1.0, 0.0));
    println!("unit circle through three points: curvature {k}");
    Ok(())
}
