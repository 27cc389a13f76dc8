//! Recover cost weights from synthetic data generated under known weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trajpost::autotune::{hinge_objective, tune_weights, TunerConfig, TuningExample};
use trajpost::costing::SubCosts;

fn main() -> trajpost::Result<()> {
    let planted = [1.0, 2.0, 3.0];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let examples: Vec<TuningExample> = (0..200)
        .map(|i| {
            let gt = [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)];
            let candidates = (0..5)
                .map(|_| loop {
                    let d: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                    let margin: f64 = (0..3).map(|j| planted[j] * d[j]).sum();
                    if margin >= 0.5 && d.iter().sum::<f64>() < 0.1 {
                        break SubCosts {
                            c_acc: gt[0] + d[0],
                            c_centripetal: gt[1] + d[1],
                            c_collision: gt[2] + d[2],
                        };
                    }
                })
                .collect();
            TuningExample {
                obstacle_id: format!("synthetic_{i}"),
                anchor_time: 0.0,
                gt: SubCosts {
                    c_acc: gt[0],
                    c_centripetal: gt[1],
                    c_collision: gt[2],
                },
                candidates,
            }
        })
        .collect();

    let cfg = TunerConfig {
        max_iters: 5000,
        ..Default::default()
    };
    println!("loss at θ₀ = {:?}: {:.4}", cfg.theta_init, hinge_objective(&examples, &cfg.theta_init, cfg.delta));
    let out = tune_weights(&examples, &cfg)?;
    let t = out.theta;
    println!("after {} iterations: loss {:.2e}", out.iterations, out.final_loss());
    println!("θ = ({:.3}, {:.3}, {:.3}); planted direction {planted:?}", t[0], t[1], t[2]);
    Ok(())
}
