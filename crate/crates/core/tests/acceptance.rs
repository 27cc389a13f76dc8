//! Acceptance suite. Each criterion prints one PASS/FAIL line with its runtime;
//! the process exits non-zero if any criterion fails.

mod common;

use std::f64::consts::TAU;
use std::fs;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trajpost::annotation::{exit_passages, label_exit_taken, label_future_trajectory, IntentionKind};
use trajpost::autotune::{hinge_objective, hinge_subgradient, tune_weights, TunerConfig, TuningExample};
use trajpost::costing::{self, posteriors, rank_intentions, CostWeights, IntentionCandidates, SubCosts};
use trajpost::evaluation::{ade, fde, gaussian_nll, mse, GaussianPoint};
use trajpost::generation::{
    generate_candidates, load_priors, realize_trajectory, GenerationConfig, Intention, PathCandidate, SpeedProfile,
    TrajectoryPoint,
};
use trajpost::geometry::{Curve, Point2};
use trajpost::io::time_key;
use trajpost::scene::{load_scene, parse_obstacle_log, EgoPlan, MapGraph};

// Tolerances, pinned.
const POSTERIOR_TOL: f64 = 1e-9;
const FD_TOL: f64 = 1e-4;
const FD_STEP: f64 = 1e-6;
const KINK_GUARD: f64 = 1e-3;
const PLANTED_LOSS_TOL: f64 = 1e-6;
const PLANTED_RANK_RATE: f64 = 0.95;
const ARC_TOL: f64 = 1e-9;
const ORACLE_DT: f64 = 1e-5;
const COST_TOL: f64 = 1e-10;
const CIRCLE_REL_TOL: f64 = 0.005;
const METRIC_TOL: f64 = 1e-10;
const NLL_TOL: f64 = 1e-12;
const LABEL_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn posterior_contract() -> Outcome {
    let scene = load_scene(
        &common::fixture("obstacle_log.jsonl"),
        &common::fixture("intersection_map.json"),
        Some(&common::fixture("ego_plan.jsonl")),
    )
    .map_err(|e| e.to_string())?;
    let table = load_priors(&common::fixture("priors.jsonl")).map_err(|e| e.to_string())?;
    let priors = &table[&("veh_left".to_string(), time_key(0.0))];
    let expected: Vec<(&str, f64)> = vec![("E_north", 0.4), ("E_west", 0.4), ("E_east", 0.2)];
    for ((id, p), got) in expected.iter().zip(priors) {
        check(got.intention_id == *id && (got.prior - p).abs() < 1e-15, || {
            format!("fixture prior {} = {}", got.intention_id, got.prior)
        })?;
    }

    let track = scene.tracks.iter().find(|t| t.obstacle_id() == "veh_left").unwrap();
    let state = track.state_at(0.0).unwrap();
    let cfg = GenerationConfig::default();
    let weights = CostWeights::default_for_points(cfg.step_count());
    let mut groups = Vec::new();
    for p in priors {
        let intention = Intention::resolve(&p.intention_id, &scene.map).map_err(|e| e.to_string())?;
        let candidates =
            generate_candidates(&p.intention_id, &intention, &state, &scene.map, &cfg).map_err(|e| e.to_string())?;
        groups.push(IntentionCandidates {
            intention_id: p.intention_id.clone(),
            prior: p.prior,
            candidates,
        });
    }
    let result =
        rank_intentions("veh_left", 0.0, &groups, scene.ego.as_ref(), &weights).map_err(|e| e.to_string())?;
    check(result.intentions.len() == 3, || "expected three ranked intentions".into())?;
    let sum: f64 = result.intentions.iter().map(|i| i.posterior).sum();
    check((sum - 1.0).abs() < POSTERIOR_TOL, || format!("posterior sum {sum}"))?;

    // Equal min-costs: the same candidate set under every intention.
    let shared = groups[0].candidates.clone();
    let equalized: Vec<_> = groups
        .iter()
        .map(|g| IntentionCandidates {
            candidates: shared.clone(),
            ..g.clone()
        })
        .collect();
    let eq = rank_intentions("veh_left", 0.0, &equalized, scene.ego.as_ref(), &weights).map_err(|e| e.to_string())?;
    for (i, (_, p)) in eq.intentions.iter().zip(&expected) {
        check((i.posterior - p).abs() < POSTERIOR_TOL, || {
            format!("{} posterior {} vs prior {p}", i.intention_id, i.posterior)
        })?;
    }
    let direct = posteriors(&[0.4, 0.4, 0.2], &[7.5, 7.5, 7.5]);
    for (q, p) in direct.iter().zip([0.4, 0.4, 0.2]) {
        check((q - p).abs() < POSTERIOR_TOL, || format!("posterior {q} vs prior {p}"))?;
    }
    Ok(format!("sum = 1 + {:.1e}", sum - 1.0))
}

fn rand_sub(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> SubCosts {
    SubCosts {
        c_acc: rng.gen_range(lo..hi),
        c_centripetal: rng.gen_range(lo..hi),
        c_collision: rng.gen_range(lo..hi),
    }
}

fn random_examples(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<TuningExample> {
    (0..n)
        .map(|i| TuningExample {
            obstacle_id: format!("o{i}"),
            anchor_time: 0.0,
            gt: rand_sub(rng, 0.0, 3.0),
            candidates: (0..k).map(|_| rand_sub(rng, 0.0, 3.0)).collect(),
        })
        .collect()
}

fn rand_theta(rng: &mut ChaCha8Rng) -> [f64; 3] {
    [rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0)]
}

fn hinge_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let delta = 0.1;
    let ex = random_examples(&mut rng, 20, 6);
    let total: usize = ex.iter().map(|e| e.candidates.len()).sum();
    let at_zero = hinge_objective(&ex, &[0.0; 3], delta);
    check((at_zero - total as f64 * delta).abs() < 1e-12, || format!("L(0) = {at_zero}"))?;

    // zero exactly when every candidate clears the ground truth by δ
    let theta = [1.0, 2.0, 3.0];
    let clear = |gt: SubCosts, gap: f64| TuningExample {
        obstacle_id: "c".into(),
        anchor_time: 0.0,
        gt,
        candidates: vec![SubCosts {
            c_acc: gt.c_acc + gap,
            ..gt
        }],
    };
    let gt = SubCosts {
        c_acc: 1.0,
        c_centripetal: 1.0,
        c_collision: 1.0,
    };
    check(hinge_objective(&[clear(gt, 0.1)], &theta, delta) == 0.0, || "margin exactly δ is not zero".into())?;
    check(hinge_objective(&[clear(gt, 0.2)], &theta, delta) == 0.0, || "clear margin is not zero".into())?;
    check(hinge_objective(&[clear(gt, 0.05)], &theta, delta) > 0.0, || "short margin is zero".into())?;

    for _ in 0..100 {
        let (a, b) = (rand_theta(&mut rng), rand_theta(&mut rng));
        let lam: f64 = rng.gen_range(0.0..1.0);
        let mix = [0, 1, 2].map(|i| lam * a[i] + (1.0 - lam) * b[i]);
        let (la, lb, lm) = (
            hinge_objective(&ex, &a, delta),
            hinge_objective(&ex, &b, delta),
            hinge_objective(&ex, &mix, delta),
        );
        check(la >= 0.0 && lb >= 0.0, || "negative loss".into())?;
        check(lm <= lam * la + (1.0 - lam) * lb + 1e-9, || {
            format!("convexity fails at {a:?}, {b:?}, λ={lam}")
        })?;
    }
    Ok(format!("L(0) = {total}·δ, 100 convexity checks"))
}

fn subgradient_vs_fd() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let delta = 0.1;
    let mut done = 0;
    let mut worst: f64 = 0.0;
    while done < 50 {
        let ex = random_examples(&mut rng, 5, 4);
        let theta = [rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0)];
        let near_kink = ex.iter().any(|e| {
            let g = e.gt.as_array();
            e.candidates.iter().any(|c| {
                let c = c.as_array();
                let m: f64 = (0..3).map(|i| theta[i] * (g[i] - c[i])).sum::<f64>() + delta;
                m.abs() < KINK_GUARD
            })
        });
        if near_kink {
            continue;
        }
        let g = hinge_subgradient(&ex, &theta, delta);
        for i in 0..3 {
            let mut up = theta;
            let mut dn = theta;
            up[i] += FD_STEP;
            dn[i] -= FD_STEP;
            let fd = (hinge_objective(&ex, &up, delta) - hinge_objective(&ex, &dn, delta)) / (2.0 * FD_STEP);
            worst = worst.max((fd - g[i]).abs());
            check((fd - g[i]).abs() < FD_TOL, || format!("component {i}: fd {fd} vs {}", g[i]))?;
        }
        done += 1;
    }
    Ok(format!("50 configurations, worst gap {worst:.1e}"))
}

/// Candidates whose sub-cost excess over the ground truth has margin ≥ 0.5
/// under θ* but violates the margin under θ = (1,1,1), so tuning has to move
/// toward θ*.
fn planted_examples(rng: &mut ChaCha8Rng, n: usize, k: usize, theta_star: [f64; 3]) -> Vec<TuningExample> {
    (0..n)
        .map(|i| {
            let gt = rand_sub(rng, 0.5, 2.0);
            let g = gt.as_array();
            let candidates = (0..k)
                .map(|_| loop {
                    let d = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                    let margin: f64 = (0..3).map(|j| theta_star[j] * d[j]).sum();
                    let c = [g[0] + d[0], g[1] + d[1], g[2] + d[2]];
                    let at_init: f64 = d.iter().sum();
                    if margin >= 0.5 && at_init < 0.1 && c.iter().all(|v| *v >= 0.0) {
                        break SubCosts {
                            c_acc: c[0],
                            c_centripetal: c[1],
                            c_collision: c[2],
                        };
                    }
                })
                .collect();
            TuningExample {
                obstacle_id: format!("p{i}"),
                anchor_time: 0.0,
                gt,
                candidates,
            }
        })
        .collect()
}

fn planted_recovery() -> Outcome {
    let theta_star = [1.0, 2.0, 3.0];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let train = planted_examples(&mut rng, 200, 5, theta_star);
    let held_out = planted_examples(&mut rng, 100, 5, theta_star);
    let cfg = TunerConfig {
        delta: 0.1,
        learning_rate: 0.01,
        max_iters: 20_000,
        convergence_tol: 0.0,
        seed: 0,
        theta_init: [1.0, 1.0, 1.0],
    };
    check(hinge_objective(&train, &cfg.theta_init, cfg.delta) > 0.0, || "θ₀ already separates".into())?;
    let out = tune_weights(&train, &cfg).map_err(|e| e.to_string())?;
    check(out.final_loss() < PLANTED_LOSS_TOL, || format!("final loss {}", out.final_loss()))?;
    let ranked_first = held_out
        .iter()
        .filter(|e| {
            let gt = e.gt.weighted(&out.theta);
            e.candidates.iter().all(|c| gt < c.weighted(&out.theta))
        })
        .count();
    let rate = ranked_first as f64 / held_out.len() as f64;
    check(rate >= PLANTED_RANK_RATE, || format!("ground truth ranked first in {rate}"))?;
    Ok(format!(
        "loss {:.1e} after {} iterations, θ = ({:.3}, {:.3}, {:.3}), held-out rate {rate}",
        out.final_loss(),
        out.iterations,
        out.theta[0],
        out.theta[1],
        out.theta[2]
    ))
}

/// Compensated running sum.
#[derive(Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Adds the distance travelled over `[t0, t1]` under the clamped speed, by
/// Simpson steps of at most `dt`. Simpson is exact on each unclamped piece and
/// only the step containing a clamp crossing carries error.
fn integrate_distance(acc: &mut Kahan, v0: f64, a: f64, v_max: f64, t0: f64, t1: f64, dt: f64) {
    let speed = |t: f64| (v0 + a * t).clamp(0.0, v_max);
    let steps = ((t1 - t0) / dt).ceil() as usize;
    let h = (t1 - t0) / steps as f64;
    for i in 0..steps {
        let ta = t0 + i as f64 * h;
        // same expression as the next step's start, so steps tile [t0, t1] exactly
        let tb = if i + 1 == steps { t1 } else { t0 + (i + 1) as f64 * h };
        acc.add((tb - ta) * (speed(ta) + 4.0 * speed(0.5 * (ta + tb)) + speed(tb)) / 6.0);
    }
}

fn sampling_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let line = Curve::new(vec![Point2::new(0.0, 0.0), Point2::new(1000.0, 0.0)]).unwrap();
    let path = PathCandidate {
        intention_id: "line".into(),
        lane_ids: vec!["L".into()],
        curve: line,
    };
    let v_max = 25.0;
    let mut worst: f64 = 0.0;
    let mut clamps = (0, 0);
    for i in 0..20 {
        // alternate profiles that stop and profiles that saturate
        let (v0, accel) = match i % 3 {
            0 => (rng.gen_range(0.0..6.0), rng.gen_range(-6.0..-1.0)),
            1 => (rng.gen_range(18.0..25.0), rng.gen_range(1.0..4.0)),
            _ => (rng.gen_range(0.0..25.0), rng.gen_range(-6.0..4.0)),
        };
        let profile = SpeedProfile {
            v0,
            accel,
            duration: 8.0,
            resolution: 0.1,
            v_max,
        };
        if v0 + accel * 8.0 <= 0.0 {
            clamps.0 += 1;
        }
        if v0 + accel * 8.0 >= v_max {
            clamps.1 += 1;
        }
        let traj = realize_trajectory(&path, &profile, 0.0);
        let mut oracle = Kahan::default();
        let mut prev_t = 0.0;
        for p in &traj.points {
            integrate_distance(&mut oracle, v0, accel, v_max, prev_t, p.t, ORACLE_DT);
            prev_t = p.t;
            let err = (p.position.x - oracle.sum).abs();
            worst = worst.max(err);
            check(err < ARC_TOL, || format!("profile {i} (v0 {v0:?}, a {accel:?}) at t={}: {} vs {}", p.t, p.position.x, oracle.sum))?;
        }
    }
    check(clamps.0 > 0 && clamps.1 > 0, || "no clamped profiles sampled".into())?;
    Ok(format!(
        "20 profiles ({} stop, {} saturate), worst {worst:.1e}",
        clamps.0, clamps.1
    ))
}

fn ego_oracle(poses: &[(f64, Point2)], t: f64) -> Point2 {
    if t <= poses[0].0 {
        return poses[0].1;
    }
    for w in poses.windows(2) {
        if t <= w[1].0 {
            let u = (t - w[0].0) / (w[1].0 - w[0].0);
            return Point2::new(
                w[0].1.x + u * (w[1].1.x - w[0].1.x),
                w[0].1.y + u * (w[1].1.y - w[0].1.y),
            );
        }
    }
    poses[poses.len() - 1].1
}

fn cost_formulas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let n = rng.gen_range(5..100);
        let pts: Vec<TrajectoryPoint> = (1..=n)
            .map(|k| TrajectoryPoint {
                t: k as f64 * 0.1,
                position: Point2::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)),
                heading: rng.gen_range(-3.0..3.0),
                speed: rng.gen_range(0.0..25.0),
                curvature: rng.gen_range(-0.2..0.2),
                accel: rng.gen_range(-6.0..4.0),
            })
            .collect();
        let poses: Vec<(f64, Point2)> = (0..25)
            .map(|k| {
                (
                    k as f64 * 0.5,
                    Point2::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)),
                )
            })
            .collect();
        let start = rng.gen_range(0.0..3.0);
        let (z1, z2) = (rng.gen_range(1.0..1e4), rng.gen_range(1.0..100.0));
        let ego = EgoPlan::new(poses.clone()).unwrap();

        let mut acc = 0.0;
        let mut cent = 0.0;
        let mut coll = 0.0;
        for p in &pts {
            acc += p.accel * p.accel;
            let lat = p.speed * p.speed * p.curvature;
            cent += lat * lat;
            let q = ego_oracle(&poses, start + p.t);
            let d2 = (p.position.x - q.x).powi(2) + (p.position.y - q.y).powi(2);
            coll += (-d2).exp();
        }
        let (cent, coll) = (cent / z1, coll / z2);
        let got = (
            costing::cost_acc(&pts),
            costing::cost_centripetal(&pts, z1),
            costing::cost_collision(&pts, start, Some(&ego), z2),
        );
        for (name, g, o) in [("acc", got.0, acc), ("centripetal", got.1, cent), ("collision", got.2, coll)] {
            check((g - o).abs() <= COST_TOL * o.abs().max(1.0), || format!("{name}: {g} vs {o}"))?;
        }
    }

    // circle of radius 50 in 36 vertices, constant 10 m/s
    let r = 50.0;
    let ring: Vec<Point2> = (0..=36)
        .map(|k| {
            let a = TAU * k as f64 / 36.0;
            Point2::new(r * a.cos(), r * a.sin())
        })
        .collect();
    let path = PathCandidate {
        intention_id: "ring".into(),
        lane_ids: vec!["ring".into()],
        curve: Curve::new(ring).unwrap(),
    };
    let profile = SpeedProfile {
        v0: 10.0,
        accel: 0.0,
        duration: 8.0,
        resolution: 0.1,
        v_max: 25.0,
    };
    let traj = realize_trajectory(&path, &profile, 0.0);
    let n = traj.points.len() as f64;
    let per_point = costing::cost_centripetal(&traj.points, 1.0) / n;
    let analytic = (10.0_f64 * 10.0 / r).powi(2);
    let rel = (per_point - analytic).abs() / analytic;
    check(rel < CIRCLE_REL_TOL, || format!("circle: {per_point} vs {analytic}"))?;
    Ok(format!("50 random trajectories, circle off by {:.2}%", rel * 100.0))
}

fn metric_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let n = rng.gen_range(30..80);
        let grid = |rng: &mut ChaCha8Rng| -> Vec<(f64, Point2)> {
            (1..=n)
                .map(|k| {
                    (
                        k as f64 * 0.1,
                        Point2::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)),
                    )
                })
                .collect()
        };
        let (p, q) = (grid(&mut rng), grid(&mut rng));
        let h = rng.gen_range(0.1..(n as f64 * 0.1));
        let covered: Vec<f64> = p
            .iter()
            .zip(&q)
            .filter(|(a, _)| a.0 <= h + 1e-9)
            .map(|(a, b)| ((a.1.x - b.1.x).powi(2) + (a.1.y - b.1.y).powi(2)).sqrt())
            .collect();
        let ade_o = covered.iter().sum::<f64>() / covered.len() as f64;
        let fde_o = *covered.last().unwrap();
        let mse_o = p
            .iter()
            .zip(&q)
            .map(|(a, b)| (a.1.x - b.1.x).powi(2) + (a.1.y - b.1.y).powi(2))
            .sum::<f64>()
            / n as f64;
        let a = ade(&p, &q, h).map_err(|e| e.to_string())?;
        let f = fde(&p, &q, h).map_err(|e| e.to_string())?;
        let pp: Vec<Point2> = p.iter().map(|x| x.1).collect();
        let qq: Vec<Point2> = q.iter().map(|x| x.1).collect();
        let m = mse(&pp, &qq).map_err(|e| e.to_string())?;
        check((a - ade_o).abs() < METRIC_TOL, || format!("ade {a} vs {ade_o}"))?;
        check((f - fde_o).abs() < METRIC_TOL, || format!("fde {f} vs {fde_o}"))?;
        check((m - mse_o).abs() < METRIC_TOL * mse_o.max(1.0), || format!("mse {m} vs {mse_o}"))?;
    }
    let g = GaussianPoint::new(0.0, 0.0, 1.0, 1.0, 0.0).unwrap();
    let nll = gaussian_nll(&[g], &[Point2::new(0.0, 0.0)]).map_err(|e| e.to_string())?;
    check((nll - TAU.ln()).abs() < NLL_TOL, || format!("nll {nll}"))?;
    Ok("50 random sequence pairs, nll = log(2π)".into())
}

fn end_to_end() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    common::run_fixture_pipeline(a.path())?;
    common::run_fixture_pipeline(b.path())?;
    for name in common::OUTPUTS {
        let x = fs::read(a.path().join(name)).map_err(|e| e.to_string())?;
        let y = fs::read(b.path().join(name)).map_err(|e| e.to_string())?;
        check(x == y, || format!("{name} differs between runs"))?;
        let golden = fs::read(common::fixture("golden").join(name)).map_err(|e| format!("{name}: {e}"))?;
        check(x == golden, || format!("{name} differs from golden"))?;
    }
    Ok("four outputs identical across runs and to golden".into())
}

const EXIT_MAP: &str = r#"{
    "lanes": [
        {"id": "in", "centerline": [[0,-30],[0,0]], "successors": ["east", "north"]},
        {"id": "east", "centerline": [[0,0],[30,0]], "successors": []},
        {"id": "north", "centerline": [[0,0],[0,30]], "successors": []},
        {"id": "side", "centerline": [[2,-12],[2,-8]], "successors": []}
    ],
    "exits": [
        {"id": "X", "x": 2, "y": -10, "heading": 1.5707963267948966, "lane_id": "side"},
        {"id": "E", "x": 20, "y": 0, "heading": 0, "lane_id": "east"},
        {"id": "N", "x": 0, "y": 10, "heading": 1.5707963267948966, "lane_id": "north"}
    ]
}"#;

fn annotation_fidelity() -> Outcome {
    // irregular random tracks: label points must lie on the interpolant
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let mut log = String::new();
        let mut t = 0.0;
        let mut raw = Vec::new();
        for _ in 0..60 {
            let (x, y) = (rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            log.push_str(&format!(
                "{{\"obstacle_id\":\"r\",\"t\":{t},\"x\":{x},\"y\":{y},\"heading\":0,\"speed\":1}}\n"
            ));
            raw.push((t, Point2::new(x, y)));
            t += rng.gen_range(0.05..0.3);
        }
        let track = parse_obstacle_log(&log, "random").unwrap().remove(0);
        let anchor = raw[5].0 + 0.037;
        let label = label_future_trajectory(&track, anchor, 3.0, 0.1).map_err(|e| e.to_string())?;
        for (dt, p) in &label.future_points {
            let abs_t = anchor + dt;
            let w = raw.windows(2).find(|w| w[0].0 <= abs_t && abs_t <= w[1].0).unwrap();
            let u = (abs_t - w[0].0) / (w[1].0 - w[0].0);
            let on = Point2::new(
                w[0].1.x + u * (w[1].1.x - w[0].1.x),
                w[0].1.y + u * (w[1].1.y - w[0].1.y),
            );
            let err = ((p.x - on.x).powi(2) + (p.y - on.y).powi(2)).sqrt();
            check(err < LABEL_TOL, || format!("label point off the track by {err}"))?;
        }
    }

    // hand-built: north at 10 m/s to the origin, then east at 10 m/s
    let map = MapGraph::from_json_str(EXIT_MAP, "exit map").map_err(|e| e.to_string())?;
    let log = "{\"obstacle_id\":\"h\",\"t\":0,\"x\":0,\"y\":-20,\"heading\":1.5707963267948966,\"speed\":10}\n\
               {\"obstacle_id\":\"h\",\"t\":2,\"x\":0,\"y\":0,\"heading\":0,\"speed\":10}\n\
               {\"obstacle_id\":\"h\",\"t\":4,\"x\":20,\"y\":0,\"heading\":0,\"speed\":10}\n";
    let track = parse_obstacle_log(log, "hand").unwrap().remove(0);
    let passages = exit_passages(&track, 0.0, &map, 4.0, 3.0);
    // X at lateral offset 2 is entered when (y + 10)² = 9 − 4, y = −20 + 10t
    let t_x = 1.0 - 5.0_f64.sqrt() / 10.0;
    // E is entered when the eastbound leg is 3 m short of x = 20
    let t_e = 3.7;
    let expected = [("X".to_string(), t_x), ("E".to_string(), t_e)];
    check(passages.len() == 2, || format!("passages {passages:?}"))?;
    for ((id, t), (eid, et)) in passages.iter().zip(&expected) {
        check(id == eid && (t - et).abs() < LABEL_TOL, || format!("{id} at {t}, expected {eid} at {et}"))?;
    }
    let label = label_exit_taken(&track, 0.0, &map, 4.0, 3.0).ok_or("no exit label")?;
    check(label.kind == IntentionKind::ExitTaken("X".into()), || format!("{:?}", label.kind))?;
    let later = label_exit_taken(&track, 1.5, &map, 2.5, 3.0).ok_or("no exit label after X")?;
    check(later.kind == IntentionKind::ExitTaken("E".into()), || format!("{:?}", later.kind))?;
    check(label_exit_taken(&track, 0.0, &map, 3.6, 3.0).map(|l| l.kind) == Some(IntentionKind::ExitTaken("X".into())), || {
        "horizon cut".into()
    })?;
    check(label_exit_taken(&track, 1.5, &map, 2.1, 3.0).is_none(), || "E captured before entry".into())?;
    Ok("20 random tracks on the interpolant, passages X and E exact".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("posterior contract", Duration::from_secs(1), posterior_contract),
        ("hinge objective properties", Duration::from_secs(5), hinge_properties),
        ("subgradient vs finite differences", Duration::from_secs(5), subgradient_vs_fd),
        ("planted-weights recovery", Duration::from_secs(60), planted_recovery),
        ("sampling exactness", Duration::from_secs(10), sampling_exactness),
        ("cost formulas", Duration::from_secs(5), cost_formulas),
        ("metric correctness", Duration::from_secs(5), metric_correctness),
        ("end-to-end determinism", Duration::from_secs(30), end_to_end),
        ("annotation fidelity", Duration::from_secs(5), annotation_fidelity),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *limit => Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {}. {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}. {name} ({elapsed:.2?}): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
