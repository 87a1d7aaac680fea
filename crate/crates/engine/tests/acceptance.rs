//! Acceptance suite: every headline criterion runs at its stated tolerance
//! and prints one PASS/FAIL line with its wall time against its budget.
//!
//! `cargo test -p nca-engine --test acceptance -- --nocapture` shows the
//! report. The uncapped cell-size sweep (grids up to 2048²) is ignored by
//! default; run it with `-- --ignored full_cell_size_sweep`.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use futures_util::{SinkExt, StreamExt};
use nca_core::analysis::fixed_point::UniformResidual;
use nca_core::analysis::sweep::{dx_sample_plan, log_spaced, sweep_dt, sweep_dx, SweepReport};
use nca_core::analysis::{estimate_mle, find_fixed_point, FixedPointOptions};
use nca_core::construct::LinearRule;
use nca_core::perception::{Block, K_LAP, K_LAP_X, K_LAP_Y};
use nca_core::rng::{mask_bit, CounterRng};
use nca_core::{
    make_seed, perceive, simulate, CellGrid, Discretization, GridShape, Image, Integrator, RuleWeights, SeedSpec,
    SimSpec, Variant,
};
use nca_engine::io::{decode_state, decode_weights, encode_state, encode_weights};
use nca_engine::service::{router, SessionConfig, WeightStore};
use nca_engine::syntax::parse_values;
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn shape(h: usize, w: usize, c: usize) -> GridShape {
    GridShape::new(h, w, c).unwrap()
}

fn random_grid(h: usize, w: usize, c: usize, seed: u64) -> CellGrid {
    let mut rng = CounterRng::new(seed);
    CellGrid::from_fn(shape(h, w, c), |_, _, _| rng.symmetric(1.0)).unwrap()
}

fn bits(v: &[f32]) -> Vec<u32> {
    v.iter().map(|x| x.to_bits()).collect()
}

fn laplacian_decomposition() -> Outcome {
    for r in 0..3 {
        for c in 0..3 {
            ensure!(K_LAP_X[r][c] + K_LAP_Y[r][c] == K_LAP[r][c], "entry ({r}, {c}) differs");
        }
    }
    Ok("exact on all 9 entries".into())
}

fn stencil_calculus() -> Outcome {
    let rule = RuleWeights::zeros(3, 2, Variant::Noise);
    let disc = Discretization::default();
    let quad = CellGrid::from_fn(shape(11, 11, 3), |x, y, _| (x * x) as f32 + 0.0 * y as f32).unwrap();
    let z = perceive(&quad, &rule, &disc).unwrap();
    let mut lap_err = 0.0f64;
    for y in 1..10 {
        for x in 1..10 {
            for c in 0..3 {
                lap_err = lap_err.max((f64::from(z.get(Block::Laplacian, x, y, c)) - 2.0).abs());
            }
        }
    }
    ensure!(lap_err <= 1e-5, "laplacian of x² off by {lap_err:e}");
    let ramp = CellGrid::from_fn(shape(11, 11, 3), |x, _, _| x as f32).unwrap();
    let z = perceive(&ramp, &rule, &disc).unwrap();
    let mut grad_err = 0.0f64;
    for y in 1..10 {
        for x in 1..10 {
            for c in 0..3 {
                grad_err = grad_err.max((f64::from(z.get(Block::GradX, x, y, c)) - 1.0).abs());
            }
        }
    }
    ensure!(grad_err <= 1e-6, "ramp gradient off by {grad_err:e}");
    Ok(format!("max |err| laplacian {lap_err:e}, gradient {grad_err:e}"))
}

fn rel(a: f32, b: f32) -> f64 {
    let (a, b) = (f64::from(a), f64::from(b));
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn scaling_covariance() -> Outcome {
    let rule = RuleWeights::zeros(4, 2, Variant::Noise);
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let g = random_grid(16, 20, 4, seed);
        let base = perceive(&g, &rule, &Discretization::default()).unwrap();
        for s in [0.5f32, 0.25, 2.0] {
            let z = perceive(&g, &rule, &Discretization::uniform(1.0, s)).unwrap();
            for y in 0..16 {
                for x in 0..20 {
                    for c in 0..4 {
                        worst = worst.max(rel(z.get(Block::GradX, x, y, c), base.get(Block::GradX, x, y, c) / s));
                        worst = worst.max(rel(z.get(Block::GradY, x, y, c), base.get(Block::GradY, x, y, c) / s));
                        worst = worst.max(rel(
                            z.get(Block::Laplacian, x, y, c),
                            base.get(Block::Laplacian, x, y, c) / (s * s),
                        ));
                    }
                }
            }
        }
    }
    ensure!(worst <= 1e-6, "max rel err {worst:e}");
    Ok(format!("max rel err {worst:e} over 20 grids"))
}

fn heat_oracle() -> Outcome {
    let (alpha, dt) = (0.5f32, 0.01);
    let rule = LinearRule::new(3, Variant::Noise).laplacian(alpha).build();
    let seed = CellGrid::from_fn(shape(64, 64, 3), |x, y, c| {
        let phase = 2.0 * PI * (3.0 * x as f64 / 64.0 + 2.0 * y as f64 / 64.0);
        ((1.0 + 0.5 * c as f64) * phase.cos()) as f32
    })
    .unwrap();
    // eigenvalue of the scaled stencil for this mode, from one application
    let z = perceive(&seed, &rule, &Discretization::default()).unwrap();
    let mu = f64::from(z.get(Block::Laplacian, 0, 0, 0)) / f64::from(seed.get(0, 0, 0));
    let mut spec = SimSpec::for_rule(rule, seed.shape(), 1.0);
    spec.initial = Some(seed.clone());
    spec.disc.dt = dt;
    let traj = simulate(&spec).unwrap();
    let factor = (1.0 + dt * f64::from(alpha) * mu).powi(traj.steps as i32);
    let mut worst = 0.0f64;
    for (a, b) in traj.final_grid.data().iter().zip(seed.data()) {
        let want = factor * f64::from(*b);
        if want.abs() > 1e-2 {
            worst = worst.max((f64::from(*a) - want).abs() / want.abs());
        }
    }
    ensure!(traj.steps == 100, "{} steps", traj.steps);
    ensure!(worst <= 1e-3, "rel err {worst:e}");
    Ok(format!("mu {mu:.6}, factor {factor:.6}, max rel err {worst:e}"))
}

fn decay_error(integrator: Integrator, dt: f64) -> f64 {
    let k = 0.5f32;
    let rule = LinearRule::new(3, Variant::Noise).decay(k).build();
    let seed = make_seed(shape(4, 4, 3), &SeedSpec::noise(1.0, 5)).unwrap();
    let mut spec = SimSpec::for_rule(rule, seed.shape(), 2.0);
    spec.initial = Some(seed.clone());
    spec.disc.dt = dt;
    spec.integrator = integrator;
    let out = simulate(&spec).unwrap().final_grid;
    let exact = (-f64::from(k) * 2.0).exp();
    let num: f64 = out
        .data()
        .iter()
        .zip(seed.data())
        .map(|(a, s)| (f64::from(*a) - exact * f64::from(*s)).powi(2))
        .sum();
    let den: f64 = seed.data().iter().map(|s| f64::from(*s).powi(2)).sum();
    (num / den).sqrt()
}

fn integrator_order() -> Outcome {
    let e: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&dt| decay_error(Integrator::Euler, dt))
        .collect();
    let ratios: Vec<f64> = e.windows(2).map(|p| p[0] / p[1]).collect();
    for r in &ratios {
        ensure!((r - 2.0).abs() <= 0.2, "euler ratios {ratios:?}");
    }
    let rk = decay_error(Integrator::Rk4, 0.1);
    ensure!(rk <= 1e-6, "rk4 error {rk:e}");
    Ok(format!(
        "euler ratios {:.4}, {:.4}; rk4 error {rk:e}",
        ratios[0], ratios[1]
    ))
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn determinism() -> Outcome {
    let s = shape(128, 128, 12);
    // masked updates and a noise seed in one spec
    let mut spec = SimSpec::for_rule(RuleWeights::random(12, 96, Variant::Vanilla, 7, 0.5), s, 100.0);
    spec.seed = SeedSpec::noise(0.25, 11);
    spec.mask_rng_seed = 13;
    let many = 4;
    let run = |n| {
        in_pool(n, || {
            let seed = make_seed(s, &spec.seed).unwrap();
            let mask: Vec<bool> = (0..4u64)
                .flat_map(|step| (0..128 * 128).map(move |i| mask_bit(13, i % 128, i / 128, step)))
                .collect();
            let traj = simulate(&spec).unwrap();
            (seed, mask, traj)
        })
    };
    let (seed1, mask1, traj1) = run(1);
    let (seed_n, mask_n, traj_n) = run(many);
    ensure!(traj1.steps == 100, "{} steps", traj1.steps);
    ensure!(bits(seed1.data()) == bits(seed_n.data()), "noise seeds differ");
    ensure!(mask1 == mask_n, "mask patterns differ");
    ensure!(
        bits(traj1.final_grid.data()) == bits(traj_n.final_grid.data()),
        "final grids differ"
    );
    ensure!(traj1.final_grid.first_non_finite().is_none(), "run diverged");
    Ok(format!("1 vs {many} threads bitwise identical"))
}

fn fixed_point() -> Outcome {
    let a = [0.4321f32, -0.25, 0.8, 1.5];
    let rule = LinearRule::new(4, Variant::Vanilla).offset_identity(&a).build();
    let r = find_fixed_point(&rule, &[0.0; 4], FixedPointOptions::default()).unwrap();
    let err = r
        .state
        .iter()
        .zip(a)
        .map(|(s, t)| (s - f64::from(t)).abs())
        .fold(0.0, f64::max);
    ensure!(
        r.converged && err <= 1e-6,
        "error {err:e} after {} iterations",
        r.iterations
    );
    ensure!(r.iterations <= 10_000, "{} iterations", r.iterations);
    ensure!(r.history.windows(2).all(|p| p[1] <= p[0]), "objective increased");
    let random = RuleWeights::random(12, 96, Variant::Noise, 3, 1.0);
    let found = find_fixed_point(&random, &[0.0; 12], FixedPointOptions::default()).unwrap();
    ensure!(
        found.history.windows(2).all(|p| p[1] <= p[0]),
        "objective increased on random weights"
    );
    let f = UniformResidual::new(&random);
    let mut rng = CounterRng::new(99);
    let mut best_probe = f64::INFINITY;
    for _ in 0..100 {
        let probe: Vec<f64> = (0..12).map(|_| 2.0 * (rng.uniform() - 0.5)).collect();
        best_probe = best_probe.min(f.objective(&probe));
    }
    ensure!(
        found.objective <= best_probe,
        "solver {:e} vs best probe {best_probe:e}",
        found.objective
    );
    Ok(format!(
        "root error {err:e} in {} iterations; random weights {:.3e} vs best probe {best_probe:.3e}",
        r.iterations, found.objective
    ))
}

fn mle() -> Outcome {
    let c = 0.37f32;
    let mut constant = LinearRule::new(3, Variant::Noise);
    for ch in 0..3 {
        constant = constant.constant(ch, if ch % 2 == 0 { c } else { -c });
    }
    let spec = SimSpec::for_rule(constant.build(), shape(8, 8, 3), 5.0);
    let est = estimate_mle(&spec, 5.0, 0.3).unwrap();
    let const_err = (est.lambda - f64::from(c).ln()).abs();
    ensure!(const_err <= 1e-9, "constant update: error {const_err:e}");

    let (k, dt, duration) = (0.5f32, 0.1, 5.0);
    let decay = SimSpec::for_rule(
        LinearRule::new(3, Variant::Noise).decay(k).build(),
        shape(8, 8, 3),
        duration,
    );
    let r0 = make_seed(decay.shape, &decay.seed).unwrap().rms();
    let est = estimate_mle(&decay, duration, dt).unwrap();
    let n = est.steps as f64;
    let closed = (f64::from(k) * r0).ln() + n / 2.0 * (1.0 - f64::from(k) * dt).ln();
    let decay_err = ((est.lambda - closed) / closed).abs();
    ensure!(decay_err <= 1e-6, "linear decay: rel error {decay_err:e}");

    let noise = SimSpec::for_rule(
        RuleWeights::random(12, 32, Variant::Noise, 21, 0.5),
        shape(8, 8, 12),
        50.0,
    );
    let mut row = Vec::new();
    for dt in [1e-3, 1e-2, 1e-1, 1.0] {
        let est = estimate_mle(&noise, 50.0, dt).unwrap();
        ensure!(est.lambda.is_finite(), "lambda at dt {dt} is {}", est.lambda);
        let expected = (50.0 / dt).round() as u64;
        ensure!(
            est.steps == expected,
            "dt {dt}: {} steps, expected {expected}",
            est.steps
        );
        row.push(format!("{dt:e}:{:.3}", est.lambda));
    }
    Ok(format!(
        "constant {const_err:e}, decay rel {decay_err:e}; T=50 sweep {}",
        row.join(" ")
    ))
}

fn stripes(h: usize, w: usize) -> Image {
    let mut data = Vec::with_capacity(h * w * 3);
    for y in 0..h {
        for x in 0..w {
            let v = if (x / 4 + y / 6) % 2 == 0 { 0.8 } else { 0.2 };
            data.extend_from_slice(&[v, 0.5, 1.0 - v]);
        }
    }
    Image::new(h, w, data).unwrap()
}

fn check_report(report: &SweepReport, values: &[f64]) -> Result<(), String> {
    ensure!(report.entries.len() == values.len(), "{} rows", report.entries.len());
    for (e, v) in report.entries.iter().zip(values) {
        ensure!(e.value == *v, "row value {} vs {v}", e.value);
        ensure!(
            e.loss.is_finite() && e.ratio.is_finite(),
            "row {v}: loss {} ratio {}",
            e.loss,
            e.ratio
        );
    }
    let last = report.entries.last().unwrap();
    ensure!(last.value == 1.0 && last.ratio == 1.0, "ratio at 1.0 is {}", last.ratio);
    Ok(())
}

/// Duration used by the capped sweeps: the paper's T=300 would take hours
/// on the 2⁻² grid at desk scale, so the harness is exercised at T=1.
const SWEEP_T: f64 = 1.0;

fn sweep_shapes() -> Outcome {
    let dt_values = parse_values("1e-3..1e0:10log").unwrap();
    ensure!(dt_values.len() == 10, "{} dt values", dt_values.len());
    ensure!(dt_values == log_spaced(1e-3, 1.0, 10), "dt values are not log-spaced");
    ensure!(
        dt_values[0] == 1e-3 && dt_values[9] == 1.0,
        "dt endpoints {dt_values:?}"
    );
    let dx_values = parse_values("2^-4..2^0:11log").unwrap();
    ensure!(dx_values.len() == 11, "{} dx values", dx_values.len());
    ensure!(
        dx_values[0] == 0.0625 && dx_values[10] == 1.0,
        "dx endpoints {dx_values:?}"
    );
    let r = dx_values[1] / dx_values[0];
    ensure!(
        dx_values.windows(2).all(|p| (p[1] / p[0] - r).abs() < 1e-12),
        "dx values are not log-spaced"
    );

    let base = shape(128, 128, 12);
    for &dx in &dx_values {
        let (s, dt) = dx_sample_plan(base, dx);
        let side = (128.0 / dx - 1e-9).ceil() as usize;
        ensure!(
            s.height == side && s.width == side,
            "dx {dx}: grid {}x{}",
            s.height,
            s.width
        );
        ensure!(dt == (dx * dx).min(1.0), "dx {dx}: dt {dt}");
    }
    let (s, _) = dx_sample_plan(base, 0.0625);
    ensure!(s.height == 2048, "finest grid {}", s.height);

    let rule = RuleWeights::random(12, 96, Variant::Noise, 5, 0.5);
    let target = stripes(64, 64);
    let dt_spec = SimSpec::for_rule(rule.clone(), shape(64, 64, 12), SWEEP_T);
    let report = sweep_dt(&dt_spec, &target, &dt_values).map_err(|e| e.to_string())?;
    check_report(&report, &dt_values)?;
    for e in &report.entries {
        let want = (SWEEP_T / e.value - 1e-9).ceil() as u64;
        ensure!(e.steps == want, "dt {}: {} steps, expected {want}", e.value, e.steps);
    }

    let capped: Vec<f64> = dx_values.iter().copied().filter(|&v| v >= 0.25 - 1e-12).collect();
    ensure!(
        capped.len() == 6 && (capped[0] - 0.25).abs() < 1e-15,
        "capped values {capped:?}"
    );
    let dx_spec = SimSpec::for_rule(rule, base, SWEEP_T);
    let report = sweep_dx(&dx_spec, &stripes(128, 128), &capped).map_err(|e| e.to_string())?;
    check_report(&report, &capped)?;
    for e in &report.entries {
        let (s, dt) = dx_sample_plan(base, e.value);
        ensure!(
            (e.height, e.width, e.dt) == (s.height, s.width, dt),
            "dx {} row shape",
            e.value
        );
    }
    let largest = report.entries[0].height;
    Ok(format!(
        "10 dt rows, 11 dx plans, capped dx run to {largest}² at T={SWEEP_T}; ratio(1) = 1 on both"
    ))
}

fn random_weights(rng: &mut CounterRng, i: u64) -> RuleWeights {
    let channels = 3 + (rng.next_u64() % 16) as usize;
    let hidden = 1 + (rng.next_u64() % 64) as usize;
    let variant = [Variant::Noise, Variant::Vanilla, Variant::Pe][(rng.next_u64() % 3) as usize];
    let mut w = RuleWeights::random(channels, hidden, variant, i, 1.0 + rng.uniform() as f32);
    w.sobel_divisor = 1.0 + 10.0 * rng.uniform() as f32;
    w.laplacian_divisor = 1.0 + 10.0 * rng.uniform() as f32;
    // signed zeros, subnormals and extremes must survive too
    w.b1[0] = [-0.0, f32::MIN_POSITIVE / 2.0, f32::MAX, -1e-30][(i % 4) as usize];
    w
}

fn weight_bits(w: &RuleWeights) -> (Vec<u32>, Vec<u32>, Vec<u32>) {
    (bits(&w.w1), bits(&w.b1), bits(&w.w2))
}

fn persistence() -> Outcome {
    let mut rng = CounterRng::new(2024);
    for i in 0..100 {
        let w = random_weights(&mut rng, i);
        let bytes = encode_weights(&w).map_err(|e| e.to_string())?;
        let back = decode_weights(&bytes).map_err(|e| format!("weights {i}: {e}"))?;
        ensure!(weight_bits(&back) == weight_bits(&w), "weights {i}: parameters differ");
        ensure!(
            (back.channels, back.hidden, back.variant, back.padding) == (w.channels, w.hidden, w.variant, w.padding),
            "weights {i}: header differs"
        );
        ensure!(
            back.sobel_divisor.to_bits() == w.sobel_divisor.to_bits()
                && back.laplacian_divisor.to_bits() == w.laplacian_divisor.to_bits(),
            "weights {i}: divisors differ"
        );
        ensure!(
            encode_weights(&back).unwrap() == bytes,
            "weights {i}: re-encoding differs"
        );

        let (h, wd, c) = (
            3 + (rng.next_u64() % 38) as usize,
            3 + (rng.next_u64() % 38) as usize,
            3 + (rng.next_u64() % 16) as usize,
        );
        let mut g = random_grid(h, wd, c, i);
        g.data_mut()[0] = [-0.0, f32::MIN, 1e-40, f32::EPSILON][(i % 4) as usize];
        g.set_time(rng.uniform() * 1e4);
        let bytes = encode_state(&g).map_err(|e| e.to_string())?;
        let back = decode_state(&bytes).map_err(|e| format!("state {i}: {e}"))?;
        ensure!(back.shape() == g.shape(), "state {i}: shape differs");
        ensure!(bits(back.data()) == bits(g.data()), "state {i}: data differs");
        ensure!(back.time().to_bits() == g.time().to_bits(), "state {i}: time differs");
        ensure!(encode_state(&back).unwrap() == bytes, "state {i}: re-encoding differs");
    }
    Ok("100 weight files and 100 snapshots bit-identical".into())
}

#[derive(Debug)]
struct FrameRecord {
    step: u64,
    t: f64,
    dt: f64,
}

async fn next_json(
    ws: &mut (impl StreamExt<Item = Result<Message, tokio_tungstenite::tungstenite::Error>> + Unpin),
    frames: &mut Vec<FrameRecord>,
    pixels: &mut Option<Vec<u8>>,
) -> Result<Value, String> {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(20), ws.next())
            .await
            .map_err(|_| "timed out waiting for the server".to_string())?
            .ok_or("connection closed")?
            .map_err(|e| e.to_string())?;
        match msg {
            Message::Text(t) => {
                let v: Value = serde_json::from_str(t.as_str()).map_err(|e| e.to_string())?;
                if v["op"] == "frame" {
                    frames.push(FrameRecord {
                        step: v["step"].as_u64().ok_or("frame without step")?,
                        t: v["t"].as_f64().ok_or("frame without t")?,
                        dt: v["dt"].as_f64().ok_or("frame without dt")?,
                    });
                }
                return Ok(v);
            }
            Message::Binary(b) => *pixels = Some(b.to_vec()),
            _ => {}
        }
    }
}

async fn scripted_session() -> Outcome {
    let store = WeightStore::new();
    store
        .insert("demo", RuleWeights::random(12, 32, Variant::Noise, 9, 0.5))
        .unwrap();
    let app = router(store, None, SessionConfig::default());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
        .await
        .map_err(|e| e.to_string())?;
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await });
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/ws"))
        .await
        .map_err(|e| e.to_string())?;
    let mut frames = Vec::new();
    let mut pixels = None;
    let send = |v: Value| Message::text(v.to_string());

    ws.send(send(
        json!({"op": "start", "weights_id": "demo", "size": "48x64", "rng_seed": 3}),
    ))
    .await
    .map_err(|e| e.to_string())?;
    while frames.len() < 50 {
        let v = next_json(&mut ws, &mut frames, &mut pixels).await?;
        ensure!(v["op"] != "error", "server error {v}");
    }
    ws.send(send(json!({"op": "set_dt", "value": 0.1})))
        .await
        .map_err(|e| e.to_string())?;
    let switch_step = loop {
        let v = next_json(&mut ws, &mut frames, &mut pixels).await?;
        ensure!(v["op"] != "error", "server error {v}");
        if v["op"] == "ack" && v["of"] == "set_dt" {
            break v["step"].as_u64().ok_or("ack without step")?;
        }
    };
    let switch_t = switch_step as f64;
    let target = frames.len() + 50;
    while frames.len() < target {
        let v = next_json(&mut ws, &mut frames, &mut pixels).await?;
        ensure!(v["op"] != "error", "server error {v}");
    }
    ws.send(send(
        json!({"op": "perturb", "x": 10, "y": 20, "radius": 6.0, "kind": "reseed_noise"}),
    ))
    .await
    .map_err(|e| e.to_string())?;
    ws.send(send(json!({"op": "snapshot"})))
        .await
        .map_err(|e| e.to_string())?;
    let snapshot = loop {
        let v = next_json(&mut ws, &mut frames, &mut pixels).await?;
        ensure!(v["op"] != "error", "server error {v}");
        if v["op"] == "snapshot" {
            break v;
        }
    };
    ws.close(None).await.ok();

    for p in frames.windows(2) {
        ensure!(
            p[1].step >= p[0].step && p[1].t >= p[0].t,
            "frame timestamps go backwards: {p:?}"
        );
    }
    ensure!(
        frames.iter().any(|f| f.step > switch_step),
        "no frames after the switch"
    );
    // Every step before the acknowledged switch used Δt = 1 and every step
    // after it Δt = 0.1, so t is a function of the step count alone.
    for f in frames.iter().filter(|f| f.step > 0) {
        let (want_t, want_dt) = if f.step <= switch_step {
            (f.step as f64, 1.0)
        } else {
            (switch_t + (f.step - switch_step) as f64 * 0.1, 0.1)
        };
        ensure!(f.dt == want_dt, "frame at step {} reports dt {}", f.step, f.dt);
        ensure!(
            (f.t - want_t).abs() <= 1e-9 * want_t.max(1.0),
            "frame at step {}: t {} vs {want_t}",
            f.step,
            f.t
        );
    }
    let pixels = pixels.ok_or("no binary frame")?;
    ensure!(pixels.len() >= 8, "short frame");
    let w = u32::from_le_bytes(pixels[0..4].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(pixels[4..8].try_into().unwrap()) as usize;
    ensure!((w, h) == (64, 48), "frame header {w}x{h}");
    ensure!(pixels.len() == 8 + 4 * w * h, "frame length {}", pixels.len());
    ensure!(
        pixels[8..].chunks_exact(4).all(|p| p[3] == 255),
        "alpha channel not opaque"
    );

    use base64::Engine as _;
    let b64 = base64::engine::general_purpose::STANDARD;
    let state = b64
        .decode(snapshot["state"].as_str().ok_or("snapshot without state")?)
        .map_err(|e| e.to_string())?;
    let grid = decode_state(&state).map_err(|e| e.to_string())?;
    ensure!(
        (grid.height(), grid.width(), grid.channels()) == (48, 64, 12),
        "snapshot shape"
    );
    ensure!(
        grid.time() == snapshot["t"].as_f64().unwrap_or(f64::NAN),
        "snapshot time"
    );
    Ok(format!(
        "{} frames, dt switch acknowledged at step {switch_step}, snapshot at t = {:.1}",
        frames.len(),
        grid.time()
    ))
}

fn service_protocol() -> Outcome {
    tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .unwrap()
        .block_on(scripted_session())
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

#[test]
fn acceptance() {
    let criteria = [
        Criterion {
            name: "laplacian decomposition",
            budget: secs(1),
            run: laplacian_decomposition,
        },
        Criterion {
            name: "stencil calculus",
            budget: secs(1),
            run: stencil_calculus,
        },
        Criterion {
            name: "scaling covariance",
            budget: secs(1),
            run: scaling_covariance,
        },
        Criterion {
            name: "heat-rule oracle",
            budget: secs(5),
            run: heat_oracle,
        },
        Criterion {
            name: "integrator order",
            budget: secs(5),
            run: integrator_order,
        },
        Criterion {
            name: "determinism",
            budget: secs(10),
            run: determinism,
        },
        Criterion {
            name: "fixed-point solver",
            budget: secs(5),
            run: fixed_point,
        },
        Criterion {
            name: "lyapunov estimator",
            budget: secs(10),
            run: mle,
        },
        Criterion {
            name: "sweep harness shape",
            budget: secs(60),
            run: sweep_shapes,
        },
        Criterion {
            name: "persistence",
            budget: secs(5),
            run: persistence,
        },
        Criterion {
            name: "service protocol",
            budget: secs(30),
            run: service_protocol,
        },
    ];
    let mut failures = Vec::new();
    println!();
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let timing = format!("{:.2}s / {}s", elapsed.as_secs_f64(), c.budget.as_secs());
        match outcome {
            Ok(detail) if elapsed <= c.budget => println!("PASS {}: {detail} ({timing})", c.name),
            Ok(detail) => {
                println!("FAIL {}: over budget; {detail} ({timing})", c.name);
                failures.push(c.name);
            }
            Err(detail) => {
                println!("FAIL {}: {detail} ({timing})", c.name);
                failures.push(c.name);
            }
        }
    }
    assert!(failures.is_empty(), "failed: {failures:?}");
}

#[test]
#[ignore = "runs grids up to 2048x2048 at T=300; hours on a desk machine"]
fn full_cell_size_sweep() {
    let values = parse_values("2^-4..2^0:11log").unwrap();
    let rule = RuleWeights::random(12, 96, Variant::Noise, 5, 0.5);
    let spec = SimSpec::for_rule(rule, shape(128, 128, 12), 300.0);
    let report = sweep_dx(&spec, &stripes(128, 128), &values).unwrap();
    check_report(&report, &values).unwrap();
    assert_eq!(report.entries[0].height, 2048);
    for e in &report.entries {
        println!("{}\t{}\t{}", e.value, e.loss, e.ratio);
    }
}
