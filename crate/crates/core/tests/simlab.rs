use drscale::fitting::{fit_power_law, FitPoint};
use drscale::simlab::{evaluate_encoder, generate_task, train, EncoderParams, Strategy, TaskConfig, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn task(train_pairs: usize, seed: u64) -> drscale::simlab::Task {
    generate_task(&TaskConfig { train_pairs, seed, ..TaskConfig::default() }).unwrap()
}

#[test]
fn adversarial_training_scales_smoothly() {
    let cfg = TrainConfig { strategy: Strategy::Adversarial, seed: 3, ..TrainConfig::default() };
    let pts: Vec<FitPoint> = [1000, 2000, 4000, 8000, 16000]
        .iter()
        .map(|&n| {
            let r = train(&task(n, 3), &cfg).unwrap();
            FitPoint::new(n as f64, r.adversarial_ce.value()).unwrap()
        })
        .collect();
    let rep = fit_power_law(&pts, None).unwrap();
    assert!(rep.r_squared >= 0.8, "R^2 {}", rep.r_squared);
}

#[test]
fn attack_never_helps_the_ranker() {
    let t = task(1000, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let params = EncoderParams::random(16, 64, &mut rng);
    let ev = evaluate_encoder(&params, &t, &TrainConfig::default()).unwrap();
    assert!(ev.adversarial_ce.value() >= ev.effectiveness_ce.value());
}

#[test]
fn cleaner_annotations_train_a_better_ranker() {
    let cfg = TrainConfig { steps: 500, seed: 2, ..TrainConfig::default() };
    let noisy = generate_task(&TaskConfig { train_pairs: 2000, positive_noise: 1.0, seed: 2, ..TaskConfig::default() }).unwrap();
    let clean = generate_task(&TaskConfig { train_pairs: 2000, positive_noise: 0.3, seed: 2, ..TaskConfig::default() }).unwrap();
    let a = train(&noisy, &cfg).unwrap();
    let b = train(&clean, &cfg).unwrap();
    assert!(b.effectiveness_ce.value() < a.effectiveness_ce.value());
}
