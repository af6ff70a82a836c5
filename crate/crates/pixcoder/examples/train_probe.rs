//! Quick convergence probe: small synthetic run with timing per stage.
//! `cargo run --release -p pixcoder --example train_probe -- [n_train] [epochs] [platform]`

use std::time::Instant;

use pixcoder::codec::layout_for;
use pixcoder::pipeline::{eval_baseline, eval_model, train_from_samples, RunConfig};
use pixcoder::render::{gen_dataset, RenderTheme};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n_train: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(300);
    let epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3);
    let platform = args
        .get(3)
        .and_then(|s| s.parse().ok())
        .unwrap_or(pixcoder::Platform::Web);
    let lr: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(1e-3);

    let layout = layout_for(platform, true);
    let cfg = RunConfig {
        platform,
        epochs,
        n_train,
        n_test: 50,
        learning_rate: lr,
        ..RunConfig::default()
    };

    let t0 = Instant::now();
    let theme = RenderTheme::default();
    let (train_samples, test_samples) =
        gen_dataset(cfg.n_train, cfg.n_test, &layout, &theme, cfg.seed, cfg.render_size).unwrap();
    println!("gen_dataset: {:.1}s", t0.elapsed().as_secs_f64());

    let t1 = Instant::now();
    let log = std::env::temp_dir().join("pixcoder_probe_log.csv");
    let arts = train_from_samples(&layout, &train_samples, &cfg, Some(log.clone())).unwrap();
    print!("{}", std::fs::read_to_string(&log).unwrap());
    println!(
        "train {} samples x {} epochs: {:.1}s  ({:.1}s/epoch), threshold {:.5}",
        cfg.n_train,
        cfg.epochs,
        t1.elapsed().as_secs_f64(),
        t1.elapsed().as_secs_f64() / cfg.epochs as f64,
        arts.threshold
    );
    for r in &arts.records {
        println!(
            "  epoch {}: min-for-1 {:.4}, max-for-0 {:.4}",
            r.epoch, r.min_one, r.max_zero
        );
    }

    let t2 = Instant::now();
    let items: Vec<_> = test_samples
        .iter()
        .map(|s| (s.image.clone(), s.tree.clone()))
        .collect();
    let report = eval_model(&arts.model, &layout, &items, arts.threshold, "probe").unwrap();
    println!(
        "eval: {:.1}s  mean similarity {:.4}, syntax errors {}",
        t2.elapsed().as_secs_f64(),
        report.mean_similarity,
        report.syntax_errors
    );
    let targets: Vec<_> = test_samples.iter().map(|s| s.tree.clone()).collect();
    let base = eval_baseline(&layout, &targets, 123).unwrap();
    println!("baseline mean similarity {:.4}", base.mean_similarity);
}
