//! Acceptance suite: one PASS/FAIL line per criterion.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use moaoff_core::config::Config;
use moaoff_core::error::{Error, PnmError, WorkloadError};
use moaoff_core::perception::{
    count_entities, edge_density, fit_calibration, gray_entropy, image_complexity,
    laplacian_variance, mean_sobel_gradient, resolution_scale, sharpness, split_sentences,
    text_complexity, tokenize, Calibration, GrayImage, ImageWeights, PerceptionConfig, TextParams,
};
use moaoff_core::policy::{
    decide_modality, decide_request, Decision, Modality, PolicyConfig, SystemState,
};
use moaoff_core::sim::{
    ablation, cloud_total_time, edge_service_time, simulate, CostModel, ModalityTask, Strategy,
};
use moaoff_core::workload::{decode_gray, parse_workload, synthesize_workload, SyntheticSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type PnmCase = (
    &'static str,
    &'static [u8],
    Result<Vec<u8>, fn(&PnmError) -> bool>,
);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    check(
        elapsed.as_secs_f64() < limit_s,
        format!("took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64()),
    )
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn moaoff(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_moaoff"))
        .args(args)
        .output()
        .unwrap()
}

fn kernel_oracle() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for img in common::oracle_corpus(2024) {
        worst = worst
            .max(common::rel_err(
                mean_sobel_gradient(&img),
                common::oracle_sobel_mean(&img),
            ))
            .max(common::rel_err(
                laplacian_variance(&img),
                common::oracle_laplacian_variance(&img),
            ));
    }
    check(worst <= 1e-9, format!("max relative error {worst:e}"))?;
    let img = common::seeded_image(42, 8, 8);
    check(
        mean_sobel_gradient(&img).to_bits() == common::oracle_sobel_mean(&img).to_bits(),
        "8x8 seed 42 Sobel mean not bit-identical",
    )?;
    within(t.elapsed(), 5.0)?;
    Ok(format!(
        "200 images, max rel err {worst:.1e}, {:?}",
        t.elapsed()
    ))
}

fn analytic_suite() -> Outcome {
    let cal = Calibration::default();
    let flat = GrayImage::filled(16, 16, 128).unwrap();
    let levels = GrayImage::from_fn(16, 16, |r, c| (r * 16 + c) as u8).unwrap();
    let two = GrayImage::from_fn(4, 4, |_, c| if c < 2 { 10 } else { 200 }).unwrap();
    let ramp = GrayImage::from_fn(12, 200, |_, c| c as u8).unwrap();
    let step = GrayImage::new(3, 3, vec![0, 0, 0, 0, 0, 0, 255, 255, 255]).unwrap();
    let sized = |h, w| GrayImage::filled(h, w, 0).unwrap();
    let eq = |a: f64, b: f64| a == b;

    let cases: Vec<(&str, bool)> = vec![
        ("entropy constant = 0", eq(gray_entropy(&flat), 0.0)),
        (
            "entropy two levels = 0.125",
            (gray_entropy(&two) - 0.125).abs() <= 1e-12,
        ),
        ("entropy all levels = 1", eq(gray_entropy(&levels), 1.0)),
        ("sobel constant = 0", eq(mean_sobel_gradient(&flat), 0.0)),
        (
            "sobel 3x3 step = 1020",
            eq(mean_sobel_gradient(&step), 1020.0),
        ),
        ("sobel tiny = 0", eq(mean_sobel_gradient(&sized(2, 9)), 0.0)),
        ("laplacian constant = 0", eq(laplacian_variance(&flat), 0.0)),
        ("laplacian ramp = 0", eq(laplacian_variance(&ramp), 0.0)),
        (
            "res 1024x1024 = 1",
            eq(resolution_scale(&sized(1024, 1024), 1024, 1024), 1.0),
        ),
        (
            "res 512x1024 = 0.5",
            eq(resolution_scale(&sized(512, 1024), 1024, 1024), 0.5),
        ),
        (
            "res 4096x4096 = 1",
            eq(resolution_scale(&sized(4096, 4096), 1024, 1024), 1.0),
        ),
        (
            "edge density constant = 0",
            eq(edge_density(&flat, &cal), 0.0),
        ),
        ("sharpness constant = 0", eq(sharpness(&flat, &cal), 0.0)),
        (
            "composite 512x512 constant = 0.0625",
            eq(
                image_complexity(&sized(512, 512), &ImageWeights::uniform(), &cal, 1024, 1024)
                    .total,
                0.0625,
            ),
        ),
        (
            "weight selector (0,0,1,0) = 1",
            eq(
                image_complexity(
                    &levels,
                    &ImageWeights::new(0.0, 0.0, 1.0, 0.0).unwrap(),
                    &cal,
                    1024,
                    1024,
                )
                .total,
                1.0,
            ),
        ),
        (
            "tokenize whitespace runs",
            tokenize("  a\t b \n") == ["a", "b"],
        ),
        ("tokenize empty", tokenize("").is_empty()),
        ("sentences three", split_sentences("One. Two! Three?") == 3),
        (
            "sentences floor",
            split_sentences("") == 1 && split_sentences("no terminator") == 1,
        ),
        (
            "entities none",
            count_entities(&tokenize("The cat sat")) == 0,
        ),
        (
            "entities three",
            count_entities(&tokenize("I met Alice and Bob in 2024")) == 3,
        ),
        (
            "text empty = 0",
            eq(text_complexity("", &TextParams::default()).total, 0.0),
        ),
        (
            "text 256 tokens = 0.25",
            eq(
                text_complexity(&vec!["w"; 256].join(" "), &TextParams::default()).total,
                0.25,
            ),
        ),
        ("C_L and C_ner saturate", {
            let mut words = vec!["w"; 2036];
            words.extend(["A1", "B2", "C3", "D4", "E5", "F6"].repeat(2));
            let s = text_complexity(&words.join(" "), &TextParams::default());
            s.c_l == 1.0 && s.c_ner == 1.0 && s.total == 1.0
        }),
        ("fit [7,7] = 7", {
            let c = fit_calibration(&[7.0, 7.0], &[7.0, 7.0], 1e-6).unwrap();
            c.grad_p5 == 7.0 && c.grad_p95 == 7.0
        }),
        (
            "fit single element fails",
            fit_calibration(&[1.0], &[1.0, 2.0], 1e-6).is_err(),
        ),
        ("policy c=0.6 -> cloud", {
            let s = SystemState::new(0.0, 100.0).unwrap();
            decide_modality(0.6, Modality::Text, &s, &PolicyConfig::default()).unwrap()
                == Decision::Cloud
        }),
        ("policy load 0.9 -> cloud", {
            let s = SystemState::new(0.9, 200.0).unwrap();
            decide_modality(0.4, Modality::Text, &s, &PolicyConfig::default()).unwrap()
                == Decision::Cloud
        }),
        ("policy all-zero request -> all edge", {
            let s = SystemState::new(0.3, 200.0).unwrap();
            let v = decide_request(
                &[(Modality::Image, 0.0), (Modality::Text, 0.0)],
                &s,
                &PolicyConfig::default(),
            )
            .unwrap();
            let all_edge = v.decisions().all(|d| d == Decision::Edge);
            all_edge
        }),
        ("edge service c=0", {
            let m = CostModel {
                edge_base_s: 0.08,
                edge_slope_s: 0.40,
                ..CostModel::default()
            };
            eq(
                edge_service_time(&ModalityTask::new(Modality::Text, 0.0, 0).unwrap(), &m),
                0.08,
            )
        }),
        ("cloud time zero payload", {
            let m = CostModel {
                rtt_s: 0.02,
                cloud_base_s: 0.05,
                cloud_slope_s: 0.10,
                ..CostModel::default()
            };
            let t = cloud_total_time(
                &ModalityTask::new(Modality::Text, 0.0, 0).unwrap(),
                300.0,
                &m,
            );
            (t - 0.07).abs() <= 1e-12
        }),
    ];
    let failed: Vec<&str> = cases
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| *n)
        .collect();
    check(failed.is_empty(), format!("failed: {}", failed.join("; ")))?;
    Ok(format!("{} analytic cases", cases.len()))
}

fn policy_properties() -> Outcome {
    const CASES: usize = 10_000;
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let modality = |r: &mut ChaCha8Rng| {
        if r.random::<bool>() {
            Modality::Image
        } else {
            Modality::Text
        }
    };
    let config = |r: &mut ChaCha8Rng| PolicyConfig {
        tau_text: r.random_range(0.0..=1.0),
        tau_image: r.random_range(0.0..=1.0),
        ell_max: r.random_range(0.0..=1.0),
        beta_bw_mbps: r.random_range(1.0..1000.0),
        bandwidth_gate_literal: r.random(),
    };
    let state = |r: &mut ChaCha8Rng| {
        SystemState::new(r.random_range(0.0..=1.0), r.random_range(1.0..1000.0)).unwrap()
    };
    for i in 0..CASES {
        let (cfg, s, m) = (config(&mut rng), state(&mut rng), modality(&mut rng));
        let c: f64 = rng.random_range(0.0..=1.0);
        let d = decide_modality(c, m, &s, &cfg).unwrap();
        check(
            c <= cfg.threshold(m) || d == Decision::Cloud,
            format!("threshold dominance, case {i}"),
        )?;
        check(
            s.load() <= cfg.ell_max || d == Decision::Cloud,
            format!("load dominance, case {i}"),
        )?;
        check(
            cfg.bandwidth_gate(s.bandwidth_mbps()) || d == Decision::Cloud,
            format!("bandwidth dominance, case {i}"),
        )?;
        let hi = rng.random_range(c..=1.0);
        check(
            d == Decision::Edge || decide_modality(hi, m, &s, &cfg).unwrap() == Decision::Cloud,
            format!("monotonicity, case {i}"),
        )?;
        let k = rng.random_range(1..=5);
        let scores: Vec<(Modality, f64)> = (0..k)
            .map(|_| (modality(&mut rng), rng.random_range(0.0..=1.0)))
            .collect();
        let v = decide_request(&scores, &s, &cfg).unwrap();
        let composed = v.len() == k
            && v.entries().iter().zip(&scores).all(|(e, &(m, c))| {
                e.modality == m && e.decision == decide_modality(c, m, &s, &cfg).unwrap()
            });
        check(composed, format!("compositionality, case {i}"))?;
    }
    within(t.elapsed(), 5.0)?;
    Ok(format!("{CASES} cases x 4 properties, {:?}", t.elapsed()))
}

fn degenerate_equivalence() -> Outcome {
    let t = Instant::now();
    let w = synthesize_workload(&SyntheticSpec {
        request_count: 1000,
        seed: 7,
        ..SyntheticSpec::default()
    })
    .map_err(|e| e.to_string())?;
    let model = CostModel::default();
    let never = PolicyConfig {
        tau_text: 0.0,
        tau_image: 0.0,
        ell_max: 0.0,
        beta_bw_mbps: 1.0,
        bandwidth_gate_literal: true,
    };
    let run =
        |s, cfg: &PolicyConfig, m: &CostModel| simulate(&w, s, cfg, m, 300.0, 7).unwrap().metrics;
    check(
        run(Strategy::MoaOff, &never, &model) == run(Strategy::CloudOnly, &never, &model),
        "tau=0 with closed gate differs from cloud-only",
    )?;
    let always = PolicyConfig {
        tau_text: 1.0,
        tau_image: 1.0,
        ell_max: 1.0,
        beta_bw_mbps: 1000.0,
        bandwidth_gate_literal: true,
    };
    let unbounded = CostModel {
        edge_queue_cap: CostModel::UNBOUNDED_QUEUE,
        ..model
    };
    check(
        run(Strategy::MoaOff, &always, &unbounded) == run(Strategy::EdgeOnly, &always, &unbounded),
        "tau=1 with open gate differs from edge-only",
    )?;
    within(t.elapsed(), 10.0)?;
    Ok(format!("both collapses bit-identical, {:?}", t.elapsed()))
}

fn trend_bands() -> Outcome {
    let t = Instant::now();
    let committed =
        Config::load(workspace_root().join("configs/default.toml")).map_err(|e| e.to_string())?;
    check(
        committed == Config::default(),
        "configs/default.toml differs from built-in defaults",
    )?;
    let cfg = &committed;
    let w = synthesize_workload(&cfg.synthetic).map_err(|e| e.to_string())?;
    check(
        w.len() == 5000 && cfg.synthetic.seed == 7,
        "default workload is not 5000 requests at seed 7",
    )?;
    let run = |s| {
        simulate(&w, s, &cfg.policy, &cfg.cost_model, 300.0, 7)
            .unwrap()
            .metrics
    };
    let (moa, cloud, edge) = (
        run(Strategy::MoaOff),
        run(Strategy::CloudOnly),
        run(Strategy::EdgeOnly),
    );
    let latency_cut = 1.0 - moa.mean_s / cloud.mean_s.min(edge.mean_s);
    let compute_cut = 1.0 - moa.cloud_busy_s / cloud.cloud_busy_s;
    let acc_gap = (moa.acc_proxy - cloud.acc_proxy).abs();
    let edge_deficit = cloud.acc_proxy - edge.acc_proxy;
    let detail = format!(
        "latency -{:.1}%, cloud compute -{:.1}%, |acc gap| {:.4}, edge-only deficit {:.4}",
        100.0 * latency_cut,
        100.0 * compute_cut,
        acc_gap,
        edge_deficit
    );
    check(latency_cut >= 0.30, format!("latency band: {detail}"))?;
    check(
        (0.30..=0.65).contains(&compute_cut),
        format!("compute band: {detail}"),
    )?;
    check(acc_gap <= 0.02, format!("accuracy band: {detail}"))?;
    check(edge_deficit >= 0.08, format!("edge-only band: {detail}"))?;

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let config = workspace_root().join("configs/default.toml");
    let o = moaoff(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    check(
        o.status.success(),
        format!("simulate failed: {}", String::from_utf8_lossy(&o.stderr)),
    )?;
    let golden =
        std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_default.csv"))
            .unwrap();
    check(
        std::fs::read(&out).unwrap() == golden,
        "CSV differs from committed golden report",
    )?;
    within(t.elapsed(), 60.0)?;
    Ok(detail)
}

fn ablation_directions() -> Outcome {
    let cfg = Config::default();
    let w = synthesize_workload(&cfg.synthetic).map_err(|e| e.to_string())?;
    let a = ablation(&w, &cfg.policy, &cfg.cost_model, 300.0, 7).map_err(|e| e.to_string())?;
    let (mb, so) = (a.modality_blind_delta(), a.scheduling_off_delta());
    let detail = format!(
        "modality-blind d_acc {:+.4} d_mean {:+.4}s; scheduling-off d_acc {:+.4} d_p95 {:+.4}s",
        mb.acc_proxy, mb.mean_s, so.acc_proxy, so.p95_s
    );
    check(
        a.modality_blind.metrics.acc_proxy <= a.full.metrics.acc_proxy,
        format!("accuracy direction: {detail}"),
    )?;
    check(
        a.scheduling_off.metrics.p95_s >= a.full.metrics.p95_s,
        format!("p95 direction: {detail}"),
    )?;
    Ok(detail)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = (0..2)
        .map(|i| dir.path().join(format!("run{i}.csv")))
        .collect();
    for p in &paths {
        let o = moaoff(&[
            "simulate",
            "--synthetic",
            "--requests",
            "2000",
            "--seed",
            "7",
            "--out",
            p.to_str().unwrap(),
        ]);
        check(
            o.status.success(),
            String::from_utf8_lossy(&o.stderr).into_owned(),
        )?;
    }
    let (a, b) = (
        std::fs::read(&paths[0]).unwrap(),
        std::fs::read(&paths[1]).unwrap(),
    );
    check(a == b, "reruns differ")?;
    Ok(format!(
        "two runs byte-identical ({} bytes); cross-platform half checked via golden CSV",
        a.len()
    ))
}

fn format_robustness() -> Outcome {
    let pnm_cases: Vec<PnmCase> = vec![
        (
            "P5 valid",
            b"P5\n2 2\n255\n\x00\x40\x80\xff",
            Ok(vec![0, 64, 128, 255]),
        ),
        ("P2 valid", b"P2\n1 1\n255\n7\n", Ok(vec![7])),
        (
            "comment-laden",
            b"P5 # a\n#b\n2#c\n1\n#d\n255\n\x01\x02",
            Ok(vec![1, 2]),
        ),
        ("P6 via luma", b"P6\n1 1\n255\n\xff\x00\x00", Ok(vec![76])),
        ("P3 via luma", b"P3\n1 1\n255\n0 0 0\n", Ok(vec![0])),
        (
            "truncated P5",
            b"P5\n2 2\n255\n\x00",
            Err(|e| matches!(e, PnmError::Truncated { .. })),
        ),
        (
            "truncated P2",
            b"P2\n2 1\n255\n5",
            Err(|e| matches!(e, PnmError::Truncated { .. })),
        ),
        (
            "maxval 256",
            b"P5\n1 1\n256\n\x00\x00",
            Err(|e| matches!(e, PnmError::MaxvalTooLarge { .. })),
        ),
        (
            "maxval 0",
            b"P5\n1 1\n0\n\x00",
            Err(|e| matches!(e, PnmError::MalformedHeader { .. })),
        ),
        (
            "bad magic",
            b"BM....",
            Err(|e| matches!(e, PnmError::BadMagic)),
        ),
        (
            "missing dims",
            b"P5\n\n",
            Err(|e| matches!(e, PnmError::MalformedHeader { .. })),
        ),
    ];
    for (name, bytes, expected) in &pnm_cases {
        let got = decode_gray(bytes);
        let ok = match (expected, &got) {
            (Ok(px), Ok(img)) => img.pixels() == px.as_slice(),
            (Err(pred), Err(e)) => pred(e),
            _ => false,
        };
        check(ok, format!("{name}: {got:?}"))?;
    }
    let good = r#"{"id": 1, "t": 0.0, "mods": [{"kind": "text", "c": 0.2}]}"#;
    for (line, bad) in [
        (2, "{oops"),
        (
            4,
            r#"{"id": 1, "t": 1.0, "mods": [{"kind": "text", "c": 0.2}]}"#,
        ),
    ] {
        let src = if line == 2 {
            format!("{good}\n{bad}")
        } else {
            format!("{good}\n\n\n{bad}")
        };
        match parse_workload(src.as_bytes(), Path::new("."), &PerceptionConfig::default()) {
            Err(Error::Workload(WorkloadError::Malformed { line: l, .. })) if l == line => {}
            other => return Err(format!("expected error on line {line}, got {other:?}")),
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let truncated = dir.path().join("t.pgm");
    std::fs::write(&truncated, b"P5\n4 4\n255\n\x00").unwrap();
    let o = moaoff(&["score-image", truncated.to_str().unwrap()]);
    check(
        o.status.code() == Some(2),
        format!("truncated image exit {:?}", o.status.code()),
    )?;
    Ok(format!(
        "{} netpbm cases, workload line numbers, CLI exit 2",
        pnm_cases.len()
    ))
}

fn main() -> std::process::ExitCode {
    let criteria: [Criterion; 8] = [
        ("kernel oracle equivalence", kernel_oracle),
        ("analytic component suite", analytic_suite),
        ("policy property suite", policy_properties),
        ("degenerate-strategy equivalence", degenerate_equivalence),
        ("qualitative trend bands", trend_bands),
        ("ablation direction", ablation_directions),
        ("determinism", determinism),
        ("format robustness", format_robustness),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failures == 0 {
        println!("acceptance: all {} criteria passed", criteria.len());
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of {} criteria failed", criteria.len());
        std::process::ExitCode::FAILURE
    }
}
