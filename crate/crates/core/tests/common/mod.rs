#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use skelsign_core::bench::{compare_reports, BenchReport};
use skelsign_core::encode::{encode, EncodingSpec, PadPolicy};
use skelsign_core::eval::{compute_metrics, evaluate, ExperimentConfig, SplitPlan};
use skelsign_core::impute::{impute_sequence, ImputeConfig};
use skelsign_core::landmark::{LandmarkId, LandmarkSequence, Part, Point};
use skelsign_core::pipeline::{encode_dataset, EncodeOptions};
use skelsign_core::select::{load_manifest, SelectionManifest};
use skelsign_core::sequence_csv::{read_sequence, write_sequence};
use skelsign_core::synth::{write_dataset, SynthConfig};
use skelsign_core::DatasetManifest;

pub type Outcome = Result<String, String>;

pub struct Criterion {
    pub name: &'static str,
    pub budget_secs: f64,
    pub run: fn() -> Outcome,
}

pub const CRITERIA: [Criterion; 8] = [
    Criterion { name: "subset cardinalities", budget_secs: 1.0, run: subset_cardinalities },
    Criterion { name: "imputation oracle suite", budget_secs: 10.0, run: imputation_oracle_suite },
    Criterion { name: "encoding law suite", budget_secs: 10.0, run: encoding_law_suite },
    Criterion { name: "metrics brute-force equivalence", budget_secs: 5.0, run: metrics_equivalence },
    Criterion { name: "split laws", budget_secs: 1.0, run: split_laws },
    Criterion { name: "bench arithmetic", budget_secs: 1.0, run: bench_arithmetic },
    Criterion { name: "round trip and determinism", budget_secs: 10.0, run: round_trip_and_determinism },
    Criterion { name: "imputation benefit", budget_secs: 60.0, run: imputation_benefit },
];

/// Runs a criterion, enforcing its time budget.
pub fn run_timed(c: &Criterion) -> (Outcome, f64) {
    let start = Instant::now();
    let outcome = (c.run)();
    let secs = start.elapsed().as_secs_f64();
    let outcome = match outcome {
        Ok(detail) if secs > c.budget_secs => Err(format!("{detail}; took {secs:.2}s, budget {}s", c.budget_secs)),
        other => other,
    };
    (outcome, secs)
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A sequence over the first `l` canonical landmarks with independent
/// missing points at rate `missing`.
pub fn random_sequence(rng: &mut impl Rng, l: usize, t: usize, missing: f64) -> LandmarkSequence {
    let ids = LandmarkId::all()[..l].to_vec();
    let frames = (0..t)
        .map(|_| {
            (0..l)
                .map(|_| (!rng.gen_bool(missing)).then(|| Point::new(rng.gen(), rng.gen())))
                .collect()
        })
        .collect();
    LandmarkSequence::from_frames("rand", ids, frames).unwrap()
}

pub fn part_counts(m: &SelectionManifest) -> [usize; 4] {
    let mut c = [0; 4];
    for id in &m.ids {
        c[Part::ALL.iter().position(|p| *p == id.part).unwrap()] += 1;
    }
    c
}

pub fn subset_cardinalities() -> Outcome {
    let expected = [("all", 543), ("laines", 68), ("arcanjo", 75), ("asl-1st", 118), ("asl-2nd", 80)];
    let mut got = Vec::new();
    for (name, n) in expected {
        let m = load_manifest(name).map_err(|e| e.to_string())?;
        ensure!(m.ids.len() == n, "{name}: {} landmarks, expected {n}", m.ids.len());
        got.push(format!("{name}={}", m.ids.len()));
    }
    let arcanjo = part_counts(&load_manifest("arcanjo").unwrap());
    ensure!(arcanjo[0] == 0, "arcanjo has {} face ids", arcanjo[0]);
    let first = part_counts(&load_manifest("asl-1st").unwrap());
    ensure!(first[1] == 0, "asl-1st has {} pose ids", first[1]);
    Ok(got.join(" "))
}

/// Series of length 8..40 with interior gaps of 1..8 frames and occasionally
/// missing ends.
pub fn gappy_series(rng: &mut impl Rng) -> Vec<Option<(f64, f64)>> {
    let t = rng.gen_range(8..40);
    let mut s: Vec<Option<(f64, f64)>> = (0..t).map(|_| Some((rng.gen(), rng.gen()))).collect();
    let gaps = rng.gen_range(1..4);
    for _ in 0..gaps {
        let len = rng.gen_range(1..=8).min(t - 2);
        let a = rng.gen_range(1..t - len);
        for v in s.iter_mut().skip(a).take(len) {
            *v = None;
        }
    }
    if rng.gen_bool(0.3) {
        let k = rng.gen_range(1..3);
        s[..k].iter_mut().for_each(|v| *v = None);
    }
    if rng.gen_bool(0.3) {
        let k = rng.gen_range(1..3);
        s[t - k..].iter_mut().for_each(|v| *v = None);
    }
    s
}

fn one_landmark(series: &[Option<(f64, f64)>]) -> LandmarkSequence {
    let ids = LandmarkId::all()[..1].to_vec();
    let frames = series.iter().map(|p| vec![p.map(|(x, y)| Point::new(x, y))]).collect();
    LandmarkSequence::from_frames("s", ids, frames).unwrap()
}

pub fn imputation_oracle_suite() -> Outcome {
    let cfg = ImputeConfig::default();
    let mut rng = rng(0x1a9);
    let (mut cubic, mut linear, mut max_err) = (0usize, 0usize, 0.0f64);
    for case in 0..1000 {
        let series = gappy_series(&mut rng);
        let seq = one_landmark(&series);
        let (out, stats) = impute_sequence(&seq, &cfg).map_err(|e| e.to_string())?;
        let xs: Vec<Option<f64>> = series.iter().map(|p| p.map(|p| p.0)).collect();
        let ys: Vec<Option<f64>> = series.iter().map(|p| p.map(|p| p.1)).collect();
        let ex = oracle::impute_scalar(&xs, cfg.window);
        let ey = oracle::impute_scalar(&ys, cfg.window);
        let (mut n_cubic, mut n_linear, mut n_missing) = (0, 0, 0);
        for f in 0..series.len() {
            let got = out.get(f, 0);
            let (x, kind) = ex[f];
            let y = ey[f].0;
            match kind {
                oracle::Kind::Observed => {
                    ensure!(got == seq.get(f, 0), "case {case}: observed frame {f} changed");
                }
                oracle::Kind::Missing => {
                    n_missing += 1;
                    ensure!(got.is_none(), "case {case}: end frame {f} was extrapolated");
                }
                oracle::Kind::Cubic | oracle::Kind::Linear => {
                    let p = got.ok_or_else(|| format!("case {case}: interior frame {f} left missing"))?;
                    let err = (p.x - x.unwrap()).abs().max((p.y - y.unwrap()).abs());
                    if kind == oracle::Kind::Cubic {
                        n_cubic += 1;
                        max_err = max_err.max(err);
                        ensure!(err <= 1e-9, "case {case}: cubic fill at {f} off by {err:e}");
                    } else {
                        n_linear += 1;
                        ensure!(err == 0.0, "case {case}: linear fill at {f} off by {err:e}");
                    }
                }
            }
        }
        ensure!(
            (stats.filled_cubic, stats.filled_linear, stats.left_missing) == (n_cubic, n_linear, n_missing),
            "case {case}: stats {stats:?} vs oracle cubic={n_cubic} linear={n_linear} missing={n_missing}"
        );
        let (again, _) = impute_sequence(&out, &cfg).map_err(|e| e.to_string())?;
        ensure!(again == out, "case {case}: second pass changed the result");
        cubic += n_cubic;
        linear += n_linear;
    }
    ensure!(cubic > 0 && linear > 0, "degenerate sample: cubic={cubic} linear={linear}");
    Ok(format!("1000 series, {cubic} cubic / {linear} linear fills, max cubic error {max_err:.1e}"))
}

/// Expected pixel at (row, col, channel) by direct indexing.
pub fn expected_pixel(seq: &LandmarkSequence, pad: PadPolicy, row: usize, col: usize, ch: usize) -> u8 {
    let t = seq.frame_count();
    let half = (t + 2) / 3;
    let (g, use_y) = if col < half { (col, false) } else { (col - half, true) };
    let mut frame = 3 * g + ch;
    if frame >= t {
        match pad {
            PadPolicy::ZeroPad => return 0,
            PadPolicy::RepeatLast => frame = t - 1,
        }
    }
    match seq.get(frame, row) {
        None => 0,
        Some(p) => oracle::quantize(if use_y { p.y } else { p.x }),
    }
}

pub fn encoding_law_suite() -> Outcome {
    let mut rng = rng(0xe7c);
    let mut checked = 0usize;
    for l in 1..=6 {
        for t in 1..=10 {
            let seq = random_sequence(&mut rng, l, t, 0.15);
            for pad in [PadPolicy::ZeroPad, PadPolicy::RepeatLast] {
                let spec = EncodingSpec { pad_policy: pad, ..EncodingSpec::default() };
                let img = encode(&seq, &spec, "test").map_err(|e| e.to_string())?;
                let width = 2 * ((t + 2) / 3);
                ensure!(img.height == l && img.width == width, "L={l} T={t}: shape {}x{}", img.height, img.width);
                ensure!(img.pixels.len() == l * width * 3, "L={l} T={t}: buffer length");
                for row in 0..l {
                    for col in 0..width {
                        for ch in 0..3 {
                            let want = expected_pixel(&seq, pad, row, col, ch);
                            let got = img.pixels[(row * width + col) * 3 + ch];
                            ensure!(got == want, "L={l} T={t} {pad:?}: pixel ({row},{col},{ch}) = {got}, expected {want}");
                            checked += 1;
                        }
                    }
                }
                let again = encode(&seq, &spec, "test").map_err(|e| e.to_string())?;
                ensure!(
                    img.to_png_bytes().unwrap() == again.to_png_bytes().unwrap(),
                    "L={l} T={t}: PNG bytes differ across runs"
                );
            }
        }
    }
    let mut prev = 0u8;
    for i in -100..=10_100 {
        let v = i as f64 / 10_000.0;
        let q = skelsign_core::encode::quantize(v);
        ensure!(q >= prev, "quantization decreases at {v}");
        ensure!(q == oracle::quantize(v), "quantize({v}) = {q}, oracle {}", oracle::quantize(v));
        prev = q;
    }
    Ok(format!("60 shapes x 2 pad policies, {checked} pixels checked"))
}

pub fn metrics_equivalence() -> Outcome {
    let mut rng = rng(0x3e7);
    let mut worst = 0.0f64;
    for case in 0..500 {
        let k = rng.gen_range(1..=10);
        let n = rng.gen_range(1..60);
        let truth: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let names: Vec<String> = (0..k).map(|c| format!("c{c}")).collect();
        let t: Vec<&str> = truth.iter().map(|&c| names[c].as_str()).collect();
        let p: Vec<&str> = pred.iter().map(|&c| names[c].as_str()).collect();
        let classes: Vec<&str> = names.iter().map(String::as_str).collect();
        let got = compute_metrics(&t, &p, &classes).map_err(|e| e.to_string())?;
        let want = oracle::scores(&truth, &pred, k);
        for (label, g, w) in [
            ("accuracy", got.accuracy, want.accuracy),
            ("precision", got.macro_precision, want.precision),
            ("recall", got.macro_recall, want.recall),
            ("f1", got.macro_f1, want.f1),
        ] {
            let d = (g - w).abs();
            worst = worst.max(d);
            ensure!(d <= 1e-12, "case {case}: {label} {g} vs oracle {w}");
        }
    }
    let m = compute_metrics(&["A", "A", "B", "B"], &["A", "B", "B", "B"], &["A", "B"]).map_err(|e| e.to_string())?;
    ensure!((m.macro_f1 - 11.0 / 15.0).abs() <= 1e-12, "worked example macro-F1 {}", m.macro_f1);
    Ok(format!("500 cases, max deviation {worst:.1e}; worked example F1 = {:.6}", m.macro_f1))
}

pub fn split_laws() -> Outcome {
    let mut counts = Vec::new();
    for (n, expected) in [(3, 6), (5, 20), (12, 132)] {
        let signers: Vec<String> = (0..n).map(|i| format!("p{i:02}")).collect();
        let plan = SplitPlan::from_signers(&signers).map_err(|e| e.to_string())?;
        ensure!(plan.sessions.len() == expected, "n={n}: {} sessions", plan.sessions.len());
        for s in &plan.sessions {
            ensure!(s.test != s.val, "n={n}: test == val");
            ensure!(
                !s.train.contains(&s.test) && !s.train.contains(&s.val),
                "n={n}: train overlaps test/val"
            );
            ensure!(s.train.len() == n - 2, "n={n}: train has {} signers", s.train.len());
        }
        let mut pairs: Vec<(&str, &str)> = plan.sessions.iter().map(|s| (s.test.as_str(), s.val.as_str())).collect();
        pairs.dedup();
        ensure!(pairs.len() == expected, "n={n}: repeated (test, val) pairs");
        counts.push(format!("n={n}:{}", plan.sessions.len()));
    }
    Ok(counts.join(" "))
}

pub fn five_run_means() -> (BenchReport, BenchReport) {
    let candidate = BenchReport::from_stage_runs(vec![
        ("extraction".into(), vec![4.437]),
        ("inference".into(), vec![0.887]),
    ]);
    let baseline = BenchReport::from_stage_runs(vec![
        ("extraction".into(), vec![28.769]),
        ("inference".into(), vec![0.887]),
    ]);
    (candidate, baseline)
}

pub fn bench_arithmetic() -> Outcome {
    let (candidate, baseline) = five_run_means();
    let t = compare_reports(&candidate, &baseline).map_err(|e| e.to_string())?;
    let extraction = t.stages.iter().find(|s| s.name == "extraction").unwrap().speedup;
    ensure!((extraction - 6.48).abs() <= 0.01, "extraction speed-up {extraction}");
    ensure!((t.end_to_end - 5.57).abs() <= 0.01, "end-to-end ratio {}", t.end_to_end);
    for r in [&candidate, &baseline] {
        let s = compare_reports(r, r).map_err(|e| e.to_string())?;
        ensure!(s.stages.iter().all(|x| x.speedup == 1.0) && s.end_to_end == 1.0, "self-comparison is not 1.0");
    }
    Ok(format!("extraction {extraction:.4}x, end-to-end {:.4}x, self 1.0", t.end_to_end))
}

pub fn hash_dir(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_file() {
            let bytes = std::fs::read(&p).unwrap();
            out.insert(
                p.file_name().unwrap().to_string_lossy().into_owned(),
                hex::encode(Sha256::digest(&bytes)),
            );
        }
    }
    out
}

pub fn round_trip_and_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = rng(0x2f7);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let l = rng.gen_range(1..=40);
        let t = rng.gen_range(1..=30);
        let mut seq = random_sequence(&mut rng, 543, t, 0.1);
        if l < 543 {
            // keep the canonical layout but blank out most landmarks
            for f in 0..t {
                for s in l..543 {
                    seq.set(f, s, None);
                }
            }
        }
        let path = dir.path().join(format!("r{case}.csv"));
        write_sequence(&seq, &path).map_err(|e| e.to_string())?;
        let back = read_sequence(&path).map_err(|e| e.to_string())?;
        ensure!(back.frame_count() == t, "case {case}: frame count");
        for (i, (a, b)) in seq.points().iter().zip(back.points()).enumerate() {
            match (a, b) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    let d = (a.x - b.x).abs().max((a.y - b.y).abs());
                    worst = worst.max(d);
                    // six-decimal rounding is exact to 5e-7; allow one ulp for the subtraction
                    ensure!(d <= 5e-7 + f64::EPSILON, "case {case}: point {i} moved by {d:e}");
                }
                _ => return Err(format!("case {case}: MISSING mask differs at point {i}")),
            }
        }
    }

    let data = dir.path().join("synth");
    let cfg = SynthConfig { signers: 3, samples_per_class: 2, frames: 20, dropout: 0.2, ..SynthConfig::default() };
    let manifest = write_dataset(&cfg, &data).map_err(|e| e.to_string())?;
    let selection = load_manifest("arcanjo").map_err(|e| e.to_string())?;
    let mut hashes = Vec::new();
    for (run, workers) in [(0, 1), (1, 1), (2, 4)] {
        let out = dir.path().join(format!("enc{run}"));
        let opts = EncodeOptions { workers, ..EncodeOptions::default() };
        let index = encode_dataset(&manifest, &selection, &opts, &out).map_err(|e| e.to_string())?;
        ensure!(index.failures.is_empty(), "encode failures: {:?}", index.failures);
        ensure!(index.items.len() == manifest.entries.len(), "index has {} items", index.items.len());
        hashes.push(hash_dir(&out));
    }
    ensure!(hashes[0] == hashes[1], "repeated encode runs differ");
    ensure!(hashes[0] == hashes[2], "worker count changes encode output");
    Ok(format!(
        "100 sequences, max error {worst:.1e}; {} files hash-identical over 3 runs",
        hashes[0].len()
    ))
}

/// Macro-F1 of the nearest-centroid probe with and without imputation.
pub fn benefit_scores(dir: &Path) -> Result<(f64, f64, f64), String> {
    let cfg = SynthConfig { dropout: 0.2, ..SynthConfig::default() };
    let data = dir.join("data");
    write_dataset(&cfg, &data).map_err(|e| e.to_string())?;
    let manifest = DatasetManifest::load(data.join("manifest.json")).map_err(|e| e.to_string())?;
    let missing: usize = manifest
        .entries
        .iter()
        .map(|e| read_sequence(data.join(&e.path)).unwrap().missing_count())
        .sum();
    let rate = missing as f64 / (manifest.entries.len() * cfg.frames * 543) as f64;

    let mut exp = ExperimentConfig::new(data.join("manifest.json"));
    exp.strategy = "arcanjo".into();
    let imputed = evaluate(&exp, &dir.join("imputed"), 4).map_err(|e| e.to_string())?;
    exp.impute = None;
    let raw = evaluate(&exp, &dir.join("raw"), 4).map_err(|e| e.to_string())?;
    Ok((imputed.headline.f1.mean, raw.headline.f1.mean, rate))
}

pub fn imputation_benefit() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (imputed, raw, rate) = benefit_scores(dir.path())?;
    ensure!(imputed > raw, "imputed macro-F1 {imputed:.4} does not exceed raw {raw:.4}");
    Ok(format!(
        "dropout {:.1}%: imputed F1 {imputed:.3} > raw {raw:.3} (+{:.1} p.p.)",
        rate * 100.0,
        (imputed - raw) * 100.0
    ))
}
