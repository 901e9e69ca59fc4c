//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use vinefab::fabrication::{axial_fold_distance, compile_plan, recover_chain, GapModel, Method};
use vinefab::geometry::{fk_chain, DHChain};
use vinefab::measurement::{
    dh_errors, read_marker_csv, recover_dh, synthetic_markers, DhParameter, Phase,
    SyntheticOptions,
};
use vinefab::stats::{
    independent_t_test, one_way_anova, paired_t_test, read_trials_csv, studentized_range_cdf,
    summarize_trials, tukey_hsd, welch_t_test, SampleTable,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = o.pass && in_time;
    println!(
        "[{}] {name}: {} ({:.2?} of {:?}{})",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed,
        budget,
        if in_time { "" } else { ", over budget" }
    );
    pass
}

fn golden_plan() -> Outcome {
    let chain = DHChain::three_link_reference();
    let plan = compile_plan(&chain, &GapModel::default_for(Method::Tape)).unwrap();
    let (a, th, al) = (
        [100.0; 3],
        chain.links.iter().map(|l| l.theta).collect::<Vec<_>>(),
        chain.links.iter().map(|l| l.alpha).collect::<Vec<_>>(),
    );
    let (s_tilde, l, s) = common::oracle_plan(&a, &th, &al, 16.5, 0.0);
    let quoted_l = [93.520, 87.041, 93.520];
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        worst = worst
            .max((plan.cylinders[i] - quoted_l[i]).abs())
            .max((plan.cylinders[i] - l[i]).abs())
            .max((plan.joints[i].s_tilde - s_tilde[i]).abs());
    }
    worst = worst
        .max((plan.joints[1].s_tilde - 25.918).abs())
        .max((plan.joints[2].s_tilde - 25.918).abs())
        .max((plan.arc_offsets[1] - 12.959).abs())
        .max((plan.arc_offsets[1] - s[1]).abs());
    outcome(
        worst < 1e-3,
        format!(
            "l = {:.3?}, s~ = {:.3?}, s2 = {:.3}; max deviation {worst:.1e} mm",
            plan.cylinders,
            plan.fold_distances(),
            plan.arc_offsets[1]
        ),
    )
}

fn gap_reduction() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let r = rng.random_range(0.01..500.0);
        let v = axial_fold_distance(theta, r, 0.0).unwrap();
        worst = worst.max((v - 2.0 * r * theta).abs());
    }
    outcome(worst < 1e-12, format!("10000 pairs, max |s~ - 2 r theta| = {worst:.1e}"))
}

fn round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for k in 0..1000 {
        let gap = if k % 2 == 0 {
            GapModel::default_for(Method::Tape)
        } else {
            GapModel::default_for(Method::Loop)
        };
        let n = rng.random_range(1..=10);
        let chain = common::feasible_chain(&mut rng, n, 16.5, gap.d_g);
        let back = compile_plan(&chain, &gap).and_then(|p| recover_chain(&p, &gap));
        match back {
            Ok(back) => {
                for (x, y) in chain.links.iter().zip(&back.links) {
                    worst = worst
                        .max((x.theta - y.theta).abs())
                        .max((x.alpha - y.alpha).abs())
                        .max((x.a - y.a).abs());
                }
            }
            Err(_) => failures += 1,
        }
    }
    outcome(
        failures == 0 && worst < 1e-9,
        format!("1000 chains (d_g 0 and 9.3), {failures} failures, max deviation {worst:.1e}"),
    )
}

fn fk_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(13);
    let (mut dt, mut dr): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let n = rng.random_range(1..=20);
        let chain = common::random_chain(&mut rng, n);
        let frames = fk_chain(&chain).unwrap();
        let oracle = common::oracle_fk(&common::chain_tuples(&chain));
        for (f, m) in frames.iter().zip(&oracle) {
            for (i, row) in m.iter().take(3).enumerate() {
                dt = dt.max((f.translation[i] - row[3]).abs());
                for (j, v) in row.iter().take(3).enumerate() {
                    dr = dr.max((f.rotation[(i, j)] - v).abs());
                }
            }
        }
    }
    outcome(
        dt < 1e-9 && dr < 1e-12,
        format!("1000 chains, max translation diff {dt:.1e} mm, max rotation diff {dr:.1e}"),
    )
}

fn measurement_inversion() -> Outcome {
    let mut rng = StdRng::seed_from_u64(14);
    let mut worst: f64 = 0.0;
    let exact = SyntheticOptions {
        samples: 2,
        ..Default::default()
    };
    for _ in 0..200 {
        let n = rng.random_range(2..=10);
        let chain = common::measurable_chain(&mut rng, n);
        let recs = synthetic_markers(&chain, &exact, &mut rng).unwrap();
        let m = recover_dh(&recs, Phase::Pre).unwrap();
        for row in dh_errors(&m, &chain).unwrap() {
            // angle rows are in degrees
            let e = match row.parameter {
                DhParameter::Length => row.error.abs(),
                _ => row.error.abs().to_radians(),
            };
            worst = worst.max(e);
        }
    }

    let target = DHChain::three_link_reference();
    let noisy = SyntheticOptions {
        position_sigma: 0.1,
        ..Default::default()
    };
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get()).min(8);
    let per = 1000 / threads + 1;
    let mut errors: Vec<f64> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let target = &target;
                s.spawn(move || {
                    let mut rng = StdRng::seed_from_u64(1_000 + t as u64);
                    let mut out = Vec::new();
                    for trial in 0..per {
                        if t * per + trial >= 1000 {
                            break;
                        }
                        let recs = synthetic_markers(target, &noisy, &mut rng).unwrap();
                        let m = recover_dh(&recs, Phase::Pre).unwrap();
                        for row in dh_errors(&m, target).unwrap() {
                            if row.parameter == DhParameter::Joint {
                                out.push(row.error.abs());
                            }
                        }
                    }
                    out
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    errors.sort_by(f64::total_cmp);
    let median = errors[errors.len() / 2];
    outcome(
        worst < 1e-9 && median < 0.2,
        format!(
            "200 noiseless chains max error {worst:.1e}; 1000 trials at 0.1 mm: median joint error {median:.4} deg"
        ),
    )
}

fn normal_sample(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * 2.0 + 5.0).collect()
}

/// q = range of k standard normals over sqrt(chi2_df / df); `draws` samples.
fn studentized_range_mc(k: usize, df: f64, draws: usize, qs: &[f64], seed: u64) -> Vec<f64> {
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get()).min(16);
    let per = draws / threads;
    let counts: Vec<Vec<u64>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                s.spawn(move || {
                    let mut rng = StdRng::seed_from_u64(seed * 1000 + t as u64);
                    let chi = ChiSquared::new(df).unwrap();
                    let mut c = vec![0u64; qs.len()];
                    for _ in 0..per {
                        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                        for _ in 0..k {
                            let z: f64 = rng.sample(StandardNormal);
                            lo = lo.min(z);
                            hi = hi.max(z);
                        }
                        let q = (hi - lo) / (chi.sample(&mut rng) / df).sqrt();
                        for (ci, &qq) in c.iter_mut().zip(qs) {
                            if q <= qq {
                                *ci += 1;
                            }
                        }
                    }
                    c
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let total = (per * threads) as f64;
    (0..qs.len())
        .map(|i| counts.iter().map(|c| c[i]).sum::<u64>() as f64 / total)
        .collect()
}

fn statistics() -> Outcome {
    let mut rng = StdRng::seed_from_u64(15);
    let mut id_worst: f64 = 0.0;
    for _ in 0..100 {
        let na = rng.random_range(3..20);
        let nb = rng.random_range(3..20);
        let a = normal_sample(&mut rng, na);
        let b: Vec<f64> = normal_sample(&mut rng, nb).iter().map(|x| x + 1.0).collect();
        let t = independent_t_test(&a, &b).unwrap().statistic;
        let f = one_way_anova(&[&a, &b]).unwrap().statistic;
        let q = tukey_hsd(&[&a, &b], 0.05).unwrap()[0].q;
        id_worst = id_worst
            .max((f - t * t).abs() / (1.0 + f))
            .max((q - 2f64.sqrt() * t.abs()).abs() / (1.0 + q));
    }

    let mut p: [Vec<f64>; 4] = Default::default();
    for _ in 0..5000 {
        let g: Vec<Vec<f64>> = (0..3).map(|_| normal_sample(&mut rng, 8)).collect();
        p[0].push(one_way_anova(&[&g[0], &g[1], &g[2]]).unwrap().p_value);
        let (a, b) = (normal_sample(&mut rng, 10), normal_sample(&mut rng, 14));
        p[1].push(independent_t_test(&a, &b).unwrap().p_value);
        p[2].push(welch_t_test(&a, &b).unwrap().p_value);
        let (x, y) = (normal_sample(&mut rng, 12), normal_sample(&mut rng, 12));
        p[3].push(paired_t_test(&x, &y).unwrap().p_value);
    }
    let ks: Vec<f64> = p.iter_mut().map(|v| common::ks_uniform(v)).collect();

    // (k, df) with two spot points each; draws are shared per pair
    let spots: [(usize, f64, [f64; 2]); 5] = [
        (2, 5.0, [2.0, 4.0]),
        (3, 10.0, [3.877, 2.5]),
        (4, 20.0, [3.0, 4.5]),
        (5, 12.0, [4.0, 5.5]),
        (10, 40.0, [4.5, 5.5]),
    ];
    let mut sr_worst: f64 = 0.0;
    for (i, (k, df, qs)) in spots.iter().enumerate() {
        let mc = studentized_range_mc(*k, *df, 10_000_000, qs, i as u64 + 1);
        for (q, m) in qs.iter().zip(&mc) {
            let exact = studentized_range_cdf(*q, *k, *df).unwrap();
            sr_worst = sr_worst.max((exact - m).abs());
        }
    }
    let ks_max = ks.iter().copied().fold(0.0, f64::max);
    outcome(
        id_worst < 1e-9 && ks_max < 0.05 && sr_worst < 2e-3,
        format!(
            "F=t^2, q=sqrt2|t| max rel diff {id_worst:.1e}; KS (anova, pooled t, welch, paired) = {:.4}, {:.4}, {:.4}, {:.4}; studentized range vs 1e7-draw MC max diff {sr_worst:.1e}",
            ks[0], ks[1], ks[2], ks[3]
        ),
    )
}

fn example_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/example_project")
}

fn not_reproducible() -> Outcome {
    println!("  not reproducible at desk scale, so not attempted:");
    println!("    - measured accuracy on physical robots (best joint-angle and segment-length errors)");
    println!("    - growth pressures and speeds from the staircase experiments");
    println!("    - the p-values of the published method comparisons");
    println!("  these depend on physical robots and unpublished raw data; the property suites above");
    println!("  stand in for them, plus the format-level ingestion below on bundled synthetic data");
    let dir = example_dir();
    let mut notes = Vec::new();
    let mut ok = true;

    let table = SampleTable::read_csv(fs::read(dir.join("samples.csv")).unwrap().as_slice());
    match table {
        Ok(t) => {
            let params = t.parameters().len();
            let robots: std::collections::BTreeSet<_> = t.rows.iter().map(|r| &r.robot_id).collect();
            let combos: std::collections::BTreeSet<_> =
                t.rows.iter().map(|r| (r.method, r.material)).collect();
            let phases: std::collections::BTreeSet<_> = t.rows.iter().map(|r| r.phase).collect();
            ok &= params == 3 && combos.len() == 5 && phases.len() == 2;
            ok &= vinefab::stats::analyze(&t).is_ok();
            notes.push(format!(
                "samples: {} rows, {} robots, {} method/material pairs, {} parameters",
                t.rows.len(),
                robots.len(),
                combos.len(),
                params
            ));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("samples: {e}"));
        }
    }
    match read_trials_csv(fs::read(dir.join("trials.csv")).unwrap().as_slice()) {
        Ok(trials) => {
            let summary = summarize_trials(&trials, Some(300.0)).unwrap();
            ok &= summary.len() == 5 && summary.iter().all(|s| s.successes > 0);
            notes.push(format!("trials: {} growths in {} groups", trials.len(), summary.len()));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("trials: {e}"));
        }
    }
    match read_marker_csv(fs::read(dir.join("markers.csv")).unwrap().as_slice()) {
        Ok(recs) => {
            let m = recover_dh(&recs, Phase::Pre);
            ok &= m.is_ok();
            notes.push(format!("markers: {} markers recovered", recs.len()));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("markers: {e}"));
        }
    }
    outcome(ok, notes.join("; "))
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_vinefab");
    let config = example_dir().join("project.json");
    let root = std::env::temp_dir().join(format!("vinefab-accept-{}", std::process::id()));
    let _ = fs::remove_dir_all(&root);
    let runs: [&[&str]; 10] = [
        &["design"],
        &["plan"],
        &["pattern"],
        &["fk"],
        &["grow", "--steps", "20"],
        &["measure"],
        &["analyze"],
        &["synth", "markers", "--perturb"],
        &["synth", "samples", "--samples", "10"],
        &["synth", "trials"],
    ];
    let mut mismatched = Vec::new();
    for args in runs {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = root.join(format!("{}-{rep}", args.join("_")));
            let status = Command::new(bin)
                .arg("--config")
                .arg(&config)
                .arg("--out")
                .arg(&out)
                .args(["--seed", "5"])
                .args(args)
                .output()
                .unwrap();
            if !status.status.success() {
                mismatched.push(format!("{} failed", args.join(" ")));
            }
            let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
                .map(|d| {
                    d.map(|e| {
                        let e = e.unwrap();
                        (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
                    })
                    .collect()
                })
                .unwrap_or_default();
            files.sort();
            outputs.push(files);
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            mismatched.push(args.join(" "));
        }
    }
    let _ = fs::remove_dir_all(&root);
    outcome(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!("{} subcommand runs byte-identical across repeats", runs.len())
        } else {
            format!("differences: {}", mismatched.join(", "))
        },
    )
}

fn main() {
    let results = [
        timed("fabrication golden case", Duration::from_secs(1), golden_plan),
        timed("gap reduction", Duration::from_secs(1), gap_reduction),
        timed("compile/recover round trip", Duration::from_secs(10), round_trip),
        timed("FK oracle equivalence", Duration::from_secs(5), fk_oracle),
        timed("measurement inversion", Duration::from_secs(30), measurement_inversion),
        timed("statistics identities and calibration", Duration::from_secs(300), statistics),
        timed("non-reproducible figures and dataset ingestion", Duration::from_secs(30), not_reproducible),
        timed("CLI determinism", Duration::from_secs(60), cli_determinism),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
