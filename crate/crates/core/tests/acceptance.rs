//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sentikit::classical::{forest_fit, gnb_fit, tree_fit, Classifier, ForestParams, TreeParams};
use sentikit::dataset::{load_dataset, save_dataset};
use sentikit::eval::{evaluate, per_class_prf, weighted_metrics, ConfusionMatrix};
use sentikit::experiment::{cmd_preprocess, run_experiment, ExperimentConfig, ModelSelector};
use sentikit::neural::{Loss, Optimizer};
use sentikit::persist::ModelKind;
use sentikit::preprocess::{collapse_repeats, normalize_chars, strip_html_urls};
use sentikit::search::{greedy_search, Axis, GridPoint, SearchGrid, MAX_PASSES};
use sentikit::synth::{generate, SynthSpec};
use sentikit::vectorize::DocumentTermMatrix;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    check(elapsed < limit, || {
        format!("{what} took {elapsed:?}, limit {limit:?}")
    })
}

// ---------------------------------------------------------------- gradients

fn gradient_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let cases = 24;
    for seed in 0..cases {
        let case = common::random_case(seed);
        let a = &case.arch;
        check(
            case.batch.max_len <= 8
                && a.input_dim <= 4
                && a.filters <= 3
                && a.hidden <= 3
                && a.n_classes <= 3,
            || format!("seed {seed}: configuration outside the tiny range"),
        )?;
        for (block, err) in common::gradient_errors(&case) {
            worst = worst.max(err);
            check(err < 1e-4, || {
                format!("seed {seed}, block {block}: relative error {err:.3e}")
            })?;
        }
    }
    within(start.elapsed(), Duration::from_secs(60), "gradient check")?;
    Ok(format!(
        "{cases} configurations, max relative error {worst:.2e}, {:.1?}",
        start.elapsed()
    ))
}

// ---------------------------------------------------------------- classical

fn dtm(rows: &[Vec<f64>]) -> DocumentTermMatrix {
    DocumentTermMatrix::from_dense(rows).expect("count rows")
}

fn gini(labels: &[usize], n_classes: usize) -> f64 {
    let n = labels.len() as f64;
    let mut counts = vec![0usize; n_classes];
    for &y in labels {
        counts[y] += 1;
    }
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Every feature and every midpoint between consecutive distinct values,
/// scored by size-weighted child Gini impurity. The first minimum in
/// (feature, threshold) order wins.
fn exhaustive_root_split(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
) -> Option<(usize, f64, f64)> {
    if y.iter().all(|&c| c == y[0]) {
        return None;
    }
    let n = y.len() as f64;
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..x[0].len() {
        let values: BTreeSet<u64> = x.iter().map(|r| r[f].to_bits()).collect();
        let mut values: Vec<f64> = values.into_iter().map(f64::from_bits).collect();
        values.sort_by(f64::total_cmp);
        for w in values.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let (left, right): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| x[i][f] <= t);
            let yl: Vec<usize> = left.iter().map(|&i| y[i]).collect();
            let yr: Vec<usize> = right.iter().map(|&i| y[i]).collect();
            let imp = yl.len() as f64 / n * gini(&yl, n_classes)
                + yr.len() as f64 / n * gini(&yr, n_classes);
            if best.is_none_or(|(_, _, b)| imp < b - 1e-12) {
                best = Some((f, t, imp));
            }
        }
    }
    best
}

fn tree_fixtures() -> Vec<(Vec<Vec<f64>>, Vec<usize>, usize)> {
    let mut out = vec![
        (
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![0, 0, 1, 1],
            2,
        ),
        (
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
            ],
            vec![0, 1, 1, 0],
            2,
        ),
        (
            vec![
                vec![3.0, 0.0, 1.0],
                vec![1.0, 2.0, 1.0],
                vec![0.0, 2.0, 0.0],
                vec![2.0, 1.0, 4.0],
                vec![0.0, 0.0, 2.0],
                vec![1.0, 3.0, 0.0],
                vec![4.0, 1.0, 1.0],
                vec![2.0, 2.0, 3.0],
            ],
            vec![0, 1, 1, 2, 0, 1, 0, 2],
            3,
        ),
        (
            vec![
                vec![1.0, 1.0],
                vec![1.0, 1.0],
                vec![2.0, 1.0],
                vec![2.0, 1.0],
                vec![5.0, 1.0],
            ],
            vec![1, 0, 1, 0, 1],
            2,
        ),
        (
            vec![vec![2.0, 0.0], vec![2.0, 0.0], vec![2.0, 0.0]],
            vec![0, 1, 1],
            2,
        ),
        (vec![vec![0.0], vec![4.0], vec![1.0]], vec![2, 2, 2], 3),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..500 {
        let n = rng.random_range(2..=8);
        let f = rng.random_range(1..=3);
        let c = rng.random_range(2..=3);
        let x = (0..n)
            .map(|_| {
                (0..f)
                    .map(|_| f64::from(rng.random_range(0..4u32)))
                    .collect()
            })
            .collect();
        let y = (0..n).map(|_| rng.random_range(0..c)).collect();
        out.push((x, y, c));
    }
    out
}

fn tree_root_split() -> Result<String, String> {
    let sets = tree_fixtures();
    for (k, (x, y, c)) in sets.iter().enumerate() {
        let model = tree_fit(&dtm(x), y, *c, TreeParams::default()).map_err(|e| e.to_string())?;
        let expected = exhaustive_root_split(x, y, *c).map(|(f, t, _)| (f, t));
        check(model.root_split() == expected, || {
            format!(
                "fixture {k}: tree root {:?}, exhaustive optimum {expected:?}",
                model.root_split()
            )
        })?;
    }
    Ok(format!("{} fixture datasets", sets.len()))
}

fn forest_degenerate() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<Vec<f64>> = (0..40)
        .map(|_| {
            vec![
                f64::from(rng.random_range(0..10u32)),
                f64::from(rng.random_range(0..10u32)),
            ]
        })
        .collect();
    let y: Vec<usize> = x
        .iter()
        .map(|r| {
            let s = r[0] + 0.5 * r[1] + f64::from(rng.random_range(0..3u32));
            if s < 6.0 {
                0
            } else if s < 10.0 {
                1
            } else {
                2
            }
        })
        .collect();
    let m = dtm(&x);
    let tree = tree_fit(&m, &y, 3, TreeParams::default()).map_err(|e| e.to_string())?;
    let params = ForestParams {
        n_trees: 1,
        features_per_split: Some(2),
        bootstrap: false,
        seed: 99,
        tree: TreeParams::default(),
    };
    let forest = forest_fit(&m, &y, 3, params).map_err(|e| e.to_string())?;
    let mut points = 0;
    for a in 0..10 {
        for b in 0..10 {
            let p = [f64::from(a), f64::from(b)];
            let (tc, _) = tree.predict(&p);
            let (fc, _) = forest.predict(&p);
            check(tc == fc, || {
                format!("grid point {p:?}: tree {tc}, forest {fc}")
            })?;
            points += 1;
        }
    }
    check(forest.trees[0] == tree, || {
        "the single forest tree differs from the plain tree".into()
    })?;
    Ok(format!("{points} grid points agree"))
}

fn gnb_direct() -> Result<String, String> {
    let x = vec![
        vec![0.0, 3.0],
        vec![1.0, 2.0],
        vec![2.0, 4.0],
        vec![1.0, 3.0],
        vec![4.0, 0.0],
        vec![5.0, 1.0],
        vec![3.0, 1.0],
    ];
    let y = vec![0, 0, 0, 0, 1, 1, 1];
    let smoothing = 1e-9;
    let model = gnb_fit(&dtm(&x), &y, 2, smoothing).map_err(|e| e.to_string())?;

    // maximum-likelihood estimates, computed independently of the model
    let n = x.len() as f64;
    let overall_var = (0..2)
        .map(|j| {
            let m = x.iter().map(|r| r[j]).sum::<f64>() / n;
            x.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n
        })
        .fold(0.0, f64::max);
    let eps = smoothing * overall_var;
    let stats: Vec<(f64, [f64; 2], [f64; 2])> = (0..2)
        .map(|c| {
            let rows: Vec<&Vec<f64>> = x
                .iter()
                .zip(&y)
                .filter(|(_, &l)| l == c)
                .map(|(r, _)| r)
                .collect();
            let k = rows.len() as f64;
            let mean = [0, 1].map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / k);
            let var = [0, 1]
                .map(|j| rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / k + eps);
            (k / n, mean, var)
        })
        .collect();
    let density =
        |v: f64, m: f64, s2: f64| (-(v - m).powi(2) / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt();

    let mut worst = 0.0f64;
    for a in 0..=10 {
        for b in 0..=10 {
            let q = [f64::from(a) * 0.5, f64::from(b) * 0.5];
            let joint: Vec<f64> = stats
                .iter()
                .map(|(prior, m, s2)| {
                    prior * density(q[0], m[0], s2[0]) * density(q[1], m[1], s2[1])
                })
                .collect();
            let evidence: f64 = joint.iter().sum();
            let (_, post) = model.predict(&q);
            for c in 0..2 {
                let expected = joint[c] / evidence;
                let err = (post[c] - expected).abs();
                worst = worst.max(err);
                check(err <= 1e-9, || {
                    format!(
                        "query {q:?}, class {c}: model {} vs direct {expected}",
                        post[c]
                    )
                })?;
            }
        }
    }
    Ok(format!("121 queries, max abs deviation {worst:.1e}"))
}

fn classical_oracles() -> Result<String, String> {
    let a = tree_root_split()?;
    let b = forest_degenerate()?;
    let c = gnb_direct()?;
    Ok(format!("tree: {a}; forest: {b}; gnb: {c}"))
}

// ---------------------------------------------------------------- metrics

fn brute_force(preds: &[usize], labels: &[usize], c: usize) -> (f64, f64, f64, f64) {
    let n = labels.len() as f64;
    let acc = preds.iter().zip(labels).filter(|(p, l)| p == l).count() as f64 / n;
    let (mut p_w, mut r_w, mut f_w) = (0.0, 0.0, 0.0);
    for k in 0..c {
        let tp = preds
            .iter()
            .zip(labels)
            .filter(|(&p, &l)| p == k && l == k)
            .count() as f64;
        let predicted = preds.iter().filter(|&&p| p == k).count() as f64;
        let support = labels.iter().filter(|&&l| l == k).count() as f64;
        let p = if predicted == 0.0 {
            0.0
        } else {
            tp / predicted
        };
        let r = if support == 0.0 { 0.0 } else { tp / support };
        let f = if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        };
        p_w += p * support / n;
        r_w += r * support / n;
        f_w += f * support / n;
    }
    (acc, p_w, r_w, f_w)
}

fn metric_identities() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..1000 {
        let c = rng.random_range(2..=7);
        let names: Vec<String> = (0..c).map(|i| format!("c{i}")).collect();
        let counts: Vec<Vec<u64>> = (0..c)
            .map(|_| {
                (0..c)
                    .map(|_| {
                        if rng.random_bool(0.2) {
                            0
                        } else {
                            rng.random_range(0..50)
                        }
                    })
                    .collect()
            })
            .collect();
        let cm = ConfusionMatrix::from_counts(counts, names).map_err(|e| e.to_string())?;
        let m = weighted_metrics(&cm);
        check(m.recall == m.accuracy, || {
            format!(
                "matrix {k}: weighted recall {} != accuracy {}",
                m.recall, m.accuracy
            )
        })?;
        for class in 0..c {
            let (p, r, f1) = per_class_prf(&cm, class);
            check(p.min(r) <= f1 && f1 <= p.max(r), || {
                format!(
                    "matrix {k}, class {class}: F1 {f1} outside [{}, {}]",
                    p.min(r),
                    p.max(r)
                )
            })?;
        }
    }
    for k in 0..1000 {
        let c = rng.random_range(2..=7);
        let n = rng.random_range(1..=200);
        let names: Vec<String> = (0..c).map(|i| format!("c{i}")).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
        let preds: Vec<usize> = labels
            .iter()
            .map(|&l| {
                if rng.random_bool(0.6) {
                    l
                } else {
                    rng.random_range(0..c)
                }
            })
            .collect();
        let m = evaluate(&preds, &labels, &names).map_err(|e| e.to_string())?;
        let (acc, p, r, f) = brute_force(&preds, &labels, c);
        for (name, got, want) in [
            ("accuracy", m.accuracy, acc),
            ("precision", m.precision, p),
            ("recall", m.recall, r),
            ("f1", m.f1, f),
        ] {
            check((got - want).abs() <= 1e-12, || {
                format!("case {k}: {name} {got} vs brute force {want}")
            })?;
        }
    }
    within(
        start.elapsed(),
        Duration::from_secs(10),
        "metric identities",
    )?;
    Ok(format!(
        "1000 confusion matrices, 1000 brute-force passes, {:.1?}",
        start.elapsed()
    ))
}

// ---------------------------------------------------------------- preprocessing

fn persian_config() -> Result<ExperimentConfig, String> {
    ExperimentConfig::load(&fixtures().join("persian.toml")).map_err(|e| e.to_string())
}

const FRAGMENTS: &[&str] = &[
    "خوووووب",
    "ووو",
    "بببب",
    "aaa",
    "aab",
    "a",
    " ",
    "  ",
    "\u{200C}",
    "ي",
    "ك",
    "ى",
    "٣",
    "۳",
    "\u{FEFB}",
    "\u{FE8E}",
    "<b>",
    "</b>",
    "<",
    ">",
    "<<a>>",
    "http://x.y/z",
    "https://t.co/abc",
    "www.",
    "www.example.com",
    "😂",
    "😂😂😂",
    "👍🏽",
    "e\u{301}",
    "e\u{301}e\u{301}e\u{301}",
    "#",
    "!",
    "ها",
    "کتاب",
    "\n",
];

fn fragment_text() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(FRAGMENTS), 0..24).prop_map(|parts| parts.concat())
}

fn idempotent(runner: &mut TestRunner, name: &str, f: fn(&str) -> String) -> Result<(), String> {
    let any = prop_oneof![fragment_text(), any::<String>()];
    runner
        .run(&any, |s| {
            let once = f(&s);
            prop_assert_eq!(f(&once), once);
            Ok(())
        })
        .map_err(|e| format!("{name} is not idempotent: {e}"))
}

fn preprocessing_golden() -> Result<String, String> {
    let cfg = persian_config()?;
    let pre = cfg.preprocess_config().map_err(|e| e.to_string())?;
    let ds = load_dataset(&cfg.dataset).map_err(|e| e.to_string())?;
    let texts: Vec<&str> = ds.documents.iter().map(|d| d.text.as_str()).collect();
    let produced = cmd_preprocess(&texts, &pre);
    let golden =
        fs::read_to_string(fixtures().join("persian_tokens.golden")).map_err(|e| e.to_string())?;
    if produced != golden {
        let line = produced
            .lines()
            .zip(golden.lines())
            .position(|(a, b)| a != b)
            .map_or_else(|| "line count".to_owned(), |i| format!("line {}", i + 1));
        return Err(format!(
            "token output differs from the golden file at {line}"
        ));
    }
    check(golden.lines().next() == Some("خوب خنده"), || {
        "first fixture line is not `خوب خنده`".into()
    })?;

    let again_inputs: Vec<&str> = golden.lines().collect();
    let again = cmd_preprocess(&again_inputs, &pre);
    check(again == golden, || {
        "preprocessing the token output changes it".into()
    })?;

    let mut runner = TestRunner::new(PropConfig {
        failure_persistence: None,
        ..PropConfig::with_cases(1024)
    });
    idempotent(&mut runner, "normalize_chars", normalize_chars)?;
    idempotent(&mut runner, "strip_html_urls", strip_html_urls)?;
    idempotent(&mut runner, "collapse_repeats", collapse_repeats)?;
    Ok(format!(
        "{} documents byte-identical; 3 operations idempotent over 1024 cases each",
        ds.len()
    ))
}

// ---------------------------------------------------------------- greedy search

fn index_of(grid: &SearchGrid, p: &GridPoint) -> [usize; 5] {
    [
        grid.epochs.iter().position(|&v| v == p.epochs).unwrap(),
        grid.batch_size
            .iter()
            .position(|&v| v == p.batch_size)
            .unwrap(),
        grid.learning_rate
            .iter()
            .position(|&v| v == p.learning_rate)
            .unwrap(),
        grid.loss.iter().position(|&v| v == p.loss).unwrap(),
        grid.optimizer
            .iter()
            .position(|&v| v == p.optimizer)
            .unwrap(),
    ]
}

fn axis_lens(grid: &SearchGrid) -> [usize; 5] {
    Axis::DEFAULT_ORDER.map(|a| grid.axis_len(a))
}

/// Every point of the grid with its score.
fn exhaustive_table(
    grid: &SearchGrid,
    mut score: impl FnMut([usize; 5]) -> f64,
) -> HashMap<[usize; 5], f64> {
    let lens = axis_lens(grid);
    let mut table = HashMap::new();
    for a in 0..lens[0] {
        for b in 0..lens[1] {
            for c in 0..lens[2] {
                for d in 0..lens[3] {
                    for e in 0..lens[4] {
                        let idx = [a, b, c, d, e];
                        table.insert(idx, score(idx));
                    }
                }
            }
        }
    }
    table
}

/// Runs the search against a score table, counting distinct trainings.
fn search_table(
    grid: &SearchGrid,
    table: &HashMap<[usize; 5], f64>,
) -> (sentikit::search::SearchOutcome, usize) {
    let trainings = AtomicUsize::new(0);
    let out = greedy_search(
        grid,
        |p| {
            trainings.fetch_add(1, Ordering::Relaxed);
            Ok(index_of(grid, p))
        },
        |idx| Ok(table[idx]),
        &Axis::DEFAULT_ORDER,
    )
    .expect("search over a table cannot fail");
    (out, trainings.into_inner())
}

/// Re-scores every single-axis neighbor of `best`; returns one that beats it.
fn better_neighbor(
    grid: &SearchGrid,
    table: &HashMap<[usize; 5], f64>,
    best: [usize; 5],
) -> Option<[usize; 5]> {
    let lens = axis_lens(grid);
    (0..5)
        .flat_map(|slot| (0..lens[slot]).map(move |v| (slot, v)))
        .find_map(|(slot, v)| {
            let mut n = best;
            n[slot] = v;
            (table[&n] > table[&best]).then_some(n)
        })
}

fn greedy_search_criteria() -> Result<String, String> {
    let grid = SearchGrid::default();
    let budget = MAX_PASSES * (6 + 6 + 6 + 1 + 2);
    let mut max_trainings = 0;

    // random smooth landscapes with axis interactions
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centre: [f64; 5] = std::array::from_fn(|_| rng.random_range(0.0..6.0));
        let weight: [f64; 5] = std::array::from_fn(|_| rng.random_range(0.1..1.0));
        let coupling: f64 = rng.random_range(-0.5..0.5);
        let noise: HashMap<[usize; 5], f64> =
            exhaustive_table(&grid, |_| rng.random_range(0.0..0.3));
        let table = exhaustive_table(&grid, |i| {
            let x = i.map(|v| v as f64);
            let mut s = 0.0;
            for k in 0..5 {
                s -= weight[k] * (x[k] - centre[k]).powi(2);
            }
            s + coupling * (x[0] - centre[0]) * (x[2] - centre[2]) + noise[&i]
        });
        let (out, trainings) = search_table(&grid, &table);
        max_trainings = max_trainings.max(trainings);
        let best = index_of(&grid, &out.best);
        check(out.best_score == table[&best], || {
            format!("landscape {seed}: reported score mismatch")
        })?;
        if let Some(n) = better_neighbor(&grid, &table, best) {
            return Err(format!(
                "landscape {seed}: neighbor {n:?} beats the returned point {best:?}"
            ));
        }
        check(trainings <= budget && out.trace.len() <= budget, || {
            format!(
                "landscape {seed}: {trainings} trainings, {} trace entries, budget {budget}",
                out.trace.len()
            )
        })?;
    }

    // uniformly random tables stress the budget
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let table = exhaustive_table(&grid, |_| rng.random::<f64>());
        let (out, trainings) = search_table(&grid, &table);
        max_trainings = max_trainings.max(trainings);
        check(trainings <= budget && out.trace.len() <= budget, || {
            format!("random table {seed}: {trainings} trainings, budget {budget}")
        })?;
    }

    // a table favoring the selected configuration
    let target = index_of(
        &grid,
        &GridPoint {
            epochs: 10,
            batch_size: 64,
            learning_rate: 0.0001,
            loss: Loss::CategoricalCrossEntropy,
            optimizer: Optimizer::Adam,
        },
    );
    let table = exhaustive_table(&grid, |i| {
        0.95 - (0..5)
            .map(|k| 0.01 * (i[k] as f64 - target[k] as f64).abs())
            .sum::<f64>()
    });
    let (out, _) = search_table(&grid, &table);
    let want = (
        10,
        64,
        0.0001,
        Loss::CategoricalCrossEntropy,
        Optimizer::Adam,
    );
    let got = (
        out.best.epochs,
        out.best.batch_size,
        out.best.learning_rate,
        out.best.loss,
        out.best.optimizer,
    );
    check(got == want, || format!("favoring table returned {got:?}"))?;

    // 2x2 landscape where coordinate moves cannot reach the global optimum
    let small = SearchGrid {
        epochs: vec![5, 10],
        batch_size: vec![16, 64],
        learning_rate: vec![0.001],
        loss: vec![Loss::CategoricalCrossEntropy],
        optimizer: vec![Optimizer::Adam],
    };
    let table = exhaustive_table(&small, |i| match (i[0], i[1]) {
        (0, 0) => 0.6,
        (1, 0) => 0.5,
        (0, 1) => 0.5,
        _ => 0.9,
    });
    let (out, _) = search_table(&small, &table);
    let best = index_of(&small, &out.best);
    let global = *table.iter().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    check(best == [0, 0, 0, 0, 0] && global == [1, 1, 0, 0, 0], || {
        format!("2x2 case: greedy {best:?}, global {global:?}")
    })?;
    check(better_neighbor(&small, &table, best).is_none(), || {
        "2x2 case: greedy result is not locally optimal".into()
    })?;

    Ok(format!(
        "200 landscapes locally optimal, max {max_trainings} trainings (budget {budget}), favoring table exact, 2x2 greedy 0.6 vs global 0.9"
    ))
}

// ---------------------------------------------------------------- end to end

fn desk_corpus(dir: &Path, seed: u64) -> Result<ExperimentConfig, String> {
    let spec = SynthSpec {
        seed,
        ..SynthSpec::default()
    };
    let corpus = generate(&spec).map_err(|e| e.to_string())?;
    save_dataset(&dir.join("corpus.csv"), &corpus.documents).map_err(|e| e.to_string())?;
    fs::write(
        dir.join("embeddings.txt"),
        corpus.embeddings.to_word2vec_text(),
    )
    .map_err(|e| e.to_string())?;
    let cfg =
        ExperimentConfig::for_synthetic(dir.join("corpus.csv"), dir.join("embeddings.txt"), &spec);
    fs::write(dir.join("config.toml"), cfg.to_toml_string()).map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn desk_scale() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = desk_corpus(dir.path(), 1)?;
    cfg.model = ModelSelector::All;
    let start = Instant::now();
    let outcome = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(300), "selector=all run")?;
    check(outcome.results.len() == 6, || {
        format!("{} report rows", outcome.results.len())
    })?;
    let acc = |k: ModelKind| {
        outcome
            .results
            .iter()
            .find(|r| r.bundle.kind == k)
            .map(|r| r.metrics.accuracy)
            .expect("every model reported")
    };
    let cnn = acc(ModelKind::CnnLstm);
    let logreg = acc(ModelKind::Logreg);
    let best_classical = ModelKind::ALL
        .into_iter()
        .filter(|k| !k.is_neural())
        .map(acc)
        .fold(0.0, f64::max);
    check(cnn >= 0.90, || format!("CNN-LSTM accuracy {cnn:.3} < 0.90"))?;
    check(logreg >= 0.90, || {
        format!("logistic regression accuracy {logreg:.3} < 0.90")
    })?;
    check(cnn >= best_classical, || {
        format!("CNN-LSTM {cnn:.3} below best classical {best_classical:.3}")
    })?;
    Ok(format!(
        "CNN-LSTM {cnn:.3}, logreg {logreg:.3}, best classical {best_classical:.3}, {elapsed:.1?}"
    ))
}

// ---------------------------------------------------------------- determinism

fn sentikit(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sentikit"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "sentikit {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn determinism() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let s = |p: &Path| p.to_str().expect("utf-8 temp path").to_owned();

    let mut compared = Vec::new();
    let mut same = |what: &str, a: Vec<u8>, b: Vec<u8>| -> Result<(), String> {
        check(!a.is_empty() && a == b, || {
            format!("{what}: outputs differ between runs")
        })?;
        compared.push(what.to_owned());
        Ok(())
    };

    for run in ["a", "b"] {
        sentikit(&[
            "synth",
            "--out",
            &s(&root.join(run)),
            "--seed",
            "3",
            "--docs",
            "300",
        ])?;
    }
    for file in ["corpus.csv", "embeddings.txt", "config.toml"] {
        same(
            &format!("synth {file}"),
            read(&root.join("a").join(file))?,
            read(&root.join("b").join(file))?,
        )?;
    }

    // a small search grid keeps the search command quick
    let config = root.join("a").join("config.toml");
    let mut small = ExperimentConfig::load(&config).map_err(|e| e.to_string())?;
    small.search.grid = SearchGrid {
        epochs: vec![2, 4],
        batch_size: vec![16, 32],
        learning_rate: vec![0.01, 0.002],
        loss: vec![Loss::CategoricalCrossEntropy],
        optimizer: vec![Optimizer::Adam],
    };
    small.model = ModelSelector::One(ModelKind::CnnLstm);
    let search_config = root.join("a").join("search.toml");
    fs::write(&search_config, small.to_toml_string()).map_err(|e| e.to_string())?;
    let search_cfg = s(&search_config);
    let cfg = s(&config);

    let persian = s(&fixtures().join("persian.toml"));
    same(
        "preprocess",
        sentikit(&["preprocess", "--config", &persian])?,
        sentikit(&["preprocess", "--config", &persian])?,
    )?;

    for format in ["tsv", "json"] {
        let runs = ["ta", "tb"].map(|r| root.join(format!("{r}-{format}")));
        for out in &runs {
            sentikit(&[
                "train",
                "--config",
                &cfg,
                "--seed",
                "11",
                "--report",
                format,
                "--out",
                &s(out),
            ])?;
        }
        let name = format!("report.{format}");
        same(
            &format!("train {name}"),
            read(&runs[0].join(&name))?,
            read(&runs[1].join(&name))?,
        )?;
        for kind in ModelKind::ALL {
            let f = format!("{}.json", kind.id());
            same(
                &format!("train bundle {f} ({format})"),
                read(&runs[0].join("models").join(&f))?,
                read(&runs[1].join("models").join(&f))?,
            )?;
        }
    }

    let bundles: Vec<String> = ModelKind::ALL
        .iter()
        .map(|k| {
            s(&root
                .join("ta-tsv")
                .join("models")
                .join(format!("{}.json", k.id())))
        })
        .collect();
    let mut eval_args = vec!["evaluate", "--config", &cfg, "--seed", "11"];
    for b in &bundles {
        eval_args.extend(["--bundle", b.as_str()]);
    }
    let e1 = sentikit(&eval_args)?;
    let e2 = sentikit(&eval_args)?;
    let train_report = read(&root.join("ta-tsv").join("report.tsv"))?;
    check(e1 == train_report, || {
        "evaluate on saved bundles differs from the training report".into()
    })?;
    same("evaluate", e1, e2)?;

    let runs = ["sa", "sb"].map(|r| root.join(r));
    for out in &runs {
        sentikit(&[
            "search",
            "--config",
            &search_cfg,
            "--seed",
            "11",
            "--out",
            &s(out),
        ])?;
    }
    for file in ["report.tsv", "trace.json", "best_config.json"] {
        same(
            &format!("search {file}"),
            read(&runs[0].join(file))?,
            read(&runs[1].join(file))?,
        )?;
    }
    Ok(format!(
        "{} artifacts byte-identical across two runs",
        compared.len()
    ))
}

// ---------------------------------------------------------------- driver

type Criterion = (&'static str, fn() -> Result<String, String>);

fn main() {
    let criteria: [Criterion; 7] = [
        ("gradient oracle", gradient_oracle),
        ("classical oracles", classical_oracles),
        ("metric identities", metric_identities),
        ("preprocessing golden", preprocessing_golden),
        ("greedy search", greedy_search_criteria),
        ("desk-scale end-to-end", desk_scale),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| (*s).to_owned()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match result {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
