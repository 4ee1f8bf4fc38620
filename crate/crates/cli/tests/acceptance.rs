//! Acceptance suite: one PASS/FAIL/SKIP line per criterion, nonzero exit if
//! any criterion fails. Runs with `cargo test -p promptevo-cli --test acceptance`.

use std::cell::Cell;
use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use promptevo_core::evolution::{tournament_select_index, GenerationLog, SeededRng};
use promptevo_core::harness::{load_dataset, run_eval, split_dev, EvalReport, EvalSetup, DEFAULT_DEV_FRACTION};
use promptevo_core::llm::{MockProvider, MockScript, RequestSettings};
use promptevo_core::metrics::{
    diversity_score, fuse_scores, normalize_weights, MetricKind, MetricPlan, MetricProviders,
    MetricScores, WEIGHT_SUM_TOLERANCE,
};
use promptevo_core::prompt::GENERIC_PROMPT;
use promptevo_core::selection::{classify_task, select_metrics, FallbackTable, TaskSample};
use promptevo_core::templates::Templates;
use promptevo_core::{Prompt, ScoredPrompt};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const FUSION_CASES: u32 = 1000;
const FUSION_TOLERANCE: f64 = 1e-12;
const FUSION_BUDGET: Duration = Duration::from_secs(1);
const DIVERSITY_MAX_LEN: usize = 8;
const DIVERSITY_BUDGET: Duration = Duration::from_secs(5);
const TOURNAMENT_MEMBERS: usize = 6;
const TOURNAMENT_PERMUTATIONS: usize = 720;
const TOURNAMENT_BUDGET: Duration = Duration::from_secs(1);
const E2E_SEED: u64 = 42;
const E2E_POPULATION: usize = 8;
const E2E_GENERATIONS: u32 = 10;
const E2E_ITEMS: usize = 20;
const E2E_BUDGET: Duration = Duration::from_secs(10);
const SELECTION_FUZZ_CASES: u32 = 1000;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn mock_config() -> PathBuf {
    workspace().join("configs/mock.toml")
}

fn toy_dataset() -> PathBuf {
    workspace().join("data/toy_arithmetic.jsonl")
}

fn kind_strategy() -> impl Strategy<Value = Vec<(MetricKind, f64, f64)>> {
    // (kind, raw weight, score) for a random non-empty subset of kinds.
    (
        prop::sample::subsequence(MetricKind::ALL.to_vec(), 1..=4),
        prop::collection::vec((1e-6f64..1e3, 0.0f64..=1.0), 4),
    )
        .prop_map(|(kinds, vals)| {
            kinds
                .into_iter()
                .zip(vals)
                .map(|(k, (w, s))| (k, w, s))
                .collect()
        })
}

fn fusion_suite() -> Outcome {
    let started = Instant::now();
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: FUSION_CASES,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let strategy = (kind_strategy(), 0.0f64..=1.0, 1e-3f64..1e3, kind_strategy());
    let result = runner.run(&strategy, |(entries, alpha, c, other)| {
        let plan = normalize_weights(entries.iter().map(|&(k, w, _)| (k, w))).unwrap();
        let mut scores = MetricScores::new();
        let mut scaled = MetricScores::new();
        for &(k, _, s) in &entries {
            scores.insert(k, s).unwrap();
            scaled.insert(k, alpha * s).unwrap();
        }
        let fused = fuse_scores(&plan, &scores).unwrap();

        // Linearity.
        let lhs = fuse_scores(&plan, &scaled).unwrap();
        prop_assert!((lhs - alpha * fused).abs() <= FUSION_TOLERANCE);

        // Convexity bound.
        let lo = entries.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
        let hi = entries.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo - FUSION_TOLERANCE <= fused && fused <= hi + FUSION_TOLERANCE);

        // Plan invariants and ranking invariance under uniform scaling.
        let sum: f64 = plan.entries().iter().map(|e| e.weight).sum();
        prop_assert!((sum - 1.0).abs() <= WEIGHT_SUM_TOLERANCE);
        let rescaled = normalize_weights(entries.iter().map(|&(k, w, _)| (k, c * w))).unwrap();
        prop_assert_eq!(plan.len(), rescaled.len());
        for (a, b) in plan.entries().iter().zip(rescaled.entries()) {
            prop_assert_eq!(a.metric, b.metric);
            prop_assert!((a.weight - b.weight).abs() <= FUSION_TOLERANCE);
        }
        let mut alt = MetricScores::new();
        for &(k, _, _) in &entries {
            let s = other.iter().find(|o| o.0 == k).map(|o| o.2).unwrap_or(0.5);
            alt.insert(k, s).unwrap();
        }
        let (x1, y1) = (fused, fuse_scores(&plan, &alt).unwrap());
        let (x2, y2) = (
            fuse_scores(&rescaled, &scores).unwrap(),
            fuse_scores(&rescaled, &alt).unwrap(),
        );
        prop_assert!((x1 - x2).abs() <= FUSION_TOLERANCE && (y1 - y2).abs() <= FUSION_TOLERANCE);
        if (x1 - y1).abs() > 2.0 * FUSION_TOLERANCE {
            prop_assert_eq!(x1 > y1, x2 > y2);
        }
        Ok(())
    });
    let elapsed = started.elapsed();
    match result {
        Err(e) => Outcome::Fail(format!("{e}")),
        Ok(()) if elapsed >= FUSION_BUDGET => {
            Outcome::Fail(format!("{FUSION_CASES} cases took {elapsed:?}, budget {FUSION_BUDGET:?}"))
        }
        Ok(()) => Outcome::Pass(format!(
            "{FUSION_CASES} cases, tol {FUSION_TOLERANCE:e}, {elapsed:?}"
        )),
    }
}

fn brute_distinct(tokens: &[char], n: usize) -> f64 {
    let total = tokens.len() + 1 - n;
    let set: HashSet<&[char]> = (0..total).map(|i| &tokens[i..i + n]).collect();
    set.len() as f64 / total as f64
}

fn diversity_oracle() -> Outcome {
    let started = Instant::now();
    let alphabet = ['a', 'b', 'c'];
    let mut checked = 0usize;
    for len in 1..=DIVERSITY_MAX_LEN {
        for code in 0..3usize.pow(len as u32) {
            let mut c = code;
            let tokens: Vec<char> = (0..len)
                .map(|_| {
                    let t = alphabet[c % 3];
                    c /= 3;
                    t
                })
                .collect();
            let text: Vec<String> = tokens.iter().map(|t| t.to_string()).collect();
            let text = text.join(" ");
            for orders in [&[1usize][..], &[2], &[1, 2]] {
                let got = diversity_score(&text, orders);
                let max = *orders.iter().max().unwrap();
                if len < max {
                    if got.is_ok() {
                        return Outcome::Fail(format!("{text:?} with orders {orders:?} should fail"));
                    }
                    continue;
                }
                let want = orders.iter().map(|&n| brute_distinct(&tokens, n)).sum::<f64>()
                    / orders.len() as f64;
                match got {
                    Ok(v) if v == want => checked += 1,
                    other => {
                        return Outcome::Fail(format!(
                            "{text:?} orders {orders:?}: got {other:?}, brute force {want}"
                        ))
                    }
                }
            }
        }
    }
    let elapsed = started.elapsed();
    if elapsed >= DIVERSITY_BUDGET {
        return Outcome::Fail(format!("took {elapsed:?}, budget {DIVERSITY_BUDGET:?}"));
    }
    Outcome::Pass(format!("{checked} exact comparisons, {elapsed:?}"))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn tournament_suite() -> Outcome {
    let started = Instant::now();
    let plan = MetricPlan::single(MetricKind::Similarity);
    let fused = [0.91, 0.12, 0.55, 0.37, 0.78, 0.64];
    let best_value = 0.91;
    let perms = permutations(TOURNAMENT_MEMBERS);
    if perms.len() != TOURNAMENT_PERMUTATIONS {
        return Outcome::Fail(format!("generated {} permutations", perms.len()));
    }
    let mut dominance_checks = 0usize;
    for (case, perm) in perms.iter().enumerate() {
        let pop: Vec<ScoredPrompt> = perm
            .iter()
            .map(|&i| {
                let scores = MetricScores::new().with(MetricKind::Similarity, fused[i]).unwrap();
                ScoredPrompt::new(Prompt::seed(format!("m{i}"), format!("m{i}")), &plan, scores).unwrap()
            })
            .collect();
        let argmax = pop.iter().position(|p| p.fused == best_value).unwrap();
        let mut rng = SeededRng::new(case as u64);
        match tournament_select_index(&pop, TOURNAMENT_MEMBERS, &mut rng) {
            Ok(w) if w == argmax => {}
            other => return Outcome::Fail(format!("permutation {perm:?}: k=n picked {other:?}")),
        }
        for k in 2..TOURNAMENT_MEMBERS {
            let mut rng = SeededRng::new(1000 + case as u64 * 10 + k as u64);
            let drawn = rng.clone().sample_distinct(pop.len(), k);
            let winner = tournament_select_index(&pop, k, &mut rng).unwrap();
            let expected = *drawn
                .iter()
                .max_by(|&&a, &&b| pop[a].fused.partial_cmp(&pop[b].fused).unwrap())
                .unwrap();
            if winner != expected {
                return Outcome::Fail(format!("permutation {perm:?}, k={k}: winner {winner}, expected {expected}"));
            }
            if drawn.contains(&argmax) {
                dominance_checks += 1;
                if winner != argmax {
                    return Outcome::Fail(format!("global best drawn but lost, permutation {perm:?}"));
                }
            }
        }
    }
    let elapsed = started.elapsed();
    if elapsed >= TOURNAMENT_BUDGET {
        return Outcome::Fail(format!("took {elapsed:?}, budget {TOURNAMENT_BUDGET:?}"));
    }
    Outcome::Pass(format!(
        "{TOURNAMENT_PERMUTATIONS} permutations, {dominance_checks} draws containing the best, {elapsed:?}"
    ))
}

fn run_cli(args: &[&str]) -> Result<(std::process::Output, Duration), String> {
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_promptevo"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .map_err(|e| format!("spawning promptevo: {e}"))?;
    let elapsed = started.elapsed();
    if !out.status.success() {
        return Err(format!(
            "promptevo {args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok((out, elapsed))
}

fn optimize(dir: &Path, extra: &[&str]) -> Result<Duration, String> {
    let config = mock_config();
    let seed = E2E_SEED.to_string();
    let mut args = vec![
        "optimize",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        &seed,
        "--out",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run_cli(&args).map(|(_, t)| t)
}

fn read_dir_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect()
}

fn end_to_end(tmp: &Path) -> Result<String, String> {
    let items = load_dataset(&toy_dataset(), None).map_err(|e| e.to_string())?;
    check(items.len() == E2E_ITEMS, format!("toy dataset has {} items", items.len()))?;
    let config = fs::read_to_string(mock_config()).map_err(|e| e.to_string())?;
    check(
        config.contains(&format!("population_size = {E2E_POPULATION}"))
            && config.contains(&format!("generations = {E2E_GENERATIONS}")),
        "configs/mock.toml does not pin population 8 / 10 generations",
    )?;

    let (a, b) = (tmp.join("e2e-a"), tmp.join("e2e-b"));
    let ta = optimize(&a, &[])?;
    let tb = optimize(&b, &[])?;
    check(
        ta < E2E_BUDGET && tb < E2E_BUDGET,
        format!("runs took {ta:?} and {tb:?}, budget {E2E_BUDGET:?}"),
    )?;
    let (fa, fb) = (read_dir_files(&a), read_dir_files(&b));
    let expected = [
        "best_prompt.txt",
        "config.toml",
        "generations.jsonl",
        "plan.json",
        "profile.json",
        "records.jsonl",
        "report.json",
        "report.txt",
    ];
    for name in expected {
        check(fa.contains_key(name), format!("missing artifact {name}"))?;
    }
    check(fa == fb, "artifacts differ between identical runs")?;

    let logs = GenerationLog::from_jsonl(std::str::from_utf8(&fa["generations.jsonl"]).unwrap())
        .map_err(|e| e.to_string())?;
    check(
        logs.len() == E2E_GENERATIONS as usize + 1,
        format!("{} generation logs", logs.len()),
    )?;
    for log in &logs {
        check(
            log.population.len() == E2E_POPULATION,
            format!("generation {} has {} members", log.generation, log.population.len()),
        )?;
    }
    for pair in logs.windows(2) {
        check(
            pair[1].best.fused >= pair[0].best.fused,
            format!(
                "best fused fell from {} to {} at generation {}",
                pair[0].best.fused, pair[1].best.fused, pair[1].generation
            ),
        )?;
    }
    let report: EvalReport = serde_json::from_slice(&fa["report.json"]).map_err(|e| e.to_string())?;
    let (dev, held) = split_dev(&items, DEFAULT_DEV_FRACTION).map_err(|e| e.to_string())?;
    check(
        report.item_count == held.len(),
        format!("report covers {} items, held-out split has {}", report.item_count, held.len()),
    )?;
    Ok(format!(
        "{} items ({} fitness / {} held-out), runs {ta:?} and {tb:?}, {} identical artifacts, best {:.4} -> {:.4}",
        items.len(),
        dev.len(),
        held.len(),
        fa.len(),
        logs[0].best.fused,
        logs.last().unwrap().best.fused
    ))
}

/// Held-out mean fused score of `prompt` under `plan`, using the bundled mock stack.
fn held_out_fused(prompt: &str, plan: &MetricPlan) -> Result<f64, String> {
    let items = load_dataset(&toy_dataset(), None).map_err(|e| e.to_string())?;
    let (_, held) = split_dev(&items, DEFAULT_DEV_FRACTION).map_err(|e| e.to_string())?;
    let script = MockScript::load(&workspace().join("configs/mock_script.toml"))
        .map_err(|e| e.to_string())?;
    let llm = MockProvider::new(script);
    let providers = MetricProviders::offline();
    let settings = RequestSettings::default();
    let setup = EvalSetup {
        dataset_name: "toy_arithmetic",
        plan,
        llm: &llm,
        settings: &settings,
        providers: &providers,
    };
    run_eval(prompt, &held, &setup)
        .map(|o| o.report.mean_fused)
        .map_err(|e| e.to_string())
}

fn ablation(tmp: &Path) -> Result<String, String> {
    let full = tmp.join("abl-full");
    let no_po = tmp.join("abl-no-po");
    let single = tmp.join("abl-single");
    optimize(&full, &[])?;
    optimize(&no_po, &["--mode", "no_prompt_optimization"])?;
    optimize(&single, &["--mode", "single_metric"])?;

    let read = |d: &Path, f: &str| fs::read_to_string(d.join(f)).map_err(|e| e.to_string());
    let no_po_prompt = read(&no_po, "best_prompt.txt")?;
    check(
        no_po_prompt.trim_end_matches('\n') == GENERIC_PROMPT,
        format!("no_prompt_optimization emitted {no_po_prompt:?}"),
    )?;
    let single_plan: MetricPlan =
        serde_json::from_str(&read(&single, "plan.json")?).map_err(|e| e.to_string())?;
    check(
        single_plan == MetricPlan::single(MetricKind::Similarity),
        format!("single_metric emitted plan {single_plan}"),
    )?;

    let report = |d: &Path| -> Result<EvalReport, String> {
        serde_json::from_str(&read(d, "report.json")?).map_err(|e| e.to_string())
    };
    let (full_report, no_po_report) = (report(&full)?, report(&no_po)?);
    check(
        no_po_report.prompt == GENERIC_PROMPT && no_po_report.plan == full_report.plan,
        "no_prompt_optimization report does not pair the generic prompt with the full plan",
    )?;
    // Scores under different plans are not comparable, so the single-metric
    // winner is re-scored on the same held-out items under the full plan.
    let single_prompt = read(&single, "best_prompt.txt")?;
    let single_rescored = held_out_fused(single_prompt.trim_end_matches('\n'), &full_report.plan)?;
    let full_fused = full_report.mean_fused;
    let recomputed = held_out_fused(read(&full, "best_prompt.txt")?.trim_end_matches('\n'), &full_report.plan)?;
    check(
        (recomputed - full_fused).abs() < 1e-12,
        format!("re-scoring the full prompt gave {recomputed}, report says {full_fused}"),
    )?;
    check(
        full_fused >= no_po_report.mean_fused,
        format!("full {full_fused:.4} < no_prompt_optimization {:.4}", no_po_report.mean_fused),
    )?;
    check(
        full_fused >= single_rescored,
        format!("full {full_fused:.4} < single_metric (re-scored) {single_rescored:.4}"),
    )?;
    let single_own = report(&single)?.mean_fused;
    check(
        full_fused >= single_own,
        format!("full {full_fused:.4} < single_metric under its own plan {single_own:.4}"),
    )?;
    Ok(format!(
        "held-out fused: full {full_fused:.4}, no_prompt_optimization {:.4}, single_metric {single_rescored:.4} re-scored ({single_own:.4} under its own plan)",
        no_po_report.mean_fused,
    ))
}

fn malformed_response() -> impl Strategy<Value = String> {
    let kind = prop::sample::select(vec![
        "similarity", "diversity", "fluency", "complexity", "Similarity", "logic", "", "sim",
    ]);
    let weight = prop_oneof![
        Just("0".to_string()),
        Just("-1".to_string()),
        Just("NaN".to_string()),
        Just("inf".to_string()),
        Just("1e400".to_string()),
        Just("1e-320".to_string()),
        Just("".to_string()),
        Just("abc".to_string()),
        (0.0f64..10.0).prop_map(|w| w.to_string()),
    ];
    let sep = prop::sample::select(vec!["=", ":", " = ", "==", " "]);
    let line = (kind, sep, weight).prop_map(|(k, s, w)| format!("{k}{s}{w}"));
    let label = prop::sample::select(vec![
        "arithmetic_reasoning", "creative_generation", "language_understanding", "unknown",
    ]);
    let lines = prop::collection::vec(line, 0..6).prop_map(|l| l.join("\n"));
    prop_oneof![
        lines.clone(),
        (label, lines).prop_map(|(t, l)| format!("{t}\n{l}")),
        ".{0,200}",
        "\\PC{0,80}",
        Just("similarity=0.5\nsimilarity=0.5".to_string()),
        Just("{{after:}}".to_string()),
    ]
}

fn selection_fuzz() -> Outcome {
    let sample = TaskSample {
        question: "Joan had 8 kittens and gave 2 away. How many kittens are left?".into(),
        reference: "8 - 2 = 6 kittens.".into(),
    };
    let templates = Templates::default();
    let settings = RequestSettings::default();
    let fallback = FallbackTable::default();
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: SELECTION_FUZZ_CASES,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let fallbacks = Cell::new(0usize);
    let result = runner.run(&malformed_response(), |response| {
        let llm = MockProvider::new(MockScript::new(response.clone()));
        let outcome = catch_unwind(AssertUnwindSafe(|| {
            let samples = [sample.clone()];
            let profile = classify_task(&samples, &llm, &settings, &templates);
            let plan = select_metrics(&profile, &samples, &llm, &settings, &templates, &fallback);
            (profile, plan)
        }));
        let (profile, plan) = match outcome {
            Ok(v) => v,
            Err(_) => return Err(TestCaseError::fail(format!("panic on {response:?}"))),
        };
        prop_assert!(!profile.sample.question.is_empty());
        prop_assert!((1..=4).contains(&plan.len()));
        let kinds: HashSet<MetricKind> = plan.kinds().collect();
        prop_assert_eq!(kinds.len(), plan.len());
        prop_assert!(plan.entries().iter().all(|e| e.weight > 0.0 && e.weight.is_finite()));
        let sum: f64 = plan.entries().iter().map(|e| e.weight).sum();
        prop_assert!((sum - 1.0).abs() <= WEIGHT_SUM_TOLERANCE);
        // Round trip through the serialized form re-validates every invariant.
        let json = serde_json::to_string(&plan).unwrap();
        prop_assert!(serde_json::from_str::<MetricPlan>(&json).is_ok());
        if plan == fallback.plan_for(profile.task_type).unwrap() {
            fallbacks.set(fallbacks.get() + 1);
        }
        Ok(())
    });
    match result {
        Ok(()) => Outcome::Pass(format!(
            "{SELECTION_FUZZ_CASES} responses, all plans valid, {} served by the fallback table",
            fallbacks.get()
        )),
        Err(e) => Outcome::Fail(e.to_string()),
    }
}

fn live_smoke(tmp: &Path) -> Outcome {
    let Ok(config) = std::env::var("PROMPTEVO_LIVE_CONFIG") else {
        return Outcome::Skip(
            "set PROMPTEVO_LIVE_CONFIG to a config with an http provider and a 20-item AddSub subset".into(),
        );
    };
    let run = |mode: &str, dir: &Path| -> Result<EvalReport, String> {
        run_cli(&[
            "optimize", "--config", &config, "--limit", "20", "--mode", mode, "--out",
            dir.to_str().unwrap(),
        ])?;
        let text = fs::read_to_string(dir.join("report.json")).map_err(|e| e.to_string())?;
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    let result = (|| -> Result<String, String> {
        let optimized = run("none", &tmp.join("live-full"))?;
        let baseline = run("no_prompt_optimization", &tmp.join("live-generic"))?;
        let (o, b) = (
            optimized.mean_scores.get(MetricKind::Similarity),
            baseline.mean_scores.get(MetricKind::Similarity),
        );
        match (o, b) {
            (Some(o), Some(b)) if o >= b => Ok(format!("similarity optimized {o:.4} >= generic {b:.4}")),
            (Some(o), Some(b)) => Err(format!("similarity optimized {o:.4} < generic {b:.4}")),
            _ => Err("the selected plan does not include similarity".into()),
        }
    })();
    match result {
        Ok(m) => Outcome::Pass(m),
        Err(m) => Outcome::Fail(m),
    }
}

fn service_conformance() -> Outcome {
    use promptevo_core::backends::conformance::{check_embedder, check_perplexity, check_shuffled_is_less_fluent};
    use promptevo_core::backends::{HttpEmbedder, HttpPerplexity, ServiceConfig};
    let Ok(url) = std::env::var("METRIC_SERVICE_URL") else {
        return Outcome::Skip("set METRIC_SERVICE_URL to a running metric service".into());
    };
    let cfg = ServiceConfig::new(url);
    let ppl = HttpPerplexity::new(&cfg);
    let result = check_embedder(&HttpEmbedder::new(&cfg, None))
        .and_then(|_| check_perplexity(&ppl))
        .and_then(|_| check_shuffled_is_less_fluent(&ppl));
    match result {
        Ok(()) => Outcome::Pass("embedder and perplexity contracts hold".into()),
        Err(e) => Outcome::Fail(e),
    }
}

fn from_result(r: Result<String, String>) -> Outcome {
    match r {
        Ok(m) => Outcome::Pass(m),
        Err(m) => Outcome::Fail(m),
    }
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let tmp = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("[PRIMARY] fusion suite (linearity, convexity, scaling invariance)", Box::new(fusion_suite)),
        ("[PRIMARY] diversity brute-force oracle", Box::new(diversity_oracle)),
        ("[PRIMARY] tournament suite", Box::new(tournament_suite)),
        ("[PRIMARY] deterministic end-to-end optimize", Box::new(|| from_result(end_to_end(tmp.path())))),
        ("[PRIMARY] ablation contract", Box::new(|| from_result(ablation(tmp.path())))),
        ("[PRIMARY] metric-selection totality", Box::new(selection_fuzz)),
        ("[PRIMARY, optional] live smoke test", Box::new(|| live_smoke(tmp.path()))),
        ("[SECONDARY] metric service conformance", Box::new(service_conformance)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        });
        match outcome {
            Outcome::Pass(m) => println!("PASS  {name}: {m}"),
            Outcome::Skip(m) => println!("SKIP  {name}: {m}"),
            Outcome::Fail(m) => {
                failed += 1;
                println!("FAIL  {name}: {m}");
            }
        }
    }
    println!(
        "\nacceptance: {} criteria, {} failed",
        criteria.len(),
        failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
