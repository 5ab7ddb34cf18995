mod support;

use std::path::{Path, PathBuf};

use serde_json::Value;

use sepconf::catalog::{Configuration, SeparatorCatalog, SettingLevel};
use sepconf::ensemble::{ensemble_smallest, kmedoids};
use sepconf::harness::{Override, StubTable};
use sepconf::llm::{
    build_config_prompt, build_description_prompt, nonce, parse_descriptions, CardSource, FixtureEntry, FixtureFile,
    PromptFlags,
};
use sepconf::mps::{histogram, parse_mps};
use sepconf::pool::ConfigurationPool;
use support::*;

struct Env {
    _tmp: tempfile::TempDir,
    root: PathBuf,
}

impl Env {
    fn new() -> Self {
        let tmp = tempfile::tempdir().unwrap();
        let root = tmp.path().to_path_buf();
        Env { _tmp: tmp, root }
    }

    fn path(&self, p: &str) -> String {
        self.root.join(p).to_str().unwrap().to_string()
    }

    fn run(&self, args: &[&str]) -> std::process::Output {
        let store = self.path("store");
        let mut all: Vec<&str> = args.to_vec();
        all.extend(["--store", &store]);
        sepconf(&all)
    }

    /// Card, 100 replay fixtures, and a stub table over `val`/`eval` instance dirs.
    fn pipeline(responses: usize) -> Self {
        let env = Env::new();
        let cat = stub_catalog();
        write_card(&env.root.join("card.toml"));
        let texts: Vec<String> = (0..responses).map(|i| pool_response(&cat, i)).collect();
        write_replay_fixtures(&env.root.join("fixtures"), &cat, &texts);
        let mut ids = instance_dir(&env.root.join("val"), "v", 4);
        ids.extend(instance_dir(&env.root.join("eval"), "e", 3));
        env.write_table(&stub_table(&ids, 0.0));
        env
    }

    fn write_table(&self, table: &StubTable) {
        std::fs::write(self.root.join("table.toml"), table.to_toml_string()).unwrap();
    }

    fn table(&self) -> StubTable {
        StubTable::load(self.root.join("table.toml")).unwrap()
    }

    fn solver_args(&self) -> Vec<String> {
        ["--solver", "stub", "--stub-table", &self.path("table.toml"), "--seeds", "2", "--threads", "1"]
            .map(String::from)
            .to_vec()
    }

    fn generate(&self, extra: &[&str]) -> std::process::Output {
        let (card, fixtures) = (self.path("card.toml"), self.path("fixtures"));
        let mut args = vec!["generate", "--card", &card, "--catalog", "stub", "--fixtures", &fixtures];
        args.extend(extra);
        self.run(&args)
    }

    fn with_solver(&self, args: &[&str]) -> std::process::Output {
        let solver = self.solver_args();
        let mut all: Vec<&str> = args.to_vec();
        all.extend(solver.iter().map(String::as_str));
        self.run(&all)
    }
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

// Typed reads: `Value` maps would reorder configuration levels.
#[derive(serde::Deserialize)]
struct PoolDoc {
    pool: ConfigurationPool,
}

#[derive(serde::Deserialize)]
struct FinalDoc {
    #[serde(rename = "final")]
    config: Configuration,
}

#[derive(serde::Deserialize)]
struct SelectionDoc {
    selection: FinalDoc,
}

fn pool_of(path: &Path) -> ConfigurationPool {
    serde_json::from_str::<PoolDoc>(&std::fs::read_to_string(path).unwrap()).unwrap().pool
}

fn final_of(path: &Path) -> Configuration {
    serde_json::from_str::<SelectionDoc>(&std::fs::read_to_string(path).unwrap()).unwrap().selection.config
}

fn ok(out: &std::process::Output) {
    assert!(out.status.success(), "{}", describe(out));
}

#[test]
fn generate_full_and_single() {
    let env = Env::pipeline(100);
    let out = env.generate(&[]);
    ok(&out);
    let pool = pool_of(&artifact_paths(&out)["pool"]);
    assert_eq!(pool.len(), 100);
    assert!(pool.failures.is_empty());

    let out = env.generate(&["--size", "1"]);
    ok(&out);
    assert_eq!(pool_of(&artifact_paths(&out)["pool"]).len(), 1);
}

#[test]
fn generate_is_idempotent_in_the_store() {
    let env = Env::pipeline(100);
    let a = artifact_paths(&env.generate(&[]))["pool"].clone();
    let b = artifact_paths(&env.generate(&[]))["pool"].clone();
    assert_eq!(a, b);
    let runs = std::fs::read_dir(env.root.join("store/runs")).unwrap().count();
    assert_eq!(runs, 2);
}

#[test]
fn generate_short_pool_is_partial() {
    let env = Env::pipeline(40);
    let out = env.generate(&["--size", "50", "--retries", "1"]);
    assert_eq!(out.status.code(), Some(3), "{}", describe(&out));
    let pool = pool_of(&artifact_paths(&out)["pool"]);
    assert_eq!(pool.len(), 40);
    assert_eq!(pool.failures.len(), 10);
}

#[test]
fn missing_card_is_usage_error() {
    let env = Env::pipeline(1);
    let out = env.run(&["generate", "--card", &env.path("nope.toml"), "--catalog", "stub"]);
    assert_eq!(out.status.code(), Some(2), "{}", describe(&out));
}

#[test]
fn live_client_without_key_is_environment_error() {
    let env = Env::pipeline(1);
    let out = env.generate(&["--client", "http"]);
    assert_eq!(out.status.code(), Some(4), "{}", describe(&out));
}

#[test]
fn config_file_sets_defaults() {
    let env = Env::pipeline(100);
    std::fs::write(env.root.join("sepconf.toml"), "[defaults]\npool_size = 7\n").unwrap();
    let out = env.generate(&["--config-file", &env.path("sepconf.toml")]);
    ok(&out);
    assert_eq!(pool_of(&artifact_paths(&out)["pool"]).len(), 7);
    let bad = env.generate(&["--config-file", &env.path("missing.toml")]);
    assert_eq!(bad.status.code(), Some(2));
}

fn pool_path(env: &Env) -> String {
    artifact_paths(&env.generate(&[]))["pool"].to_str().unwrap().to_string()
}

#[test]
fn llm0_selection_is_pinned() {
    let env = Env::pipeline(100);
    let pool = pool_path(&env);
    let out = env.run(&["ensemble", "--pool", &pool, "--mode", "llm0", "--k", "5"]);
    ok(&out);
    let selection = json(&artifact_paths(&out)["selection"]);
    let config = final_of(&artifact_paths(&out)["selection"]);
    assert_eq!(config.signature(), GOLDEN_LLM0.0);
    assert_eq!(config.content_hash(), GOLDEN_LLM0.1);
    assert_eq!(selection["clustering"]["k"], 5);
}

/// Regression pin over `pool_response(0..100)`; any change here changes shipped selections.
const GOLDEN_LLM0: (&str, &str) = ("doddad", "5696b04abae1de8e409b229f2473bfcf8dbeb1414e054cb7d4131b619ce9be77");

#[test]
fn llmk_picks_the_scripted_medoid() {
    let env = Env::pipeline(100);
    let pool_file = pool_path(&env);
    let pool = pool_of(Path::new(&pool_file));
    let medoids = kmedoids(&pool.configs, 5, 0).unwrap().medoid_indices;
    let mut table = env.table();
    table.overrides.push(Override {
        signature: pool.configs[medoids[3]].signature(),
        instance: None,
        multiplier: Some(0.5),
        time: None,
    });
    table.factors.insert("gomory".into(), [(SettingLevel::Off, 1.2), (SettingLevel::Aggressive, 1.2)].into());
    env.write_table(&table);
    let val = env.path("val");
    let out = env.with_solver(&["ensemble", "--pool", &pool_file, "--mode", "llmk", "--k", "5", "--val", &val]);
    ok(&out);
    let selection = json(&artifact_paths(&out)["selection"]);
    assert_eq!(selection["selection"]["source_index"], 3);
    let validation = &selection["validation"];
    assert_eq!(validation["solves"], 5 * 4 * 2);
    assert_eq!(validation["evaluations"].as_array().unwrap().len(), 5);
    assert_eq!(validation["evaluations"][3]["records"][0]["improvement"], 50.0);
}

#[test]
fn llmk_without_validation_set_is_usage_error() {
    let env = Env::pipeline(100);
    let pool = pool_path(&env);
    let out = env.with_solver(&["ensemble", "--pool", &pool, "--mode", "llmk"]);
    assert_eq!(out.status.code(), Some(2), "{}", describe(&out));
    assert!(String::from_utf8_lossy(&out.stderr).contains("validation"));
}

#[test]
fn k_too_large_is_usage_error() {
    let env = Env::pipeline(3);
    let pool = artifact_paths(&env.generate(&["--size", "3"]))["pool"].to_str().unwrap().to_string();
    let out = env.run(&["ensemble", "--pool", &pool, "--mode", "llm0", "--k", "5"]);
    assert_eq!(out.status.code(), Some(2), "{}", describe(&out));
}

#[test]
fn smallest_delegates() {
    let env = Env::pipeline(100);
    let pool_file = pool_path(&env);
    let out = env.run(&["ensemble", "--pool", &pool_file, "--mode", "smallest"]);
    ok(&out);
    let selection = json(&artifact_paths(&out)["selection"]);
    let expected = ensemble_smallest(&pool_of(Path::new(&pool_file)).configs).unwrap();
    assert_eq!(selection["selection"]["source_index"], expected.source_index.unwrap());
    for mode in ["average", "mode"] {
        ok(&env.run(&["ensemble", "--pool", &pool_file, "--mode", mode]));
    }
}

fn write_config(env: &Env, name: &str, sig: &str) -> String {
    let path = env.root.join(name);
    std::fs::write(&path, sepconf::catalog::serialize_configuration(&from_signature(&stub_catalog(), sig))).unwrap();
    path.to_str().unwrap().to_string()
}

fn summary_of(out: &std::process::Output) -> Value {
    json(&artifact_paths(out)["evaluation"])["summary"].clone()
}

#[test]
fn evaluate_halving_default_and_mixed() {
    let env = Env::pipeline(1);
    let mut table = env.table();
    table.overrides.push(Override { signature: "aadddd".into(), instance: None, multiplier: Some(0.5), time: None });
    for (inst, m) in [("e00", 3.0), ("e01", 1.0), ("e02", 0.5)] {
        table.overrides.push(Override {
            signature: "oooooo".into(),
            instance: Some(inst.into()),
            multiplier: Some(m),
            time: None,
        });
    }
    env.write_table(&table);
    let eval = env.path("eval");
    let csv = env.path("halving.csv");

    let halving = write_config(&env, "halving.txt", "aadddd");
    let out = env.with_solver(&["evaluate", "--config", &halving, "--instances", &eval, "--csv", &csv]);
    ok(&out);
    let s = summary_of(&out);
    assert_eq!((s["median"].as_f64(), s["iqr"].as_f64()), (Some(50.0), Some(0.0)));
    assert!(String::from_utf8_lossy(&out.stdout).contains("50.00 (0.00)"));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);

    let out = env.with_solver(&["evaluate", "--instances", &eval]);
    ok(&out);
    let records = json(&artifact_paths(&out)["evaluation"])["evaluation"]["records"].clone();
    assert!(records.as_array().unwrap().iter().all(|r| r["improvement"] == 0.0));

    let mixed = write_config(&env, "mixed.txt", "oooooo");
    let out = env.with_solver(&["evaluate", "--config", &mixed, "--instances", &eval]);
    ok(&out);
    let s = summary_of(&out);
    assert_eq!(s["median"].as_f64(), Some(0.0));
    assert_eq!(s["censored"], 1);
}

#[test]
fn evaluate_with_failed_instance_is_partial() {
    let env = Env::pipeline(1);
    instance_dir(&env.root.join("more"), "z", 2);
    let mut table = env.table();
    table.instances.insert("z00".into(), Default::default());
    table.instances.get_mut("z00").unwrap().base_time = 3.0;
    env.write_table(&table);
    let out = env.with_solver(&["evaluate", "--instances", &env.path("more")]);
    assert_eq!(out.status.code(), Some(3), "{}", describe(&out));
    let evaluation = json(&artifact_paths(&out)["evaluation"])["evaluation"].clone();
    assert_eq!(evaluation["records"].as_array().unwrap().len(), 1);
    assert_eq!(evaluation["failures"][0]["instance"], "z01");
}

#[test]
fn missing_solver_binary_is_environment_error() {
    let env = Env::pipeline(1);
    let out =
        env.run(&["evaluate", "--instances", &env.path("eval"), "--solver", "scip", "--solver-bin", "/no/such/scip"]);
    assert_eq!(out.status.code(), Some(4), "{}", describe(&out));
}

#[test]
fn baselines_record_their_cost() {
    let env = Env::pipeline(1);
    let val = env.path("val");
    let out = env.with_solver(&["baseline", "search", "--d", "5", "--val", &val]);
    ok(&out);
    let selection = json(&artifact_paths(&out)["selection"]);
    assert_eq!(selection["validation"]["solves"], 5 * 4 * 2);
    assert_eq!(selection["selection"]["candidates_tested"].as_array().unwrap().len(), 5);

    let mut table = env.table();
    table.instances.get_mut("v00").unwrap().usage = [("gomory".to_string(), 5)].into();
    env.write_table(&table);
    let out = env.with_solver(&["baseline", "pruning", "--val", &val]);
    ok(&out);
    assert_eq!(final_of(&artifact_paths(&out)["selection"]).signature(), "odoooo");

    let out = env.with_solver(&["baseline", "anneal", "--val", &val]);
    assert_eq!(out.status.code(), Some(2));
    let out = env.with_solver(&["baseline", "search", "--val", &val]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_columns_and_mismatch() {
    let env = Env::pipeline(1);
    let eval = env.path("eval");
    let halving = write_config(&env, "halving.txt", "aadddd");
    let mut table = env.table();
    table.overrides.push(Override { signature: "aadddd".into(), instance: None, multiplier: Some(0.5), time: None });
    env.write_table(&table);
    let a = artifact_paths(&env.with_solver(&["evaluate", "--config", &halving, "--instances", &eval]))["evaluation"]
        .clone();
    let b = artifact_paths(&env.with_solver(&["evaluate", "--instances", &eval]))["evaluation"].clone();
    let csv = env.path("report.csv");
    let out = env.run(&["report", a.to_str().unwrap(), b.to_str().unwrap(), "--csv", &csv, "--gap"]);
    ok(&out);
    let table = String::from_utf8_lossy(&out.stdout).into_owned();
    let header = table.lines().next().unwrap();
    assert!(header.contains("halving") && header.contains("default"), "{table}");
    assert!(table.contains("50.00 (0.00)") && table.contains("0.00 (0.00)"), "{table}");
    assert!(table.contains("MIP gap difference (%)"), "{table}");
    let csv = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().nth(1).unwrap().starts_with("e00,50,"), "{csv}");

    let c = artifact_paths(&env.with_solver(&["evaluate", "--instances", &env.path("val")]))["evaluation"].clone();
    let out = env.run(&["report", a.to_str().unwrap(), c.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different instance sets"));
}

/// Replay fixtures for a text-free run with `n_desc` descriptions.
fn textfree_fixtures(env: &Env, instance: &Path, n_desc: usize) {
    let cat = stub_catalog();
    let dir = env.root.join("fixtures");
    let hist = histogram(&parse_mps(instance).unwrap());
    let prompt = build_description_prompt(&hist, 5, 1.0, "replay").unwrap();
    let text: String =
        (0..n_desc).map(|i| format!("```\nTitle: Variant {i}\nA covering model, flavour number {i}.\n```\n")).collect();
    save(&dir, &prompt.hash(), vec![(nonce(0, 0), text.clone())]);
    if n_desc == 0 {
        return;
    }
    for mut card in parse_descriptions(&text, 5).unwrap() {
        card.source = CardSource::LlmGenerated { instance: Some(hist.instance.clone()) };
        let prompt = build_config_prompt(&card, &cat, PromptFlags::default(), 1.0, "replay").unwrap();
        save(&dir, &prompt.hash(), (0..20).map(|i| (nonce(i, 0), pool_response(&cat, i))).collect());
    }
}

fn save(dir: &Path, hash: &str, responses: Vec<(u64, String)>) {
    FixtureFile {
        prompt_hash: hash.into(),
        model_id: "recorded".into(),
        responses: responses.into_iter().map(|(nonce, text)| FixtureEntry { nonce, text }).collect(),
    }
    .save(dir)
    .unwrap();
}

#[test]
fn textfree_pool_sizes() {
    let instance = mps_fixtures().join("set_covering_01.mps");
    for (n_desc, size, code) in [(5, 100, 0), (3, 60, 0), (0, 0, 1)] {
        let env = Env::new();
        textfree_fixtures(&env, &instance, n_desc);
        let fixtures = env.path("fixtures");
        let out = env.run(&[
            "textfree",
            "--instance",
            instance.to_str().unwrap(),
            "--catalog",
            "stub",
            "--fixtures",
            &fixtures,
        ]);
        assert_eq!(out.status.code(), Some(code), "{}", describe(&out));
        if size > 0 {
            let run = json(&artifact_paths(&out)["textfree"]);
            assert_eq!(run["pool"]["configs"].as_array().unwrap().len(), size);
            assert_eq!(run["cards"].as_array().unwrap().len(), n_desc);
            let path = artifact_paths(&out)["textfree"].clone();
            let stub = env.root.join("t.toml");
            std::fs::write(&stub, "default_base_time = 2.0\n").unwrap();
            let eval = env.root.join("e");
            instance_dir(&eval, "x", 1);
            let out = env.run(&[
                "evaluate",
                "--config",
                path.to_str().unwrap(),
                "--instances",
                eval.to_str().unwrap(),
                "--solver",
                "stub",
                "--stub-table",
                stub.to_str().unwrap(),
                "--seeds",
                "1",
            ]);
            ok(&out);
        } else {
            assert!(String::from_utf8_lossy(&out.stderr).contains("no problem descriptions"));
        }
    }
}

#[test]
fn histogram_and_filter() {
    let env = Env::new();
    let files: Vec<String> = ["knapsack_01.mps", "set_covering_02.mps"]
        .iter()
        .map(|f| mps_fixtures().join(f).to_str().unwrap().to_string())
        .collect();
    let out = env.run(&["histogram", &files[0], &files[1]]);
    ok(&out);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().next().unwrap().starts_with("instance,n,m"));

    let stats = env.root.join("stats.json");
    std::fs::write(
        &stats,
        r#"[
  {"instance": "easy", "feasible": true, "solved_in_presolve": false, "gap_after_probe": 0.0, "default_work_units": 0.2},
  {"instance": "good", "feasible": true, "solved_in_presolve": false, "gap_after_probe": 0.0, "default_work_units": 40.0},
  {"instance": "unknown", "feasible": true}
]"#,
    )
    .unwrap();
    let out = env.run(&["filter", "--stats", stats.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", describe(&out));
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(text.contains("easy,false,"));
    assert!(text.contains("good,true,"));
}

#[test]
fn catalog_override_must_match_solver() {
    let env = Env::pipeline(1);
    let out = env.run(&[
        "evaluate",
        "--instances",
        &env.path("eval"),
        "--solver",
        "stub",
        "--stub-table",
        &env.path("table.toml"),
        "--catalog",
        "scip",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", describe(&out));
    let _ = SeparatorCatalog::shipped(sepconf::catalog::Solver::Scip);
}
