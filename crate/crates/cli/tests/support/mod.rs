//! Builders shared by the CLI integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sepconf::catalog::{Configuration, Provenance, SeparatorCatalog, SettingLevel, Solver};
use sepconf::harness::{StubInstance, StubTable};
use sepconf::llm::{
    build_config_prompt, format_config_block, nonce, FixtureEntry, FixtureFile, ProblemCard, PromptFlags,
};

pub fn stub_catalog() -> SeparatorCatalog {
    SeparatorCatalog::shipped(Solver::Stub)
}

pub fn mps_fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/mps")
}

pub fn from_signature(cat: &SeparatorCatalog, sig: &str) -> Configuration {
    let levels: Vec<SettingLevel> = sig
        .chars()
        .map(|c| match c {
            'o' => SettingLevel::Off,
            'a' => SettingLevel::Aggressive,
            _ => SettingLevel::Default,
        })
        .collect();
    Configuration::from_levels(cat, &levels, Provenance::Manual).unwrap()
}

/// `n` distinct one-row MPS files named `<prefix>NN.mps`.
pub fn instance_dir(dir: &Path, prefix: &str, n: usize) -> Vec<String> {
    std::fs::create_dir_all(dir).unwrap();
    (0..n)
        .map(|i| {
            let id = format!("{prefix}{i:02}");
            let text = format!(
                "NAME {id}\nROWS\n N obj\n L c1\nCOLUMNS\n x obj 1 c1 1\n y obj 2 c1 1\nRHS\n rhs c1 {}\nBOUNDS\n UP bnd x 1\n UP bnd y 1\nENDATA\n",
                i + 1
            );
            std::fs::write(dir.join(format!("{id}.mps")), text).unwrap();
            id
        })
        .collect()
}

pub fn stub_table(ids: &[String], noise: f64) -> StubTable {
    let mut t = StubTable { noise, ..Default::default() };
    for (i, id) in ids.iter().enumerate() {
        t.instances.insert(id.clone(), StubInstance { base_time: 5.0 + (i % 7) as f64, ..Default::default() });
    }
    t
}

pub fn card() -> ProblemCard {
    ProblemCard::from_toml_str(
        r#"
title = "Weighted set cover"
description = "Choose a cheapest family of subsets so that every element of the ground set is covered."
latex_model = "\\min \\sum_j c_j x_j \\text{ s.t. } \\sum_{j \\ni i} x_j \\ge 1, x \\in \\{0,1\\}^n"
"#,
    )
    .unwrap()
}

pub fn write_card(path: &Path) {
    let c = card();
    let text = format!("title = {:?}\ndescription = {:?}\nlatex_model = {:?}\n", c.title, c.description, c.latex_model);
    std::fs::write(path, text).unwrap();
}

/// Config-block response for sample `i`; yields many distinct configurations.
pub fn pool_response(cat: &SeparatorCatalog, i: usize) -> String {
    let sig: String = (0..cat.len())
        .map(|j| match (i * (j + 3) + j) % 5 {
            0 => 'o',
            1 => 'a',
            _ => 'd',
        })
        .collect();
    format_config_block(&from_signature(cat, &sig))
}

/// Records first-attempt responses for the default generate prompt.
pub fn write_replay_fixtures(dir: &Path, cat: &SeparatorCatalog, responses: &[String]) {
    let prompt = build_config_prompt(&card(), cat, PromptFlags::default(), 1.0, "replay").unwrap();
    let file = FixtureFile {
        prompt_hash: prompt.hash(),
        model_id: "recorded".into(),
        responses: responses
            .iter()
            .enumerate()
            .map(|(i, text)| FixtureEntry { nonce: nonce(i, 0), text: text.clone() })
            .collect(),
    };
    file.save(dir).unwrap();
}

pub fn sepconf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sepconf"))
        .args(args)
        .env_remove("SEPCONF_CONFIG")
        .env_remove("SEPCONF_LLM_API_KEY")
        .output()
        .expect("binary runs")
}

/// `kind: path` lines printed by artifact-writing commands.
pub fn artifact_paths(out: &Output) -> BTreeMap<String, PathBuf> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter_map(|l| l.split_once(": "))
        .filter(|(k, _)| ["pool", "selection", "evaluation", "textfree"].contains(k))
        .map(|(k, v)| (k.to_string(), PathBuf::from(v)))
        .collect()
}

pub fn describe(out: &Output) -> String {
    format!(
        "status {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    )
}

/// Every file under `root` except the `runs/` sidecars, keyed by relative path.
pub fn content_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            let rel = path.strip_prefix(root).unwrap().to_path_buf();
            if rel.starts_with("runs") {
                continue;
            }
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}
