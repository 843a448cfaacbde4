#![allow(dead_code)]

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};
use tubepulse_core::features::build_matrix;
use tubepulse_core::ingest::parse_csv;
use tubepulse_core::model::train;
use tubepulse_core::{BoostParams, FeatureProfile, ModelSpec, RegressionModel, TargetTransform, TreeParams};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures().join(name)
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn finish(out: Output) -> Run {
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn tubepulse(args: &[&str]) -> Run {
    tubepulse_stdin(args, "")
}

pub fn tubepulse_stdin(args: &[&str], stdin: &str) -> Run {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tubepulse"))
        .args(args)
        .env("RUST_LOG", "warn")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    finish(child.wait_with_output().unwrap())
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Small, fast model on the 200-row fixture.
pub fn quick_model(profile: FeatureProfile) -> RegressionModel {
    let (records, _) = parse_csv(File::open(fixture("synthetic_200.csv")).unwrap()).unwrap();
    let m = build_matrix(&records, &profile).unwrap();
    let spec = ModelSpec::Boosted(BoostParams {
        n_rounds: 30,
        tree: TreeParams {
            max_depth: 3,
            ..TreeParams::default()
        },
        ..BoostParams::default()
    });
    train(&spec, &m, TargetTransform::Log1p, None).unwrap()
}

/// The API schema file under docs/, validated per definition.
pub struct Schema(Value);

impl Schema {
    pub fn load() -> Self {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/api.schema.json");
        Schema(serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap())
    }

    pub fn check(&self, def: &str, instance: &Value) -> Result<(), String> {
        let schema = json!({
            "$schema": "https://json-schema.org/draft/2020-12/schema",
            "$defs": self.0["$defs"],
            "$ref": format!("#/$defs/{def}"),
        });
        let validator = jsonschema::validator_for(&schema).map_err(|e| e.to_string())?;
        let errors: Vec<String> = validator
            .iter_errors(instance)
            .map(|e| format!("{e} at {}", e.instance_path))
            .collect();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(format!("{def}: {}", errors.join("; ")))
        }
    }
}
