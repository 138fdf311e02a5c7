use std::path::Path;
use std::process::{Command, Output};

use axum::body::{to_bytes, Body};
use axum::http::Request;
use glc_cli::config::{FileConfig, FlagConfig, Settings};
use glc_cli::server::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

fn glc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glc"))
        .args(args)
        .env_remove("GLC_SEED")
        .env_remove("GLC_RESTARTS")
        .output()
        .unwrap()
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn wbc() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/wbc.csv").to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn jl_min_dim_json() {
    let v = stdout_json(&glc(&["jl", "min-dim", "--m", "10", "--eps", "0.5", "--json"]));
    assert_eq!(v["k_min"], 74);
}

#[test]
fn jl_table_lists_every_combination() {
    let o = glc(&["jl", "min-dim", "--m", "10,100", "--eps", "0.3,0.5", "--published"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("205"));
    assert!(text.contains("1900"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = glc(&["jl", "min-dim", "--m", "10", "--eps", "0.5", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn operation_errors_exit_1_with_json() {
    let o = glc(&["jl", "min-dim", "--m", "10", "--eps", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "domain");
}

#[test]
fn spc_render_keeps_the_point_values() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "p.csv", "x1,x2,x3,x4,x5,x6,class\n3,2,1,4,2,6,a\n");
    let o = glc(&["render", "--data", &data, "--system", "spc"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = String::from_utf8(o.stdout).unwrap();
    assert!(svg.contains("data-local=\"3.000000,2.000000 1.000000,4.000000 2.000000,6.000000\""));
}

#[test]
fn fsp_on_wbc_meets_the_target() {
    let v = stdout_json(&glc(&["fsp", "--data", &wbc(), "--json"]));
    assert!(v["report"]["accuracy"].as_f64().unwrap() >= 0.90);
    assert!(v["rule"]["clauses"].as_array().unwrap().len() <= 3);
}

#[test]
fn steps_for_a_case() {
    let v = stdout_json(&glc(&[
        "steps", "--a", "1", "--b", "-1", "--c", "0", "--domain", "0,4", "--resolution", "1", "--case", "2.5,1", "--json",
    ]));
    assert!(v["text"].as_str().unwrap().starts_with("If 2 ≤ x1 < 3"));
}

#[test]
fn cpcr_encode_then_decode() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("img.png");
    let o = glc(&["cpcr", "encode", "--levels", "3,2,3,2,5,9", "--out", img.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read(&img).unwrap().starts_with(b"\x89PNG"));
    let sidecar = dir.path().join("img.json");
    let v = stdout_json(&glc(&["cpcr", "decode", "--image", sidecar.to_str().unwrap(), "--json"]));
    assert_eq!(v["levels"], json!([3, 2, 3, 2, 5, 9]));
}

#[test]
fn train_prune_explain_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let m = model.to_str().unwrap();
    let o = glc(&["--seed", "1", "train-glcl", "--data", &wbc(), "--restarts", "2", "--out", m]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&glc(&["prune", "--data", &wbc(), "--model", m, "--json"]));
    assert!(v["report"]["accuracy_after"].as_f64().unwrap() > 0.9);

    let artifact: glc_core::ModelArtifact = serde_json::from_slice(&std::fs::read(&model).unwrap()).unwrap();
    let linear = artifact.model().unwrap();
    let text = std::fs::read_to_string(wbc()).unwrap();
    let d = glc_cli::ops::load_text(&text, "class", b',', 10_000).unwrap().raw;
    let wrong = (0..d.len())
        .find(|&i| {
            let x = artifact.normalization.apply(d.row(i)).unwrap();
            glc_core::glc_l::classify(&x, &linear).unwrap() != d.labels()[i]
        })
        .expect("some WBC case is misclassified");
    let row = wrong.to_string();
    let v = stdout_json(&glc(&["explain", "--data", &wbc(), "--model", m, "--row", &row, "--json"]));
    assert_eq!(v["neighbors"].as_array().unwrap().len(), 3);
    let o = glc(&["explain", "--data", &wbc(), "--model", m, "--row", if wrong == 0 { "1" } else { "0" }]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn arrows_and_distortion() {
    let dir = tempfile::tempdir().unwrap();
    let series = write(dir.path(), "s.csv", "x,y\n0,0\n1,1\n2,0.5\n3,2\n4,1\n");
    let v = stdout_json(&glc(&["arrows", "--series", &series, "--cols", "2", "--rows", "2", "--json"]));
    assert_eq!(v["field"]["arrows"].as_array().unwrap().len(), 4);
    let high = write(dir.path(), "h.csv", "0,0,0\n1,0,0\n0,2,0\n");
    let v = stdout_json(&glc(&["distortion", "--high", &high, "--low", &high, "--json"]));
    assert!(v.is_object());
}

/// The CLI and the HTTP service share one code path, so the same inputs
/// and seed must give byte-identical artifacts.
#[tokio::test]
async fn cli_and_http_agree() {
    let dir = tempfile::tempdir().unwrap();
    let csv = std::fs::read_to_string(wbc()).unwrap();
    let model = dir.path().join("m.json");
    let svg = dir.path().join("r.svg");
    let o = glc(&["--seed", "4", "train-glcl", "--data", &wbc(), "--restarts", "3", "--out", model.to_str().unwrap()]);
    assert!(o.status.success());
    let o = glc(&["render", "--data", &wbc(), "--system", "cpc", "--pairing", "1-2,3-4,5-6,7-8,9-10", "--out", svg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let settings = Settings::resolve(&FlagConfig::default(), |_| None, &FileConfig::default()).unwrap();
    let app = router(AppState::new(settings).unwrap());
    let send = |method: &str, uri: String, body: Value| {
        let app = app.clone();
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .body(Body::from(if body.is_null() { String::new() } else { body.to_string() }))
            .unwrap();
        async move { to_bytes(app.oneshot(req).await.unwrap().into_body(), usize::MAX).await.unwrap() }
    };
    let created: Value = serde_json::from_slice(&send("POST", "/sessions".into(), json!({ "csv": csv })).await).unwrap();
    let id = created["id"].as_str().unwrap();
    let trained: Value = serde_json::from_slice(
        &send("POST", format!("/sessions/{id}/glcl/train"), json!({ "seed": 4, "restarts": 3 })).await,
    )
    .unwrap();
    let cli_model: Value = serde_json::from_slice(&std::fs::read(&model).unwrap()).unwrap();
    assert_eq!(trained["model"], cli_model);

    let http_svg = send("GET", format!("/sessions/{id}/render/cpc?pairing=1-2,3-4,5-6,7-8,9-10"), Value::Null).await;
    assert_eq!(http_svg.to_vec(), std::fs::read(&svg).unwrap());
}
