mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};
use shapeprog_core::aep::AepConfig;
use shapeprog_core::dsl::{print, EditKind, KindFamily};
use shapeprog_core::llm::{
    generate_requests, infer, GenerateMode, InferOptions, LlmError, MockProvider, RemoteConfig, RemoteProvider, Workflow,
};
use shapeprog_core::pipeline::{edit_from_request, proxydural, PipelineError};

use common::graph;

fn options(shape: &str, n_votes: usize) -> InferOptions {
    InferOptions { shape: shape.into(), n_votes, ..InferOptions::default() }
}

fn golden() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/golden/chair_widen.txt")).unwrap()
}

#[test]
fn widen_the_chair_end_to_end() {
    let g = graph("chair");
    let out = edit_from_request(&g, "widen the chair", &MockProvider::builtin(), &options("chair", 5), &AepConfig::default())
        .unwrap();
    let seed_tally = &out.bundle.votes["seed"];
    assert_eq!(seed_tally.malformed, 1);
    assert_eq!(seed_tally.counts[0].1, 3);
    assert!(matches!(out.bundle.seeds.ops[0].kind, EditKind::Scale { .. }));
    assert_eq!(out.bundle.seeds.ops[0].operand.part(), Some("seat"));
    for leg in ["leg_fl", "leg_fr", "leg_bl", "leg_br"] {
        assert_eq!(out.bundle.type_hints.get(leg), Some(&KindFamily::Translate), "{leg}");
    }
    assert!(out.bundle.invalid_relations().is_empty());
    assert_eq!(print(out.program()), golden());
}

#[test]
fn transcript_holds_every_prompt_and_response() {
    let g = graph("chair");
    let b = infer("widen the chair", &g, &MockProvider::builtin(), &options("chair", 5)).unwrap();
    let subjects = shapeprog_core::llm::validity_subjects(&g).len();
    assert_eq!(b.transcript.len(), 5 * (2 + subjects));
    assert!(b.transcript.iter().all(|e| e.response.is_some() && e.temperature == 0.7));
    let rejected: Vec<_> = b.transcript.iter().filter(|e| e.rejected.is_some()).collect();
    assert_eq!(rejected.len(), 1);
    assert_eq!(rejected[0].workflow, Workflow::Seed);
    assert!(b.transcript.iter().all(|e| e.prompt.contains("widen the chair")));
}

#[test]
fn voted_invalid_symmetry_is_disabled() {
    let g = graph("chair");
    let out = edit_from_request(
        &g,
        "lengthen the back legs only",
        &MockProvider::builtin(),
        &options("chair", 5),
        &AepConfig::default(),
    )
    .unwrap();
    assert_eq!(out.bundle.invalid_relations(), ["sym1"]);
    assert!(out.propagation.report.disabled.contains(&"sym1".to_string()));
    let moved: Vec<_> = out.program().ops.iter().filter_map(|o| o.operand.part()).collect();
    assert!(moved.contains(&"leg_bl") && moved.contains(&"leg_br"));
    assert!(!moved.contains(&"leg_fl") && !moved.contains(&"leg_fr"));
}

#[test]
fn single_vote_uses_zero_temperature() {
    let g = graph("chair");
    let b = infer("widen the chair", &g, &MockProvider::builtin(), &options("chair", 1)).unwrap();
    assert!(b.transcript.iter().all(|e| e.temperature == 0.0 && e.sample == 0));
    assert_eq!(b.votes["seed"].valid(), 1);
    assert!(matches!(infer("widen the chair", &g, &MockProvider::builtin(), &options("chair", 4)), Err(LlmError::BadVoteCount(4))));
}

#[test]
fn missing_transcripts_surface_as_provider_errors() {
    let g = graph("chair");
    let err = infer("paint it blue", &g, &MockProvider::builtin(), &options("chair", 3)).unwrap_err();
    assert!(matches!(err, LlmError::ProviderUnavailable(_)));
}

#[test]
fn all_malformed_seeds_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("chair").join("shrink-it");
    std::fs::create_dir_all(&base).unwrap();
    std::fs::write(base.join("seed.txt"), "I am not sure.\n---\nseed: melt seat\n").unwrap();
    std::fs::write(base.join("hints.txt"), "hints: none\n").unwrap();
    std::fs::write(base.join("valid.txt"), "valid: yes\n").unwrap();
    let err = infer("shrink it", &graph("chair"), &MockProvider::new(dir.path()), &options("chair", 3)).unwrap_err();
    assert_eq!(err, LlmError::AllResponsesMalformed { workflow: Workflow::Seed, count: 3 });
}

#[test]
fn proxydural_stacks_three_sliders() {
    let g = graph("chair");
    let model = proxydural(&g, &MockProvider::builtin(), &options("chair", 5), &AepConfig::default()).unwrap();
    assert_eq!(model.requests, ["widen the seat", "make the back taller", "lengthen the legs"]);
    assert_eq!(model.outcomes.len(), 3);
    let names: Vec<&str> = model.program.params.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(names, ["x", "x_2", "x_3"]);
    let total: usize = model.outcomes.iter().map(|o| o.program().ops.len()).sum();
    assert_eq!(model.program.ops.len(), total);
}

#[test]
fn variations_and_empty_generations() {
    let g = graph("chair");
    let v = generate_requests(&g, &MockProvider::builtin(), &GenerateMode::Variations("widen the chair".into()), "chair").unwrap();
    assert!(v.requests.len() >= 2);
    assert!(v.warnings.is_empty());

    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("chair")).unwrap();
    std::fs::write(dir.path().join("chair").join("proxydural.txt"), "Nothing comes to mind.\n").unwrap();
    let p = MockProvider::new(dir.path());
    let e = generate_requests(&g, &p, &GenerateMode::Proxydural, "chair").unwrap();
    assert!(e.requests.is_empty());
    assert_eq!(e.warnings.len(), 1);
    assert!(matches!(proxydural(&g, &p, &options("chair", 1), &AepConfig::default()), Err(PipelineError::NoRequests)));
}

fn stub_server(reply: &'static str, hits: Arc<AtomicUsize>) -> String {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        rt.block_on(async move {
            let app = Router::new().route(
                "/v1/chat/completions",
                post(move |Json(body): Json<Value>| {
                    let hits = hits.clone();
                    async move {
                        hits.fetch_add(1, Ordering::SeqCst);
                        assert_eq!(body["messages"][1]["role"], "user");
                        Json(json!({"choices": [{"message": {"role": "assistant", "content": reply}}]}))
                    }
                }),
            );
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    format!("http://{}/v1/chat/completions", rx.recv().unwrap())
}

#[test]
fn remote_provider_talks_chat_completions() {
    let hits = Arc::new(AtomicUsize::new(0));
    let endpoint = stub_server("seed: scale seat axis=x origin=center\nhints: none\nvalid: yes\n", hits.clone());
    let provider = RemoteProvider::new(RemoteConfig { endpoint, ..RemoteConfig::default() }).unwrap();
    let g = graph("chair");
    let b = infer("widen the chair", &g, &provider, &options("chair", 3)).unwrap();
    assert_eq!(b.votes["seed"].counts, [(print(&b.seeds), 3)]);
    assert_eq!(hits.load(Ordering::SeqCst), b.transcript.len());
}

#[test]
fn unreachable_remote_is_a_provider_error() {
    let provider = RemoteProvider::new(RemoteConfig {
        endpoint: "http://127.0.0.1:9/v1/chat/completions".into(),
        timeout_secs: 2,
        ..RemoteConfig::default()
    })
    .unwrap();
    let err = infer("widen the chair", &graph("chair"), &provider, &options("chair", 1)).unwrap_err();
    assert!(matches!(err, LlmError::ProviderUnavailable(_)));
}
