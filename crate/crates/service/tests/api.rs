use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use coexplore_core::expert::ei_standard;
use coexplore_core::{AttrSet, Error, ExpertKnowledge, Implication};
use coexplore_service::{router, Store};

fn experts() -> Vec<ExpertKnowledge> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/olympics");
    ["expert1.json", "expert2.json", "expert3.json"]
        .iter()
        .map(|f| ExpertKnowledge::load(&dir.join(f)).unwrap())
        .collect()
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, v)
}

fn olympics_spec() -> Value {
    let e = experts();
    json!({
        "attributes": e[0].attributes(),
        "roster": [{"id": "E1"}, {"id": "E2"}, {"id": "E3", "name": "combat sports fan"}],
        "strategy": {"kind": "iterative"},
        "lectic_order": ["female only events", "male only events", "part of ≥ 8 olympics", "≥ 5 events", "≥ 10 events"],
    })
}

fn scripted_answer(q: &Value, e: &ExpertKnowledge) -> Value {
    let attrs = e.attributes();
    let set = |v: &Value| {
        AttrSet::from_indices(
            v.as_array()
                .unwrap()
                .iter()
                .map(|n| attrs.iter().position(|a| a == n.as_str().unwrap()).unwrap()),
        )
    };
    let imp = Implication::new(set(&q["premise"]), set(&q["conclusion"]));
    serde_json::to_value(ei_standard(&imp, e).to_json(attrs)).unwrap()
}

async fn open(dir: &std::path::Path) -> Router {
    let (store, failed) = Store::open(dir).await.unwrap();
    assert!(failed.is_empty());
    router(Arc::new(store))
}

/// Reads SSE frames until `n` events arrived or the stream stalls.
async fn read_events(app: &Router, uri: &str, last_id: Option<&str>, n: usize) -> Vec<(u64, String, Value)> {
    let mut req = Request::builder().uri(uri);
    if let Some(l) = last_id {
        req = req.header("last-event-id", l);
    }
    let resp = app.clone().oneshot(req.body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let mut body = resp.into_body();
    let mut buf = String::new();
    let mut out = Vec::new();
    while out.len() < n {
        let frame = match tokio::time::timeout(Duration::from_secs(2), body.frame()).await {
            Ok(Some(Ok(f))) => f,
            _ => break,
        };
        if let Ok(data) = frame.into_data() {
            buf.push_str(std::str::from_utf8(&data).unwrap());
        }
        while let Some(end) = buf.find("\n\n") {
            let block: String = buf.drain(..end + 2).collect();
            let (mut id, mut name, mut data) = (0, String::new(), Value::Null);
            for line in block.lines() {
                if let Some(v) = line.strip_prefix("id: ") {
                    id = v.parse().unwrap();
                } else if let Some(v) = line.strip_prefix("event: ") {
                    name = v.to_string();
                } else if let Some(v) = line.strip_prefix("data: ") {
                    data = serde_json::from_str(v).unwrap();
                }
            }
            if !name.is_empty() {
                out.push((id, name, data));
            }
        }
    }
    out
}

#[tokio::test]
async fn olympics_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let app = open(dir.path()).await;
    let group = experts();

    let (st, created) = call(&app, "POST", "/sessions", Some(olympics_spec())).await;
    assert_eq!(st, StatusCode::CREATED);
    let id = created["id"].as_str().unwrap().to_string();
    let token = |e: &str| {
        created["roster"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["id"] == e)
            .unwrap()["token"]
            .as_str()
            .unwrap()
            .to_string()
    };
    assert_eq!(created["snapshot"]["pending"]["premise"], json!([]));

    let (st, _) = call(&app, "GET", &format!("/sessions/{id}/pending?expert=E1&token=nope"), None).await;
    assert_eq!(st, StatusCode::FORBIDDEN);
    let (st, _) = call(&app, "GET", "/sessions/missing", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);

    // E2 was not asked the first question
    let (st, err) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/answers"),
        Some(json!({"expert": "E2", "token": token("E2"), "question_id": 1, "answer": {"kind": "accept"}})),
    )
    .await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(err["error"], "stale");

    // a residual outside the conclusion is refused
    let (st, _) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/answers"),
        Some(json!({"expert": "E1", "token": token("E1"), "question_id": 1,
                     "answer": {"kind": "unknown", "residual": ["nonsense"]}})),
    )
    .await;
    assert!(st.is_client_error());

    // a row that does not refute ∅ ⇒ M is refused with the row named
    let (st, err) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/answers"),
        Some(json!({"expert": "E1", "token": token("E1"), "question_id": 1,
                     "answer": {"kind": "reject", "counterexamples": {"objects": [{"name": "Boxing", "row": "XXXXX"}]}}})),
    )
    .await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(err["message"].as_str().unwrap().contains("Boxing"));

    let mut answered = 0;
    loop {
        let (_, snap) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
        let Some(p) = snap["pending"].as_object().cloned() else { break };
        let who = p["awaiting"][0].as_str().unwrap().to_string();
        let (st, pend) = call(
            &app,
            "GET",
            &format!("/sessions/{id}/pending?expert={who}&token={}", token(&who)),
            None,
        )
        .await;
        assert_eq!(st, StatusCode::OK);
        let q = pend["question"].clone();
        let e = group.iter().find(|e| e.name == who).unwrap();
        let body = json!({"expert": who, "token": token(&who), "question_id": q["question_id"],
                          "answer": scripted_answer(&q, e)});
        let (st, reply) = call(&app, "POST", &format!("/sessions/{id}/answers"), Some(body.clone())).await;
        assert_eq!(st, StatusCode::OK, "{reply}");
        answered += 1;
        if answered == 1 {
            let (_, snap) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
            assert_eq!(snap["real"]["objects"].as_array().unwrap().len(), 10);
        }
        // the same answer twice is refused
        let (st, _) = call(&app, "POST", &format!("/sessions/{id}/answers"), Some(body)).await;
        assert_eq!(st, StatusCode::CONFLICT);
    }
    let (_, snap) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(snap["finished"], true);
    assert_eq!(snap["accepted"].as_array().unwrap().len(), 2);
    assert_eq!(snap["fictitious_rows"]["objects"].as_array().unwrap().len(), 3);
    assert_eq!(answered, 16);

    // full event history, then resuming after a given id
    let total = snap["events"].as_u64().unwrap() as usize;
    let all = read_events(&app, &format!("/sessions/{id}/events"), None, total).await;
    assert_eq!(all.len(), total);
    assert_eq!(all[0].1, "session_created");
    assert!(all[0].2.get("tokens").is_none());
    assert_eq!(all.last().unwrap().1, "finished");
    assert!(all.iter().enumerate().all(|(i, e)| e.0 == i as u64 + 1));
    let tail = read_events(&app, &format!("/sessions/{id}/events?from=3"), Some("10"), total - 10).await;
    assert_eq!(tail.len(), total - 10);
    assert_eq!(tail[0].0, 11);

    // a restarted server serves the same state
    let again = open(dir.path()).await;
    let (_, snap2) = call(&again, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(snap2.to_string(), snap.to_string());
}

#[tokio::test]
async fn live_events_are_streamed() {
    let dir = tempfile::tempdir().unwrap();
    let app = open(dir.path()).await;
    let (_, created) = call(&app, "POST", "/sessions", Some(olympics_spec())).await;
    let id = created["id"].as_str().unwrap().to_string();
    let t1 = created["roster"][0]["token"].as_str().unwrap().to_string();
    let reader = {
        let app = app.clone();
        let id = id.clone();
        tokio::spawn(async move { read_events(&app, &format!("/sessions/{id}/events"), Some("3"), 4).await })
    };
    tokio::time::sleep(Duration::from_millis(100)).await;
    let group = experts();
    let q = json!({"premise": [], "conclusion": group[0].attributes()});
    let body = json!({"expert": "E1", "token": t1, "question_id": 1, "answer": scripted_answer(&q, &group[0])});
    let (st, _) = call(&app, "POST", &format!("/sessions/{id}/answers"), Some(body)).await;
    assert_eq!(st, StatusCode::OK);
    let got = reader.await.unwrap();
    let names: Vec<&str> = got.iter().map(|e| e.1.as_str()).collect();
    assert_eq!(names, ["expert_answered", "answer_merged", "question_posed", "expert_asked"]);
    assert_eq!(got[0].0, 4);
}

#[tokio::test]
async fn ignorant_needs_nobody() {
    let dir = tempfile::tempdir().unwrap();
    let app = open(dir.path()).await;
    let spec = json!({"attributes": ["a", "b"], "strategy": {"kind": "ignorant"}});
    let (st, created) = call(&app, "POST", "/sessions", Some(spec)).await;
    assert_eq!(st, StatusCode::CREATED);
    assert_eq!(created["snapshot"]["finished"], true);
    assert_eq!(created["snapshot"]["ledger"]["total"], 0);

    let dup = json!({"attributes": ["a"], "roster": [{"id": "x"}, {"id": "x"}], "strategy": {"kind": "broadcast"}});
    let (st, _) = call(&app, "POST", "/sessions", Some(dup)).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    let live_max = json!({"attributes": ["a"], "roster": [{"id": "x"}], "strategy": {"kind": "max_knowledge"}});
    let (st, _) = call(&app, "POST", "/sessions", Some(live_max)).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn simulated_sessions_run_to_the_end() {
    let dir = tempfile::tempdir().unwrap();
    let app = open(dir.path()).await;
    let docs: Vec<Value> = experts()
        .iter()
        .map(|e| serde_json::from_str(&e.to_json_string()).unwrap())
        .collect();
    let spec = json!({"attributes": experts()[0].attributes(), "strategy": {"kind": "max_knowledge"},
                      "mode": "simulated", "experts": docs});
    let (st, created) = call(&app, "POST", "/sessions", Some(spec)).await;
    assert_eq!(st, StatusCode::CREATED, "{created}");
    assert_eq!(created["snapshot"]["finished"], true);
    assert_eq!(created["snapshot"]["ledger"]["total"], 3);
}

#[tokio::test]
async fn torn_and_corrupt_logs() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let app = open(dir.path()).await;
        let (_, created) = call(&app, "POST", "/sessions", Some(olympics_spec())).await;
        created["id"].as_str().unwrap().to_string()
    };
    let path = dir.path().join(format!("{id}.jsonl"));
    let good = std::fs::read_to_string(&path).unwrap();

    std::fs::write(&path, format!("{good}{{\"seq\":4,\"eve")).unwrap();
    let app = open(dir.path()).await;
    let (st, _) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), good);

    let mut lines: Vec<&str> = good.lines().collect();
    lines[1] = "not json";
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    let (_, failed) = Store::open(dir.path()).await.unwrap();
    assert_eq!(failed.len(), 1);
    assert!(matches!(failed[0].1, Error::Replay { line: 2, .. }));
}
