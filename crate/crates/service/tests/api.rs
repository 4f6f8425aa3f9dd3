mod common;

use std::collections::HashSet;
use std::thread;

use common::{cast, Server};
use reqwest::Method;
use serde_json::{json, Value};
use tempfile::TempDir;

const SLOT: &str = "2026-11-02T09:00:00Z/2026-11-02T09:30:00Z";

fn protected_endpoints(pid: &str) -> Vec<(Method, String)> {
    let p = |s: &str| s.replace("{p}", pid);
    vec![
        (Method::POST, "/auth/logout".into()),
        (Method::GET, "/me".into()),
        (Method::PUT, "/me/profile".into()),
        (Method::POST, "/accounts".into()),
        (Method::GET, "/users?q=a".into()),
        (Method::GET, "/online".into()),
        (Method::POST, p("/patients/{p}/entries")),
        (Method::GET, p("/patients/{p}/timeline")),
        (Method::GET, p("/patients/{p}/plan")),
        (Method::PUT, p("/patients/{p}/plan")),
        (Method::GET, p("/patients/{p}/plan/revisions")),
        (Method::POST, "/plan-revisions/x/review".into()),
        (Method::GET, p("/patients/{p}/account")),
        (Method::POST, p("/patients/{p}/account/items")),
        (Method::POST, p("/patients/{p}/account/pay")),
        (Method::GET, p("/patients/{p}/emr")),
        (Method::POST, p("/patients/{p}/emr")),
        (Method::GET, p("/patients/{p}/emr/export")),
        (Method::POST, p("/patients/{p}/consultations")),
        (Method::GET, p("/patients/{p}/grants")),
        (Method::POST, p("/patients/{p}/grants")),
        (Method::GET, p("/patients/{p}/episodes")),
        (Method::PUT, "/emr/x".into()),
        (Method::POST, "/grants/x/revoke".into()),
        (Method::GET, "/requests".into()),
        (Method::POST, "/requests".into()),
        (Method::GET, "/requests/x".into()),
        (Method::POST, "/requests/x/decision".into()),
        (Method::GET, "/connections".into()),
        (Method::POST, "/connections".into()),
        (Method::POST, "/posts".into()),
        (Method::GET, "/posts/x".into()),
        (Method::POST, "/posts/x/like".into()),
        (Method::GET, "/feed".into()),
        (Method::POST, "/events".into()),
        (Method::GET, "/groups".into()),
        (Method::POST, "/groups".into()),
        (Method::POST, "/groups/x/join".into()),
        (Method::POST, "/groups/x/leave".into()),
        (Method::GET, "/motd".into()),
        (Method::POST, "/motd".into()),
        (Method::GET, "/messages".into()),
        (Method::POST, "/messages".into()),
        (Method::GET, "/messages/with/x".into()),
        (Method::GET, "/suggestions".into()),
        (Method::GET, "/search?q=x".into()),
        (Method::POST, "/episodes".into()),
        (Method::GET, "/episodes/x".into()),
        (Method::POST, "/episodes/x/advance".into()),
        (Method::GET, "/episodes/x/report".into()),
        (Method::GET, "/notifications".into()),
        (Method::POST, "/notifications/read".into()),
        (Method::GET, "/audit".into()),
    ]
}

#[test]
fn every_protected_endpoint_rejects_missing_bad_and_logged_out_tokens() {
    let dir = TempDir::new().unwrap();
    let s = Server::start(dir.path(), true);
    let c = cast(&s);
    let (status, _) = s.call(Method::GET, "/health", None, None);
    assert_eq!(status, 200);

    assert_eq!(s.call(Method::POST, "/auth/logout", Some(&c.nurul.token), None).0, 204);
    for (method, path) in protected_endpoints(&c.siti.id) {
        let body = Some(json!({}));
        for token in [None, Some("not-a-token"), Some(c.nurul.token.as_str())] {
            let (status, v) = s.call(method.clone(), &path, token, body.clone());
            assert_eq!(status, 401, "{method} {path} with {token:?} -> {status} {v}");
            assert!(v["error"].is_string(), "{method} {path}: error body {v}");
        }
    }
    // still rejected on the next call, and a fresh login works
    assert_eq!(s.call(Method::GET, "/me", Some(&c.nurul.token), None).0, 401);
    let again = s.login("nurul", "patient-pass");
    assert_eq!(s.get("/me", &again.token).0, 200);
}

#[test]
fn register_login_and_bad_credentials() {
    let dir = TempDir::new().unwrap();
    let s = Server::start(dir.path(), false);
    let (status, v) = s.call(Method::POST, "/auth/register", None, Some(json!({"login": "zara", "password": "pw1", "display_name": "Zara"})));
    assert_eq!(status, 201, "{v}");
    assert_eq!(v["role"], "patient");
    assert!(v.get("credential").is_none(), "credential leaked: {v}");
    let (status, v) = s.call(Method::POST, "/auth/register", None, Some(json!({"login": "zara", "password": "x"})));
    assert_eq!((status, v["error"].as_str()), (409, Some("LoginTaken")));
    let (status, _) = s.call(Method::POST, "/auth/login", None, Some(json!({"login": "zara", "password": "wrong"})));
    assert_eq!(status, 401);
    let (status, _) = s.call(Method::POST, "/auth/login", None, Some(json!({"login": "nobody", "password": "wrong"})));
    assert_eq!(status, 401);
    let me = s.login("zara", "pw1");
    assert_eq!(s.ok(Method::GET, "/me", &me.token, None)["login"], "zara");
}

#[test]
fn diary_plan_and_account_flow() {
    let dir = TempDir::new().unwrap();
    let s = Server::start(dir.path(), true);
    let c = cast(&s);
    let sid = &c.siti.id;
    let entry = json!({"submodule": "HB", "occurred_at": "2026-01-05T07:30:00Z", "metrics": {"slept_hours": 6.5}, "note": "restless"});
    let obj = s.ok(Method::POST, &format!("/patients/{sid}/entries"), &c.siti.token, Some(entry));
    assert_eq!(obj["submodule"], "HB");
    let entry = json!({"submodule": "EX", "occurred_at": "2026-01-05T18:00:00Z", "metrics": {"steps": 4200}, "labels": {"activity": "walk"}});
    s.ok(Method::POST, &format!("/patients/{sid}/entries"), &c.siti.token, Some(entry.clone()));
    // the delegate follows the diary but does not write it
    let (status, _) = s.post(&format!("/patients/{sid}/entries"), &c.family.token, entry);
    assert_eq!(status, 403);
    let seen = s.ok(Method::GET, &format!("/patients/{sid}/timeline"), &c.family.token, None);
    assert_eq!(seen.as_array().unwrap().len(), 2);

    let tl = s.ok(Method::GET, &format!("/patients/{sid}/timeline"), &c.siti.token, None);
    assert_eq!(tl.as_array().unwrap().len(), 2, "{tl}");
    // an unrelated patient sees nothing
    let (status, _) = s.get(&format!("/patients/{sid}/timeline"), &c.nurul.token);
    assert_eq!(status, 403);
    // unknown metric is rejected as a schema problem
    let bad = json!({"submodule": "HB", "occurred_at": "2026-01-05T07:30:00Z", "metrics": {"blood_alcohol": 0.1}});
    let (status, v) = s.post(&format!("/patients/{sid}/entries"), &c.siti.token, bad);
    assert_eq!((status, v["error"].as_str()), (422, Some("SchemaMismatch")));

    let plan = json!({"plan": {"goals": [{"title": "Walk daily", "target_metric": "steps", "target_value": 6000.0, "due": "2026-12-31", "status": "Active"}]}});
    s.ok(Method::PUT, &format!("/patients/{sid}/plan"), &c.siti.token, Some(plan));
    let got = s.ok(Method::GET, &format!("/patients/{sid}/plan"), &c.siti.token, None);
    assert!(got.to_string().contains("Walk daily"), "{got}");

    let (status, v) = s.post(&format!("/patients/{sid}/account/pay"), &c.siti.token, json!({}));
    assert_eq!((status, v["error"].as_str()), (501, Some("NotSupported")));
}

#[test]
fn emr_grants_export_and_revocation() {
    let dir = TempDir::new().unwrap();
    let s = Server::start(dir.path(), true);
    let c = cast(&s);
    let sid = &c.siti.id;
    let xm = json!({"kind": "XM", "payload": {"note": "fasting glucose 7.9", "diagnosis": ["E11"]}});

    let (status, _) = s.get(&format!("/patients/{sid}/emr"), &c.dr.token);
    assert_eq!(status, 403, "no grant yet");
    // only the patient may grant, and only to a clinician
    let (status, _) = s.post(&format!("/patients/{sid}/grants"), &c.family.token, json!({"grantee": c.dr.id, "scope": ["XM"]}));
    assert_eq!(status, 403);
    let (status, _) = s.post(&format!("/patients/{sid}/grants"), &c.siti.token, json!({"grantee": c.ahmad.id, "scope": ["XM"]}));
    assert_eq!(status, 422);
    let grant = s.ok(Method::POST, &format!("/patients/{sid}/grants"), &c.siti.token, Some(json!({"grantee": c.dr.id, "scope": ["XM", "EP"]})));

    let entry = s.ok(Method::POST, &format!("/patients/{sid}/emr"), &c.dr.token, Some(xm.clone()));
    let rx = json!({"kind": "EP", "payload": {"drug": "metformin", "dose": "500mg", "refills_remaining": 1}});
    s.ok(Method::POST, &format!("/patients/{sid}/emr"), &c.dr.token, Some(rx));
    s.ok(Method::POST, &format!("/patients/{sid}/emr"), &c.dr.token, Some(json!({"kind": "TM", "payload": {"plan": "diet"}})));
    let (status, _) = s.get(&format!("/patients/{sid}/emr?kinds=TM"), &c.dr.token);
    assert_eq!(status, 403, "TM outside scope");
    let (status, _) = s.get(&format!("/patients/{sid}/emr"), &c.dr2.token);
    assert_eq!(status, 403, "other clinician");

    let own = s.ok(Method::GET, &format!("/patients/{sid}/emr?kinds=XM"), &c.siti.token, None);
    assert_eq!(own.as_array().unwrap().len(), 1);
    // without kinds the clinician gets exactly the granted ones
    let all = s.ok(Method::GET, &format!("/patients/{sid}/emr"), &c.dr.token, None);
    assert_eq!(all.as_array().unwrap().len(), 2);
    let mine = s.ok(Method::GET, &format!("/patients/{sid}/emr"), &c.siti.token, None);
    assert_eq!(mine.as_array().unwrap().len(), 3);

    // entries cannot be edited in place
    let (status, v) = s.call(Method::PUT, &format!("/emr/{}", entry["id"].as_str().unwrap()), Some(&c.dr.token), Some(json!({"note": "x"})));
    assert_eq!((status, v["error"].as_str()), (409, Some("ImmutableEntry")));

    let resp = reqwest::blocking::Client::new()
        .get(format!("{}/patients/{sid}/emr/export", s.base))
        .bearer_auth(&c.siti.token)
        .send()
        .unwrap();
    assert_eq!(resp.headers()["content-type"], "application/x-ndjson");
    let text = resp.text().unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let kinds: Vec<&str> = lines.iter().map(|l| l["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["XM", "EP", "TM"]);
    assert!(text.lines().next().unwrap().starts_with("{\"id\":"));

    let gid = grant["id"].as_str().unwrap();
    s.ok(Method::POST, &format!("/grants/{gid}/revoke"), &c.siti.token, Some(json!({})));
    let (status, v) = s.post(&format!("/grants/{gid}/revoke"), &c.siti.token, json!({}));
    assert_eq!((status, v["error"].as_str()), (409, Some("AlreadyRevoked")));
    let (status, _) = s.get(&format!("/patients/{sid}/emr"), &c.dr.token);
    assert_eq!(status, 403, "revoked grant");
}

#[test]
fn consultation_and_decision_each_notify_the_patient_once() {
    let dir = TempDir::new().unwrap();
    let s = Server::start(dir.path(), true);
    let c = cast(&s);
    let nid = &c.nurul.id;
    s.ok(Method::POST, &format!("/patients/{nid}/grants"), &c.nurul.token, Some(json!({"grantee": c.dr.id, "scope": ["XM"]})));
    let before = s.ok(Method::GET, "/notifications", &c.nurul.token, None).as_array().unwrap().len();

    let msg = s.ok(Method::POST, "/messages", &c.nurul.token, Some(json!({"to": c.dr.id, "body": "Dizzy since Monday", "kind": "Consultation"})));
    s.ok(
        Method::POST,
        &format!("/patients/{nid}/consultations"),
        &c.dr.token,
        Some(json!({"note": "likely orthostatic", "diagnosis": ["I95.1"], "thread": msg["id"]})),
    );
    let req = s.ok(Method::POST, "/requests", &c.nurul.token, Some(json!({"kind": "Appointment", "detail": SLOT, "reason": "follow-up"})));
    let rid = req["id"].as_str().unwrap();
    let decided = s.ok(Method::POST, &format!("/requests/{rid}/decision"), &c.dr.token, Some(json!({"outcome": "approve"})));
    assert_eq!(decided["state"], "Approved");

    let after = s.ok(Method::GET, "/notifications?unread_only=true", &c.nurul.token, None);
    let after = after.as_array().unwrap();
    assert_eq!(after.len() - before, 2, "{after:?}");
    let kinds: HashSet<&str> = after.iter().map(|n| n["kind"].as_str().unwrap()).collect();
    assert!(kinds.contains("EmrAdded") && kinds.contains("RequestDecided"));

    // a second decision is refused
    let (status, v) = s.post(&format!("/requests/{rid}/decision"), &c.dr2.token, json!({"outcome": "reject"}));
    assert_eq!((status, v["error"].as_str()), (409, Some("IllegalTransition")));

    let ids: Vec<Value> = after.iter().map(|n| n["id"].clone()).collect();
    assert_eq!(s.call(Method::POST, "/notifications/read", Some(&c.nurul.token), Some(json!({"ids": ids}))).0, 204);
    let unread = s.ok(Method::GET, "/notifications?unread_only=true", &c.nurul.token, None);
    assert!(unread.as_array().unwrap().is_empty());
}

#[test]
fn concurrent_decisions_have_exactly_one_winner() {
    let dir = TempDir::new().unwrap();
    let s = Server::start(dir.path(), true);
    let c = cast(&s);
    for round in 0..5 {
        let req = s.ok(Method::POST, "/requests", &c.ahmad.token, Some(json!({"kind": "Appointment", "detail": SLOT, "reason": format!("round {round}")})));
        let rid = req["id"].as_str().unwrap().to_owned();
        let version = s.ok(Method::GET, &format!("/requests/{rid}"), &c.dr.token, None)["version"].as_u64().unwrap();
        let statuses: Vec<u16> = thread::scope(|scope| {
            let handles: Vec<_> = [(&c.dr, "approve"), (&c.dr2, "reject"), (&c.dr, "reject"), (&c.dr2, "approve")]
                .into_iter()
                .map(|(who, outcome)| {
                    let (s, rid) = (&s, &rid);
                    scope.spawn(move || {
                        s.post(&format!("/requests/{rid}/decision"), &who.token, json!({"outcome": outcome, "expected_version": version})).0
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert_eq!(statuses.iter().filter(|&&st| st == 200).count(), 1, "{statuses:?}");
        assert!(statuses.iter().all(|&st| st == 200 || st == 409), "{statuses:?}");
        let final_state = s.ok(Method::GET, &format!("/requests/{rid}"), &c.ahmad.token, None);
        assert_ne!(final_state["request"]["state"], "Pending");
    }
    // the patient got one decision notification per request
    let n = s.ok(Method::GET, "/notifications", &c.ahmad.token, None);
    let decided = n.as_array().unwrap().iter().filter(|n| n["kind"] == "RequestDecided").count();
    assert_eq!(decided, 5);
}

#[test]
fn episode_runs_through_the_care_cycle() {
    let dir = TempDir::new().unwrap();
    let s = Server::start(dir.path(), true);
    let c = cast(&s);
    let ep = s.ok(Method::POST, "/episodes", &c.siti.token, Some(json!({"problem_statement": "poor sleep"})));
    let id = ep["id"].as_str().unwrap().to_owned();
    let advance = |to: &str, payload: Value| s.post(&format!("/episodes/{id}/advance"), &c.siti.token, json!({"to": to, "payload": payload}));

    // skipping ahead is refused
    let (status, v) = advance("execution", json!({"type": "execution", "refs": []}));
    assert_eq!((status, v["error"].as_str()), (409, Some("IllegalTransition")), "{v}");
    let (status, v) = advance("sideways", json!({"type": "execution", "refs": []}));
    assert_eq!(status, 400, "{v}");

    let entry = json!({"submodule": "HB", "occurred_at": "2026-01-05T07:30:00Z", "metrics": {"slept_hours": 7.5}});
    let diary = s.ok(Method::POST, &format!("/patients/{}/entries", c.siti.id), &c.siti.token, Some(entry));

    let alts = json!({"type": "alternatives", "alternatives": [{"description": "no screens after 22:00"}, {"description": "melatonin"}]});
    assert_eq!(advance("problem-solving", alts).0, 200);
    assert_eq!(advance("choice", json!({"type": "choice", "index": 0})).0, 200);
    assert_eq!(advance("execution", json!({"type": "execution", "refs": [diary["id"]]})).0, 200);
    let (status, v) = advance("evaluation", json!({"type": "evaluation", "note": "better", "resolved": true}));
    assert_eq!(status, 200, "{v}");

    let got = s.ok(Method::GET, &format!("/episodes/{id}"), &c.siti.token, None);
    assert_eq!(got["episode"]["stage"], "Closed");
    let (status, _) = advance("problem-finding", json!({"type": "evaluation", "note": "", "resolved": false}));
    assert_eq!(status, 409);

    let report = s.ok(Method::GET, &format!("/episodes/{id}/report"), &c.siti.token, None);
    assert_eq!(report["cycles"].as_array().unwrap().len(), 1, "{report}");
    let (status, _) = s.get(&format!("/episodes/{id}"), &c.nurul.token);
    assert_eq!(status, 403);
    let list = s.ok(Method::GET, &format!("/patients/{}/episodes", c.siti.id), &c.family.token, None);
    assert_eq!(list.as_array().unwrap().len(), 1);
}

#[test]
fn social_connections_feed_messages_and_motd() {
    let dir = TempDir::new().unwrap();
    let s = Server::start(dir.path(), true);
    let c = cast(&s);
    s.ok(Method::POST, "/connections", &c.siti.token, Some(json!({"target": c.ahmad.id, "verb": "Request"})));
    let reqs = s.ok(Method::GET, "/notifications", &c.ahmad.token, None);
    assert!(reqs.as_array().unwrap().iter().any(|n| n["kind"] == "FriendRequest"));
    s.ok(Method::POST, "/connections", &c.ahmad.token, Some(json!({"target": c.siti.id, "verb": "Accept"})));

    let post = s.ok(Method::POST, "/posts", &c.ahmad.token, Some(json!({"kind": "Status", "body": "Walked 5km today"})));
    let pid = post["id"].as_str().unwrap();
    let feed = s.ok(Method::GET, "/feed", &c.siti.token, None);
    assert!(feed.to_string().contains(pid), "{feed}");
    let nurul_feed = s.ok(Method::GET, "/feed", &c.nurul.token, None);
    assert!(!nurul_feed.to_string().contains(pid));
    let (status, _) = s.get(&format!("/posts/{pid}"), &c.nurul.token);
    assert_eq!(status, 403);

    for _ in 0..2 {
        let v = s.ok(Method::POST, &format!("/posts/{pid}/like"), &c.siti.token, Some(json!({})));
        assert_eq!(v["likes"], 1);
    }

    let tip = s.ok(Method::POST, "/posts", &c.educator.token, Some(json!({"kind": "KnowledgeItem", "body": "Fibre slows glucose absorption"})));
    assert_eq!(tip["verified"], true);
    let found = s.ok(Method::GET, "/search?q=glucose", &c.nurul.token, None);
    assert_eq!(found["knowledge"].as_array().unwrap().len(), 1, "{found}");

    s.ok(Method::POST, "/messages", &c.siti.token, Some(json!({"to": c.ahmad.id, "body": "Join the walk on Sunday?"})));
    let inbox = s.ok(Method::GET, "/messages", &c.ahmad.token, None);
    assert_eq!(inbox.as_array().unwrap().len(), 1);
    let thread = s.ok(Method::GET, &format!("/messages/with/{}", c.siti.id), &c.ahmad.token, None);
    assert_eq!(thread.as_array().unwrap().len(), 1);

    let motd = s.ok(Method::GET, "/motd", &c.siti.token, None);
    assert!(motd.to_string().contains("blood sugar"), "{motd}");
    let (status, _) = s.post("/motd", &c.dr.token, json!({"user": c.siti.id, "message": "x"}));
    assert_eq!(status, 403);

    // nurul shares no group with siti; ahmad is already a friend
    let sugg = s.ok(Method::GET, "/suggestions?k=5", &c.siti.token, None);
    assert!(!sugg.to_string().contains(&c.ahmad.id), "{sugg}");

    let groups = s.ok(Method::GET, "/groups", &c.nurul.token, None);
    let diabetes = groups.as_array().unwrap().iter().find(|g| g["name"] == "Diabetes Support").unwrap();
    let gid = diabetes["id"].as_str().unwrap();
    s.ok(Method::POST, &format!("/groups/{gid}/join"), &c.nurul.token, Some(json!({})));
    let sugg = s.ok(Method::GET, "/suggestions?k=5", &c.nurul.token, None);
    assert!(sugg.to_string().contains(&c.siti.id), "{sugg}");

    let online = s.ok(Method::GET, "/online", &c.siti.token, None);
    assert_eq!(online, json!([c.ahmad.id]));
}

#[test]
fn audit_is_admin_only_and_records_denials() {
    let dir = TempDir::new().unwrap();
    let s = Server::start(dir.path(), true);
    let c = cast(&s);
    let (status, _) = s.get(&format!("/patients/{}/emr", c.siti.id), &c.dr2.token);
    assert_eq!(status, 403);
    assert_eq!(s.get("/audit", &c.dr.token).0, 403);
    let log = s.ok(Method::GET, "/audit", &c.admin.token, None);
    let denials = log.as_array().unwrap().iter().filter(|e| e["actor"] == c.dr2.id.as_str() && e["decision"] == "Deny").count();
    assert!(denials >= 1, "{log}");
}

#[test]
fn state_survives_sigkill_and_restart() {
    let dir = TempDir::new().unwrap();
    let s = Server::start(dir.path(), true);
    let c = cast(&s);
    let sid = c.siti.id.clone();
    s.ok(Method::POST, &format!("/patients/{sid}/grants"), &c.siti.token, Some(json!({"grantee": c.dr.id, "scope": ["XM"]})));
    s.ok(Method::POST, &format!("/patients/{sid}/emr"), &c.dr.token, Some(json!({"kind": "XM", "payload": {"note": "bp 150/95"}})));
    let entry = json!({"submodule": "SE", "occurred_at": "2026-01-05T21:00:00Z", "metrics": {"mood": 4}});
    s.ok(Method::POST, &format!("/patients/{sid}/entries"), &c.siti.token, Some(entry));
    let req = s.ok(Method::POST, "/requests", &c.siti.token, Some(json!({"kind": "Appointment", "detail": SLOT})));
    s.kill();

    let s = Server::start(dir.path(), false);
    // sessions are persisted, so the old tokens still work
    let emr = s.ok(Method::GET, &format!("/patients/{sid}/emr"), &c.dr.token, None);
    assert_eq!(emr.as_array().unwrap().len(), 1);
    let tl = s.ok(Method::GET, &format!("/patients/{sid}/timeline"), &c.siti.token, None);
    assert_eq!(tl.as_array().unwrap().len(), 1);
    let got = s.ok(Method::GET, &format!("/requests/{}", req["id"].as_str().unwrap()), &c.dr.token, None);
    assert_eq!(got["request"]["state"], "Pending");
    let decided = s.ok(Method::POST, &format!("/requests/{}/decision", req["id"].as_str().unwrap()), &c.dr.token, Some(json!({"outcome": "reject"})));
    assert_eq!(decided["state"], "Rejected");
    s.kill();

    let s = Server::start(dir.path(), false);
    let got = s.ok(Method::GET, &format!("/requests/{}", req["id"].as_str().unwrap()), &c.siti.token, None);
    assert_eq!(got["request"]["state"], "Rejected");
    // logging out persists too
    assert_eq!(s.call(Method::POST, "/auth/logout", Some(&c.siti.token), None).0, 204);
    s.kill();
    let s = Server::start(dir.path(), false);
    assert_eq!(s.call(Method::GET, "/me", Some(&c.siti.token), None).0, 401);
}
