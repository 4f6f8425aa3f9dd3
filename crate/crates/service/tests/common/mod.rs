//! Test harness: runs the real `clinic` binary against a temporary data
//! directory and talks to it over HTTP.

#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::Duration;

use reqwest::blocking::{Client, Response};
use reqwest::Method;
use serde_json::{json, Value};

pub const BIN: &str = env!("CARGO_BIN_EXE_clinic");

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn core_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("RUST_LOG", "warn").output().expect("run clinic binary")
}

pub struct Server {
    child: Child,
    pub base: String,
    pub data_dir: PathBuf,
    client: Client,
}

impl Server {
    /// Seed the demo fixtures into `data_dir` (if asked) and start serving it.
    pub fn start(data_dir: &Path, seed: bool) -> Server {
        Server::start_with(data_dir, seed, &[])
    }

    pub fn start_with(data_dir: &Path, seed: bool, extra: &[&str]) -> Server {
        if seed {
            let out = cli(&["seed", "--fixtures", fixtures_dir().to_str().unwrap(), "--data-dir", data_dir.to_str().unwrap()]);
            assert!(out.status.success(), "seed failed: {}", String::from_utf8_lossy(&out.stderr));
        }
        let mut child = Command::new(BIN)
            .args(["serve", "--bind", "127.0.0.1:0", "--data-dir", data_dir.to_str().unwrap()])
            .args(extra)
            .env("RUST_LOG", "warn")
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .expect("spawn server");
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).expect("read listen line");
        let addr = line.trim().strip_prefix("listening on ").unwrap_or_else(|| panic!("unexpected output `{line}`"));
        let client = Client::builder().timeout(Duration::from_secs(30)).build().unwrap();
        Server { child, base: format!("http://{addr}"), data_dir: data_dir.to_path_buf(), client }
    }

    /// SIGKILL, no shutdown hooks.
    pub fn kill(mut self) {
        self.child.kill().expect("kill server");
        self.child.wait().unwrap();
    }

    pub fn call(&self, method: Method, path: &str, token: Option<&str>, body: Option<Value>) -> (u16, Value) {
        let mut req = self.client.request(method, format!("{}{}", self.base, path));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp: Response = req.send().expect("request");
        let status = resp.status().as_u16();
        let text = resp.text().unwrap_or_default();
        let value = serde_json::from_str(&text).unwrap_or(Value::String(text));
        (status, value)
    }

    pub fn get(&self, path: &str, token: &str) -> (u16, Value) {
        self.call(Method::GET, path, Some(token), None)
    }

    pub fn post(&self, path: &str, token: &str, body: Value) -> (u16, Value) {
        self.call(Method::POST, path, Some(token), Some(body))
    }

    pub fn ok(&self, method: Method, path: &str, token: &str, body: Option<Value>) -> Value {
        let (status, v) = self.call(method.clone(), path, Some(token), body);
        assert!((200..300).contains(&status), "{method} {path} -> {status} {v}");
        v
    }

    pub fn login(&self, login: &str, password: &str) -> Session {
        let (status, v) = self.call(Method::POST, "/auth/login", None, Some(json!({"login": login, "password": password})));
        assert_eq!(status, 200, "login {login}: {v}");
        Session { token: v["token"].as_str().unwrap().to_owned(), id: v["principal"].as_str().unwrap().to_owned() }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[derive(Clone, Debug)]
pub struct Session {
    pub token: String,
    pub id: String,
}

pub fn patient_password(login: &str) -> &'static str {
    match login {
        "admin" => "admin-pass",
        "educator" => "educator-pass",
        "dr.rahman" | "dr.lim" => "doctor-pass",
        "siti.family" => "family-pass",
        _ => "patient-pass",
    }
}

pub struct Cast {
    pub admin: Session,
    pub educator: Session,
    pub dr: Session,
    pub dr2: Session,
    pub siti: Session,
    pub ahmad: Session,
    pub nurul: Session,
    pub family: Session,
}

pub fn cast(s: &Server) -> Cast {
    let l = |login: &str| s.login(login, patient_password(login));
    Cast {
        admin: l("admin"),
        educator: l("educator"),
        dr: l("dr.rahman"),
        dr2: l("dr.lim"),
        siti: l("siti"),
        ahmad: l("ahmad"),
        nurul: l("nurul"),
        family: l("siti.family"),
    }
}
