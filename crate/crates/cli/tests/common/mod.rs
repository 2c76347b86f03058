#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl From<Output> for Run {
    fn from(o: Output) -> Self {
        Run {
            code: o.status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
            stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
        }
    }
}

pub fn sarlayers<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_sarlayers"))
        .args(args)
        .output()
        .expect("spawn sarlayers")
        .into()
}

/// Runs and panics with the captured stderr unless the exit code is 0.
pub fn ok<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let r = sarlayers(args);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    r
}

pub fn scene_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenes").join(name)
}

pub fn load_scene(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(scene_path(name)).unwrap()).unwrap()
}

pub fn write_scene(dir: &Path, name: &str, scene: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(scene).unwrap()).unwrap();
    p
}

pub fn sha256(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

pub fn s(p: &Path) -> String {
    p.display().to_string()
}

/// Simulates and focuses every channel of a quad-pol scene; returns the
/// HH, HV, VH, VV SLC paths.
pub fn quad_slcs(dir: &Path, scene: &Path, extra: &[&str]) -> [PathBuf; 4] {
    ["hh", "hv", "vh", "vv"].map(|c| {
        let raw = dir.join(format!("{c}.raw"));
        let slc = dir.join(format!("{c}.slc"));
        let mut args = vec![s(scene), s(&raw), "--channel".into(), c.into()];
        args.extend(extra.iter().map(|a| a.to_string()));
        ok(["simulate".to_string()].into_iter().chain(args));
        ok(["focus".to_string(), s(&raw), s(&slc)].into_iter().chain(extra.iter().map(|a| a.to_string())));
        slc
    })
}

pub fn quad_flags(q: &[PathBuf; 4]) -> Vec<String> {
    let mut v = Vec::new();
    for (flag, p) in ["--hh", "--hv", "--vh", "--vv"].iter().zip(q) {
        v.push(flag.to_string());
        v.push(s(p));
    }
    v
}
