#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub const BIN: &str = env!("CARGO_BIN_EXE_prkg");

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// A scratch directory with a data file path; commands run with a clean
/// prkg environment so the caller's variables do not leak in.
pub struct Sandbox {
    pub dir: tempfile::TempDir,
    pub data: PathBuf,
}

impl Sandbox {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("graph.json");
        Sandbox { dir, data }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn command(&self) -> Command {
        let mut c = Command::new(BIN);
        c.current_dir(self.dir.path())
            .env("PRKG_DATA", &self.data)
            .env_remove("PRKG_ROLE")
            .env_remove("PRKG_CONFIG")
            .env_remove("PRKG_FAULT");
        c
    }

    pub fn run_env(&self, args: &[&str], env: &[(&str, &str)]) -> Run {
        let mut c = self.command();
        c.args(args);
        for (k, v) in env {
            c.env(k, v);
        }
        let o = c.output().expect("run prkg");
        Run {
            code: o.status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
            stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
        }
    }

    pub fn run(&self, args: &[&str]) -> Run {
        self.run_env(args, &[])
    }

    /// Runs one of the checked-in fixture scripts against this sandbox.
    pub fn script(&self, name: &str) -> Run {
        let o = Command::new("sh")
            .arg(fixture(name))
            .current_dir(self.dir.path())
            .env("PRKG", BIN)
            .env("PRKG_DATA", &self.data)
            .env_remove("PRKG_ROLE")
            .env_remove("PRKG_CONFIG")
            .output()
            .expect("run sh");
        Run {
            code: o.status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
            stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
        }
    }

    pub fn engine(&self) -> prkg_core::Engine {
        prkg_core::store::load_snapshot(&self.data).unwrap()
    }
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}
