use std::fs::File;
use std::io::ErrorKind;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

use super::ValidatorError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Finished {
    /// `None` when killed by a signal or the timeout.
    pub code: Option<i32>,
    pub stdout: String,
    pub stderr: String,
    pub timed_out: bool,
}

impl Finished {
    pub fn success(&self) -> bool {
        self.code == Some(0) && !self.timed_out
    }
}

/// Run `argv` in `dir`, capturing output through files so large outputs never block.
pub(crate) fn run(argv: &[String], dir: &Path, timeout: Duration) -> Result<Finished, ValidatorError> {
    let (program, args) = argv.split_first().ok_or_else(|| ValidatorError::InvalidProfile("empty command".into()))?;
    let out_path = dir.join(".stdout");
    let err_path = dir.join(".stderr");
    let io = |e: std::io::Error| ValidatorError::Io(format!("{}: {e}", dir.display()));

    let mut child = Command::new(program)
        .args(args)
        .current_dir(dir)
        .stdin(Stdio::null())
        .stdout(File::create(&out_path).map_err(io)?)
        .stderr(File::create(&err_path).map_err(io)?)
        .spawn()
        .map_err(|e| match e.kind() {
            ErrorKind::NotFound => ValidatorError::ToolchainMissing(program.clone()),
            _ => ValidatorError::Io(format!("{program}: {e}")),
        })?;

    let (code, timed_out) = match child.wait_timeout(timeout).map_err(io)? {
        Some(status) => (status.code(), false),
        None => {
            let _ = child.kill();
            let _ = child.wait();
            (None, true)
        }
    };
    let read = |p: &Path| String::from_utf8_lossy(&std::fs::read(p).unwrap_or_default()).into_owned();
    Ok(Finished { code, stdout: read(&out_path), stderr: read(&err_path), timed_out })
}

/// True when `program` can be spawned at all.
pub fn tool_available(program: &str) -> bool {
    Command::new(program)
        .arg("--version")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .is_ok()
}
