//! Subprocess-backed model and suggester clients. One process per request:
//! a JSON request on stdin, the reply on stdout.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde_json::json;

use semtrace_core::harness::{Decoding, DecodingMode, ModelClient};
use semtrace_core::inputs::{SuggestRequest, SuggesterClient};

/// Runs `cmd` through the shell, feeding `input`; returns stdout on exit 0.
pub fn run_command(cmd: &str, input: &str, timeout: Duration) -> Result<String, String> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| format!("spawn {cmd}: {e}"))?;
    let mut stdin = child.stdin.take().ok_or("no stdin")?;
    let payload = input.to_string();
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(payload.as_bytes());
    });
    let mut stdout = child.stdout.take().ok_or("no stdout")?;
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        stdout.read_to_string(&mut s).map(|_| s)
    });
    let start = Instant::now();
    let status = loop {
        match child.try_wait().map_err(|e| e.to_string())? {
            Some(s) => break s,
            None if start.elapsed() > timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(format!("timed out after {:?}", timeout));
            }
            None => std::thread::sleep(Duration::from_millis(5)),
        }
    };
    let _ = writer.join();
    let out = reader.join().map_err(|_| "reader panicked")?.map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("exit status {}", status.code().unwrap_or(-1)));
    }
    Ok(out)
}

fn decoding_json(d: &Decoding) -> serde_json::Value {
    let mode = match d.mode {
        DecodingMode::Greedy => "greedy",
        DecodingMode::TopP => "top_p",
    };
    json!({"mode": mode, "p": d.p, "temperature": d.temperature})
}

pub struct SubprocessModel {
    pub command: String,
    pub timeout: Duration,
}

impl SubprocessModel {
    pub fn new(command: impl Into<String>) -> Self {
        SubprocessModel { command: command.into(), timeout: Duration::from_secs(300) }
    }
}

impl ModelClient for SubprocessModel {
    fn generate(&mut self, prompt: &str, decoding: &Decoding) -> Result<String, String> {
        let req = json!({"mode": "generate", "prompt": prompt, "decoding": decoding_json(decoding)});
        run_command(&self.command, &req.to_string(), self.timeout)
    }

    fn refine(&mut self, prompt: &str, prior: &str, faulty_trace: &str, decoding: &Decoding) -> Result<String, String> {
        let req = json!({
            "mode": "refine",
            "prompt": prompt,
            "prior": prior,
            "faulty_trace": faulty_trace,
            "decoding": decoding_json(decoding),
        });
        run_command(&self.command, &req.to_string(), self.timeout)
    }
}

pub struct SubprocessSuggester {
    pub command: String,
    pub timeout: Duration,
}

impl SubprocessSuggester {
    pub fn new(command: impl Into<String>) -> Self {
        SubprocessSuggester { command: command.into(), timeout: Duration::from_secs(60) }
    }
}

impl SuggesterClient for SubprocessSuggester {
    fn suggest(&mut self, request: &SuggestRequest) -> Result<Vec<String>, String> {
        let req = json!({"source": request.source, "known": request.known, "count": request.count});
        let out = run_command(&self.command, &req.to_string(), self.timeout)?;
        Ok(out.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
    }
}
