//! Pluggable structure-property oracles: trait definitions, constant fakes
//! for tests, and a line-delimited-JSON child-process client.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::sync::Mutex;
use std::time::Duration;

use crysflow_xtal::{structure_to_json, CrystalStructure};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle process: {0}")]
    Process(String),
    #[error("oracle timed out after {0:?}")]
    Timeout(Duration),
    #[error("oracle response: {0}")]
    BadResponse(String),
}

/// Formation energy per atom, eV/atom. Callers clamp the result to
/// [-ENERGY_CLAMP, ENERGY_CLAMP] on receipt.
pub trait EnergyOracle: Send + Sync {
    fn formation_energy(&self, s: &CrystalStructure) -> Result<f64, OracleError>;
}

/// Electronic band gap, eV.
pub trait BandGapOracle: Send + Sync {
    fn band_gap(&self, s: &CrystalStructure) -> Result<f64, OracleError>;
}

/// Fixed-value oracle for tests and calibration runs.
pub struct ConstOracle(pub f64);

impl EnergyOracle for ConstOracle {
    fn formation_energy(&self, _s: &CrystalStructure) -> Result<f64, OracleError> {
        Ok(self.0)
    }
}

pub struct ConstGapOracle(pub f64);

impl BandGapOracle for ConstGapOracle {
    fn band_gap(&self, _s: &CrystalStructure) -> Result<f64, OracleError> {
        Ok(self.0)
    }
}

/// Child-process oracle speaking line-delimited JSON over stdin/stdout:
/// one request `{"structure": <structure json>}` per line, one response
/// `{"<response_key>": <number>}` per line. Requests are serialized; a
/// response must arrive within the timeout.
pub struct PipeOracle {
    inner: Mutex<PipeInner>,
    response_key: String,
    timeout: Duration,
}

struct PipeInner {
    child: Child,
    stdin: std::process::ChildStdin,
    lines: mpsc::Receiver<std::io::Result<String>>,
}

impl PipeOracle {
    pub fn spawn(
        program: &str,
        args: &[String],
        response_key: &str,
        timeout: Duration,
    ) -> Result<Self, OracleError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| OracleError::Process(format!("failed to spawn {program}: {e}")))?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = child.stdout.take().expect("stdout piped");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(PipeOracle {
            inner: Mutex::new(PipeInner { child, stdin, lines: rx }),
            response_key: response_key.to_string(),
            timeout,
        })
    }

    fn query(&self, s: &CrystalStructure) -> Result<f64, OracleError> {
        let mut inner = self.inner.lock().expect("oracle lock");
        let structure = structure_to_json(s).replace('\n', " ");
        let request = format!("{{\"structure\": {structure}}}\n");
        inner
            .stdin
            .write_all(request.as_bytes())
            .and_then(|_| inner.stdin.flush())
            .map_err(|e| OracleError::Process(format!("write failed: {e}")))?;
        let line = inner
            .lines
            .recv_timeout(self.timeout)
            .map_err(|_| OracleError::Timeout(self.timeout))?
            .map_err(|e| OracleError::Process(format!("read failed: {e}")))?;
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| OracleError::BadResponse(format!("{e}: `{line}`")))?;
        value
            .get(&self.response_key)
            .and_then(|v| v.as_f64())
            .ok_or_else(|| {
                OracleError::BadResponse(format!("missing numeric `{}` in `{line}`", self.response_key))
            })
    }
}

impl Drop for PipeOracle {
    fn drop(&mut self) {
        if let Ok(mut inner) = self.inner.lock() {
            let _ = inner.child.kill();
            let _ = inner.child.wait();
        }
    }
}

impl EnergyOracle for PipeOracle {
    fn formation_energy(&self, s: &CrystalStructure) -> Result<f64, OracleError> {
        self.query(s)
    }
}

impl BandGapOracle for PipeOracle {
    fn band_gap(&self, s: &CrystalStructure) -> Result<f64, OracleError> {
        self.query(s)
    }
}
