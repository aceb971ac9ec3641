//! Deterministic CSV/JSON artifact writing with a content-hash manifest.
//! All floating-point values are emitted with 17 significant digits so that
//! repeated runs with the same configuration produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::quantum::{GridWaveFunction, PolarField};
use crate::types::Trajectory;
use crate::zeno::SweepSummary;

/// 17 significant digits: round-trips every f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One written artifact with its SHA-256 content hash.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
}

/// Writes artifacts into one directory and records every file it writes;
/// `finish` emits the manifest listing them with content hashes.
#[derive(Debug)]
pub struct OutputWriter {
    dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl OutputWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write_bytes(&mut self, name: &str, content: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, content)?;
        self.entries.push(ManifestEntry {
            file: name.to_string(),
            sha256: hex::encode(Sha256::digest(content)),
        });
        Ok(path)
    }

    /// CSV of a 1D/2D wavefunction with its polar data: coordinates, real and
    /// imaginary parts, density, unwrapped action, and quantum potential
    /// (empty field where masked).
    pub fn write_wavefunction_csv(
        &mut self,
        name: &str,
        psi: &GridWaveFunction,
        polar: &PolarField,
        q: &[f64],
    ) -> Result<PathBuf> {
        let ndim = psi.axes.len();
        let mut out = String::new();
        for a in 0..ndim {
            out.push_str(&format!("x{a},"));
        }
        out.push_str("re_psi,im_psi,rho,action,quantum_potential\n");
        for i in 0..psi.len() {
            for x in psi.point(i) {
                out.push_str(&fmt_f64(x));
                out.push(',');
            }
            let c = psi.amplitudes[i];
            out.push_str(&fmt_f64(c.re));
            out.push(',');
            out.push_str(&fmt_f64(c.im));
            out.push(',');
            out.push_str(&fmt_f64(polar.rho[i]));
            out.push(',');
            if polar.node_mask[i] {
                out.push_str(",\n");
            } else {
                out.push_str(&fmt_f64(polar.action[i]));
                out.push(',');
                if q[i].is_nan() {
                    out.push('\n');
                } else {
                    out.push_str(&fmt_f64(q[i]));
                    out.push('\n');
                }
            }
        }
        self.write_bytes(name, out.as_bytes())
    }

    /// CSV of a trajectory: t, positions, momenta, and the quantum potential
    /// along the path when recorded.
    pub fn write_trajectory_csv(&mut self, name: &str, traj: &Trajectory) -> Result<PathBuf> {
        let ndim = traj.states().first().map(|s| s.dim()).unwrap_or(0);
        let mut out = String::from("t,");
        for a in 0..ndim {
            out.push_str(&format!("x{a},"));
        }
        for a in 0..ndim {
            out.push_str(&format!("p{a},"));
        }
        out.push_str("quantum_potential\n");
        let qs = traj.quantum_potential();
        for (i, (t, s)) in traj.times().iter().zip(traj.states()).enumerate() {
            out.push_str(&fmt_f64(*t));
            out.push(',');
            for x in &s.position {
                out.push_str(&fmt_f64(*x));
                out.push(',');
            }
            for p in &s.momentum {
                out.push_str(&fmt_f64(*p));
                out.push(',');
            }
            match qs {
                Some(q) if !q[i].is_nan() => out.push_str(&fmt_f64(q[i])),
                _ => {}
            }
            out.push('\n');
        }
        self.write_bytes(name, out.as_bytes())
    }

    /// CSV of a monitoring convergence sweep.
    pub fn write_sweep_csv(&mut self, name: &str, summary: &SweepSummary) -> Result<PathBuf> {
        let mut out =
            String::from("N,dt,endpoint_error,momentum_error,mean_abs_q,max_abs_q\n");
        for r in &summary.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.intervals,
                fmt_f64(r.dt),
                fmt_f64(r.endpoint_error),
                fmt_f64(r.momentum_error),
                fmt_f64(r.mean_abs_q),
                fmt_f64(r.max_abs_q),
            ));
        }
        self.write_bytes(name, out.as_bytes())
    }

    /// Pretty-printed JSON of any serializable summary value.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Writes `manifest.json` listing every artifact with its hash.
    pub fn finish(mut self) -> Result<Vec<ManifestEntry>> {
        let manifest = serde_json::json!({ "files": &self.entries });
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.dir.join("manifest.json");
        fs::write(path, text)?;
        Ok(std::mem::take(&mut self.entries))
    }
}
