//! Flat key = value run configuration. Unknown keys are rejected so typos
//! surface instead of silently running defaults.

use std::fmt;
use std::path::PathBuf;

use hit3_core::{cplx, Cplx};

#[derive(Debug, thiserror::Error)]
#[error("config: {0}")]
pub struct ConfigParseError(pub String);

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub level: u32,
    /// Acceptance threshold on the solver's final sup-norm residual.
    pub newton_tol: f64,
    /// Acceptance threshold on the structure-equation residual of an
    /// assembled connection.
    pub flatness_tol: f64,
    pub continuation_steps: usize,
    /// Finite-difference step sizes for the tangent checks.
    pub dt_list: Vec<f64>,
    /// Index into the cubic basis for the probe direction.
    pub q_index: usize,
    /// Complex amplitude placed on the probe direction.
    pub q_amplitude: Cplx,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Debug override of the pairing normalization used by the solver; the
    /// correct value is 16. Changing it must make the flatness check fail.
    pub pairing_constant: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            level: 2,
            newton_tol: 1e-9,
            flatness_tol: 1e-6,
            continuation_steps: 2,
            dt_list: vec![1e-2, 5e-3],
            q_index: 0,
            q_amplitude: cplx(0.1, 0.0),
            out_dir: PathBuf::from("runs"),
            seed: 42,
            pairing_constant: 16.0,
        }
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "level = {}", self.level)?;
        writeln!(f, "newton_tol = {:e}", self.newton_tol)?;
        writeln!(f, "flatness_tol = {:e}", self.flatness_tol)?;
        writeln!(f, "continuation_steps = {}", self.continuation_steps)?;
        let dts: Vec<String> = self.dt_list.iter().map(|d| format!("{d:e}")).collect();
        writeln!(f, "dt_list = {}", dts.join(","))?;
        writeln!(f, "q_index = {}", self.q_index)?;
        writeln!(
            f,
            "q_amplitude = {}{:+}i",
            self.q_amplitude.re, self.q_amplitude.im
        )?;
        writeln!(f, "out_dir = {}", self.out_dir.display())?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "pairing_constant = {}", self.pairing_constant)
    }
}

fn parse_complex(s: &str) -> Result<Cplx, ConfigParseError> {
    let t = s.trim();
    if let Some(body) = t.strip_suffix('i') {
        // a+bi / a-bi: split at the sign of the imaginary part, skipping a
        // leading sign of the real part.
        for (k, c) in body.char_indices().skip(1) {
            if (c == '+' || c == '-') && !body[..k].ends_with('e') && !body[..k].ends_with('E') {
                let re: f64 = body[..k]
                    .parse()
                    .map_err(|_| ConfigParseError(format!("bad complex '{s}'")))?;
                let im: f64 = body[k..]
                    .parse()
                    .map_err(|_| ConfigParseError(format!("bad complex '{s}'")))?;
                return Ok(cplx(re, im));
            }
        }
        let im: f64 = body
            .parse()
            .map_err(|_| ConfigParseError(format!("bad complex '{s}'")))?;
        return Ok(cplx(0.0, im));
    }
    let re: f64 = t
        .parse()
        .map_err(|_| ConfigParseError(format!("bad complex '{s}'")))?;
    Ok(cplx(re, 0.0))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigParseError> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, val) = line
                .split_once('=')
                .ok_or_else(|| ConfigParseError(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let val = val.trim();
            let bad = |what: &str| ConfigParseError(format!("line {}: bad {what} '{val}'", lineno + 1));
            match key {
                "level" => cfg.level = val.parse().map_err(|_| bad("level"))?,
                "newton_tol" => cfg.newton_tol = val.parse().map_err(|_| bad("tolerance"))?,
                "flatness_tol" => cfg.flatness_tol = val.parse().map_err(|_| bad("tolerance"))?,
                "continuation_steps" => {
                    cfg.continuation_steps = val.parse().map_err(|_| bad("step count"))?
                }
                "dt_list" => {
                    cfg.dt_list = val
                        .split(',')
                        .map(|p| p.trim().parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| bad("dt list"))?
                }
                "q_index" => cfg.q_index = val.parse().map_err(|_| bad("index"))?,
                "q_amplitude" => cfg.q_amplitude = parse_complex(val)?,
                "out_dir" => cfg.out_dir = PathBuf::from(val),
                "seed" => cfg.seed = val.parse().map_err(|_| bad("seed"))?,
                "pairing_constant" => {
                    cfg.pairing_constant = val.parse().map_err(|_| bad("constant"))?
                }
                other => {
                    return Err(ConfigParseError(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigParseError> {
        if self.level > 5 {
            return Err(ConfigParseError(format!(
                "level {} outside the supported range 0-5",
                self.level
            )));
        }
        if !(self.newton_tol > 0.0) || !(self.flatness_tol > 0.0) {
            return Err(ConfigParseError("tolerances must be positive".into()));
        }
        if self.continuation_steps == 0 {
            return Err(ConfigParseError("continuation_steps must be >= 1".into()));
        }
        if self.dt_list.is_empty() || self.dt_list.iter().any(|d| !(*d > 0.0)) {
            return Err(ConfigParseError("dt_list entries must be positive".into()));
        }
        if self.q_index >= 5 {
            return Err(ConfigParseError(format!(
                "q_index {} outside the cubic basis (0-4)",
                self.q_index
            )));
        }
        Ok(())
    }
}
