//! Run configuration, from flags or a JSON file.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Qfi,
    Bound,
    OptimalProbe,
    Homodyne,
    Montecarlo,
    Sequential,
    Audit,
    Lemmas,
    Table1,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Qfi => "qfi",
            Command::Bound => "bound",
            Command::OptimalProbe => "optimal-probe",
            Command::Homodyne => "homodyne",
            Command::Montecarlo => "montecarlo",
            Command::Sequential => "sequential",
            Command::Audit => "audit",
            Command::Lemmas => "lemmas",
            Command::Table1 => "table1",
        }
    }

    /// Options the command reads besides output, format and jobs.
    fn accepts(self) -> &'static [&'static str] {
        match self {
            Command::Qfi => &["circuit", "state", "phi", "nbar", "phi_guess"],
            Command::Bound => &["circuit", "phi", "nbar"],
            Command::OptimalProbe => &["circuit", "phi", "phi_guess", "nbar"],
            Command::Homodyne => &["circuit", "phi", "phi_guess", "nbar", "theta"],
            Command::Montecarlo => &["circuit", "phi", "phi_guess", "nbar", "theta", "seed", "replications", "samples"],
            Command::Sequential => &["circuit", "phi", "nbar", "L", "modes"],
            Command::Audit => &["circuit", "seeds", "modes", "seed"],
            Command::Lemmas => &["seeds", "seed"],
            Command::Table1 => &["phi", "nbar"],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Every option any command can take.
#[derive(Debug, Clone, Default, Args, Deserialize)]
pub struct Options {
    /// Circuit file, or a built-in name (mz1, mz2, two_mode_mixing, three_mode_mixing, phase_shifter).
    #[arg(long)]
    pub circuit: Option<String>,
    /// vacuum | coherent:<amp> | squeezed:<r> | thermal:<sigma> | optimal | path to a state JSON file.
    #[arg(long)]
    pub state: Option<String>,
    /// True phase in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Phase guess used to build probes and readouts; defaults to --phi.
    #[arg(long, allow_hyphen_values = true)]
    pub phi_guess: Option<f64>,
    /// Mean photon number.
    #[arg(long)]
    pub nbar: Option<f64>,
    /// Number of passes.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub passes: Option<usize>,
    /// Homodyne angle in radians; defaults to the optimal angle.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
    /// Homodyne samples per replication.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Number of random cases.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Mode count (audit) or total modes including ancillas (sequential).
    #[arg(long)]
    pub modes: Option<usize>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Options {
    fn set_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut mark = |set: bool, k| {
            if set {
                keys.push(k)
            }
        };
        mark(self.circuit.is_some(), "circuit");
        mark(self.state.is_some(), "state");
        mark(self.phi.is_some(), "phi");
        mark(self.phi_guess.is_some(), "phi_guess");
        mark(self.nbar.is_some(), "nbar");
        mark(self.passes.is_some(), "L");
        mark(self.theta.is_some(), "theta");
        mark(self.seed.is_some(), "seed");
        mark(self.replications.is_some(), "replications");
        mark(self.samples.is_some(), "samples");
        mark(self.seeds.is_some(), "seeds");
        mark(self.modes.is_some(), "modes");
        mark(self.jobs.is_some(), "jobs");
        mark(self.output.is_some(), "output");
        mark(self.format.is_some(), "format");
        keys
    }
}

/// A validated command with its options.
#[derive(Debug, Clone, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(flatten)]
    pub options: Options,
}

impl RunConfig {
    /// Rejects options the command does not read.
    pub fn validate(&self) -> Result<(), String> {
        let allowed = self.command.accepts();
        let stray: Vec<&str> = self
            .options
            .set_keys()
            .into_iter()
            .filter(|k| !allowed.contains(k) && !["output", "format", "jobs"].contains(k))
            .collect();
        if !stray.is_empty() {
            return Err(format!("{} does not take: {}", self.command.name(), stray.join(", ")));
        }
        if self.options.jobs == Some(0) {
            return Err("jobs must be positive".into());
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        // Flattened structs cannot deny unknown fields, so check the keys here.
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let obj = value.as_object().ok_or("config must be a JSON object")?;
        const KEYS: [&str; 16] = [
            "command",
            "circuit",
            "state",
            "phi",
            "phi_guess",
            "nbar",
            "L",
            "theta",
            "seed",
            "replications",
            "samples",
            "seeds",
            "modes",
            "jobs",
            "output",
            "format",
        ];
        if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(format!("unknown config key `{k}`"));
        }
        serde_json::from_value(value).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_config_parses() {
        let c = RunConfig::from_json(r#"{"command": "sequential", "circuit": "mz1", "phi": 0.2, "nbar": 1, "L": 3}"#)
            .unwrap();
        assert_eq!(c.command, Command::Sequential);
        assert_eq!(c.options.passes, Some(3));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn stray_options_are_rejected() {
        let c = RunConfig::from_json(r#"{"command": "table1", "circuit": "mz1"}"#).unwrap();
        assert!(c.validate().unwrap_err().contains("circuit"));
        assert!(RunConfig::from_json(r#"{"command": "table1", "nbarr": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"command": "fly"}"#).is_err());
        let c = RunConfig::from_json(r#"{"command": "lemmas", "jobs": 0}"#).unwrap();
        assert!(c.validate().is_err());
    }
}
