//! Flat `key = value` config files with `[section]` headers.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use phdd::models::{BeamConfig, WaveConfig};
use phdd::timeint::Bootstrap;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    BeamSim,
    BeamSpectrum,
    BeamConvergence,
    WaveSim,
    WaveSpectrum,
    WaveConvergence,
    Conservation,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::BeamSim => "beam-sim",
            Experiment::BeamSpectrum => "beam-spectrum",
            Experiment::BeamConvergence => "beam-convergence",
            Experiment::WaveSim => "wave-sim",
            Experiment::WaveSpectrum => "wave-spectrum",
            Experiment::WaveConvergence => "wave-convergence",
            Experiment::Conservation => "conservation",
        }
    }

    const ALL: [Experiment; 7] = [
        Experiment::BeamSim,
        Experiment::BeamSpectrum,
        Experiment::BeamConvergence,
        Experiment::WaveSim,
        Experiment::WaveSpectrum,
        Experiment::WaveConvergence,
        Experiment::Conservation,
    ];
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment {s:?}, expected one of {}", names.join(", "))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub out_dir: PathBuf,
    pub plots: bool,
    pub sigma: f64,
    pub bootstrap: Bootstrap,
    /// Keep every `stride`-th time step in time-series output.
    pub stride: usize,
    pub beam: BeamConfig,
    pub wave: WaveConfig,
    /// Number of modes for spectrum runs.
    pub modes: usize,
    /// Cells per side (wave) or per subdomain (beam) for convergence runs.
    pub sizes: Vec<usize>,
    /// Hex SHA-256 of the config file bytes.
    pub hash: String,
}

const KEYS: &[&str] = &[
    "experiment",
    "output.dir",
    "output.plots",
    "run.sigma",
    "run.bootstrap",
    "run.stride",
    "beam.ei",
    "beam.rho_a",
    "beam.length",
    "beam.omega",
    "beam.n1",
    "beam.n2",
    "beam.x_int",
    "beam.dt",
    "beam.t_end",
    "wave.n",
    "wave.k",
    "wave.dt",
    "wave.t_end",
    "spectrum.modes",
    "convergence.sizes",
];

/// Parses `key = value` lines into dotted keys. `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| CliError::Config {
            key: format!("line {}", no + 1),
            msg,
        };
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| at(format!("unterminated section header {line:?}")))?
                .trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(at(format!("bad section name {name:?}")));
            }
            section = name.to_string();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| at(format!("expected key = value, got {line:?}")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(at("empty key".into()));
        }
        let key = if section.is_empty() {
            k.to_string()
        } else {
            format!("{section}.{k}")
        };
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config {
                key,
                msg: "duplicate key".into(),
            });
        }
    }
    Ok(out)
}

struct Values(BTreeMap<String, String>);

impl Values {
    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| CliError::Config {
                key: key.into(),
                msg: format!("cannot parse {v:?}"),
            }),
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(CliError::Config {
            key: key.into(),
            msg: format!("expected a boolean, got {v:?}"),
        }),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let pairs = parse_pairs(text)?;
        if let Some(k) = pairs.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(CliError::Config {
                key: k.clone(),
                msg: "unknown key".into(),
            });
        }
        let vals = Values(pairs);
        let experiment = match vals.0.get("experiment") {
            None => {
                return Err(CliError::Config {
                    key: "experiment".into(),
                    msg: "missing".into(),
                })
            }
            Some(v) => v.parse().map_err(|msg| CliError::Config {
                key: "experiment".into(),
                msg,
            })?,
        };
        let plots = match vals.0.get("output.plots") {
            Some(v) => parse_bool("output.plots", v)?,
            None => true,
        };
        let bootstrap = match vals.0.get("run.bootstrap").map(String::as_str) {
            None | Some("full") => Bootstrap::FullStep,
            Some("half") => Bootstrap::HalfStep,
            Some(other) => {
                return Err(CliError::Config {
                    key: "run.bootstrap".into(),
                    msg: format!("expected full or half, got {other:?}"),
                })
            }
        };
        let sigma: f64 = vals.get("run.sigma", 1.0)?;
        if sigma != 1.0 && sigma != -1.0 {
            return Err(CliError::Config {
                key: "run.sigma".into(),
                msg: "must be 1 or -1".into(),
            });
        }
        let b = BeamConfig::default();
        let beam = BeamConfig {
            ei: vals.get("beam.ei", b.ei)?,
            rho_a: vals.get("beam.rho_a", b.rho_a)?,
            length: vals.get("beam.length", b.length)?,
            omega: vals.get("beam.omega", b.omega)?,
            n1: vals.get("beam.n1", b.n1)?,
            n2: vals.get("beam.n2", b.n2)?,
            x_int: vals.get("beam.x_int", b.x_int)?,
            dt: vals.get("beam.dt", b.dt)?,
            t_end: vals.get("beam.t_end", b.t_end)?,
        };
        let w = WaveConfig::default();
        let wave = WaveConfig {
            n: vals.get("wave.n", w.n)?,
            k: vals.get("wave.k", w.k)?,
            dt: vals.get("wave.dt", w.dt)?,
            t_end: vals.get("wave.t_end", w.t_end)?,
        };
        let is_beam = matches!(
            experiment,
            Experiment::BeamSim | Experiment::BeamSpectrum | Experiment::BeamConvergence
        );
        let (section, check) = if is_beam {
            ("beam", beam.validate())
        } else {
            ("wave", wave.validate())
        };
        check.map_err(|e| CliError::Config {
            key: section.into(),
            msg: e.to_string(),
        })?;
        let sizes = match vals.0.get("convergence.sizes") {
            None if is_beam => vec![2, 4, 8, 16],
            None => vec![4, 8, 16, 32],
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::Config {
                    key: "convergence.sizes".into(),
                    msg: format!("expected a comma separated list of counts, got {v:?}"),
                })?,
        };
        if sizes.len() < 3 || sizes.windows(2).any(|w| w[1] <= w[0]) || sizes[0] == 0 {
            return Err(CliError::Config {
                key: "convergence.sizes".into(),
                msg: "need at least three increasing positive sizes".into(),
            });
        }
        let modes: usize = vals.get("spectrum.modes", if is_beam { 10 } else { 6 })?;
        if modes == 0 {
            return Err(CliError::Config {
                key: "spectrum.modes".into(),
                msg: "must be positive".into(),
            });
        }
        let stride: usize = vals.get("run.stride", 1)?;
        if stride == 0 {
            return Err(CliError::Config {
                key: "run.stride".into(),
                msg: "must be positive".into(),
            });
        }
        let out_dir = PathBuf::from(
            vals.0
                .get("output.dir")
                .cloned()
                .unwrap_or_else(|| format!("out/{}", experiment.name())),
        );
        Ok(ExperimentConfig {
            experiment,
            out_dir,
            plots,
            sigma,
            bootstrap,
            stride,
            beam,
            wave,
            modes,
            sizes,
            hash: hex::encode(Sha256::digest(text.as_bytes())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_prefix_keys() {
        let p = parse_pairs("experiment = beam-sim # trailing\n[beam]\nn1 = 4\n\n[wave]\nk=2\n").unwrap();
        assert_eq!(p["experiment"], "beam-sim");
        assert_eq!(p["beam.n1"], "4");
        assert_eq!(p["wave.k"], "2");
    }

    #[test]
    fn defaults_and_overrides() {
        let c = ExperimentConfig::parse("experiment = beam-spectrum\n[beam]\nn1 = 10\nn2 = 10\n").unwrap();
        assert_eq!(c.experiment, Experiment::BeamSpectrum);
        assert_eq!((c.beam.n1, c.beam.n2, c.beam.omega), (10, 10, 4.0));
        assert_eq!(c.modes, 10);
        assert!(c.plots);
        assert_eq!(c.out_dir, PathBuf::from("out/beam-spectrum"));
        assert_eq!(c.hash.len(), 64);
    }

    #[test]
    fn errors_name_the_key() {
        let key = |text: &str| match ExperimentConfig::parse(text) {
            Err(CliError::Config { key, .. }) => key,
            other => panic!("{other:?}"),
        };
        assert_eq!(key("experiment = wave-sim\n[wave]\ndt = fast\n"), "wave.dt");
        assert_eq!(key("experiment = wave-sim\n[wave]\nspeed = 1\n"), "wave.speed");
        assert_eq!(key("experiment = nope\n"), "experiment");
        assert_eq!(key("[wave]\nn = 3\n"), "experiment");
        assert_eq!(key("experiment = wave-sim\n[wave\n"), "line 2");
        assert_eq!(key("experiment = wave-sim\n[wave]\nk = 5\n"), "wave");
        assert_eq!(key("experiment = beam-sim\n[run]\nsigma = 2\n"), "run.sigma");
        assert_eq!(
            key("experiment = wave-convergence\n[convergence]\nsizes = 8, 4, 16\n"),
            "convergence.sizes"
        );
        assert_eq!(key("experiment = beam-sim\nexperiment = beam-sim\n"), "experiment");
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::parse("experiment = wave-sim\n").unwrap();
        let b = ExperimentConfig::parse("experiment = wave-sim\n").unwrap();
        let c = ExperimentConfig::parse("experiment = wave-sim\n\n").unwrap();
        assert_eq!(a.hash, b.hash);
        assert_ne!(a.hash, c.hash);
    }
}
