//! Run configuration: an optional JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use polywg::analysis::{CaseName, MeshFamily};
use polywg::assembly::Scheme;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// one solve per viscosity and scheme on a single level
    Solve,
    /// error table with observed rates over several levels
    Convergence,
    /// viscosity scaling of both schemes on one level
    Robustness,
    /// the invariant suite on one mesh
    Props,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeChoice {
    Robust,
    Standard,
    Both,
}

impl SchemeChoice {
    pub fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeChoice::Robust => vec![Scheme::Robust],
            SchemeChoice::Standard => vec![Scheme::Standard],
            SchemeChoice::Both => Scheme::ALL.to_vec(),
        }
    }
}

/// A viscosity given either as one number or as a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Every setting is optional here; missing ones take defaults after the
/// flags have been applied. This is also the JSON file format.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub case: Option<String>,
    pub mesh: Option<String>,
    pub level: Option<usize>,
    pub levels: Option<Vec<usize>>,
    pub k: Option<usize>,
    pub nu: Option<OneOrMany>,
    pub scheme: Option<SchemeChoice>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub quadrature: Option<usize>,
    pub samples: Option<usize>,
    pub dump_matrix: Option<bool>,
    pub dump_fields: Option<bool>,
    pub serial: Option<bool>,
}

/// Command-line overrides; each one wins over the JSON file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON run configuration; flags given here override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// manufactured case: poly61, zeroflow, trig or lshape
    #[arg(long)]
    pub case: Option<String>,
    /// mesh family: rect, deformed, hex or lshape
    #[arg(long)]
    pub mesh: Option<String>,
    /// mesh level for solve, robustness and props
    #[arg(long)]
    pub level: Option<usize>,
    /// comma-separated, strictly increasing levels for convergence
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    /// polynomial degree (0, 1 or 2)
    #[arg(long)]
    pub k: Option<usize>,
    /// viscosity, or a comma-separated list
    #[arg(long, value_delimiter = ',')]
    pub nu: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeChoice>,
    /// output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// seed for deformed meshes and random test functions
    #[arg(long)]
    pub seed: Option<u64>,
    /// quadrature degree for load integrals
    #[arg(long)]
    pub quadrature: Option<usize>,
    /// random functions per reconstruction check (props)
    #[arg(long)]
    pub samples: Option<usize>,
    /// write the system matrix of every solve as Matrix Market
    #[arg(long)]
    pub dump_matrix: bool,
    /// write velocity and pressure of every solve as legacy VTK
    #[arg(long)]
    pub dump_fields: bool,
    /// single-threaded, bit-reproducible run
    #[arg(long)]
    pub serial: bool,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Overlay the flags that were given.
    pub fn apply(mut self, command: Option<Command>, f: &Flags) -> Self {
        fn set<T: Clone>(slot: &mut Option<T>, v: &Option<T>) {
            if v.is_some() {
                slot.clone_from(v);
            }
        }
        if command.is_some() {
            self.command = command;
        }
        set(&mut self.case, &f.case);
        set(&mut self.mesh, &f.mesh);
        set(&mut self.level, &f.level);
        set(&mut self.levels, &f.levels);
        set(&mut self.k, &f.k);
        if let Some(nu) = &f.nu {
            self.nu = Some(OneOrMany::Many(nu.clone()));
        }
        set(&mut self.scheme, &f.scheme);
        set(&mut self.out, &f.out);
        set(&mut self.seed, &f.seed);
        set(&mut self.quadrature, &f.quadrature);
        set(&mut self.samples, &f.samples);
        if f.dump_matrix {
            self.dump_matrix = Some(true);
        }
        if f.dump_fields {
            self.dump_fields = Some(true);
        }
        if f.serial {
            self.serial = Some(true);
        }
        self
    }

    pub fn resolve(self) -> Result<Resolved> {
        let Some(command) = self.command else {
            bail!("no command given (solve | convergence | robustness | props), neither as argument nor in the config file");
        };
        let seed = self.seed.unwrap_or(0);
        let mesh: MeshFamily = self.mesh.as_deref().unwrap_or("rect").parse()?;
        let mesh = match mesh {
            MeshFamily::Deformed { .. } => MeshFamily::deformed(seed),
            m => m,
        };
        let default_case = if mesh == MeshFamily::LShape { "lshape" } else { "poly61" };
        let case: CaseName = self.case.as_deref().unwrap_or(default_case).parse()?;
        let k = self.k.unwrap_or(0);
        if k > 2 {
            bail!("k = {k} is not supported; choose 0, 1 or 2");
        }
        let (default_level, default_levels) = match mesh {
            MeshFamily::Rect | MeshFamily::Deformed { .. } => (8, vec![4, 8, 16, 32]),
            MeshFamily::Hex | MeshFamily::LShape => (2, vec![1, 2, 3]),
        };
        let level = self.level.unwrap_or(default_level);
        if level == 0 {
            bail!("levels start at 1");
        }
        let levels = self.levels.unwrap_or(default_levels);
        if command == Command::Convergence {
            if levels.len() < 2 {
                bail!("a convergence study needs at least two levels");
            }
            if levels.windows(2).any(|w| w[0] >= w[1]) || levels[0] == 0 {
                bail!("levels must be positive and strictly increasing, got {levels:?}");
            }
        }
        let nus = self.nu.map(OneOrMany::into_vec).unwrap_or_else(|| vec![1.0]);
        if nus.is_empty() || nus.iter().any(|&nu| !(nu > 0.0 && nu.is_finite())) {
            bail!("viscosities must be positive and finite, got {nus:?}");
        }
        if command == Command::Robustness && nus.len() < 2 {
            bail!("robustness needs at least two viscosities");
        }
        let samples = self.samples.unwrap_or(50);
        if samples == 0 {
            bail!("samples must be positive");
        }
        Ok(Resolved {
            command,
            case,
            mesh,
            level,
            levels,
            k,
            nus,
            scheme: self.scheme.unwrap_or(SchemeChoice::Both),
            out: self.out.unwrap_or_else(|| PathBuf::from("polywg-out")),
            seed,
            quadrature: self.quadrature,
            samples,
            dump_matrix: self.dump_matrix.unwrap_or(false),
            dump_fields: self.dump_fields.unwrap_or(false),
            serial: self.serial.unwrap_or(false),
        })
    }
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub command: Command,
    pub case: CaseName,
    pub mesh: MeshFamily,
    pub level: usize,
    pub levels: Vec<usize>,
    pub k: usize,
    pub nus: Vec<f64>,
    pub scheme: SchemeChoice,
    pub out: PathBuf,
    pub seed: u64,
    pub quadrature: Option<usize>,
    pub samples: usize,
    pub dump_matrix: bool,
    pub dump_fields: bool,
    pub serial: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str) -> RunConfig {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn flags_win_over_the_file() {
        let file = parse(r#"{"command": "convergence", "k": 1, "nu": 0.5, "levels": [2, 4], "serial": false}"#);
        let flags = Flags {
            k: Some(2),
            nu: Some(vec![1.0, 0.01]),
            serial: true,
            ..Flags::default()
        };
        let r = file.apply(None, &flags).resolve().unwrap();
        assert_eq!(r.command, Command::Convergence);
        assert_eq!(r.k, 2);
        assert_eq!(r.nus, vec![1.0, 0.01]);
        assert_eq!(r.levels, vec![2, 4]);
        assert!(r.serial);
    }

    #[test]
    fn scalar_or_list_viscosity() {
        assert_eq!(parse(r#"{"nu": 1e-2}"#).nu, Some(OneOrMany::One(1e-2)));
        assert_eq!(parse(r#"{"nu": [1, 1e-4]}"#).nu, Some(OneOrMany::Many(vec![1.0, 1e-4])));
    }

    #[test]
    fn defaults_follow_the_mesh() {
        let r = RunConfig::default().apply(Some(Command::Solve), &Flags::default()).resolve().unwrap();
        assert_eq!((r.case, r.mesh, r.level, r.k), (CaseName::Poly61, MeshFamily::Rect, 8, 0));
        let flags = Flags {
            mesh: Some("lshape".into()),
            ..Flags::default()
        };
        let r = RunConfig::default().apply(Some(Command::Convergence), &flags).resolve().unwrap();
        assert_eq!(r.case, CaseName::LShape);
        assert_eq!(r.levels, vec![1, 2, 3]);
    }

    #[test]
    fn seed_reaches_the_deformed_mesh() {
        let cfg = parse(r#"{"command": "solve", "mesh": "deformed", "seed": 7}"#);
        let r = cfg.resolve().unwrap();
        assert_eq!(r.mesh, MeshFamily::deformed(7));
    }

    #[test]
    fn shipped_configs_resolve() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut n = 0;
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "json") {
                let r = RunConfig::from_file(&path).and_then(|c| c.resolve());
                assert!(r.is_ok(), "{}: {:?}", path.display(), r.err());
                n += 1;
            }
        }
        assert!(n > 0);
    }

    #[test]
    fn invalid_settings_are_rejected() {
        let bad = [
            r#"{}"#,
            r#"{"command": "solve", "k": 3}"#,
            r#"{"command": "convergence", "levels": [8, 4]}"#,
            r#"{"command": "convergence", "levels": [4]}"#,
            r#"{"command": "solve", "nu": -1}"#,
            r#"{"command": "robustness", "nu": 1}"#,
            r#"{"command": "solve", "mesh": "triangle"}"#,
            r#"{"command": "solve", "case": "cavity"}"#,
            r#"{"command": "solve", "level": 0}"#,
        ];
        for json in bad {
            assert!(parse(json).resolve().is_err(), "{json}");
        }
        assert!(serde_json::from_str::<RunConfig>(r#"{"comand": "solve"}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"scheme": "all"}"#).is_err());
    }
}
