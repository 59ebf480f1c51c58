//! Run configuration: a flat `key = value` file with `[section]` headers,
//! figure presets, and resolution into [`StudyConfig`]s.
//!
//! ```text
//! # comments start with '#' or ';'
//! [study]
//! preset = fig-geom2d
//! models = fourier, rbf
//! n = 8:56:8
//!
//! [sweep]
//! objects = object1-2d
//! n = 24
//! epsilon = 0.1:4:0.1
//! ```
//!
//! Settings are layered: preset values first, then the file section, then
//! command line overrides. Every value error names its key.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::experiments::{Model, NodeSource, StudyConfig};
use crate::mechanics::MaterialParams;
use crate::points::PointCache;
use crate::rbf::{KernelFamily, RadialKernel};
use crate::shapes::{Geometry, IdealShape2D, IdealShape3D, NamedObject, Preset, Profile, TestObject2D, TestObject3D};

/// One `[section]` of a config file, keys in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Section {
    entries: Vec<(String, String, usize)>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.0 == key).map(|e| e.1.as_str())
    }

    /// `(key, value, line)` triples.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, usize)> {
        self.entries.iter().map(|(k, v, l)| (k.as_str(), v.as_str(), *l))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub path: PathBuf,
    sections: BTreeMap<String, Section>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(lineno, format!("unterminated section header `{line}`")))?
                    .trim();
                if name.is_empty() {
                    return Err(err(lineno, "empty section name".into()));
                }
                if sections.contains_key(name) {
                    return Err(err(lineno, format!("section [{name}] appears twice")));
                }
                sections.insert(name.to_string(), Section::default());
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(lineno, format!("expected `key = value`, found `{line}`")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(err(lineno, "missing key before `=`".into()));
            }
            let name = current
                .as_ref()
                .ok_or_else(|| err(lineno, format!("key `{key}` appears before any [section]")))?;
            let section = sections.get_mut(name).expect("section inserted on header");
            if section.get(key).is_some() {
                return Err(err(lineno, format!("key `{key}` repeated in [{name}]")));
            }
            section.entries.push((key.to_string(), value.trim().to_string(), lineno));
        }
        Ok(ConfigFile {
            path: path.to_path_buf(),
            sections,
        })
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.get(name)
    }
}

/// Which command a set of settings drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Study,
    Sweep,
    Bench,
}

impl Command {
    pub fn section(self) -> &'static str {
        match self {
            Command::Study => "study",
            Command::Sweep => "sweep",
            Command::Bench => "bench",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Command::Study => STUDY_KEYS,
            Command::Sweep => SWEEP_KEYS,
            Command::Bench => BENCH_KEYS,
        }
    }

    pub fn presets(self) -> &'static [FigurePreset] {
        match self {
            Command::Study => STUDY_PRESETS,
            Command::Sweep => SWEEP_PRESETS,
            Command::Bench => BENCH_PRESETS,
        }
    }
}

const COMMON_KEYS: &[&str] = &[
    "preset",
    "objects",
    "n",
    "m",
    "kernel",
    "seed",
    "nodes",
    "md_dir",
    "cache_dir",
    "k0",
    "gamma",
    "custom.name",
    "custom.dim",
    "custom.center",
    "custom.axes",
    "custom.amplitude",
    "custom.sigma",
    "custom.profile",
    "custom.bump",
];
const STUDY_KEYS: &[&str] = &["models", "epsilon"];
const SWEEP_KEYS: &[&str] = &["epsilon"];
const BENCH_KEYS: &[&str] = &["models", "epsilon", "trials"];

/// A named experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FigurePreset {
    pub name: &'static str,
    pub description: &'static str,
    pub values: &'static [(&'static str, &'static str)],
}

const OBJECTS_2D: &str = "object1-2d,object2-2d";
const OBJECTS_3D: &str = "object1-3d,object2-3d";
const N_2D: &str = "8:56:8";
const N_3D: &str = "16,36,64,121,256,529";

pub const STUDY_PRESETS: &[FigurePreset] = &[
    FigurePreset {
        name: "fig-geom2d",
        description: "2D reconstruction error vs N, Fourier and RBF",
        values: &[("objects", OBJECTS_2D), ("models", "fourier,rbf"), ("n", N_2D), ("m", "100")],
    },
    FigurePreset {
        name: "fig-normals2d",
        description: "2D normal error vs N with the PWL reference",
        values: &[("objects", OBJECTS_2D), ("models", "pwl,fourier,rbf"), ("n", N_2D), ("m", "100")],
    },
    FigurePreset {
        name: "fig-force2d",
        description: "2D fiber force error vs N with the PWL reference",
        values: &[("objects", OBJECTS_2D), ("models", "pwl,fourier,rbf"), ("n", N_2D), ("m", "100")],
    },
    FigurePreset {
        name: "fig-geom3d",
        description: "3D reconstruction error vs N, spherical harmonics and RBF",
        values: &[("objects", OBJECTS_3D), ("models", "fourier,rbf"), ("n", N_3D), ("m", "1024")],
    },
    FigurePreset {
        name: "fig-normals3d",
        description: "3D normal error vs N with the PWL reference",
        values: &[("objects", OBJECTS_3D), ("models", "pwl,fourier,rbf"), ("n", N_3D), ("m", "1024")],
    },
    FigurePreset {
        name: "fig-force3d",
        description: "3D surface tension force error vs N",
        values: &[("objects", OBJECTS_3D), ("models", "fourier,rbf"), ("n", N_3D), ("m", "1024")],
    },
];

pub const SWEEP_PRESETS: &[FigurePreset] = &[
    FigurePreset {
        name: "fig-2dshape1",
        description: "2D shape error vs epsilon at N=24",
        values: &[("objects", OBJECTS_2D), ("n", "24"), ("m", "100"), ("epsilon", "0.1:8:0.1")],
    },
    FigurePreset {
        name: "fig-2dshape2",
        description: "2D shape error vs epsilon at N=56",
        values: &[("objects", OBJECTS_2D), ("n", "56"), ("m", "100"), ("epsilon", "0.1:8:0.1")],
    },
    FigurePreset {
        name: "fig-3dshape1",
        description: "3D shape error vs epsilon at N=256",
        values: &[("objects", OBJECTS_3D), ("n", "256"), ("m", "1024"), ("epsilon", "0.1:6:0.1")],
    },
    FigurePreset {
        name: "fig-3dshape2",
        description: "3D shape error vs epsilon at N=529",
        values: &[("objects", OBJECTS_3D), ("n", "529"), ("m", "1024"), ("epsilon", "0.1:6:0.1")],
    },
];

pub const BENCH_PRESETS: &[FigurePreset] = &[
    FigurePreset {
        name: "fig-compcost2d",
        description: "2D time per step vs N on Object 1",
        values: &[("objects", "object1-2d"), ("models", "pwl,fourier,rbf"), ("n", N_2D), ("m", "100")],
    },
    FigurePreset {
        name: "fig-compcost3d",
        description: "3D time per step vs N on Object 1",
        values: &[("objects", "object1-3d"), ("models", "pwl,fourier,rbf"), ("n", N_3D), ("m", "1024")],
    },
];

pub fn find_preset(command: Command, name: &str) -> Result<&'static FigurePreset> {
    let presets = command.presets();
    presets.iter().find(|p| p.name == name).ok_or_else(|| {
        let known: Vec<&str> = presets.iter().map(|p| p.name).collect();
        Error::config(
            "preset",
            format!("unknown {} preset `{name}` (available: {})", command.section(), known.join(", ")),
        )
    })
}

/// Resolved key/value settings for one command, kept sorted so the echo is
/// deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    command: Command,
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new(command: Command) -> Self {
        Settings {
            command,
            values: BTreeMap::new(),
        }
    }

    pub fn command(&self) -> Command {
        self.command
    }

    fn check_key(&self, key: &str) -> Result<()> {
        if COMMON_KEYS.contains(&key) || self.command.keys().contains(&key) {
            Ok(())
        } else {
            Err(Error::config(key, format!("unknown key for [{}]", self.command.section())))
        }
    }

    /// Sets a value. A `preset` key expands into the preset's values, which
    /// overwrite what is already present.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.check_key(key)?;
        if key == "preset" {
            let preset = find_preset(self.command, value.trim())?;
            for (k, v) in preset.values {
                self.values.insert((*k).to_string(), (*v).to_string());
            }
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Applies a config section. A preset named in the section is applied
    /// first so the other keys of the section refine it.
    pub fn apply_section(&mut self, section: &Section) -> Result<()> {
        if let Some(p) = section.get("preset") {
            self.set("preset", p)?;
        }
        for (k, v, _) in section.entries() {
            if k != "preset" {
                self.set(k, v)?;
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// The settings as a config file that reproduces them.
    pub fn to_config_text(&self) -> String {
        let mut out = format!("[{}]\n", self.command.section());
        for (k, v) in &self.values {
            if k != "preset" {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| Error::config(key, format!("`{v}`: {e}"))))
            .transpose()
    }

    pub fn seed(&self) -> Result<u64> {
        Ok(self.parsed("seed")?.unwrap_or(0))
    }

    pub fn trials(&self) -> Result<usize> {
        let t = self.parsed("trials")?.unwrap_or(100);
        if t == 0 {
            return Err(Error::config("trials", "trial count must be at least 1"));
        }
        Ok(t)
    }

    /// Shape parameter grid for sweeps.
    pub fn epsilon_grid(&self) -> Result<Vec<f64>> {
        let raw = self
            .get("epsilon")
            .ok_or_else(|| Error::config("epsilon", "no shape parameter grid given"))?;
        let grid = parse_float_grid("epsilon", raw)?;
        if grid.is_empty() {
            return Err(Error::config("epsilon", "shape parameter grid is empty"));
        }
        if let Some(e) = grid.iter().find(|e| !(**e > 0.0)) {
            return Err(Error::config("epsilon", format!("shape parameters must be positive, got {e}")));
        }
        Ok(grid)
    }

    pub fn objects(&self) -> Result<Vec<NamedObject>> {
        let raw = self
            .get("objects")
            .ok_or_else(|| Error::config("objects", "no objects given (use a preset or set `objects`)"))?;
        let names: Vec<&str> = raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        if names.is_empty() {
            return Err(Error::config("objects", "object list is empty"));
        }
        names
            .into_iter()
            .map(|name| {
                if name == "custom" {
                    self.custom_object()
                } else {
                    Preset::parse(name)
                        .map(NamedObject::from)
                        .map_err(|_| {
                            Error::config(
                                "objects",
                                format!("unknown object `{name}` (known: object1-2d, object2-2d, object1-3d, object2-3d, custom)"),
                            )
                        })
                }
            })
            .collect()
    }

    fn custom_object(&self) -> Result<NamedObject> {
        let need = |key: &str| {
            self.get(key)
                .ok_or_else(|| Error::config(key, "required for a custom object"))
        };
        let floats = |key: &str, len: usize| -> Result<Vec<f64>> {
            let v: Vec<f64> = parse_list(key, need(key)?)?;
            if v.len() != len {
                return Err(Error::config(key, format!("expected {len} comma-separated values, found {}", v.len())));
            }
            Ok(v)
        };
        let dim: usize = self.parsed("custom.dim")?.ok_or_else(|| Error::config("custom.dim", "required for a custom object"))?;
        let amplitude: f64 = self.parsed("custom.amplitude")?.unwrap_or(0.0);
        let sigma: f64 = self.parsed("custom.sigma")?.unwrap_or(1.0);
        let profile = match self.get("custom.profile").unwrap_or("smooth") {
            "smooth" => Profile::Smooth,
            "rough" => Profile::Rough,
            other => return Err(Error::config("custom.profile", format!("`{other}` is not smooth or rough"))),
        };
        let named = |e: Error, key: &str| match e {
            Error::Validation(m) => Error::config(key, m),
            other => other,
        };
        let geometry = match dim {
            2 => {
                let c = floats("custom.center", 2)?;
                let ax = floats("custom.axes", 2)?;
                let ideal = IdealShape2D::new(c[0], c[1], ax[0], ax[1]).map_err(|e| named(e, "custom.axes"))?;
                Geometry::Curve(TestObject2D::new(ideal, amplitude, sigma, profile).map_err(|e| named(e, "custom.sigma"))?)
            }
            3 => {
                let c = floats("custom.center", 3)?;
                let ax = floats("custom.axes", 3)?;
                let bump = match self.get("custom.bump") {
                    Some(_) => floats("custom.bump", 2)?,
                    None => vec![0.0, std::f64::consts::FRAC_PI_2],
                };
                let ideal =
                    IdealShape3D::new([c[0], c[1], c[2]], ax[0], ax[1], ax[2]).map_err(|e| named(e, "custom.axes"))?;
                Geometry::Surface(
                    TestObject3D::new(ideal, amplitude, sigma, bump[0], bump[1], profile)
                        .map_err(|e| named(e, "custom.sigma"))?,
                )
            }
            d => return Err(Error::config("custom.dim", format!("dimension must be 2 or 3, got {d}"))),
        };
        Ok(NamedObject::custom(self.get("custom.name").unwrap_or("custom"), geometry))
    }

    fn models(&self) -> Result<Vec<Model>> {
        match self.command {
            Command::Sweep => Ok(vec![Model::Rbf]),
            _ => {
                let raw = self.get("models").ok_or_else(|| Error::config("models", "no models given"))?;
                let models = raw
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| Model::parse(s).map_err(|_| Error::config("models", format!("unknown model `{s}` (known: pwl, fourier, rbf)"))))
                    .collect::<Result<Vec<_>>>()?;
                if models.is_empty() {
                    return Err(Error::config("models", "model list is empty"));
                }
                Ok(models)
            }
        }
    }

    /// One validated [`StudyConfig`] per (object, model), objects outermost.
    pub fn study_configs(&self) -> Result<Vec<StudyConfig>> {
        let objects = self.objects()?;
        let models = self.models()?;
        let seed = self.seed()?;
        let n_list: Option<Vec<usize>> = match self.get("n") {
            Some(v) => Some(parse_int_grid("n", v)?),
            None => None,
        };
        let m: Option<usize> = self.parsed("m")?;
        let family = match self.get("kernel") {
            Some(k) => Some(KernelFamily::parse(k).map_err(|_| Error::config("kernel", format!("unknown kernel `{k}` (known: mq, imq)")))?),
            None => None,
        };
        let epsilon: Option<f64> = match self.command {
            Command::Sweep => None,
            _ => self.parsed("epsilon")?,
        };
        let nodes = match self.get("nodes").unwrap_or("me") {
            "me" => NodeSource::MinimalEnergy,
            "fib" => NodeSource::Fibonacci,
            "md" => NodeSource::MaximalDeterminant(PathBuf::from(self.get("md_dir").unwrap_or("."))),
            other => return Err(Error::config("nodes", format!("`{other}` is not one of me, fib, md"))),
        };
        let cache_dir = self.get("cache_dir").map(PathBuf::from).unwrap_or_else(PointCache::default_dir);
        let defaults = MaterialParams::default();
        let material = MaterialParams::new(
            self.parsed("k0")?.unwrap_or(defaults.k0),
            self.parsed("gamma")?.unwrap_or(defaults.gamma),
        )
        .map_err(|e| Error::config("k0", e.to_string()))?;

        let mut out = Vec::new();
        for object in &objects {
            for &model in &models {
                let mut cfg = StudyConfig::new(object.clone(), model);
                if let Some(n) = &n_list {
                    cfg.n_list = n.clone();
                }
                if let Some(m) = m {
                    cfg.m = m;
                }
                if family.is_some() || epsilon.is_some() {
                    let base = cfg.kernel();
                    let k = RadialKernel::new(family.unwrap_or(base.family), epsilon.unwrap_or(base.epsilon))
                        .map_err(|e| Error::config("epsilon", e.to_string()))?;
                    cfg.kernel = Some(k);
                }
                cfg.seed = seed;
                cfg.nodes = nodes.clone();
                cfg.cache_dir = cache_dir.clone();
                cfg.material = material;
                cfg.validate()?;
                out.push(cfg);
            }
        }
        Ok(out)
    }
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| Error::config(key, format!("`{s}`: {e}"))))
        .collect()
}

/// Integers as a comma list or an inclusive `start:stop:step` range.
pub fn parse_int_grid(key: &str, raw: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = raw.split(':').map(str::trim).collect();
    match parts.len() {
        1 => parse_list(key, raw),
        3 => {
            let v: Vec<usize> = parts
                .iter()
                .map(|s| s.parse::<usize>().map_err(|e| Error::config(key, format!("`{s}`: {e}"))))
                .collect::<Result<_>>()?;
            if v[2] == 0 {
                return Err(Error::config(key, "range step must be positive"));
            }
            Ok((v[0]..=v[1]).step_by(v[2]).collect())
        }
        _ => Err(Error::config(key, format!("`{raw}` is neither a list nor start:stop:step"))),
    }
}

/// Floats as a comma list or an inclusive `start:stop:step` range. Range
/// points are `start + i·step` rounded to 12 decimals so printed grids stay
/// readable; the stop value is included when it falls on the grid.
pub fn parse_float_grid(key: &str, raw: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = raw.split(':').map(str::trim).collect();
    match parts.len() {
        1 => parse_list(key, raw),
        3 => {
            let v: Vec<f64> = parts
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| Error::config(key, format!("`{s}`: {e}"))))
                .collect::<Result<_>>()?;
            let (start, stop, step) = (v[0], v[1], v[2]);
            if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
                return Err(Error::config(key, "range needs finite bounds and a positive step"));
            }
            let count = ((stop - start) / step + 1e-9).floor();
            if count < 0.0 {
                return Ok(Vec::new());
            }
            Ok((0..=count as usize)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        _ => Err(Error::config(key, format!("`{raw}` is neither a list nor start:stop:step"))),
    }
}
