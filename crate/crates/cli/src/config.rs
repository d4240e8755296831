//! Run configuration: typed view of the INI file after overrides, validated
//! before anything is computed.

use std::cell::RefCell;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cascade_stokes::divsolve::PotentialKind;
use cascade_stokes::geometry::{ProfileSpec, ShapeParams};
use cascade_stokes::mesh::MeshKind;
use cascade_stokes::solver::{LinearSolver, SolveMode, SolverConfig};
use cascade_stokes::verify::CASE_IDS;
use cascade_stokes::Point;

use crate::ini::Ini;

pub const OUTPUT_ROOT_ENV: &str = "CASCADE_OUTPUT_ROOT";

/// Validation failure naming the offending key.
#[derive(Debug)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.message)
    }
}

type Res<T> = std::result::Result<T, ConfigError>;

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { key: key.to_string(), message: message.into() }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeshSource {
    File(PathBuf),
    Structured { n1: usize, n2: usize },
    Sized { h: f64, kind: MeshKind },
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSpec {
    Manufactured(String),
    Random(u64),
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForcingMode {
    Vector,
    Tensor,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Levels {
    Strip(Vec<usize>),
    Sizes(Vec<f64>, MeshKind),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub shape: ShapeParams,
    pub mesh: MeshSource,
    pub nu: f64,
    pub data: DataSpec,
    pub forcing: ForcingMode,
    pub potential: PotentialKind,
    pub solver: SolverConfig,
    pub levels: Levels,
    pub samples: usize,
    pub seed: u64,
    pub study_r: Vec<f64>,
    pub output_dir: PathBuf,
    /// Every key with its effective value, defaults included.
    pub effective: Ini,
}

/// Reads keys from the INI and records what was used.
struct Reader<'a> {
    ini: &'a Ini,
    used: RefCell<Ini>,
}

impl<'a> Reader<'a> {
    fn raw(&self, section: &str, key: &str) -> Option<&'a str> {
        let v = self.ini.get(section, key)?;
        self.used.borrow_mut().insert(section, key, v.to_string());
        Some(v)
    }

    fn parsed<T: FromStr>(&self, section: &str, key: &str, default: Option<T>) -> Res<Option<T>>
    where
        T: std::fmt::Display,
    {
        let name = format!("{section}.{key}");
        match self.raw(section, key) {
            Some(v) => v.parse().map(Some).map_err(|_| bad(&name, format!("cannot parse `{v}`"))),
            None => {
                if let Some(d) = &default {
                    self.used.borrow_mut().insert(section, key, d.to_string());
                }
                Ok(default)
            }
        }
    }

    fn value<T: FromStr + std::fmt::Display>(&self, section: &str, key: &str, default: T) -> Res<T> {
        Ok(self.parsed(section, key, Some(default))?.unwrap())
    }

    fn text(&self, section: &str, key: &str, default: &str) -> String {
        self.raw(section, key).map(str::to_string).unwrap_or_else(|| {
            self.used.borrow_mut().insert(section, key, default.to_string());
            default.to_string()
        })
    }

    fn list<T: FromStr>(&self, section: &str, key: &str) -> Res<Option<Vec<T>>> {
        let Some(v) = self.raw(section, key) else { return Ok(None) };
        let items: Vec<&str> = v.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if items.is_empty() {
            return Err(bad(&format!("{section}.{key}"), "empty list"));
        }
        items
            .iter()
            .map(|s| s.parse().map_err(|_| bad(&format!("{section}.{key}"), format!("cannot parse list item `{s}`"))))
            .collect::<Res<Vec<T>>>()
            .map(Some)
    }

    /// `x y; x y; ...`
    fn points(&self, section: &str, key: &str) -> Res<Option<Vec<Point>>> {
        let Some(v) = self.raw(section, key) else { return Ok(None) };
        let name = format!("{section}.{key}");
        v.split(';')
            .map(|p| {
                let xs: Vec<f64> = p
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().map_err(|_| bad(&name, format!("cannot parse coordinate `{s}`"))))
                    .collect::<Res<_>>()?;
                match xs[..] {
                    [x, y] => Ok([x, y]),
                    _ => Err(bad(&name, format!("expected `x y`, got `{}`", p.trim()))),
                }
            })
            .collect::<Res<Vec<Point>>>()
            .map(Some)
    }
}

fn parse_kind(key: &str, v: &str) -> Res<MeshKind> {
    match v {
        "auto" => Ok(MeshKind::Auto),
        "structured" => Ok(MeshKind::Structured),
        "unstructured" => Ok(MeshKind::Unstructured),
        _ => Err(bad(key, format!("unknown mesh kind `{v}` (auto, structured, unstructured)"))),
    }
}

impl RunConfig {
    /// `base` resolves relative file paths; `output_root` prefixes relative output dirs.
    pub fn from_ini(ini: &Ini, base: &Path, output_root: Option<&Path>) -> Res<Self> {
        let r = Reader { ini, used: RefCell::new(Ini::default()) };

        let tau: f64 = r.value("geometry", "tau", 1.0)?;
        let d: f64 = r.value("geometry", "d", 2.0)?;
        let mut shape = ShapeParams::strip(tau, d);
        let lift = r.parsed::<f64>("geometry", "lower_lift", None)?;
        let curve = r.points("geometry", "lower_curve")?;
        match (lift, curve) {
            (Some(_), Some(_)) => return Err(bad("geometry.lower_curve", "give either lower_curve or lower_lift")),
            (Some(l), None) => shape = shape.with_lower_lift(l),
            (None, Some(c)) => shape.lower_control = c,
            (None, None) => {}
        }
        shape.delta_margin = r.parsed("geometry", "delta_margin", None)?;
        match r.text("geometry", "profile", "none").as_str() {
            "none" => {}
            "ellipse" => {
                let center = r.list::<f64>("geometry", "profile_center")?;
                let axes = r.list::<f64>("geometry", "profile_semi_axes")?;
                let angle = r.value("geometry", "profile_angle", 0.0)?;
                let two = |k: &str, v: Option<Vec<f64>>| match v.as_deref() {
                    Some(&[a, b]) => Ok([a, b]),
                    _ => Err(bad(k, "expected two numbers")),
                };
                shape = shape.with_profile(ProfileSpec::Ellipse {
                    center: two("geometry.profile_center", center)?,
                    semi_axes: two("geometry.profile_semi_axes", axes)?,
                    angle,
                });
            }
            "bezier" => {
                let ctrl = r
                    .points("geometry", "profile_control")?
                    .ok_or_else(|| bad("geometry.profile_control", "required for a bezier profile"))?;
                if ctrl.len() < 3 || ctrl.len() % 3 != 0 {
                    return Err(bad("geometry.profile_control", "closed bezier profile needs 3k control points"));
                }
                shape = shape.with_profile(ProfileSpec::Bezier(ctrl));
            }
            other => return Err(bad("geometry.profile", format!("unknown profile `{other}` (none, ellipse, bezier)"))),
        }

        let mesh = if let Some(f) = r.raw("mesh", "file") {
            let path = base.join(f);
            if !path.is_file() {
                return Err(bad("mesh.file", format!("{} does not exist", path.display())));
            }
            MeshSource::File(path)
        } else {
            let n1 = r.parsed::<usize>("mesh", "n1", None)?;
            let n2 = r.parsed::<usize>("mesh", "n2", None)?;
            match (n1, n2) {
                (Some(n1), Some(n2)) if n1 > 0 && n2 > 0 => MeshSource::Structured { n1, n2 },
                (None, None) => {
                    let h: f64 = r.value("mesh", "h", 0.1)?;
                    if !(h > 0.0 && h.is_finite()) {
                        return Err(bad("mesh.h", "must be positive"));
                    }
                    MeshSource::Sized { h, kind: parse_kind("mesh.kind", &r.text("mesh", "kind", "auto"))? }
                }
                _ => return Err(bad("mesh.n1", "structured meshes need positive n1 and n2")),
            }
        };

        let nu: f64 = r.value("problem", "nu", 1.0)?;
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(bad("problem.nu", "viscosity must be positive"));
        }
        let case = r.text("problem", "case", "uniform");
        let data_seed = r.value("problem", "seed", 0u64)?;
        let data = match case.as_str() {
            "zero" => DataSpec::Zero,
            "random" => DataSpec::Random(data_seed),
            id if CASE_IDS.contains(&id) => DataSpec::Manufactured(id.to_string()),
            other => {
                return Err(bad(
                    "problem.case",
                    format!("unknown case `{other}` (expected one of {}, random, zero)", CASE_IDS.join(", ")),
                ))
            }
        };
        let forcing = match r.text("problem", "forcing", "vector").as_str() {
            "vector" => ForcingMode::Vector,
            "tensor" => ForcingMode::Tensor,
            other => return Err(bad("problem.forcing", format!("unknown forcing `{other}` (vector, tensor)"))),
        };
        let potential = match r.text("problem", "potential", "outflow-free").as_str() {
            "outflow-free" => PotentialKind::OutflowFree,
            "plain" => PotentialKind::Plain,
            other => return Err(bad("problem.potential", format!("unknown potential `{other}` (outflow-free, plain)"))),
        };

        let mode = r.text("solver", "mode", "direct");
        let linear = r.text("solver", "linear_solver", "direct");
        let solver = SolverConfig {
            mode: SolveMode::parse(&mode).ok_or_else(|| bad("solver.mode", format!("unknown mode `{mode}`")))?,
            linear_solver: LinearSolver::parse(&linear)
                .ok_or_else(|| bad("solver.linear_solver", format!("unknown linear solver `{linear}`")))?,
            tol: r.value("solver", "tol", 1e-10)?,
            max_iter: r.value("solver", "max_iter", 10_000usize)?,
            r_values: r.list("solver", "r")?.unwrap_or_else(|| {
                r.used.borrow_mut().insert("solver", "r", "2".into());
                vec![2.0]
            }),
        };
        solver.validate().map_err(|e| bad("solver", e.to_string()))?;

        let levels = match (r.list::<usize>("study", "n2")?, r.list::<f64>("study", "h")?) {
            (Some(_), Some(_)) => return Err(bad("study.h", "give either study.n2 or study.h")),
            (Some(n), None) => Levels::Strip(n),
            (None, Some(h)) => Levels::Sizes(h, parse_kind("study.kind", &r.text("study", "kind", "auto"))?),
            (None, None) => {
                r.used.borrow_mut().insert("study", "n2", "4, 8, 16".into());
                Levels::Strip(vec![4, 8, 16])
            }
        };
        if matches!(&levels, Levels::Strip(n) if n.contains(&0)) {
            return Err(bad("study.n2", "levels must be positive"));
        }
        let samples = r.value("study", "samples", 10usize)?;
        if samples == 0 {
            return Err(bad("study.samples", "must be positive"));
        }
        let seed = r.value("study", "seed", 2024u64)?;
        let study_r = match r.list("study", "r")? {
            Some(v) => v,
            None => solver.r_values.clone(),
        };
        for &x in &study_r {
            if !(x > 1.0 && x.is_finite()) {
                return Err(bad("study.r", format!("exponent {x} must exceed 1")));
            }
        }

        let dir = PathBuf::from(r.text("output", "dir", "output"));
        let output_dir = match output_root {
            Some(root) if dir.is_relative() => root.join(dir),
            _ => dir,
        };

        let mut used = r.used.into_inner();
        for (section, key) in ini.keys() {
            if used.get(section, key).is_none() {
                return Err(bad(&format!("{section}.{key}"), "unknown key or not used by this configuration"));
            }
        }
        used.insert("output", "dir", output_dir.display().to_string());

        Ok(RunConfig {
            shape,
            mesh,
            nu,
            data,
            forcing,
            potential,
            solver,
            levels,
            samples,
            seed,
            study_r,
            output_dir,
            effective: used,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Res<RunConfig> {
        RunConfig::from_ini(&Ini::parse(text, "t").unwrap(), Path::new("."), None)
    }

    #[test]
    fn defaults_are_filled_in() {
        let c = load("").unwrap();
        assert_eq!(c.shape, ShapeParams::strip(1.0, 2.0));
        assert_eq!(c.mesh, MeshSource::Sized { h: 0.1, kind: MeshKind::Auto });
        assert_eq!(c.data, DataSpec::Manufactured("uniform".into()));
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.effective.get("problem", "case"), Some("uniform"));
        assert_eq!(c.effective.get("solver", "r"), Some("2"));
    }

    #[test]
    fn full_config() {
        let c = load(
            "[geometry]\ntau = 1.2\nd = 3\nlower_curve = 0 0; 1 0.1; 2 0.1; 3 0\nprofile = ellipse\n\
             profile_center = 1.5 0.6\nprofile_semi_axes = 0.3 0.1\n[mesh]\nh = 0.2\nkind = unstructured\n\
             [problem]\ncase = random\nseed = 9\nnu = 0.5\n[solver]\nmode = lifted\nr = 1.5, 2\n\
             [study]\nh = 0.2 0.1 0.05\n",
        )
        .unwrap();
        assert_eq!(c.shape.lower_control.len(), 4);
        assert!(matches!(c.shape.profile, Some(ProfileSpec::Ellipse { .. })));
        assert_eq!(c.data, DataSpec::Random(9));
        assert_eq!(c.solver.mode, SolveMode::Lifted);
        assert_eq!(c.solver.r_values, vec![1.5, 2.0]);
        assert_eq!(c.study_r, vec![1.5, 2.0]);
        assert_eq!(c.levels, Levels::Sizes(vec![0.2, 0.1, 0.05], MeshKind::Auto));
    }

    #[test]
    fn errors_name_the_key() {
        for (text, key) in [
            ("[problem]\ncase = vortex\n", "problem.case"),
            ("[problem]\nnu = -1\n", "problem.nu"),
            ("[geometry]\ntau = one\n", "geometry.tau"),
            ("[mesh]\nfile = /nonexistent/m.txt\n", "mesh.file"),
            ("[mesh]\nn1 = 4\n", "mesh.n1"),
            ("[solver]\nr = 0.5\n", "solver"),
            ("[solver]\ncolour = red\n", "solver.colour"),
            ("[geometry]\nlower_curve = 0 0 1\n", "geometry.lower_curve"),
        ] {
            let e = load(text).unwrap_err();
            assert_eq!(e.key, key, "{text}: {e}");
        }
    }

    #[test]
    fn output_root_prefixes_relative_dirs() {
        let ini = Ini::parse("[output]\ndir = run1\n", "t").unwrap();
        let c = RunConfig::from_ini(&ini, Path::new("."), Some(Path::new("/tmp/root"))).unwrap();
        assert_eq!(c.output_dir, PathBuf::from("/tmp/root/run1"));
        let ini = Ini::parse("[output]\ndir = /abs\n", "t").unwrap();
        let c = RunConfig::from_ini(&ini, Path::new("."), Some(Path::new("/tmp/root"))).unwrap();
        assert_eq!(c.output_dir, PathBuf::from("/abs"));
    }
}
