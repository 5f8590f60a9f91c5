use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;
use toml::Value;

use crate::automaton::AutomatonParams;
use crate::dense::jump::{Drive, EventSampling, JumpParams, JumpVariant};
use crate::dense::{NonCliffordParams, MAX_STATE_QUBITS};
use crate::lattice::{build_lattice, LatticeKind, LatticeTopology};
use crate::protocol::{Init, ProtocolParams, Rule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("{path}: {msg}")]
    Key { path: String, msg: String },
    #[error("sweep: {0}")]
    Sweep(String),
}

fn key_err(path: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Key {
        path: path.to_string(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Clifford,
    Dense,
    NonClifford,
    Jump,
    ClassicalCA,
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "clifford" | "stabilizer" => Engine::Clifford,
            "dense" => Engine::Dense,
            "nonclifford" | "non_clifford" => Engine::NonClifford,
            "jump" => Engine::Jump,
            "classical" | "classical_ca" | "automaton" => Engine::ClassicalCA,
            other => return Err(format!("unknown engine `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// Ensemble mean of `M(t)`.
    Magnetization,
    /// Snapshot moments after a burn-in.
    SteadyState {
        burn_in: usize,
        every: usize,
        per_trajectory: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Protocol(Init),
    /// `alpha |+...+> + sqrt(1 - alpha^2) |-...->`.
    Cat { alpha: f64 },
}

#[derive(Debug, Clone)]
pub enum EngineParams {
    Clifford(ProtocolParams),
    Dense(ProtocolParams),
    NonClifford(NonCliffordParams),
    Jump(JumpParams),
    ClassicalCA(AutomatonParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub fit_t_min: f64,
    pub hist_bins: usize,
    pub hist_t_from: usize,
    pub hist_t_to: usize,
}

/// One fully validated experiment point.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub engine: Engine,
    pub params: EngineParams,
    pub lattice: Arc<LatticeTopology>,
    pub steps: usize,
    pub trajectories: usize,
    pub master_seed: u64,
    pub init: InitSpec,
    pub observable: Observable,
    pub analysis: AnalysisOptions,
    pub output: Option<PathBuf>,
    pub plots: bool,
}

/// The swept key and its values, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub key: String,
    pub values: Vec<Value>,
}

/// Flattens nested tables into dotted keys.
fn flatten(prefix: &str, t: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in t {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(inner) => flatten(&key, inner, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

pub fn parse_flat(text: &str) -> Result<BTreeMap<String, Value>, ConfigError> {
    let t: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    let mut out = BTreeMap::new();
    flatten("", &t, &mut out);
    Ok(out)
}

/// Splits a flat config into its swept key (if any) and the base map.
pub fn split_sweep(map: &BTreeMap<String, Value>) -> Result<Option<SweepSpec>, ConfigError> {
    let swept: Vec<(&String, &Vec<Value>)> = map
        .iter()
        .filter_map(|(k, v)| match v {
            Value::Array(a) => Some((k, a)),
            _ => None,
        })
        .collect();
    match swept.len() {
        0 => Ok(None),
        1 => {
            let (k, vals) = swept[0];
            if vals.is_empty() {
                return Err(ConfigError::Sweep(format!("{k}: empty value list")));
            }
            if vals.iter().any(|v| matches!(v, Value::Array(_) | Value::Table(_))) {
                return Err(ConfigError::Sweep(format!("{k}: values must be scalars")));
            }
            Ok(Some(SweepSpec {
                key: k.clone(),
                values: vals.clone(),
            }))
        }
        _ => Err(ConfigError::Sweep(format!(
            "only one key may be swept, found {}",
            swept.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join(", ")
        ))),
    }
}

struct Reader {
    map: BTreeMap<String, Value>,
    used: BTreeSet<String>,
}

impl Reader {
    fn get(&mut self, key: &str) -> Option<Value> {
        let v = self.map.get(key).cloned();
        if v.is_some() {
            self.used.insert(key.to_string());
        }
        v
    }

    fn f64_opt(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(f)),
            Some(Value::Integer(i)) => Ok(Some(i as f64)),
            Some(v) => Err(key_err(key, format!("expected a number, got {v}"))),
        }
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn f64_req(&mut self, key: &str) -> Result<f64, ConfigError> {
        self.f64_opt(key)?.ok_or_else(|| key_err(key, "required"))
    }

    fn u64_opt(&mut self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if i >= 0 => Ok(Some(i as u64)),
            Some(v) => Err(key_err(key, format!("expected a non-negative integer, got {v}"))),
        }
    }

    fn usize_opt(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        Ok(self.u64_opt(key)?.map(|v| v as usize))
    }

    fn usize_req(&mut self, key: &str) -> Result<usize, ConfigError> {
        self.usize_opt(key)?.ok_or_else(|| key_err(key, "required"))
    }

    fn str_opt(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(key_err(key, format!("expected a string, got {v}"))),
        }
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(b),
            Some(v) => Err(key_err(key, format!("expected true or false, got {v}"))),
        }
    }

    fn finish(self, engine: &str) -> Result<(), ConfigError> {
        match self.map.keys().find(|k| !self.used.contains(*k)) {
            Some(k) => Err(key_err(k, format!("unknown key for engine `{engine}`"))),
            None => Ok(()),
        }
    }
}

fn probability(r: &mut Reader, key: &str) -> Result<f64, ConfigError> {
    let p = r.f64(key, 0.0)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(key_err(key, format!("probability {p} outside [0, 1]")));
    }
    Ok(p)
}

fn protocol_params(r: &mut Reader, lattice: &Arc<LatticeTopology>, steps: usize) -> Result<ProtocolParams, ConfigError> {
    let mut p = ProtocolParams::new(lattice.clone(), steps);
    p.p_flip = probability(r, "p_flip")?;
    p.p_nec = probability(r, "p_nec")?;
    p.p_unit = probability(r, "p_unit")?;
    p.p_reset = probability(r, "p_reset")?;
    p.p_me = probability(r, "p_me")?;
    p.p_dep = probability(r, "p_dep")?;
    p.rule = rule(r)?;
    p.validate().map_err(|e| key_err("params", e.to_string()))?;
    Ok(p)
}

fn rule(r: &mut Reader) -> Result<Rule, ConfigError> {
    match r.str_opt("rule")? {
        None => Ok(Rule::Nec),
        Some(s) => s.parse().map_err(|e: crate::protocol::ProtocolError| key_err("rule", e.to_string())),
    }
}

fn lattice(r: &mut Reader) -> Result<Arc<LatticeTopology>, ConfigError> {
    let kind = match r.str_opt("lattice.kind")? {
        None => LatticeKind::SquarePeriodic,
        Some(s) => s.parse().map_err(|e: crate::lattice::LatticeError| key_err("lattice.kind", e.to_string()))?,
    };
    let size = r.usize_opt("lattice.size")?;
    let rows = r.usize_opt("lattice.rows")?;
    let cols = r.usize_opt("lattice.cols")?;
    let (rows, cols) = match (size, rows, cols) {
        (Some(l), None, None) => (l, l),
        (Some(_), _, _) => return Err(key_err("lattice.size", "conflicts with lattice.rows/lattice.cols")),
        (None, Some(a), Some(b)) => (a, b),
        (None, None, _) => return Err(key_err("lattice.rows", "required")),
        (None, _, None) => return Err(key_err("lattice.cols", "required")),
    };
    build_lattice(kind, (rows, cols))
        .map(Arc::new)
        .map_err(|e| key_err("lattice", e.to_string()))
}

fn capacity(lattice: &LatticeTopology, engine: &str) -> Result<(), ConfigError> {
    let n = lattice.num_sites();
    if n > MAX_STATE_QUBITS {
        return Err(key_err(
            "lattice",
            format!("engine `{engine}` holds at most {MAX_STATE_QUBITS} qubits, lattice has {n}"),
        ));
    }
    Ok(())
}

fn init_spec(r: &mut Reader, allow_cat: bool) -> Result<InitSpec, ConfigError> {
    let s = r.str_opt("init")?.unwrap_or_else(|| "all_plus".into());
    if let Some(a) = s.strip_prefix("cat:") {
        if !allow_cat {
            return Err(key_err("init", "cat states need the jump engine"));
        }
        let alpha: f64 = a.parse().map_err(|_| key_err("init", format!("bad cat amplitude `{a}`")))?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(key_err("init", "cat amplitude must lie in [0, 1]"));
        }
        return Ok(InitSpec::Cat { alpha });
    }
    s.parse()
        .map(InitSpec::Protocol)
        .map_err(|e: crate::protocol::ProtocolError| key_err("init", e.to_string()))
}

fn analysis(r: &mut Reader, steps: usize) -> Result<AnalysisOptions, ConfigError> {
    let a = AnalysisOptions {
        fit_t_min: r.f64("fit_t_min", 10.0)?,
        hist_bins: r.usize_opt("hist_bins")?.unwrap_or(40),
        hist_t_from: r.usize_opt("hist_t_from")?.unwrap_or(10.min(steps)),
        hist_t_to: r.usize_opt("hist_t_to")?.unwrap_or(steps),
    };
    if a.hist_bins < 8 {
        return Err(key_err("hist_bins", "need at least 8 bins"));
    }
    Ok(a)
}

fn jump_params(r: &mut Reader) -> Result<JumpParams, ConfigError> {
    let gamma = r.f64_req("gamma")?;
    let t_max = r.f64_req("t_max")?;
    let variant = match r.str_opt("variant")?.as_deref().unwrap_or("coherent") {
        "coherent" | "coherent_nec" => JumpVariant::CoherentNec,
        "incoherent" | "incoherent_nec" => JumpVariant::IncoherentNec,
        "majority" | "majority_vote" => JumpVariant::MajorityVote5,
        other => return Err(key_err("variant", format!("unknown jump variant `{other}`"))),
    };
    let mut p = JumpParams::new(gamma, t_max, variant);
    p.sample_dt = r.f64("sample_dt", 1.0)?;
    p.drive = match r.str_opt("drive")?.as_deref().unwrap_or("none") {
        "none" => None,
        "z_field" => Some(Drive::ZField {
            omega: r.f64_req("omega")?,
        }),
        "z_pulse" => Some(Drive::PeriodicZPulse {
            period: r.f64_req("period")?,
            theta: r.f64("theta", std::f64::consts::PI)?,
        }),
        other => return Err(key_err("drive", format!("unknown drive `{other}`"))),
    };
    if let Some(dt) = r.f64_opt("dt")? {
        p.sampling = EventSampling::FixedDt { dt };
    }
    p.validate().map_err(|e| key_err("params", e.to_string()))?;
    Ok(p)
}

/// Builds one experiment point from a flat map without arrays.
pub fn from_flat(map: BTreeMap<String, Value>) -> Result<ExperimentConfig, ConfigError> {
    let mut r = Reader {
        map,
        used: BTreeSet::new(),
    };
    let engine_name = r.str_opt("engine")?.unwrap_or_else(|| "clifford".into());
    let engine: Engine = engine_name.parse().map_err(|e: String| key_err("engine", e))?;
    let lattice = lattice(&mut r)?;
    let master_seed = r.u64_opt("master_seed")?.ok_or_else(|| key_err("master_seed", "required"))?;
    let trajectories = r.usize_req("trajectories")?;
    if trajectories == 0 {
        return Err(key_err("trajectories", "must be positive"));
    }
    let steps = if engine == Engine::Jump {
        r.usize_opt("steps")?.unwrap_or(0)
    } else {
        r.usize_req("steps")?
    };
    let output = r.str_opt("output")?.map(PathBuf::from);
    let plots = r.bool("plots", true)?;
    let init = init_spec(&mut r, engine == Engine::Jump)?;
    let mut observable = Observable::Magnetization;
    let params = match engine {
        Engine::Clifford | Engine::Dense => {
            if engine == Engine::Dense {
                capacity(&lattice, &engine_name)?;
            }
            let p = protocol_params(&mut r, &lattice, steps)?;
            match r.str_opt("observable")?.as_deref().unwrap_or("magnetization") {
                "magnetization" => {}
                "steady_state" if engine == Engine::Clifford => {
                    let (rows, cols) = lattice.dims();
                    observable = Observable::SteadyState {
                        burn_in: r.usize_opt("burn_in")?.unwrap_or(5 * rows.max(cols)),
                        every: r.usize_opt("sample_every")?.unwrap_or(10).max(1),
                        per_trajectory: r.usize_opt("samples_per_trajectory")?.unwrap_or(10).max(1),
                    };
                }
                other => return Err(key_err("observable", format!("`{other}` not available for this engine"))),
            }
            if engine == Engine::Clifford {
                EngineParams::Clifford(p)
            } else {
                EngineParams::Dense(p)
            }
        }
        Engine::ClassicalCA => {
            let mut p = AutomatonParams::nec(
                probability(&mut r, "p_flip")?,
                probability(&mut r, "p_nec")?,
                probability(&mut r, "p_me")?,
                r.bool("sublattice_mode", true)?,
            );
            p.rule = rule(&mut r)?;
            EngineParams::ClassicalCA(p)
        }
        Engine::NonClifford => {
            capacity(&lattice, &engine_name)?;
            let mut p = NonCliffordParams::new(
                lattice.clone(),
                r.f64_req("h")?,
                probability(&mut r, "p_nec")?,
                steps,
                master_seed,
            );
            p.delta_h = r.f64("delta_h", p.delta_h)?;
            p.j = r.f64("j", p.j)?;
            p.delta_j = r.f64("delta_j", p.delta_j)?;
            p.validate().map_err(|e| key_err("params", e.to_string()))?;
            EngineParams::NonClifford(p)
        }
        Engine::Jump => {
            capacity(&lattice, &engine_name)?;
            EngineParams::Jump(jump_params(&mut r)?)
        }
    };
    if !matches!(init, InitSpec::Protocol(Init::AllPlus)) && engine == Engine::NonClifford {
        return Err(key_err("init", "the non-Clifford engine starts from all_plus"));
    }
    let analysis = analysis(&mut r, steps)?;
    r.finish(&engine_name)?;
    Ok(ExperimentConfig {
        engine,
        params,
        lattice,
        steps,
        trajectories,
        master_seed,
        init,
        observable,
        analysis,
        output,
        plots,
    })
}

/// A parsed config file: the swept key if any and one config per point.
#[derive(Debug, Clone)]
pub struct ConfigFile {
    pub sweep: Option<SweepSpec>,
    pub points: Vec<ExperimentConfig>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let flat = parse_flat(text)?;
        let sweep = split_sweep(&flat)?;
        let points = match &sweep {
            None => vec![from_flat(flat)?],
            Some(s) => s
                .values
                .iter()
                .map(|v| {
                    let mut m = flat.clone();
                    m.insert(s.key.clone(), v.clone());
                    from_flat(m).map_err(|e| match e {
                        ConfigError::Key { path, msg } => ConfigError::Key {
                            path,
                            msg: format!("{msg} (at {} = {})", s.key, value_label(v)),
                        },
                        other => other,
                    })
                })
                .collect::<Result<_, _>>()?,
        };
        Ok(ConfigFile { sweep, points })
    }
}

/// Swept value as written in CSV output.
pub fn value_label(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Float(f) => crate::analysis::output::fmt_f64(*f),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = "
engine = \"clifford\"
steps = 10
trajectories = 100
master_seed = 1
p_flip = 0.95
[lattice]
kind = \"square_periodic\"
rows = 4
cols = 4
";

    #[test]
    fn minimal_config_parses() {
        let f = ConfigFile::parse(MIN).unwrap();
        assert!(f.sweep.is_none());
        assert_eq!(f.points[0].lattice.num_sites(), 16);
    }

    #[test]
    fn bad_probability_names_its_key() {
        let e = ConfigFile::parse(&MIN.replace("p_flip = 0.95", "p_flip = 1.5")).unwrap_err();
        assert!(e.to_string().starts_with("p_flip:"), "{e}");
    }

    #[test]
    fn two_swept_keys_are_rejected() {
        let t = MIN.replace("p_flip = 0.95", "p_flip = [0.9, 0.95]\np_nec = [0.5, 0.8]");
        assert!(matches!(ConfigFile::parse(&t), Err(ConfigError::Sweep(_))));
        let t = MIN.replace("rows = 4\ncols = 4", "size = [4, 6]");
        let f = ConfigFile::parse(&t).unwrap();
        assert_eq!(f.points.len(), 2);
        assert_eq!(f.points[1].lattice.num_sites(), 36);
    }

    #[test]
    fn unknown_keys_and_capacity() {
        let e = ConfigFile::parse(&format!("{MIN}\nbogus = 1\n")).unwrap_err();
        assert!(e.to_string().contains("bogus"));
        let t = MIN.replace("\"clifford\"", "\"dense\"").replace("rows = 4\ncols = 4", "rows = 5\ncols = 5");
        let e = ConfigFile::parse(&t).unwrap_err();
        assert!(e.to_string().starts_with("lattice:"), "{e}");
    }
}
