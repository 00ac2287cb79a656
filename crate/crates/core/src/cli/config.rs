//! Flat `key = value` experiment configuration with full error collection.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subcommand {
    DecoupleMc,
    DecoupleExact,
    DesignDelta,
    MomentsLemma5,
    Entropy,
    Prop1,
    AppsMerging,
    AppsTherm,
}

use Subcommand::*;

impl Subcommand {
    pub const ALL: [Subcommand; 8] =
        [DecoupleMc, DecoupleExact, DesignDelta, MomentsLemma5, Entropy, Prop1, AppsMerging, AppsTherm];

    pub fn name(&self) -> &'static str {
        match self {
            DecoupleMc => "decouple-mc",
            DecoupleExact => "decouple-exact",
            DesignDelta => "design-delta",
            MomentsLemma5 => "moments-lemma5",
            Entropy => "entropy",
            Prop1 => "prop1",
            AppsMerging => "apps-merging",
            AppsTherm => "apps-therm",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Subcommand::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown subcommand `{s}`"))
    }
}

/// A typed parameter value.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(u64),
    Real(f64),
    Word(String),
    IntList(Vec<u64>),
    Path(PathBuf),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Real(v) => write!(f, "{v}"),
            Value::Word(v) => f.write_str(v),
            Value::IntList(v) => {
                let parts: Vec<String> = v.iter().map(u64::to_string).collect();
                f.write_str(&parts.join(","))
            }
            Value::Path(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Int {
        min: u64,
        max: u64,
    },
    /// `(lo, hi)` with flags marking open ends.
    Real {
        lo: f64,
        hi: f64,
        lo_open: bool,
        hi_open: bool,
    },
    Word(&'static [&'static str]),
    IntList {
        min: u64,
        max: u64,
    },
    Path,
}

struct KeySpec {
    name: &'static str,
    kind: Kind,
    used_by: &'static [Subcommand],
    help: &'static str,
}

const DECOUPLE: &[Subcommand] = &[DecoupleMc, DecoupleExact];
const STATEFUL: &[Subcommand] = &[DecoupleMc, DecoupleExact, Entropy, AppsMerging, AppsTherm];
const MAX_DIM: u64 = 4096;

pub const STATE_KINDS: &[&str] = &["random_pure", "random_mixed", "maximally_mixed", "prop1", "file"];
pub const CHANNEL_KINDS: &[&str] = &["partial_trace", "identity", "full_trace", "depolarizing"];
pub const ENSEMBLE_KINDS: &[&str] = &["haar", "d_ell", "rqc", "diag_zx_once"];

const fn int(min: u64, max: u64) -> Kind {
    Kind::Int { min, max }
}

const fn closed(lo: f64, hi: f64) -> Kind {
    Kind::Real { lo, hi, lo_open: false, hi_open: false }
}

const fn open_closed(lo: f64, hi: f64) -> Kind {
    Kind::Real { lo, hi, lo_open: true, hi_open: false }
}

const fn open(lo: f64, hi: f64) -> Kind {
    Kind::Real { lo, hi, lo_open: true, hi_open: true }
}

static KEYS: &[KeySpec] = &[
    KeySpec { name: "seed", kind: int(0, u64::MAX), used_by: &[], help: "master seed, default 0" },
    KeySpec { name: "output", kind: Kind::Path, used_by: &[], help: "CSV path, default standard output" },
    KeySpec { name: "instances", kind: int(1, 100_000), used_by: STATEFUL, help: "number of random instances" },
    KeySpec { name: "state", kind: Kind::Word(STATE_KINDS), used_by: STATEFUL, help: "state construction" },
    KeySpec { name: "state_file", kind: Kind::Path, used_by: STATEFUL, help: "matrix text file for state = file" },
    KeySpec {
        name: "dims",
        kind: Kind::IntList { min: 1, max: MAX_DIM },
        used_by: STATEFUL,
        help: "subsystem dimensions",
    },
    KeySpec { name: "rank", kind: int(1, 1 << 24), used_by: STATEFUL, help: "rank of random mixed states" },
    KeySpec {
        name: "d_a",
        kind: int(1, MAX_DIM),
        used_by: &[DecoupleMc, DecoupleExact, AppsMerging],
        help: "dimension of A",
    },
    KeySpec { name: "d_b", kind: int(1, MAX_DIM), used_by: &[AppsMerging], help: "dimension of B" },
    KeySpec {
        name: "d_r",
        kind: int(1, MAX_DIM),
        used_by: &[DecoupleMc, DecoupleExact, AppsMerging, AppsTherm],
        help: "dimension of R",
    },
    KeySpec {
        name: "d1",
        kind: int(1, MAX_DIM),
        used_by: &[DecoupleMc, DecoupleExact, Prop1],
        help: "dimension of A1",
    },
    KeySpec {
        name: "d2",
        kind: int(1, MAX_DIM),
        used_by: &[DecoupleMc, DecoupleExact, Prop1],
        help: "dimension of A2",
    },
    KeySpec { name: "channel", kind: Kind::Word(CHANNEL_KINDS), used_by: DECOUPLE, help: "channel from A to B" },
    KeySpec { name: "d_a1", kind: int(1, MAX_DIM), used_by: DECOUPLE, help: "kept dimension of the partial trace" },
    KeySpec { name: "p", kind: closed(0.0, 1.0), used_by: DECOUPLE, help: "depolarizing probability" },
    KeySpec { name: "ensemble", kind: Kind::Word(ENSEMBLE_KINDS), used_by: &[DecoupleMc], help: "unitary ensemble" },
    KeySpec { name: "length", kind: int(0, 1_000_000), used_by: &[DecoupleMc], help: "gate count of rqc" },
    KeySpec { name: "circuits", kind: Kind::Path, used_by: &[DecoupleMc], help: "where to write sampled circuits" },
    KeySpec {
        name: "ell",
        kind: Kind::IntList { min: 1, max: 64 },
        used_by: &[DecoupleMc, DecoupleExact, DesignDelta, MomentsLemma5, AppsMerging, AppsTherm],
        help: "circuit depth, comma separated list allowed",
    },
    KeySpec { name: "samples", kind: int(2, 100_000_000), used_by: &[DecoupleMc, Prop1], help: "Monte-Carlo draws" },
    KeySpec { name: "n_qubits", kind: int(1, 3), used_by: &[DesignDelta, MomentsLemma5], help: "qubits N" },
    KeySpec { name: "gap_tol", kind: open_closed(0.0, 1e-2), used_by: &[DesignDelta], help: "SDP duality gap" },
    KeySpec { name: "cut", kind: int(1, 64), used_by: &[Entropy], help: "leading subsystems forming A" },
    KeySpec { name: "delta", kind: open(0.0, 1.0), used_by: &[AppsMerging], help: "merging parameter" },
    KeySpec { name: "d_s", kind: int(1, MAX_DIM), used_by: &[AppsTherm], help: "dimension of S" },
    KeySpec { name: "d_e", kind: int(1, MAX_DIM), used_by: &[AppsTherm], help: "dimension of E" },
    KeySpec { name: "eps1", kind: open(0.0, 1.0), used_by: &[AppsTherm], help: "smoothing of H_min(SE|R)" },
    KeySpec { name: "eps2", kind: closed(0.0, 1.0), used_by: &[AppsTherm], help: "smoothing of H_min(E)" },
    KeySpec { name: "eps3", kind: closed(0.0, 1.0), used_by: &[AppsTherm], help: "smoothing of H_max(S)" },
    KeySpec {
        name: "delta_target",
        kind: open_closed(0.0, 2.0),
        used_by: &[AppsTherm],
        help: "thermalisation distance",
    },
];

/// Keys accepted by a subcommand with a short description.
pub fn documented_keys(sub: Subcommand) -> Vec<(&'static str, &'static str)> {
    KEYS.iter().filter(|k| k.used_by.is_empty() || k.used_by.contains(&sub)).map(|k| (k.name, k.help)).collect()
}

/// One configuration problem, with the source line when it came from a file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found in a configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&lines.join("\n"))
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    pub params: BTreeMap<String, Value>,
    pub output: Option<PathBuf>,
}

struct Raw {
    value: String,
    line: Option<usize>,
}

fn err(line: Option<usize>, message: String) -> ConfigError {
    ConfigError { line, message }
}

fn parse_lines(source: &str, entries: &mut BTreeMap<String, Raw>, errors: &mut Vec<ConfigError>) {
    for (idx, text) in source.lines().enumerate() {
        let line = idx + 1;
        let body = text.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            errors.push(err(Some(line), format!("expected `key = value`, found `{body}`")));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            errors.push(err(Some(line), format!("empty key or value in `{body}`")));
            continue;
        }
        if let Some(first) = entries.get(key) {
            errors.push(err(
                Some(line),
                format!("duplicate key `{key}` (first set on line {}, again on line {line})", first.line.unwrap_or(0)),
            ));
            continue;
        }
        entries.insert(key.to_string(), Raw { value: value.to_string(), line: Some(line) });
    }
}

fn parse_value(kind: Kind, key: &str, text: &str) -> Result<Value, String> {
    match kind {
        Kind::Int { min, max } => {
            let v: u64 = text.parse().map_err(|_| format!("`{key}` expects a non-negative integer, got `{text}`"))?;
            if v < min || v > max {
                return Err(format!("`{key}` = {v} is outside [{min}, {max}]"));
            }
            Ok(Value::Int(v))
        }
        Kind::Real { lo, hi, lo_open, hi_open } => {
            let v: f64 = text.parse().map_err(|_| format!("`{key}` expects a real number, got `{text}`"))?;
            let above = if lo_open { v > lo } else { v >= lo };
            let below = if hi_open { v < hi } else { v <= hi };
            if !(above && below) {
                let (l, r) = (if lo_open { '(' } else { '[' }, if hi_open { ')' } else { ']' });
                return Err(format!("`{key}` = {v} is outside {l}{lo}, {hi}{r}"));
            }
            Ok(Value::Real(v))
        }
        Kind::Word(choices) => {
            if choices.contains(&text) {
                Ok(Value::Word(text.to_string()))
            } else {
                Err(format!("`{key}` must be one of {}, got `{text}`", choices.join(", ")))
            }
        }
        Kind::IntList { min, max } => {
            let mut out = Vec::new();
            for part in text.split(',').map(str::trim) {
                let v: u64 =
                    part.parse().map_err(|_| format!("`{key}` expects comma separated integers, got `{part}`"))?;
                if v < min || v > max {
                    return Err(format!("`{key}` entry {v} is outside [{min}, {max}]"));
                }
                out.push(v);
            }
            Ok(Value::IntList(out))
        }
        Kind::Path => Ok(Value::Path(PathBuf::from(text))),
    }
}

fn word<'a>(params: &'a BTreeMap<String, Value>, key: &str, default: &'a str) -> &'a str {
    match params.get(key) {
        Some(Value::Word(w)) => w,
        _ => default,
    }
}

fn int_of(params: &BTreeMap<String, Value>, key: &str) -> Option<u64> {
    match params.get(key) {
        Some(Value::Int(v)) => Some(*v),
        _ => None,
    }
}

fn real_of(params: &BTreeMap<String, Value>, key: &str) -> Option<f64> {
    match params.get(key) {
        Some(Value::Real(v)) => Some(*v),
        _ => None,
    }
}

/// Keys that the chosen options make mandatory.
fn required_keys(sub: Subcommand, params: &BTreeMap<String, Value>) -> Vec<&'static str> {
    let mut req = Vec::new();
    let state_keys =
        |req: &mut Vec<&'static str>, default_dims: &[&'static str]| match word(params, "state", "random_pure") {
            "file" => req.extend(["state_file", "dims"]),
            "prop1" => req.extend(["d1", "d2"]),
            _ => req.extend_from_slice(default_dims),
        };
    match sub {
        DecoupleMc | DecoupleExact => {
            if word(params, "state", "random_pure") == "file" {
                req.push("d_a");
            }
            state_keys(&mut req, &["d_a", "d_r"]);
            let prop1 = word(params, "state", "random_pure") == "prop1";
            match word(params, "channel", "partial_trace") {
                "partial_trace" if !prop1 => req.push("d_a1"),
                "depolarizing" => req.push("p"),
                _ => {}
            }
            if sub == DecoupleExact {
                req.push("ell");
            } else {
                req.push("samples");
                match word(params, "ensemble", "d_ell") {
                    "d_ell" => req.push("ell"),
                    "rqc" => req.push("length"),
                    _ => {}
                }
            }
        }
        DesignDelta | MomentsLemma5 => req.extend(["n_qubits", "ell"]),
        Entropy => state_keys(&mut req, &["dims"]),
        Prop1 => req.extend(["d1", "d2", "samples"]),
        AppsMerging => {
            state_keys(&mut req, &["d_a", "d_b", "d_r"]);
            req.extend(["ell", "delta"]);
        }
        AppsTherm => {
            state_keys(&mut req, &["d_r"]);
            req.extend(["d_s", "d_e", "ell", "eps1", "eps2", "eps3", "delta_target"]);
        }
    }
    req.dedup();
    req
}

/// Constraints that involve more than one key.
fn cross_checks(sub: Subcommand, params: &BTreeMap<String, Value>) -> Vec<String> {
    let mut out = Vec::new();
    let state = word(params, "state", "random_pure");
    let allowed: &[&str] = match sub {
        DecoupleMc | DecoupleExact => STATE_KINDS,
        Entropy | AppsTherm => &["random_pure", "random_mixed", "maximally_mixed", "file"],
        AppsMerging => &["random_pure", "file"],
        _ => STATE_KINDS,
    };
    if !allowed.contains(&state) {
        out.push(format!("state `{state}` is not available for {sub}"));
    }
    if sub == DesignDelta && int_of(params, "n_qubits").is_some_and(|n| n > 2) {
        out.push("design-delta supports n_qubits <= 2".into());
    }
    if let (Some(d_a), Some(d_a1)) = (int_of(params, "d_a"), int_of(params, "d_a1")) {
        if d_a % d_a1 != 0 {
            out.push(format!("d_a1 = {d_a1} does not divide d_a = {d_a}"));
        }
    }
    if sub == AppsTherm {
        if let (Some(e1), Some(e2), Some(e3)) =
            (real_of(params, "eps1"), real_of(params, "eps2"), real_of(params, "eps3"))
        {
            if e1 <= e2 + e3 {
                out.push(format!("eps1 = {e1} must exceed eps2 + eps3 = {}", e2 + e3));
            }
        }
    }
    if let Some(Value::IntList(dims)) = params.get("dims") {
        if sub == Entropy && int_of(params, "cut").unwrap_or(1) as usize > dims.len() {
            out.push(format!("cut exceeds the {} subsystems in dims", dims.len()));
        }
    }
    out
}

fn validate(entries: BTreeMap<String, Raw>, mut errors: Vec<ConfigError>) -> Result<ExperimentConfig, ConfigErrors> {
    let subcommand = match entries.get("subcommand") {
        None => {
            errors.push(err(None, "missing key `subcommand`".into()));
            None
        }
        Some(raw) => match raw.value.parse::<Subcommand>() {
            Ok(s) => Some(s),
            Err(e) => {
                errors.push(err(raw.line, e));
                None
            }
        },
    };
    let mut params = BTreeMap::new();
    for (key, raw) in &entries {
        if key == "subcommand" {
            continue;
        }
        let Some(spec) = KEYS.iter().find(|k| k.name == key) else {
            errors.push(err(raw.line, format!("unknown key `{key}`")));
            continue;
        };
        if let Some(sub) = subcommand {
            if !spec.used_by.is_empty() && !spec.used_by.contains(&sub) {
                errors.push(err(raw.line, format!("key `{key}` is not used by {sub}")));
                continue;
            }
        }
        match parse_value(spec.kind, key, &raw.value) {
            Ok(v) => {
                params.insert(key.clone(), v);
            }
            Err(m) => errors.push(err(raw.line, m)),
        }
    }
    let Some(subcommand) = subcommand else {
        errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        return Err(ConfigErrors(errors));
    };
    for key in required_keys(subcommand, &params) {
        if !entries.contains_key(key) {
            errors.push(err(None, format!("{subcommand} needs key `{key}`")));
        }
    }
    errors.extend(cross_checks(subcommand, &params).into_iter().map(|m| err(None, m)));
    if !errors.is_empty() {
        errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        return Err(ConfigErrors(errors));
    }
    let output = match params.remove("output") {
        Some(Value::Path(p)) => Some(p),
        _ => None,
    };
    Ok(ExperimentConfig { subcommand, params, output })
}

/// Parses configuration text, reporting every error found.
pub fn parse_config(source: &str) -> Result<ExperimentConfig, ConfigErrors> {
    parse_with_overrides(source, &[])
}

/// Parses configuration text and then applies `key=value` overrides.
pub fn parse_with_overrides(source: &str, overrides: &[String]) -> Result<ExperimentConfig, ConfigErrors> {
    let mut entries = BTreeMap::new();
    let mut errors = Vec::new();
    parse_lines(source, &mut entries, &mut errors);
    for item in overrides {
        match item.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() && !v.trim().is_empty() => {
                entries.insert(k.trim().to_string(), Raw { value: v.trim().to_string(), line: None });
            }
            _ => errors.push(err(None, format!("override `{item}` is not of the form key=value"))),
        }
    }
    validate(entries, errors)
}

impl ExperimentConfig {
    pub fn seed(&self) -> u64 {
        self.int("seed").unwrap_or(0)
    }

    pub fn int(&self, key: &str) -> Option<u64> {
        int_of(&self.params, key)
    }

    pub fn usize(&self, key: &str) -> Option<usize> {
        self.int(key).map(|v| v as usize)
    }

    pub fn real(&self, key: &str) -> Option<f64> {
        real_of(&self.params, key)
    }

    pub fn word(&self, key: &str, default: &'static str) -> &str {
        word(&self.params, key, default)
    }

    pub fn list(&self, key: &str) -> Option<Vec<usize>> {
        match self.params.get(key) {
            Some(Value::IntList(v)) => Some(v.iter().map(|&x| x as usize).collect()),
            _ => None,
        }
    }

    pub fn path(&self, key: &str) -> Option<&PathBuf> {
        match self.params.get(key) {
            Some(Value::Path(p)) => Some(p),
            _ => None,
        }
    }

    /// Renders the configuration back to parseable text.
    pub fn to_text(&self) -> String {
        let mut s = format!("subcommand = {}\n", self.subcommand);
        for (k, v) in &self.params {
            s.push_str(&format!("{k} = {v}\n"));
        }
        if let Some(p) = &self.output {
            s.push_str(&format!("output = {}\n", p.display()));
        }
        s
    }
}
