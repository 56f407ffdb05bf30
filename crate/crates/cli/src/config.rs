//! Flat `key = value` run configuration.
//!
//! Keys carry one of the prefixes `game.`, `mirror.`, `schedule.` or `run.`.
//! Blank lines and lines starting with `#` are ignored. `parse_config`
//! reports every problem it finds, and `print_config` emits a canonical
//! form that parses back to the same value.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use bandit_omd::bench::LseParams;
use bandit_omd::{DeltaSchedule, SampleSchedule};

/// All problems found in a config text.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("invalid config: {}", .0.join("; "))]
pub struct ConfigError(pub Vec<String>);

#[derive(Clone, Debug, PartialEq)]
pub enum GameSpec {
    Rps,
    Lse(LseParams),
    /// An exported LSE instance file.
    File(PathBuf),
}

impl GameSpec {
    fn kind(&self) -> &'static str {
        match self {
            GameSpec::Rps => "rps",
            GameSpec::Lse(_) => "lse",
            GameSpec::File(_) => "file",
        }
    }

    fn uses_simplex(&self) -> bool {
        matches!(self, GameSpec::Rps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MirrorChoice {
    Entropy,
    Euclidean,
}

impl MirrorChoice {
    fn name(self) -> &'static str {
        match self {
            MirrorChoice::Entropy => "entropy",
            MirrorChoice::Euclidean => "euclidean",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub game: GameSpec,
    /// One entry applies to every player; otherwise one per player.
    pub mirrors: Vec<MirrorChoice>,
    /// Strong-convexity modulus of the Euclidean blocks.
    pub mirror_modulus: f64,
    pub tau: f64,
    pub delta: DeltaSchedule,
    pub samples: SampleSchedule,
    pub non_convergent: bool,
    pub horizon: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub query_cap: Option<u64>,
    pub override_step_guard: bool,
    pub lipschitz: Option<f64>,
    pub x0: Option<Vec<f64>>,
}

const PLAYERS_BUILTIN: usize = 2;

const KNOWN_KEYS: &[&str] = &[
    "game.kind",
    "game.lse.n_features",
    "game.lse.m_samples",
    "game.lse.w_bound",
    "game.lse.lambda_bound",
    "game.lse.noise_halfwidth",
    "game.lse.seed",
    "game.file.path",
    "mirror.kind",
    "mirror.modulus",
    "schedule.tau",
    "schedule.delta.c",
    "schedule.delta.a",
    "schedule.delta.e",
    "schedule.samples.kind",
    "schedule.samples.c",
    "schedule.samples.a",
    "schedule.samples.e",
    "schedule.samples.floor",
    "schedule.samples.value",
    "schedule.non_convergent",
    "run.horizon",
    "run.seed",
    "run.output",
    "run.query_cap",
    "run.override_step_guard",
    "run.lipschitz",
    "run.x0",
];

const ALWAYS_REQUIRED: &[&str] = &[
    "game.kind",
    "mirror.kind",
    "schedule.tau",
    "schedule.delta.c",
    "schedule.delta.a",
    "schedule.delta.e",
    "schedule.samples.kind",
    "run.horizon",
    "run.seed",
    "run.output",
];

const LSE_KEYS: &[&str] = &[
    "game.lse.n_features",
    "game.lse.m_samples",
    "game.lse.w_bound",
    "game.lse.lambda_bound",
    "game.lse.noise_halfwidth",
    "game.lse.seed",
];

/// Reads keys out of the raw map, recording every failure.
struct Reader {
    map: BTreeMap<String, String>,
    errors: Vec<String>,
}

impl Reader {
    fn raw(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn required<T: std::str::FromStr>(&mut self, key: &str) -> Option<T> {
        match self.raw(key) {
            Some(v) => self.convert(key, &v),
            None => {
                self.errors.push(format!("missing required key '{key}'"));
                None
            }
        }
    }

    fn optional<T: std::str::FromStr>(&mut self, key: &str) -> Option<T> {
        let v = self.raw(key)?;
        self.convert(key, &v)
    }

    fn flag(&mut self, key: &str) -> bool {
        self.optional::<bool>(key).unwrap_or(false)
    }

    fn convert<T: std::str::FromStr>(&mut self, key: &str, v: &str) -> Option<T> {
        match v.parse() {
            Ok(t) => Some(t),
            Err(_) => {
                self.errors.push(format!("key '{key}': cannot parse value '{v}'"));
                None
            }
        }
    }

    /// Rejects keys that do not apply to the chosen variant.
    fn reject(&mut self, keys: &[&str], why: &str) {
        for k in keys {
            if self.map.remove(*k).is_some() {
                self.errors.push(format!("key '{k}' does not apply when {why}"));
            }
        }
    }
}

fn split_lines(text: &str, errors: &mut Vec<String>) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errors.push(format!("line {}: expected 'key = value'", no + 1));
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if !KNOWN_KEYS.contains(&k) {
            errors.push(format!("line {}: unknown key '{k}'", no + 1));
            continue;
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            errors.push(format!("line {}: duplicate key '{k}'", no + 1));
        }
    }
    map
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut errors = Vec::new();
    let map = split_lines(text, &mut errors);
    let missing: Vec<&str> = ALWAYS_REQUIRED
        .iter()
        .copied()
        .filter(|k| !map.contains_key(*k))
        .collect();
    let mut r = Reader { map, errors };
    if !missing.is_empty() {
        r.errors.push(format!("missing required keys: {}", missing.join(", ")));
    }

    let game = match r.raw("game.kind").as_deref() {
        Some("rps") => {
            r.reject(LSE_KEYS, "game.kind = rps");
            r.reject(&["game.file.path"], "game.kind = rps");
            Some(GameSpec::Rps)
        }
        Some("lse") => {
            r.reject(&["game.file.path"], "game.kind = lse");
            let n = r.required("game.lse.n_features");
            let m = r.required("game.lse.m_samples");
            let w = r.required("game.lse.w_bound");
            let l = r.required("game.lse.lambda_bound");
            let h = r.required("game.lse.noise_halfwidth");
            let s = r.required("game.lse.seed");
            match (n, m, w, l, h, s) {
                (Some(n_features), Some(m_samples), Some(w_bound), Some(lambda_bound), Some(noise_halfwidth), Some(seed)) => {
                    check_lse(&mut r.errors, n_features, m_samples, w_bound, lambda_bound, noise_halfwidth);
                    Some(GameSpec::Lse(LseParams {
                        n_features,
                        m_samples,
                        w_bound,
                        lambda_bound,
                        noise_halfwidth,
                        seed,
                    }))
                }
                _ => None,
            }
        }
        Some("file") => {
            r.reject(LSE_KEYS, "game.kind = file");
            r.required::<String>("game.file.path").map(|p| GameSpec::File(PathBuf::from(p)))
        }
        Some(other) => {
            r.errors.push(format!("game.kind must be rps, lse or file, got '{other}'"));
            None
        }
        None => None,
    };

    let mirrors = r.raw("mirror.kind").and_then(|v| {
        let mut out = Vec::new();
        for part in v.split(',').map(str::trim) {
            match part {
                "entropy" => out.push(MirrorChoice::Entropy),
                "euclidean" => out.push(MirrorChoice::Euclidean),
                _ => {
                    r.errors.push(format!("mirror.kind entries must be entropy or euclidean, got '{part}'"));
                    return None;
                }
            }
        }
        Some(out)
    });
    let mirror_modulus: f64 = r.optional("mirror.modulus").unwrap_or(1.0);
    if !(mirror_modulus.is_finite() && mirror_modulus > 0.0) {
        r.errors.push(format!("mirror.modulus must be positive, got {mirror_modulus}"));
    }
    if let (Some(g), Some(ms)) = (&game, &mirrors) {
        if !matches!(g, GameSpec::File(_)) && ms.len() != 1 && ms.len() != PLAYERS_BUILTIN {
            r.errors.push(format!(
                "mirror.kind lists {} entries; give one, or one per player ({PLAYERS_BUILTIN})",
                ms.len()
            ));
        }
        let entropy = ms.contains(&MirrorChoice::Entropy);
        let euclid = ms.contains(&MirrorChoice::Euclidean);
        if entropy && !g.uses_simplex() {
            r.errors.push(format!("the entropy mirror needs simplex sets; game.kind = {} uses boxes", g.kind()));
        }
        if euclid && g.uses_simplex() {
            r.errors.push("game.kind = rps is played on transformed simplices; use the entropy mirror".into());
        }
    }

    let non_convergent = r.flag("schedule.non_convergent");
    let tau: Option<f64> = r.optional("schedule.tau");
    if let Some(t) = tau {
        if !(t.is_finite() && t > 0.0) {
            r.errors.push(format!("schedule.tau must be positive, got {t}"));
        }
    }
    let delta = match (
        r.optional::<f64>("schedule.delta.c"),
        r.optional::<f64>("schedule.delta.a"),
        r.optional::<f64>("schedule.delta.e"),
    ) {
        (Some(c), Some(a), Some(e)) => {
            if !(c.is_finite() && c > 0.0) {
                r.errors.push(format!("schedule.delta.c must be positive, got {c}"));
            }
            if !(a.is_finite() && a > -1.0) {
                r.errors.push(format!("schedule.delta.a must exceed -1, got {a}"));
            }
            if !(e > 1.0) {
                r.errors.push(format!(
                    "schedule.delta.e = {e}: the query radii must be summable, which needs an exponent > 1"
                ));
            }
            Some(DeltaSchedule::Power { c, a, e })
        }
        _ => None,
    };

    let samples = parse_samples(&mut r, non_convergent);

    let horizon = r.optional("run.horizon");
    let seed = r.optional("run.seed");
    let output = r.optional::<String>("run.output").map(PathBuf::from);
    let query_cap: Option<u64> = r.optional("run.query_cap");
    if query_cap == Some(0) {
        r.errors.push("run.query_cap must be at least 1".into());
    }
    let override_step_guard = r.flag("run.override_step_guard");
    let lipschitz: Option<f64> = r.optional("run.lipschitz");
    if let Some(l) = lipschitz {
        if !(l.is_finite() && l > 0.0) {
            r.errors.push(format!("run.lipschitz must be positive, got {l}"));
        }
    }
    let x0 = r.raw("run.x0").and_then(|v| {
        let parsed: Result<Vec<f64>, _> = v.split(',').map(|p| p.trim().parse::<f64>()).collect();
        match parsed {
            Ok(x) if !x.is_empty() && x.iter().all(|c| c.is_finite()) => Some(x),
            _ => {
                r.errors.push(format!("run.x0 must be a comma-separated list of finite numbers, got '{v}'"));
                None
            }
        }
    });

    for k in r.map.keys() {
        r.errors.push(format!("key '{k}' was not consumed"));
    }
    if !r.errors.is_empty() {
        return Err(ConfigError(r.errors));
    }
    match (game, mirrors, tau, delta, samples, horizon, seed, output) {
        (Some(game), Some(mirrors), Some(tau), Some(delta), Some(samples), Some(horizon), Some(seed), Some(output)) => {
            Ok(RunConfig {
                game,
                mirrors,
                mirror_modulus,
                tau,
                delta,
                samples,
                non_convergent,
                horizon,
                seed,
                output,
                query_cap,
                override_step_guard,
                lipschitz,
                x0,
            })
        }
        _ => Err(ConfigError(vec!["incomplete config".into()])),
    }
}

fn check_lse(errors: &mut Vec<String>, n: usize, m: usize, w: f64, l: f64, h: f64) {
    if n == 0 || m == 0 {
        errors.push("game.lse.n_features and game.lse.m_samples must be at least 1".into());
    }
    for (k, v) in [("game.lse.w_bound", w), ("game.lse.lambda_bound", l)] {
        if !(v.is_finite() && v > 0.0) {
            errors.push(format!("{k} must be positive, got {v}"));
        }
    }
    if !(h.is_finite() && h >= 0.0) {
        errors.push(format!("game.lse.noise_halfwidth must be nonnegative, got {h}"));
    }
}

fn parse_samples(r: &mut Reader, non_convergent: bool) -> Option<SampleSchedule> {
    const POWER: [&str; 3] = ["schedule.samples.c", "schedule.samples.e", "schedule.samples.floor"];
    const DECAY: [&str; 3] = ["schedule.samples.c", "schedule.samples.a", "schedule.samples.e"];
    let kind = r.raw("schedule.samples.kind")?;
    let ablation = "sum of 1/T_k must be finite; set schedule.non_convergent = true for ablation runs";
    match kind.as_str() {
        "power" => {
            r.reject(&["schedule.samples.a", "schedule.samples.value"], "schedule.samples.kind = power");
            let [c, e, floor] = POWER.map(|k| r.required::<f64>(k));
            let (c, e, floor) = (c?, e?, floor?);
            if !(c >= 0.0 && c.is_finite() && floor.is_finite()) {
                r.errors.push("schedule.samples.c must be nonnegative and floor finite".into());
            }
            let s = SampleSchedule::Power { c, e, floor };
            if !s.is_summable() && !non_convergent {
                r.errors.push(format!("schedule.samples (c = {c}, e = {e}): {ablation}"));
            }
            if s.at(1) == 0 {
                r.errors.push("schedule.samples yields T_1 < 1".into());
            }
            Some(s)
        }
        "constant" => {
            r.reject(&["schedule.samples.c", "schedule.samples.a", "schedule.samples.e", "schedule.samples.floor"], "schedule.samples.kind = constant");
            let t: usize = r.required("schedule.samples.value")?;
            if t == 0 {
                r.errors.push("schedule.samples.value must be at least 1".into());
            }
            if !non_convergent {
                r.errors.push(format!("constant T_k = {t}: {ablation}"));
            }
            Some(SampleSchedule::Constant(t))
        }
        "decaying" => {
            r.reject(&["schedule.samples.floor", "schedule.samples.value"], "schedule.samples.kind = decaying");
            let [c, a, e] = DECAY.map(|k| r.required::<f64>(k));
            let s = SampleSchedule::Decaying { c: c?, a: a?, e: e? };
            if !non_convergent {
                r.errors.push(format!("decaying T_k: {ablation}"));
            }
            Some(s)
        }
        other => {
            r.errors.push(format!("schedule.samples.kind must be power, constant or decaying, got '{other}'"));
            None
        }
    }
}

/// Canonical text form; `parse_config(&print_config(c)) == Ok(c)`.
pub fn print_config(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    put("game.kind", cfg.game.kind().into());
    match &cfg.game {
        GameSpec::Rps => {}
        GameSpec::Lse(p) => {
            put("game.lse.n_features", p.n_features.to_string());
            put("game.lse.m_samples", p.m_samples.to_string());
            put("game.lse.w_bound", p.w_bound.to_string());
            put("game.lse.lambda_bound", p.lambda_bound.to_string());
            put("game.lse.noise_halfwidth", p.noise_halfwidth.to_string());
            put("game.lse.seed", p.seed.to_string());
        }
        GameSpec::File(path) => put("game.file.path", path.display().to_string()),
    }
    put(
        "mirror.kind",
        cfg.mirrors.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
    );
    put("mirror.modulus", cfg.mirror_modulus.to_string());
    for (k, v) in schedule_echo(cfg) {
        put(&k, v);
    }
    put("run.horizon", cfg.horizon.to_string());
    put("run.seed", cfg.seed.to_string());
    put("run.output", cfg.output.display().to_string());
    if let Some(q) = cfg.query_cap {
        put("run.query_cap", q.to_string());
    }
    put("run.override_step_guard", cfg.override_step_guard.to_string());
    if let Some(l) = cfg.lipschitz {
        put("run.lipschitz", l.to_string());
    }
    if let Some(x) = &cfg.x0 {
        put("run.x0", x.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
    }
    s
}

/// The `schedule.*` entries in canonical order.
pub fn schedule_echo(cfg: &RunConfig) -> Vec<(String, String)> {
    let mut out = vec![("schedule.tau".to_string(), cfg.tau.to_string())];
    if let DeltaSchedule::Power { c, a, e } = cfg.delta {
        out.push(("schedule.delta.c".into(), c.to_string()));
        out.push(("schedule.delta.a".into(), a.to_string()));
        out.push(("schedule.delta.e".into(), e.to_string()));
    }
    match cfg.samples {
        SampleSchedule::Power { c, e, floor } => {
            out.push(("schedule.samples.kind".into(), "power".into()));
            out.push(("schedule.samples.c".into(), c.to_string()));
            out.push(("schedule.samples.e".into(), e.to_string()));
            out.push(("schedule.samples.floor".into(), floor.to_string()));
        }
        SampleSchedule::Constant(t) => {
            out.push(("schedule.samples.kind".into(), "constant".into()));
            out.push(("schedule.samples.value".into(), t.to_string()));
        }
        SampleSchedule::Decaying { c, a, e } => {
            out.push(("schedule.samples.kind".into(), "decaying".into()));
            out.push(("schedule.samples.c".into(), c.to_string()));
            out.push(("schedule.samples.a".into(), a.to_string()));
            out.push(("schedule.samples.e".into(), e.to_string()));
        }
    }
    out.push(("schedule.non_convergent".into(), cfg.non_convergent.to_string()));
    out
}
