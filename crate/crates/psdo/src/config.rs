//! Run configuration: a JSON document validated against `schema/config.schema.json`.

use std::path::{Path, PathBuf};

use psdo_core::geometry::{Base, BoundaryMode, ConeSpec, Geometry, Kind};
use psdo_core::symbols::{ConeSymbolFamily, InteriorSymbol, SymbolTuple};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// The published schema, embedded for `--help` style introspection and tests.
pub const SCHEMA: &str = include_str!("../schema/config.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Circle,
    Cone,
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Interval,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    Point,
    Circle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub kind: GeometryKind,
    /// Nodes along the circle or edge axis.
    #[serde(default = "default_n")]
    pub n_x: usize,
    /// Nodes along the cone axis `t = -log r`.
    #[serde(default = "default_n")]
    pub n_t: usize,
    /// Grid step along `t`; the half-width is `n_t * step / 2`.
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_base")]
    pub base: BaseKind,
    #[serde(default = "default_n")]
    pub n_omega: usize,
    #[serde(default = "default_q")]
    pub q: usize,
}

fn default_n() -> usize {
    64
}
fn default_step() -> f64 {
    0.3
}
fn default_mode() -> Mode {
    Mode::Interval
}
fn default_base() -> BaseKind {
    BaseKind::Point
}
fn default_q() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolConfig {
    /// Main-stratum symbol on a circle, in `(x, xi, v)`.
    #[serde(default)]
    pub interior: Option<String>,
    /// Generating family on a cone or edge, in `(x, r, w, eta, p, omega)`.
    #[serde(default)]
    pub family: Option<String>,
    /// Main-stratum symbol of the tuple; the principal part of `family` when absent.
    #[serde(default)]
    pub sigma0: Option<String>,
    #[serde(default = "default_r0")]
    pub r0: f64,
}

fn default_r0() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    /// Quantization of the configured symbols.
    Symbol,
    /// `e^{ix}` on nonnegative modes and `1` on negative modes.
    Toeplitz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "tol_rank")]
    pub rank: f64,
    #[serde(default = "tol_floor")]
    pub elliptic_floor: f64,
    #[serde(default = "tol_compat")]
    pub compat: f64,
    #[serde(default = "tol_gap")]
    pub gap_ratio: f64,
    /// Admissible quantize/extract mismatch.
    #[serde(default = "tol_roundtrip")]
    pub roundtrip: f64,
}

fn tol_rank() -> f64 {
    1e-6
}
fn tol_floor() -> f64 {
    1e-6
}
fn tol_compat() -> f64 {
    1e-8
}
fn tol_gap() -> f64 {
    100.0
}
fn tol_roundtrip() -> f64 {
    1e-10
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: tol_rank(),
            elliptic_floor: tol_floor(),
            compat: tol_compat(),
            gap_ratio: tol_gap(),
            roundtrip: tol_roundtrip(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "scan_p_max")]
    pub p_max: f64,
    #[serde(default = "scan_n_p")]
    pub n_p: usize,
    /// Refinement ladder of the finite-section method.
    #[serde(default = "scan_sizes")]
    pub sizes: Vec<usize>,
}

fn scan_p_max() -> f64 {
    64.0
}
fn scan_n_p() -> usize {
    513
}
fn scan_sizes() -> Vec<usize> {
    vec![128, 256]
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { p_max: scan_p_max(), n_p: scan_n_p(), sizes: scan_sizes() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "out_dir")]
    pub dir: PathBuf,
}

fn out_dir() -> PathBuf {
    PathBuf::from("psdo-out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: out_dir() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    #[serde(default = "default_symbols")]
    pub symbols: SymbolConfig,
    #[serde(default = "default_operator")]
    pub operator: OperatorKind,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Parameter value used by `quantize`.
    #[serde(default)]
    pub parameter: f64,
    /// Parameter samples for large-parameter scans.
    #[serde(default = "default_ladder")]
    pub parameter_ladder: Vec<f64>,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_symbols() -> SymbolConfig {
    SymbolConfig { interior: None, family: None, sigma0: None, r0: 1.0 }
}
fn default_operator() -> OperatorKind {
    OperatorKind::Symbol
}
fn default_ladder() -> Vec<f64> {
    vec![8.0, 16.0, 32.0, 64.0]
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            geometry: GeometryConfig {
                kind: GeometryKind::Circle,
                n_x: default_n(),
                n_t: default_n(),
                step: default_step(),
                mode: default_mode(),
                base: default_base(),
                n_omega: default_n(),
                q: default_q(),
            },
            symbols: default_symbols(),
            operator: default_operator(),
            tolerances: Tolerances::default(),
            parameter: 0.0,
            parameter_ladder: default_ladder(),
            scan: ScanConfig::default(),
            output: OutputConfig::default(),
            seed: 0,
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| config_err(format!("line {} column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        for (name, v) in [
            ("rank", t.rank),
            ("elliptic_floor", t.elliptic_floor),
            ("compat", t.compat),
            ("gap_ratio", t.gap_ratio),
            ("roundtrip", t.roundtrip),
            ("step", self.geometry.step),
            ("r0", self.symbols.r0),
            ("p_max", self.scan.p_max),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(format!("`{name}` must be positive, got {v}")));
            }
        }
        if self.scan.n_p < 2 {
            return Err(config_err("`n_p` must be at least 2"));
        }
        if !self.parameter.is_finite() || self.parameter_ladder.iter().any(|v| !v.is_finite()) {
            return Err(config_err("parameters must be finite"));
        }
        if self.scan.sizes.iter().any(|n| *n < 8 || n % 2 != 0) {
            return Err(config_err("refinement sizes must be even and at least 8"));
        }
        self.geometry().map_err(|e| config_err(e.to_string()))?;
        let s = &self.symbols;
        match (self.geometry.kind, self.operator) {
            (GeometryKind::Circle, OperatorKind::Symbol) if s.interior.is_none() => {
                Err(config_err("a circle geometry needs `symbols.interior`"))
            }
            (GeometryKind::Cone | GeometryKind::Edge, OperatorKind::Symbol) if s.family.is_none() => {
                Err(config_err("cone and edge geometries need `symbols.family`"))
            }
            (GeometryKind::Cone | GeometryKind::Edge, OperatorKind::Toeplitz) => {
                Err(config_err("the toeplitz operator lives on a circle geometry"))
            }
            _ => Ok(()),
        }
    }

    /// Geometry of the configured size.
    pub fn geometry(&self) -> psdo_core::Result<Geometry> {
        self.geometry_sized(None)
    }

    /// Geometry with the main axis resized to `n` at the configured step.
    pub fn geometry_sized(&self, n: Option<usize>) -> psdo_core::Result<Geometry> {
        let g = &self.geometry;
        let cone = |n_t: usize| {
            let base = match g.base {
                BaseKind::Point => Base::Point,
                BaseKind::Circle => Base::Circle(g.n_omega),
            };
            let mode = match g.mode {
                Mode::Interval => BoundaryMode::Interval,
                Mode::Periodic => BoundaryMode::Periodic,
            };
            ConeSpec::new(base, n_t as f64 * g.step / 2.0, n_t, mode)
        };
        let kind = match g.kind {
            GeometryKind::Circle => Kind::Circle { n: n.unwrap_or(g.n_x) },
            GeometryKind::Cone => Kind::Cone(cone(n.unwrap_or(g.n_t))),
            GeometryKind::Edge => Kind::Edge { n_x: g.n_x, cone: cone(n.unwrap_or(g.n_t)) },
        };
        Geometry::build(kind, g.q)
    }

    fn base(&self) -> Base {
        match self.geometry.base {
            BaseKind::Point => Base::Point,
            BaseKind::Circle => Base::Circle(self.geometry.n_omega),
        }
    }

    pub fn interior(&self) -> Result<InteriorSymbol, CliError> {
        let src = self.symbols.interior.as_deref().ok_or_else(|| config_err("missing `symbols.interior`"))?;
        Ok(InteriorSymbol::circle(src, self.geometry.q, self.symbols.r0)?)
    }

    pub fn family(&self) -> Result<ConeSymbolFamily, CliError> {
        let src = self.symbols.family.as_deref().ok_or_else(|| config_err("missing `symbols.family`"))?;
        Ok(ConeSymbolFamily::parse(src, self.geometry.q, self.base())?)
    }

    pub fn tuple(&self) -> Result<SymbolTuple, CliError> {
        let fam = self.family()?;
        let mut t = SymbolTuple::from_family(&fam);
        if let Some(src) = &self.symbols.sigma0 {
            t.sigma0 = InteriorSymbol::cone(src, self.geometry.q, self.symbols.r0)?;
        } else {
            t.sigma0.r0 = self.symbols.r0;
        }
        t.tol = self.tolerances.compat;
        Ok(t)
    }

    /// SHA-256 of the canonical serialization, independent of whitespace, key
    /// order and the output location.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("output");
        }
        let canon = serde_json::to_vec(&v).expect("value serializes");
        Sha256::digest(&canon).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_json(r#"{"geometry":{"kind":"circle"},"symbols":{"interior":"chi(xi)"}}"#).unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.tolerances, Tolerances::default());
        assert_eq!(c.scan.sizes, vec![128, 256]);
    }

    #[test]
    fn unknown_fields_and_bad_tolerances_are_rejected() {
        assert!(RunConfig::from_json(r#"{"geometry":{"kind":"circle","colour":1}}"#).is_err());
        let e = RunConfig::from_json(
            r#"{"geometry":{"kind":"circle"},"symbols":{"interior":"1"},"tolerances":{"rank":-1}}"#,
        );
        assert!(matches!(e, Err(CliError::Config(_))));
        assert!(RunConfig::from_json(r#"{"geometry":{"kind":"cone"}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"geometry":{"kind":"circle","n_x":7},"operator":"toeplitz"}"#).is_err());
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = RunConfig::from_json(r#"{"geometry":{"kind":"circle"},"symbols":{"interior":"1"}}"#).unwrap();
        let b = RunConfig::from_json("{ \"symbols\" : {\"interior\":\"1\"},\n \"geometry\": {\"kind\": \"circle\"} }").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let mut c = a.clone();
        c.output.dir = "elsewhere".into();
        assert_eq!(a.hash(), c.hash());
        c.seed = 1;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn schema_is_valid_json() {
        let v: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
        assert_eq!(v["required"][0], "geometry");
    }

    #[test]
    fn tuple_defaults_to_principal_part() {
        let c = RunConfig::from_json(
            r#"{"geometry":{"kind":"cone"},"symbols":{"family":"(p-(0,1))/(p+(0,1))"}}"#,
        )
        .unwrap();
        let t = c.tuple().unwrap();
        assert!(psdo_core::symbols::compat_check(&t).unwrap().pass);
    }
}
