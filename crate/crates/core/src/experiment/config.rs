//! JSON experiment description. Missing keys take defaults, unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::forward::{Coupling, NoiseSpec, SnrReference};
use crate::gamp::{Denoiser, GampConfig, PriorParams, DEFAULT_DAMPING};
use crate::geometry::{Point2, Rect};
use crate::propagation::{AntennaArray, CarrierSet, GainModel, SPEED_OF_LIGHT};
use crate::quadrature::QuadratureSpec;
use crate::scene::{PixelGrid, TargetShape};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoiConfig {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "W")]
    pub width: f64,
    #[serde(default)]
    pub origin: Point2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PixelConfig {
    pub l_s: f64,
    pub w_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

/// Uniform line of antennas parallel to one ROI side, `standoff` meters outside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearArray {
    pub side: Side,
    pub count: usize,
    pub standoff: f64,
}

impl LinearArray {
    pub fn positions(&self, roi: &Rect) -> Vec<Point2> {
        let n = self.count as f64;
        (0..self.count)
            .map(|i| {
                let f = (i as f64 + 0.5) / n;
                match self.side {
                    Side::Left => Point2::new(roi.x_min() - self.standoff, roi.y_min() + f * roi.width),
                    Side::Right => Point2::new(roi.x_max() + self.standoff, roi.y_min() + f * roi.width),
                    Side::Bottom => Point2::new(roi.x_min() + f * roi.length, roi.y_min() - self.standoff),
                    Side::Top => Point2::new(roi.x_min() + f * roi.length, roi.y_max() + self.standoff),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AntennaSpec {
    List(Vec<Point2>),
    Linear(LinearArray),
}

impl AntennaSpec {
    pub fn positions(&self, roi: &Rect) -> Vec<Point2> {
        match self {
            AntennaSpec::List(p) => p.clone(),
            AntennaSpec::Linear(l) => l.positions(roi),
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        match self {
            AntennaSpec::List(p) => AntennaSpec::List(p.iter().map(|q| Point2::new(q.x * factor, q.y * factor)).collect()),
            AntennaSpec::Linear(l) => AntennaSpec::Linear(LinearArray { standoff: l.standoff * factor, ..*l }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AntennaConfig {
    pub tx: AntennaSpec,
    pub rx: AntennaSpec,
}

impl Default for AntennaConfig {
    fn default() -> Self {
        Self {
            tx: AntennaSpec::Linear(LinearArray { side: Side::Left, count: 20, standoff: 1.0 }),
            rx: AntennaSpec::Linear(LinearArray { side: Side::Right, count: 20, standoff: 1.0 }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CarrierConfig {
    pub center_hz: f64,
    #[serde(rename = "K")]
    pub count: usize,
    pub spacing_hz: f64,
}

impl Default for CarrierConfig {
    fn default() -> Self {
        Self { center_hz: 30e9, count: 4, spacing_hz: 100e6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PilotConfig {
    #[serde(rename = "T")]
    pub length: usize,
}

impl Default for PilotConfig {
    fn default() -> Self {
        Self { length: 32 }
    }
}

/// A number, or one of the listed keywords.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberOr<K> {
    Number(f64),
    Keyword(K),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiselessKeyword {
    Noiseless,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaWKeyword {
    /// From the known simulation noise variance.
    Auto,
    /// From the smallest entries of the measurement.
    Blind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GampSettings {
    pub alpha: f64,
    pub theta_x: f64,
    pub sigma_x: f64,
    pub sigma_w: NumberOr<SigmaWKeyword>,
    pub max_iters: usize,
    pub tol: NumberOr<AutoKeyword>,
    pub denoiser: Denoiser,
    pub damping: f64,
}

impl Default for GampSettings {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            theta_x: 0.5,
            sigma_x: 0.5,
            sigma_w: NumberOr::Keyword(SigmaWKeyword::Auto),
            max_iters: 200,
            tol: NumberOr::Keyword(AutoKeyword::Auto),
            denoiser: Denoiser::SumProduct,
            damping: DEFAULT_DAMPING,
        }
    }
}

impl GampSettings {
    pub fn prior(&self) -> Result<PriorParams> {
        PriorParams::new(self.alpha, self.theta_x, self.sigma_x)
    }

    /// Solver settings once the noise level and tolerance are resolved.
    pub fn solver(&self, sigma_w: f64, tolerance: f64) -> GampConfig {
        GampConfig { sigma_w, max_iters: self.max_iters, tolerance, denoiser: self.denoiser, damping: self.damping }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub subdivision: usize,
    pub coupling: Coupling,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { subdivision: 15, coupling: Coupling::PerPoint }
    }
}

/// Geometry for the phase-error sweep. Unset fields fall back to the first
/// transmitter, the pixel nearest the ROI center and the center wavelength.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub antenna: Option<Point2>,
    pub pixel_center: Option<Point2>,
    pub pixel_size: Option<[f64; 2]>,
    pub wavelength: Option<f64>,
    pub proportions: Option<Vec<f64>>,
    pub quadrature: Option<QuadratureSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub sizes: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { sizes: vec![0.001, 0.01, 0.1, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub roi: RoiConfig,
    pub pixel: PixelConfig,
    pub antennas: AntennaConfig,
    pub carriers: CarrierConfig,
    pub pilots: PilotConfig,
    pub snr_db: NumberOr<NoiselessKeyword>,
    pub snr_reference: SnrReference,
    pub model: GainModel,
    pub quadrature: QuadratureSpec,
    pub gamp: GampSettings,
    pub targets: Vec<TargetShape>,
    pub oracle: OracleConfig,
    pub threshold: f64,
    pub seed: u64,
    pub analysis: AnalysisConfig,
    pub sweep: SweepConfig,
    /// Also write received blocks, pilots and channels in the binary matrix format.
    pub dump_matrices: bool,
    /// Not part of the config hash.
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            roi: RoiConfig { length: 3.0, width: 3.0, origin: Point2::new(0.0, 0.0) },
            pixel: PixelConfig { l_s: 0.1, w_s: 0.1 },
            antennas: AntennaConfig::default(),
            carriers: CarrierConfig::default(),
            pilots: PilotConfig::default(),
            snr_db: NumberOr::Number(20.0),
            snr_reference: SnrReference::Total,
            model: GainModel::Integral,
            quadrature: QuadratureSpec::default(),
            gamp: GampSettings::default(),
            targets: vec![TargetShape::cross(Point2::new(1.5, 1.5), 1.0, 0.2, 1.0)],
            oracle: OracleConfig::default(),
            threshold: crate::metrics::DEFAULT_THRESHOLD,
            seed: 0,
            analysis: AnalysisConfig::default(),
            sweep: SweepConfig::default(),
            dump_matrices: false,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("roi.L", self.roi.length),
            ("roi.W", self.roi.width),
            ("pixel.l_s", self.pixel.l_s),
            ("pixel.w_s", self.pixel.w_s),
            ("carriers.center_hz", self.carriers.center_hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.carriers.count == 0 || self.pilots.length == 0 {
            return Err(Error::Config("carriers.K and pilots.T must be at least 1".into()));
        }
        if !(self.carriers.spacing_hz >= 0.0) {
            return Err(Error::Config("carriers.spacing_hz must be non-negative".into()));
        }
        if self.oracle.subdivision == 0 {
            return Err(Error::Config("oracle.subdivision must be at least 1".into()));
        }
        if let NumberOr::Number(v) = self.gamp.sigma_w {
            if !(v >= 0.0) {
                return Err(Error::Config(format!("gamp.sigma_w must be non-negative, got {v}")));
            }
        }
        if let NumberOr::Number(v) = self.gamp.tol {
            if !(v > 0.0) {
                return Err(Error::Config(format!("gamp.tol must be positive, got {v}")));
            }
        }
        if self.sweep.sizes.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Config("sweep.sizes must be positive".into()));
        }
        for (name, spec) in [("tx", &self.antennas.tx), ("rx", &self.antennas.rx)] {
            if let AntennaSpec::Linear(l) = spec {
                if l.count == 0 || !(l.standoff > 0.0) {
                    return Err(Error::Config(format!("antennas.{name}: count and standoff must be positive")));
                }
            }
        }
        self.gamp.prior()?;
        self.gamp.solver(0.0, 1.0).validate()?;
        self.quadrature.validate()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<PixelGrid> {
        PixelGrid::with_origin(self.roi.length, self.roi.width, self.pixel.l_s, self.pixel.w_s, self.roi.origin)
    }

    pub fn arrays(&self) -> Result<AntennaArray> {
        let roi = self.grid()?.roi();
        Ok(AntennaArray::new(self.antennas.tx.positions(&roi), self.antennas.rx.positions(&roi)))
    }

    pub fn carrier_set(&self) -> Result<CarrierSet> {
        CarrierSet::new(self.carriers.center_hz, self.carriers.count, self.carriers.spacing_hz)
    }

    pub fn noise(&self) -> NoiseSpec {
        match self.snr_db {
            NumberOr::Number(v) if v.is_infinite() && v > 0.0 => NoiseSpec::Noiseless,
            NumberOr::Number(v) => NoiseSpec::SnrDb(v),
            NumberOr::Keyword(NoiselessKeyword::Noiseless) => NoiseSpec::Noiseless,
        }
    }

    /// SHA-256 of the canonical JSON form, with `out_dir` cleared.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Every length (ROI, pixel, targets, antenna positions and standoffs)
    /// multiplied by `factor`; carriers are unchanged.
    pub fn scaled(&self, factor: f64) -> Self {
        let origin = Point2::new(0.0, 0.0);
        let mut c = self.clone();
        c.roi.length *= factor;
        c.roi.width *= factor;
        c.roi.origin = Point2::new(self.roi.origin.x * factor, self.roi.origin.y * factor);
        c.pixel.l_s *= factor;
        c.pixel.w_s *= factor;
        c.targets = self.targets.iter().map(|t| t.scaled_about(origin, factor)).collect();
        c.antennas.tx = self.antennas.tx.scaled(factor);
        c.antennas.rx = self.antennas.rx.scaled(factor);
        c
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carriers.center_hz
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let c = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.grid().unwrap().n_pixels(), 900);
        let a = c.arrays().unwrap();
        assert_eq!((a.n_tx(), a.n_rx()), (20, 20));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(ExperimentConfig::from_json(r#"{"bogus": 1}"#), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::from_json(r#"{"gamp": {"alpha": 0.1, "extra": 2}}"#), Err(Error::Config(_))));
    }

    #[test]
    fn keywords_parse() {
        let c = ExperimentConfig::from_json(r#"{"snr_db": "noiseless", "gamp": {"sigma_w": "blind", "tol": 1e-3,
            "alpha": 0.05, "theta_x": 0.5, "sigma_x": 0.5, "max_iters": 10, "denoiser": "max-sum", "damping": 0.5}}"#)
        .unwrap();
        assert_eq!(c.noise(), NoiseSpec::Noiseless);
        assert_eq!(c.gamp.sigma_w, NumberOr::Keyword(SigmaWKeyword::Blind));
        assert_eq!(c.gamp.denoiser, Denoiser::MaxSum);
    }

    #[test]
    fn hash_ignores_out_dir() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig { out_dir: Some("elsewhere".into()), ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig { seed: 1, ..a.clone() };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn linear_array_positions() {
        let roi = Rect::new(Point2::new(1.5, 1.5), 3.0, 3.0);
        let p = LinearArray { side: Side::Left, count: 3, standoff: 1.0 }.positions(&roi);
        assert_eq!(p, vec![Point2::new(-1.0, 0.5), Point2::new(-1.0, 1.5), Point2::new(-1.0, 2.5)]);
    }

    #[test]
    fn negative_size_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"pixel": {"l_s": -0.1, "w_s": 0.1}}"#).is_err());
    }
}
