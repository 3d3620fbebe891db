//! TOML experiment description.
//!
//! Angles are given in degrees and converted when radar configurations are
//! built; lengths are metres and the frequency is in hertz. Relative paths
//! are resolved against the directory of the config file.
//!
//! ```toml
//! mesh = "scene.obj"
//! outputs = "out"
//!
//! [params]            # either four scalars or `csv = "params.csv"`
//! h = 0.005
//! l = 0.01
//! eps_r = 25.0
//! tau = 0.5
//!
//! [radar]
//! frequency = 9.6e9
//! polarization = "HH"
//! start_pos = [-6.0, -30.0, 30.0]
//! end_pos = [6.0, -30.0, 30.0]
//! num_azimuth = 24
//! alpha0_deg = 40.0
//! alpha1_deg = 50.0
//! range_res = 0.25
//! azimuth_res = 0.5
//! views_deg = [0.0, 120.0, 240.0]
//!
//! [optim]
//! lr = 0.02
//! iters = 500
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::imaging::{RadarConfig, RangeWindow};
use crate::learn::{
    AdamConfig, Bounds, LearnConfig, LossConfig, ParamBinding, ParamSpace,
};
use crate::scatter::{Polarization, PsdKind, ValidityThresholds, WaveConfig};
use crate::scene::{load_mesh, BsdfParams, Channel, Mesh, ParamMap, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub mesh: PathBuf,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    pub params: ParamInit,
    pub radar: RadarSection,
    #[serde(default)]
    pub loss: LossConfig,
    #[serde(default)]
    pub optim: OptimSection,
    #[serde(skip)]
    base_dir: PathBuf,
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

/// Initial surface parameters: four scalars broadcast to every vertex, or a
/// per-vertex CSV file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamInit {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarSection {
    pub frequency: f64,
    pub polarization: String,
    #[serde(default = "default_psd")]
    pub psd: String,
    pub start_pos: [f64; 3],
    pub end_pos: [f64; 3],
    pub num_azimuth: usize,
    pub alpha0_deg: f64,
    pub alpha1_deg: f64,
    #[serde(default = "default_angle_bins")]
    pub num_angle_bins: usize,
    pub range_res: f64,
    pub azimuth_res: f64,
    #[serde(default = "default_spua")]
    pub spua: usize,
    #[serde(default)]
    pub seed: u64,
    /// Trajectory rotations about the vertical through `pivot`, one image each.
    #[serde(default = "default_views")]
    pub views_deg: Vec<f64>,
    #[serde(default)]
    pub pivot: [f64; 3],
    /// Fixed range window; both keys must be given together.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range_origin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range_bins: Option<usize>,
}

fn default_psd() -> String {
    "gaussian".into()
}
fn default_angle_bins() -> usize {
    32
}
fn default_spua() -> usize {
    4
}
fn default_views() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimSection {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
    /// Per-step multiplicative learning-rate decay.
    pub lr_decay: f64,
    /// Number of steps taken at the base learning rate before decay begins.
    pub lr_decay_start: usize,
    pub iters: usize,
    pub seed: u64,
    /// Channels to optimize, by name (`h`, `l`, `eps_r`, `tau`).
    pub channels: Vec<String>,
    /// Optimization coordinate per channel: `log` or `linear`.
    pub scales: [String; 4],
    /// Share one set of values among all non-frozen vertices.
    pub tie: bool,
    /// Half-open vertex-id ranges `[start, end)` kept fixed.
    pub freeze: Vec<[usize; 2]>,
    /// Indices into `radar.views_deg` used for RMSE only.
    pub held_out: Vec<usize>,
    /// Add the `k h < 0.3` height bound to the parameter box.
    pub enforce_validity: bool,
    pub early_stop_window: usize,
    pub early_stop_tol: f64,
}

impl Default for OptimSection {
    fn default() -> Self {
        let adam = AdamConfig::default();
        OptimSection {
            lr: adam.lr,
            beta1: adam.beta1,
            beta2: adam.beta2,
            eps_adam: adam.eps,
            lr_decay: adam.decay,
            lr_decay_start: adam.decay_start,
            iters: 500,
            seed: 0,
            channels: Channel::ALL.iter().map(|c| c.name().to_string()).collect(),
            scales: ["log", "log", "log", "linear"].map(String::from),
            tie: false,
            freeze: Vec::new(),
            held_out: Vec::new(),
            enforce_validity: false,
            early_stop_window: 50,
            early_stop_tol: 1e-6,
        }
    }
}

fn parse_channel(name: &str) -> Result<Channel> {
    Channel::ALL
        .into_iter()
        .find(|c| c.name() == name)
        .ok_or_else(|| Error::config("optim.channels", format!("unknown channel `{name}`")))
}

impl SceneConfig {
    /// Parses and validates the numeric content; file references are not
    /// checked.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SceneConfig =
            toml::from_str(text).map_err(|e| Error::config("toml", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, validates and checks that every referenced input file exists.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = SceneConfig::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mesh = cfg.resolve(&cfg.mesh);
        if !mesh.is_file() {
            return Err(Error::config("mesh", format!("{} does not exist", mesh.display())));
        }
        if let Some(csv) = &cfg.params.csv {
            let p = cfg.resolve(csv);
            if !p.is_file() {
                return Err(Error::config("params.csv", format!("{} does not exist", p.display())));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn set_base_dir(&mut self, dir: impl Into<PathBuf>) {
        self.base_dir = dir.into();
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.radar;
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("radar.{name}"), format!("must be positive, got {v}")))
            }
        };
        pos("frequency", r.frequency)?;
        pos("range_res", r.range_res)?;
        pos("azimuth_res", r.azimuth_res)?;
        r.polarization
            .parse::<Polarization>()
            .map_err(|e| Error::config("radar.polarization", e.to_string()))?;
        r.psd
            .parse::<PsdKind>()
            .map_err(|e| Error::config("radar.psd", e.to_string()))?;
        if !(r.alpha0_deg < r.alpha1_deg) {
            return Err(Error::config(
                "radar.alpha0_deg",
                format!("must be smaller than alpha1_deg ({} >= {})", r.alpha0_deg, r.alpha1_deg),
            ));
        }
        if !(r.alpha0_deg >= 0.0 && r.alpha1_deg < 90.0) {
            return Err(Error::config("radar.alpha1_deg", "incidence fan must lie within [0, 90)"));
        }
        for (name, v) in [
            ("num_azimuth", r.num_azimuth),
            ("num_angle_bins", r.num_angle_bins),
            ("spua", r.spua),
        ] {
            if v == 0 {
                return Err(Error::config(format!("radar.{name}"), "must be at least 1"));
            }
        }
        if r.start_pos == r.end_pos {
            return Err(Error::config("radar.end_pos", "must differ from start_pos"));
        }
        if r.views_deg.is_empty() {
            return Err(Error::config("radar.views_deg", "needs at least one view"));
        }
        if r.range_origin.is_some() != r.range_bins.is_some() {
            return Err(Error::config(
                "radar.range_origin",
                "range_origin and range_bins must be given together",
            ));
        }
        if r.range_bins == Some(0) {
            return Err(Error::config("radar.range_bins", "must be at least 1"));
        }

        let p = &self.params;
        let scalars = [p.h, p.l, p.eps_r, p.tau];
        match (&p.csv, scalars.iter().all(Option::is_some), scalars.iter().any(Option::is_some)) {
            (Some(_), _, false) => {}
            (None, true, _) => {
                let b = BsdfParams::new(p.h.unwrap(), p.l.unwrap(), p.eps_r.unwrap(), p.tau.unwrap());
                b.validate().map_err(|e| Error::config("params", e.to_string()))?;
            }
            _ => {
                return Err(Error::config(
                    "params",
                    "give either `csv` or all of `h`, `l`, `eps_r`, `tau`",
                ))
            }
        }

        self.loss
            .validate()
            .map_err(|e| Error::config("loss", e.to_string()))?;
        let o = &self.optim;
        self.adam()
            .validate()
            .map_err(|e| Error::config("optim.lr", e.to_string()))?;
        for c in &o.channels {
            parse_channel(c)?;
        }
        self.space()?;
        for &h in &o.held_out {
            if h >= r.views_deg.len() {
                return Err(Error::config("optim.held_out", format!("no view with index {h}")));
            }
        }
        if o.held_out.len() >= r.views_deg.len() {
            return Err(Error::config("optim.held_out", "at least one view must be used for training"));
        }
        for f in &o.freeze {
            if f[0] > f[1] {
                return Err(Error::config("optim.freeze", format!("range {f:?} is reversed")));
            }
        }
        if !(o.early_stop_tol >= 0.0) {
            return Err(Error::config("optim.early_stop_tol", "must be non-negative"));
        }
        Ok(())
    }

    pub fn wave(&self) -> Result<WaveConfig> {
        let r = &self.radar;
        WaveConfig::new(r.frequency, r.polarization.parse()?, r.psd.parse()?)
    }

    /// One acquisition per entry of `views_deg`.
    pub fn radars(&self) -> Result<Vec<RadarConfig>> {
        let r = &self.radar;
        let base = RadarConfig {
            wave: self.wave()?,
            start_pos: Vec3::from(r.start_pos),
            end_pos: Vec3::from(r.end_pos),
            num_azimuth: r.num_azimuth,
            alpha0: r.alpha0_deg.to_radians(),
            alpha1: r.alpha1_deg.to_radians(),
            num_angle_bins: r.num_angle_bins,
            range_res: r.range_res,
            azimuth_res: r.azimuth_res,
            spua: r.spua,
            seed: r.seed,
            range_window: r.range_origin.zip(r.range_bins).map(|(origin, num_bins)| RangeWindow {
                origin,
                num_bins,
            }),
        };
        base.validate()?;
        let pivot = Vec3::from(r.pivot);
        Ok(r
            .views_deg
            .iter()
            .map(|a| base.rotated_about(&pivot, a.to_radians()))
            .collect())
    }

    pub fn load_mesh(&self) -> Result<Mesh> {
        load_mesh(&self.resolve(&self.mesh))
    }

    pub fn initial_params(&self, num_vertices: usize) -> Result<ParamMap> {
        let p = &self.params;
        let map = match &p.csv {
            Some(csv) => ParamMap::load_csv(&self.resolve(csv))?,
            None => ParamMap::uniform(
                num_vertices,
                BsdfParams::new(p.h.unwrap(), p.l.unwrap(), p.eps_r.unwrap(), p.tau.unwrap()),
            ),
        };
        if map.len() != num_vertices {
            return Err(Error::config(
                "params.csv",
                format!("{} records for a mesh with {num_vertices} vertices", map.len()),
            ));
        }
        Ok(map)
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.optim.lr,
            beta1: self.optim.beta1,
            beta2: self.optim.beta2,
            eps: self.optim.eps_adam,
            decay: self.optim.lr_decay,
            decay_start: self.optim.lr_decay_start,
        }
    }

    pub fn space(&self) -> Result<ParamSpace> {
        let mut out = ParamSpace::default();
        for (i, s) in self.optim.scales.iter().enumerate() {
            out.0[i] = match s.as_str() {
                "log" => crate::learn::Scale::Log,
                "linear" => crate::learn::Scale::Linear,
                other => {
                    return Err(Error::config("optim.scales", format!("unknown scale `{other}`")))
                }
            };
        }
        Ok(out)
    }

    pub fn bounds(&self) -> Result<Bounds> {
        Ok(if self.optim.enforce_validity {
            Bounds::with_validity(&self.wave()?, &ValidityThresholds::default())
        } else {
            Bounds::hard()
        })
    }

    pub fn binding(&self, num_vertices: usize) -> Result<ParamBinding> {
        let frozen = |v: usize| self.optim.freeze.iter().any(|f| (f[0]..f[1]).contains(&v));
        let mut next = 0;
        let slots = (0..num_vertices)
            .map(|v| {
                if frozen(v) {
                    None
                } else if self.optim.tie {
                    Some(0)
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect();
        let channels = self
            .optim
            .channels
            .iter()
            .map(|c| parse_channel(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(ParamBinding::from_slots(slots)?.with_channels(&channels))
    }

    pub fn learn_config(&self, exec: Execution) -> LearnConfig {
        LearnConfig {
            iters: self.optim.iters,
            loss: self.loss,
            early_stop_window: self.optim.early_stop_window,
            early_stop_tol: self.optim.early_stop_tol,
            exec,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
mesh = "scene.obj"

[params]
h = 0.005
l = 0.01
eps_r = 25.0
tau = 0.5

[radar]
frequency = 9.6e9
polarization = "HH"
start_pos = [-6.0, -30.0, 30.0]
end_pos = [6.0, -30.0, 30.0]
num_azimuth = 24
alpha0_deg = 40.0
alpha1_deg = 50.0
range_res = 0.25
azimuth_res = 0.5
views_deg = [0.0, 120.0, 240.0]

[optim]
tie = true
freeze = [[0, 81]]
channels = ["h", "l", "eps_r"]
"#;

    #[test]
    fn parses_and_round_trips() {
        let a = SceneConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(a.outputs, PathBuf::from("out"));
        assert_eq!(a.radar.spua, 4);
        let b = SceneConfig::from_toml_str(&a.to_toml_string()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn radars_convert_degrees() {
        let a = SceneConfig::from_toml_str(SAMPLE).unwrap();
        let r = a.radars().unwrap();
        assert_eq!(r.len(), 3);
        assert!((r[0].alpha0 - 40f64.to_radians()).abs() < 1e-15);
        assert!((r[1].start_pos.z - 30.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_fan_names_field() {
        let text = SAMPLE.replace("alpha0_deg = 40.0", "alpha0_deg = 55.0");
        let err = SceneConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("radar.alpha0_deg"), "{err}");
    }

    #[test]
    fn cross_pol_rejected() {
        let text = SAMPLE.replace("\"HH\"", "\"HV\"");
        let err = SceneConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("radar.polarization"), "{err}");
    }

    #[test]
    fn incomplete_params_rejected() {
        let text = SAMPLE.replace("tau = 0.5\n", "");
        assert!(SceneConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn unknown_key_reports_location() {
        let text = SAMPLE.replace("num_azimuth", "num_azimuths");
        let err = SceneConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("num_azimuths"), "{err}");
    }

    #[test]
    fn binding_ties_and_freezes() {
        let a = SceneConfig::from_toml_str(SAMPLE).unwrap();
        let b = a.binding(90).unwrap();
        assert_eq!(b.slot(10), None);
        assert_eq!(b.slot(81), Some(0));
        assert_eq!(b.slot(89), Some(0));
        assert!(!b.is_learnable(Channel::Tau));
    }

    #[test]
    fn missing_mesh_at_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, SAMPLE).unwrap();
        let err = SceneConfig::load(&p).unwrap_err();
        assert!(err.to_string().contains("mesh"), "{err}");
    }
}
