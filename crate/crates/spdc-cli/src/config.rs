//! Flat dotted-key run configuration.
//!
//! Line-oriented `key = value` text with `#` comments. Unknown keys are
//! rejected with a line/column diagnostic; every value is validated before
//! any allocation happens. Lengths are given in pump vacuum wavelengths
//! (2πc/ω_p0) and converted to the internal c/ω_p0 unit on load.

use std::collections::BTreeMap;
use std::fmt;

use spdc_core::evolve::{ExcitationBasis, Stepper};
use spdc_core::excitation::{solve_poling, PoledNonlinearity, PumpPulse};
use spdc_core::grid::{BandResolution, GridParams};
use spdc_core::kernels::OmegaBarQuadrature;
use spdc_core::medium::{LorentzParams, MediumModel};

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "config error at line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, column: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        column,
        message: message.into(),
    }
}

/// Which coupled system to integrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Formulation {
    Filtered,
    TimeDomain,
}

/// Everything a run needs, validated.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub medium: MediumModel,
    pub pump: PumpPulse,
    pub nonlinearity: PoledNonlinearity,
    pub grid: GridParams,
    pub budget_mb: f64,
    pub quadrature: QuadratureChoice,
    pub formulation: Formulation,
    pub stepper: Stepper,
    pub basis: ExcitationBasis,
    pub snapshot_count: usize,
    /// Fractions of L in [−0.5, 0.5].
    pub snapshot_positions: Vec<f64>,
    pub label: String,
    pub output_dir: String,
    pub sweep_energies: Vec<f64>,
    /// Analyte strength of the paired lossy runs in a sweep (QSUP studies).
    pub sweep_paired_alpha: Option<f64>,
    pub write_moment: bool,
    /// Canonical text the config hash is computed from.
    pub canonical: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureChoice {
    Auto,
    Grid,
    Nodes(usize),
}

impl QuadratureChoice {
    pub fn resolve(
        &self,
        medium: &MediumModel,
        pump: &PumpPulse,
        nonlinearity: &PoledNonlinearity,
    ) -> OmegaBarQuadrature {
        match self {
            Self::Auto => OmegaBarQuadrature::auto(medium, pump, nonlinearity),
            Self::Grid => OmegaBarQuadrature::Grid,
            Self::Nodes(n) => OmegaBarQuadrature::GaussHermite(*n),
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "dielectric.omega0",
    "dielectric.omega_pl",
    "dielectric.gamma",
    "analyte.omega_loss",
    "analyte.gamma",
    "analyte.alpha",
    "analyte.omega_pl",
    "pump.omega_p0",
    "pump.tau_p",
    "pump.energy",
    "nonlinearity.chi_m",
    "nonlinearity.length",
    "nonlinearity.target_signal_freq",
    "grid.nodes_per_period",
    "grid.side_lobes",
    "grid.pump_nodes",
    "grid.padding_decay_lengths",
    "grid.compressed_nodes",
    "grid.phase_cap",
    "grid.scale",
    "grid.band_fine_spacing",
    "grid.band_core_halfwidth",
    "grid.band_coarse_spacing",
    "grid.single_band",
    "kernels.memory_budget_mb",
    "kernels.pump_quad",
    "solve.formulation",
    "solve.stepper",
    "solve.etd_phase_cap",
    "solve.basis",
    "solve.eigen_tolerance",
    "solve.snapshot_count",
    "solve.snapshot_positions",
    "run.label",
    "run.output_dir",
    "run.deterministic",
    "output.moment",
    "sweep.energies",
    "sweep.paired_alpha",
];

struct Raw {
    entries: BTreeMap<String, (String, usize, usize)>,
}

impl Raw {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (ln, line) in text.lines().enumerate() {
            let ln = ln + 1;
            let body = match line.find('#') {
                Some(i) => &line[..i],
                None => line,
            };
            if body.trim().is_empty() {
                continue;
            }
            let Some(eq) = body.find('=') else {
                return Err(err(ln, 1, "expected `key = value`"));
            };
            let key = body[..eq].trim().to_string();
            let value = body[eq + 1..].trim().to_string();
            if key.is_empty() {
                return Err(err(ln, 1, "empty key"));
            }
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(err(ln, 1, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(err(ln, eq + 2, format!("empty value for `{key}`")));
            }
            if entries.insert(key.clone(), (value, ln, eq + 2)).is_some() {
                return Err(err(ln, 1, format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { entries })
    }

    fn get(&self, key: &str) -> Option<&(String, usize, usize)> {
        self.entries.get(key)
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some((v, ln, col)) => v
                .parse::<f64>()
                .map_err(|_| err(*ln, *col, format!("`{v}` is not a number"))),
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some((v, ln, col)) => v
                .parse::<usize>()
                .map_err(|_| err(*ln, *col, format!("`{v}` is not a non-negative integer"))),
        }
    }

    fn bool(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some((v, ln, col)) => match v.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(err(*ln, *col, format!("`{v}` is not true/false"))),
            },
        }
    }

    fn string(&self, key: &str, default: &str) -> String {
        self.get(key)
            .map(|(v, _, _)| v.clone())
            .unwrap_or_else(|| default.to_string())
    }

    fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(Vec::new()),
            Some((v, ln, col)) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| err(*ln, *col, format!("`{}` is not a number", s.trim())))
                })
                .collect(),
        }
    }
}

/// 2π: pump wavelengths → internal c/ω_p0 lengths.
const WAVELENGTH: f64 = 2.0 * std::f64::consts::PI;

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw = Raw::parse(text)?;
        let at = |key: &str| -> (usize, usize) {
            raw.get(key).map(|(_, l, c)| (*l, *c)).unwrap_or((0, 0))
        };
        let positive = |key: &str, v: f64| -> Result<f64, ConfigError> {
            if v > 0.0 {
                Ok(v)
            } else {
                let (l, c) = at(key);
                Err(err(l, c, format!("`{key}` must be positive")))
            }
        };

        let d_omega0 = positive("dielectric.omega0", raw.f64("dielectric.omega0", 2.1)?)?;
        let d_pl = positive("dielectric.omega_pl", raw.f64("dielectric.omega_pl", 0.25)?)?;
        let d_gamma = positive("dielectric.gamma", raw.f64("dielectric.gamma", 1e-7)?)?;
        let a_loss = positive("analyte.omega_loss", raw.f64("analyte.omega_loss", 0.3)?)?;
        let a_gamma = positive("analyte.gamma", raw.f64("analyte.gamma", 2.5e-3)?)?;
        let alpha = raw.f64("analyte.alpha", 0.0)?;
        if alpha < 0.0 {
            let (l, c) = at("analyte.alpha");
            return Err(err(l, c, "`analyte.alpha` must be ≥ 0"));
        }
        // The analyte plasma frequency defaults to the dielectric's.
        let a_pl = positive("analyte.omega_pl", raw.f64("analyte.omega_pl", d_pl)?)?;
        let medium = MediumModel::new(
            LorentzParams::new(d_pl, d_omega0, d_gamma),
            LorentzParams::new(a_pl, a_loss, a_gamma),
            alpha,
        );

        let omega_p0 = positive("pump.omega_p0", raw.f64("pump.omega_p0", 1.0)?)?;
        let tau_p = positive("pump.tau_p", raw.f64("pump.tau_p", 2400.0)?)?;
        let energy = raw.f64("pump.energy", 1.0)?;
        if energy < 0.0 {
            let (l, c) = at("pump.energy");
            return Err(err(l, c, "`pump.energy` must be ≥ 0"));
        }
        let pump = PumpPulse::with_center(omega_p0, tau_p, energy);

        let chi_m = raw.f64("nonlinearity.chi_m", 1.0)?;
        let scale = match raw.string("grid.scale", "desk").as_str() {
            "desk" => 1.0,
            "paper" => 10.0,
            other => {
                let (l, c) = at("grid.scale");
                return Err(err(l, c, format!("`{other}` is not desk|paper")));
            }
        };
        let length_wl = positive("nonlinearity.length", raw.f64("nonlinearity.length", 3e3)?)?;
        let target = raw.f64("nonlinearity.target_signal_freq", 0.7)?;
        if !(target > 0.5 * omega_p0 && target < omega_p0) {
            let (l, c) = at("nonlinearity.target_signal_freq");
            return Err(err(
                l,
                c,
                "`nonlinearity.target_signal_freq` must lie in (ω_p0/2, ω_p0)",
            ));
        }
        let poling = solve_poling(&pump, &medium, target);
        if poling <= 0.0 {
            let (l, c) = at("nonlinearity.target_signal_freq");
            return Err(err(l, c, "medium has no normal-dispersion phase matching here"));
        }
        let nonlinearity = PoledNonlinearity::new(chi_m, poling, length_wl * WAVELENGTH * scale);

        let phase_cap = raw.f64("grid.phase_cap", 0.5)?;
        if !(phase_cap > 0.0 && phase_cap <= 0.5) {
            let (l, c) = at("grid.phase_cap");
            return Err(err(l, c, "`grid.phase_cap` must lie in (0, 0.5]"));
        }
        let padding = raw.f64("grid.padding_decay_lengths", 5.0)?;
        if padding < 5.0 {
            let (l, c) = at("grid.padding_decay_lengths");
            return Err(err(l, c, "`grid.padding_decay_lengths` must be ≥ 5"));
        }
        let opt_positive = |key: &str| -> Result<Option<f64>, ConfigError> {
            match raw.get(key) {
                None => Ok(None),
                Some(_) => positive(key, raw.f64(key, 0.0)?).map(Some),
            }
        };
        let band = BandResolution {
            fine_spacing: opt_positive("grid.band_fine_spacing")?,
            core_halfwidth: opt_positive("grid.band_core_halfwidth")?,
            coarse_spacing: opt_positive("grid.band_coarse_spacing")?,
            single_band: raw.bool("grid.single_band", false)?,
        };
        let grid = GridParams {
            nodes_per_period: raw.usize("grid.nodes_per_period", 24)?.max(4),
            side_lobes: raw.usize("grid.side_lobes", 1)?.max(1),
            pump_nodes: raw.usize("grid.pump_nodes", 33)?,
            padding_decay_lengths: padding,
            compressed_nodes: raw.usize("grid.compressed_nodes", 40)?.max(2),
            phase_cap,
            band,
        };

        let budget_mb = positive(
            "kernels.memory_budget_mb",
            raw.f64("kernels.memory_budget_mb", 3000.0)?,
        )?;
        let quadrature = match raw.string("kernels.pump_quad", "auto").as_str() {
            "auto" => QuadratureChoice::Auto,
            "grid" => QuadratureChoice::Grid,
            n => match n.parse::<usize>() {
                Ok(n) if (2..=48).contains(&n) => QuadratureChoice::Nodes(n),
                _ => {
                    let (l, c) = at("kernels.pump_quad");
                    return Err(err(l, c, "`kernels.pump_quad` must be auto|grid|<2..48>"));
                }
            },
        };

        let formulation = match raw.string("solve.formulation", "filtered").as_str() {
            "filtered" => Formulation::Filtered,
            "timedomain" => Formulation::TimeDomain,
            other => {
                let (l, c) = at("solve.formulation");
                return Err(err(l, c, format!("`{other}` is not filtered|timedomain")));
            }
        };
        let etd_cap = raw.f64("solve.etd_phase_cap", 0.45)?;
        let stepper = match raw.string("solve.stepper", "rk4").as_str() {
            "rk4" => Stepper::ClassicalRk4,
            "etd" => Stepper::Etdrk4 { phase_cap: etd_cap },
            other => {
                let (l, c) = at("solve.stepper");
                return Err(err(l, c, format!("`{other}` is not rk4|etd")));
            }
        };
        let basis = match raw.string("solve.basis", "eigen").as_str() {
            "eigen" => ExcitationBasis::Eigen {
                tolerance: raw.f64("solve.eigen_tolerance", 1e-8)?,
            },
            "grid" => ExcitationBasis::Grid,
            other => {
                let (l, c) = at("solve.basis");
                return Err(err(l, c, format!("`{other}` is not eigen|grid")));
            }
        };

        let snapshot_positions = raw.f64_list("solve.snapshot_positions")?;
        if snapshot_positions.iter().any(|p| !(-0.5..=0.5).contains(p)) {
            let (l, c) = at("solve.snapshot_positions");
            return Err(err(l, c, "snapshot positions are fractions of L in [-0.5, 0.5]"));
        }

        if !raw.bool("run.deterministic", true)? {
            let (l, c) = at("run.deterministic");
            return Err(err(l, c, "runs are always deterministic; set true or omit"));
        }

        let sweep_energies = raw.f64_list("sweep.energies")?;
        if sweep_energies.iter().any(|e| *e < 0.0) {
            let (l, c) = at("sweep.energies");
            return Err(err(l, c, "sweep energies must be ≥ 0"));
        }
        let sweep_paired_alpha = if raw.get("sweep.paired_alpha").is_some() {
            Some(positive("sweep.paired_alpha", raw.f64("sweep.paired_alpha", 0.0)?)?)
        } else {
            None
        };

        // Canonical text: sorted key = value lines of everything present.
        let canonical = raw
            .entries
            .iter()
            .map(|(k, (v, _, _))| format!("{k} = {v}"))
            .collect::<Vec<_>>()
            .join("\n");

        Ok(Self {
            medium,
            pump,
            nonlinearity,
            grid,
            budget_mb,
            quadrature,
            formulation,
            stepper,
            basis,
            snapshot_count: raw.usize("solve.snapshot_count", 0)?,
            snapshot_positions,
            label: raw.string("run.label", "run"),
            output_dir: raw.string("run.output_dir", "out"),
            sweep_energies,
            sweep_paired_alpha,
            write_moment: raw.bool("output.moment", false)?,
            canonical,
        })
    }

    /// Same configuration at another pump energy.
    pub fn with_energy(&self, energy: f64) -> Self {
        let mut c = self.clone();
        c.pump = c.pump.with_energy(energy);
        c
    }

    /// Same configuration with the analyte overlap replaced.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        let mut c = self.clone();
        c.medium = MediumModel::new(c.medium.dielectric, c.medium.analyte, alpha);
        c
    }

    /// FNV-1a 64 over the canonical text plus run-variant parameters.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01B3);
            }
        };
        eat(self.canonical.as_bytes());
        eat(&self.pump.energy.to_bits().to_le_bytes());
        eat(&self.medium.overlap.to_bits().to_le_bytes());
        format!("{h:016x}")
    }
}
