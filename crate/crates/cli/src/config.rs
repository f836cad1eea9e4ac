//! TOML experiment configuration.
//!
//! Every randomized input draws from `seeds`; reruns with the same config
//! and seed produce byte-identical outputs regardless of `--threads`.

use serde::Deserialize;
use shearstab_core::orr_sommerfeld::{
    BoundaryCondition, OutputNorm, ResolventPair, SourceNorm, NU0_DEFAULT,
};
use shearstab_core::profiles::{make_profile, FlowProfile, ProfileKind};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
#[derive(Default)]
pub struct Config {
    /// informational experiment tag (subcommand choice wins)
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub time: TimeConfig,
}


#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub kind: ProfileKind,
    #[serde(default)]
    pub coefficients: Vec<f64>,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            kind: ProfileKind::Poiseuille,
            coefficients: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// 0 = choose automatically from ν and α
    #[serde(default)]
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_nus")]
    pub nus: Vec<f64>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<u32>,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default = "default_bc")]
    pub bc: BoundaryCondition,
    /// resolvent pairs as "L2->L2_w" strings; empty = defaults for the bc
    #[serde(default)]
    pub pairs: Vec<String>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_amplitude_factors")]
    pub amplitude_factors: Vec<f64>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_min_l")]
    pub corrector_threshold: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            nus: default_nus(),
            alphas: default_alphas(),
            lambdas: Vec::new(),
            deltas: default_deltas(),
            bc: default_bc(),
            pairs: Vec::new(),
            seeds: Vec::new(),
            samples: default_samples(),
            amplitude_factors: default_amplitude_factors(),
            k_max: default_k_max(),
            corrector_threshold: default_min_l(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_eps")]
    pub eps_weight: f64,
    #[serde(default)]
    pub checkpoint_every: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            dt: default_dt(),
            t_final: default_t_final(),
            eps_weight: default_eps(),
            checkpoint_every: 0,
        }
    }
}

fn default_nus() -> Vec<f64> {
    vec![1e-3]
}
fn default_alphas() -> Vec<u32> {
    vec![1]
}
fn default_deltas() -> Vec<f64> {
    vec![1e-2]
}
fn default_bc() -> BoundaryCondition {
    BoundaryCondition::NonSlip
}
fn default_samples() -> usize {
    20
}
fn default_amplitude_factors() -> Vec<f64> {
    vec![0.01, 0.1, 1.0, 10.0, 100.0]
}
fn default_k_max() -> usize {
    8
}
fn default_min_l() -> f64 {
    10.0
}
fn default_dt() -> f64 {
    0.05
}
fn default_t_final() -> f64 {
    100.0
}
fn default_eps() -> f64 {
    0.05
}

impl Config {
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let cfg: Config = toml::from_str(&text).map_err(|e| format!("config parse: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        for &nu in &self.sweep.nus {
            if !(nu > 0.0 && nu <= NU0_DEFAULT) {
                return Err(format!("nu = {nu} outside (0, {NU0_DEFAULT}]"));
            }
        }
        for &a in &self.sweep.alphas {
            if a == 0 {
                return Err("alpha values must be >= 1".into());
            }
        }
        if self.time.dt <= 0.0 || self.time.t_final < 0.0 {
            return Err("time.dt must be positive and t_final nonnegative".into());
        }
        self.resolvent_pairs()?;
        Ok(())
    }

    pub fn build_profile(&self) -> Result<FlowProfile, String> {
        make_profile(self.profile.kind, &self.profile.coefficients).map_err(|e| e.to_string())
    }

    /// Resolved pair list (defaults depend on the boundary condition).
    pub fn resolvent_pairs(&self) -> Result<Vec<ResolventPair>, String> {
        if self.sweep.pairs.is_empty() {
            return Ok(default_pairs(self.sweep.bc));
        }
        self.sweep.pairs.iter().map(|s| parse_pair(s)).collect()
    }

    /// Seeds are mandatory for randomized experiments.
    pub fn require_seeds(&self, fallback: u64) -> Vec<u64> {
        if self.sweep.seeds.is_empty() {
            vec![fallback]
        } else {
            self.sweep.seeds.clone()
        }
    }
}

pub fn default_pairs(bc: BoundaryCondition) -> Vec<ResolventPair> {
    match bc {
        BoundaryCondition::NonSlip => vec![
            ResolventPair::new(SourceNorm::L2, OutputNorm::L2W),
            ResolventPair::new(SourceNorm::Hm1, OutputNorm::L2W),
            ResolventPair::new(SourceNorm::Hm1, OutputNorm::L2U),
            ResolventPair::new(SourceNorm::L2, OutputNorm::L2U),
            ResolventPair::new(SourceNorm::H1, OutputNorm::L2U),
        ],
        BoundaryCondition::NavierSlip => vec![
            ResolventPair::new(SourceNorm::L2, OutputNorm::L2W),
            ResolventPair::new(SourceNorm::Hm1, OutputNorm::L2W),
            ResolventPair::new(SourceNorm::L2, OutputNorm::L2U),
            ResolventPair::new(SourceNorm::Hm1, OutputNorm::L2U),
        ],
    }
}

pub fn parse_pair(s: &str) -> Result<ResolventPair, String> {
    let (src, out) = s
        .split_once("->")
        .ok_or_else(|| format!("pair '{s}' must look like 'L2->L2_w'"))?;
    let source = match src.trim() {
        "L2" => SourceNorm::L2,
        "Hm1" | "H-1" => SourceNorm::Hm1,
        "H1" => SourceNorm::H1,
        other => return Err(format!("unknown source norm '{other}'")),
    };
    let output = match out.trim() {
        "L2_w" => OutputNorm::L2W,
        "L2_u" => OutputNorm::L2U,
        "Linf_u" => OutputNorm::LinfU,
        other => return Err(format!("unknown output norm '{other}'")),
    };
    Ok(ResolventPair::new(source, output))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let cfg: Config = toml::from_str("").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.sweep.nus, vec![1e-3]);
        assert!(cfg.build_profile().is_ok());
    }

    #[test]
    fn full_config_parses() {
        let text = r#"
kind = "resolvent-scan"
[profile]
kind = "quartic"
coefficients = [0.5]
[grid]
n = 192
[sweep]
nus = [1e-3, 1e-4]
alphas = [1, 2]
bc = "navier_slip"
pairs = ["L2->L2_w", "Hm1->L2_u"]
seeds = [7]
[time]
dt = 0.02
t_final = 50.0
"#;
        let cfg: Config = toml::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.resolvent_pairs().unwrap().len(), 2);
        assert_eq!(cfg.build_profile().unwrap().name, "quartic_c4_0.5");
    }

    #[test]
    fn bad_configs_are_rejected() {
        let bad: Config = toml::from_str("[sweep]\nnus = [0.5]").unwrap();
        assert!(bad.validate().is_err());
        let bad: Config = toml::from_str("[sweep]\npairs = [\"L2=>w\"]").unwrap();
        assert!(bad.validate().is_err());
        assert!(toml::from_str::<Config>("[nope]\nx = 1").is_err());
    }
}
