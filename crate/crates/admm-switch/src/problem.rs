//! Declarative description of an N-block ADMM problem.
//!
//! A [`ProblemSpec`] carries only per-block spectral data (largest/smallest
//! singular value of each A_i), objective curvature bounds, and the scalar
//! parameters β, γ, α_i. That is all the certification machinery needs; the
//! runtime works from concrete matrices (see [`crate::runtime::Instance`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Supremum used for the shrinkage gain ρ ∈ [0, 1): the sector's upper end
/// is open, so the stored bound sits just below 1.
pub const L1_GAIN_SUP: f64 = 1.0 - 1e-9;

/// Per-coordinate slope information for one block objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveDesc {
    /// f(x) = c·x² per coordinate; the gradient 2c·x has slope exactly 2c.
    Quadratic { c: f64 },
    /// f(x) = r·|x| per coordinate, handled through the shrinkage map,
    /// whose linearization gain ρ lies in [0, 1).
    L1 { weight: f64 },
    /// Raw slope bounds ν⁻ ≤ 𝔣' ≤ ν⁺, one pair per coordinate.
    SectorOnly {
        nu_minus: Vec<f64>,
        nu_plus: Vec<f64>,
    },
}

impl ObjectiveDesc {
    /// Slope bounds (ν⁻ⱼ, ν⁺ⱼ) of the block nonlinearity.
    pub fn nu_bounds(&self) -> Vec<(f64, f64)> {
        match self {
            ObjectiveDesc::Quadratic { c } => vec![(2.0 * c, 2.0 * c)],
            ObjectiveDesc::L1 { .. } => vec![(0.0, L1_GAIN_SUP)],
            ObjectiveDesc::SectorOnly { nu_minus, nu_plus } => nu_minus
                .iter()
                .zip(nu_plus.iter())
                .map(|(&a, &b)| (a, b))
                .collect(),
        }
    }
}

/// Which proximal weighting S_i the updates use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProximalVariant {
    /// S_i = α_i·I − β·A_iᵀA_i (the linearized-penalty form).
    ProxMinusBeta,
    /// S_i = α_i·I (plain proximal form; alternate weight matrices).
    ProxIdentity,
}

/// Sign pairing of the multiplier coupling.
///
/// `AsPrinted` pairs the x-update's `+β⁻¹λ` with the λ-update's
/// `−γβ(Σξ−q)`; the product of the two couplings is then positive and the
/// (mean-x, λ) pair is a saddle, so nothing interesting converges.
/// `Consistent` (default) flips the single λ-column sign so the coupling is
/// skew, which is the dynamics the reported experiments actually exhibit;
/// the λ-update itself stays `λ⁺ = λ − γβ(Σξ−q)` in both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    #[default]
    Consistent,
    AsPrinted,
}

/// How the offset vector q is known.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QModel {
    #[default]
    Zero,
    /// Only ‖q‖ is known; enough for certification, not for running.
    Norm { value: f64 },
}

/// Spectral data for one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub objective: ObjectiveDesc,
}

impl BlockSpec {
    /// ‖A_i‖² = σ₁²(A_i).
    pub fn norm_sq(&self) -> f64 {
        self.sigma_max * self.sigma_max
    }
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("problem needs at least one block")]
    NoBlocks,
    #[error("beta must be > 0, got {0}")]
    BadBeta(f64),
    #[error("gamma must be > 0, got {0}")]
    BadGamma(f64),
    #[error("alpha[{0}] must be > 0, got {1}")]
    BadAlpha(usize, f64),
    #[error("alpha has {got} entries for {want} blocks")]
    AlphaLen { got: usize, want: usize },
    #[error("block {0}: singular values must satisfy 0 < sigma_min <= sigma_max (got {1}, {2})")]
    BadSigmas(usize, f64, f64),
    #[error("block {block}: nu_minus[{j}] > nu_plus[{j}] ({lo} > {hi})")]
    BadSector {
        block: usize,
        j: usize,
        lo: f64,
        hi: f64,
    },
    #[error("block {0}: empty sector bound arrays")]
    EmptySector(usize),
    #[error("config parse error: {0}")]
    Parse(String),
}

/// Declarative N-block problem description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub blocks: Vec<BlockSpec>,
    pub beta: f64,
    pub gamma: f64,
    /// One proximal weight per block.
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub q: QModel,
    pub variant: ProximalVariant,
    #[serde(default)]
    pub sign_convention: SignConvention,
}

impl ProblemSpec {
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Reduced state dimension N+1.
    pub fn dim(&self) -> usize {
        self.blocks.len() + 1
    }

    /// α̂_i = α_i / ‖A_i‖².
    pub fn alpha_hat(&self, i: usize) -> f64 {
        self.alpha[i] / self.blocks[i].norm_sq()
    }

    /// Blocks whose S_i = α_i·I − β·A_iᵀA_i is indefinite (α_i < β‖A_i‖²),
    /// making the proximal term nonconvex. Only meaningful for
    /// [`ProximalVariant::ProxMinusBeta`].
    pub fn indefinite_prox_blocks(&self) -> Vec<usize> {
        if self.variant != ProximalVariant::ProxMinusBeta {
            return Vec::new();
        }
        (0..self.n_blocks())
            .filter(|&i| self.alpha[i] < self.beta * self.blocks[i].norm_sq())
            .collect()
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.blocks.is_empty() {
            return Err(SpecError::NoBlocks);
        }
        if !(self.beta > 0.0) {
            return Err(SpecError::BadBeta(self.beta));
        }
        if !(self.gamma > 0.0) {
            return Err(SpecError::BadGamma(self.gamma));
        }
        if self.alpha.len() != self.blocks.len() {
            return Err(SpecError::AlphaLen {
                got: self.alpha.len(),
                want: self.blocks.len(),
            });
        }
        for (i, &a) in self.alpha.iter().enumerate() {
            if !(a > 0.0) {
                return Err(SpecError::BadAlpha(i, a));
            }
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if !(b.sigma_min > 0.0) || b.sigma_min > b.sigma_max {
                return Err(SpecError::BadSigmas(i, b.sigma_min, b.sigma_max));
            }
            let nus = b.objective.nu_bounds();
            if nus.is_empty() {
                return Err(SpecError::EmptySector(i));
            }
            for (j, &(lo, hi)) in nus.iter().enumerate() {
                if lo > hi {
                    return Err(SpecError::BadSector {
                        block: i,
                        j,
                        lo,
                        hi,
                    });
                }
            }
        }
        Ok(())
    }
}

/// JSON config file shape. `alpha` may be a scalar (shared by all blocks)
/// or an array with one entry per block.
#[derive(Deserialize)]
struct ConfigFile {
    blocks: Vec<BlockSpec>,
    beta: f64,
    gamma: f64,
    alpha: AlphaField,
    #[serde(default)]
    q: QModel,
    variant: ProximalVariant,
    #[serde(default)]
    sign_convention: SignConvention,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AlphaField {
    Shared(f64),
    PerBlock(Vec<f64>),
}

/// Parse and validate a JSON problem config.
pub fn spec_from_json(text: &str) -> Result<ProblemSpec, SpecError> {
    let cfg: ConfigFile =
        serde_json::from_str(text).map_err(|e| SpecError::Parse(e.to_string()))?;
    let alpha = match cfg.alpha {
        AlphaField::Shared(a) => vec![a; cfg.blocks.len()],
        AlphaField::PerBlock(v) => v,
    };
    let spec = ProblemSpec {
        blocks: cfg.blocks,
        beta: cfg.beta,
        gamma: cfg.gamma,
        alpha,
        q: cfg.q,
        variant: cfg.variant,
        sign_convention: cfg.sign_convention,
    };
    spec.validate()?;
    Ok(spec)
}
