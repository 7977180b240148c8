//! Simulation conditions, the 40-cell population grid and presets.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{reconstruct_sigma, validate_model, FactorModel};

pub const GRID_Q: usize = 6;
pub const GRID_LOADS_PER_FACTOR: [usize; 2] = [5, 10];
pub const GRID_MAIN_LOADINGS: [f64; 5] = [0.40, 0.50, 0.60, 0.70, 0.80];
pub const GRID_SECONDARY_LOADINGS: [f64; 2] = [0.0, 0.10];
pub const GRID_FACTOR_CORRS: [f64; 2] = [0.0, 0.30];

/// Minor-factor model error settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinorFactorSettings {
    /// Number of minor factors.
    #[serde(default = "default_minor_count")]
    pub m: usize,
    /// Share of each item's variance moved from uniqueness to minor factors.
    #[serde(default = "default_pi_minor")]
    pub pi_minor: f64,
    /// Geometric taper of expected squared minor loadings across factors.
    #[serde(default = "default_decay")]
    pub decay: f64,
}

fn default_minor_count() -> usize {
    100
}
fn default_pi_minor() -> f64 {
    0.10
}
fn default_decay() -> f64 {
    0.05
}

impl Default for MinorFactorSettings {
    fn default() -> Self {
        Self { m: default_minor_count(), pi_minor: default_pi_minor(), decay: default_decay() }
    }
}

/// One cell of a simulation design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationCondition {
    /// Position in the design; also selects the random substream.
    #[serde(default)]
    pub index: usize,
    #[serde(default = "default_q")]
    pub q: usize,
    pub loads_per_factor: usize,
    pub main_loading: f64,
    #[serde(default)]
    pub secondary_loading: f64,
    #[serde(default)]
    pub factor_corr: f64,
    /// Sample size; 0 means population-only.
    #[serde(default)]
    pub n: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub model_error: Option<MinorFactorSettings>,
    #[serde(default)]
    pub master_seed: u64,
}

fn default_q() -> usize {
    GRID_Q
}
fn default_replications() -> usize {
    1
}

impl SimulationCondition {
    pub fn population(index: usize, loads_per_factor: usize, l: f64, sl: f64, r: f64) -> Self {
        Self {
            index,
            q: GRID_Q,
            loads_per_factor,
            main_loading: l,
            secondary_loading: sl,
            factor_corr: r,
            n: 0,
            replications: 1,
            model_error: None,
            master_seed: 0,
        }
    }

    pub fn p(&self) -> usize {
        self.q * self.loads_per_factor
    }

    pub fn is_population_only(&self) -> bool {
        self.n == 0
    }

    pub fn label(&self) -> String {
        let mut s = format!(
            "#{} q={} p/q={} l={:.2} sl={:.2} r={:.2}",
            self.index, self.q, self.loads_per_factor, self.main_loading, self.secondary_loading, self.factor_corr
        );
        if self.n > 0 {
            s.push_str(&format!(" n={} reps={}", self.n, self.replications));
        }
        if self.model_error.is_some() {
            s.push_str(" model-error");
        }
        s
    }

    /// Structural checks; in `strict` mode the grid values must come from the
    /// published design.
    pub fn check(&self, strict: bool) -> Result<()> {
        let fail = |reason: String| Err(Error::InadmissibleCondition { label: self.label(), reason });
        if self.q == 0 || self.loads_per_factor == 0 {
            return fail("q and loads_per_factor must be positive".into());
        }
        if self.n > 0 && self.replications == 0 {
            return fail("sampled conditions need at least one replication".into());
        }
        if self.n > 0 && self.n <= self.p() {
            return fail(format!("n = {} must exceed p = {}", self.n, self.p()));
        }
        if strict {
            let in_set = |v: f64, set: &[f64]| set.iter().any(|s| (s - v).abs() < 1e-12);
            if self.q != GRID_Q
                || !GRID_LOADS_PER_FACTOR.contains(&self.loads_per_factor)
                || !in_set(self.main_loading, &GRID_MAIN_LOADINGS)
                || !in_set(self.secondary_loading, &GRID_SECONDARY_LOADINGS)
                || !in_set(self.factor_corr, &GRID_FACTOR_CORRS)
            {
                return fail("values outside the published grid".into());
            }
        }
        Ok(())
    }
}

/// The 40 population cells: `p/q x l x sl x r`, in that nesting order.
pub fn study1_grid() -> Vec<SimulationCondition> {
    let mut out = Vec::with_capacity(40);
    for &k in &GRID_LOADS_PER_FACTOR {
        for &l in &GRID_MAIN_LOADINGS {
            for &sl in &GRID_SECONDARY_LOADINGS {
                for &r in &GRID_FACTOR_CORRS {
                    out.push(SimulationCondition::population(out.len(), k, l, sl, r));
                }
            }
        }
    }
    out
}

/// Four corner cells at `p/q = 5`: `l in {.4, .8}` crossed with
/// `(sl, r) in {(0, 0), (.1, .3)}`, sampled at `n` with `replications`.
pub fn corner_cells(
    n: usize,
    replications: usize,
    model_error: Option<MinorFactorSettings>,
) -> Vec<SimulationCondition> {
    let mut out = Vec::with_capacity(4);
    for &l in &[0.40, 0.80] {
        for &(sl, r) in &[(0.0, 0.0), (0.10, 0.30)] {
            let mut c = SimulationCondition::population(out.len(), 5, l, sl, r);
            c.n = n;
            c.replications = replications;
            c.model_error = model_error;
            out.push(c);
        }
    }
    out
}

/// All 40 cells at each of `sample_sizes`.
pub fn full_sampled_grid(
    sample_sizes: &[usize],
    replications: usize,
    model_error: Option<MinorFactorSettings>,
) -> Vec<SimulationCondition> {
    let mut out = Vec::new();
    for &n in sample_sizes {
        for mut c in study1_grid() {
            c.index = out.len();
            c.n = n;
            c.replications = replications;
            c.model_error = model_error;
            out.push(c);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Study1,
    Study2Desk,
    Study3Desk,
    Study2Full,
    Study3Full,
}

impl Preset {
    pub const ALL: [Preset; 5] =
        [Preset::Study1, Preset::Study2Desk, Preset::Study3Desk, Preset::Study2Full, Preset::Study3Full];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Study1 => "study1",
            Preset::Study2Desk => "study2-desk",
            Preset::Study3Desk => "study3-desk",
            Preset::Study2Full => "study2-full",
            Preset::Study3Full => "study3-full",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn conditions(self) -> Vec<SimulationCondition> {
        match self {
            Preset::Study1 => study1_grid(),
            Preset::Study2Desk => corner_cells(500, 100, None),
            Preset::Study3Desk => corner_cells(500, 100, Some(MinorFactorSettings::default())),
            Preset::Study2Full => full_sampled_grid(&[500, 1000], 1000, None),
            Preset::Study3Full => full_sampled_grid(&[500, 1000], 1000, Some(MinorFactorSettings::default())),
        }
    }
}

/// Block-assigned salient loadings `l`, every other cell `+-sl` with sign
/// `+` when `item + factor` is even, uniform factor correlation `r`.
pub fn make_population_model(c: &SimulationCondition) -> Result<FactorModel> {
    c.check(false)?;
    let (p, q, k) = (c.p(), c.q, c.loads_per_factor);
    let lambda = DMatrix::from_fn(p, q, |i, j| {
        if i / k == j {
            c.main_loading
        } else if (i + j) % 2 == 0 {
            c.secondary_loading
        } else {
            -c.secondary_loading
        }
    });
    let phi = DMatrix::from_fn(q, q, |i, j| if i == j { 1.0 } else { c.factor_corr });
    let model = FactorModel::standardized(lambda, phi)?;
    let violations = validate_model(&model);
    if !violations.is_empty() {
        let reason = violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
        return Err(Error::InadmissibleCondition { label: c.label(), reason });
    }
    reconstruct_sigma(&model).map_err(|e| Error::InadmissibleCondition { label: c.label(), reason: e.to_string() })?;
    Ok(model)
}
