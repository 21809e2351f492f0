//! Run configuration: a single TOML file with nested sections, every field
//! defaulted so `--print-config` documents a complete run.

use anyhow::{bail, Context, Result};
use gibbsim_core::models::Model;
use gibbsim_core::partition::{GibbsSpec, SeriesOptions, ZMethod};
use gibbsim_core::poisson::RadiusLaw;
use gibbsim_core::space::{Configuration, Point, Window};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub window: WindowConfig,
    pub radius_law: RadiusLawConfig,
    pub run: RunSection,
    pub estimator: EstimatorConfig,
    pub couple: CoupleConfig,
    pub percolate: PercolateConfig,
    pub decay: DecayConfig,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig::default(),
            window: WindowConfig::default(),
            radius_law: RadiusLawConfig::default(),
            run: RunSection::default(),
            estimator: EstimatorConfig::default(),
            couple: CoupleConfig::default(),
            percolate: PercolateConfig::default(),
            decay: DecayConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// ideal | hard-sphere | strauss | crcm | area-interaction
    pub name: String,
    pub beta: f64,
    pub q: f64,
    pub theta1: f64,
    pub theta2: Option<f64>,
    pub h_min: f64,
    pub area_budget: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            name: "hard-sphere".into(),
            beta: 0.5,
            q: 2.0,
            theta1: 0.1,
            theta2: None,
            h_min: 0.0,
            area_budget: 4096,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub r_max: f64,
    pub wbits: u32,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            lo: vec![0.0],
            hi: vec![1.0],
            r_max: 0.25,
            wbits: 32,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadiusLawConfig {
    /// delta | uniform | truncated-exp
    pub kind: String,
    pub radius: f64,
    pub lo: f64,
    pub hi: f64,
    pub rate: f64,
    pub knots: usize,
}

impl Default for RadiusLawConfig {
    fn default() -> Self {
        RadiusLawConfig {
            kind: "delta".into(),
            radius: 0.2,
            lo: 0.0,
            hi: 0.25,
            rate: 8.0,
            knots: 129,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub lambda: f64,
    /// Dominating intensity; omit to use the model's domination level.
    pub alpha: Option<f64>,
    pub seed: u64,
    pub reps: u64,
    /// Worker threads; replicate outputs merge in index order either way.
    pub parallel: usize,
    /// thin | rejection
    pub sampler: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            lambda: 0.5,
            alpha: None,
            seed: 7,
            reps: 100,
            parallel: 1,
            sampler: "thin".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// exact1d | series
    pub method: String,
    pub budget_per_term: usize,
    pub tail_tol: f64,
    pub n_cap: usize,
    pub region_mc: usize,
    pub bias_budget: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            method: "exact1d".into(),
            budget_per_term: 256,
            tail_tol: 1e-6,
            n_cap: 24,
            region_mc: 4096,
            bias_budget: 1e-2,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoupleConfig {
    /// Boundary points as [x_1, .., x_d, radius] rows.
    pub gamma1: Vec<Vec<f64>>,
    pub gamma2: Vec<Vec<f64>>,
    pub depth_cap: usize,
    pub shared_streams: bool,
}

impl Default for CoupleConfig {
    fn default() -> Self {
        CoupleConfig {
            gamma1: vec![vec![1.0625, 0.125]],
            gamma2: vec![],
            depth_cap: 10_000,
            shared_streams: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PercolateConfig {
    pub alphas: Vec<f64>,
    pub distances: Vec<f64>,
    pub fit_decay: bool,
    pub estimate_threshold: bool,
    pub threshold_sizes: Vec<f64>,
    pub threshold_bracket: Vec<f64>,
    pub threshold_reps: u64,
    pub threshold_bisections: usize,
    pub threshold_bootstrap: usize,
}

impl Default for PercolateConfig {
    fn default() -> Self {
        PercolateConfig {
            alphas: vec![0.6],
            distances: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            fit_decay: true,
            estimate_threshold: false,
            threshold_sizes: vec![2.0, 4.0],
            threshold_bracket: vec![0.5, 2.5],
            threshold_reps: 300,
            threshold_bisections: 7,
            threshold_bootstrap: 3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    pub cell_len: f64,
    pub separations: Vec<f64>,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            cell_len: 0.1,
            separations: vec![0.4, 0.55, 0.7, 0.85],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub reps: u64,
    pub plant_violation: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            reps: 2000,
            plant_violation: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn build_model(&self) -> Result<Model> {
        let m = &self.model;
        Ok(match m.name.as_str() {
            "ideal" => Model::Ideal,
            "hard-sphere" => Model::HardSphere,
            "strauss" => Model::strauss(m.beta).map_err(anyhow::Error::msg)?,
            "crcm" => Model::crcm(m.q).map_err(anyhow::Error::msg)?,
            "area-interaction" => {
                Model::area_interaction(m.theta1, m.theta2, m.h_min, m.area_budget)
                    .map_err(anyhow::Error::msg)?
            }
            other => bail!("model.name: unknown model '{other}'"),
        })
    }

    pub fn build_window(&self) -> Result<Window> {
        let w = &self.window;
        Window::new(&w.lo, &w.hi, w.r_max, w.wbits)
            .map_err(|e| anyhow::anyhow!("window: {e}"))
    }

    pub fn build_law(&self) -> Result<RadiusLaw> {
        let l = &self.radius_law;
        Ok(match l.kind.as_str() {
            "delta" => RadiusLaw::Delta(l.radius),
            "uniform" => {
                RadiusLaw::uniform(l.lo, l.hi).map_err(|e| anyhow::anyhow!("radius_law: {e}"))?
            }
            "truncated-exp" => RadiusLaw::truncated_exp(l.rate, self.window.r_max, l.knots)
                .map_err(|e| anyhow::anyhow!("radius_law: {e}"))?,
            other => bail!("radius_law.kind: unknown kind '{other}'"),
        })
    }

    pub fn build_spec(&self) -> Result<GibbsSpec> {
        GibbsSpec::new(
            self.build_model()?,
            self.build_window()?,
            self.build_law()?,
            self.run.lambda,
            self.run.alpha,
        )
        .map_err(|e| anyhow::anyhow!("run: {e}"))
    }

    pub fn z_method(&self) -> Result<ZMethod> {
        Ok(match self.estimator.method.as_str() {
            "exact1d" => ZMethod::Exact1d,
            "series" => ZMethod::SeriesMc(SeriesOptions {
                budget_per_term: self.estimator.budget_per_term,
                tail_tol: self.estimator.tail_tol,
                n_cap: self.estimator.n_cap,
                region_mc: self.estimator.region_mc,
                max_tries: 100_000,
            }),
            other => bail!("estimator.method: unknown method '{other}'"),
        })
    }

    pub fn boundary(&self, rows: &[Vec<f64>]) -> Result<Configuration> {
        let d = self.window.lo.len();
        let mut points = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d + 1 {
                bail!(
                    "boundary row {i}: expected {} numbers ([x.., radius]), got {}",
                    d + 1,
                    row.len()
                );
            }
            points.push(
                Point::quantized(&row[..d], row[d], self.window.wbits)
                    .map_err(|e| anyhow::anyhow!("boundary row {i}: {e}"))?,
            );
        }
        Configuration::new(points).map_err(|e| anyhow::anyhow!("boundary: {e}"))
    }
}
