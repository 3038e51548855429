//! Simulation configuration: population shape, measurement process
//! parameters, replicate count, and seed.

use serde::{Deserialize, Serialize};

use crate::error::{DseError, Result};
use crate::sim::rng::{MAX_CELLS, MAX_REPLICATES};

/// A per-cell rate: one value everywhere, one per region (shared across
/// strata), or a full stratum-by-region grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateParam {
    Uniform { value: f64 },
    PerRegion { values: Vec<f64> },
    PerCell { values: Vec<Vec<f64>> },
}

impl RateParam {
    pub fn at(&self, stratum: usize, region: usize) -> f64 {
        match self {
            RateParam::Uniform { value } => *value,
            RateParam::PerRegion { values } => values[region],
            RateParam::PerCell { values } => values[stratum][region],
        }
    }

    fn check_shape(&self, n_strata: usize, n_regions: usize, name: &str) -> Result<()> {
        match self {
            RateParam::Uniform { .. } => Ok(()),
            RateParam::PerRegion { values } if values.len() == n_regions => Ok(()),
            RateParam::PerCell { values }
                if values.len() == n_strata && values.iter().all(|row| row.len() == n_regions) =>
            {
                Ok(())
            }
            _ => Err(DseError::InvalidConfig(format!(
                "{name}: shape does not match {n_strata} strata x {n_regions} regions"
            ))),
        }
    }

    fn check_range(
        &self,
        name: &str,
        n_strata: usize,
        n_regions: usize,
        ok: impl Fn(f64) -> bool,
        desc: &str,
    ) -> Result<()> {
        for s in 0..n_strata {
            for r in 0..n_regions {
                let v = self.at(s, r);
                if !ok(v) {
                    return Err(DseError::InvalidConfig(format!(
                        "{name}[{s}][{r}] = {v}: must be {desc}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-cell true population counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountParam {
    Uniform { value: u64 },
    PerRegion { values: Vec<u64> },
    PerCell { values: Vec<Vec<u64>> },
}

impl CountParam {
    pub fn at(&self, stratum: usize, region: usize) -> u64 {
        match self {
            CountParam::Uniform { value } => *value,
            CountParam::PerRegion { values } => values[region],
            CountParam::PerCell { values } => values[stratum][region],
        }
    }

    fn check_shape(&self, n_strata: usize, n_regions: usize, name: &str) -> Result<()> {
        match self {
            CountParam::Uniform { .. } => Ok(()),
            CountParam::PerRegion { values } if values.len() == n_regions => Ok(()),
            CountParam::PerCell { values }
                if values.len() == n_strata && values.iter().all(|row| row.len() == n_regions) =>
            {
                Ok(())
            }
            _ => Err(DseError::InvalidConfig(format!(
                "{name}: shape does not match {n_strata} strata x {n_regions} regions"
            ))),
        }
    }
}

/// How cell truths are produced: fixed values, or Poisson draws around
/// per-cell means (sampled once per run from the truth stream).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "snake_case")]
pub enum TruthSpec {
    Fixed(CountParam),
    Poisson(RateParam),
}

/// Full simulation configuration.
///
/// Imputation marks census-captured persons as insufficient-information
/// at `ii_rate` (plus `ii_late_rate` when the second pool is enabled);
/// marked persons join the census count but never the data-defined count
/// or the matching process. Erroneous enumerations arrive at `ee_rate`
/// per true person and inflate both census and data-defined counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_strata: usize,
    pub n_regions: usize,
    pub truth: TruthSpec,
    pub capture_prob: RateParam,
    pub ee_rate: RateParam,
    pub ii_rate: RateParam,
    /// Optional second imputation pool (late adds). Both pools land in
    /// the same II count; reports break out the pools separately.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ii_late_rate: Option<RateParam>,
    pub n_reps: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn n_cells(&self) -> usize {
        self.n_strata * self.n_regions
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_strata == 0 || self.n_regions == 0 {
            return Err(DseError::InvalidConfig(
                "n_strata and n_regions must be at least 1".to_string(),
            ));
        }
        if self.n_reps == 0 {
            return Err(DseError::InvalidConfig(
                "n_reps must be at least 1".to_string(),
            ));
        }
        if self.n_reps > MAX_REPLICATES {
            return Err(DseError::InvalidConfig(format!(
                "n_reps must not exceed {MAX_REPLICATES}"
            )));
        }
        if self.n_cells() as u64 > MAX_CELLS {
            return Err(DseError::InvalidConfig(format!(
                "stratum x region grid must not exceed {MAX_CELLS} cells"
            )));
        }
        let (ns, nr) = (self.n_strata, self.n_regions);
        match &self.truth {
            TruthSpec::Fixed(counts) => {
                counts.check_shape(ns, nr, "truth")?;
                let total: u64 = (0..ns)
                    .flat_map(|s| (0..nr).map(move |r| (s, r)))
                    .map(|(s, r)| counts.at(s, r))
                    .sum();
                if total == 0 {
                    return Err(DseError::InvalidConfig(
                        "total true population must be positive".to_string(),
                    ));
                }
            }
            TruthSpec::Poisson(means) => {
                means.check_shape(ns, nr, "truth")?;
                means.check_range("truth mean", ns, nr, |v| v > 0.0, "positive")?;
            }
        }
        self.capture_prob.check_shape(ns, nr, "capture_prob")?;
        self.capture_prob.check_range(
            "capture_prob",
            ns,
            nr,
            |v| v > 0.0 && v <= 1.0,
            "in (0, 1]",
        )?;
        self.ee_rate.check_shape(ns, nr, "ee_rate")?;
        self.ee_rate
            .check_range("ee_rate", ns, nr, |v| (0.0..1.0).contains(&v), "in [0, 1)")?;
        self.ii_rate.check_shape(ns, nr, "ii_rate")?;
        self.ii_rate
            .check_range("ii_rate", ns, nr, |v| (0.0..1.0).contains(&v), "in [0, 1)")?;
        if let Some(late) = &self.ii_late_rate {
            late.check_shape(ns, nr, "ii_late_rate")?;
            late.check_range(
                "ii_late_rate",
                ns,
                nr,
                |v| (0.0..1.0).contains(&v),
                "in [0, 1)",
            )?;
            for s in 0..ns {
                for r in 0..nr {
                    let total = self.ii_rate.at(s, r) + late.at(s, r);
                    if total >= 1.0 {
                        return Err(DseError::InvalidConfig(format!(
                            "ii_rate + ii_late_rate at [{s}][{r}] = {total}: must stay below 1"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> SimConfig {
        SimConfig {
            n_strata: 1,
            n_regions: 2,
            truth: TruthSpec::Fixed(CountParam::Uniform { value: 100 }),
            capture_prob: RateParam::Uniform { value: 0.9 },
            ee_rate: RateParam::Uniform { value: 0.01 },
            ii_rate: RateParam::PerRegion {
                values: vec![0.1, 0.02],
            },
            ii_late_rate: None,
            n_reps: 10,
            seed: 7,
        }
    }

    #[test]
    fn valid_config_passes() {
        base_config().validate().unwrap();
    }

    #[test]
    fn shape_and_range_violations_rejected() {
        let mut cfg = base_config();
        cfg.ii_rate = RateParam::PerRegion { values: vec![0.1] };
        assert!(cfg.validate().is_err());

        let mut cfg = base_config();
        cfg.capture_prob = RateParam::Uniform { value: 0.0 };
        assert!(cfg.validate().is_err());

        let mut cfg = base_config();
        cfg.ee_rate = RateParam::Uniform { value: 1.0 };
        assert!(cfg.validate().is_err());

        let mut cfg = base_config();
        cfg.n_reps = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = base_config();
        cfg.truth = TruthSpec::Fixed(CountParam::Uniform { value: 0 });
        assert!(cfg.validate().is_err());

        let mut cfg = base_config();
        cfg.ii_rate = RateParam::Uniform { value: 0.6 };
        cfg.ii_late_rate = Some(RateParam::Uniform { value: 0.5 });
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = base_config();
        let text = toml::to_string(&cfg).unwrap();
        let back: SimConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
