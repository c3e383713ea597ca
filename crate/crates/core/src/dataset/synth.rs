use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ColumnRole, ColumnSpec, DataError, Dataset, DatasetSchema, TargetScale};
use crate::linalg::Matrix;
use crate::rng;

/// Synthetic S-N data drawn from a Basquin law with log-normal scatter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    /// Basquin coefficient (MPa).
    pub c: f64,
    /// Basquin exponent, negative.
    pub m: f64,
    /// Standard deviation of the additive noise on log10 life.
    pub noise_sigma: f64,
    pub n: usize,
    /// Uniform stress range (MPa).
    pub stress_range: (f64, f64),
    /// Number of irrelevant uniform [0, 1] feature columns.
    pub n_nuisance: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self { c: 2000.0, m: -0.1, noise_sigma: 0.05, n: 300, stress_range: (400.0, 1000.0), n_nuisance: 0, seed: 0 }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |m: String| Err(DataError::InvalidSpec(m));
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("c must be positive, got {}", self.c));
        }
        if !(self.m < 0.0 && self.m.is_finite()) {
            return bad(format!("m must be negative, got {}", self.m));
        }
        let (lo, hi) = self.stress_range;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return bad(format!("stress range must satisfy 0 < low < high, got ({lo}, {hi})"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma must be >= 0, got {}", self.noise_sigma));
        }
        Ok(())
    }

    pub fn schema(&self) -> DatasetSchema {
        let mut columns = vec![ColumnSpec { name: "stress".into(), role: ColumnRole::Condition }];
        columns.extend(
            (1..=self.n_nuisance).map(|i| ColumnSpec { name: format!("nuisance_{i}"), role: ColumnRole::Measurement }),
        );
        columns.push(ColumnSpec { name: "fatigue_life".into(), role: ColumnRole::Target });
        DatasetSchema::new(columns, "stress", "fatigue_life").expect("synthetic schema is valid")
    }

    fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        hex::encode(Sha256::digest(json.as_bytes()))[..16].to_string()
    }
}

/// Stresses uniform in `stress_range`; `life = (σ/c)^(1/m)·10^(noise·z)`
/// floored at one cycle; nuisance columns uniform on [0, 1].
pub fn synth_generate(spec: &SynthSpec) -> Result<Dataset, DataError> {
    spec.validate()?;
    let mut rng = rng::from_seed(spec.seed);
    let (lo, hi) = spec.stress_range;
    let p = 1 + spec.n_nuisance;
    let mut features = Matrix::zeros(spec.n, p);
    let mut life = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let stress = lo + (hi - lo) * rng.random::<f64>();
        let z: f64 = StandardNormal.sample(&mut rng);
        let row = features.row_mut(i);
        row[0] = stress;
        for v in &mut row[1..] {
            *v = rng.random::<f64>();
        }
        let scatter = if spec.noise_sigma == 0.0 { 1.0 } else { 10f64.powf(spec.noise_sigma * z) };
        life.push(((stress / spec.c).powf(1.0 / spec.m) * scatter).max(1.0));
    }
    Dataset::new(
        spec.schema(),
        features,
        Some(life),
        TargetScale::Cycles,
        format!("synthetic:{}", spec.fingerprint()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::basquin_fit;

    #[test]
    fn noiseless_rows_lie_on_the_curve() {
        let spec = SynthSpec { noise_sigma: 0.0, n: 50, n_nuisance: 2, ..Default::default() };
        let d = synth_generate(&spec).unwrap();
        let stress = d.stress().unwrap();
        for (s, n) in stress.iter().zip(d.target().unwrap()) {
            let back = spec.c * n.powf(spec.m);
            assert!((back - s).abs() <= 1e-9 * s);
        }
        for j in 1..3 {
            assert!(d.features().column(j).iter().all(|v| (0.0..1.0).contains(v)));
        }
        let pts: Vec<(f64, f64)> = stress.iter().copied().zip(d.target().unwrap().iter().copied()).collect();
        assert!((basquin_fit(&pts).unwrap().r2_loglog - 1.0).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_data() {
        let spec = SynthSpec { n_nuisance: 3, seed: 11, ..Default::default() };
        let a = synth_generate(&spec).unwrap();
        let b = synth_generate(&spec).unwrap();
        assert_eq!(a, b);
        let c = synth_generate(&SynthSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(a.features(), c.features());
    }

    #[test]
    fn invalid_specs() {
        for spec in [
            SynthSpec { m: 0.1, ..Default::default() },
            SynthSpec { c: -1.0, ..Default::default() },
            SynthSpec { stress_range: (500.0, 400.0), ..Default::default() },
            SynthSpec { noise_sigma: -0.1, ..Default::default() },
        ] {
            assert!(matches!(synth_generate(&spec), Err(DataError::InvalidSpec(_))));
        }
    }
}
