//! Beer-Lambert synthetic spectra.
//!
//! Each juice is a mixture of absorbing components. At every wavelength the
//! absorbance is `A = Σ ε(λ)·l·c` over components, plus optional additive
//! Gaussian instrument noise. Attenuation curves are sums of Gaussian bands
//! so the location of any injected signal is known exactly.

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, Sample, SampleMetadata, SensoryLabels, Spectrum, WavelengthGrid};
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("infeasible synthetic configuration: {0}")]
    ConfigInfeasible(String),
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("generated dataset failed validation: {0}")]
    Invalid(#[from] crate::dataset::DatasetError),
}

/// One Gaussian absorption band of an attenuation curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPeak {
    pub center_nm: f64,
    /// Standard deviation of the band, nm.
    pub width_nm: f64,
    /// Molar attenuation at the band center, L·mol⁻¹·cm⁻¹.
    pub height: f64,
}

/// An absorbing species with its attenuation curve sampled on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    epsilon: Vec<f64>,
}

impl Component {
    pub fn new(name: impl Into<String>, epsilon: Vec<f64>) -> Result<Self, SynthError> {
        let name = name.into();
        if epsilon.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(SynthError::InvalidMixture(format!(
                "component `{name}` has a negative or non-finite attenuation coefficient"
            )));
        }
        Ok(Self { name, epsilon })
    }

    pub fn from_peaks(
        name: impl Into<String>,
        grid: &WavelengthGrid,
        peaks: &[GaussianPeak],
    ) -> Result<Self, SynthError> {
        let epsilon = grid
            .wavelengths()
            .map(|nm| {
                peaks
                    .iter()
                    .map(|p| {
                        let z = (nm as f64 - p.center_nm) / p.width_nm;
                        p.height * (-0.5 * z * z).exp()
                    })
                    .sum()
            })
            .collect();
        Self::new(name, epsilon)
    }

    pub fn epsilon(&self) -> &[f64] {
        &self.epsilon
    }
}

/// Components with their concentrations (mol/L), path length and noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    components: Vec<(Component, f64)>,
    path_length_cm: f64,
    noise_sd: f64,
}

impl MixtureSpec {
    pub fn new(components: Vec<(Component, f64)>, path_length_cm: f64, noise_sd: f64) -> Result<Self, SynthError> {
        let Some((first, _)) = components.first() else {
            return Err(SynthError::InvalidMixture("no components".into()));
        };
        let len = first.epsilon.len();
        for (c, conc) in &components {
            if c.epsilon.len() != len {
                return Err(SynthError::InvalidMixture(format!(
                    "component `{}` has {} grid points, expected {len}",
                    c.name,
                    c.epsilon.len()
                )));
            }
            if !conc.is_finite() || *conc < 0.0 {
                return Err(SynthError::InvalidMixture(format!(
                    "concentration of `{}` must be finite and >= 0",
                    c.name
                )));
            }
        }
        if !(path_length_cm.is_finite() && path_length_cm > 0.0) {
            return Err(SynthError::InvalidMixture("path length must be > 0".into()));
        }
        if !(noise_sd.is_finite() && noise_sd >= 0.0) {
            return Err(SynthError::InvalidMixture("noise sd must be >= 0".into()));
        }
        Ok(Self {
            components,
            path_length_cm,
            noise_sd,
        })
    }
}

/// Absorbance spectrum of a mixture. The rng is untouched when `noise_sd` is 0.
pub fn beer_lambert_absorbance<R: Rng + ?Sized>(spec: &MixtureSpec, rng: &mut R) -> Spectrum {
    let len = spec.components[0].0.epsilon.len();
    let mut absorbance = vec![0.0; len];
    for (component, conc) in &spec.components {
        for (a, eps) in absorbance.iter_mut().zip(&component.epsilon) {
            *a += eps * spec.path_length_cm * conc;
        }
    }
    if spec.noise_sd > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sd).expect("noise sd validated");
        for a in &mut absorbance {
            *a += normal.sample(rng);
        }
    }
    Spectrum::from_raw(absorbance)
}

/// `intercept + Σ coefficient·concentration`, clipped to the sensory scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineResponse {
    pub intercept: f64,
    pub coefficients: Vec<(String, f64)>,
}

impl AffineResponse {
    pub fn new(intercept: f64, coefficients: &[(&str, f64)]) -> Self {
        Self {
            intercept,
            coefficients: coefficients.iter().map(|(n, c)| (n.to_string(), *c)).collect(),
        }
    }

    fn evaluate(&self, names: &[String], concentrations: &[f64]) -> f64 {
        let raw = self.intercept
            + self
                .coefficients
                .iter()
                .map(|(name, coef)| {
                    names
                        .iter()
                        .position(|n| n == name)
                        .map_or(0.0, |k| coef * concentrations[k])
                })
                .sum::<f64>();
        raw.clamp(0.0, 9.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelResponse {
    pub astringency: AffineResponse,
    pub bitterness: AffineResponse,
    pub herbaceous: AffineResponse,
}

impl Default for LabelResponse {
    fn default() -> Self {
        Self {
            astringency: AffineResponse::new(0.5, &[(TANNIN, 6.0), ("phenolic", 1.0)]),
            bitterness: AffineResponse::new(0.5, &[(TANNIN, 7.0)]),
            herbaceous: AffineResponse::new(7.0, &[("hydroxycinnamate", -2.5), (TANNIN, -2.0)]),
        }
    }
}

/// Name of the component that drives the sensory labels.
pub const TANNIN: &str = "tannin";

const ORIGIN_COMPONENTS: [(&str, f64, f64, f64); 4] = [
    // name, center nm, width nm, base concentration
    ("phenolic", 280.0, 15.0, 0.6),
    ("hydroxycinnamate", 320.0, 18.0, 0.5),
    ("flavonol", 360.0, 20.0, 0.3),
    ("browning", 430.0, 40.0, 0.2),
];

/// Parameters of a synthetic juice study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_juices: usize,
    pub replicates_per_juice: usize,
    pub n_regions: usize,
    pub n_vineyards: usize,
    /// Additive instrument noise, AU.
    pub noise_sd: f64,
    pub path_length_cm: f64,
    /// Center of the tannin band that carries the sensory signal.
    pub informative_band_nm: f64,
    /// Standard deviation of the tannin band, nm.
    pub informative_band_width_nm: f64,
    /// Log-scale spread of region profiles; vineyards get a third of it.
    pub origin_separation: f64,
    /// Log-scale juice-to-juice variation within a vineyard.
    pub juice_variation: f64,
    pub label_response: LabelResponse,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_juices: 31,
            replicates_per_juice: 3,
            n_regions: 2,
            n_vineyards: 4,
            noise_sd: 0.005,
            path_length_cm: 1.0,
            informative_band_nm: 204.0,
            informative_band_width_nm: 1.5,
            origin_separation: 0.6,
            juice_variation: 0.08,
            label_response: LabelResponse::default(),
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |m: &str| Err(SynthError::ConfigInfeasible(m.to_string()));
        if self.n_juices == 0 || self.replicates_per_juice == 0 {
            return fail("juice and replicate counts must be >= 1");
        }
        if self.n_regions == 0 {
            return fail("at least one region is required");
        }
        if self.n_vineyards < self.n_regions {
            return fail("vineyards cannot be nested into regions: need n_vineyards >= n_regions");
        }
        if self.n_juices < self.n_vineyards {
            return fail("every vineyard needs at least one juice: need n_juices >= n_vineyards");
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return fail("noise_sd must be >= 0");
        }
        if !(self.path_length_cm.is_finite() && self.path_length_cm > 0.0) {
            return fail("path length must be > 0");
        }
        if !(self.informative_band_width_nm.is_finite() && self.informative_band_width_nm > 0.0) {
            return fail("informative band width must be > 0");
        }
        if !(self.origin_separation.is_finite() && self.juice_variation.is_finite()) {
            return fail("variation parameters must be finite");
        }
        Ok(())
    }

    /// The component library: tannin band, a broad background and four
    /// origin-dependent bands.
    pub fn components(&self, grid: &WavelengthGrid) -> Result<Vec<Component>, SynthError> {
        let mut out = vec![
            Component::from_peaks(
                TANNIN,
                grid,
                &[GaussianPeak {
                    center_nm: self.informative_band_nm,
                    width_nm: self.informative_band_width_nm,
                    height: 1.0,
                }],
            )?,
            Component::from_peaks(
                "background",
                grid,
                &[GaussianPeak {
                    center_nm: 200.0,
                    width_nm: 250.0,
                    height: 0.6,
                }],
            )?,
        ];
        for (name, center, width, _) in ORIGIN_COMPONENTS {
            out.push(Component::from_peaks(
                name,
                grid,
                &[GaussianPeak {
                    center_nm: center,
                    width_nm: width,
                    height: 1.0,
                }],
            )?);
        }
        Ok(out)
    }
}

fn id_width(count: usize) -> usize {
    count.to_string().len().max(2)
}

/// Generates a dataset of `n_juices × replicates_per_juice` samples on the
/// standard grid. Deterministic in `config.seed`.
pub fn generate_synthetic_dataset(config: &SynthConfig) -> Result<Dataset, SynthError> {
    config.validate()?;
    let grid = WavelengthGrid::STANDARD;
    let components = config.components(&grid)?;
    let names: Vec<String> = components.iter().map(|c| c.name.clone()).collect();
    let standard = Normal::new(0.0, 1.0).expect("unit normal");

    // Region profiles, then vineyard offsets nested inside them.
    let mut origin_rng = rng::stream(config.seed, 0);
    let region_log: Vec<Vec<f64>> = (0..config.n_regions)
        .map(|r| {
            ORIGIN_COMPONENTS
                .iter()
                .enumerate()
                .map(|(k, _)| {
                    // Alternating signs keep two-region studies well apart.
                    let sign = if (r + k) % 2 == 0 { 1.0 } else { -1.0 };
                    config.origin_separation * (sign + 0.5 * standard.sample(&mut origin_rng))
                })
                .collect()
        })
        .collect();
    let vineyard_region: Vec<usize> = (0..config.n_vineyards).map(|v| v % config.n_regions).collect();
    let vineyard_log: Vec<Vec<f64>> = vineyard_region
        .iter()
        .map(|&r| {
            region_log[r]
                .iter()
                .map(|&m| m + config.origin_separation / 3.0 * standard.sample(&mut origin_rng))
                .collect()
        })
        .collect();

    let tannin = Uniform::new(0.1, 1.1).expect("valid range");
    let background = Uniform::new(0.4, 1.0).expect("valid range");
    let juice_width = id_width(config.n_juices);
    let mut samples = Vec::with_capacity(config.n_juices * config.replicates_per_juice);

    for j in 0..config.n_juices {
        let mut juice_rng = rng::stream(config.seed, 1 + j as u64);
        let vineyard = j % config.n_vineyards;
        let region = vineyard_region[vineyard];

        let mut concentrations = vec![tannin.sample(&mut juice_rng), background.sample(&mut juice_rng)];
        for (k, (_, _, _, base)) in ORIGIN_COMPONENTS.iter().enumerate() {
            let log = vineyard_log[vineyard][k] + config.juice_variation * standard.sample(&mut juice_rng);
            concentrations.push(base * log.exp());
        }

        let region_shift = if region.is_multiple_of(2) { 0.0 } else { 1.0 };
        let tss = 19.0 + 1.5 * region_shift + 0.8 * standard.sample(&mut juice_rng);
        let ph = 3.2 + 0.15 * region_shift + 0.05 * standard.sample(&mut juice_rng);
        let ta = 7.5 - 0.8 * region_shift + 0.4 * standard.sample(&mut juice_rng);
        let harvest = if juice_rng.random_bool(0.5) { "hand" } else { "machine" };

        let labels = SensoryLabels {
            astringency: Some(round6(
                config.label_response.astringency.evaluate(&names, &concentrations),
            )),
            bitterness: Some(round6(
                config.label_response.bitterness.evaluate(&names, &concentrations),
            )),
            herbaceous: Some(round6(
                config.label_response.herbaceous.evaluate(&names, &concentrations),
            )),
        };

        let mixture = MixtureSpec::new(
            components.iter().cloned().zip(concentrations.iter().copied()).collect(),
            config.path_length_cm,
            config.noise_sd,
        )?;
        let juice_id = format!("J{:0juice_width$}", j + 1);
        for r in 0..config.replicates_per_juice {
            let index = (j * config.replicates_per_juice + r) as u64;
            let mut noise_rng = rng::stream(rng::derive_seed(config.seed, u64::MAX), index);
            let spectrum = beer_lambert_absorbance(&mixture, &mut noise_rng);
            samples.push(Sample {
                sample_id: format!("{juice_id}-{}", r + 1),
                spectrum: Spectrum::from_raw(spectrum.values().iter().map(|&v| round6(v)).collect()),
                metadata: SampleMetadata {
                    juice_id: juice_id.clone(),
                    variety: "Chardonnay".into(),
                    region: format!("R{}", region + 1),
                    vineyard: format!("V{}", vineyard + 1),
                    block: format!("V{}-B{}", vineyard + 1, j % 2 + 1),
                    harvest_type: harvest.into(),
                    replicate: Some(r as u32 + 1),
                    tss: Some(round6(tss.max(0.0))),
                    ph: Some(round6(ph.clamp(0.5, 13.5))),
                    ta: Some(round6(ta.max(0.0))),
                },
                labels,
            });
        }
    }
    Ok(Dataset::new(grid, samples)?)
}

/// Rounds to the six significant digits the CSV format keeps, so a
/// generated dataset survives a write/parse round trip unchanged.
fn round6(v: f64) -> f64 {
    crate::dataset::format_decimal(v).parse().expect("decimal parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::write_dataset_csv;

    fn single(grid: &WavelengthGrid, nm: u32, eps: f64) -> Component {
        let mut e = vec![0.0; grid.len()];
        e[grid.index_of(nm).unwrap()] = eps;
        Component::new("x", e).unwrap()
    }

    #[test]
    fn zero_concentration_zero_spectrum() {
        let grid = WavelengthGrid::STANDARD;
        let cfg = SynthConfig::default();
        let comps = cfg.components(&grid).unwrap();
        let spec = MixtureSpec::new(comps.into_iter().map(|c| (c, 0.0)).collect(), 1.0, 0.0).unwrap();
        let a = beer_lambert_absorbance(&spec, &mut rng::rng_from_seed(0));
        assert!(a.values().iter().all(|&v| v == 0.0));
        assert_eq!(a.len(), 201);
    }

    #[test]
    fn direct_product() {
        let grid = WavelengthGrid::STANDARD;
        let spec = MixtureSpec::new(vec![(single(&grid, 300, 0.8), 2.0)], 1.0, 0.0).unwrap();
        let a = beer_lambert_absorbance(&spec, &mut rng::rng_from_seed(0));
        assert!((a.values()[grid.index_of(300).unwrap()] - 1.6).abs() < 1e-15);
    }

    #[test]
    fn doubling_concentrations_doubles_absorbance() {
        let grid = WavelengthGrid::STANDARD;
        let comps = SynthConfig::default().components(&grid).unwrap();
        let concs = [0.3, 0.7, 0.1, 0.2, 0.4, 0.05];
        let once = MixtureSpec::new(comps.iter().cloned().zip(concs).collect(), 1.0, 0.0).unwrap();
        let twice = MixtureSpec::new(comps.iter().cloned().zip(concs.map(|c| 2.0 * c)).collect(), 1.0, 0.0).unwrap();
        let mut r = rng::rng_from_seed(0);
        let a = beer_lambert_absorbance(&once, &mut r);
        let b = beer_lambert_absorbance(&twice, &mut r);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((2.0 * x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn two_component_additivity() {
        let grid = WavelengthGrid::STANDARD;
        let comps = SynthConfig::default().components(&grid).unwrap();
        let mut r = rng::rng_from_seed(0);
        let a = beer_lambert_absorbance(
            &MixtureSpec::new(vec![(comps[0].clone(), 0.7)], 1.0, 0.0).unwrap(),
            &mut r,
        );
        let b = beer_lambert_absorbance(
            &MixtureSpec::new(vec![(comps[3].clone(), 0.4)], 1.0, 0.0).unwrap(),
            &mut r,
        );
        let ab = beer_lambert_absorbance(
            &MixtureSpec::new(vec![(comps[0].clone(), 0.7), (comps[3].clone(), 0.4)], 1.0, 0.0).unwrap(),
            &mut r,
        );
        for i in 0..grid.len() {
            assert!((a.values()[i] + b.values()[i] - ab.values()[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn invalid_mixtures() {
        let grid = WavelengthGrid::STANDARD;
        assert!(MixtureSpec::new(vec![], 1.0, 0.0).is_err());
        assert!(MixtureSpec::new(vec![(single(&grid, 300, 1.0), -1.0)], 1.0, 0.0).is_err());
        assert!(MixtureSpec::new(vec![(single(&grid, 300, 1.0), 1.0)], 0.0, 0.0).is_err());
        assert!(Component::new("bad", vec![-1.0]).is_err());
    }

    #[test]
    fn default_shape_is_93_by_31() {
        let ds = generate_synthetic_dataset(&SynthConfig::default()).unwrap();
        assert_eq!(ds.len(), 93);
        assert_eq!(ds.group_by_juice().len(), 31);
    }

    #[test]
    fn same_seed_same_bytes() {
        let cfg = SynthConfig::default();
        let a = write_dataset_csv(&generate_synthetic_dataset(&cfg).unwrap());
        let b = write_dataset_csv(&generate_synthetic_dataset(&cfg).unwrap());
        assert_eq!(a, b);
        let other = SynthConfig { seed: 43, ..cfg };
        assert_ne!(a, write_dataset_csv(&generate_synthetic_dataset(&other).unwrap()));
    }

    #[test]
    fn noiseless_replicates_are_identical() {
        let cfg = SynthConfig {
            noise_sd: 0.0,
            ..Default::default()
        };
        let ds = generate_synthetic_dataset(&cfg).unwrap();
        for group in ds.group_by_juice() {
            let first = &ds.samples()[group.indices[0]].spectrum;
            for &i in &group.indices[1..] {
                assert_eq!(&ds.samples()[i].spectrum, first);
            }
        }
    }

    #[test]
    fn noisy_replicates_differ() {
        let ds = generate_synthetic_dataset(&SynthConfig::default()).unwrap();
        assert_ne!(ds.samples()[0].spectrum, ds.samples()[1].spectrum);
    }

    #[test]
    fn labels_bounded_and_vineyards_nested() {
        for seed in 0..5 {
            let cfg = SynthConfig {
                seed,
                n_regions: 3,
                n_vineyards: 7,
                ..Default::default()
            };
            let ds = generate_synthetic_dataset(&cfg).unwrap();
            let mut region_of = std::collections::HashMap::new();
            for s in ds.samples() {
                for v in [s.labels.astringency, s.labels.bitterness, s.labels.herbaceous] {
                    let v = v.unwrap();
                    assert!((0.0..=9.0).contains(&v));
                }
                let prev = region_of.insert(s.metadata.vineyard.clone(), s.metadata.region.clone());
                if let Some(prev) = prev {
                    assert_eq!(prev, s.metadata.region);
                }
            }
        }
    }

    #[test]
    fn infeasible_configs() {
        let bad = SynthConfig {
            n_regions: 3,
            n_vineyards: 2,
            ..Default::default()
        };
        assert!(matches!(
            generate_synthetic_dataset(&bad),
            Err(SynthError::ConfigInfeasible(_))
        ));
        let bad = SynthConfig {
            n_juices: 3,
            ..Default::default()
        };
        assert!(matches!(
            generate_synthetic_dataset(&bad),
            Err(SynthError::ConfigInfeasible(_))
        ));
    }
}
