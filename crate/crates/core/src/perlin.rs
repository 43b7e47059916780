//! Abnormal banding patterns from thresholded 1D fractal gradient noise.
//!
//! Gradients are not drawn from a shared random generator. Each lattice
//! gradient is a pure function of `(seed, octave, lattice index)` through
//! chained splitmix64 finalizers, so a config reproduces the same vector
//! on every platform and in any evaluation order.

use serde::{Deserialize, Serialize};

use crate::banding::BandingPattern;
use crate::error::{Error, Result};

/// Re-seeding attempts before a single-valued pattern is returned as-is.
pub const MAX_ATTEMPTS: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerlinConfig {
    /// Pattern length `K`.
    pub length: usize,
    /// Lattice period of the first octave, in samples.
    pub scale: f64,
    pub octaves: u32,
    /// Amplitude ratio between successive octaves.
    pub persistence: f64,
    pub seed: u64,
    /// Samples strictly above this level become black bands.
    pub threshold: f64,
}

impl PerlinConfig {
    /// Defaults: `scale = K/8` (at least 2), two octaves, persistence 0.5,
    /// threshold 0.
    pub fn with_defaults(length: usize, seed: u64) -> Self {
        Self {
            length,
            scale: (length as f64 / 8.0).max(2.0),
            octaves: 2,
            persistence: 0.5,
            seed,
            threshold: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 1 {
            return Err(Error::InvalidConfig("perlin length must be >= 1".into()));
        }
        if !(self.scale >= 2.0) {
            return Err(Error::InvalidConfig(format!(
                "perlin scale must be >= 2, got {}",
                self.scale
            )));
        }
        if self.octaves < 1 {
            return Err(Error::InvalidConfig("perlin octaves must be >= 1".into()));
        }
        if !(self.persistence > 0.0 && self.persistence <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "perlin persistence must be in (0, 1], got {}",
                self.persistence
            )));
        }
        Ok(())
    }
}

/// Shape parameters of generated patterns, without length and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerlinDefaults {
    /// First-octave period as a fraction of the pattern length.
    pub scale_fraction: f64,
    pub octaves: u32,
    pub persistence: f64,
    pub threshold: f64,
}

impl Default for PerlinDefaults {
    fn default() -> Self {
        Self {
            scale_fraction: 1.0 / 8.0,
            octaves: 2,
            persistence: 0.5,
            threshold: 0.0,
        }
    }
}

impl PerlinDefaults {
    pub fn config(&self, length: usize, seed: u64) -> PerlinConfig {
        PerlinConfig {
            length,
            scale: (length as f64 * self.scale_fraction).max(2.0),
            octaves: self.octaves,
            persistence: self.persistence,
            seed,
            threshold: self.threshold,
        }
    }
}

/// splitmix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn hash3(seed: u64, octave: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ octave) ^ index)
}

fn unit_interval(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Gradient in [-1, 1) at an integer lattice point.
fn gradient(seed: u64, octave: u32, index: i64) -> f64 {
    2.0 * unit_interval(hash3(seed, u64::from(octave), index as u64)) - 1.0
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Lattice offset of an octave, in samples. The first octave sits on the
/// sample grid; later octaves are shifted by a seeded fraction of their
/// period so their lattices do not line up.
pub fn octave_offset(seed: u64, octave: u32, period: f64) -> f64 {
    if octave == 0 {
        0.0
    } else {
        unit_interval(hash3(seed, u64::from(octave), u64::MAX)) * period
    }
}

/// One octave of gradient noise at sample position `x`.
pub fn octave_noise(seed: u64, octave: u32, period: f64, x: f64) -> f64 {
    let u = (x + octave_offset(seed, octave, period)) / period;
    let i0 = u.floor();
    let t = u - i0;
    let g0 = gradient(seed, octave, i0 as i64);
    let g1 = gradient(seed, octave, i0 as i64 + 1);
    let a = g0 * t;
    let b = g1 * (t - 1.0);
    a + (b - a) * smoothstep(t)
}

/// Length-`K` fractal gradient noise: octave `o` has period
/// `scale / 2^o` and weight `persistence^o`.
pub fn perlin_1d(config: &PerlinConfig) -> Result<Vec<f64>> {
    config.validate()?;
    Ok((0..config.length)
        .map(|k| {
            let x = k as f64;
            (0..config.octaves)
                .map(|o| {
                    let period = config.scale / 2f64.powi(o as i32);
                    config.persistence.powi(o as i32) * octave_noise(config.seed, o, period, x)
                })
                .sum()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerlinPattern {
    pub pattern: BandingPattern,
    /// Seed that produced the returned pattern.
    pub seed_used: u64,
    /// Set when every attempt produced a single-valued pattern.
    pub degenerate: bool,
}

/// Threshold the noise into a banding pattern. Single-valued results are
/// retried with `seed + 1, seed + 2, ...` up to [`MAX_ATTEMPTS`] attempts
/// in total; the last one is returned with `degenerate` set.
pub fn generate_perlin_pattern(config: &PerlinConfig) -> Result<PerlinPattern> {
    config.validate()?;
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let seed = config.seed.wrapping_add(attempt);
        let noise = perlin_1d(&PerlinConfig { seed, ..*config })?;
        let pattern = BandingPattern::from_bools(noise.iter().map(|&v| v > config.threshold))?;
        let mixed = pattern.bits().contains(&1) && pattern.bits().contains(&0);
        if mixed {
            return Ok(PerlinPattern {
                pattern,
                seed_used: seed,
                degenerate: false,
            });
        }
        last = Some((pattern, seed));
    }
    let (pattern, seed_used) = last.expect("at least one attempt");
    log::warn!(
        "perlin pattern (length {}, seed {}) is single-valued after {MAX_ATTEMPTS} attempts",
        config.length,
        config.seed
    );
    Ok(PerlinPattern {
        pattern,
        seed_used,
        degenerate: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Sign flips between consecutive samples; an exact zero separates
    /// runs without counting as a flip.
    fn strict_sign_changes(v: &[f64]) -> usize {
        v.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
    }

    #[test]
    fn zero_at_lattice_points() {
        for seed in [0u64, 1, 42, u64::MAX] {
            for octave in 0..4 {
                let period = 16.0 / 2f64.powi(octave as i32);
                let off = octave_offset(seed, octave, period);
                for i in 0..5 {
                    let x = i as f64 * period - off;
                    assert!(octave_noise(seed, octave, period, x).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        let cfg = PerlinConfig::with_defaults(128, 7);
        assert_eq!(perlin_1d(&cfg).unwrap(), perlin_1d(&cfg).unwrap());
        assert_eq!(
            generate_perlin_pattern(&cfg).unwrap(),
            generate_perlin_pattern(&cfg).unwrap()
        );
    }

    #[test]
    fn single_octave_changes_sign_at_most_once_per_cell() {
        // 64 samples at period 16 span four lattice cells; gradient noise
        // has at most one interior root per cell and the lattice roots fall
        // exactly on samples.
        let mut worst = 0;
        for seed in 0..2000 {
            let cfg = PerlinConfig {
                length: 64,
                scale: 16.0,
                octaves: 1,
                persistence: 0.5,
                seed,
                threshold: 0.0,
            };
            worst = worst.max(strict_sign_changes(&perlin_1d(&cfg).unwrap()));
        }
        assert!(worst <= 5, "worst {worst}");
    }

    #[test]
    fn negative_infinity_threshold_is_all_black() {
        let cfg = PerlinConfig {
            threshold: f64::NEG_INFINITY,
            ..PerlinConfig::with_defaults(40, 3)
        };
        let out = generate_perlin_pattern(&cfg).unwrap();
        assert!(out.pattern.bits().iter().all(|&b| b == 1));
        assert!(out.degenerate);
        assert_eq!(out.seed_used, 3 + MAX_ATTEMPTS - 1);
    }

    #[test]
    fn high_threshold_gives_all_white_fallback() {
        let cfg = PerlinConfig {
            threshold: 10.0,
            ..PerlinConfig::with_defaults(64, 11)
        };
        let out = generate_perlin_pattern(&cfg).unwrap();
        assert!(out.pattern.bits().iter().all(|&b| b == 0));
        assert!(out.degenerate);
    }

    #[test]
    fn reseeds_single_valued_patterns() {
        // a length-1 pattern is always single-valued: every attempt is used
        let out = generate_perlin_pattern(&PerlinConfig::with_defaults(1, 5)).unwrap();
        assert!(out.degenerate);
        assert_eq!(out.pattern.len(), 1);
    }

    #[test]
    fn rejects_invalid_config() {
        let base = PerlinConfig::with_defaults(16, 0);
        for bad in [
            PerlinConfig { length: 0, ..base },
            PerlinConfig { scale: 1.5, ..base },
            PerlinConfig { octaves: 0, ..base },
            PerlinConfig { persistence: 0.0, ..base },
            PerlinConfig { persistence: 1.5, ..base },
        ] {
            assert!(matches!(perlin_1d(&bad), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn defaults_helper_matches_with_defaults() {
        assert_eq!(
            PerlinDefaults::default().config(128, 9),
            PerlinConfig::with_defaults(128, 9)
        );
    }

    #[test]
    fn default_patterns_have_long_runs() {
        let mut runs = 0usize;
        for seed in 0..1000 {
            let out = generate_perlin_pattern(&PerlinConfig::with_defaults(128, seed)).unwrap();
            runs += out.pattern.runs().len();
        }
        let mean = 128.0 * 1000.0 / runs as f64;
        eprintln!("mean run length {mean}");
        assert!(mean >= 6.0, "mean run length {mean}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn patterns_are_valid(len in 1usize..300, seed in any::<u64>()) {
                let out = generate_perlin_pattern(&PerlinConfig::with_defaults(len, seed)).unwrap();
                prop_assert_eq!(out.pattern.len(), len);
                prop_assert!(!out.pattern.runs().is_empty());
                prop_assert!(out.degenerate || out.pattern.runs().len() >= 2);
            }
        }
    }
}
