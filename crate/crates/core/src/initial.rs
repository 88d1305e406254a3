//! Initial data: peakon trains, DP shock peakons, momentum-built data and
//! seeded random fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::grid::{sample, Field, Grid};
use crate::spectral::SpectralWorkspace;

/// Peakons `Σ cᵢ e^{-|x - xᵢ|}`, optionally smoothed by a unit-mass Gaussian
/// whose standard deviation is `width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakonSpec {
    pub amplitudes: Vec<f64>,
    pub centers: Vec<f64>,
    pub width: f64,
}

impl PeakonSpec {
    pub fn new(amplitudes: Vec<f64>, centers: Vec<f64>, width: f64) -> Result<Self> {
        if amplitudes.len() != centers.len() {
            return Err(config_err(format!(
                "peakon spec has {} amplitudes but {} centers",
                amplitudes.len(),
                centers.len()
            )));
        }
        if !(width >= 0.0 && width.is_finite()) {
            return Err(config_err(format!(
                "mollification width must be >= 0, got {width}"
            )));
        }
        if amplitudes.iter().chain(&centers).any(|v| !v.is_finite()) {
            return Err(config_err("peakon amplitudes and centers must be finite"));
        }
        Ok(Self {
            amplitudes,
            centers,
            width,
        })
    }

    pub fn single(c: f64, center: f64, width: f64) -> Result<Self> {
        Self::new(vec![c], vec![center], width)
    }

    fn check_clearance(&self, grid: &Grid) -> Result<()> {
        let half = 0.5 * grid.length();
        let room = half - 10.0 * self.width;
        for &x in &self.centers {
            if !(x.abs() < half && x.abs() <= room) {
                return Err(config_err(format!(
                    "peakon center {x} needs clearance {} from the box edge at ±{half}",
                    10.0 * self.width
                )));
            }
        }
        Ok(())
    }
}

/// `e^{-|y|}` convolved with a unit-mass Gaussian of standard deviation `w`.
pub fn mollified_peak(y: f64, w: f64) -> f64 {
    if w == 0.0 {
        return (-y.abs()).exp();
    }
    let r = std::f64::consts::SQRT_2 * w;
    let half = 0.5 * w * w;
    // each branch is e^{w²/2 ∓ y} erfc((w² ∓ y)/(√2 w)); drop it once erfc has underflowed
    let branch = |s: f64| {
        let z = (w * w + s * y) / r;
        if z > 25.0 {
            0.0
        } else {
            (half + s * y).exp() * libm::erfc(z)
        }
    };
    0.5 * (branch(-1.0) + branch(1.0))
}

pub fn peakon_train(spec: &PeakonSpec, grid: &Grid) -> Result<Field> {
    spec.check_clearance(grid)?;
    sample(
        |x| {
            spec.amplitudes
                .iter()
                .zip(&spec.centers)
                .map(|(&c, &xi)| c * mollified_peak(x - xi, spec.width))
                .sum()
        },
        grid,
    )
}

/// DP shock peakon `sgn(x) e^{-|x|} / (t + k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockPeakonSpec {
    pub k: f64,
    pub t: f64,
}

impl ShockPeakonSpec {
    pub fn new(k: f64, t: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(config_err(format!("shock peakon needs k > 0, got {k}")));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(config_err(format!(
                "shock peakon time must be >= 0, got {t}"
            )));
        }
        Ok(Self { k, t })
    }
}

pub fn shock_peakon(spec: &ShockPeakonSpec, grid: &Grid) -> Result<Field> {
    let s = 1.0 / (spec.t + spec.k);
    sample(
        |x: f64| {
            let sgn = if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            };
            sgn * (-x.abs()).exp() * s
        },
        grid,
    )
}

/// `u₀ = G m₀`.
pub fn from_momentum(m0: &Field) -> Result<Field> {
    SpectralWorkspace::shared(m0.grid()).green_apply(m0)
}

/// True when some positive momentum sits strictly left of some negative momentum.
pub fn mckean_indicator(m0: &Field) -> bool {
    let tol = 1e-12 * m0.max_abs();
    let mut seen_positive = false;
    for &v in m0.values() {
        if v > tol {
            seen_positive = true;
        } else if v < -tol && seen_positive {
            return true;
        }
    }
    false
}

/// One Gaussian `amplitude · exp(-(x - center)² / (2 sigma²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub amplitude: f64,
    pub center: f64,
    pub sigma: f64,
}

pub fn gaussian_bumps(bumps: &[Bump], grid: &Grid) -> Result<Field> {
    for b in bumps {
        if !(b.sigma > 0.0) {
            return Err(config_err(format!(
                "gaussian sigma must be positive, got {}",
                b.sigma
            )));
        }
    }
    sample(
        |x| {
            bumps
                .iter()
                .map(|b| b.amplitude * (-((x - b.center) / b.sigma).powi(2) / 2.0).exp())
                .sum()
        },
        grid,
    )
}

/// Seeded random trigonometric polynomial with modes `1..=max_mode`,
/// normalized so that its sup is `amplitude`.
pub fn random_band_limited(
    grid: &Grid,
    max_mode: usize,
    amplitude: f64,
    seed: u64,
) -> Result<Field> {
    if max_mode == 0 || max_mode >= grid.n() / 3 {
        return Err(config_err(format!(
            "max_mode must lie in 1..{} for this grid, got {max_mode}",
            grid.n() / 3
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> = (0..max_mode)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let base = 2.0 * std::f64::consts::PI / grid.length();
    let raw = sample(
        |x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| {
                    let k = base * (i + 1) as f64;
                    a * (k * x).cos() + b * (k * x).sin()
                })
                .sum()
        },
        grid,
    )?;
    let scale = raw.max_abs();
    Ok(raw.scaled(amplitude / scale))
}

/// Seeded sum of `count` nonnegative Gaussians placed in the middle half of the box.
pub fn random_nonnegative_bumps(grid: &Grid, count: usize, seed: u64) -> Result<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quarter = 0.25 * grid.length();
    let bumps: Vec<Bump> = (0..count)
        .map(|_| Bump {
            amplitude: rng.gen_range(0.1..2.0),
            center: rng.gen_range(-quarter..quarter),
            sigma: rng.gen_range(0.3..3.0),
        })
        .collect();
    gaussian_bumps(&bumps, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{integrate, make_grid, norm, NormKind};
    use proptest::prelude::*;

    #[test]
    fn exact_peakon_examples() {
        let g = make_grid(64.0, 1024).unwrap();
        let u = peakon_train(&PeakonSpec::single(1.0, 0.0, 0.0).unwrap(), &g).unwrap();
        assert_eq!(u.max(), 1.0);
        assert_eq!(u.values()[g.origin_index()], 1.0);
        // the kink makes the rectangle sum h·coth(h/2) rather than 2
        let h = g.spacing();
        assert!((integrate(&u) - h / (0.5 * h).tanh()).abs() < 1e-12);

        let two = PeakonSpec::new(vec![2.0, 1.0], vec![-10.0, 10.0], 0.0).unwrap();
        let u = peakon_train(&two, &g).unwrap();
        let jmax = u
            .values()
            .iter()
            .enumerate()
            .fold(0, |b, (j, &v)| if v > u.values()[b] { j } else { b });
        assert!((g.node(jmax) + 10.0).abs() < 1e-12);
        assert!((u.max() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn mollified_peakon_has_unit_mass() {
        let g = make_grid(128.0, 4096).unwrap();
        let u = peakon_train(&PeakonSpec::single(1.0, 0.0, 0.05).unwrap(), &g).unwrap();
        assert!(
            (integrate(&u) - 2.0).abs() < 1e-10,
            "{}",
            integrate(&u) - 2.0
        );
        assert!(u.max() < 1.0);
        assert!(u.min() > 0.0);
    }

    #[test]
    fn mollified_profile_tails() {
        for y in [-30.0, -5.0, 3.0, 30.0] {
            let rel = (mollified_peak(y, 0.05) / (0.00125f64.exp() * (-y.abs()).exp()) - 1.0).abs();
            assert!(rel < 1e-10, "y = {y}, rel = {rel}");
        }
        assert!(mollified_peak(600.0, 0.05).is_finite());
        assert!(mollified_peak(-600.0, 1.0).is_finite());
    }

    #[test]
    fn clearance_is_enforced() {
        let g = make_grid(64.0, 1024).unwrap();
        assert!(peakon_train(&PeakonSpec::single(1.0, 31.8, 0.05).unwrap(), &g).is_err());
        assert!(peakon_train(&PeakonSpec::single(1.0, 31.0, 0.05).unwrap(), &g).is_ok());
        assert!(PeakonSpec::new(vec![1.0], vec![], 0.0).is_err());
        assert!(PeakonSpec::single(1.0, 0.0, -0.1).is_err());
    }

    #[test]
    fn shock_peakon_norms() {
        let g = make_grid(64.0, 4096).unwrap();
        for (k, t) in [(1.0, 0.0), (1.0, 1.0), (2.0, 3.0)] {
            let u = shock_peakon(&ShockPeakonSpec::new(k, t).unwrap(), &g).unwrap();
            let l2 = norm(&u, NormKind::Lp(2.0), None).unwrap();
            assert!((l2 * (t + k) - 1.0).abs() < 0.02);
            assert!(integrate(&u).abs() < 1e-12);
        }
        assert!(ShockPeakonSpec::new(0.0, 1.0).is_err());
    }

    #[test]
    fn from_momentum_examples() {
        let g = make_grid(64.0, 4096).unwrap();
        assert_eq!(from_momentum(&Field::zeros(g)).unwrap().max_abs(), 0.0);

        let w = 0.1;
        let amp = 1.0 / (w * (2.0 * std::f64::consts::PI).sqrt());
        let m = gaussian_bumps(
            &[Bump {
                amplitude: amp,
                center: 0.0,
                sigma: w,
            }],
            &g,
        )
        .unwrap();
        let u = from_momentum(&m).unwrap();
        let sup = |f: &dyn Fn(f64) -> f64| {
            u.values()
                .iter()
                .enumerate()
                .fold(0.0f64, |e, (j, &v)| e.max((v - f(g.node(j))).abs()))
        };
        // exact convolution of the kernel with the Gaussian
        let exact = sup(&|x| 0.5 * mollified_peak(x, w));
        assert!(exact < 1e-8, "exact = {exact}");
        // the delta limit is first order in the width: ½(1 - w√(2/π)) at the peak
        let limit = sup(&|x| 0.5 * (-x.abs()).exp());
        let peak_gap = 0.5 * w * (2.0 / std::f64::consts::PI).sqrt();
        assert!((limit - peak_gap).abs() < w * w, "limit = {limit}");

        let two = gaussian_bumps(
            &[
                Bump {
                    amplitude: 1.0,
                    center: -4.0,
                    sigma: 0.5,
                },
                Bump {
                    amplitude: 0.5,
                    center: 6.0,
                    sigma: 1.5,
                },
            ],
            &g,
        )
        .unwrap();
        assert!(from_momentum(&two).unwrap().min() >= -1e-12);
    }

    #[test]
    fn mckean_examples() {
        let g = make_grid(64.0, 1024).unwrap();
        let pos = |c| Bump {
            amplitude: 1.0,
            center: c,
            sigma: 1.0,
        };
        let neg = |c| Bump {
            amplitude: -1.0,
            center: c,
            sigma: 1.0,
        };
        assert!(!mckean_indicator(&gaussian_bumps(&[pos(0.0)], &g).unwrap()));
        assert!(mckean_indicator(
            &gaussian_bumps(&[pos(-5.0), neg(5.0)], &g).unwrap()
        ));
        assert!(!mckean_indicator(
            &gaussian_bumps(&[neg(-5.0), pos(5.0)], &g).unwrap()
        ));
        assert!(!mckean_indicator(&Field::zeros(g)));
    }

    #[test]
    fn random_fields_are_seeded() {
        let g = make_grid(64.0, 512).unwrap();
        let a = random_band_limited(&g, 12, 1.0, 7).unwrap();
        assert_eq!(a, random_band_limited(&g, 12, 1.0, 7).unwrap());
        assert_ne!(a, random_band_limited(&g, 12, 1.0, 8).unwrap());
        assert!((a.max_abs() - 1.0).abs() < 1e-15);
        assert!(random_nonnegative_bumps(&g, 3, 1).unwrap().min() >= 0.0);
        assert!(random_band_limited(&g, 400, 1.0, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn momentum_round_trip(seed in 0u64..1000, modes in 1usize..40) {
            let g = make_grid(64.0, 512).unwrap();
            let m = random_band_limited(&g, modes, 1.0, seed).unwrap();
            let back = SpectralWorkspace::shared(&g).helmholtz_forward(&from_momentum(&m).unwrap()).unwrap();
            prop_assert!(back.sub(&m).unwrap().max_abs() < 1e-10);
        }

        #[test]
        fn mollification_never_steepens(c in 0.2..3.0f64, w in 0.03..0.5f64, x0 in -5.0..5.0f64) {
            let g = make_grid(64.0, 4096).unwrap();
            let u = peakon_train(&PeakonSpec::single(c, x0, w).unwrap(), &g).unwrap();
            let ux = SpectralWorkspace::shared(&g).deriv(&u, 1).unwrap();
            prop_assert!(ux.max_abs() <= 1.01 * c);
        }

        #[test]
        fn mckean_is_scale_invariant(seed in 0u64..1000, alpha in 1e-6..1e6f64) {
            let g = make_grid(64.0, 256).unwrap();
            let m = random_band_limited(&g, 5, 1.0, seed).unwrap();
            prop_assert_eq!(mckean_indicator(&m), mckean_indicator(&m.scaled(alpha)));
        }
    }
}
