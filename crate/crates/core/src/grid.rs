//! Periodic uniform grid standing in for the real line.
//!
//! Nodes are origin-centered, `x_j = -L/2 + j h` with `h = L/n`, and the node
//! `x_n` is identified with `x_0`. Integrals use the periodic rectangle rule,
//! which is exact for trigonometric polynomials below the Nyquist mode.

use serde::Serialize;

use crate::error::{config_err, Error, Result};
use crate::spectral::SpectralWorkspace;

/// Smallest admissible node count.
pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    length: f64,
    n: usize,
}

impl Grid {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(config_err(format!(
                "grid length must be positive, got {length}"
            )));
        }
        if n < MIN_NODES || !n.is_power_of_two() {
            return Err(config_err(format!(
                "grid node count must be a power of two >= {MIN_NODES}, got {n}"
            )));
        }
        Ok(Self { length, n })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Node spacing `h = L/n`.
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Index of the node at the origin.
    pub fn origin_index(&self) -> usize {
        self.n / 2
    }
}

/// Checked constructor mirroring [`Grid::new`].
pub fn make_grid(length: f64, n: usize) -> Result<Grid> {
    Grid::new(length, n)
}

/// A real function sampled on a [`Grid`]; all entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Operator(format!(
                "field has {} values but grid has {} nodes",
                values.len(),
                grid.n()
            )));
        }
        if let Some((j, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Sampling {
                x: grid.node(j),
                value: *v,
            });
        }
        Ok(Self { grid, values })
    }

    /// Builds a field without the finiteness scan; callers guarantee the length.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::from_raw(grid, vec![0.0; grid.n()])
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self::from_raw(grid, vec![value; grid.n()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise map that also sees the node coordinate.
    pub fn map_with_x(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, &v)| f(self.grid.node(j), v))
            .collect();
        Field::from_raw(self.grid, values)
    }

    pub fn scaled(&self, alpha: f64) -> Field {
        self.map(|v| alpha * v)
    }

    /// `alpha * self + beta * other`.
    pub fn lin_comb(&self, alpha: f64, other: &Field, beta: f64) -> Result<Field> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(Field::from_raw(self.grid, values))
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Field::from_raw(self.grid, values))
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Operator(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }
}

/// Samples `f` at every node.
pub fn sample(f: impl Fn(f64) -> f64, grid: &Grid) -> Result<Field> {
    let mut values = Vec::with_capacity(grid.n());
    for j in 0..grid.n() {
        let x = grid.node(j);
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::Sampling { x, value: v });
        }
        values.push(v);
    }
    Ok(Field::from_raw(*grid, values))
}

/// Periodic rectangle rule `h Σ f_j`.
pub fn integrate(f: &Field) -> f64 {
    f.grid.spacing() * f.values.iter().sum::<f64>()
}

/// An interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(config_err(format!(
                "window needs lo < hi, got ({lo}, {hi})"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn full() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    /// Symmetric window `(-half_width, half_width)`.
    pub fn symmetric(half_width: f64) -> Result<Self> {
        Self::new(-half_width, half_width)
    }

    /// Node mask for this window on `grid`.
    ///
    /// A window is empty when its open interior holds no node. Otherwise the
    /// endpoints round outward to the nearest nodes, so boundary nodes are kept.
    pub fn mask(&self, grid: &Grid) -> (Vec<bool>, usize) {
        let h = grid.spacing();
        let x0 = grid.node(0);
        let x_last = grid.node(grid.n() - 1);
        let interior = (0..grid.n()).any(|j| {
            let x = grid.node(j);
            x > self.lo && x < self.hi
        });
        if !interior {
            return (vec![false; grid.n()], 0);
        }
        // outward rounding to node positions, clipped to the box
        let lo = if self.lo <= x0 {
            x0
        } else {
            x0 + ((self.lo - x0) / h).floor() * h
        };
        let hi = if self.hi >= x_last {
            x_last
        } else {
            x0 + ((self.hi - x0) / h).ceil() * h
        };
        let tol = 1e-9 * h;
        let mask: Vec<bool> = (0..grid.n())
            .map(|j| {
                let x = grid.node(j);
                x >= lo - tol && x <= hi + tol
            })
            .collect();
        let count = mask.iter().filter(|&&b| b).count();
        (mask, count)
    }
}

/// A field zeroed outside a window, with the node mask it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedField {
    pub field: Field,
    pub mask: Vec<bool>,
    pub count: usize,
    pub empty: bool,
}

pub fn window_restrict(f: &Field, w: &Window) -> MaskedField {
    let (mask, count) = w.mask(f.grid());
    let values = f
        .values()
        .iter()
        .zip(&mask)
        .map(|(&v, &inside)| if inside { v } else { 0.0 })
        .collect();
    MaskedField {
        field: Field::from_raw(*f.grid(), values),
        mask,
        count,
        empty: count == 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum NormKind {
    /// `L^p`, `1 <= p <= ∞` (use `f64::INFINITY` for the sup norm).
    Lp(f64),
    /// `(‖f‖₂² + ‖f′‖₂²)^{1/2}`.
    H1,
    /// `(‖f‖_p^p + ‖f′‖_p^p)^{1/p}`.
    W1p(f64),
}

fn lp_masked(values: &[f64], mask: Option<&[bool]>, p: f64, h: f64) -> f64 {
    let inside = |j: usize| mask.is_none_or(|m| m[j]);
    if p.is_infinite() {
        return (0..values.len())
            .filter(|&j| inside(j))
            .fold(0.0f64, |m, j| m.max(values[j].abs()));
    }
    let mut acc = 0.0;
    for (j, v) in values.iter().enumerate() {
        if inside(j) {
            acc += if p == 1.0 {
                v.abs()
            } else if p == 2.0 {
                v * v
            } else {
                v.abs().powf(p)
            };
        }
    }
    acc *= h;
    if p == 1.0 {
        acc
    } else if p == 2.0 {
        acc.sqrt()
    } else {
        acc.powf(1.0 / p)
    }
}

fn validate_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(config_err(format!(
            "norm exponent must satisfy p >= 1, got {p}"
        )));
    }
    Ok(())
}

/// Quadrature norm of `f`, optionally on a window.
///
/// Derivatives for `H1` and `W1p` come from the spectral derivative of the
/// whole field before restriction.
pub fn norm(f: &Field, kind: NormKind, window: Option<&Window>) -> Result<f64> {
    let h = f.grid().spacing();
    let mask = window.map(|w| w.mask(f.grid()).0);
    let mask = mask.as_deref();
    match kind {
        NormKind::Lp(p) => {
            validate_p(p)?;
            Ok(lp_masked(f.values(), mask, p, h))
        }
        NormKind::H1 => {
            let df = SpectralWorkspace::shared(f.grid()).deriv(f, 1)?;
            let a = lp_masked(f.values(), mask, 2.0, h);
            let b = lp_masked(df.values(), mask, 2.0, h);
            Ok((a * a + b * b).sqrt())
        }
        NormKind::W1p(p) => {
            validate_p(p)?;
            let df = SpectralWorkspace::shared(f.grid()).deriv(f, 1)?;
            let a = lp_masked(f.values(), mask, p, h);
            let b = lp_masked(df.values(), mask, p, h);
            if p.is_infinite() {
                Ok(a.max(b))
            } else {
                Ok((a.powf(p) + b.powf(p)).powf(1.0 / p))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_spacing_and_layout() {
        let g = make_grid(64.0, 1024).unwrap();
        assert_eq!(g.spacing(), 0.0625);
        let g = make_grid(256.0, 4096).unwrap();
        assert_eq!(g.spacing(), 0.0625);
        assert_eq!(g.node(0), -128.0);
        assert_eq!(g.node(g.origin_index()), 0.0);
        let x = g.nodes();
        assert!(x.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(matches!(make_grid(64.0, 1000), Err(Error::Config(_))));
        assert!(matches!(make_grid(64.0, 8), Err(Error::Config(_))));
        assert!(matches!(make_grid(0.0, 1024), Err(Error::Config(_))));
        assert!(matches!(make_grid(-1.0, 1024), Err(Error::Config(_))));
    }

    #[test]
    fn sample_examples() {
        let g = make_grid(64.0, 1024).unwrap();
        let z = sample(|_| 0.0, &g).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));

        let f = sample(|x: f64| (-x.abs()).exp(), &g).unwrap();
        assert_eq!(f.values()[g.origin_index()], 1.0);
        assert_eq!(f.max(), 1.0);

        let odd = sample(
            |x: f64| {
                if x == 0.0 {
                    0.0
                } else {
                    x.signum() * (-x.abs()).exp()
                }
            },
            &g,
        )
        .unwrap();
        let c = g.origin_index();
        for j in 1..c {
            assert_eq!(odd.values()[c + j], -odd.values()[c - j]);
        }
    }

    #[test]
    fn sample_rejects_non_finite() {
        let g = make_grid(64.0, 1024).unwrap();
        let err = sample(|x| 1.0 / x, &g).unwrap_err();
        assert!(matches!(err, Error::Sampling { x, .. } if x == 0.0));
    }

    #[test]
    fn integrate_examples() {
        let g = make_grid(64.0, 1024).unwrap();
        let h = g.spacing();
        assert_eq!(integrate(&Field::constant(g, 1.0)), 64.0);

        // The rectangle rule on the kink of e^{-|x|} sums to h·coth(h/2),
        // which is 2 + h²/6 + O(h⁴), not 2 to 1e-10.
        let f = sample(|x: f64| (-x.abs()).exp(), &g).unwrap();
        let discrete = h / (0.5 * h).tanh();
        assert!((integrate(&f) - discrete).abs() < 1e-12);
        assert!((integrate(&f) - 2.0 - h * h / 6.0).abs() < h.powi(4));

        // smooth peaked profile: spectrally accurate
        let s = sample(|x: f64| 1.0 / x.cosh(), &g).unwrap();
        assert!((integrate(&s) - std::f64::consts::PI).abs() < 1e-10);

        let odd = sample(
            |x: f64| {
                if x == 0.0 {
                    0.0
                } else {
                    x.signum() * (-x.abs()).exp()
                }
            },
            &g,
        )
        .unwrap();
        assert!(integrate(&odd).abs() < 1e-12);
    }

    #[test]
    fn window_examples() {
        let g = make_grid(64.0, 1024).unwrap();
        let f = sample(|x: f64| (-x.abs()).exp(), &g).unwrap();

        let full = window_restrict(&f, &Window::full());
        assert_eq!(full.field, f);
        assert_eq!(full.count, g.n());

        // (0, ∞): outward rounding keeps the node at 0, so the half mass is 1 + O(h)
        let half = window_restrict(&f, &Window::new(0.0, f64::INFINITY).unwrap());
        let mass = integrate(&half.field);
        assert!((mass - 1.0).abs() < g.spacing(), "mass = {mass}");

        let tiny = window_restrict(&f, &Window::new(5.0, 5.0001).unwrap());
        assert!(tiny.empty);
        assert_eq!(tiny.count, 0);
        assert!(tiny.field.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn window_rounds_outward() {
        let g = make_grid(64.0, 1024).unwrap();
        // (0.01, 0.1) has the interior node 0.0625 and rounds out to [0, 0.125]
        let (mask, count) = Window::new(0.01, 0.1).unwrap().mask(&g);
        assert_eq!(count, 3);
        let c = g.origin_index();
        assert!(mask[c] && mask[c + 1] && mask[c + 2]);
    }

    #[test]
    fn norm_examples() {
        let g = make_grid(64.0, 4096).unwrap();
        let c = 1.5;
        let peakon = sample(|x: f64| c * (-x.abs()).exp(), &g).unwrap();
        let h1 = norm(&peakon, NormKind::H1, None).unwrap();
        assert!(
            (h1 * h1 / (2.0 * c * c) - 1.0).abs() < 0.02,
            "h1² = {}",
            h1 * h1
        );

        let z = Field::zeros(g);
        for kind in [
            NormKind::Lp(1.0),
            NormKind::Lp(f64::INFINITY),
            NormKind::H1,
            NormKind::W1p(3.0),
        ] {
            assert_eq!(norm(&z, kind, None).unwrap(), 0.0);
        }
        assert!(matches!(
            norm(&z, NormKind::Lp(0.5), None),
            Err(Error::Config(_))
        ));
    }

    fn smooth_field(g: Grid, a: f64, b: f64, s: f64) -> Field {
        sample(
            |x: f64| a * (-(x - s) * (x - s)).exp() + b * (0.3 * x).sin(),
            &g,
        )
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn integrate_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64, alpha in -5.0..5.0f64, beta in -5.0..5.0f64) {
            let g = make_grid(40.0, 256).unwrap();
            let f = smooth_field(g, a, b, 1.0);
            let q = smooth_field(g, b, a, -2.0);
            let comb = f.lin_comb(alpha, &q, beta).unwrap();
            let lhs = integrate(&comb) - alpha * integrate(&f) - beta * integrate(&q);
            let scale = f.max_abs().max(q.max_abs()).max(1.0);
            prop_assert!(lhs.abs() <= 1e-12 * (alpha.abs() + beta.abs()) * g.n() as f64 * scale);
        }

        #[test]
        fn full_window_norm_is_bit_identical(a in -3.0..3.0f64, b in -3.0..3.0f64, p in 1.0..6.0f64) {
            let g = make_grid(40.0, 256).unwrap();
            let f = smooth_field(g, a, b, 0.5);
            for kind in [NormKind::Lp(p), NormKind::Lp(f64::INFINITY), NormKind::H1, NormKind::W1p(p)] {
                let full = norm(&f, kind, Some(&Window::full())).unwrap();
                let none = norm(&f, kind, None).unwrap();
                prop_assert_eq!(full.to_bits(), none.to_bits());
            }
        }

        #[test]
        fn restriction_is_idempotent(lo in -20.0..10.0f64, width in 0.001..30.0f64) {
            let g = make_grid(40.0, 256).unwrap();
            let f = smooth_field(g, 1.0, 0.5, 0.0);
            let w = Window::new(lo, lo + width).unwrap();
            let once = window_restrict(&f, &w);
            let twice = window_restrict(&once.field, &w);
            prop_assert_eq!(&once.field, &twice.field);
        }

        #[test]
        fn norms_are_homogeneous(alpha in -10.0..10.0f64, p in 1.0..5.0f64) {
            let g = make_grid(40.0, 256).unwrap();
            let f = smooth_field(g, 1.0, -0.7, 0.3);
            let scaled = f.scaled(alpha);
            for kind in [NormKind::Lp(p), NormKind::Lp(f64::INFINITY), NormKind::H1, NormKind::W1p(p)] {
                let base = norm(&f, kind, None).unwrap();
                let s = norm(&scaled, kind, None).unwrap();
                prop_assert!((s - alpha.abs() * base).abs() <= 1e-12 * alpha.abs().max(1e-300) * base + 1e-300);
            }
        }
    }
}
