//! Smoothing kernels on `[-1, 1]` and their boundary-corrected versions.
//!
//! Near the edges of the unit interval a symmetric kernel loses part of its
//! mass. The boundary kernel rescales it with a linear factor built from the
//! partial moments
//!
//! ```text
//! a_j(p) = ∫_{-1}^{p} x^j K(x) dx,     b_j(p) = ∫_{-p}^{1} x^j K(x) dx,
//! ```
//!
//! so that, for every location `s`, the corrected kernel integrates to one and
//! has vanishing first moment over the admissible range of `x`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Absolute tolerance used for every moment quadrature.
pub const MOMENT_TOL: f64 = 1e-12;

/// Denominators `a0*a2 - a1^2` below this are treated as singular.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-14;

/// Number of intervals of the cached moment grid on `[0, 1]`.
const CACHE_INTERVALS: usize = 1024;

/// The biweight (quartic) kernel `(15/16)(1 - x^2)^2` on `[-1, 1]`.
pub fn biweight(x: f64) -> f64 {
    if x.abs() > 1.0 {
        0.0
    } else {
        let t = 1.0 - x * x;
        0.9375 * t * t
    }
}

/// A continuous, symmetric probability density supported on `[-1, 1]`.
#[derive(Clone)]
pub struct Kernel {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lipschitz_bound: f64,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("lipschitz_bound", &self.lipschitz_bound)
            .finish()
    }
}

impl Kernel {
    pub fn biweight() -> Self {
        Kernel {
            name: "biweight".to_string(),
            f: Arc::new(biweight),
            // max |K'(x)| = (15/4)|x|(1 - x^2), attained at x = 1/sqrt(3)
            lipschitz_bound: 15.0 / (6.0 * 3f64.sqrt()),
        }
    }

    /// Registers a user kernel after checking support, symmetry, unit mass
    /// and a non-singular boundary correction at `p = 0`.
    pub fn custom<F>(name: &str, f: F, lipschitz_bound: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lipschitz_bound > 0.0) {
            return Err(Error::param("lipschitz bound must be positive"));
        }
        let kernel = Kernel {
            name: name.to_string(),
            f: Arc::new(f),
            lipschitz_bound,
        };
        kernel.validate()?;
        Ok(kernel)
    }

    fn validate(&self) -> Result<()> {
        for &x in &[1.0 + 1e-9, 1.25, 2.0, 10.0] {
            if self.evaluate(x) != 0.0 || self.evaluate(-x) != 0.0 {
                return Err(Error::param(format!(
                    "kernel '{}' is not zero outside [-1, 1] (x = {x})",
                    self.name
                )));
            }
        }
        for i in 0..=200 {
            let x = i as f64 / 200.0;
            let (l, r) = (self.evaluate(-x), self.evaluate(x));
            if !l.is_finite() || !r.is_finite() || (l - r).abs() > 1e-12 * (1.0 + r.abs()) {
                return Err(Error::param(format!(
                    "kernel '{}' is not symmetric at x = {x}",
                    self.name
                )));
            }
        }
        let mass = integrate(|x| self.evaluate(x), -1.0, 1.0, MOMENT_TOL);
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::param(format!(
                "kernel '{}' integrates to {mass}, not 1",
                self.name
            )));
        }
        let m = MomentTriple::exact_a(self, 0.0);
        if m.denominator().abs() < DEGENERATE_DENOMINATOR {
            return Err(Error::param(format!(
                "kernel '{}' has a singular boundary correction at p = 0",
                self.name
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Documented Lipschitz constant; informational only.
    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    #[inline]
    pub fn evaluate(&self, x: f64) -> f64 {
        if x.abs() > 1.0 {
            0.0
        } else {
            (self.f)(x)
        }
    }
}

fn check_order(j: u32) -> Result<()> {
    if j > 2 {
        Err(Error::param(format!("moment order must be 0, 1 or 2, got {j}")))
    } else {
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(format!("p must lie in [0, 1], got {p}")))
    }
}

/// `a_j(p) = ∫_{-1}^{p} x^j K(x) dx`.
pub fn kernel_moment_a(kernel: &Kernel, j: u32, p: f64) -> Result<f64> {
    check_order(j)?;
    check_p(p)?;
    Ok(integrate(
        |x| x.powi(j as i32) * kernel.evaluate(x),
        -1.0,
        p,
        MOMENT_TOL,
    ))
}

/// `b_j(p) = ∫_{-p}^{1} x^j K(x) dx`.
pub fn kernel_moment_b(kernel: &Kernel, j: u32, p: f64) -> Result<f64> {
    check_order(j)?;
    check_p(p)?;
    Ok(integrate(
        |x| x.powi(j as i32) * kernel.evaluate(x),
        -p,
        1.0,
        MOMENT_TOL,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct MomentTriple {
    m0: f64,
    m1: f64,
    m2: f64,
}

impl MomentTriple {
    fn exact_a(kernel: &Kernel, p: f64) -> Self {
        let m = |j: i32| integrate(|x| x.powi(j) * kernel.evaluate(x), -1.0, p, MOMENT_TOL);
        MomentTriple {
            m0: m(0),
            m1: m(1),
            m2: m(2),
        }
    }

    fn exact_b(kernel: &Kernel, p: f64) -> Self {
        let m = |j: i32| integrate(|x| x.powi(j) * kernel.evaluate(x), -p, 1.0, MOMENT_TOL);
        MomentTriple {
            m0: m(0),
            m1: m(1),
            m2: m(2),
        }
    }

    fn denominator(&self) -> f64 {
        self.m0 * self.m2 - self.m1 * self.m1
    }
}

/// Moment tables on a uniform p-grid, interpolated by cubic Hermite splines.
///
/// The derivatives are exact: `a_j'(p) = p^j K(p)` and `b_j'(p) = (-p)^j K(-p)`.
#[derive(Debug, Clone)]
struct MomentCache {
    a: Vec<MomentTriple>,
    b: Vec<MomentTriple>,
}

impl MomentCache {
    fn build(kernel: &Kernel) -> Self {
        let grid = (0..=CACHE_INTERVALS).map(|i| i as f64 / CACHE_INTERVALS as f64);
        // build a_j by accumulating over consecutive cells instead of integrating from -1 each time
        let mut a = Vec::with_capacity(CACHE_INTERVALS + 1);
        let mut b = Vec::with_capacity(CACHE_INTERVALS + 1);
        let start_a = MomentTriple::exact_a(kernel, 0.0);
        let start_b = MomentTriple::exact_b(kernel, 0.0);
        let mut acc_a = start_a;
        let mut acc_b = start_b;
        let mut prev = 0.0;
        for p in grid {
            if p > prev {
                for (j, (ta, tb)) in [
                    (&mut acc_a.m0, &mut acc_b.m0),
                    (&mut acc_a.m1, &mut acc_b.m1),
                    (&mut acc_a.m2, &mut acc_b.m2),
                ]
                .into_iter()
                .enumerate()
                {
                    let j = j as i32;
                    *ta += integrate(|x| x.powi(j) * kernel.evaluate(x), prev, p, 1e-15);
                    *tb += integrate(|x| x.powi(j) * kernel.evaluate(x), -p, -prev, 1e-15);
                }
            }
            a.push(acc_a);
            b.push(acc_b);
            prev = p;
        }
        MomentCache { a, b }
    }

    fn interpolate(table: &[MomentTriple], deriv: impl Fn(f64) -> MomentTriple, p: f64) -> MomentTriple {
        let step = 1.0 / CACHE_INTERVALS as f64;
        let idx = ((p / step) as usize).min(CACHE_INTERVALS - 1);
        let p0 = idx as f64 * step;
        let t = (p - p0) / step;
        let (d0, d1) = (deriv(p0), deriv(p0 + step));
        let (v0, v1) = (table[idx], table[idx + 1]);
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        let mix = |y0: f64, y1: f64, g0: f64, g1: f64| {
            h00 * y0 + h10 * step * g0 + h01 * y1 + h11 * step * g1
        };
        MomentTriple {
            m0: mix(v0.m0, v1.m0, d0.m0, d1.m0),
            m1: mix(v0.m1, v1.m1, d0.m1, d1.m1),
            m2: mix(v0.m2, v1.m2, d0.m2, d1.m2),
        }
    }
}

/// How [`BoundaryKernel`] obtains `a_j(p)` and `b_j(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMode {
    /// Fresh adaptive quadrature on every call.
    Exact,
    /// Precomputed grid with cubic Hermite interpolation (default).
    Cached,
}

/// Linear correction factor `(c0 - c1 x)` multiplying the base kernel at a fixed `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalCorrection {
    pub c0: f64,
    pub c1: f64,
}

impl LocalCorrection {
    pub const IDENTITY: LocalCorrection = LocalCorrection { c0: 1.0, c1: 0.0 };
}

/// The boundary-corrected kernel `K_b(x, s)` for a fixed bandwidth `h ∈ (0, 1/2)`.
#[derive(Debug, Clone)]
pub struct BoundaryKernel {
    base: Kernel,
    h: f64,
    cache: Option<Arc<MomentCache>>,
}

impl BoundaryKernel {
    pub fn new(base: Kernel, h: f64) -> Result<Self> {
        Self::with_mode(base, h, MomentMode::Cached)
    }

    pub fn biweight(h: f64) -> Result<Self> {
        Self::new(Kernel::biweight(), h)
    }

    pub fn with_mode(base: Kernel, h: f64, mode: MomentMode) -> Result<Self> {
        if !(h > 0.0 && h < 0.5) {
            return Err(Error::param(format!(
                "bandwidth h must lie in (0, 1/2), got {h}"
            )));
        }
        let cache = match mode {
            MomentMode::Exact => None,
            MomentMode::Cached => Some(Arc::new(MomentCache::build(&base))),
        };
        Ok(BoundaryKernel { base, h, cache })
    }

    pub fn base(&self) -> &Kernel {
        &self.base
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn mode(&self) -> MomentMode {
        if self.cache.is_some() {
            MomentMode::Cached
        } else {
            MomentMode::Exact
        }
    }

    fn left_moments(&self, p: f64) -> MomentTriple {
        match &self.cache {
            Some(c) => MomentCache::interpolate(
                &c.a,
                |q| {
                    let k = self.base.evaluate(q);
                    MomentTriple {
                        m0: k,
                        m1: q * k,
                        m2: q * q * k,
                    }
                },
                p,
            ),
            None => MomentTriple::exact_a(&self.base, p),
        }
    }

    fn right_moments(&self, p: f64) -> MomentTriple {
        match &self.cache {
            Some(c) => MomentCache::interpolate(
                &c.b,
                |q| {
                    let k = self.base.evaluate(-q);
                    MomentTriple {
                        m0: k,
                        m1: -q * k,
                        m2: q * q * k,
                    }
                },
                p,
            ),
            None => MomentTriple::exact_b(&self.base, p),
        }
    }

    /// The correction factor in effect at location `s`.
    pub fn correction(&self, s: f64) -> Result<LocalCorrection> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::param(format!("s must lie in [0, 1], got {s}")));
        }
        let moments = if s <= self.h {
            self.left_moments((s / self.h).min(1.0))
        } else if s >= 1.0 - self.h {
            self.right_moments(((1.0 - s) / self.h).min(1.0))
        } else {
            return Ok(LocalCorrection::IDENTITY);
        };
        let d = moments.denominator();
        if d.abs() < DEGENERATE_DENOMINATOR {
            return Err(Error::degenerate(format!(
                "boundary kernel denominator {d:e} at s = {s}"
            )));
        }
        Ok(LocalCorrection {
            c0: moments.m2 / d,
            c1: moments.m1 / d,
        })
    }

    /// Evaluates `K_b(x, s)`.
    pub fn evaluate(&self, x: f64, s: f64) -> Result<f64> {
        let c = self.correction(s)?;
        Ok((c.c0 - c.c1 * x) * self.base.evaluate(x))
    }

    /// Evaluates `K_b(x, s)` with a precomputed correction for `s`.
    #[inline]
    pub fn evaluate_with(&self, correction: LocalCorrection, x: f64) -> f64 {
        (correction.c0 - correction.c1 * x) * self.base.evaluate(x)
    }
}

/// Free-function form of [`BoundaryKernel::evaluate`].
pub fn boundary_eval(bk: &BoundaryKernel, x: f64, s: f64) -> Result<f64> {
    bk.evaluate(x, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Closed-form biweight moments, derived by hand from
    // (15/16)(x - 2x^3/3 + x^5/5) and friends.
    fn a0_exact(p: f64) -> f64 {
        0.5 + 15.0 / 16.0 * (p - 2.0 * p.powi(3) / 3.0 + p.powi(5) / 5.0)
    }
    fn a1_exact(p: f64) -> f64 {
        15.0 / 16.0 * ((p * p / 2.0 - p.powi(4) / 2.0 + p.powi(6) / 6.0) - 1.0 / 6.0)
    }
    fn a2_exact(p: f64) -> f64 {
        1.0 / 14.0 + 15.0 / 16.0 * (p.powi(3) / 3.0 - 2.0 * p.powi(5) / 5.0 + p.powi(7) / 7.0)
    }

    #[test]
    fn biweight_values() {
        assert_eq!(biweight(0.0), 0.9375);
        assert_eq!(biweight(1.0), 0.0);
        assert_eq!(biweight(-1.0), 0.0);
        assert_eq!(biweight(0.5), 0.52734375);
        assert_eq!(biweight(1.5), 0.0);
    }

    #[test]
    fn full_moments() {
        let k = Kernel::biweight();
        assert!((kernel_moment_a(&k, 0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(kernel_moment_a(&k, 1, 1.0).unwrap().abs() < 1e-12);
        assert!((kernel_moment_a(&k, 2, 1.0).unwrap() - 1.0 / 7.0).abs() < 1e-12);
        assert!((kernel_moment_b(&k, 2, 1.0).unwrap() - 1.0 / 7.0).abs() < 1e-12);
        assert!(kernel_moment_a(&k, 3, 0.5).is_err());
        assert!(kernel_moment_a(&k, 0, 1.5).is_err());
    }

    #[test]
    fn partial_moments_match_closed_form() {
        let k = Kernel::biweight();
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            assert!((kernel_moment_a(&k, 0, p).unwrap() - a0_exact(p)).abs() < 1e-12);
            assert!((kernel_moment_a(&k, 1, p).unwrap() - a1_exact(p)).abs() < 1e-12);
            assert!((kernel_moment_a(&k, 2, p).unwrap() - a2_exact(p)).abs() < 1e-12);
            // symmetry: b_j(p) = (-1)^j a_j(p)
            assert!((kernel_moment_b(&k, 1, p).unwrap() + a1_exact(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn cached_matches_exact() {
        let cached = BoundaryKernel::biweight(0.2).unwrap();
        let exact = BoundaryKernel::with_mode(Kernel::biweight(), 0.2, MomentMode::Exact).unwrap();
        for i in 0..=997 {
            let s = i as f64 / 997.0;
            let a = cached.correction(s).unwrap();
            let b = exact.correction(s).unwrap();
            assert!((a.c0 - b.c0).abs() < 1e-10 * (1.0 + b.c0.abs()), "s={s} {a:?} {b:?}");
            assert!((a.c1 - b.c1).abs() < 1e-10 * (1.0 + b.c1.abs()), "s={s} {a:?} {b:?}");
        }
    }

    #[test]
    fn interior_and_transition_points() {
        let bk = BoundaryKernel::biweight(0.2).unwrap();
        for i in 0..=40 {
            let x = -1.0 + i as f64 / 20.0;
            assert_eq!(bk.evaluate(x, 0.5).unwrap(), biweight(x));
            for s in [0.2, 0.8] {
                assert!((bk.evaluate(x, s).unwrap() - biweight(x)).abs() < 1e-12);
            }
        }
        assert_eq!(bk.evaluate(1.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn continuity_at_region_edges() {
        let bk = BoundaryKernel::with_mode(Kernel::biweight(), 0.2, MomentMode::Exact).unwrap();
        for i in 0..=40 {
            let x = -1.0 + i as f64 / 20.0;
            for s in [0.2, 0.8] {
                let eps = 1e-12;
                let l = bk.evaluate(x, s - eps).unwrap();
                let r = bk.evaluate(x, s + eps).unwrap();
                assert!((l - r).abs() < 1e-10, "x={x} s={s}");
            }
        }
    }

    #[test]
    fn rejects_bad_bandwidth() {
        assert!(BoundaryKernel::biweight(0.5).is_err());
        assert!(BoundaryKernel::biweight(0.0).is_err());
        assert!(BoundaryKernel::biweight(0.7).is_err());
        let bk = BoundaryKernel::biweight(0.1).unwrap();
        assert!(bk.evaluate(0.0, 1.2).is_err());
    }

    #[test]
    fn custom_kernel_validation() {
        let epan = Kernel::custom("epanechnikov", |x| 0.75 * (1.0 - x * x), 1.5).unwrap();
        assert!((epan.evaluate(0.0) - 0.75).abs() < 1e-15);
        assert_eq!(epan.evaluate(1.2), 0.0);
        assert!(Kernel::custom("half", |x| 0.5 * (1.0 - x * x), 1.0).is_err());
        assert!(Kernel::custom("skew", |x| 0.5 + 0.25 * x, 1.0).is_err());
        assert!(Kernel::custom("wide", |x| if x.abs() <= 2.0 { 0.25 } else { 0.0 }, 1.0).is_err());
    }
}
