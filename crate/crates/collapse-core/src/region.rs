//! Space-time regions and the measurement specs that reference them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-dimensional quadrature rule used along each space axis.
/// Time always uses midpoint panels (smooth, mildly varying integrands).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadRule {
    Midpoint,
    GaussLegendre,
}

/// A time interval crossed with an axis-aligned spatial box, plus the
/// sampling resolution used to integrate over it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    /// [t0, t1] with t0 < t1.
    pub time_interval: (f64, f64),
    /// Per-axis (lo, hi) bounds of the spatial box.
    pub space_box: Vec<(f64, f64)>,
    /// Midpoint panels along the time axis.
    pub t_samples: usize,
    /// Quadrature nodes along each space axis.
    pub x_samples: usize,
    pub rule: QuadRule,
}

impl RegionSpec {
    pub fn new(
        time_interval: (f64, f64),
        space_box: Vec<(f64, f64)>,
        t_samples: usize,
        x_samples: usize,
        rule: QuadRule,
    ) -> Result<Self> {
        let spec = RegionSpec {
            time_interval,
            space_box,
            t_samples,
            x_samples,
            rule,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Late-time focusing window: t in [R - sqrt(R), R], |x| small.
    /// The spatial box is inscribed in the ball of radius 1/100 so the
    /// region stays inside the one the lower bound is proved on.
    pub fn late_focus(r: f64, n: usize, t_samples: usize, x_samples: usize) -> Result<Self> {
        if r < 4.0 {
            return Err(Error::config("R", format!("scale must be >= 4, got {r}")));
        }
        let half = 0.01 / (n as f64).sqrt();
        RegionSpec::new(
            (r - r.sqrt(), r),
            vec![(-half, half); n],
            t_samples,
            x_samples,
            QuadRule::GaussLegendre,
        )
    }

    /// Early-time spread window: t in [0, 1], |x| up to nearly R^m.
    /// The box is inscribed in every ball B(t·direction, R^m) with |t| <= 1
    /// and a unit direction, so it minorizes the drifting-ball region.
    pub fn early_spread(
        r: f64,
        n: usize,
        m: u32,
        t_samples: usize,
        x_samples: usize,
    ) -> Result<Self> {
        if r < 4.0 {
            return Err(Error::config("R", format!("scale must be >= 4, got {r}")));
        }
        if m < 1 {
            return Err(Error::config("m", "ball exponent must be >= 1"));
        }
        let half = (r.powi(m as i32) - 1.0) / (n as f64).sqrt();
        RegionSpec::new(
            (0.0, 1.0),
            vec![(-half, half); n],
            t_samples,
            x_samples,
            QuadRule::GaussLegendre,
        )
    }

    pub fn dim(&self) -> usize {
        self.space_box.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (t0, t1) = self.time_interval;
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::config(
                "time_interval",
                format!("need finite t0 < t1, got [{t0}, {t1}]"),
            ));
        }
        if self.space_box.is_empty() {
            return Err(Error::config("space_box", "need at least one axis"));
        }
        for &(lo, hi) in &self.space_box {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::config(
                    "space_box",
                    format!("need finite lo < hi per axis, got [{lo}, {hi}]"),
                ));
            }
        }
        if self.t_samples < 2 || self.x_samples < 2 {
            return Err(Error::config(
                "samples",
                format!(
                    "need at least 2 samples per axis, got t={} x={}",
                    self.t_samples, self.x_samples
                ),
            ));
        }
        Ok(())
    }
}

/// Mixed-norm order pair and the region to integrate over. `p` is the
/// outer time exponent, `q` the inner space exponent; `f64::INFINITY`
/// selects the essential supremum on that axis.
#[derive(Debug, Clone)]
pub struct MixedNormSpec {
    pub p: f64,
    pub q: f64,
    pub region: RegionSpec,
    /// Relative culling tolerance handed to the diagonal evaluator.
    pub cull_tol: f64,
}

impl MixedNormSpec {
    pub fn new(p: f64, q: f64, region: RegionSpec) -> Result<Self> {
        let spec = MixedNormSpec {
            p,
            q,
            region,
            cull_tol: 1e-8,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(v >= 1.0) {
                return Err(Error::Config {
                    field: if name == "p" { "p" } else { "q" },
                    message: format!("exponent must be >= 1 (or infinity), got {v}"),
                });
            }
        }
        if !(self.cull_tol > 0.0 && self.cull_tol <= 1e-6) {
            return Err(Error::config(
                "cull_tol",
                format!("culling tolerance must lie in (0, 1e-6], got {}", self.cull_tol),
            ));
        }
        self.region.validate()
    }
}

/// Parameters of the |∇|^α frequency-multiplier quadrature.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FracDerivSpec {
    /// Multiplier order; 0 reproduces the plain diagonal value.
    pub alpha: f64,
    /// Half-width added around each transform's magnitude center, in units
    /// of that transform's Gaussian scale. The truncated tail must stay
    /// below 1e-10 of the total, which needs roughly 7.1 scales or more.
    pub freq_box_padding: f64,
    /// Lower bound on quadrature nodes per frequency axis; the rule grows
    /// beyond this automatically to resolve phase oscillation.
    pub freq_samples: usize,
}

impl FracDerivSpec {
    pub fn new(alpha: f64) -> Self {
        FracDerivSpec {
            alpha,
            freq_box_padding: 8.0,
            freq_samples: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::config(
                "alpha",
                format!("multiplier order must be >= 0, got {}", self.alpha),
            ));
        }
        if self.freq_samples < 4 {
            return Err(Error::config(
                "freq_samples",
                "need at least 4 frequency nodes per axis",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn late_focus_region_shape() {
        let r = RegionSpec::late_focus(1024.0, 1, 16, 8).unwrap();
        assert_eq!(r.time_interval, (1024.0 - 32.0, 1024.0));
        assert_eq!(r.space_box, vec![(-0.01, 0.01)]);
    }

    #[test]
    fn early_spread_box_fits_every_drifted_ball() {
        // Worst case: |x| at a box corner plus the drift (at most 1) must
        // stay within R^m.
        for n in 1..=3usize {
            let (r, m) = (16.0, 2u32);
            let reg = RegionSpec::early_spread(r, n, m, 8, 8).unwrap();
            let corner: f64 = reg
                .space_box
                .iter()
                .map(|&(_, hi)| hi * hi)
                .sum::<f64>()
                .sqrt();
            assert!(corner + 1.0 <= r.powi(m as i32) + 1e-9, "n={n}");
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(RegionSpec::new((1.0, 1.0), vec![(0.0, 1.0)], 4, 4, QuadRule::Midpoint).is_err());
        assert!(RegionSpec::new((0.0, 1.0), vec![], 4, 4, QuadRule::Midpoint).is_err());
        assert!(RegionSpec::new((0.0, 1.0), vec![(2.0, 1.0)], 4, 4, QuadRule::Midpoint).is_err());
        assert!(RegionSpec::new((0.0, 1.0), vec![(0.0, 1.0)], 1, 4, QuadRule::Midpoint).is_err());
    }

    #[test]
    fn exponents_validate() {
        let reg = RegionSpec::new((0.0, 1.0), vec![(0.0, 1.0)], 4, 4, QuadRule::Midpoint).unwrap();
        assert!(MixedNormSpec::new(1.0, f64::INFINITY, reg.clone()).is_ok());
        assert!(MixedNormSpec::new(0.5, 2.0, reg.clone()).is_err());
        assert!(MixedNormSpec::new(2.0, f64::NAN, reg).is_err());
    }

    #[test]
    fn frac_spec_validates() {
        assert!(FracDerivSpec::new(1.5).validate().is_ok());
        assert!(FracDerivSpec::new(-1.0).validate().is_err());
    }
}
