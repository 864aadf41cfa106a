//! One-dimensional quadrature rules: Gauss–Legendre nodes/weights (Newton on
//! the Legendre recurrence), midpoint rules, and composite panel assembly.

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on [-1, 1].
/// Accurate to ~1e-15 for the orders used here (n ≤ a few hundred).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be at least 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence: p holds P_n(x), dp its derivative.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A 1-D rule on an interval: paired nodes and weights.
#[derive(Debug, Clone)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Gauss–Legendre rule mapped onto [a, b].
    pub fn gauss(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(b > a) {
            return Err(Error::config("interval", format!("need b > a, got [{a}, {b}]")));
        }
        let (xs, ws) = gauss_legendre(n);
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        Ok(Rule1D {
            nodes: xs.iter().map(|x| c + h * x).collect(),
            weights: ws.iter().map(|w| h * w).collect(),
        })
    }

    /// Midpoint rule with `n` uniform cells on [a, b].
    pub fn midpoint(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(b > a) {
            return Err(Error::config("interval", format!("need b > a, got [{a}, {b}]")));
        }
        if n == 0 {
            return Err(Error::config("samples", "need at least one cell"));
        }
        let h = (b - a) / n as f64;
        Ok(Rule1D {
            nodes: (0..n).map(|i| a + (i as f64 + 0.5) * h).collect(),
            weights: vec![h; n],
        })
    }

    /// Composite Gauss–Legendre: `panels` equal panels with an `n`-point rule
    /// on each. Spectrally accurate per panel; panel count carries the burden
    /// of resolving oscillation.
    pub fn composite_gauss(a: f64, b: f64, n: usize, panels: usize) -> Result<Self> {
        if panels == 0 {
            return Err(Error::config("panels", "need at least one panel"));
        }
        let mut nodes = Vec::with_capacity(n * panels);
        let mut weights = Vec::with_capacity(n * panels);
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let rule = Rule1D::gauss(a + p as f64 * h, a + (p + 1) as f64 * h, n)?;
            nodes.extend(rule.nodes);
            weights.extend(rule.weights);
        }
        Ok(Rule1D { nodes, weights })
    }
}
