use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Hermite rule for the weight `exp(-t^2)` on the real line.
#[derive(Clone, Debug)]
pub struct Quadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Quadrature {
    /// Abscissae in strictly increasing order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_i w_i f(t_i)`, approximating `int f(t) exp(-t^2) dt`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }

    /// `E[f(Z)]` for `Z ~ N(0, 1)`.
    pub fn expect_standard_normal<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let s2 = std::f64::consts::SQRT_2;
        self.integrate(|t| f(s2 * t)) / PI.sqrt()
    }
}

/// Builds the `n`-point Gauss–Hermite rule, `2 <= n <= 256`.
///
/// Nodes are the eigenvalues of the Jacobi matrix (Golub–Welsch), polished
/// by Newton steps on the orthonormal Hermite functions; weights come from
/// the derivative at the polished root.
pub fn gauss_hermite(n: usize) -> Result<Quadrature> {
    if !(2..=256).contains(&n) {
        return Err(Error::arg(format!(
            "Gauss-Hermite order must be in 2..=256, got {n}"
        )));
    }
    let mut nodes = jacobi_eigenvalues(n);
    nodes.sort_by(|a, b| a.total_cmp(b));
    let mut weights = Vec::with_capacity(n);
    for z in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = hermite_function(n, *z);
            *z -= p / dp;
        }
        let (_, dp) = hermite_function(n, *z);
        weights.push(2.0 * (-*z * *z).exp() / (dp * dp));
    }
    // symmetric rule: enforce exact mirror images
    for i in 0..n / 2 {
        let z = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    if nodes.windows(2).any(|p| p[0] >= p[1]) || weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::arg(format!(
            "Gauss-Hermite order {n} failed to resolve"
        )));
    }
    Ok(Quadrature { nodes, weights })
}

// Orthonormal Hermite polynomial p_n times exp(-z^2/2) and the matching
// scaled derivative sqrt(2n) p_{n-1} exp(-z^2/2). Scaling keeps both finite
// for every root of order <= 256.
fn hermite_function(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = PI.powf(-0.25) * (-0.5 * z * z).exp();
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

// Eigenvalues of the symmetric tridiagonal matrix with zero diagonal and
// off-diagonal sqrt(j/2), by implicit QL with Wilkinson shifts.
fn jacobi_eigenvalues(n: usize) -> Vec<f64> {
    let mut d = vec![0.0f64; n];
    let mut e: Vec<f64> = (1..n).map(|j| (j as f64 / 2.0).sqrt()).collect();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d
}
