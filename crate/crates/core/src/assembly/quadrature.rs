//! Collapsed-coordinate (Stroud conical product) rules on the reference
//! simplex, built from Gauss-Legendre rules on `[0, 1]`.

use std::f64::consts::PI;

/// A quadrature rule on the reference simplex of dimension `dim`, with points
/// stored as barycentric coordinates.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub dim: usize,
    pub points: Vec<[f64; 4]>,
    /// Weights summing to the reference simplex measure `1 / dim!`.
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        // Tricomi initial guess
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // derivative of P_m
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

impl QuadratureRule {
    /// Rule on the reference simplex exact for polynomials of total degree
    /// `degree`.
    pub fn simplex(dim: usize, degree: usize) -> Self {
        // the collapsed map adds `dim - 1` powers of (1 - u) to the first variable
        let m = (degree + dim).div_ceil(2).max(1);
        let (x, w) = gauss_legendre(m);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        match dim {
            1 => {
                for (xi, wi) in x.iter().zip(&w) {
                    points.push([1.0 - xi, *xi, 0.0, 0.0]);
                    weights.push(*wi);
                }
            }
            2 => {
                for (u, wu) in x.iter().zip(&w) {
                    for (v, wv) in x.iter().zip(&w) {
                        let xi = *u;
                        let eta = v * (1.0 - u);
                        points.push([1.0 - xi - eta, xi, eta, 0.0]);
                        weights.push(wu * wv * (1.0 - u));
                    }
                }
            }
            3 => {
                for (u, wu) in x.iter().zip(&w) {
                    for (v, wv) in x.iter().zip(&w) {
                        for (s, ws) in x.iter().zip(&w) {
                            let xi = *u;
                            let eta = v * (1.0 - u);
                            let zeta = s * (1.0 - u) * (1.0 - v);
                            points.push([1.0 - xi - eta - zeta, xi, eta, zeta]);
                            weights.push(wu * wv * ws * (1.0 - u) * (1.0 - u) * (1.0 - v));
                        }
                    }
                }
            }
            _ => panic!("unsupported simplex dimension {dim}"),
        }
        QuadratureRule {
            dim,
            points,
            weights,
            degree,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Reference simplex measure `1 / dim!`.
    pub fn reference_measure(&self) -> f64 {
        match self.dim {
            1 => 1.0,
            2 => 0.5,
            _ => 1.0 / 6.0,
        }
    }

    /// Iterator over `(barycentric point, weight scaled to a simplex of
    /// measure `measure`)`.
    pub fn scaled<'a>(&'a self, measure: f64) -> impl Iterator<Item = (&'a [f64; 4], f64)> + 'a {
        let s = measure / self.reference_measure();
        self.points
            .iter()
            .zip(self.weights.iter().map(move |w| w * s))
    }
}
