//! Radial grids, sampled fields, quadrature and difference operators in `R^N`.
//!
//! A [`RadialGrid`] carries strictly increasing nodes `r[0..n)` with
//! `r_min = r[0] > 0` together with quadrature weights for the measure
//! `a_N r^{N-1} dr`, where `a_N` is the surface area of the unit sphere
//! (`a_1 = 2`, the two half-lines). Weights are dual-cell moments: the cell of
//! node `i` runs between the face midpoints, with the first cell extended down
//! to the origin and the last up to `r_max`. This makes the finite-volume
//! Laplacian below exactly self-adjoint in the discrete inner product and
//! exact on quadratic polynomials at interior nodes.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Surface area of the unit sphere in `R^n`; by convention 2 for `n = 1`.
pub fn angular_constant(dim: usize) -> f64 {
    // a_N = 2 pi^{N/2} / Gamma(N/2); Gamma at integer/half-integer arguments.
    let n = dim as f64;
    let gamma_half_n = if dim % 2 == 0 {
        // (N/2 - 1)!
        (1..dim / 2).map(|k| k as f64).product::<f64>()
    } else {
        // Gamma(1/2 + m) = (2m-1)!! / 2^m * sqrt(pi)
        let m = (dim - 1) / 2;
        let mut g = std::f64::consts::PI.sqrt();
        for k in 0..m {
            g *= k as f64 + 0.5;
        }
        g
    };
    2.0 * std::f64::consts::PI.powf(n / 2.0) / gamma_half_n
}

/// Parameters for the standard graded grid: geometric spacing from `r_min`
/// up to `r_core` (growth factor `growth`), then uniform spacing `h` to `r_max`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub r_min: f64,
    pub r_core: f64,
    pub r_max: f64,
    pub growth: f64,
    pub h: f64,
}

impl GridSpec {
    pub fn standard(dim: usize) -> Self {
        GridSpec {
            dim,
            r_min: 1e-3,
            r_core: 0.25,
            r_max: 25.0,
            growth: 1.008,
            h: 5e-4,
        }
    }

    /// Same layout with every spacing divided by `factor` (for refinement studies).
    pub fn refined(&self, factor: f64) -> Self {
        GridSpec {
            dim: self.dim,
            r_min: self.r_min,
            r_core: self.r_core,
            r_max: self.r_max,
            growth: 1.0 + (self.growth - 1.0) / factor,
            h: self.h / factor,
        }
    }

    pub fn build(&self) -> Result<Arc<RadialGrid>> {
        if !(self.r_min > 0.0 && self.r_min < self.r_core && self.r_core < self.r_max) {
            return Err(Error::Config("grid radii must satisfy 0 < r_min < r_core < r_max".into()));
        }
        if self.growth <= 1.0 || self.h <= 0.0 {
            return Err(Error::Config("grid growth must exceed 1 and h must be positive".into()));
        }
        let mut nodes = Vec::new();
        let mut r = self.r_min;
        while r < self.r_core {
            nodes.push(r);
            r *= self.growth;
            // keep geometric spacing from overshooting the uniform spacing
            if r - nodes[nodes.len() - 1] > self.h {
                break;
            }
        }
        let start = *nodes.last().unwrap_or(&self.r_min);
        let m = ((self.r_max - start) / self.h).ceil() as usize;
        for i in 1..=m {
            nodes.push(start + i as f64 * self.h);
        }
        RadialGrid::from_nodes(self.dim, nodes)
    }
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    dim: usize,
    r: Vec<f64>,
    /// Dual-cell quadrature weights including the angular constant.
    w: Vec<f64>,
    /// Face positions `r_{i+1/2}`, length `n - 1`.
    faces: Vec<f64>,
    angular: f64,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.r == other.r
    }
}

impl RadialGrid {
    pub fn from_nodes(dim: usize, nodes: Vec<f64>) -> Result<Arc<Self>> {
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if nodes.len() < 4 {
            return Err(Error::GridTooSmall);
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Config("nodes must be strictly increasing and positive".into()));
        }
        let n = nodes.len();
        let angular = angular_constant(dim);
        let faces: Vec<f64> = (0..n - 1).map(|i| 0.5 * (nodes[i] + nodes[i + 1])).collect();
        // w_i = a_N * integral of r^{N-1} over the dual cell; first cell extends
        // to the origin (the omitted [0, r_min] sliver is what makes Sum(w) an
        // exact moment of the whole ball), last cell ends at r_max.
        let nn = dim as f64;
        let mom = |a: f64, b: f64| (b.powf(nn) - a.powf(nn)) / nn;
        let mut w = Vec::with_capacity(n);
        w.push(angular * mom(0.0, faces[0]));
        for i in 1..n - 1 {
            w.push(angular * mom(faces[i - 1], faces[i]));
        }
        w.push(angular * mom(faces[n - 2], nodes[n - 1]));
        Ok(Arc::new(RadialGrid { dim, r: nodes, w, faces, angular }))
    }

    /// Uniform grid with `n` nodes at `(i + 1/2) h`, `h = r_max / n`.
    pub fn uniform(dim: usize, n: usize, r_max: f64) -> Result<Arc<Self>> {
        let h = r_max / n as f64;
        Self::from_nodes(dim, (0..n).map(|i| (i as f64 + 0.5) * h).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.r.len()
    }
    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
    pub fn nodes(&self) -> &[f64] {
        &self.r
    }
    pub fn weights(&self) -> &[f64] {
        &self.w
    }
    pub fn r_min(&self) -> f64 {
        self.r[0]
    }
    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }
    pub fn angular(&self) -> f64 {
        self.angular
    }

    /// `a_N * Int f(r) r^{q + N - 1} (log r)^p dr` with `f` sampled at the nodes,
    /// `p` 0 or 1. Piecewise-quadratic interpolation of `f` with exact moments
    /// of the (possibly singular) measure, so mildly singular exponents
    /// (`q > -N`) integrate accurately.
    pub fn weighted_quadrature(&self, f: &[f64], q: f64, with_log: bool) -> f64 {
        assert_eq!(f.len(), self.r.len());
        let n = self.r.len();
        let e = q + self.dim as f64 - 1.0;
        // antiderivatives of r^m and r^m log r
        let prim = |r: f64, m: f64| r.powf(m + 1.0) / (m + 1.0);
        let prim_log = |r: f64, m: f64| {
            if r == 0.0 {
                return 0.0; // r^{m+1} log r -> 0 for m+1 > 0
            }
            let p = r.powf(m + 1.0);
            p * (r.ln() / (m + 1.0) - 1.0 / ((m + 1.0) * (m + 1.0)))
        };
        let moment = |a: f64, b: f64, k: u32| -> f64 {
            let m = e + k as f64;
            if with_log {
                prim_log(b, m) - prim_log(a, m)
            } else {
                prim(b, m) - prim(a, m)
            }
        };
        // integral of the quadratic through (r_j, f_j), j in {s, s+1, s+2},
        // over [a, b], via Lagrange basis expanded in monomials
        let quad_piece = |s: usize, a: f64, b: f64| -> f64 {
            let (x0, x1, x2) = (self.r[s], self.r[s + 1], self.r[s + 2]);
            let (f0, f1, f2) = (f[s], f[s + 1], f[s + 2]);
            let m0 = moment(a, b, 0);
            let m1 = moment(a, b, 1);
            let m2 = moment(a, b, 2);
            let l = |xa: f64, xb: f64, den: f64| (m2 - (xa + xb) * m1 + xa * xb * m0) / den;
            f0 * l(x1, x2, (x0 - x1) * (x0 - x2))
                + f1 * l(x0, x2, (x1 - x0) * (x1 - x2))
                + f2 * l(x0, x1, (x2 - x0) * (x2 - x1))
        };
        let mut total = 0.0;
        // core sliver [0, r_0]: extrapolate with the first quadratic
        total += quad_piece(0, 0.0, self.r[0]);
        for i in 0..n - 1 {
            let (a, b) = (self.r[i], self.r[i + 1]);
            let v = if i == 0 {
                quad_piece(0, a, b)
            } else if i == n - 2 {
                quad_piece(n - 3, a, b)
            } else {
                0.5 * (quad_piece(i - 1, a, b) + quad_piece(i, a, b))
            };
            total += v;
        }
        self.angular * total
    }

    /// Dual-cell averages of `f(r) r^q (log r)^p` against the grid measure:
    /// entry `i` is `(1/w_i) Int_{cell i} f r^{q+N-1} (log r)^p a_N dr`, `p` 0
    /// or 1. This is the finite-volume-consistent sampling of a (possibly
    /// `r^q`-singular) source term: for smooth integrands it agrees with the
    /// node value to second order, while the innermost cell gets the exact
    /// moment of the singularity instead of a point value.
    pub fn cell_averages(&self, f: &[f64], q: f64, with_log: bool) -> Vec<f64> {
        assert_eq!(f.len(), self.r.len());
        let n = self.r.len();
        let e = q + self.dim as f64 - 1.0;
        let prim = |r: f64, m: f64| r.powf(m + 1.0) / (m + 1.0);
        let prim_log = |r: f64, m: f64| {
            if r == 0.0 {
                return 0.0; // r^{m+1} log r -> 0 for m+1 > 0
            }
            let p = r.powf(m + 1.0);
            p * (r.ln() / (m + 1.0) - 1.0 / ((m + 1.0) * (m + 1.0)))
        };
        let moment = |a: f64, b: f64, k: u32| -> f64 {
            let m = e + k as f64;
            if with_log {
                prim_log(b, m) - prim_log(a, m)
            } else {
                prim(b, m) - prim(a, m)
            }
        };
        let quad_piece = |s: usize, a: f64, b: f64| -> f64 {
            let (x0, x1, x2) = (self.r[s], self.r[s + 1], self.r[s + 2]);
            let (f0, f1, f2) = (f[s], f[s + 1], f[s + 2]);
            let m0 = moment(a, b, 0);
            let m1 = moment(a, b, 1);
            let m2 = moment(a, b, 2);
            let l = |xa: f64, xb: f64, den: f64| (m2 - (xa + xb) * m1 + xa * xb * m0) / den;
            f0 * l(x1, x2, (x0 - x1) * (x0 - x2))
                + f1 * l(x0, x2, (x1 - x0) * (x1 - x2))
                + f2 * l(x0, x1, (x2 - x0) * (x2 - x1))
        };
        (0..n)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { self.faces[i - 1] };
                let hi = if i + 1 < n { self.faces[i] } else { self.r[n - 1] };
                let s = i.saturating_sub(1).min(n - 3);
                self.angular * quad_piece(s, lo, hi) / self.w[i]
            })
            .collect()
    }
}

/// A complex-valued radially symmetric function sampled on a [`RadialGrid`].
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(RadialField { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        RadialField { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_fn<F: FnMut(f64) -> Complex64>(grid: Arc<RadialGrid>, mut f: F) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        RadialField { grid, values }
    }

    pub fn from_real_fn<F: FnMut(f64) -> f64>(grid: Arc<RadialGrid>, mut f: F) -> Self {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0))
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
    pub fn im(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im).collect()
    }
    pub fn abs_sq(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn same_grid(&self, other: &RadialField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    fn check_grid(&self, other: &RadialField) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `a_N * Int f(r) r^{N-1} dr` (linear in `f`).
    pub fn integrate(&self) -> Complex64 {
        let w = self.grid.weights();
        self.values
            .iter()
            .zip(w)
            .map(|(v, &wi)| v * wi)
            .sum()
    }

    /// The real inner product `(f, g)_2 = Re Int f conj(g)`.
    pub fn inner(&self, other: &RadialField) -> Result<f64> {
        self.check_grid(other)?;
        let w = self.grid.weights();
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .zip(w)
            .map(|((a, b), &wi)| wi * (a.re * b.re + a.im * b.im))
            .sum())
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let w = self.grid.weights();
        self.values.iter().zip(w).map(|(v, &wi)| wi * v.norm_sqr()).sum()
    }

    /// L2 norm squared restricted to nodes with `lo <= r < hi` (used to study
    /// truncation order away from the quantization-limited innermost cells).
    pub fn l2_norm_sq_window(&self, lo: f64, hi: f64) -> f64 {
        let w = self.grid.weights();
        let r = self.grid.nodes();
        self.values
            .iter()
            .zip(w.iter().zip(r))
            .filter(|(_, (_, &ri))| ri >= lo && ri < hi)
            .map(|(v, (&wi, _))| wi * v.norm_sqr())
            .sum()
    }

    /// `Int |grad f|^2`, assembled from face differences so that
    /// `(-Δf, f)_2 = |grad f|^2` holds exactly for decaying fields.
    pub fn grad_norm_sq(&self) -> f64 {
        let r = self.grid.nodes();
        let nn = self.grid.dim() as f64;
        let mut s = 0.0;
        for i in 0..r.len() - 1 {
            let h = r[i + 1] - r[i];
            let face = self.grid.faces[i];
            let d = self.values[i + 1] - self.values[i];
            s += face.powf(nn - 1.0) * d.norm_sqr() / h;
        }
        self.grid.angular() * s
    }

    pub fn h1_norm_sq(&self) -> f64 {
        self.l2_norm_sq() + self.grad_norm_sq()
    }

    /// `Int |y|^{2p} |f|^2` via the singular-moment quadrature.
    pub fn weighted_l2_sq(&self, p: f64) -> f64 {
        self.grid.weighted_quadrature(&self.abs_sq(), 2.0 * p, false)
    }

    /// First radial derivative: five-point stencils on the nonuniform mesh
    /// (fourth order on smoothly graded grids), one-sided near the ends.
    pub fn derivative(&self) -> Result<RadialField> {
        let n = self.values.len();
        if n < 5 {
            return Err(Error::GridTooSmall);
        }
        let r = self.grid.nodes();
        let v = &self.values;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let s = i.saturating_sub(2).min(n - 5);
            let w = fd_weights(r[i], &r[s..s + 5], 1);
            out[i] = w
                .iter()
                .zip(&v[s..s + 5])
                .map(|(&wk, &vk)| vk * wk)
                .sum();
        }
        RadialField::new(self.grid.clone(), out)
    }

    /// Finite-volume radial Laplacian `f'' + (N-1)/r f'` with zero flux at the
    /// origin and at `r_max`. Self-adjoint in the discrete inner product and
    /// exact on quadratics at every node but the last.
    pub fn laplacian(&self) -> Result<RadialField> {
        let n = self.values.len();
        if n < 4 {
            return Err(Error::GridTooSmall);
        }
        let r = self.grid.nodes();
        let w = self.grid.weights();
        let a = self.grid.angular();
        let nn = self.grid.dim() as f64;
        let v = &self.values;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        let mut flux_prev = Complex64::new(0.0, 0.0); // zero flux at the origin face
        for i in 0..n {
            let flux_next = if i + 1 < n {
                let h = r[i + 1] - r[i];
                a * self.grid.faces[i].powf(nn - 1.0) * (v[i + 1] - v[i]) / h
            } else {
                Complex64::new(0.0, 0.0) // zero flux at the outer face
            };
            out[i] = (flux_next - flux_prev) / w[i];
            flux_prev = flux_next;
        }
        RadialField::new(self.grid.clone(), out)
    }

    /// `Λf = (N/2) f + r f'`, the generator of L2 scaling.
    pub fn scaling_generator(&self) -> Result<RadialField> {
        let d = self.derivative()?;
        let r = self.grid.nodes();
        let half_n = self.grid.dim() as f64 / 2.0;
        let values = self
            .values
            .iter()
            .zip(d.values.iter())
            .zip(r)
            .map(|((v, dv), &ri)| v * half_n + dv * ri)
            .collect();
        RadialField::new(self.grid.clone(), values)
    }

    /// Evaluate the field off the nodes by piecewise cubic Lagrange
    /// interpolation on the 4 nodes nearest `x`. Beyond `r_max` the field is
    /// taken to vanish (all fields here decay); below `r_min` the innermost
    /// stencil extrapolates, which is benign for smooth radial fields since
    /// `r_min` is small.
    pub fn interpolate(&self, x: f64) -> Complex64 {
        let r = self.grid.nodes();
        let n = r.len();
        if x > r[n - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let k = r.partition_point(|&rk| rk <= x);
        let s = k.saturating_sub(2).min(n - 4);
        let mut out = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            let mut l = 1.0;
            for j in 0..4 {
                if i != j {
                    l *= (x - r[s + j]) / (r[s + i] - r[s + j]);
                }
            }
            out += self.values[s + i] * l;
        }
        out
    }

    pub fn map<F: FnMut(Complex64) -> Complex64>(&self, mut f: F) -> RadialField {
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with<F>(&self, other: &RadialField, mut f: F) -> Result<RadialField>
    where
        F: FnMut(Complex64, Complex64) -> Complex64,
    {
        self.check_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        RadialField::new(self.grid.clone(), values)
    }

    pub fn add(&self, other: &RadialField) -> Result<RadialField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RadialField) -> Result<RadialField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> RadialField {
        self.map(|v| v * c)
    }

    /// Pointwise multiply by a real radial function of `r`.
    pub fn mul_radial<F: FnMut(f64) -> f64>(&self, mut f: F) -> RadialField {
        let values = self
            .values
            .iter()
            .zip(self.grid.nodes())
            .map(|(&v, &r)| v * f(r))
            .collect();
        RadialField { grid: self.grid.clone(), values }
    }

    /// All four norms used throughout; `sigma` must satisfy
    /// `0 < sigma < min(N/4, 1)`.
    pub fn norms(&self, sigma: f64) -> Result<Norms> {
        check_sigma(sigma, self.grid.dim())?;
        let l2 = self.l2_norm_sq().sqrt();
        let h1 = self.h1_norm_sq().sqrt();
        Ok(Norms {
            l2,
            h1,
            weighted_l2_y: self.weighted_l2_sq(1.0).sqrt(),
            weighted_l2_inv_sigma: self.weighted_l2_sq(-sigma).sqrt(),
        })
    }

    // -- serialization ------------------------------------------------------

    pub fn to_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,re,im")?;
        for (&r, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(out, "{},{},{}", r, v.re, v.im)?;
        }
        Ok(())
    }

    pub fn to_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.to_csv(std::fs::File::create(path)?)
    }

    pub fn from_csv<R: BufRead>(dim: usize, reader: R) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (k, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (k == 0 && line.starts_with('r')) {
                continue;
            }
            let mut parts = line.split(',');
            let mut next = || -> Result<f64> {
                parts
                    .next()
                    .ok_or_else(|| Error::Config("short CSV row".into()))?
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config("bad float in CSV".into()))
            };
            nodes.push(next()?);
            values.push(Complex64::new(next()?, next()?));
        }
        let grid = RadialGrid::from_nodes(dim, nodes)?;
        RadialField::new(grid, values)
    }

    pub fn from_csv_path<P: AsRef<Path>>(dim: usize, path: P) -> Result<Self> {
        Self::from_csv(dim, BufReader::new(std::fs::File::open(path)?))
    }

    pub fn to_json(&self) -> FieldRecord {
        FieldRecord {
            grid: GridRecord { n: self.grid.dim(), r: self.grid.nodes().to_vec() },
            values: self.values.iter().map(|v| [v.re, v.im]).collect(),
        }
    }

    pub fn from_json(rec: &FieldRecord) -> Result<Self> {
        let grid = RadialGrid::from_nodes(rec.grid.n, rec.grid.r.clone())?;
        RadialField::new(
            grid,
            rec.values.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
        )
    }
}

/// Weights of the `m`-th derivative at `x0` on the arbitrary nodes `xs`
/// (Fornberg's recursion).
pub fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0f64; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

pub fn check_sigma(sigma: f64, dim: usize) -> Result<()> {
    let hi = (dim as f64 / 4.0).min(1.0);
    if sigma > 0.0 && sigma < hi {
        Ok(())
    } else {
        Err(Error::SigmaOutOfRange(sigma, dim))
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    pub weighted_l2_y: f64,
    pub weighted_l2_inv_sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridRecord {
    #[serde(rename = "N")]
    pub n: usize,
    pub r: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldRecord {
    pub grid: GridRecord,
    pub values: Vec<[f64; 2]>,
}
