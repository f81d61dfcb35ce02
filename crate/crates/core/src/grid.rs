//! The `(r, theta)` grid, finite-difference operators, and field storage.
//!
//! The radial grid spans the extended interval with the caps as outermost
//! nodes; no boundary condition is imposed there because the cap surfaces
//! are spacelike. The polar grid is staggered half a cell off the poles,
//! and polar boundaries are closed by parity ghosts: a scalar mode `m` has
//! parity `(-1)^m` across both poles, tensor components carry the parity of
//! their `theta`-index count.
//!
//! Stencil weights are generated by Fornberg's recurrence rather than
//! transcribed tables, so any node arrangement (centered, shifted,
//! one-sided) gets its exact interpolatory coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{KdsError, Result};
use crate::horizon::HorizonData;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub r_min: f64,
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub mode_m: i32,
    pub spacing_r: f64,
    pub spacing_theta: f64,
}

impl Grid2D {
    pub fn r(&self, i: usize) -> f64 {
        self.r_min + self.spacing_r * i as f64
    }

    /// Staggered: the first node sits half a cell off the pole.
    pub fn theta(&self, j: usize) -> f64 {
        self.spacing_theta * (j as f64 + 0.5)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n_r + i
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Grid spanning exactly the extended interval.
pub fn build_grid(
    horizons: &HorizonData,
    n_r: usize,
    n_theta: usize,
    mode_m: i32,
) -> Result<Grid2D> {
    if n_r < 16 || n_theta < 16 {
        return Err(KdsError::GridTooCoarse(format!(
            "need n_r, n_theta >= 16, got {n_r} x {n_theta}"
        )));
    }
    let r_min = horizons.r_inner_cap;
    let r_max = horizons.r_outer_cap;
    Ok(Grid2D {
        r_min,
        r_max,
        n_r,
        n_theta,
        mode_m,
        spacing_r: (r_max - r_min) / (n_r - 1) as f64,
        spacing_theta: std::f64::consts::PI / n_theta as f64,
    })
}

/// Fornberg weights: coefficients of `f(x_j)` approximating the `m`-th
/// derivative at `z` from the nodes `x`, exact for polynomials of degree
/// `x.len() - 1`.
pub fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    assert!(n > m);
    let mut c = vec![vec![0.0f64; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
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
    c.into_iter().map(|row| row[m]).collect()
}

/// Per-row radial stencil: for each node, a window start and its weights.
#[derive(Debug, Clone)]
pub struct RadialStencil {
    pub width: usize,
    pub starts: Vec<usize>,
    pub weights: Vec<f64>,
}

impl RadialStencil {
    /// Builds stencils for `deriv`-th derivative at 4th-order interior
    /// accuracy: window width `deriv + 4` (+1 when that count is even, to
    /// keep centered interior windows symmetric).
    pub fn build(n_r: usize, spacing: f64, deriv: usize) -> Self {
        let mut width = deriv + 4;
        if width % 2 == 0 {
            width += 1;
        }
        let width = width.min(n_r);
        let half = width / 2;
        let mut starts = Vec::with_capacity(n_r);
        let mut weights = Vec::with_capacity(n_r * width);
        let xs: Vec<f64> = (0..width).map(|k| k as f64 * spacing).collect();
        for i in 0..n_r {
            let start = i.saturating_sub(half).min(n_r - width);
            starts.push(start);
            let z = (i - start) as f64 * spacing;
            weights.extend(fd_weights(z, &xs, deriv));
        }
        Self {
            width,
            starts,
            weights,
        }
    }

    /// Applies the stencil along one contiguous `r`-row.
    pub fn apply_row(&self, row: &[f64], out: &mut [f64]) {
        for i in 0..row.len() {
            let start = self.starts[i];
            let w = &self.weights[i * self.width..(i + 1) * self.width];
            let mut acc = 0.0;
            for (k, &wk) in w.iter().enumerate() {
                acc += wk * row[start + k];
            }
            out[i] = acc;
        }
    }
}

/// Centered polar stencil with parity closure. Weights are the uniform
/// centered Fornberg weights; ghost indices reflect across the poles with
/// the plane's parity sign.
#[derive(Debug, Clone)]
pub struct PolarStencil {
    pub half: usize,
    pub weights: Vec<f64>,
}

impl PolarStencil {
    pub fn build(spacing: f64, deriv: usize) -> Self {
        let mut width = deriv + 4;
        if width % 2 == 0 {
            width += 1;
        }
        let half = width / 2;
        let xs: Vec<f64> = (0..width).map(|k| (k as f64 - half as f64) * spacing).collect();
        Self {
            half,
            weights: fd_weights(0.0, &xs, deriv),
        }
    }
}

/// Reflects a polar index into range, returning `(index, sign)` where the
/// sign applies the plane parity once per reflection.
#[inline]
pub fn reflect_theta(j: isize, n_theta: usize, parity: f64) -> (usize, f64) {
    let n = n_theta as isize;
    let mut jj = j;
    let mut sign = 1.0;
    // Staggered grid: node -1 mirrors node 0, node n mirrors node n-1.
    loop {
        if jj < 0 {
            jj = -1 - jj;
            sign *= parity;
        } else if jj >= n {
            jj = 2 * n - 1 - jj;
            sign *= parity;
        } else {
            break;
        }
    }
    (jj as usize, sign)
}

/// A real scalar plane over the grid, `r` contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub n_r: usize,
    pub n_theta: usize,
    pub data: Vec<f64>,
}

impl Field2D {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            n_r: grid.n_r,
            n_theta: grid.n_theta,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..grid.n_theta {
            let theta = grid.theta(j);
            for i in 0..grid.n_r {
                out.data[grid.idx(i, j)] = f(grid.r(i), theta);
            }
        }
        out
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n_r + i]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[j * self.n_r + i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_r..(j + 1) * self.n_r]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Radial derivative into a new field.
    pub fn deriv_r(&self, stencil: &RadialStencil) -> Field2D {
        let mut out = Field2D {
            n_r: self.n_r,
            n_theta: self.n_theta,
            data: vec![0.0; self.data.len()],
        };
        for j in 0..self.n_theta {
            let row = self.row(j);
            stencil.apply_row(row, &mut out.data[j * self.n_r..(j + 1) * self.n_r]);
        }
        out
    }

    /// Polar derivative with parity ghosts into a new field.
    pub fn deriv_theta(&self, stencil: &PolarStencil, parity: f64) -> Field2D {
        let mut out = Field2D {
            n_r: self.n_r,
            n_theta: self.n_theta,
            data: vec![0.0; self.data.len()],
        };
        let half = stencil.half as isize;
        for j in 0..self.n_theta {
            for (k, &w) in stencil.weights.iter().enumerate() {
                let (jj, sign) = reflect_theta(j as isize + k as isize - half, self.n_theta, parity);
                let src = &self.data[jj * self.n_r..(jj + 1) * self.n_r];
                let dst = &mut out.data[j * self.n_r..(j + 1) * self.n_r];
                let ws = w * sign;
                if ws != 0.0 {
                    for i in 0..self.n_r {
                        dst[i] += ws * src[i];
                    }
                }
            }
        }
        out
    }
}

/// Pairwise summation over a slice: deterministic association independent
/// of chunking, with O(log n) error growth.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// A multi-component field: one plane per real component, each with its
/// polar parity. Complex scalars store `(re, im)` planes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    pub planes: Vec<Field2D>,
    pub parities: Vec<f64>,
}

impl FieldSet {
    pub fn zeros(grid: &Grid2D, parities: &[f64]) -> Self {
        Self {
            planes: parities.iter().map(|_| Field2D::zeros(grid)).collect(),
            parities: parities.to_vec(),
        }
    }

    pub fn n_planes(&self) -> usize {
        self.planes.len()
    }

    pub fn axpy(&mut self, a: f64, x: &FieldSet) {
        for (p, q) in self.planes.iter_mut().zip(&x.planes) {
            for (v, w) in p.data.iter_mut().zip(&q.data) {
                *v += a * w;
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        for p in &mut self.planes {
            for v in &mut p.data {
                *v *= a;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.planes.iter().fold(0.0f64, |m, p| m.max(p.max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.planes.iter().all(|p| p.is_finite())
    }
}

/// Parity vector for a complex scalar mode `m`: two planes (re, im), both
/// with parity `(-1)^m`.
pub fn scalar_parities(mode_m: i32) -> Vec<f64> {
    let p = if mode_m % 2 == 0 { 1.0 } else { -1.0 };
    vec![p, p]
}

/// Index pairs `(a, b)`, `a <= b`, enumerating the 10 components of a
/// symmetric 4-tensor in row-major order.
pub const SYM_PAIRS: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

/// Parities of the symmetric-tensor planes for axisymmetric (`m = 0`)
/// fields: odd exactly when one index is `theta`.
pub fn tensor_parities() -> Vec<f64> {
    SYM_PAIRS
        .iter()
        .map(|&(a, b)| {
            let thetas = (a == 2) as usize + (b == 2) as usize;
            if thetas % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// Parities of one-form planes for `m = 0`: `(t, r, theta, phi)`.
pub fn oneform_parities() -> Vec<f64> {
    vec![1.0, 1.0, -1.0, 1.0]
}

/// Axis-regularity factor for the component `(a, b)` of a smooth
/// axisymmetric symmetric tensor: the slowest admissible vanishing rate at
/// the poles, with the correct reflection parity. Multiplying a smooth even
/// profile by this factor yields fields on which the polar stencils stay
/// accurate through the `1/sin` contractions of the metric.
pub fn axis_factor(a: usize, b: usize, theta: f64) -> f64 {
    let s = theta.sin();
    let c = theta.cos();
    let n_theta = (a == 2) as usize + (b == 2) as usize;
    let n_phi = (a == 3) as usize + (b == 3) as usize;
    let mut f = s.powi((2 * n_phi) as i32);
    if n_theta == 1 {
        f *= s * c;
    } else if n_theta == 2 {
        // even, order-one component
    }
    f
}

/// Same for one-form components `(t, r, theta, phi)`.
pub fn axis_factor_oneform(c: usize, theta: f64) -> f64 {
    match c {
        2 => theta.sin() * theta.cos(),
        3 => theta.sin() * theta.sin(),
        _ => 1.0,
    }
}

/// The four axis-factor shapes with two derivatives, for the rescaled
/// polar differentiation of tensor planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisShape {
    One,
    SinCos,
    Sin2,
    Sin3Cos,
}

impl AxisShape {
    pub fn eval(self, theta: f64) -> (f64, f64, f64) {
        let s = theta.sin();
        let c = theta.cos();
        match self {
            AxisShape::One => (1.0, 0.0, 0.0),
            AxisShape::SinCos => (s * c, c * c - s * s, -4.0 * s * c),
            AxisShape::Sin2 => (s * s, 2.0 * s * c, 2.0 * (c * c - s * s)),
            AxisShape::Sin3Cos => (
                s * s * s * c,
                3.0 * s * s * c * c - s * s * s * s,
                6.0 * s * c * c * c - 10.0 * s * s * s * c,
            ),
        }
    }

    pub fn tensor_component(a: usize, b: usize) -> Self {
        let n_theta = (a == 2) as usize + (b == 2) as usize;
        let n_phi = (a == 3) as usize + (b == 3) as usize;
        match (n_theta, n_phi) {
            (0, 0) | (2, 0) => AxisShape::One,
            (1, 0) => AxisShape::SinCos,
            (0, 1) | (0, 2) => AxisShape::Sin2,
            (1, 1) => AxisShape::Sin3Cos,
            _ => unreachable!("symmetric 4-tensor components only"),
        }
    }

    pub fn oneform_component(c: usize) -> Self {
        match c {
            2 => AxisShape::SinCos,
            3 => AxisShape::Sin2,
            _ => AxisShape::One,
        }
    }
}

/// Polar differentiation through the axis-regular rescaling: for a plane
/// known to have the structure `h = f(theta) w` with `w` smooth and
/// pole-even, differentiate `w = h / f` and reconstruct by the product
/// rule. This is exact for regular fields and removes the `1/sin`
/// amplification at the pole rows that plain stencils on the vanishing
/// components suffer. Returns `(d_theta h, d_theta^2 h)`.
pub fn deriv_theta_rescaled(
    plane: &Field2D,
    shape: AxisShape,
    st1: &PolarStencil,
    st2: &PolarStencil,
    grid: &Grid2D,
) -> (Field2D, Field2D) {
    if shape == AxisShape::One {
        // parity is even for scalar-like components
        return (plane.deriv_theta(st1, 1.0), plane.deriv_theta(st2, 1.0));
    }
    let mut w = plane.clone();
    let mut factors = Vec::with_capacity(grid.n_theta);
    for j in 0..grid.n_theta {
        let fdd = shape.eval(grid.theta(j));
        factors.push(fdd);
        let inv = 1.0 / fdd.0;
        for v in &mut w.data[j * grid.n_r..(j + 1) * grid.n_r] {
            *v *= inv;
        }
    }
    // every rescaled plane is pole-even
    let w_t = w.deriv_theta(st1, 1.0);
    let w_tt = w.deriv_theta(st2, 1.0);
    let mut d1 = Field2D {
        n_r: plane.n_r,
        n_theta: plane.n_theta,
        data: vec![0.0; plane.data.len()],
    };
    let mut d2 = d1.clone();
    for j in 0..grid.n_theta {
        let (f, df, ddf) = factors[j];
        for i in 0..grid.n_r {
            let k = j * grid.n_r + i;
            d1.data[k] = df * w.data[k] + f * w_t.data[k];
            d2.data[k] = ddf * w.data[k] + 2.0 * df * w_t.data[k] + f * w_tt.data[k];
        }
    }
    (d1, d2)
}
