//! Forward-mode first-order jets in the two nontrivial coordinates.
//!
//! Metric components on a stationary axisymmetric background depend on
//! `(r, theta)` only. Composing these jets through the component formulas
//! yields partial derivatives that are exact to roundoff, with no symbolic
//! differentiation step to transcribe wrongly.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value plus first partials with respect to `r` and `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub dr: f64,
    pub dth: f64,
}

impl Jet2 {
    pub const fn constant(v: f64) -> Self {
        Self {
            v,
            dr: 0.0,
            dth: 0.0,
        }
    }

    /// The `r` coordinate as a jet.
    pub const fn var_r(r: f64) -> Self {
        Self {
            v: r,
            dr: 1.0,
            dth: 0.0,
        }
    }

    /// The `theta` coordinate as a jet.
    pub const fn var_theta(theta: f64) -> Self {
        Self {
            v: theta,
            dr: 0.0,
            dth: 1.0,
        }
    }

    /// Lifts a scalar function of `r` given with its derivative.
    pub const fn of_r(v: f64, dv_dr: f64) -> Self {
        Self {
            v,
            dr: dv_dr,
            dth: 0.0,
        }
    }

    pub fn sin(self) -> Self {
        Self {
            v: self.v.sin(),
            dr: self.v.cos() * self.dr,
            dth: self.v.cos() * self.dth,
        }
    }

    pub fn cos(self) -> Self {
        Self {
            v: self.v.cos(),
            dr: -self.v.sin() * self.dr,
            dth: -self.v.sin() * self.dth,
        }
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let d = 0.5 / s;
        Self {
            v: s,
            dr: d * self.dr,
            dth: d * self.dth,
        }
    }

    pub fn powi(self, n: i32) -> Self {
        let d = n as f64 * self.v.powi(n - 1);
        Self {
            v: self.v.powi(n),
            dr: d * self.dr,
            dth: d * self.dth,
        }
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        let d = -inv * inv;
        Self {
            v: inv,
            dr: d * self.dr,
            dth: d * self.dth,
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            dr: self.dr + o.dr,
            dth: self.dth + o.dth,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v - o.v,
            dr: self.dr - o.dr,
            dth: self.dth - o.dth,
        }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            dr: self.dr * o.v + self.v * o.dr,
            dth: self.dth * o.v + self.v * o.dth,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        let inv = 1.0 / o.v;
        let v = self.v * inv;
        Jet2 {
            v,
            dr: (self.dr - v * o.dr) * inv,
            dth: (self.dth - v * o.dth) * inv,
        }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2 {
            v: -self.v,
            dr: -self.dr,
            dth: -self.dth,
        }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, s: f64) -> Jet2 {
        Jet2 {
            v: self.v * s,
            dr: self.dr * s,
            dth: self.dth * s,
        }
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, s: f64) -> Jet2 {
        Jet2 {
            v: self.v + s,
            ..self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probe(f: impl Fn(Jet2, Jet2) -> Jet2, r: f64, th: f64) -> (Jet2, f64, f64) {
        let jet = f(Jet2::var_r(r), Jet2::var_theta(th));
        let h = 1e-6;
        let fr = |x: f64| f(Jet2::var_r(x), Jet2::var_theta(th)).v;
        let ft = |x: f64| f(Jet2::var_r(r), Jet2::var_theta(x)).v;
        let fd_r = (fr(r + h) - fr(r - h)) / (2.0 * h);
        let fd_t = (ft(th + h) - ft(th - h)) / (2.0 * h);
        (jet, fd_r, fd_t)
    }

    #[test]
    fn jets_match_central_differences() {
        let f = |r: Jet2, th: Jet2| (r * r + th.cos().powi(2) * 0.01) / (r.sin() + 2.0) - r.recip();
        let (jet, fd_r, fd_t) = probe(f, 0.73, 1.21);
        assert!((jet.dr - fd_r).abs() < 1e-8, "{} vs {}", jet.dr, fd_r);
        assert!((jet.dth - fd_t).abs() < 1e-8, "{} vs {}", jet.dth, fd_t);
    }

    #[test]
    fn sqrt_and_div_compose() {
        let f = |r: Jet2, th: Jet2| (r * th.sin()).sqrt() / (r + 1.0);
        let (jet, fd_r, fd_t) = probe(f, 0.51, 0.9);
        assert!((jet.dr - fd_r).abs() < 1e-8);
        assert!((jet.dth - fd_t).abs() < 1e-8);
    }
}
