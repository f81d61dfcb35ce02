//! Stationary vector fields on the extended region: the Killing fields,
//! coordinate fields, and the redshift blend.

use std::sync::Arc;

use crate::chart::ChartProfile;
use crate::curvature::VectorJet;
use crate::metric::{kerr_star_raw, SpacetimePoint};
use crate::params::BlackHoleParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorLabel {
    T,
    Phi,
    N,
    Coordinate(usize),
    Custom,
}

type ComponentFn = dyn Fn(&SpacetimePoint) -> VectorJet + Send + Sync;

/// A vector field given by components and their coordinate partials in the
/// point's chart. Built-in fields are stationary and axisymmetric, so only
/// the `(r, theta)` slots of the partials are populated.
#[derive(Clone)]
pub struct Vectorfield {
    pub label: VectorLabel,
    eval: Arc<ComponentFn>,
}

impl std::fmt::Debug for Vectorfield {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Vectorfield({:?})", self.label)
    }
}

impl Vectorfield {
    pub fn new(label: VectorLabel, eval: impl Fn(&SpacetimePoint) -> VectorJet + Send + Sync + 'static) -> Self {
        Self {
            label,
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, point: &SpacetimePoint) -> VectorJet {
        (self.eval)(point)
    }

    /// The stationary Killing field `T = d_t*`.
    pub fn killing_t() -> Self {
        Self::new(VectorLabel::T, |_| ([1.0, 0.0, 0.0, 0.0], [[0.0; 4]; 4]))
    }

    /// The axial Killing field `Phi = d_phi*`.
    pub fn killing_phi() -> Self {
        Self::new(VectorLabel::Phi, |_| ([0.0, 0.0, 0.0, 1.0], [[0.0; 4]; 4]))
    }

    /// A coordinate field `d_mu`.
    pub fn coordinate(mu: usize) -> Self {
        Self::new(VectorLabel::Coordinate(mu), move |_| {
            let mut v = [0.0; 4];
            v[mu] = 1.0;
            (v, [[0.0; 4]; 4])
        })
    }

    /// The redshift blend `N = chi(r) T + (1 - chi(r)) (-grad t*)^sharp`,
    /// equal to `T` on the middle interval and to the future-directed slice
    /// normal direction near and beyond the horizons. Timelikeness is
    /// verified by `redshift_multiplier_build`, not assumed here.
    pub fn redshift(params: &BlackHoleParams, profile: &ChartProfile) -> Self {
        let params = *params;
        let profile = profile.clone();
        Self::new(VectorLabel::N, move |point| {
            redshift_jet(&params, &profile, point.r, point.theta)
        })
    }
}

/// Blend weight: 1 on the middle interval, 0 on the `|s| = 1` plateaus,
/// following the profile's own transition intervals.
pub(crate) fn blend_chi(profile: &ChartProfile, r: f64) -> (f64, f64) {
    let (s, ds) = profile.s(r);
    // chi = 1 - s^2 reuses the C^3 transition of the chart profile.
    (1.0 - s * s, -2.0 * s * ds)
}

pub(crate) fn redshift_jet(
    _params: &BlackHoleParams,
    profile: &ChartProfile,
    r: f64,
    theta: f64,
) -> VectorJet {
    let (_, _, g_inv, dg_inv) = kerr_star_raw(profile, r, theta);
    let (chi, dchi) = blend_chi(profile, r);
    let mut v = [0.0; 4];
    let mut dx = [[0.0; 4]; 4];
    for mu in 0..4 {
        v[mu] = -(1.0 - chi) * g_inv[mu][0];
        // d_r picks up the blend derivative; d_theta only the metric's.
        dx[1][mu] = dchi * g_inv[mu][0] - (1.0 - chi) * dg_inv[1][mu][0];
        dx[2][mu] = -(1.0 - chi) * dg_inv[2][mu][0];
    }
    v[0] += chi;
    dx[1][0] += dchi;
    (v, dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::chart_profile_default;
    use crate::horizon::horizon_radii;
    use crate::metric::metric_kerr_star;
    use crate::params::validate_params;

    #[test]
    fn redshift_equals_t_on_middle_interval() {
        let p = validate_params(3.0, 0.1, 0.0).unwrap();
        let h = horizon_radii(&p, 0.05).unwrap();
        let pr = chart_profile_default(&p, &h).unwrap();
        let (m1, m2) = pr.middle_interval();
        let n = Vectorfield::redshift(&p, &pr);
        let (v, _) = n.eval(&SpacetimePoint::kerr_star(0.5 * (m1 + m2), 1.0));
        assert_eq!(v, [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn redshift_is_timelike_on_extended_grid() {
        for a in [0.0, 1e-4] {
            let p = validate_params(3.0, 0.1, a).unwrap();
            let h = horizon_radii(&p, 0.05).unwrap();
            let pr = chart_profile_default(&p, &h).unwrap();
            let n = Vectorfield::redshift(&p, &pr);
            for k in 0..48 {
                let r = h.r_inner_cap + (h.r_outer_cap - h.r_inner_cap) * (k as f64 + 0.5) / 48.0;
                for j in 0..8 {
                    let th = std::f64::consts::PI * (j as f64 + 0.5) / 8.0;
                    let pt = SpacetimePoint::kerr_star(r, th);
                    let (v, _) = n.eval(&pt);
                    let jet = metric_kerr_star(&p, &pr, &pt).unwrap();
                    let mut norm = 0.0;
                    for m in 0..4 {
                        for nn in 0..4 {
                            norm += jet.g[m][nn] * v[m] * v[nn];
                        }
                    }
                    assert!(norm < 0.0, "a={a} r={r} th={th}: g(N,N)={norm}");
                }
            }
        }
    }
}
