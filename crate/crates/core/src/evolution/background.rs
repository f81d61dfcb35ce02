//! Per-node background jets for operators that need second metric
//! derivatives. Built once per grid; the background is stationary.

use crate::chart::ChartProfile;
use crate::error::Result;
use crate::gauge::ConnectionCache;
use crate::grid::Grid2D;
use crate::metric::{with_second_partials, Chart, MetricJet};
use crate::par;

/// Spacing of the finite differences producing the background's second
/// partials; independent of the evolution grid, fine enough that the
/// residual `E(g_b)` floor sits near roundoff.
pub const BG_FD_SPACING: f64 = 2.5e-4;

pub struct BackgroundCache {
    pub grid: Grid2D,
    pub lambda: f64,
    pub jets: Vec<MetricJet>,
    pub connections: Vec<ConnectionCache>,
}

impl BackgroundCache {
    pub fn build(profile: &ChartProfile, grid: &Grid2D) -> Result<Self> {
        let params = profile.params;
        let rows: Vec<Vec<(MetricJet, ConnectionCache)>> =
            par::map_rows_collect(grid.n_theta, |j| {
                let theta = grid.theta(j);
                (0..grid.n_r)
                    .map(|i| {
                        let jet = with_second_partials(
                            &params,
                            profile,
                            Chart::KerrStar,
                            grid.r(i),
                            theta,
                            BG_FD_SPACING,
                        );
                        let conn = ConnectionCache::of(&jet).expect("background carries d2g");
                        (jet, conn)
                    })
                    .collect()
            });
        let mut jets = Vec::with_capacity(grid.len());
        let mut connections = Vec::with_capacity(grid.len());
        for row in rows {
            for (jet, conn) in row {
                jets.push(jet);
                connections.push(conn);
            }
        }
        Ok(Self {
            grid: *grid,
            lambda: params.lambda(),
            jets,
            connections,
        })
    }

    #[inline]
    pub fn jet(&self, k: usize) -> &MetricJet {
        &self.jets[k]
    }
}
