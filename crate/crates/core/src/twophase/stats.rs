//! Source-zone architecture: pools, ganglia and layer split of TCE mass.

use super::FluidProps;
use crate::grid::{Grid, Lithology, MaterialMap};

/// Saturation separating pools from ganglia.
pub const DEFAULT_POOL_THRESHOLD: f64 = 0.3;

#[derive(Clone, Debug, PartialEq)]
pub struct Pool {
    pub cells: Vec<usize>,
    pub mass: f64,
    pub max_sn: f64,
    /// Some pool cell sits directly above a clay cell.
    pub on_clay: bool,
    /// Some pool cell lies in the bottom row.
    pub on_bedrock: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceZoneStats {
    /// Total TCE mass, kg.
    pub total_mass: f64,
    pub upper_fraction: f64,
    pub lower_fraction: f64,
    pub pool_fraction: f64,
    pub ganglia_fraction: f64,
    pub pools: Vec<Pool>,
}

/// Classifies TCE mass cell by cell; pools are 4-connected groups of cells
/// at or above `threshold`.
pub fn source_zone_stats(
    sn: &[f64],
    materials: &MaterialMap,
    grid: &Grid,
    fluids: &FluidProps,
    threshold: f64,
) -> SourceZoneStats {
    let v = grid.cell_volume();
    let mass: Vec<f64> = sn
        .iter()
        .enumerate()
        .map(|(c, &s)| fluids.rho_n * materials.porosity(c) * s.max(0.0) * v)
        .collect();
    let total: f64 = mass.iter().sum();
    let mut upper = 0.0;
    let mut pool_mass = 0.0;
    for c in 0..sn.len() {
        if materials.in_upper_layer(grid, c) {
            upper += mass[c];
        }
        if sn[c] >= threshold {
            pool_mass += mass[c];
        }
    }

    let mut seen = vec![false; sn.len()];
    let mut pools = Vec::new();
    for start in 0..sn.len() {
        if seen[start] || sn[start] < threshold {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut cells = Vec::new();
        while let Some(c) = stack.pop() {
            cells.push(c);
            let (i, j) = grid.ij(c);
            let mut push = |nb: usize| {
                if !seen[nb] && sn[nb] >= threshold {
                    seen[nb] = true;
                    stack.push(nb);
                }
            };
            if i > 0 {
                push(c - 1);
            }
            if i + 1 < grid.nx {
                push(c + 1);
            }
            if j > 0 {
                push(c - grid.nx);
            }
            if j + 1 < grid.ny {
                push(c + grid.nx);
            }
        }
        cells.sort_unstable();
        let on_clay = cells
            .iter()
            .any(|&c| c >= grid.nx && materials.lithology[c - grid.nx] == Lithology::Clay);
        let on_bedrock = cells.iter().any(|&c| c < grid.nx);
        pools.push(Pool {
            mass: cells.iter().map(|&c| mass[c]).sum(),
            max_sn: cells.iter().map(|&c| sn[c]).fold(0.0, f64::max),
            cells,
            on_clay,
            on_bedrock,
        });
    }

    let frac = |m: f64| if total > 0.0 { m / total } else { 0.0 };
    let (upper_fraction, pool_fraction) = (frac(upper), frac(pool_mass));
    SourceZoneStats {
        total_mass: total,
        upper_fraction,
        lower_fraction: if total > 0.0 { 1.0 - upper_fraction } else { 0.0 },
        pool_fraction,
        ganglia_fraction: if total > 0.0 { 1.0 - pool_fraction } else { 0.0 },
        pools,
    }
}
