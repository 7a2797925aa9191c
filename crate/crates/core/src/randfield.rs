//! Seeded, spatially correlated log-normal permeability fields.
//!
//! `ln k` is sampled as a stationary Gaussian field with exponential
//! covariance `σ² exp(-|h|/ℓ)` by circulant embedding on a periodic grid of
//! twice the domain size. One complex FFT yields two independent real
//! fields; the real part drives the upper sand and the imaginary part the
//! lower sand.

use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{Grid, Lithology, MaterialMap};

#[derive(Clone, Debug, PartialEq)]
pub struct FieldSpec {
    /// Variance of `ln k` for the upper and lower sand.
    pub log_variance: [f64; 2],
    /// Correlation length of the exponential covariance, m.
    pub correlation_length: f64,
    pub seed: u64,
    /// Shift each layer so the sample geometric mean equals the unit mean.
    pub condition_mean: bool,
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec {
            log_variance: [0.2, 0.2],
            correlation_length: 1.0,
            seed: 20_240_601,
            condition_mean: true,
        }
    }
}

impl FieldSpec {
    pub fn validate(&self) -> Result<()> {
        if self.log_variance.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::config("log-variance must be non-negative"));
        }
        if !(self.correlation_length > 0.0) {
            return Err(Error::config("correlation length must be positive"));
        }
        Ok(())
    }
}

/// Two independent unit-variance Gaussian fields on the grid with exponential
/// correlation of length `ell`.
pub fn gaussian_field_pair(grid: &Grid, ell: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let (nx, ny) = (grid.nx, grid.ny);
    let mx = 2 * nx;
    let my = 2 * ny;
    let m = mx * my;

    // first row of the block-circulant covariance
    let mut spec: Vec<Complex<f64>> = Vec::with_capacity(m);
    for b in 0..my {
        let hy = b.min(my - b) as f64 * grid.dy;
        for a in 0..mx {
            let hx = a.min(mx - a) as f64 * grid.dx;
            let h = (hx * hx + hy * hy).sqrt();
            spec.push(Complex::new((-h / ell).exp(), 0.0));
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft_x = planner.plan_fft_forward(mx);
    let fft_y = planner.plan_fft_forward(my);
    fft2(&mut spec, mx, my, fft_x.as_ref(), fft_y.as_ref());

    // eigenvalues are real for the symmetric embedding; clip round-off negatives
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<Complex<f64>> = spec
        .iter()
        .map(|lam| {
            let amp = (lam.re.max(0.0) / m as f64).sqrt();
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex::new(amp * re, amp * im)
        })
        .collect();
    fft2(&mut w, mx, my, fft_x.as_ref(), fft_y.as_ref());

    let mut a = Vec::with_capacity(nx * ny);
    let mut b = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let z = w[j * mx + i];
            a.push(z.re);
            b.push(z.im);
        }
    }
    (a, b)
}

fn fft2(
    data: &mut [Complex<f64>],
    mx: usize,
    my: usize,
    fft_x: &dyn rustfft::Fft<f64>,
    fft_y: &dyn rustfft::Fft<f64>,
) {
    for row in data.chunks_exact_mut(mx) {
        fft_x.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); my];
    for a in 0..mx {
        for b in 0..my {
            col[b] = data[b * mx + a];
        }
        fft_y.process(&mut col);
        for b in 0..my {
            data[b * mx + a] = col[b];
        }
    }
}

/// Per-cell permeability: log-normal correlated field in each sand layer with
/// geometric mean equal to that unit's `k_mean`; clay keeps its constant value.
pub fn generate_log_normal_field(grid: &Grid, materials: &MaterialMap, spec: &FieldSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let (g_upper, g_lower) = gaussian_field_pair(grid, spec.correlation_length, spec.seed);
    let mut k = vec![0.0; grid.num_cells()];
    for (n, (lith, gauss)) in [(Lithology::UpperSand, &g_upper), (Lithology::LowerSand, &g_lower)]
        .into_iter()
        .enumerate()
    {
        let sigma = spec.log_variance[n].sqrt();
        let ln_mean = materials.props[lith as usize].k_mean.ln();
        let cells: Vec<usize> = materials.cells_of(lith).collect();
        if cells.is_empty() {
            continue;
        }
        let shift = if spec.condition_mean && sigma > 0.0 {
            cells.iter().map(|&c| sigma * gauss[c]).sum::<f64>() / cells.len() as f64
        } else {
            0.0
        };
        for &c in &cells {
            k[c] = if sigma > 0.0 {
                (ln_mean + sigma * gauss[c] - shift).exp()
            } else {
                materials.props[lith as usize].k_mean
            };
        }
    }
    for c in materials.cells_of(Lithology::Clay) {
        k[c] = materials.props[Lithology::Clay as usize].k_mean;
    }
    Ok(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImportMode {
    Nearest,
    Bilinear,
}

/// Reads `(x, y, value)` triplets, one per line; `#` starts a comment and
/// separators may be whitespace or commas.
pub fn read_samples(reader: impl BufRead) -> Result<Vec<(f64, f64, f64)>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::input(format!("line {}: malformed sample `{line}`", n + 1)))?;
        if vals.len() != 3 || vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::input(format!("line {}: expected `x y value`", n + 1)));
        }
        out.push((vals[0], vals[1], vals[2]));
    }
    if out.is_empty() {
        return Err(Error::input("field file contains no samples"));
    }
    Ok(out)
}

/// Maps scattered or lattice samples onto cell centres.
pub fn import_field(grid: &Grid, samples: &[(f64, f64, f64)], mode: ImportMode) -> Result<Vec<f64>> {
    let (x0, y0) = grid.origin;
    let (x1, y1) = (x0 + grid.width(), y0 + grid.height());
    let tol = 1e-9 * (grid.width() + grid.height());
    for &(x, y, _) in samples {
        if x < x0 - tol || x > x1 + tol || y < y0 - tol || y > y1 + tol {
            return Err(Error::input(format!("sample at ({x}, {y}) lies outside the domain")));
        }
    }
    match mode {
        ImportMode::Nearest => Ok((0..grid.num_cells())
            .map(|c| {
                let (cx, cy) = grid.center(c);
                let mut best = (f64::INFINITY, 0.0);
                for &(x, y, v) in samples {
                    let d = (x - cx).powi(2) + (y - cy).powi(2);
                    if d < best.0 {
                        best = (d, v);
                    }
                }
                best.1
            })
            .collect()),
        ImportMode::Bilinear => bilinear(grid, samples),
    }
}

fn unique_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    v
}

fn bilinear(grid: &Grid, samples: &[(f64, f64, f64)]) -> Result<Vec<f64>> {
    let xs = unique_sorted(samples.iter().map(|s| s.0).collect());
    let ys = unique_sorted(samples.iter().map(|s| s.1).collect());
    if xs.len() * ys.len() != samples.len() {
        return Err(Error::input("bilinear import needs samples on a complete rectilinear lattice"));
    }
    let locate = |axis: &[f64], v: f64| axis.iter().position(|a| (a - v).abs() <= 1e-12 * a.abs().max(1.0));
    let mut lattice = vec![f64::NAN; xs.len() * ys.len()];
    for &(x, y, v) in samples {
        let (i, j) = (locate(&xs, x).unwrap(), locate(&ys, y).unwrap());
        lattice[j * xs.len() + i] = v;
    }
    if lattice.iter().any(|v| v.is_nan()) {
        return Err(Error::input("duplicate samples in lattice"));
    }
    let bracket = |axis: &[f64], v: f64| -> (usize, usize, f64) {
        if axis.len() == 1 || v <= axis[0] {
            return (0, 0, 0.0);
        }
        if v >= axis[axis.len() - 1] {
            let n = axis.len() - 1;
            return (n, n, 0.0);
        }
        let hi = axis.partition_point(|&a| a <= v);
        let lo = hi - 1;
        (lo, hi, (v - axis[lo]) / (axis[hi] - axis[lo]))
    };
    Ok((0..grid.num_cells())
        .map(|c| {
            let (cx, cy) = grid.center(c);
            let (i0, i1, tx) = bracket(&xs, cx);
            let (j0, j1, ty) = bracket(&ys, cy);
            let at = |i: usize, j: usize| lattice[j * xs.len() + i];
            let bottom = if tx == 0.0 { at(i0, j0) } else { (1.0 - tx) * at(i0, j0) + tx * at(i1, j0) };
            let top = if tx == 0.0 { at(i0, j1) } else { (1.0 - tx) * at(i0, j1) + tx * at(i1, j1) };
            if ty == 0.0 {
                bottom
            } else {
                (1.0 - ty) * bottom + ty * top
            }
        })
        .collect())
}

/// Writes a per-cell field as `x y value` lines at cell centres.
pub fn write_samples(grid: &Grid, field: &[f64], mut out: impl Write) -> Result<()> {
    writeln!(out, "# x y value")?;
    for (c, v) in field.iter().enumerate() {
        let (x, y) = grid.center(c);
        writeln!(out, "{x} {y} {v:e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{assign_lithology, build_grid, GeometryConfig, MaterialProps};

    fn props() -> [MaterialProps; 3] {
        [MaterialProps::upper_sand(), MaterialProps::lower_sand(), MaterialProps::clay()]
    }

    fn default_setup() -> (Grid, MaterialMap) {
        let geo = GeometryConfig::default();
        let g = geo.build_grid().unwrap();
        let m = assign_lithology(&g, &geo, props()).unwrap();
        (g, m)
    }

    #[test]
    fn zero_variance_gives_constant_layers() {
        let (g, m) = default_setup();
        let spec = FieldSpec { log_variance: [0.0, 0.0], ..FieldSpec::default() };
        let k = generate_log_normal_field(&g, &m, &spec).unwrap();
        for c in 0..g.num_cells() {
            assert_eq!(k[c], m.props_of(c).k_mean);
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let (g, m) = default_setup();
        let spec = FieldSpec::default();
        let a = generate_log_normal_field(&g, &m, &spec).unwrap();
        let b = generate_log_normal_field(&g, &m, &spec).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        let other = generate_log_normal_field(&g, &m, &FieldSpec { seed: 99, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn clay_untouched_and_positive() {
        let (g, m) = default_setup();
        let k = generate_log_normal_field(&g, &m, &FieldSpec::default()).unwrap();
        assert!(k.iter().all(|&v| v > 0.0));
        for c in m.cells_of(Lithology::Clay) {
            assert_eq!(k[c], 5e-14);
        }
    }

    #[test]
    fn layer_geometric_mean_matches_unit_mean() {
        let (g, m) = default_setup();
        let k = generate_log_normal_field(&g, &m, &FieldSpec::default()).unwrap();
        for lith in [Lithology::UpperSand, Lithology::LowerSand] {
            let cells: Vec<_> = m.cells_of(lith).collect();
            let gm = (cells.iter().map(|&c| k[c].ln()).sum::<f64>() / cells.len() as f64).exp();
            let target = m.props[lith as usize].k_mean;
            assert!((gm / target - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn bilinear_lattice_stays_within_sample_range() {
        let g = build_grid((35.0, 12.0), (0.2, 0.2)).unwrap();
        let mut samples = Vec::new();
        for j in 0..10 {
            for i in 0..10 {
                let x = 35.0 * i as f64 / 9.0;
                let y = 12.0 * j as f64 / 9.0;
                samples.push((x, y, 1e-12 * (1.0 + ((i * 7 + j * 3) % 5) as f64)));
            }
        }
        let k = import_field(&g, &samples, ImportMode::Bilinear).unwrap();
        let lo = samples.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
        let hi = samples.iter().map(|s| s.2).fold(0.0, f64::max);
        assert!(k.iter().all(|&v| v >= lo && v <= hi));
    }

    #[test]
    fn one_sample_per_cell_is_identity() {
        let g = build_grid((2.0, 1.0), (0.5, 0.5)).unwrap();
        let field: Vec<f64> = (0..g.num_cells()).map(|c| 1e-12 * (c as f64 + 1.0)).collect();
        let mut buf = Vec::new();
        write_samples(&g, &field, &mut buf).unwrap();
        let samples = read_samples(buf.as_slice()).unwrap();
        for mode in [ImportMode::Nearest, ImportMode::Bilinear] {
            let k = import_field(&g, &samples, mode).unwrap();
            assert_eq!(k, field, "{mode:?}");
        }
    }

    #[test]
    fn constant_file_gives_constant_field() {
        let g = build_grid((2.0, 1.0), (0.25, 0.25)).unwrap();
        let samples = vec![(0.0, 0.0, 3e-12), (2.0, 0.0, 3e-12), (0.0, 1.0, 3e-12), (2.0, 1.0, 3e-12)];
        for mode in [ImportMode::Nearest, ImportMode::Bilinear] {
            let k = import_field(&g, &samples, mode).unwrap();
            assert!(k.iter().all(|&v| v == 3e-12));
        }
    }

    #[test]
    fn malformed_and_out_of_range_files_are_rejected() {
        assert!(read_samples("1 2\n".as_bytes()).is_err());
        assert!(read_samples("1 2 abc\n".as_bytes()).is_err());
        let g = build_grid((2.0, 1.0), (0.5, 0.5)).unwrap();
        assert!(import_field(&g, &[(5.0, 0.5, 1.0)], ImportMode::Nearest).is_err());
    }
}
