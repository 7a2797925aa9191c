//! Structured cell-centred mesh, lithology and well placement.
//!
//! Cells are indexed row-major with `j = 0` at the bottom of the domain, so
//! `cell = j * nx + i` and elevation increases with `j`. Depths are measured
//! downward from the top of the domain.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Left,
    Right,
    Bottom,
    Top,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face {
    pub owner: usize,
    /// `None` for boundary faces.
    pub neighbor: Option<usize>,
    pub boundary: Option<BoundaryTag>,
    pub axis: Axis,
    /// Unit normal pointing from `owner` to `neighbor` (outward on the boundary).
    pub normal: [f64; 2],
    /// Face length times unit thickness (m²).
    pub area: f64,
    /// Distance between the two cell centres, or centre-to-face on the boundary.
    pub distance: f64,
}

impl Face {
    pub fn is_interior(&self) -> bool {
        self.neighbor.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub origin: (f64, f64),
    pub faces: Vec<Face>,
    cell_faces: Vec<[usize; 4]>,
}

impl Grid {
    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn width(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn height(&self) -> f64 {
        self.ny as f64 * self.dy
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, cell: usize) -> (usize, usize) {
        (cell % self.nx, cell / self.nx)
    }

    /// Cell volume for unit out-of-plane thickness (m³).
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn center(&self, cell: usize) -> (f64, f64) {
        let (i, j) = self.ij(cell);
        (
            self.origin.0 + (i as f64 + 0.5) * self.dx,
            self.origin.1 + (j as f64 + 0.5) * self.dy,
        )
    }

    pub fn cell_centers(&self) -> Vec<(f64, f64)> {
        (0..self.num_cells()).map(|c| self.center(c)).collect()
    }

    /// Face indices of a cell in the order west, east, south, north.
    #[inline]
    pub fn faces_of(&self, cell: usize) -> &[usize; 4] {
        &self.cell_faces[cell]
    }

    /// Sign that converts a face flux (positive along the face normal) into
    /// an outflow from `cell`.
    #[inline]
    pub fn outward_sign(&self, face: usize, cell: usize) -> f64 {
        if self.faces[face].owner == cell {
            1.0
        } else {
            -1.0
        }
    }

    pub fn boundary_faces(&self, tag: BoundaryTag) -> impl Iterator<Item = usize> + '_ {
        self.faces
            .iter()
            .enumerate()
            .filter(move |(_, f)| f.boundary == Some(tag))
            .map(|(k, _)| k)
    }

    /// Column containing `x`; the right domain edge maps to the last column.
    pub fn column_of(&self, x: f64) -> Option<usize> {
        let rel = (x - self.origin.0) / self.dx;
        if !(rel >= 0.0) || x > self.origin.0 + self.width() + 1e-12 {
            return None;
        }
        Some((rel.floor() as usize).min(self.nx - 1))
    }

    pub fn row_of(&self, y: f64) -> Option<usize> {
        let rel = (y - self.origin.1) / self.dy;
        if !(rel >= 0.0) || y > self.origin.1 + self.height() + 1e-12 {
            return None;
        }
        Some((rel.floor() as usize).min(self.ny - 1))
    }
}

/// Builds a uniform grid covering `extent = (width, height)` with cell size
/// `resolution = (dx, dy)`. Cell counts are rounded to the nearest integer.
pub fn build_grid(extent: (f64, f64), resolution: (f64, f64)) -> Result<Grid> {
    build_grid_at(extent, resolution, (0.0, 0.0))
}

pub fn build_grid_at(extent: (f64, f64), resolution: (f64, f64), origin: (f64, f64)) -> Result<Grid> {
    let (w, h) = extent;
    let (dx, dy) = resolution;
    if !(w > 0.0 && h > 0.0) {
        return Err(Error::config(format!("domain extent must be positive, got {w} x {h}")));
    }
    if !(dx > 0.0 && dy > 0.0) {
        return Err(Error::config(format!("grid resolution must be positive, got {dx} x {dy}")));
    }
    let nx = (w / dx).round() as usize;
    let ny = (h / dy).round() as usize;
    if nx == 0 || ny == 0 {
        return Err(Error::config("grid resolution coarser than the domain"));
    }
    if ((nx as f64) * dx - w).abs() > 1e-9 * w || ((ny as f64) * dy - h).abs() > 1e-9 * h {
        return Err(Error::config(format!(
            "domain {w} x {h} m is not a whole number of {dx} x {dy} m cells"
        )));
    }

    let mut faces = Vec::with_capacity((nx + 1) * ny + nx * (ny + 1));
    let mut cell_faces = vec![[usize::MAX; 4]; nx * ny];

    for j in 0..ny {
        for fi in 0..=nx {
            let k = faces.len();
            let face = if fi == 0 {
                Face {
                    owner: j * nx,
                    neighbor: None,
                    boundary: Some(BoundaryTag::Left),
                    axis: Axis::X,
                    normal: [-1.0, 0.0],
                    area: dy,
                    distance: 0.5 * dx,
                }
            } else if fi == nx {
                Face {
                    owner: j * nx + nx - 1,
                    neighbor: None,
                    boundary: Some(BoundaryTag::Right),
                    axis: Axis::X,
                    normal: [1.0, 0.0],
                    area: dy,
                    distance: 0.5 * dx,
                }
            } else {
                Face {
                    owner: j * nx + fi - 1,
                    neighbor: Some(j * nx + fi),
                    boundary: None,
                    axis: Axis::X,
                    normal: [1.0, 0.0],
                    area: dy,
                    distance: dx,
                }
            };
            if fi > 0 {
                cell_faces[j * nx + fi - 1][1] = k;
            }
            if fi < nx {
                cell_faces[j * nx + fi][0] = k;
            }
            faces.push(face);
        }
    }
    for fj in 0..=ny {
        for i in 0..nx {
            let k = faces.len();
            let face = if fj == 0 {
                Face {
                    owner: i,
                    neighbor: None,
                    boundary: Some(BoundaryTag::Bottom),
                    axis: Axis::Y,
                    normal: [0.0, -1.0],
                    area: dx,
                    distance: 0.5 * dy,
                }
            } else if fj == ny {
                Face {
                    owner: (ny - 1) * nx + i,
                    neighbor: None,
                    boundary: Some(BoundaryTag::Top),
                    axis: Axis::Y,
                    normal: [0.0, 1.0],
                    area: dx,
                    distance: 0.5 * dy,
                }
            } else {
                Face {
                    owner: (fj - 1) * nx + i,
                    neighbor: Some(fj * nx + i),
                    boundary: None,
                    axis: Axis::Y,
                    normal: [0.0, 1.0],
                    area: dx,
                    distance: dy,
                }
            };
            if fj > 0 {
                cell_faces[(fj - 1) * nx + i][3] = k;
            }
            if fj < ny {
                cell_faces[fj * nx + i][2] = k;
            }
            faces.push(face);
        }
    }

    Ok(Grid {
        nx,
        ny,
        dx,
        dy,
        origin,
        faces,
        cell_faces,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lithology {
    UpperSand = 0,
    LowerSand = 1,
    Clay = 2,
}

impl Lithology {
    pub const ALL: [Lithology; 3] = [Lithology::UpperSand, Lithology::LowerSand, Lithology::Clay];

    pub fn is_sand(self) -> bool {
        self != Lithology::Clay
    }

    pub fn name(self) -> &'static str {
        match self {
            Lithology::UpperSand => "upper_sand",
            Lithology::LowerSand => "lower_sand",
            Lithology::Clay => "clay",
        }
    }
}

/// Hydrogeological properties of one geological unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialProps {
    /// Mean (geometric) permeability, m².
    pub k_mean: f64,
    pub porosity: f64,
    /// Residual water saturation.
    pub swr: f64,
    /// Residual TCE saturation.
    pub snr: f64,
    /// Entry pressure, Pa.
    pub entry_pressure: f64,
    /// Brooks–Corey pore-size index.
    pub lambda: f64,
    /// Specific surface area, 1/m.
    pub specific_area: f64,
    /// Solid grain density, kg/m³.
    pub solid_density: f64,
}

impl MaterialProps {
    pub fn upper_sand() -> Self {
        MaterialProps {
            k_mean: 1e-12,
            porosity: 0.4,
            swr: 0.08,
            snr: 0.08,
            entry_pressure: 1300.0,
            lambda: 2.0,
            specific_area: 4.99e3,
            solid_density: 2600.0,
        }
    }

    pub fn lower_sand() -> Self {
        MaterialProps {
            k_mean: 0.5e-12,
            porosity: 0.27,
            swr: 0.04,
            snr: 0.04,
            entry_pressure: 1500.0,
            lambda: 2.0,
            specific_area: 4.99e3,
            solid_density: 2600.0,
        }
    }

    pub fn clay() -> Self {
        MaterialProps {
            k_mean: 5e-14,
            porosity: 0.25,
            swr: 0.189,
            snr: 0.04,
            entry_pressure: 3200.0,
            lambda: 2.0,
            specific_area: 4.99e3,
            solid_density: 2600.0,
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let ok = self.porosity > 0.0
            && self.porosity < 1.0
            && self.swr >= 0.0
            && self.snr >= 0.0
            && self.swr + self.snr < 1.0
            && self.entry_pressure >= 0.0
            && self.lambda > 0.0
            && self.k_mean > 0.0
            && self.specific_area > 0.0
            && self.solid_density > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid material properties for {name}: {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WellMode {
    Injection,
    Monitoring,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WellSpec {
    pub name: String,
    /// Horizontal position, m.
    pub x: f64,
    /// Depth of the top of the screen below the surface, m.
    pub depth: f64,
    pub screen_len: f64,
    pub mode: WellMode,
    /// Darcy velocity across the screen-block faces while injecting, m/s.
    pub injection_velocity: f64,
    pub conc_cmc: f64,
    pub conc_nzvi: f64,
    pub conc_tce: f64,
}

impl WellSpec {
    pub fn monitoring(name: &str, x: f64, depth: f64) -> Self {
        WellSpec {
            name: name.to_string(),
            x,
            depth,
            screen_len: 0.02,
            mode: WellMode::Monitoring,
            injection_velocity: 0.0,
            conc_cmc: 0.0,
            conc_nzvi: 0.0,
            conc_tce: 0.0,
        }
    }
}

/// Geometry of the aquifer: extent, resolution, layering, lenses, source strip and wells.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometryConfig {
    pub width: f64,
    pub height: f64,
    pub dx: f64,
    pub dy: f64,
    /// Elevation of the upper/lower sand contact, m above the bottom.
    pub layer_split: f64,
    /// Clay lens rectangles in (x, elevation) coordinates.
    pub lenses: Vec<Rect>,
    pub strip_center: f64,
    pub strip_width: f64,
    pub wells: Vec<WellSpec>,
}

impl Default for GeometryConfig {
    /// Approximate, hand-digitised layout: two lenses in the upper sand (one
    /// directly beneath the infiltration strip) and four in the lower sand.
    fn default() -> Self {
        GeometryConfig {
            width: 35.0,
            height: 12.0,
            dx: 0.2,
            dy: 0.2,
            layer_split: 6.0,
            lenses: vec![
                Rect { x0: 9.8, y0: 9.4, x1: 12.6, y1: 9.8 },
                Rect { x0: 8.0, y0: 7.4, x1: 14.2, y1: 7.8 },
                Rect { x0: 3.0, y0: 3.6, x1: 6.4, y1: 4.0 },
                Rect { x0: 9.2, y0: 3.2, x1: 12.2, y1: 3.6 },
                Rect { x0: 19.6, y0: 2.4, x1: 23.4, y1: 2.8 },
                Rect { x0: 26.0, y0: 4.4, x1: 30.0, y1: 4.8 },
            ],
            strip_center: 11.0,
            strip_width: 2.0,
            wells: vec![
                WellSpec {
                    name: "injection".to_string(),
                    x: 16.1,
                    depth: 6.6,
                    screen_len: 0.02,
                    mode: WellMode::Injection,
                    injection_velocity: 88.0 / crate::units::SECONDS_PER_DAY,
                    conc_cmc: 3.0,
                    conc_nzvi: 0.2,
                    conc_tce: 0.0,
                },
                WellSpec::monitoring("monitoring", 23.1, 6.6),
            ],
        }
    }
}

impl GeometryConfig {
    pub fn injection_well(&self) -> Option<&WellSpec> {
        self.wells.iter().find(|w| w.mode == WellMode::Injection)
    }

    pub fn monitoring_well(&self) -> Option<&WellSpec> {
        self.wells.iter().find(|w| w.mode == WellMode::Monitoring)
    }

    pub fn strip_range(&self) -> (f64, f64) {
        (
            self.strip_center - 0.5 * self.strip_width,
            self.strip_center + 0.5 * self.strip_width,
        )
    }

    pub fn build_grid(&self) -> Result<Grid> {
        build_grid((self.width, self.height), (self.dx, self.dy))
    }
}

/// Per-cell lithology with the resolved property table and permeability field.
#[derive(Clone, Debug)]
pub struct MaterialMap {
    pub lithology: Vec<Lithology>,
    pub props: [MaterialProps; 3],
    /// Per-cell permeability, m². Starts at the unit mean; replaced by the
    /// heterogeneous field for sand cells.
    pub k: Vec<f64>,
    pub layer_split: f64,
}

impl MaterialMap {
    #[inline]
    pub fn props_of(&self, cell: usize) -> &MaterialProps {
        &self.props[self.lithology[cell] as usize]
    }

    #[inline]
    pub fn porosity(&self, cell: usize) -> f64 {
        self.props_of(cell).porosity
    }

    pub fn porosity_field(&self) -> Vec<f64> {
        (0..self.lithology.len()).map(|c| self.porosity(c)).collect()
    }

    pub fn pore_volume(&self, grid: &Grid) -> f64 {
        let v = grid.cell_volume();
        (0..grid.num_cells()).map(|c| self.porosity(c) * v).sum()
    }

    /// Whether a cell lies in the upper stratigraphic layer (by cell centre),
    /// regardless of its own lithology.
    pub fn in_upper_layer(&self, grid: &Grid, cell: usize) -> bool {
        grid.center(cell).1 >= self.layer_split
    }

    pub fn cells_of(&self, lith: Lithology) -> impl Iterator<Item = usize> + '_ {
        self.lithology
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l == lith)
            .map(|(c, _)| c)
    }
}

/// Assigns a lithology to every cell from its centre: inside any lens is clay,
/// otherwise upper or lower sand depending on the layer split.
pub fn assign_lithology(
    grid: &Grid,
    geometry: &GeometryConfig,
    props: [MaterialProps; 3],
) -> Result<MaterialMap> {
    let (x_lo, y_lo) = grid.origin;
    let (x_hi, y_hi) = (x_lo + grid.width(), y_lo + grid.height());
    for (n, lens) in geometry.lenses.iter().enumerate() {
        let inside = lens.x0 >= x_lo - 1e-12
            && lens.x1 <= x_hi + 1e-12
            && lens.y0 >= y_lo - 1e-12
            && lens.y1 <= y_hi + 1e-12
            && lens.x0 < lens.x1
            && lens.y0 < lens.y1;
        if !inside {
            return Err(Error::config(format!("clay lens {n} {lens:?} is not inside the domain")));
        }
    }
    for (lith, p) in Lithology::ALL.iter().zip(props.iter()) {
        p.validate(lith.name())?;
    }

    let lithology: Vec<Lithology> = (0..grid.num_cells())
        .map(|c| {
            let (x, y) = grid.center(c);
            if geometry.lenses.iter().any(|r| r.contains(x, y)) {
                Lithology::Clay
            } else if y >= geometry.layer_split {
                Lithology::UpperSand
            } else {
                Lithology::LowerSand
            }
        })
        .collect();
    let k = lithology.iter().map(|&l| props[l as usize].k_mean).collect();
    Ok(MaterialMap {
        lithology,
        props,
        k,
        layer_split: geometry.layer_split,
    })
}

/// Cells covering a well screen: the column containing `well.x` and every
/// row overlapping the screen interval by a positive length.
pub fn locate_well_cells(grid: &Grid, well: &WellSpec) -> Result<Vec<usize>> {
    let col = grid
        .column_of(well.x)
        .ok_or_else(|| Error::config(format!("well `{}` at x = {} m is outside the domain", well.name, well.x)))?;
    let top = grid.origin.1 + grid.height() - well.depth;
    let bottom = top - well.screen_len;
    if !(well.screen_len > 0.0) || bottom < grid.origin.1 - 1e-12 || top > grid.origin.1 + grid.height() + 1e-12 {
        return Err(Error::config(format!(
            "screen of well `{}` ({} m to {} m depth) is outside the domain",
            well.name,
            well.depth,
            well.depth + well.screen_len
        )));
    }
    if well.injection_velocity < 0.0 {
        return Err(Error::config(format!("well `{}` has negative injection velocity", well.name)));
    }
    let tol = 1e-9 * grid.dy;
    let cells: Vec<usize> = (0..grid.ny)
        .filter(|&j| {
            let lo = grid.origin.1 + j as f64 * grid.dy;
            let hi = lo + grid.dy;
            top.min(hi) - bottom.max(lo) > tol
        })
        .map(|j| grid.cell(col, j))
        .collect();
    if cells.is_empty() {
        return Err(Error::config(format!("well `{}` screen maps to no cells", well.name)));
    }
    Ok(cells)
}

/// Length of each top boundary face lying inside the infiltration strip.
pub fn strip_overlap(grid: &Grid, geometry: &GeometryConfig) -> Vec<(usize, f64)> {
    let (a, b) = geometry.strip_range();
    grid.boundary_faces(BoundaryTag::Top)
        .filter_map(|f| {
            let (i, _) = grid.ij(grid.faces[f].owner);
            let lo = grid.origin.0 + i as f64 * grid.dx;
            let hi = lo + grid.dx;
            let len = b.min(hi) - a.max(lo);
            (len > 1e-12).then_some((f, len))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_props() -> [MaterialProps; 3] {
        [MaterialProps::upper_sand(), MaterialProps::lower_sand(), MaterialProps::clay()]
    }

    #[test]
    fn default_domain_cell_counts() {
        let g = build_grid((35.0, 12.0), (0.2, 0.2)).unwrap();
        assert_eq!((g.nx, g.ny), (175, 60));
        assert_eq!(g.num_cells(), 10_500);
        let fine = build_grid((35.0, 12.0), (0.1, 0.1)).unwrap();
        assert_eq!((fine.nx, fine.ny), (350, 120));
        let area: f64 = (0..fine.num_cells()).map(|_| fine.cell_volume()).sum();
        assert!((area - 420.0).abs() < 1e-9);
    }

    #[test]
    fn two_by_two_connectivity() {
        let g = build_grid((1.0, 1.0), (0.5, 0.5)).unwrap();
        assert_eq!(g.num_cells(), 4);
        let interior: Vec<_> = g.faces.iter().filter(|f| f.is_interior()).collect();
        assert_eq!(interior.len(), 4);
        assert_eq!(g.faces.len() - interior.len(), 8);
        for f in &g.faces {
            assert!(f.is_interior() != f.boundary.is_some());
        }
        // every cell has four distinct faces and each face lists it
        for c in 0..4 {
            for &f in g.faces_of(c) {
                let face = &g.faces[f];
                assert!(face.owner == c || face.neighbor == Some(c));
            }
        }
    }

    #[test]
    fn non_positive_resolution_is_config_error() {
        assert!(matches!(build_grid((1.0, 1.0), (0.0, 0.5)), Err(Error::Config(_))));
        assert!(matches!(build_grid((1.0, 1.0), (-0.5, 0.5)), Err(Error::Config(_))));
        assert!(matches!(build_grid((0.0, 1.0), (0.5, 0.5)), Err(Error::Config(_))));
    }

    #[test]
    fn no_lenses_means_all_sand() {
        let geo = GeometryConfig { lenses: vec![], ..GeometryConfig::default() };
        let g = geo.build_grid().unwrap();
        let m = assign_lithology(&g, &geo, default_props()).unwrap();
        assert!(m.lithology.iter().all(|l| l.is_sand()));
    }

    #[test]
    fn table_one_properties_attached() {
        let geo = GeometryConfig::default();
        let g = geo.build_grid().unwrap();
        let m = assign_lithology(&g, &geo, default_props()).unwrap();
        let top = g.cell(0, g.ny - 1);
        assert_eq!(m.lithology[top], Lithology::UpperSand);
        assert_eq!(m.props_of(top).entry_pressure, 1300.0);
        let (x, y) = (11.0, 9.6);
        let lens_cell = g.cell(g.column_of(x).unwrap(), g.row_of(y).unwrap());
        assert_eq!(m.lithology[lens_cell], Lithology::Clay);
        assert_eq!(m.porosity(lens_cell), 0.25);
        assert_eq!(m.k[lens_cell], 5e-14);
        let bottom = g.cell(0, 0);
        assert_eq!(m.props_of(bottom).entry_pressure, 1500.0);
        assert_eq!(m.props_of(bottom).porosity, 0.27);
    }

    #[test]
    fn lens_outside_domain_rejected() {
        let mut geo = GeometryConfig::default();
        geo.lenses.push(Rect { x0: 30.0, y0: 1.0, x1: 36.0, y1: 2.0 });
        let g = geo.build_grid().unwrap();
        assert!(assign_lithology(&g, &geo, default_props()).is_err());
    }

    #[test]
    fn overlapping_lenses_clay_wins() {
        let mut geo = GeometryConfig::default();
        geo.lenses = vec![
            Rect { x0: 1.0, y0: 1.0, x1: 3.0, y1: 2.0 },
            Rect { x0: 2.0, y0: 1.5, x1: 4.0, y1: 2.5 },
        ];
        let g = geo.build_grid().unwrap();
        let m = assign_lithology(&g, &geo, default_props()).unwrap();
        let c = g.cell(g.column_of(2.5).unwrap(), g.row_of(1.7).unwrap());
        assert_eq!(m.lithology[c], Lithology::Clay);
    }

    #[test]
    fn lithology_is_deterministic_and_pore_volume_stable() {
        let geo = GeometryConfig::default();
        let g = geo.build_grid().unwrap();
        let a = assign_lithology(&g, &geo, default_props()).unwrap();
        let b = assign_lithology(&g, &geo, default_props()).unwrap();
        assert_eq!(a.lithology, b.lithology);
        assert_eq!(a.pore_volume(&g).to_bits(), b.pore_volume(&g).to_bits());
    }

    #[test]
    fn two_centimetre_screen_maps_to_one_cell() {
        let g = build_grid((35.0, 12.0), (0.2, 0.2)).unwrap();
        let well = WellSpec::monitoring("w", 16.1, 6.6);
        let cells = locate_well_cells(&g, &well).unwrap();
        assert_eq!(cells.len(), 1);
        let (i, j) = g.ij(cells[0]);
        assert_eq!(i, 80);
        // screen spans elevations 5.38..5.40 m; its row has its top face at 5.4 m
        let top_face = (j + 1) as f64 * g.dy;
        assert!((top_face - 5.4).abs() < 1e-9);
    }

    #[test]
    fn monitoring_well_seven_metres_downgradient_is_distinct_column() {
        let geo = GeometryConfig::default();
        let g = geo.build_grid().unwrap();
        let inj = locate_well_cells(&g, geo.injection_well().unwrap()).unwrap();
        let mon = locate_well_cells(&g, geo.monitoring_well().unwrap()).unwrap();
        let (ci, ri) = g.ij(inj[0]);
        let (cm, rm) = g.ij(mon[0]);
        assert_eq!(ri, rm);
        assert_ne!(ci, cm);
        assert!(((cm - ci) as f64 * g.dx - 7.0).abs() < 1e-9);
    }

    #[test]
    fn screen_spanning_two_rows() {
        let g = build_grid((35.0, 12.0), (0.2, 0.2)).unwrap();
        let mut well = WellSpec::monitoring("w", 5.0, 6.5);
        well.screen_len = 0.2;
        assert_eq!(locate_well_cells(&g, &well).unwrap().len(), 2);
    }

    #[test]
    fn screen_outside_domain_is_error() {
        let g = build_grid((35.0, 12.0), (0.2, 0.2)).unwrap();
        assert!(locate_well_cells(&g, &WellSpec::monitoring("w", 40.0, 6.6)).is_err());
        assert!(locate_well_cells(&g, &WellSpec::monitoring("w", 5.0, 12.5)).is_err());
    }

    #[test]
    fn strip_overlap_sums_to_width() {
        let geo = GeometryConfig::default();
        let g = geo.build_grid().unwrap();
        let total: f64 = strip_overlap(&g, &geo).iter().map(|(_, l)| l).sum();
        assert!((total - 2.0).abs() < 1e-12);
    }
}
