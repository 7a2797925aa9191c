//! Cell-centred field export as a CSV grid or legacy VTK structured points.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::state::SimState;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Vtk,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Vtk => "vtk",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "vtk" => Ok(ExportFormat::Vtk),
            other => Err(Error::input(format!("unknown export format `{other}`"))),
        }
    }
}

/// `x,y,<field>...` with one row per cell.
pub fn write_csv(grid: &Grid, fields: &[(&str, &[f64])], mut out: impl Write) -> Result<()> {
    check_lengths(grid, fields)?;
    write!(out, "x,y")?;
    for (name, _) in fields {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for c in 0..grid.num_cells() {
        let (x, y) = grid.center(c);
        write!(out, "{x},{y}")?;
        for (_, f) in fields {
            write!(out, ",{:e}", f[c])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Legacy ASCII VTK with the cell centres as lattice points.
pub fn write_vtk(grid: &Grid, fields: &[(&str, &[f64])], title: &str, mut out: impl Write) -> Result<()> {
    check_lengths(grid, fields)?;
    let (x0, y0) = grid.origin;
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{}", title.replace('\n', " "))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET STRUCTURED_POINTS")?;
    writeln!(out, "DIMENSIONS {} {} 1", grid.nx, grid.ny)?;
    writeln!(out, "ORIGIN {} {} 0", x0 + 0.5 * grid.dx, y0 + 0.5 * grid.dy)?;
    writeln!(out, "SPACING {} {} 1", grid.dx, grid.dy)?;
    writeln!(out, "POINT_DATA {}", grid.num_cells())?;
    for (name, f) in fields {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for row in f.chunks(grid.nx) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
    }
    Ok(())
}

fn check_lengths(grid: &Grid, fields: &[(&str, &[f64])]) -> Result<()> {
    for (name, f) in fields {
        if f.len() != grid.num_cells() {
            return Err(Error::input(format!("field {name} has {} values, grid has {}", f.len(), grid.num_cells())));
        }
    }
    Ok(())
}

pub fn export_fields(grid: &Grid, fields: &[(&str, &[f64])], format: ExportFormat, title: &str, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        ExportFormat::Csv => write_csv(grid, fields, &mut out)?,
        ExportFormat::Vtk => write_vtk(grid, fields, title, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

/// Every checkpoint field of `state`.
pub fn export_snapshot(grid: &Grid, state: &SimState, format: ExportFormat, path: &Path) -> Result<()> {
    let fields: Vec<(&str, &[f64])> = state.fields().iter().map(|(n, f)| (*n, f.as_slice())).collect();
    let title = format!("stage {} t = {} s", state.stage, state.clock);
    export_fields(grid, &fields, format, &title, path)
}
