//! Result tables, their CSV and aligned-text renderings, and VTK export.

use std::io::{self, Write};
use std::path::Path;

use sgfem::mesh::Mesh;
use sgfem::solutions::ManufacturedCase;
use sgfem::space::DofLayout;

/// How a column prints in the text table. CSV always uses the shortest
/// round-trip form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Int,
    /// Four significant digits, scientific.
    Sci,
    /// Two decimals, for rates.
    Fixed2,
    /// Shortest round-trip.
    Plain,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn text(&self, style: Style) -> String {
        match (self, style) {
            (Cell::Float(x), Style::Sci) => format!("{x:.3e}"),
            (Cell::Float(x), Style::Fixed2) => format!("{x:.2}"),
            (Cell::Empty, _) => "-".into(),
            _ => self.csv(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    pub columns: Vec<(String, Style)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[(&str, Style)]) -> Self {
        Self { name: name.to_owned(), columns: columns.iter().map(|&(c, s)| (c.to_owned(), s)).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.columns.iter().map(|(c, _)| c.as_str()))?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::csv))?;
        }
        out.flush()
    }

    pub fn render_text(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().zip(&self.columns).map(|(c, (_, s))| c.text(*s)).collect()).collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, (name, _))| cells.iter().map(|r| r[j].chars().count()).chain([name.chars().count()]).max().unwrap_or(0))
            .collect();
        let line = |items: Vec<&str>| {
            let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
            padded.join("  ").trim_end().to_owned() + "\n"
        };
        let mut s = format!("# {}\n", self.name);
        s += &line(self.columns.iter().map(|(c, _)| c.as_str()).collect());
        for r in &cells {
            s += &line(r.iter().map(String::as_str).collect());
        }
        s
    }
}

/// Legacy ASCII VTK of the vertex values: `u_h`, `p_h` and, when an exact
/// solution is given, `|u - u_h|`.
pub fn write_vtk<W: Write>(mut w: W, mesh: &Mesh, layout: &DofLayout, velocity: &[f64], pressure: &[f64], exact: Option<&ManufacturedCase>) -> io::Result<()> {
    let nv = mesh.num_vertices();
    let nt = mesh.num_triangles();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "sgfem solution")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {nv} double")?;
    for p in mesh.vertices() {
        writeln!(w, "{} {} 0", p[0], p[1])?;
    }
    writeln!(w, "CELLS {nt} {}", 4 * nt)?;
    for t in mesh.triangles() {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(w, "5")?;
    }
    let uh = |v: usize| {
        let s = layout.vertex_dof(v);
        [velocity[DofLayout::vector_index(s, 0)], velocity[DofLayout::vector_index(s, 1)]]
    };
    writeln!(w, "POINT_DATA {nv}")?;
    writeln!(w, "VECTORS u_h double")?;
    for v in 0..nv {
        let u = uh(v);
        writeln!(w, "{} {} 0", u[0], u[1])?;
    }
    writeln!(w, "SCALARS p_h double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for p in &pressure[..nv] {
        writeln!(w, "{p}")?;
    }
    if let Some(case) = exact {
        writeln!(w, "SCALARS u_error double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in 0..nv {
            let u = uh(v);
            let e = case.value(mesh.vertex(v));
            writeln!(w, "{}", (e[0] - u[0]).hypot(e[1] - u[1]))?;
        }
    }
    Ok(())
}

pub fn write_file(path: &Path, f: impl FnOnce(&mut io::BufWriter<std::fs::File>) -> io::Result<()>) -> io::Result<()> {
    let mut w = io::BufWriter::new(std::fs::File::create(path)?);
    f(&mut w)?;
    w.flush()
}
