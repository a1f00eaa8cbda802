//! Gmsh v2.2 ASCII import/export and legacy VTK export.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::ops::compact;
use super::Mesh;
use crate::error::{invalid, Error, Result};
use crate::geometry::Point3;

/// Result of parsing a `.msh` file.
#[derive(Debug, Clone)]
pub struct MshContent {
    pub mesh: Mesh,
    /// Elements dropped because their type is unsupported or of lower dimension.
    pub skipped_elements: usize,
}

pub fn read_msh(path: impl AsRef<Path>) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    let content = parse_msh(&text)?;
    if content.skipped_elements > 0 {
        log::warn!("msh import skipped {} elements", content.skipped_elements);
    }
    Ok(content.mesh)
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, section: &str) -> Result<&'a str> {
        match self.it.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l.trim())
            }
            None => Err(Error::Parse {
                line: self.line + 1,
                msg: format!("unexpected end of file in {section} section"),
            }),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: self.line,
            msg: msg.into(),
        })
    }

    fn count(&mut self, section: &str) -> Result<usize> {
        let l = self.next(section)?;
        match l.parse() {
            Ok(n) => Ok(n),
            Err(_) => self.err(format!("expected an entry count in {section}, found '{l}'")),
        }
    }

    fn end(&mut self, section: &str) -> Result<()> {
        let tag = format!("$End{}", &section[1..]);
        let l = self.next(section)?;
        if l != tag {
            return self.err(format!("expected {tag}, found '{l}'"));
        }
        Ok(())
    }
}

fn nodes_of_type(t: usize) -> Option<usize> {
    match t {
        1 => Some(2),
        2 => Some(3),
        4 => Some(4),
        _ => None,
    }
}

/// Parses Gmsh v2.2 ASCII text. Only the highest-dimensional elements among
/// segments (type 1), triangles (2) and tetrahedra (4) are kept; their first
/// tag (the physical group) becomes the color.
pub fn parse_msh(text: &str) -> Result<MshContent> {
    let mut lines = Lines {
        it: text.lines().enumerate(),
        line: 0,
    };
    let mut nodes: Option<(Vec<Point3>, HashMap<usize, usize>)> = None;
    // (nodes per element, node ids, color)
    let mut raw: Vec<(usize, Vec<usize>, i32)> = Vec::new();
    let mut skipped = 0;
    let mut saw_format = false;
    let mut saw_elements = false;
    while let Some((i, l)) = lines.it.next() {
        lines.line = i + 1;
        let l = l.trim();
        match l {
            "" => continue,
            "$MeshFormat" => {
                let v = lines.next("$MeshFormat")?;
                let f: Vec<&str> = v.split_whitespace().collect();
                if f.len() < 2 || !f[0].starts_with('2') {
                    return lines.err(format!("unsupported mesh format '{v}', expected version 2.2"));
                }
                if f[1] != "0" {
                    return lines.err("binary msh files are not supported");
                }
                lines.end("$MeshFormat")?;
                saw_format = true;
            }
            "$Nodes" => {
                let n = lines.count("$Nodes")?;
                let mut pts = Vec::with_capacity(n);
                let mut ids = HashMap::with_capacity(n);
                for _ in 0..n {
                    let l = lines.next("$Nodes")?;
                    let f: Vec<&str> = l.split_whitespace().collect();
                    let parsed = (f.len() == 4).then(|| {
                        let id = f[0].parse::<usize>().ok()?;
                        let c: Option<Vec<f64>> = f[1..].iter().map(|s| s.parse().ok()).collect();
                        Some((id, c?))
                    });
                    match parsed.flatten() {
                        Some((id, c)) => {
                            ids.insert(id, pts.len());
                            pts.push([c[0], c[1], c[2]]);
                        }
                        None => return lines.err(format!("malformed node line '{l}'")),
                    }
                }
                lines.end("$Nodes")?;
                nodes = Some((pts, ids));
            }
            "$Elements" => {
                let n = lines.count("$Elements")?;
                for _ in 0..n {
                    let l = lines.next("$Elements")?;
                    let f: Option<Vec<i64>> = l.split_whitespace().map(|s| s.parse().ok()).collect();
                    let f = match f {
                        Some(f) if f.len() >= 3 => f,
                        _ => return lines.err(format!("malformed element line '{l}'")),
                    };
                    let ntags = f[2].max(0) as usize;
                    let Some(npe) = nodes_of_type(f[1] as usize) else {
                        skipped += 1;
                        continue;
                    };
                    if f.len() != 3 + ntags + npe {
                        return lines.err(format!(
                            "element line has {} fields, expected {}",
                            f.len(),
                            3 + ntags + npe
                        ));
                    }
                    let color = if ntags > 0 { f[3] as i32 } else { 0 };
                    let ids = f[3 + ntags..].iter().map(|&x| x as usize).collect();
                    raw.push((npe, ids, color));
                }
                lines.end("$Elements")?;
                saw_elements = true;
            }
            s if s.starts_with('$') && !s.starts_with("$End") => {
                let tag = format!("$End{}", &s[1..]);
                loop {
                    if lines.next(s)? == tag {
                        break;
                    }
                }
            }
            other => return lines.err(format!("unexpected content '{other}'")),
        }
    }
    if !saw_format {
        return lines.err("missing $MeshFormat section");
    }
    let Some((pts, ids)) = nodes else {
        return lines.err("missing $Nodes section");
    };
    if !saw_elements {
        return lines.err("missing $Elements section");
    }
    let npe = raw.iter().map(|r| r.0).max().unwrap_or(2);
    let mut elements = Vec::new();
    let mut colors = Vec::new();
    for (n, node_ids, color) in raw {
        if n != npe {
            skipped += 1;
            continue;
        }
        for id in node_ids {
            match ids.get(&id) {
                Some(&k) => elements.push(k),
                None => return invalid(format!("element refers to unknown node {id}")),
            }
        }
        colors.push(color);
    }
    let m = compact(&pts, elements, npe, colors);
    let mesh = Mesh::with_colors(m.vertices().to_vec(), m.elements().to_vec(), npe, m.colors().to_vec())?;
    Ok(MshContent {
        mesh,
        skipped_elements: skipped,
    })
}

/// Writes Gmsh v2.2 ASCII; colors are stored as physical and elementary tags.
pub fn write_msh(path: impl AsRef<Path>, mesh: &Mesh) -> Result<()> {
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.n_vertices());
    for (i, v) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(s, "{} {:?} {:?} {:?}", i + 1, v[0], v[1], v[2]);
    }
    s.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(s, "{}", mesh.n_elements());
    let t = match mesh.nodes_per_element() {
        2 => 1,
        3 => 2,
        _ => 4,
    };
    for e in 0..mesh.n_elements() {
        let c = mesh.colors()[e];
        let _ = write!(s, "{} {t} 2 {c} {c}", e + 1);
        for &i in mesh.element(e) {
            let _ = write!(s, " {}", i + 1);
        }
        s.push('\n');
    }
    s.push_str("$EndElements\n");
    std::fs::write(path, s)?;
    Ok(())
}

/// Values attached to vertices or elements for VTK export.
#[derive(Debug, Clone, Copy)]
pub enum VtkData<'a> {
    Real(&'a [f64]),
    /// Written as two scalar arrays `<name>_re` and `<name>_im`.
    Complex(&'a [Complex64]),
    Vector(&'a [Point3]),
}

#[derive(Debug, Clone, Copy)]
pub struct VtkField<'a> {
    pub name: &'a str,
    pub data: VtkData<'a>,
    /// Element data instead of vertex data.
    pub on_cells: bool,
}

impl<'a> VtkField<'a> {
    pub fn point(name: &'a str, data: VtkData<'a>) -> Self {
        VtkField {
            name,
            data,
            on_cells: false,
        }
    }

    pub fn cell(name: &'a str, data: VtkData<'a>) -> Self {
        VtkField {
            name,
            data,
            on_cells: true,
        }
    }

    fn len(&self) -> usize {
        match self.data {
            VtkData::Real(d) => d.len(),
            VtkData::Complex(d) => d.len(),
            VtkData::Vector(d) => d.len(),
        }
    }
}

fn write_scalars(s: &mut String, name: &str, values: impl Iterator<Item = f64>) {
    let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
    for v in values {
        let _ = writeln!(s, "{v:?}");
    }
}

/// Legacy ASCII VTK unstructured grid with optional vertex and cell fields.
pub fn write_vtk(path: impl AsRef<Path>, mesh: &Mesh, fields: &[VtkField]) -> Result<()> {
    for f in fields {
        let expected = if f.on_cells {
            mesh.n_elements()
        } else {
            mesh.n_vertices()
        };
        if f.len() != expected {
            return invalid(format!(
                "field '{}' has {} values, expected {expected}",
                f.name,
                f.len()
            ));
        }
        if f.name.is_empty() || f.name.contains(char::is_whitespace) {
            return invalid(format!("invalid VTK field name '{}'", f.name));
        }
    }
    let npe = mesh.nodes_per_element();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\ngalerkin mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.n_vertices());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:?} {:?} {:?}", v[0], v[1], v[2]);
    }
    let _ = writeln!(s, "CELLS {} {}", mesh.n_elements(), mesh.n_elements() * (npe + 1));
    for e in 0..mesh.n_elements() {
        let _ = write!(s, "{npe}");
        for &i in mesh.element(e) {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
    }
    let cell_type = match npe {
        2 => 3,
        3 => 5,
        _ => 10,
    };
    let _ = writeln!(s, "CELL_TYPES {}", mesh.n_elements());
    for _ in 0..mesh.n_elements() {
        let _ = writeln!(s, "{cell_type}");
    }
    for (on_cells, header, n) in [
        (false, "POINT_DATA", mesh.n_vertices()),
        (true, "CELL_DATA", mesh.n_elements()),
    ] {
        let group: Vec<&VtkField> = fields.iter().filter(|f| f.on_cells == on_cells).collect();
        if group.is_empty() {
            continue;
        }
        let _ = writeln!(s, "{header} {n}");
        for f in group {
            match f.data {
                VtkData::Real(d) => write_scalars(&mut s, f.name, d.iter().copied()),
                VtkData::Complex(d) => {
                    write_scalars(&mut s, &format!("{}_re", f.name), d.iter().map(|z| z.re));
                    write_scalars(&mut s, &format!("{}_im", f.name), d.iter().map(|z| z.im));
                }
                VtkData::Vector(d) => {
                    let _ = writeln!(s, "VECTORS {} double", f.name);
                    for v in d {
                        let _ = writeln!(s, "{:?} {:?} {:?}", v[0], v[1], v[2]);
                    }
                }
            }
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}
