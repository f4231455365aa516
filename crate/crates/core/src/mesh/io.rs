//! Plain-text mesh format.
//!
//! ```text
//! nv nc
//! x y            (nv lines)
//! m i1 ... im    (nc lines, 0-based counter-clockwise loops)
//! ```

use std::io::{BufRead, Write};

use super::PolyMesh;
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn read_mesh<R: BufRead>(reader: R) -> Result<PolyMesh> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let mut next = |what: &str| -> Result<(usize, Vec<String>)> {
        match lines.next() {
            Some((n, l)) => Ok((n, l?.split_whitespace().map(String::from).collect())),
            None => Err(parse_err(0, format!("unexpected end of file, expected {what}"))),
        }
    };
    let (ln, head) = next("header")?;
    if head.len() != 2 {
        return Err(parse_err(ln, "header must be `nv nc`"));
    }
    let nv: usize = head[0].parse().map_err(|_| parse_err(ln, "bad vertex count"))?;
    let nc: usize = head[1].parse().map_err(|_| parse_err(ln, "bad cell count"))?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, tok) = next("vertex")?;
        if tok.len() != 2 {
            return Err(parse_err(ln, "vertex line must be `x y`"));
        }
        let x: f64 = tok[0].parse().map_err(|_| parse_err(ln, "bad x"))?;
        let y: f64 = tok[1].parse().map_err(|_| parse_err(ln, "bad y"))?;
        vertices.push([x, y]);
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, tok) = next("cell")?;
        let m: usize = tok
            .first()
            .ok_or_else(|| parse_err(ln, "empty cell line"))?
            .parse()
            .map_err(|_| parse_err(ln, "bad cell size"))?;
        if tok.len() != m + 1 {
            return Err(parse_err(ln, format!("cell declares {m} vertices, found {}", tok.len() - 1)));
        }
        let ids = tok[1..]
            .iter()
            .map(|t| t.parse::<usize>().map_err(|_| parse_err(ln, "bad vertex index")))
            .collect::<Result<Vec<_>>>()?;
        cells.push(ids);
    }
    PolyMesh::new(vertices, cells)
}

pub fn write_mesh<W: Write>(mesh: &PolyMesh, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", mesh.vertices.len(), mesh.cells.len())?;
    for p in &mesh.vertices {
        writeln!(w, "{:e} {:e}", p[0], p[1])?;
    }
    for c in &mesh.cells {
        write!(w, "{}", c.len())?;
        for v in c {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
