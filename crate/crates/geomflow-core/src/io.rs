//! CSV/JSON serialization: grid functions, curves with their JSON sidecars,
//! matrix-field dumps and run manifests. All floats are written with 17
//! significant digits so identical runs produce byte-identical files.

use crate::curves::{Curve, EuclideanCurve, LagrangianCurve, ProjectiveCurve, StarCurve};
use crate::error::{Error, Result};
use crate::numerics::{ComplexGridFunction, GridFunction, MatrixField, PeriodicGrid};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_lines(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    Ok(())
}

fn parse_f64(tok: &str, row: usize) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse { row, detail: format!("bad float `{tok}`: {e}") })
}

/// Parse a CSV body with an expected header and fixed column count.
fn read_rows(path: &Path, expect_header: &str) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { row: 1, detail: "empty file".into() })?;
    if header.trim() != expect_header {
        return Err(Error::Parse {
            row: 1,
            detail: format!("expected header `{expect_header}`, got `{}`", header.trim()),
        });
    }
    let ncols = expect_header.split(',').count();
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let row = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != ncols {
            return Err(Error::Parse {
                row,
                detail: format!("expected {ncols} columns, got {}", toks.len()),
            });
        }
        rows.push(
            toks.iter()
                .map(|t| parse_f64(t, row))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    Ok(rows)
}

/// `x,value` rows for a real field.
pub fn write_grid_function(path: &Path, f: &GridFunction) -> Result<()> {
    let grid = f.grid();
    write_lines(
        path,
        "x,value",
        f.values()
            .iter()
            .enumerate()
            .map(|(j, v)| format!("{},{}", fmt_f64(grid.point(j)), fmt_f64(*v))),
    )
}

/// `x,re,im` rows for a complex field.
pub fn write_complex_grid_function(path: &Path, f: &ComplexGridFunction) -> Result<()> {
    let grid = f.grid();
    write_lines(
        path,
        "x,re,im",
        f.values().iter().enumerate().map(|(j, v)| {
            format!("{},{},{}", fmt_f64(grid.point(j)), fmt_f64(v.re), fmt_f64(v.im))
        }),
    )
}

pub fn read_grid_function(path: &Path, grid: PeriodicGrid) -> Result<GridFunction> {
    let rows = read_rows(path, "x,value")?;
    if rows.len() != grid.len() {
        return Err(Error::Parse {
            row: rows.len() + 1,
            detail: format!("expected {} rows, got {}", grid.len(), rows.len()),
        });
    }
    GridFunction::new(grid, rows.into_iter().map(|r| r[1]).collect())
}

/// Named columns against the grid coordinate: `x,<name1>,<name2>,...`.
pub fn write_columns(path: &Path, grid: &PeriodicGrid, cols: &[(&str, &[f64])]) -> Result<()> {
    let header = std::iter::once("x".to_string())
        .chain(cols.iter().map(|(n, _)| n.to_string()))
        .collect::<Vec<_>>()
        .join(",");
    let rows = (0..grid.len()).map(|j| {
        std::iter::once(fmt_f64(grid.point(j)))
            .chain(cols.iter().map(|(_, v)| fmt_f64(v[j])))
            .collect::<Vec<_>>()
            .join(",")
    });
    write_lines(path, &header, rows)
}

/// Time series: `t,v0,...,v{n-1}` per snapshot.
pub fn write_time_series(path: &Path, times: &[f64], rows: &[Vec<f64>]) -> Result<()> {
    if times.len() != rows.len() {
        return Err(Error::ShapeMismatch("times/rows mismatch".into()));
    }
    let width = rows.first().map(|r| r.len()).unwrap_or(0);
    let header = std::iter::once("t".to_string())
        .chain((0..width).map(|j| format!("v{j}")))
        .collect::<Vec<_>>()
        .join(",");
    write_lines(
        path,
        &header,
        times.iter().zip(rows).map(|(t, r)| {
            std::iter::once(fmt_f64(*t))
                .chain(r.iter().map(|v| fmt_f64(*v)))
                .collect::<Vec<_>>()
                .join(",")
        }),
    )
}

/// Sidecar describing the geometry of a curve file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSidecar {
    pub geometry: String,
    pub n: usize,
    pub period: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monodromy: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_matrix: Option<Vec<Vec<f64>>>,
}

fn sidecar_path(csv: &Path) -> std::path::PathBuf {
    csv.with_extension("json")
}

/// Write `<base>.csv` plus `<base>.json` for any curve geometry.
pub fn write_curve(csv: &Path, curve: &Curve) -> Result<()> {
    let grid = curve.grid();
    let sidecar = match curve {
        Curve::Euclidean(c) => {
            write_columns(
                csv,
                grid,
                &[
                    ("u1", c.component(0).values()),
                    ("u2", c.component(1).values()),
                    ("u3", c.component(2).values()),
                ],
            )?;
            CurveSidecar {
                geometry: "euclidean".into(),
                n: grid.len(),
                period: grid.length(),
                slope: None,
                monodromy: None,
                dim: None,
                slope_matrix: None,
            }
        }
        Curve::Projective(u) => {
            let vals = u.values();
            write_columns(csv, grid, &[("u", &vals)])?;
            CurveSidecar {
                geometry: "projective".into(),
                n: grid.len(),
                period: grid.length(),
                slope: Some(u.slope()),
                monodromy: None,
                dim: None,
                slope_matrix: None,
            }
        }
        Curve::Star(c) => {
            let pts = c.points()?;
            let g1: Vec<f64> = pts.iter().map(|p| p[0]).collect();
            let g2: Vec<f64> = pts.iter().map(|p| p[1]).collect();
            write_columns(csv, grid, &[("g1", &g1), ("g2", &g2)])?;
            let m = c.monodromy()?;
            CurveSidecar {
                geometry: "star".into(),
                n: grid.len(),
                period: grid.length(),
                slope: None,
                monodromy: Some(vec![
                    vec![m[(0, 0)], m[(0, 1)]],
                    vec![m[(1, 0)], m[(1, 1)]],
                ]),
                dim: None,
                slope_matrix: None,
            }
        }
        Curve::Lagrangian(c) => {
            let dim = c.dim();
            let vals = c.values();
            let mut cols: Vec<(String, Vec<f64>)> = Vec::new();
            for r in 0..dim {
                for col in r..dim {
                    cols.push((
                        format!("m{}{}", r + 1, col + 1),
                        vals.iter().map(|m| m[(r, col)]).collect(),
                    ));
                }
            }
            let col_refs: Vec<(&str, &[f64])> =
                cols.iter().map(|(n, v)| (n.as_str(), v.as_slice())).collect();
            write_columns(csv, grid, &col_refs)?;
            CurveSidecar {
                geometry: "lagrangian".into(),
                n: grid.len(),
                period: grid.length(),
                slope: None,
                monodromy: None,
                dim: Some(dim),
                slope_matrix: Some(
                    (0..dim)
                        .map(|r| (0..dim).map(|col| c.slope()[(r, col)]).collect())
                        .collect(),
                ),
            }
        }
    };
    let json = serde_json::to_string_pretty(&sidecar)?;
    std::fs::write(sidecar_path(csv), json + "\n")?;
    Ok(())
}

/// Read a curve back from `<base>.csv` + `<base>.json`.
pub fn read_curve(csv: &Path) -> Result<Curve> {
    let sidecar: CurveSidecar =
        serde_json::from_str(&std::fs::read_to_string(sidecar_path(csv))?)?;
    let grid = PeriodicGrid::new(sidecar.n, sidecar.period)?;
    match sidecar.geometry.as_str() {
        "euclidean" => {
            let rows = read_rows(csv, "x,u1,u2,u3")?;
            expect_rows(&rows, grid.len())?;
            let pts: Vec<[f64; 3]> = rows.iter().map(|r| [r[1], r[2], r[3]]).collect();
            Ok(Curve::Euclidean(EuclideanCurve::from_points(grid, &pts)?))
        }
        "projective" => {
            let rows = read_rows(csv, "x,u")?;
            expect_rows(&rows, grid.len())?;
            let slope = sidecar
                .slope
                .ok_or_else(|| Error::Parse { row: 1, detail: "missing slope".into() })?;
            let periodic: Vec<f64> = rows
                .iter()
                .enumerate()
                .map(|(j, r)| r[1] - slope * grid.point(j))
                .collect();
            Ok(Curve::Projective(ProjectiveCurve::new(
                slope,
                GridFunction::new(grid, periodic)?,
            )?))
        }
        "star" => {
            let rows = read_rows(csv, "x,g1,g2")?;
            expect_rows(&rows, grid.len())?;
            let m = sidecar
                .monodromy
                .ok_or_else(|| Error::Parse { row: 1, detail: "missing monodromy".into() })?;
            let m = DMatrix::from_fn(2, 2, |r, c| m[r][c]);
            let gen = (&m - DMatrix::identity(2, 2)) / grid.length();
            if (&gen * &gen).abs().max() > 1e-8 {
                return Err(Error::InvalidInput(
                    "star monodromy must be unipotent ((M-I)^2 = 0)".into(),
                ));
            }
            let l = grid.length();
            let mut per = [Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len())];
            let mut sec = [Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len())];
            for (j, r) in rows.iter().enumerate() {
                let g = nalgebra::Vector2::new(r[1], r[2]);
                let x = grid.point(j);
                let s = &gen * g;
                let p = g - &s * x;
                let _ = l;
                per[0].push(p[0]);
                per[1].push(p[1]);
                sec[0].push(s[0]);
                sec[1].push(s[1]);
            }
            Ok(Curve::Star(StarCurve::new(
                [
                    GridFunction::new(grid.clone(), per[0].clone())?,
                    GridFunction::new(grid.clone(), per[1].clone())?,
                ],
                [
                    GridFunction::new(grid.clone(), sec[0].clone())?,
                    GridFunction::new(grid, sec[1].clone())?,
                ],
            )?))
        }
        "lagrangian" => {
            let dim = sidecar
                .dim
                .ok_or_else(|| Error::Parse { row: 1, detail: "missing dim".into() })?;
            let header = std::iter::once("x".to_string())
                .chain((0..dim).flat_map(|r| {
                    ((r..dim).map(move |c| format!("m{}{}", r + 1, c + 1))).collect::<Vec<_>>()
                }))
                .collect::<Vec<_>>()
                .join(",");
            let rows = read_rows(csv, &header)?;
            expect_rows(&rows, grid.len())?;
            let slope_rows = sidecar
                .slope_matrix
                .ok_or_else(|| Error::Parse { row: 1, detail: "missing slope_matrix".into() })?;
            let slope = DMatrix::from_fn(dim, dim, |r, c| slope_rows[r][c]);
            let periodic: Vec<DMatrix<f64>> = rows
                .iter()
                .enumerate()
                .map(|(j, row)| {
                    let mut m = DMatrix::zeros(dim, dim);
                    let mut idx = 1;
                    for r in 0..dim {
                        for c in r..dim {
                            m[(r, c)] = row[idx];
                            m[(c, r)] = row[idx];
                            idx += 1;
                        }
                    }
                    m - &slope * grid.point(j)
                })
                .collect();
            Ok(Curve::Lagrangian(LagrangianCurve::new(grid, slope, periodic)?))
        }
        other => Err(Error::UnknownName(format!("geometry `{other}`"))),
    }
}

fn expect_rows(rows: &[Vec<f64>], n: usize) -> Result<()> {
    if rows.len() != n {
        return Err(Error::Parse {
            row: rows.len() + 1,
            detail: format!("expected {n} data rows, got {}", rows.len()),
        });
    }
    Ok(())
}

/// MatrixField dump: `x,a11,a12,...` row-major, with a JSON manifest
/// carrying lambda and the shape.
pub fn write_matrix_field(csv: &Path, f: &MatrixField) -> Result<()> {
    let (rows, cols) = f.shape();
    let header = std::iter::once("x".to_string())
        .chain((0..rows).flat_map(|r| {
            (0..cols)
                .map(move |c| format!("a{}{}", r + 1, c + 1))
                .collect::<Vec<_>>()
        }))
        .collect::<Vec<_>>()
        .join(",");
    let grid = f.grid();
    write_lines(
        csv,
        &header,
        (0..grid.len()).map(|j| {
            std::iter::once(fmt_f64(grid.point(j)))
                .chain(
                    (0..rows).flat_map(|r| {
                        (0..cols).map(move |c| fmt_f64(f.value(j)[(r, c)])).collect::<Vec<_>>()
                    }),
                )
                .collect::<Vec<_>>()
                .join(",")
        }),
    )?;
    let manifest = serde_json::json!({
        "rows": rows,
        "cols": cols,
        "n": grid.len(),
        "period": grid.length(),
        "lambda": f.lambda,
    });
    std::fs::write(sidecar_path(csv), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}
