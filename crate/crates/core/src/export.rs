//! Plain-text writers for maps, tables and profile cuts.
//!
//! Everything is formatted with Rust's own float formatting, so output is
//! locale independent: `.` decimals and `\n` line endings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::beam::ProfileCut;
use crate::coverage::{AreaClassMap, EnergyMap};
use crate::error::{Error, Result};
use crate::optimizer::SearchResult;

/// Longest line written to a graymap.
pub const PGM_LINE_WIDTH: usize = 70;

/// Energy map as CSV: a header of cell-centre `x` values, then one row per
/// `y` index that starts with the cell-centre `y`. Energies carry ten
/// significant digits so that a read-back stays within 1e-9 relative.
pub fn energy_csv(map: &EnergyMap) -> String {
    let g = &map.grid;
    let mut out = String::with_capacity(g.len() * 16);
    out.push_str("y\\x");
    for i in 0..g.nx {
        let _ = write!(out, ",{:.6}", g.x_center(i));
    }
    out.push('\n');
    for (j, row) in map.values.chunks(g.nx).enumerate() {
        let _ = write!(out, "{:.6}", g.y_center(j));
        for v in row {
            let _ = write!(out, ",{v:.9e}");
        }
        out.push('\n');
    }
    out
}

/// A map read back from [`energy_csv`] output.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvMap {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Row-major, one row per `y`.
    pub values: Vec<f64>,
}

pub fn parse_energy_csv(text: &str) -> Result<CsvMap> {
    let bad = |line: usize, msg: &str| Error::Io(format!("energy csv line {line}: {msg}"));
    let num = |s: &str, line: usize| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(line, "not a number"))
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let x = header
        .split(',')
        .skip(1)
        .map(|s| num(s, 1))
        .collect::<Result<Vec<_>>>()?;
    let (mut y, mut values) = (Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        let mut cells = line.split(',');
        y.push(num(cells.next().unwrap_or(""), k + 2)?);
        let before = values.len();
        for c in cells {
            values.push(num(c, k + 2)?);
        }
        if values.len() - before != x.len() {
            return Err(bad(k + 2, "row length differs from header"));
        }
    }
    Ok(CsvMap { x, y, values })
}

/// Area classes as a plain graymap (P2) with maxval 4. Pixel value 0 is
/// reserved for off-road cells; rows follow the CSV `y` order.
pub fn class_pgm(areas: &AreaClassMap) -> String {
    let g = &areas.grid;
    let mut out = format!(
        "P2\n# area classes 1-4, 0 = off-road\n{} {}\n4\n",
        g.nx, g.ny
    );
    for row in areas.classes.chunks(g.nx) {
        let mut line = String::new();
        for c in row {
            if !line.is_empty() && line.len() + 2 > PGM_LINE_WIDTH {
                out.push_str(&line);
                out.push('\n');
                line.clear();
            }
            if !line.is_empty() {
                line.push(' ');
            }
            let _ = write!(line, "{c}");
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Pixel payload of a P2 graymap, as `(width, height, pixels)`.
pub fn parse_pgm(text: &str) -> Result<(usize, usize, Vec<u8>)> {
    let mut tokens = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(str::split_whitespace);
    if tokens.next() != Some("P2") {
        return Err(Error::Io("not a P2 graymap".into()));
    }
    let mut next = || -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Io("truncated graymap".into()))
    };
    let (w, h, _max) = (next()?, next()?, next()?);
    let px = (0..w * h)
        .map(|_| next().map(|v| v as u8))
        .collect::<Result<Vec<_>>>()?;
    Ok((w, h, px))
}

/// Optimizer rows in table order (best first).
pub fn optimizer_csv(result: &SearchResult) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
    let mut out = String::from(
        "rank,dphi0_deg,alpha,line_divergence_max_deg,feasible,k_l,phi_m_deg,hole_ratio,rho_eff,rho_and,rho_or,objective,runtime_s\n",
    );
    for (k, r) in result.table.iter().enumerate() {
        let c = &r.candidate;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{:.3}",
            k + 1,
            c.dphi0.to_degrees(),
            c.alpha,
            c.div_max
                .map(|d| d.to_degrees().to_string())
                .unwrap_or_default(),
            r.feasible,
            r.k_l,
            if r.feasible {
                format!("{:.9}", r.phi_m.to_degrees())
            } else {
                String::new()
            },
            opt(r.hole_ratio),
            opt(r.rho_eff),
            opt(r.rho_and),
            opt(r.rho_or),
            opt(r.objective),
            r.runtime_s,
        );
    }
    out
}

/// Profile cuts side by side. All cuts must share their offsets, which holds
/// when they differ only in order.
pub fn profile_csv(cuts: &[ProfileCut]) -> Result<String> {
    let first = cuts
        .first()
        .ok_or_else(|| Error::Domain("no profile cuts".into()))?;
    if cuts.iter().any(|c| c.offsets != first.offsets) {
        return Err(Error::Domain("profile cuts use different offsets".into()));
    }
    let mut out = String::from("offset_m,offset_over_radius");
    for c in cuts {
        let _ = write!(out, ",n{}", c.order);
    }
    out.push('\n');
    for (k, x) in first.offsets.iter().enumerate() {
        let _ = write!(out, "{x:.8e},{:.6}", x / first.radius);
        for c in cuts {
            let _ = write!(out, ",{:.8e}", c.values[k]);
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_text(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::{classify_areas, RoadGrid, Thresholds};
    use crate::geometry::Fan;
    use crate::scan::RoadTopology;

    fn toy() -> EnergyMap {
        let topo = RoadTopology {
            length: 4.0,
            width: 4.0,
            tx_height: 6.5,
            mrr_height: 1.5,
            tx_xy: (0.0, 0.0),
        };
        let grid = RoadGrid::with_counts(&topo, 4, 4).unwrap();
        EnergyMap {
            fan: Fan::Longitudinal,
            grid,
            values: (0..16)
                .map(|k| (k as f64 + 0.123_456_789_1) * 1e-12)
                .collect(),
        }
    }

    #[test]
    fn csv_shape_and_round_trip() {
        let m = toy();
        let text = energy_csv(&m);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines.iter().all(|l| l.split(',').count() == 5));
        assert!(!text.contains('\r'));
        let back = parse_energy_csv(&text).unwrap();
        assert_eq!(back.x, vec![0.5, 1.5, 2.5, 3.5]);
        assert_eq!(back.y, vec![-1.5, -0.5, 0.5, 1.5]);
        for (a, b) in back.values.iter().zip(&m.values) {
            assert!(((a - b) / b).abs() < 1e-9);
        }
    }

    #[test]
    fn pgm_all_ones() {
        let m = EnergyMap {
            values: vec![0.0; 16],
            ..toy()
        };
        let t = Thresholds {
            pos: 1.0,
            sen: 1.0,
            com_low: 2.0,
            com_high: 3.0,
        };
        let areas = classify_areas(&m, None, &t).unwrap();
        let text = class_pgm(&areas);
        assert!(text.starts_with("P2\n"));
        let (w, h, px) = parse_pgm(&text).unwrap();
        assert_eq!((w, h), (4, 4));
        assert!(px.iter().all(|&p| p == 1));
    }

    #[test]
    fn pgm_lines_are_short() {
        let topo = RoadTopology {
            length: 100.0,
            width: 2.0,
            tx_height: 6.5,
            mrr_height: 1.5,
            tx_xy: (0.0, 0.0),
        };
        let grid = RoadGrid::with_counts(&topo, 173, 2).unwrap();
        let m = EnergyMap {
            fan: Fan::Longitudinal,
            grid,
            values: (0..346).map(|k| (k % 4) as f64 + 0.5).collect(),
        };
        let t = Thresholds {
            pos: 1.0,
            sen: 1.0,
            com_low: 2.0,
            com_high: 3.0,
        };
        let areas = classify_areas(&m, None, &t).unwrap();
        let text = class_pgm(&areas);
        assert!(text.lines().all(|l| l.len() <= PGM_LINE_WIDTH));
        let (_, _, px) = parse_pgm(&text).unwrap();
        assert_eq!(px, areas.classes);
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        assert!(parse_energy_csv("y\\x,1,2\n0,1e-3\n").is_err());
    }
}
