use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use super::{Boundary, WhitneyDecomposition, WhitneyDiagnostics};
use crate::error::{Error, Result};

/// Rows `level, m_1..m_n, side, dist_to_plane` (distance of the inner cube).
pub fn write_csv(dec: &WhitneyDecomposition, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut head = vec!["level".to_string()];
    head.extend((1..=dec.dim()).map(|i| format!("m_{i}")));
    head.push("side".into());
    head.push("dist_to_plane".into());
    out.write_record(&head)?;
    for c in dec.cubes() {
        let mut row = vec![c.level().to_string()];
        row.extend(c.index().iter().map(|m| m.to_string()));
        row.push(format!("{:e}", c.side()));
        row.push(format!("{:e}", dec.boundary().box_distance(&c.inner())));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CubeRecord {
    level: u32,
    index: Vec<i64>,
    side: f64,
    dist_to_plane: f64,
    neighbours: Vec<usize>,
}

#[derive(Serialize)]
struct DecompositionRecord<'a> {
    boundary: Boundary,
    bbox_lower: &'a [f64],
    bbox_upper: &'a [f64],
    j_max: u32,
    level_counts: Vec<(u32, usize)>,
    dropped: usize,
    diagnostics: WhitneyDiagnostics,
    cubes: Vec<CubeRecord>,
}

pub fn write_json(dec: &WhitneyDecomposition, w: impl Write) -> Result<()> {
    let rec = DecompositionRecord {
        boundary: dec.boundary(),
        bbox_lower: &dec.bbox().lower,
        bbox_upper: &dec.bbox().upper,
        j_max: dec.j_max(),
        level_counts: dec.level_counts().into_iter().collect(),
        dropped: dec.dropped().len(),
        diagnostics: dec.verify(),
        cubes: dec
            .cubes()
            .iter()
            .enumerate()
            .map(|(i, c)| CubeRecord {
                level: c.level(),
                index: c.index().to_vec(),
                side: c.side(),
                dist_to_plane: dec.boundary().box_distance(&c.inner()),
                neighbours: dec.neighbours(i).to_vec(),
            })
            .collect(),
    };
    serde_json::to_writer_pretty(w, &rec)?;
    Ok(())
}

/// Inner cubes as outlined rectangles, shaded by level; 2-D only.
pub fn write_svg(dec: &WhitneyDecomposition, mut w: impl Write) -> Result<()> {
    if dec.dim() != 2 {
        return Err(Error::param(
            "SVG export needs a two-dimensional decomposition",
        ));
    }
    const PX: f64 = 512.0;
    let b = dec.bbox();
    let sx = PX / (b.upper[0] - b.lower[0]);
    let sy = PX / (b.upper[1] - b.lower[1]);
    let jmax = dec.j_max().max(1) as f64;
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PX}\" height=\"{PX}\" viewBox=\"0 0 {PX} {PX}\">"
    )
    .ok();
    writeln!(s, "<rect width=\"{PX}\" height=\"{PX}\" fill=\"#fafafa\"/>").ok();
    for c in dec.cubes() {
        let q = c.inner();
        let x = (q.lower[0] - b.lower[0]) * sx;
        let y = (b.upper[1] - q.upper[1]) * sy;
        let shade = 235 - (150.0 * c.level() as f64 / jmax) as i32;
        writeln!(
            s,
            "<rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"rgb({shade},{shade},255)\" stroke=\"#333\" stroke-width=\"0.4\"/>",
            c.side() * sx,
            c.side() * sy
        )
        .ok();
    }
    if let Boundary::Plane { split } = dec.boundary() {
        if split.l() == 1 && b.lower[1] <= 0.0 && b.upper[1] >= 0.0 {
            let y = b.upper[1] * sy;
            writeln!(s, "<line x1=\"0\" y1=\"{y:.3}\" x2=\"{PX}\" y2=\"{y:.3}\" stroke=\"#c00\" stroke-width=\"1.5\"/>").ok();
        } else if split.l() == 0 {
            let (x, y) = (-b.lower[0] * sx, b.upper[1] * sy);
            writeln!(
                s,
                "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"2\" fill=\"#c00\"/>"
            )
            .ok();
        }
    }
    s.push_str("</svg>\n");
    w.write_all(s.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::Aabb;
    use crate::geometry::PlaneSplit;
    use crate::whitney::whitney_decompose;

    #[test]
    fn exports() {
        let dec =
            whitney_decompose(PlaneSplit::new(2, 1).unwrap(), &Aabb::cube(2, 1.0), 4).unwrap();
        let mut csv = Vec::new();
        write_csv(&dec, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("level,m_1,m_2,side,dist_to_plane\n"));
        assert_eq!(text.lines().count(), dec.cubes().len() + 1);
        let mut json = Vec::new();
        write_json(&dec, &mut json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v["cubes"].as_array().unwrap().len(), dec.cubes().len());
        let mut svg = Vec::new();
        write_svg(&dec, &mut svg).unwrap();
        assert!(String::from_utf8(svg).unwrap().contains("<line"));
    }
}
