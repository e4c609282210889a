//! Static SVG figure of eigenlines and the witness sector for 2×2 families.

use std::fmt::Write;

use conelab::cone::ConeRep;
use conelab::cones2d::classify2;
use conelab::{SquareMatrix, ToleranceConfig};
use nalgebra::DVector;

const SIZE: f64 = 480.0;
const R: f64 = 200.0;
const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn px(v: &DVector<f64>, r: f64) -> (f64, f64) {
    let u = v / v.norm();
    (SIZE / 2.0 + r * u[0], SIZE / 2.0 - r * u[1])
}

/// Boundary rays of a cone in the plane, in counterclockwise order.
fn sector(k: &ConeRep) -> Option<(DVector<f64>, DVector<f64>)> {
    match k {
        ConeRep::Polyhedral(p) => {
            let g = &p.generators;
            if g.len() != 2 {
                return None;
            }
            let cross = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            if cross >= 0.0 {
                Some((g[0].clone(), g[1].clone()))
            } else {
                Some((g[1].clone(), g[0].clone()))
            }
        }
        ConeRep::Quadratic(q) => {
            let b = q.complement_basis.column(0).into_owned();
            let s = 1.0 / q.form[(0, 0)].sqrt();
            let (a, c) = (&q.axis + &b * s, &q.axis - &b * s);
            let cross = a[0] * c[1] - a[1] * c[0];
            if cross >= 0.0 {
                Some((a, c))
            } else {
                Some((c, a))
            }
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.3}")
}

/// Deterministic SVG for a 2×2 family and optional witness.
pub fn render(members: &[SquareMatrix], labels: &[String], witness: Option<&ConeRep>, tol: &ToleranceConfig) -> String {
    let mut s = String::new();
    let c = SIZE / 2.0;
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
        SIZE
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    if let Some((a, b)) = witness.and_then(sector) {
        let (x1, y1) = px(&a, R);
        let (x2, y2) = px(&b, R);
        let _ = writeln!(
            s,
            r##"<path class="cone" d="M {} {} L {} {} A {} {} 0 0 0 {} {} Z" fill="#fdd49e" fill-opacity="0.6" stroke="#e6550d"/>"##,
            fmt(c),
            fmt(c),
            fmt(x1),
            fmt(y1),
            fmt(R),
            fmt(R),
            fmt(x2),
            fmt(y2)
        );
    }
    let _ = writeln!(
        s,
        r##"<circle cx="{0}" cy="{0}" r="{1}" fill="none" stroke="#cccccc"/>"##,
        fmt(c),
        fmt(R)
    );
    for (i, (a, label)) in members.iter().zip(labels).enumerate() {
        let f = classify2(a, tol);
        if f.scalar {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let lines = [(f.u1.as_ref(), true), (f.u2.as_ref(), false)];
        for (u, dominant) in lines {
            let Some(u) = u else { continue };
            let (x1, y1) = px(u, R);
            let (x2, y2) = px(&(-u), R);
            let dash = if dominant { "" } else { r#" stroke-dasharray="6 4""# };
            let kind = if dominant { "dominant" } else { "non-dominant" };
            let _ = writeln!(
                s,
                r#"<line class="{kind}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"{dash}/>"#,
                fmt(x1),
                fmt(y1),
                fmt(x2),
                fmt(y2)
            );
            let (lx, ly) = px(u, R + 14.0);
            let tag = if dominant { "" } else { "'" };
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}" text-anchor="middle">{label}{tag}</text>"#,
                fmt(lx),
                fmt(ly)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use conelab::cone::PolyhedralCone;

    #[test]
    fn orthant_sector_and_lines() {
        let a = SquareMatrix::diag(&[2.0, 1.0]);
        let k = ConeRep::Polyhedral(PolyhedralCone::orthant(2));
        let svg = render(&[a], &["A".into()], Some(&k), &ToleranceConfig::default());
        assert_eq!(svg.matches("class=\"cone\"").count(), 1);
        assert_eq!(svg.matches("<line").count(), 2);
        assert_eq!(svg.matches("stroke-dasharray").count(), 1);
    }
}
