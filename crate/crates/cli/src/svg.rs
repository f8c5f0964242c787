//! SVG figures of traced level sets.
//!
//! Plane coordinates are used directly as user units, with the y axis
//! flipped by a group transform. Closed lines are drawn in blue, open ones
//! in red and thicker.

use std::fmt::Write;

use quasilevel::{ContourSet, DihedralDescriptor};

use crate::format::num;

#[derive(Debug, Clone, Default)]
pub struct SvgStyle {
    /// Draw the `2n` sector boundary rays of this symmetry.
    pub sectors: Option<DihedralDescriptor>,
    /// Size of the rendered image in pixels.
    pub pixels: Option<u32>,
}

pub fn render_svg(cs: &ContourSet, style: &SvgStyle) -> String {
    let w = &cs.window;
    let r = w.rect();
    let size = r.x_max - r.x_min;
    let stroke = size / 500.0;
    let px = style.pixels.unwrap_or(800);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{px}" height="{px}" viewBox="{} {} {} {}">"#,
        num(r.x_min),
        num(-r.y_max),
        num(size),
        num(r.y_max - r.y_min)
    );
    let _ = writeln!(out, r#"<g transform="scale(1,-1)" fill="none">"#);
    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{}" height="{}" stroke="black" stroke-width="{}"/>"#,
        num(r.x_min),
        num(r.y_min),
        num(size),
        num(r.y_max - r.y_min),
        num(stroke)
    );
    // axes through the window center
    let [cx, cy] = w.center;
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="gray" stroke-width="{}"><line x1="{}" y1="{}" x2="{}" y2="{}"/><line x1="{}" y1="{}" x2="{}" y2="{}"/></g>"#,
        num(stroke),
        num(r.x_min),
        num(cy),
        num(r.x_max),
        num(cy),
        num(cx),
        num(r.y_min),
        num(cx),
        num(r.y_max)
    );
    if let Some(d) = &style.sectors {
        let reach = size * std::f64::consts::SQRT_2;
        let _ = writeln!(out, r#"<g class="sectors" stroke="green" stroke-width="{}" stroke-dasharray="{} {}">"#, num(stroke), num(4.0 * stroke), num(4.0 * stroke));
        for k in 0..2 * d.n {
            let a = d.axis_angle0 + k as f64 * std::f64::consts::PI / d.n as f64;
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                num(d.center[0]),
                num(d.center[1]),
                num(d.center[0] + reach * a.cos()),
                num(d.center[1] + reach * a.sin())
            );
        }
        out.push_str("</g>\n");
    }
    for c in &cs.contours {
        let mut path = String::new();
        let pts = if c.closed && c.points.len() > 1 {
            &c.points[..c.points.len() - 1]
        } else {
            &c.points[..]
        };
        for (k, p) in pts.iter().enumerate() {
            let _ = write!(path, "{}{} {}", if k == 0 { "M" } else { " L" }, num(p[0]), num(p[1]));
        }
        if c.closed {
            path.push_str(" Z");
        }
        let (class, color, width) = if c.closed {
            ("closed", "blue", stroke)
        } else {
            ("open", "red", 2.0 * stroke)
        };
        let _ = writeln!(
            out,
            r#"<path class="{class}" stroke="{color}" stroke-width="{}" d="{path}"/>"#,
            num(width)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use quasilevel::{trace_level, FnField, Window};

    fn path_coords(svg: &str) -> Vec<[f64; 2]> {
        let d = &svg[svg.find(" d=\"").unwrap() + 4..];
        let d = &d[..d.find('"').unwrap()];
        let nums: Vec<f64> = d
            .split(|c: char| c == ' ' || c == 'M' || c == 'L' || c == 'Z')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().unwrap())
            .collect();
        nums.chunks(2).map(|c| [c[0], c[1]]).collect()
    }

    #[test]
    fn empty_set_draws_axes_only() {
        let f = FnField(|_: f64, _: f64| 0.0);
        let w = Window::new([0.0, 0.0], 1.0, 4, 4).unwrap();
        let cs = trace_level(&f, &w, 1.0).unwrap();
        let svg = render_svg(&cs, &SvgStyle::default());
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("class=\"axes\""));
        assert_eq!(svg.matches("<path").count(), 0);
    }

    #[test]
    fn circle_is_one_closed_path() {
        let f = FnField(|x: f64, y: f64| x * x + y * y);
        let w = Window::new([0.0, 0.0], 1.5, 301, 301).unwrap();
        let cs = trace_level(&f, &w, 1.0).unwrap();
        let svg = render_svg(&cs, &SvgStyle::default());
        assert_eq!(svg.matches("<path").count(), 1);
        assert!(svg.contains("class=\"closed\"") && svg.contains(" Z\""));
        let pts = path_coords(&svg);
        let lo = pts.iter().fold([f64::MAX; 2], |a, p| [a[0].min(p[0]), a[1].min(p[1])]);
        let hi = pts.iter().fold([f64::MIN; 2], |a, p| [a[0].max(p[0]), a[1].max(p[1])]);
        for k in 0..2 {
            assert!((lo[k] + 1.0).abs() < 0.01 && (hi[k] - 1.0).abs() < 0.01, "{lo:?} {hi:?}");
        }
    }

    #[test]
    fn sector_overlay_has_2n_rays() {
        let f = FnField(|x: f64, _: f64| x);
        let w = Window::new([0.0, 0.0], 2.0, 9, 9).unwrap();
        let cs = trace_level(&f, &w, 0.3).unwrap();
        let d = DihedralDescriptor::new(5, [0.0, 0.0], 0.0).unwrap();
        let svg = render_svg(&cs, &SvgStyle { sectors: Some(d), pixels: None });
        let sectors = &svg[svg.find("class=\"sectors\"").unwrap()..];
        let sectors = &sectors[..sectors.find("</g>").unwrap()];
        assert_eq!(sectors.matches("<line").count(), 10);
        assert!(svg.contains("class=\"open\""));
        assert_eq!(svg, render_svg(&cs, &SvgStyle { sectors: Some(d), pixels: None }));
    }
}
