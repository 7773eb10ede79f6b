//! Minimal SVG plots: polylines and ellipses on a shared data frame.

use std::fmt::Write;

use crate::analysis::ComplianceEllipse;
use crate::plant::TrajectoryLog;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Polyline(Vec<(f64, f64)>),
    /// centre, semi-axes, rotation of the first axis in rad
    Ellipse { c: (f64, f64), r: (f64, f64), angle: f64 },
}

/// A square figure; data limits grow to fit everything added. Both axes
/// share one scale unless [`Figure::free_aspect`] is set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Figure {
    title: String,
    x_label: String,
    y_label: String,
    items: Vec<(String, Shape)>,
    free_aspect: bool,
}

impl Figure {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), ..Self::default() }
    }

    /// Scale each axis to its own data range.
    pub fn free_aspect(&mut self) -> &mut Self {
        self.free_aspect = true;
        self
    }

    pub fn polyline(&mut self, label: &str, pts: Vec<(f64, f64)>) -> &mut Self {
        self.items.push((label.into(), Shape::Polyline(pts)));
        self
    }

    pub fn ellipse(&mut self, label: &str, centre: (f64, f64), semi_axes: (f64, f64), angle: f64) -> &mut Self {
        self.items.push((label.into(), Shape::Ellipse { c: centre, r: semi_axes, angle }));
        self
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut lo = (f64::INFINITY, f64::INFINITY);
        let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut grow = |x: f64, y: f64| {
            if x.is_finite() && y.is_finite() {
                lo = (lo.0.min(x), lo.1.min(y));
                hi = (hi.0.max(x), hi.1.max(y));
            }
        };
        for (_, s) in &self.items {
            match s {
                Shape::Polyline(p) => p.iter().for_each(|&(x, y)| grow(x, y)),
                Shape::Ellipse { c, r, .. } => {
                    let m = r.0.max(r.1);
                    grow(c.0 - m, c.1 - m);
                    grow(c.0 + m, c.1 + m);
                }
            }
        }
        if !lo.0.is_finite() {
            return (0.0, 0.0, 1.0, 1.0);
        }
        let cx = 0.5 * (lo.0 + hi.0);
        let cy = 0.5 * (lo.1 + hi.1);
        let positive = |h: f64| if h > 0.0 { h } else { 1.0 };
        let (hx, hy) = (positive(0.55 * (hi.0 - lo.0)), positive(0.55 * (hi.1 - lo.1)));
        if self.free_aspect {
            (cx, cy, hx, hy)
        } else {
            let h = positive(0.55 * (hi.0 - lo.0).max(hi.1 - lo.1));
            (cx, cy, h, h)
        }
    }

    pub fn render(&self) -> String {
        let (cx, cy, hx, hy) = self.bounds();
        let sx = (WIDTH - 2.0 * MARGIN) / (2.0 * hx);
        let sy = (HEIGHT - 2.0 * MARGIN) / (2.0 * hy);
        let px = |x: f64| WIDTH / 2.0 + (x - cx) * sx;
        let py = |y: f64| HEIGHT / 2.0 - (y - cy) * sy;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="gray"/>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{} [{:.4}, {:.4}]</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label),
            cx - hx,
            cx + hx
        );
        let _ = writeln!(
            out,
            r#"<text x="14" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {})">{} [{:.4}, {:.4}]</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label),
            cy - hy,
            cy + hy
        );
        for (i, (label, shape)) in self.items.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            match shape {
                Shape::Polyline(p) => {
                    let pts: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
                    let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
                }
                Shape::Ellipse { c, r, angle } => {
                    let _ = writeln!(
                        out,
                        r#"<ellipse cx="{:.2}" cy="{:.2}" rx="{:.2}" ry="{:.2}" transform="rotate({:.3} {:.2} {:.2})" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                        px(c.0),
                        py(c.1),
                        r.0 * sx,
                        r.1 * sy,
                        -angle.to_degrees(),
                        px(c.0),
                        py(c.1)
                    );
                }
            }
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
                MARGIN + 6.0,
                MARGIN + 16.0 + 14.0 * i as f64,
                escape(label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Measured posture traces in the `(α_y, α_z)` plane.
pub fn trajectory_plot(runs: &[(&str, &TrajectoryLog)]) -> String {
    let mut f = Figure::new("posture", "alpha_y (rad)", "alpha_z (rad)");
    for (label, log) in runs {
        f.polyline(label, log.samples.iter().map(|s| (s.u.alpha_y, s.u.alpha_z)).collect());
    }
    f.render()
}

/// Compliance ellipses centred on the origin.
pub fn ellipse_plot(ellipses: &[(&str, ComplianceEllipse)]) -> String {
    let mut f = Figure::new("compliance", "alpha_y (rad/N mm)", "alpha_z (rad/N mm)");
    for (label, e) in ellipses {
        let d = e.axis_directions.column(0);
        f.ellipse(label, (0.0, 0.0), (e.semi_axes[0], e.semi_axes[1]), d.y.atan2(d.x));
    }
    f.render()
}
