//! Minimal SVG density plot: one atom spike and a few curves.

use std::fmt::Write;

pub const WIDTH: f64 = 480.0;
pub const HEIGHT: f64 = 320.0;
const LEFT: f64 = 48.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 28.0;
const BOTTOM: f64 = 36.0;

pub struct Curve<'a> {
    pub id: &'a str,
    pub label: &'a str,
    pub color: &'a str,
    pub dash: Option<&'a str>,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

pub struct Atom {
    pub location: f64,
    pub height: f64,
}

pub struct Plot<'a> {
    pub title: String,
    pub xlim: (f64, f64),
    pub atom: Option<Atom>,
    pub curves: Vec<Curve<'a>>,
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

impl Plot<'_> {
    /// Whether the atom lies outside the x window and is drawn at the edge.
    pub fn atom_clipped(&self) -> bool {
        self.atom
            .as_ref()
            .is_some_and(|a| a.location < self.xlim.0 || a.location > self.xlim.1)
    }

    pub fn render(&self) -> String {
        let (x0, x1) = self.xlim;
        let mut ymax = 0.0f64;
        for c in &self.curves {
            for (x, y) in c.x.iter().zip(c.y) {
                if *x >= x0 && *x <= x1 {
                    ymax = ymax.max(*y);
                }
            }
        }
        if let Some(a) = &self.atom {
            ymax = ymax.max(a.height);
        }
        let ymax = if ymax > 0.0 { ymax * 1.05 } else { 1.0 };
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - y / ymax * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#,
            W = WIDTH,
            H = HEIGHT
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="16" text-anchor="middle" font-size="12">{}</text>"#,
            num(WIDTH / 2.0),
            escape(&self.title)
        );
        // Axes and ticks.
        let _ = writeln!(
            s,
            r#"<path d="M{l} {t} L{l} {b} L{r} {b}" stroke="black" fill="none"/>"#,
            l = num(LEFT),
            t = num(TOP),
            b = num(TOP + ph),
            r = num(LEFT + pw)
        );
        let mut tick = x0.ceil();
        while tick <= x1 {
            let x = num(sx(tick));
            let _ = writeln!(
                s,
                r#"<path d="M{x} {b} L{x} {b2}" stroke="black"/><text x="{x}" y="{ty}" text-anchor="middle">{v}</text>"#,
                b = num(TOP + ph),
                b2 = num(TOP + ph + 4.0),
                ty = num(TOP + ph + 16.0),
                v = tick
            );
            tick += 1.0;
        }
        for frac in [0.0, 0.5, 1.0] {
            let v = frac * ymax / 1.05;
            let y = num(sy(v));
            let _ = writeln!(
                s,
                r#"<path d="M{l2} {y} L{l} {y}" stroke="black"/><text x="{tx}" y="{y}" text-anchor="end" dominant-baseline="middle">{v}</text>"#,
                l = num(LEFT),
                l2 = num(LEFT - 4.0),
                tx = num(LEFT - 6.0),
                v = num(v)
            );
        }

        for c in &self.curves {
            let mut d = String::new();
            for (x, y) in c.x.iter().zip(c.y) {
                if *x < x0 || *x > x1 {
                    continue;
                }
                let cmd = if d.is_empty() { 'M' } else { 'L' };
                let _ = write!(d, "{cmd}{} {} ", num(sx(*x)), num(sy(*y)));
            }
            if d.is_empty() {
                continue;
            }
            let dash = c.dash.map(|p| format!(r#" stroke-dasharray="{p}""#)).unwrap_or_default();
            let _ = writeln!(
                s,
                r#"<path id="{}" d="{}" stroke="{}" stroke-width="1.5" fill="none"{dash}/>"#,
                c.id,
                d.trim_end(),
                c.color
            );
        }

        if let Some(a) = &self.atom {
            let loc = a.location.clamp(x0, x1);
            let x = num(sx(loc));
            let _ = writeln!(
                s,
                r#"<path id="atom" d="M{x} {b} L{x} {top}" stroke="black" stroke-width="2.5"/>"#,
                b = num(TOP + ph),
                top = num(sy(a.height))
            );
            if self.atom_clipped() {
                // Arrow pointing out of the window at the spike's tip.
                let dir = if a.location < x0 { -1.0 } else { 1.0 };
                let (xa, ya) = (sx(loc), sy(a.height));
                let _ = writeln!(
                    s,
                    r#"<path id="atom-arrow" d="M{} {} L{} {} M{} {} L{} {} L{} {}" stroke="black" stroke-width="1.5" fill="none"/>"#,
                    num(xa),
                    num(ya),
                    num(xa + dir * 18.0),
                    num(ya),
                    num(xa + dir * 12.0),
                    num(ya - 4.0),
                    num(xa + dir * 18.0),
                    num(ya),
                    num(xa + dir * 12.0),
                    num(ya + 4.0)
                );
            }
        }

        let mut ly = TOP + 6.0;
        for c in &self.curves {
            let dash = c.dash.map(|p| format!(r#" stroke-dasharray="{p}""#)).unwrap_or_default();
            let _ = writeln!(
                s,
                r#"<path d="M{} {y} L{} {y}" stroke="{}" stroke-width="1.5"{dash}/><text x="{}" y="{y}" dominant-baseline="middle">{}</text>"#,
                num(WIDTH - RIGHT - 90.0),
                num(WIDTH - RIGHT - 70.0),
                c.color,
                num(WIDTH - RIGHT - 65.0),
                escape(c.label),
                y = num(ly)
            );
            ly += 14.0;
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_outside_window_gets_an_arrow() {
        let plot = Plot {
            title: "t".into(),
            xlim: (-4.0, 4.0),
            atom: Some(Atom {
                location: -10.0,
                height: 0.4,
            }),
            curves: vec![],
        };
        let svg = plot.render();
        assert!(plot.atom_clipped());
        assert!(svg.contains(r#"id="atom-arrow""#));
        let inside = Plot {
            atom: Some(Atom {
                location: -1.0,
                height: 0.4,
            }),
            ..plot
        };
        assert!(!inside.render().contains("atom-arrow"));
    }

    #[test]
    fn curves_are_cut_to_the_window() {
        let x = [-6.0, 0.0, 6.0];
        let y = [1.0, 0.5, 1.0];
        let plot = Plot {
            title: "t".into(),
            xlim: (-4.0, 4.0),
            atom: None,
            curves: vec![Curve {
                id: "c",
                label: "c",
                color: "red",
                dash: None,
                x: &x,
                y: &y,
            }],
        };
        let svg = plot.render();
        let line = svg.lines().find(|l| l.contains(r#"id="c""#)).unwrap();
        assert_eq!(line.matches('M').count() + line.matches('L').count(), 1);
    }
}
