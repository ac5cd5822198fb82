//! Minimal standalone SVG 1.1 line plots for sweep results.

use std::fmt::Write as _;

use crate::experiments::SweepResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// IRS gain in dB, one curve per overlay value.
    Gain,
    /// LoS, wall and IRS link amplitudes in dB, one set per overlay value.
    Components,
}

impl std::str::FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gain" => Ok(PlotKind::Gain),
            "components" => Ok(PlotKind::Components),
            other => Err(format!("unknown plot kind `{other}` (expected gain or components)")),
        }
    }
}

const W: f64 = 800.0;
const H: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Series {
    label: String,
    dash: Option<&'static str>,
    color: &'static str,
    points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Roughly five round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn to_db(amp: f64) -> f64 {
    20.0 * amp.log10()
}

fn series(res: &SweepResult, kind: PlotKind) -> Vec<Series> {
    let spec = &res.metadata.spec;
    let overlays: Vec<Option<f64>> = match &spec.overlay {
        Some(ov) => ov.values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let mut out = Vec::new();
    for (i, &o) in overlays.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let suffix = match (o, &spec.overlay) {
            (Some(v), Some(ov)) => format!("{} = {}", ov.param.name(), tick_label(v)),
            _ => String::new(),
        };
        let rows: Vec<_> = res.curve(o).collect();
        match kind {
            PlotKind::Gain => out.push(Series {
                label: if suffix.is_empty() { "IRS gain".into() } else { suffix.clone() },
                dash: None,
                color,
                points: rows.iter().map(|r| (r.value, r.result.gain_db)).collect(),
            }),
            PlotKind::Components => {
                let parts: [(&str, Option<&'static str>, fn(&crate::simulator::GainResult) -> f64); 3] = [
                    ("IRS", None, |r| r.irs_sum_amplitude),
                    ("wall", Some("8 4"), |r| r.mean_wall_reflection_amplitude),
                    ("LoS", Some("2 3"), |r| r.los_amplitude),
                ];
                for (name, dash, get) in parts {
                    out.push(Series {
                        label: if suffix.is_empty() { name.into() } else { format!("{name}, {suffix}") },
                        dash,
                        color,
                        points: rows
                            .iter()
                            .map(|r| (r.value, to_db(get(&r.result))))
                            .filter(|p| p.1.is_finite())
                            .collect(),
                    });
                }
            }
        }
    }
    out
}

/// Renders a sweep as an SVG document.
pub fn sweep_svg(res: &SweepResult, kind: PlotKind) -> String {
    let spec = &res.metadata.spec;
    let all = series(res, kind);
    let pts = || all.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1) = pts().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = pts().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if !(x0 <= x1) {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let y_label = match kind {
        PlotKind::Gain => "IRS gain (dB)",
        PlotKind::Components => "Received amplitude (dB sqrt(mW))",
    };

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
            TOP,
            TOP + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            tick_label(t)
        );
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 15.0,
        escape(spec.param.axis_label())
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );
    for (i, ser) in all.iter().enumerate() {
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = ser
            .dash
            .map(|d| format!(r#" stroke-dasharray="{d}""#))
            .unwrap_or_default();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="2"{dash} points="{}"/>"#,
            ser.color,
            pts.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = W - RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"{dash}/>"#,
            lx + 24.0,
            ser.color
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}
