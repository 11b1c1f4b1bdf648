//! Static SVG figures: one strip per feature with the series drawn as a line,
//! split marks at segment borders, and optional attribution shading.

use std::fmt::Write;

use tsxplain::{Algorithm, Attribution, SegmentMap};

use crate::csv_io::Table;

const WIDTH: f64 = 900.0;
const LEFT: f64 = 120.0;
const RIGHT: f64 = 20.0;
const STRIP: f64 = 80.0;
const GAP: f64 = 14.0;
const TITLE: f64 = 26.0;
const AXIS: f64 = 18.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    timesteps: usize,
}

impl Frame {
    fn dx(&self) -> f64 {
        (WIDTH - LEFT - RIGHT) / self.timesteps as f64
    }

    fn center(&self, t: f64) -> f64 {
        LEFT + (t + 0.5) * self.dx()
    }

    fn edge(&self, t: usize) -> f64 {
        LEFT + t as f64 * self.dx()
    }
}

fn open(out: &mut String, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height:.0}" viewBox="0 0 {WIDTH} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn heading(out: &mut String, y: f64, text: &str) {
    let _ = writeln!(
        out,
        r#"<text x="8" y="{:.2}" font-size="13" font-weight="bold">{}</text>"#,
        y + 17.0,
        escape(text)
    );
}

fn series_line(out: &mut String, frame: &Frame, y0: f64, values: &[f64], label: &str) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let points: Vec<String> = values
        .iter()
        .enumerate()
        .map(|(t, v)| {
            let y = y0 + STRIP - 6.0 - (v - lo) / span * (STRIP - 12.0);
            format!("{:.2},{:.2}", frame.center(t as f64), y)
        })
        .collect();
    let _ = writeln!(
        out,
        r##"<rect x="{LEFT}" y="{y0:.2}" width="{:.2}" height="{STRIP}" fill="none" stroke="#bbbbbb"/>"##,
        WIDTH - LEFT - RIGHT
    );
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#222222" stroke-width="1.2"/>"##,
        points.join(" ")
    );
    let _ = writeln!(
        out,
        r#"<text x="8" y="{:.2}">{}</text>"#,
        y0 + STRIP / 2.0 + 4.0,
        escape(label)
    );
}

fn splits(out: &mut String, frame: &Frame, y0: f64, borders: &[usize], colour: &str) {
    for &b in borders {
        let x = frame.edge(b);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="{colour}" stroke-width="1.5"/>"#,
            y0 + STRIP
        );
    }
}

fn time_axis(out: &mut String, frame: &Frame, table: &Table, y: f64) {
    let last = frame.timesteps - 1;
    let mut ticks = vec![0, last / 2, last];
    ticks.dedup();
    for t in ticks {
        let anchor = match t {
            0 => "start",
            _ if t == last => "end",
            _ => "middle",
        };
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}" fill="#555555">{}</text>"##,
            frame.center(t as f64),
            y + 13.0,
            escape(&table.time_label(t))
        );
    }
}

/// Draws every feature of `table` with `map`'s borders; returns the height used.
fn segment_block(out: &mut String, table: &Table, map: &SegmentMap, title: &str, y: f64) -> f64 {
    let frame = Frame {
        timesteps: table.sample.timesteps(),
    };
    heading(out, y, title);
    let mut y0 = y + TITLE;
    for f in 0..table.sample.features() {
        let label = format!("{} ({})", table.names[f], map.segments_in_feature(f));
        series_line(out, &frame, y0, &table.sample.column(f), &label);
        splits(out, &frame, y0, &map.boundaries(f), "red");
        y0 += STRIP + GAP;
    }
    time_axis(out, &frame, table, y0 - GAP);
    y0 - y + AXIS
}

fn block_height(features: usize) -> f64 {
    TITLE + features as f64 * (STRIP + GAP) - GAP + AXIS
}

pub fn segments_svg(table: &Table, map: &SegmentMap, algorithm: Algorithm) -> String {
    let mut out = String::new();
    open(&mut out, block_height(table.sample.features()) + 10.0);
    let title = format!("{} segmentation, {} segments", algorithm.title(), map.num_segments());
    segment_block(&mut out, table, map, &title, 0.0);
    out.push_str("</svg>\n");
    out
}

/// All segmentations of one sample stacked for side-by-side comparison.
pub fn comparison_svg(table: &Table, maps: &[(Algorithm, SegmentMap)]) -> String {
    let mut out = String::new();
    let block = block_height(table.sample.features()) + 12.0;
    open(&mut out, block * maps.len() as f64);
    let mut y = 0.0;
    for (algorithm, map) in maps {
        let title = format!("{} ({} segments)", algorithm.title(), map.num_segments());
        y += segment_block(&mut out, table, map, &title, y) + 12.0;
    }
    out.push_str("</svg>\n");
    out
}

/// Diverging fill: red for positive relevance, blue for negative.
fn heat(v: f64) -> String {
    let fade = (255.0 * (1.0 - v.abs().min(1.0))).round() as u8;
    if v >= 0.0 {
        format!("#ff{fade:02x}{fade:02x}")
    } else {
        format!("#{fade:02x}{fade:02x}ff")
    }
}

pub fn attribution_svg(table: &Table, attribution: &Attribution, title: &str) -> String {
    let (timesteps, features) = attribution.shape();
    let frame = Frame { timesteps };
    let scale = attribution.weights().iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let mut out = String::new();
    open(&mut out, block_height(features) + 10.0);
    heading(&mut out, 0.0, title);
    let mut y0 = TITLE;
    for f in 0..features {
        for t in 0..timesteps {
            let v = if scale > 0.0 { attribution.weight(t, f) / scale } else { 0.0 };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{y0:.2}" width="{:.2}" height="{STRIP}" fill="{}"/>"#,
                frame.edge(t),
                frame.dx(),
                heat(v)
            );
        }
        series_line(&mut out, &frame, y0, &table.sample.column(f), &table.names[f]);
        splits(&mut out, &frame, y0, &attribution.segments().boundaries(f), "#888888");
        y0 += STRIP + GAP;
    }
    time_axis(&mut out, &frame, table, y0 - GAP);
    out.push_str("</svg>\n");
    out
}
