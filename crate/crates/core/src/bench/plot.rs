use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::run::{read_csv, Status};
use crate::error::Result;

pub struct Plot {
    pub svg: String,
    /// `family,solver,min_mode,size,median_ms,count`.
    pub aggregated: String,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Median wall time per size, one line per solver and minimization mode
/// (and family, when the file holds several). Only `ok` rows count. The
/// y axis is logarithmic.
pub fn emit_plot(csv_text: &str) -> Result<Plot> {
    let rows = read_csv(csv_text)?;
    let mut cells: BTreeMap<(String, String, String), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.status == Status::Ok) {
        cells
            .entry((r.family.to_string(), r.solver.to_string(), r.min_mode.name().to_string()))
            .or_default()
            .entry(r.size)
            .or_default()
            .push(r.wall_ms);
    }
    let families = cells.keys().map(|k| k.0.clone()).collect::<std::collections::BTreeSet<String>>().len();
    let mut aggregated = String::from("family,solver,min_mode,size,median_ms,count\n");
    let mut lines: Vec<(String, Vec<(usize, f64)>)> = Vec::new();
    for ((fam, solver, mode), sizes) in &mut cells {
        let mut pts = Vec::new();
        for (&size, times) in sizes.iter_mut() {
            let m = median(times);
            let _ = writeln!(aggregated, "{fam},{solver},{mode},{size},{m:.3},{}", times.len());
            pts.push((size, m));
        }
        let label = if families > 1 {
            format!("{fam}/{solver}/{mode}")
        } else {
            format!("{solver}/{mode}")
        };
        lines.push((label, pts));
    }
    Ok(Plot {
        svg: render(&lines),
        aggregated,
    })
}

fn render(lines: &[(String, Vec<(usize, f64)>)]) -> String {
    let pts = lines.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1) = (usize::MAX, 0usize);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        let ly = y.max(1e-3).log10();
        y0 = y0.min(ly.floor());
        y1 = y1.max(ly.ceil());
    }
    let empty = x0 == usize::MAX;
    if empty {
        (x0, x1, y0, y1) = (0, 1, 0.0, 1.0);
    }
    let (x0, x1) = if x0 == x1 { (x0.saturating_sub(1), x1 + 1) } else { (x0, x1) };
    if y0 == y1 {
        y1 = y0 + 1.0;
    }
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: usize| LEFT + (x - x0) as f64 / (x1 - x0) as f64 * pw;
    let sy = |y: f64| TOP + ph - (y.max(1e-3).log10() - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<path d=\"M{LEFT},{TOP} V{:.1} H{:.1}\" fill=\"none\" stroke=\"black\"/>",
        TOP + ph,
        LEFT + pw
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">size</text>",
        LEFT + pw / 2.0,
        H - 10.0
    );
    let _ = writeln!(
        s,
        "<text x=\"15\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {:.1})\">median wall time (ms)</text>",
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    if !empty {
        for x in x0..=x1 {
            let px = sx(x);
            let _ = writeln!(
                s,
                "<line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"black\"/><text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x}</text>",
                TOP + ph,
                TOP + ph + 4.0,
                TOP + ph + 16.0
            );
        }
        let mut e = y0 as i32;
        while e as f64 <= y1 {
            let py = TOP + ph - (e as f64 - y0) / (y1 - y0) * ph;
            let _ = writeln!(
                s,
                "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{LEFT}\" y2=\"{py:.1}\" stroke=\"black\"/><text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">1e{e}</text>",
                LEFT - 4.0,
                LEFT - 6.0,
                py + 4.0
            );
            e += 1;
        }
    }
    for (i, (label, p)) in lines.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = p.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
        if coords.len() > 1 {
            let _ = writeln!(
                s,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\"/>",
                coords.join(" ")
            );
        }
        for c in &coords {
            let (cx, cy) = c.split_once(',').unwrap();
            let _ = writeln!(s, "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"3\" fill=\"{color}\"/>");
        }
        let ly = TOP + 10.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{color}\"/><text x=\"{:.1}\" y=\"{:.1}\">{label}</text>",
            W - RIGHT + 10.0,
            ly - 9.0,
            W - RIGHT + 24.0,
            ly
        );
    }
    s.push_str("</svg>\n");
    s
}
