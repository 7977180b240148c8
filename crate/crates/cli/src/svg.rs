//! Static line charts: mean reliability against the main loading, one chart
//! per (p/q, sl, r) panel, with a reference line at .70.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use fars_core::predictors::PredictorKind;
use fars_core::simulation::SummaryRow;

pub const REFERENCE_LINE: f64 = 0.70;

const WIDTH: f64 = 420.0;
const HEIGHT: f64 = 300.0;
const LEFT: f64 = 50.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub p_per_q: usize,
    pub sl: f64,
    pub r: f64,
    pub n: usize,
    pub model_error: bool,
    /// Per predictor, `(l, mean over factors of the mean reliability)` sorted by `l`.
    pub series: Vec<(PredictorKind, Vec<(f64, f64)>)>,
}

impl Panel {
    pub fn title(&self) -> String {
        let mut t = format!("p/q = {}, sl = {:.2}, r = {:.2}", self.p_per_q, self.sl, self.r);
        if self.n > 0 {
            let _ = write!(t, ", n = {}", self.n);
        }
        if self.model_error {
            t.push_str(", minor factors");
        }
        t
    }

    pub fn file_name(&self) -> String {
        let mut f = format!("panel_pq{}_sl{:.2}_r{:.2}", self.p_per_q, self.sl, self.r);
        if self.n > 0 {
            let _ = write!(f, "_n{}", self.n);
        }
        if self.model_error {
            f.push_str("_me");
        }
        f.push_str(".svg");
        f
    }
}

/// Groups summary rows into panels. Keys are compared on values rounded to
/// 1e-6 so the grouping is stable.
pub fn panels(rows: &[SummaryRow]) -> Vec<Panel> {
    let key = |v: f64| (v * 1e6).round() as i64;
    type PanelKey = (usize, i64, i64, usize, bool);
    type Series = BTreeMap<(usize, i64), (f64, f64, usize)>;
    let mut groups: BTreeMap<PanelKey, Series> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.mean.is_finite()) {
        let rank = PredictorKind::STANDARD.iter().position(|&k| k == row.predictor).unwrap_or(usize::MAX);
        let cell = groups
            .entry((row.p_per_q, key(row.sl), key(row.r), row.n, row.model_error))
            .or_default()
            .entry((rank, key(row.l)))
            .or_insert((row.l, 0.0, 0));
        cell.1 += row.mean;
        cell.2 += 1;
    }
    groups
        .into_iter()
        .map(|((p_per_q, sl, r, n, model_error), cells)| {
            let mut series: Vec<(PredictorKind, Vec<(f64, f64)>)> = Vec::new();
            for ((rank, _), (l, sum, count)) in cells {
                let kind = PredictorKind::STANDARD[rank];
                match series.last_mut() {
                    Some((k, pts)) if *k == kind => pts.push((l, sum / count as f64)),
                    _ => series.push((kind, vec![(l, sum / count as f64)])),
                }
            }
            Panel { p_per_q, sl: sl as f64 / 1e6, r: r as f64 / 1e6, n, model_error, series }
        })
        .collect()
}

fn style(kind: PredictorKind) -> (&'static str, &'static str) {
    match kind {
        PredictorKind::Regression => ("#1b6ca8", "none"),
        PredictorKind::Bartlett => ("#c0392b", "6 3"),
        PredictorKind::McDonald => ("#27864a", "2 3"),
        PredictorKind::Custom => ("#555555", "none"),
    }
}

pub fn render(panel: &Panel) -> String {
    let ls: Vec<f64> = panel.series.iter().flat_map(|(_, p)| p.iter().map(|&(l, _)| l)).collect();
    let (mut x0, mut x1) = ls.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| (a.min(l), b.max(l)));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x0 -= 0.05;
        x1 += 0.05;
    }
    let (plot_w, plot_h) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |l: f64| LEFT + (l - x0) / (x1 - x0) * plot_w;
    let sy = |v: f64| TOP + (1.0 - v.clamp(0.0, 1.0)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="12">{}</text>"#,
        LEFT + plot_w / 2.0,
        panel.title()
    );
    let _ =
        writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#);
    for k in 0..=5 {
        let v = k as f64 * 0.2;
        let y = sy(v);
        let _ = writeln!(s, r##"<line x1="{}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/>"##, LEFT - 4.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.1}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let mut ticks: Vec<f64> = ls.clone();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    for l in ticks {
        let x = sx(l);
        let y = TOP + plot_h;
        let _ = writeln!(s, r#"<line x1="{x:.1}" y1="{y}" x2="{x:.1}" y2="{}" stroke="black"/>"#, y + 4.0);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{l:.2}</text>"#, y + 16.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">main loading</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 6.0
    );
    let yr = sy(REFERENCE_LINE);
    let _ = writeln!(
        s,
        r##"<line class="reference" x1="{LEFT}" y1="{yr:.1}" x2="{}" y2="{yr:.1}" stroke="#888888" stroke-dasharray="4 4"/>"##,
        LEFT + plot_w
    );
    for (i, (kind, pts)) in panel.series.iter().enumerate() {
        let (color, dash) = style(*kind);
        let path: Vec<String> = pts.iter().map(|&(l, v)| format!("{:.1},{:.1}", sx(l), sy(v))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-predictor="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.8" stroke-dasharray="{dash}"/>"#,
            kind.as_str(),
            path.join(" ")
        );
        for &(l, v) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{color}"/>"#, sx(l), sy(v));
        }
        let ly = TOP + 12.0 + 16.0 * i as f64;
        let lx = WIDTH - RIGHT + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.8" stroke-dasharray="{dash}"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 25.0, ly + 4.0, kind.as_str());
    }
    s.push_str("</svg>\n");
    s
}
