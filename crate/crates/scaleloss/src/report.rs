//! Text tables, CSV and SVG renderers. All of them are pure functions of
//! their inputs so repeated runs produce identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use scaleloss_core::evaluator::{Category, EvalReport, SizeBucket};
use scaleloss_core::harness::{CurvePoint, RegressionTrace, ShareReport, SweepRow};
use scaleloss_core::losses::LossBreakdown;

/// Run configuration echoed as the first line of every harness CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunInfo {
    pub seed: u64,
    pub alpha: f64,
    /// One value, or every value of a sweep (joined with `;`).
    pub betas: Vec<f64>,
    pub lr: f64,
    pub steps: usize,
}

impl RunInfo {
    pub fn comment(&self) -> String {
        let betas: Vec<String> = self.betas.iter().map(f64::to_string).collect();
        format!(
            "# seed={},alpha={},beta={},lr={},steps={}\n",
            self.seed,
            self.alpha,
            betas.join(";"),
            self.lr,
            self.steps
        )
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn csv_body(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Aligned table of every metric; absent metrics print as `-`.
pub fn eval_table(report: &EvalReport, categories: &[Category]) -> String {
    let names: BTreeMap<u64, &str> = categories.iter().map(|c| (c.id, c.name.as_str())).collect();
    let mut out = String::new();
    for (metric, v) in report.rows() {
        let label = metric
            .strip_prefix("AP_cat_")
            .and_then(|id| id.parse::<u64>().ok())
            .and_then(|id| names.get(&id).filter(|n| !n.is_empty()).map(|n| format!("{metric} ({n})")))
            .unwrap_or(metric);
        let value = v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        let _ = writeln!(out, "{label:<28} {value:>8}");
    }
    out
}

/// `metric,value`; absent metrics have an empty value.
pub fn eval_csv(report: &EvalReport) -> String {
    csv_body(&["metric", "value"], report.rows().into_iter().map(|(m, v)| vec![m, opt(v)]))
}

pub fn loss_text(b: &LossBreakdown, weights: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "l1     {}", b.l1);
    let _ = writeln!(out, "sfl    {}", b.sfl);
    let _ = writeln!(out, "alpha  {}", b.alpha);
    let _ = writeln!(out, "pos    {}", b.pos);
    let _ = writeln!(out, "weights");
    for (i, w) in weights.iter().enumerate() {
        let _ = writeln!(out, "  {} {w}", i + 1);
    }
    out
}

pub fn curves_csv(points: &[CurvePoint], info: &RunInfo) -> String {
    let rows =
        points.iter().map(|p| vec![p.side.to_string(), p.shift.to_string(), p.iou.to_string(), p.loss.to_string()]);
    info.comment() + &csv_body(&["side", "shift", "iou", "loss"], rows)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// IoU against shift, one line per side.
pub fn curves_svg(points: &[CurvePoint]) -> String {
    let (w, h, m) = (640.0, 400.0, 48.0);
    let max_shift = points.iter().map(|p| p.shift).fold(0.0, f64::max).max(1.0);
    let px = |s: f64| m + (s / max_shift) * (w - 2.0 * m);
    let py = |v: f64| h - m - v * (h - 2.0 * m);
    let mut sides: Vec<f64> = Vec::new();
    for p in points {
        if !sides.contains(&p.side) {
            sides.push(p.side);
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<path d="M{m} {m} V{} H{}" fill="none" stroke="black"/>"#, h - m, w - m);
    let _ =
        writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">shift (px)</text>"#, w / 2.0, h - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-size="12" transform="rotate(-90 14 {})" text-anchor="middle">IoU</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (k, side) in sides.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut line: Vec<&CurvePoint> = points.iter().filter(|p| p.side == *side).collect();
        line.sort_by(|a, b| a.shift.total_cmp(&b.shift));
        let coords: Vec<String> = line.iter().map(|p| format!("{:.2},{:.2}", px(p.shift), py(p.iou))).collect();
        let _ =
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#, coords.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{colour}">side {side}</text>"#,
            w - m - 70.0,
            m + 16.0 * (k as f64 + 1.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn sweep_csv(rows: &[SweepRow], info: &RunInfo) -> String {
    let body = rows.iter().map(|r| {
        let mut v = vec![r.beta.to_string()];
        v.extend(r.final_bucket_iou.iter().map(|x| opt(*x)));
        v.push(r.final_mean_iou.to_string());
        v
    });
    info.comment() + &csv_body(&["beta", "iou_vt", "iou_t", "iou_s", "iou_m", "iou_mean"], body)
}

pub fn demo_csv(report: &ShareReport, info: &RunInfo) -> String {
    let body = report.rows.iter().map(|r| {
        vec![
            r.tercile.to_string(),
            r.count.to_string(),
            r.min_area.to_string(),
            r.max_area.to_string(),
            r.plain_share.to_string(),
            r.sfl_share.to_string(),
            r.plain_grad_norm.to_string(),
            r.sfl_grad_norm.to_string(),
        ]
    });
    let header =
        ["tercile", "count", "min_area", "max_area", "plain_share", "sfl_share", "plain_grad_norm", "sfl_grad_norm"];
    info.comment() + &csv_body(&header, body)
}

/// Final mean IoU per bucket for each regression run.
pub fn demo_summary(traces: &[&RegressionTrace]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<8}", "loss");
    for b in SizeBucket::ALL {
        let _ = write!(out, " {:>8}", format!("iou_{}", b.label()));
    }
    let _ = writeln!(out, " {:>8}", "iou_mean");
    for t in traces {
        let _ = write!(out, "{:<8}", t.variant.name());
        for v in t.final_bucket_iou {
            let _ = write!(out, " {:>8}", v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}")));
        }
        let _ = writeln!(out, " {:>8.4}", t.final_mean_iou());
    }
    out
}

/// Per-level summary of one relay pass.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayLevelStats {
    pub level: usize,
    pub shape: (usize, usize, usize),
    pub out_shape: (usize, usize, usize),
    pub input: [f64; 3],
    pub output: [f64; 3],
    pub channel_attention: (f64, f64),
    pub spatial_attention: (f64, f64),
}

pub fn relay_csv(stats: &[RelayLevelStats], seed: u64) -> String {
    let shape = |s: (usize, usize, usize)| format!("{}x{}x{}", s.0, s.1, s.2);
    let body = stats.iter().map(|s| {
        let mut v = vec![s.level.to_string(), shape(s.shape), shape(s.out_shape)];
        v.extend(s.input.iter().chain(&s.output).map(f64::to_string));
        v.extend(
            [s.channel_attention.0, s.channel_attention.1, s.spatial_attention.0, s.spatial_attention.1]
                .map(|x| x.to_string()),
        );
        v
    });
    let header = [
        "level",
        "in_shape",
        "out_shape",
        "in_min",
        "in_max",
        "in_mean",
        "out_min",
        "out_max",
        "out_mean",
        "ca_min",
        "ca_max",
        "sa_min",
        "sa_max",
    ];
    format!("# seed={seed}\n") + &csv_body(&header, body)
}
