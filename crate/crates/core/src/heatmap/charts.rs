use std::collections::BTreeMap;

use super::svg::{nice_ticks, Axis, Svg};
use super::ChartError;
use crate::dataset::Dataset;
use crate::nn::TrainHistory;

/// Smallest value drawn on a log-scale axis; non-positive losses are clamped here.
pub const LOG_FLOOR: f64 = 1e-12;

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

fn frame(
    svg: &mut Svg,
    x: &Axis,
    y: &Axis,
    x_ticks: &[(f64, String)],
    y_ticks: &[(f64, String)],
    x_label: &str,
    y_label: &str,
) {
    svg.line("axis", LEFT, H - BOTTOM, W - RIGHT, H - BOTTOM, "black", false);
    svg.line("axis", LEFT, TOP, LEFT, H - BOTTOM, "black", false);
    for (v, label) in x_ticks {
        let px = x.map(*v);
        svg.line("tick", px, H - BOTTOM, px, H - BOTTOM + 5.0, "black", false);
        svg.text(px, H - BOTTOM + 18.0, "middle", 11.0, label);
    }
    for (v, label) in y_ticks {
        let py = y.map(*v);
        svg.line("tick", LEFT - 5.0, py, LEFT, py, "black", false);
        svg.text(LEFT - 8.0, py + 4.0, "end", 11.0, label);
    }
    svg.text((LEFT + W - RIGHT) / 2.0, H - 12.0, "middle", 12.0, x_label);
    svg.raw(&format!(
        r#"<text x="16" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12.0" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (TOP + H - BOTTOM) / 2.0,
        (TOP + H - BOTTOM) / 2.0,
        super::svg::escape(y_label)
    ));
}

fn legend(svg: &mut Svg, entries: &[(String, &str, bool)]) {
    for (i, (label, color, dashed)) in entries.iter().enumerate() {
        let y = TOP + 8.0 + i as f64 * 16.0;
        svg.line("legend", LEFT + 14.0, y, LEFT + 40.0, y, color, *dashed);
        svg.text(LEFT + 46.0, y + 4.0, "start", 11.0, label);
    }
}

/// Per-setpoint means backing the scatter figure.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub set_c: f64,
    pub mean_reading_c: f64,
    pub mean_prediction_c: f64,
}

pub fn scatter_series(test: &Dataset, predictions_c: &[f64]) -> Result<Vec<ScatterPoint>, ChartError> {
    if predictions_c.is_empty() {
        return Err(ChartError::Empty("no predictions".into()));
    }
    if predictions_c.len() != test.len() {
        return Err(ChartError::Misaligned { predictions: predictions_c.len(), samples: test.len() });
    }
    let mut groups: BTreeMap<usize, (f64, f64, f64, usize)> = BTreeMap::new();
    for (s, p) in test.samples().iter().zip(predictions_c) {
        let g = groups.entry(s.setpoint_index).or_insert((s.label_c, 0.0, 0.0, 0));
        g.1 += s.readings.iter().sum::<f64>() / s.readings.len() as f64;
        g.2 += p;
        g.3 += 1;
    }
    Ok(groups
        .into_values()
        .map(|(set_c, r, p, n)| ScatterPoint { set_c, mean_reading_c: r / n as f64, mean_prediction_c: p / n as f64 })
        .collect())
}

/// Raw readings, per-setpoint reading mean, per-setpoint prediction mean and the
/// dashed identity line, all against the set temperature.
pub fn emit_prediction_scatter_svg(test: &Dataset, predictions_c: &[f64]) -> Result<String, ChartError> {
    let series = scatter_series(test, predictions_c)?;
    let all_y = test
        .samples()
        .iter()
        .flat_map(|s| s.readings.iter().copied())
        .chain(predictions_c.iter().copied())
        .chain(series.iter().map(|p| p.set_c));
    let (y_lo, y_hi) = all_y.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let x_lo = series.first().map_or(0.0, |p| p.set_c) - 1.0;
    let x_hi = series.last().map_or(1.0, |p| p.set_c) + 1.0;
    let (y_lo, y_hi) = (y_lo.floor() - 1.0, y_hi.ceil() + 1.0);
    let x = Axis { lo: x_lo, hi: x_hi, px_lo: LEFT, px_hi: W - RIGHT };
    let y = Axis { lo: y_lo, hi: y_hi, px_lo: H - BOTTOM, px_hi: TOP };

    let mut svg = Svg::new(W, H);
    svg.text(W / 2.0, 22.0, "middle", 14.0, "Sensor readings and model predictions vs set temperature");
    let fmt = |v: &f64| (*v, format!("{v:.0}"));
    frame(
        &mut svg,
        &x,
        &y,
        &nice_ticks(x_lo, x_hi, 8).iter().map(fmt).collect::<Vec<_>>(),
        &nice_ticks(y_lo, y_hi, 8).iter().map(fmt).collect::<Vec<_>>(),
        "set temperature (°C)",
        "temperature (°C)",
    );
    for s in test.samples() {
        for r in &s.readings {
            svg.circle("reading", x.map(s.label_c), y.map(*r), 1.6, "#b0b0b0");
        }
    }
    svg.line("identity", x.map(x_lo), y.map(x_lo), x.map(x_hi), y.map(x_hi), "#1f77b4", true);
    let reading_pts: Vec<(f64, f64)> = series.iter().map(|p| (x.map(p.set_c), y.map(p.mean_reading_c))).collect();
    let pred_pts: Vec<(f64, f64)> = series.iter().map(|p| (x.map(p.set_c), y.map(p.mean_prediction_c))).collect();
    svg.polyline("reading-mean", &reading_pts, "#2ca02c", false);
    svg.polyline("prediction-mean", &pred_pts, "#d62728", false);
    for &(px, py) in &reading_pts {
        svg.circle("reading-mean", px, py, 3.5, "#2ca02c");
    }
    for &(px, py) in &pred_pts {
        svg.circle("prediction-mean", px, py, 3.5, "#d62728");
    }
    legend(
        &mut svg,
        &[
            ("individual sensor readings".into(), "#b0b0b0", false),
            ("mean of sensor readings".into(), "#2ca02c", false),
            ("mean model prediction".into(), "#d62728", false),
            ("target (set temperature)".into(), "#1f77b4", true),
        ],
    );
    Ok(svg.finish())
}

/// Train (solid) and test (dashed) loss per epoch for each named history.
pub fn emit_loss_curves_svg(histories: &[(&str, &TrainHistory)], log_scale: bool) -> Result<String, ChartError> {
    if histories.is_empty() || histories.iter().all(|(_, h)| h.epochs() == 0) {
        return Err(ChartError::Empty("no loss history".into()));
    }
    let mut clamped = false;
    let mut tf = |v: f64| {
        if log_scale {
            if !(v >= LOG_FLOOR) {
                clamped = true;
            }
            v.max(LOG_FLOOR).log10()
        } else {
            v
        }
    };
    let curves: Vec<(&str, Vec<f64>, Vec<f64>)> = histories
        .iter()
        .map(|(name, h)| {
            (*name, h.train_loss.iter().map(|&v| tf(v)).collect(), h.test_loss.iter().map(|&v| tf(v)).collect())
        })
        .collect();
    let epochs = histories.iter().map(|(_, h)| h.epochs()).max().unwrap_or(1);
    let finite = curves.iter().flat_map(|(_, a, b)| a.iter().chain(b)).filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if log_scale {
        (lo, hi) = (lo.floor(), hi.ceil());
    }
    if hi <= lo {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo, hi) = (lo - pad, hi + pad);
    }

    let x = Axis { lo: 1.0, hi: epochs.max(2) as f64, px_lo: LEFT, px_hi: W - RIGHT };
    let y = Axis { lo, hi, px_lo: H - BOTTOM, px_hi: TOP };
    let y_ticks: Vec<(f64, String)> = if log_scale {
        (lo as i64..=hi as i64).map(|e| (e as f64, format!("1e{e}"))).collect()
    } else {
        nice_ticks(lo, hi, 6).into_iter().map(|v| (v, format!("{v:.3e}"))).collect()
    };
    let x_ticks: Vec<(f64, String)> =
        nice_ticks(0.0, epochs as f64, 6).into_iter().filter(|v| *v >= 1.0).map(|v| (v, format!("{v:.0}"))).collect();

    let mut svg = Svg::new(W, H);
    let kind = histories[0].1.loss_kind.name().to_uppercase();
    let title = if log_scale { format!("{kind} loss per epoch (log scale)") } else { format!("{kind} loss per epoch") };
    svg.text(W / 2.0, 22.0, "middle", 14.0, &title);
    frame(&mut svg, &x, &y, &x_ticks, &y_ticks, "epoch", "loss (normalized)");

    let mut entries = Vec::new();
    for (i, (name, train, test)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts = |v: &[f64]| -> Vec<(f64, f64)> {
            v.iter().enumerate().map(|(e, l)| (x.map((e + 1) as f64), y.map(*l))).collect()
        };
        svg.polyline("train-loss", &pts(train), color, false);
        svg.polyline("test-loss", &pts(test), color, true);
        entries.push((format!("{name} train"), color, false));
        entries.push((format!("{name} test"), color, true));
    }
    if clamped {
        entries.push((format!("values <= 0 clamped to {LOG_FLOOR:e}"), "#ffffff", false));
    }
    let right_legend: Vec<(String, &str, bool)> = entries;
    for (i, (label, color, dashed)) in right_legend.iter().enumerate() {
        let lx = W - RIGHT - 190.0;
        let ly = TOP + 8.0 + i as f64 * 16.0;
        svg.line("legend", lx, ly, lx + 26.0, ly, color, *dashed);
        svg.text(lx + 32.0, ly + 4.0, "start", 11.0, label);
    }
    Ok(svg.finish())
}
