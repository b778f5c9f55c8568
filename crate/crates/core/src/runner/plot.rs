use std::fmt::Write as _;
use std::path::Path;

use super::RunnerError;
use crate::dataset::Dataset;
use crate::margot::PRUNED_THRESHOLD;
use crate::tree::TreeClassifier;

const SIZE: f64 = 480.0;
const PAD: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    /// `wᵀx + b = 0`
    Split,
    /// `wᵀx + b = +1`
    UpperSupport,
    /// `wᵀx + b = −1`
    LowerSupport,
}

/// A hyperplane segment clipped to the plot box, in data coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotLine {
    pub node: usize,
    pub kind: LineKind,
    pub from: [f64; 2],
    pub to: [f64; 2],
}

/// Segment of `w₀x + w₁y + b = level` inside `bounds`, if any.
fn clip(w: &[f64], b: f64, level: f64, bounds: [[f64; 2]; 2]) -> Option<([f64; 2], [f64; 2])> {
    let [[x0, x1], [y0, y1]] = bounds;
    let tol = 1e-12 * (1.0 + (x1 - x0).abs() + (y1 - y0).abs());
    let mut pts: Vec<[f64; 2]> = Vec::new();
    let mut add = |p: [f64; 2]| {
        let inside = p[0] >= x0 - tol && p[0] <= x1 + tol && p[1] >= y0 - tol && p[1] <= y1 + tol;
        let dup = pts
            .iter()
            .any(|q| (q[0] - p[0]).abs() <= tol && (q[1] - p[1]).abs() <= tol);
        if inside && !dup {
            pts.push(p);
        }
    };
    if w[1] != 0.0 {
        for x in [x0, x1] {
            add([x, (level - b - w[0] * x) / w[1]]);
        }
    }
    if w[0] != 0.0 {
        for y in [y0, y1] {
            add([(level - b - w[1] * y) / w[0], y]);
        }
    }
    let first = *pts.first()?;
    let far = pts.iter().copied().max_by(|p, q| {
        let d = |a: &[f64; 2]| (a[0] - first[0]).powi(2) + (a[1] - first[1]).powi(2);
        d(p).total_cmp(&d(q))
    })?;
    (far != first).then_some((first, far))
}

/// The split line of every non-pruned branch node and, for last-level nodes,
/// the two supporting lines, clipped to `bounds = [[x_lo, x_hi], [y_lo, y_hi]]`.
pub fn plot_lines(clf: &TreeClassifier, bounds: [[f64; 2]; 2]) -> Vec<PlotLine> {
    let topo = clf.topology();
    let mut lines = Vec::new();
    for t in topo.branch_nodes() {
        let w = clf.weights(t);
        if w.iter().all(|v| v.abs() <= PRUNED_THRESHOLD) {
            continue;
        }
        let b = clf.intercept(t);
        let mut kinds = vec![(LineKind::Split, 0.0)];
        if topo.is_last_level(t) {
            kinds.push((LineKind::UpperSupport, 1.0));
            kinds.push((LineKind::LowerSupport, -1.0));
        }
        for (kind, level) in kinds {
            if let Some((from, to)) = clip(w, b, level, bounds) {
                lines.push(PlotLine { node: t, kind, from, to });
            }
        }
    }
    lines
}

fn data_bounds(data: &Dataset) -> [[f64; 2]; 2] {
    let mut out = [[f64::INFINITY, f64::NEG_INFINITY]; 2];
    for x in &data.features {
        for j in 0..2 {
            out[j][0] = out[j][0].min(x[j]);
            out[j][1] = out[j][1].max(x[j]);
        }
    }
    for axis in out.iter_mut() {
        let span = axis[1] - axis[0];
        let pad = if span > 0.0 { 0.05 * span } else { 0.5 };
        axis[0] -= pad;
        axis[1] += pad;
    }
    out
}

/// SVG scatter of `data` with the tree's hyperplanes. Output bytes depend
/// only on the inputs.
pub fn plot_2d(clf: &TreeClassifier, data: &Dataset) -> Result<String, RunnerError> {
    if data.num_features() != 2 {
        return Err(RunnerError::PlotDimension(data.num_features()));
    }
    if clf.num_features() != 2 {
        return Err(RunnerError::PlotDimension(clf.num_features()));
    }
    let bounds = data_bounds(data);
    let inner = SIZE - 2.0 * PAD;
    let px = |p: [f64; 2]| {
        let [[x0, x1], [y0, y1]] = bounds;
        (
            PAD + (p[0] - x0) / (x1 - x0) * inner,
            SIZE - PAD - (p[1] - y0) / (y1 - y0) * inner,
        )
    };
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r##"<rect x="{PAD}" y="{PAD}" width="{inner}" height="{inner}" fill="none" stroke="#999999"/>"##
    )
    .unwrap();
    for line in plot_lines(clf, bounds) {
        let (ax, ay) = px(line.from);
        let (bx, by) = px(line.to);
        let style = match line.kind {
            LineKind::Split => r##"stroke="#000000" stroke-width="1.5""##,
            _ => r##"stroke="#666666" stroke-width="1" stroke-dasharray="5,4""##,
        };
        let kind = match line.kind {
            LineKind::Split => "split",
            LineKind::UpperSupport => "support-plus",
            LineKind::LowerSupport => "support-minus",
        };
        writeln!(
            svg,
            r#"<line class="{kind}" data-node="{}" x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}" {style}/>"#,
            line.node
        )
        .unwrap();
    }
    for (x, &y) in data.features.iter().zip(&data.labels) {
        let (cx, cy) = px([x[0], x[1]]);
        let (class, color) = if y > 0.0 {
            ("pos", "#1f77b4")
        } else {
            ("neg", "#d62728")
        };
        writeln!(
            svg,
            r#"<circle class="{class}" cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{color}"/>"#
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_plot(clf: &TreeClassifier, data: &Dataset, path: &Path) -> Result<(), RunnerError> {
    std::fs::write(path, plot_2d(clf, data)?)?;
    Ok(())
}
