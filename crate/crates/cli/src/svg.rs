//! Static SVG output: line charts and tree diagrams.

use std::fmt::Write as _;

use epiforecast::cart::RegressionTree;

const W: f64 = 900.0;
const H: f64 = 480.0;
const PAD: f64 = 60.0;

pub struct Line<'a> {
    pub label: &'a str,
    pub color: &'a str,
    /// Starting x index of the first value.
    pub offset: usize,
    pub values: &'a [f64],
    pub dashed: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Multi-series line chart over a shared integer x-axis.
pub fn line_chart(title: &str, x_labels: &[String], lines: &[Line]) -> String {
    let n = x_labels.len().max(2);
    let y_max = lines
        .iter()
        .flat_map(|l| l.values.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let y_min = lines
        .iter()
        .flat_map(|l| l.values.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::min);
    let sx = |i: f64| PAD + i * (W - 2.0 * PAD) / (n - 1) as f64;
    let sy = |v: f64| H - PAD - (v - y_min) * (H - 2.0 * PAD) / (y_max - y_min);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title)).unwrap();
    writeln!(
        s,
        r#"<polyline points="{PAD},{PAD} {PAD},{b} {r},{b}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    )
    .unwrap();
    for k in 0..=4 {
        let v = y_min + (y_max - y_min) * k as f64 / 4.0;
        writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{:.0}</text>"#, PAD - 6.0, sy(v) + 4.0, v).unwrap();
    }
    let step = (n / 8).max(1);
    for (i, label) in x_labels.iter().enumerate().step_by(step) {
        writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, sx(i as f64), H - PAD + 16.0, escape(label))
            .unwrap();
    }
    for (k, line) in lines.iter().enumerate() {
        let pts: Vec<String> = line
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:.1},{:.1}", sx((i + line.offset) as f64), sy(*v)))
            .collect();
        let dash = if line.dashed { r#" stroke-dasharray="5,3""# } else { "" };
        writeln!(s, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#, pts.join(" "), line.color)
            .unwrap();
        let ly = PAD + 14.0 * k as f64;
        writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}"{dash}/>"#, PAD + 10.0, PAD + 30.0, line.color)
            .unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, PAD + 36.0, ly + 4.0, escape(line.label)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Tree diagram; leaves are spaced evenly and internal nodes sit above the
/// midpoint of their children.
pub fn tree_diagram(tree: &RegressionTree) -> String {
    let mut x = vec![0.0; tree.nodes.len()];
    let mut next_leaf = 0.0;
    place(tree, 0, &mut x, &mut next_leaf);
    let leaves = next_leaf.max(1.0);
    let depth = tree.nodes.iter().map(|n| n.depth).max().unwrap_or(0) as f64;
    let (box_w, box_h, gap_x, gap_y) = (150.0, 44.0, 20.0, 80.0);
    let width = leaves * (box_w + gap_x) + gap_x;
    let height = (depth + 1.0) * (box_h + gap_y) + 20.0;
    let cx = |id: usize| gap_x + x[id] * (box_w + gap_x) + box_w / 2.0;
    let cy = |id: usize| 20.0 + tree.nodes[id].depth as f64 * (box_h + gap_y);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (id, node) in tree.nodes.iter().enumerate() {
        if let Some(split) = &node.split {
            for (child, tag) in [(split.left, "yes"), (split.right, "no")] {
                writeln!(
                    s,
                    r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="gray"/>"#,
                    cx(id),
                    cy(id) + box_h,
                    cx(child),
                    cy(child)
                )
                .unwrap();
                writeln!(
                    s,
                    r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" fill="gray">{tag}</text>"#,
                    (cx(id) + cx(child)) / 2.0,
                    (cy(id) + box_h + cy(child)) / 2.0
                )
                .unwrap();
            }
        }
    }
    for (id, node) in tree.nodes.iter().enumerate() {
        let fill = if node.is_leaf() { "#e8f1fb" } else { "#f5f5f5" };
        writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="{box_w}" height="{box_h}" rx="4" fill="{fill}" stroke="black"/>"#,
            cx(id) - box_w / 2.0,
            cy(id)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}  n={}</text>"#,
            cx(id),
            cy(id) + 16.0,
            node.mean,
            node.count
        )
        .unwrap();
        if let Some(split) = &node.split {
            writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-weight="bold">{}</text>"#,
                cx(id),
                cy(id) + 34.0,
                escape(&split.rule.describe(&tree.names))
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

fn place(tree: &RegressionTree, id: usize, x: &mut [f64], next_leaf: &mut f64) {
    match &tree.nodes[id].split {
        None => {
            x[id] = *next_leaf;
            *next_leaf += 1.0;
        }
        Some(s) => {
            place(tree, s.left, x, next_leaf);
            place(tree, s.right, x, next_leaf);
            x[id] = (x[s.left] + x[s.right]) / 2.0;
        }
    }
}
