//! Plain-text tables and the SVG heatmap.

use std::fmt::Write as _;

use bendlab_core::evalstats::{EvalReport, Heatmap, Histogram, LabelCounts};
use bendlab_core::Label;

/// Row names of the heatmaps, string 1 (high e) first.
pub const STRING_NAMES: [&str; 6] = ["e", "B", "G", "D", "A", "E"];

/// Shortest representation that parses back to the same value.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// Tab-separated label counts: columns ∅ ↑ → ↓ Total.
pub fn label_counts_table(c: &LabelCounts) -> String {
    let mut s = String::from("label");
    for l in Label::ALL {
        write!(s, "\t{}", l.symbol()).unwrap();
    }
    s.push_str("\tTotal\nnotes");
    for n in c.counts {
        write!(s, "\t{n}").unwrap();
    }
    writeln!(s, "\t{}", c.total).unwrap();
    s
}

pub fn eval_report_table(title: &str, r: &EvalReport) -> String {
    let mut s = String::new();
    writeln!(s, "## {title} ({} records)", r.confusion.total()).unwrap();
    s.push_str("confusion (rows = true label, columns = predicted)\n");
    for l in Label::ALL {
        write!(s, "\t{}", l.symbol()).unwrap();
    }
    s.push('\n');
    for t in Label::ALL {
        s.push_str(t.symbol());
        for p in Label::ALL {
            write!(s, "\t{}", r.confusion.get(t, p)).unwrap();
        }
        s.push('\n');
    }
    s.push_str("label\tprecision\trecall\tf1\tsupport\n");
    for (l, sc) in Label::ALL.iter().zip(&r.per_class) {
        writeln!(
            s,
            "{}\t{:.4}\t{:.4}\t{:.4}\t{}",
            l.symbol(),
            sc.precision,
            sc.recall,
            sc.f1,
            sc.support
        )
        .unwrap();
    }
    let b = &r.binary;
    writeln!(
        s,
        "bend (any of ↑ → ↓)\t{:.4}\t{:.4}\t{:.4}\t{}",
        b.precision, b.recall, b.f1, b.support
    )
    .unwrap();
    writeln!(s, "macro-F1\t{:.4}", r.macro_f1).unwrap();
    writeln!(s, "accuracy\t{:.4}", r.accuracy).unwrap();
    s
}

/// `(name, importance)` pairs, largest first, ties by feature index.
pub fn top_importances(names: &[String], importance: &[f64], k: usize) -> Vec<(String, f64)> {
    let mut idx: Vec<usize> = (0..importance.len()).collect();
    idx.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]).then(a.cmp(&b)));
    idx.into_iter()
        .take(k)
        .map(|i| (names[i].clone(), importance[i]))
        .collect()
}

pub fn importance_table(top: &[(String, f64)]) -> String {
    let mut s = String::from("feature\timportance\n");
    for (n, v) in top {
        writeln!(s, "{n}\t{v:.6}").unwrap();
    }
    s
}

pub fn heatmap_tsv(h: &Heatmap) -> String {
    let mut s = String::from("string");
    for f in 0..=h.max_fret {
        write!(s, "\t{f}").unwrap();
    }
    s.push('\n');
    for (name, row) in STRING_NAMES.iter().zip(&h.values) {
        s.push_str(name);
        for v in row {
            write!(s, "\t{}", num(*v)).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn histogram_tsv(h: &Histogram) -> String {
    let mut s = String::from("label");
    for b in &h.bins {
        write!(s, "\t{b}").unwrap();
    }
    s.push_str("\tcount\n");
    for row in &h.rows {
        s.push_str(row.label.map_or("all", |l| l.symbol()));
        for v in &row.values {
            write!(s, "\t{}", num(*v)).unwrap();
        }
        writeln!(s, "\t{}", row.total).unwrap();
    }
    s
}

/// Grid of fret cells shaded by value (darkest = largest), rows e B G D A E.
pub fn heatmap_svg(h: &Heatmap, title: &str) -> String {
    const CELL: usize = 24;
    const LEFT: usize = 28;
    const TOP: usize = 36;
    let cols = h.max_fret as usize + 1;
    let width = LEFT + cols * CELL + 8;
    let height = TOP + 6 * CELL + 24;
    let max = h.values.iter().flatten().copied().fold(0.0, f64::max);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<title>{}</title>"#, escape(title)).unwrap();
    writeln!(s, r#"<text x="{LEFT}" y="16" font-size="13">{}</text>"#, escape(title)).unwrap();
    for (r, name) in STRING_NAMES.iter().enumerate() {
        let y = TOP + r * CELL;
        writeln!(s, r#"<text x="8" y="{}">{name}</text>"#, y + CELL / 2 + 4).unwrap();
        for c in 0..cols {
            let v = h.values[r][c];
            let shade = if max > 0.0 { v / max } else { 0.0 };
            let level = 255 - (shade * 255.0).round() as u8;
            writeln!(
                s,
                r##"<rect x="{}" y="{y}" width="{CELL}" height="{CELL}" fill="rgb({level},{level},255)" stroke="#999" stroke-width="0.5"><title>{name} fret {c}: {}</title></rect>"##,
                LEFT + c * CELL,
                num(v)
            )
            .unwrap();
        }
    }
    for c in 0..cols {
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{c}</text>"#,
            LEFT + c * CELL + CELL / 2,
            TOP + 6 * CELL + 16
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
