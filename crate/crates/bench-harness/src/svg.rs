//! Uncertainty histogram rendering: clean vs conflict sets overlaid as a
//! standalone SVG, 30 equal-width bins over [0, 1].

pub const BINS: usize = 30;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 44.0;

fn histogram(values: &[f64]) -> [usize; BINS] {
    let mut counts = [0usize; BINS];
    for &v in values {
        let clamped = v.clamp(0.0, 1.0);
        let bin = ((clamped * BINS as f64) as usize).min(BINS - 1);
        counts[bin] += 1;
    }
    counts
}

fn bars(counts: &[usize; BINS], max: f64, color: &str, out: &mut String) {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let bin_w = plot_w / BINS as f64;
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let h = plot_h * c as f64 / max;
        let x = MARGIN_LEFT + i as f64 * bin_w;
        let y = MARGIN_TOP + plot_h - h;
        out.push_str(&format!(
            "  <rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bin_w:.2}\" height=\"{h:.2}\" \
             fill=\"{color}\" fill-opacity=\"0.55\"/>\n"
        ));
    }
}

/// Render both uncertainty samples into one overlaid histogram. Bars are
/// scaled to the taller of the two series so the shapes stay comparable.
pub fn uncertainty_histogram_svg(title: &str, clean: &[f64], conflict: &[f64]) -> String {
    let clean_counts = histogram(clean);
    let conflict_counts = histogram(conflict);
    let max = clean_counts
        .iter()
        .chain(conflict_counts.iter())
        .copied()
        .max()
        .unwrap_or(0)
        .max(1) as f64;

    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y1 = MARGIN_TOP + plot_h;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{title}</text>\n",
        WIDTH / 2.0
    ));
    bars(&clean_counts, max, "#4682b4", &mut out);
    bars(&conflict_counts, max, "#b22222", &mut out);

    // Axes and ticks.
    out.push_str(&format!(
        "  <line x1=\"{x0}\" y1=\"{y1}\" x2=\"{x1}\" y2=\"{y1}\" stroke=\"black\"/>\n\
         \x20 <line x1=\"{x0}\" y1=\"{MARGIN_TOP}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let x = x0 + (x1 - x0) * tick;
        out.push_str(&format!(
            "  <line x1=\"{x:.2}\" y1=\"{y1}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>\n\
             \x20 <text x=\"{x:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\">{tick}</text>\n",
            y1 + 6.0,
            y1 + 22.0
        ));
    }
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">fused uncertainty</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 8.0
    ));
    out.push_str(&format!(
        "  <text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">count (max {max})</text>\n",
        (MARGIN_TOP + y1) / 2.0,
        (MARGIN_TOP + y1) / 2.0
    ));

    // Legend.
    out.push_str(&format!(
        "  <rect x=\"{x}\" y=\"{y}\" width=\"14\" height=\"14\" fill=\"#4682b4\" \
         fill-opacity=\"0.55\"/>\n\
         \x20 <text x=\"{tx}\" y=\"{ty}\" font-family=\"sans-serif\" font-size=\"12\">clean</text>\n",
        x = x1 - 150.0,
        y = MARGIN_TOP + 4.0,
        tx = x1 - 132.0,
        ty = MARGIN_TOP + 15.0
    ));
    out.push_str(&format!(
        "  <rect x=\"{x}\" y=\"{y}\" width=\"14\" height=\"14\" fill=\"#b22222\" \
         fill-opacity=\"0.55\"/>\n\
         \x20 <text x=\"{tx}\" y=\"{ty}\" font-family=\"sans-serif\" font-size=\"12\">conflict</text>\n",
        x = x1 - 150.0,
        y = MARGIN_TOP + 24.0,
        tx = x1 - 132.0,
        ty = MARGIN_TOP + 35.0
    ));
    out.push_str("</svg>\n");
    out
}
