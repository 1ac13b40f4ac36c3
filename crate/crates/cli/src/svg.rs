use std::fmt::Write as _;

use eda_planner::mckp::PlanReport;

const BAR: f64 = 28.0;
const GAP: f64 = 36.0;
const PLOT_H: f64 = 220.0;
const TOP: f64 = 40.0;
const LEFT: f64 = 60.0;

const SERIES: [(&str, &str); 3] = [("plan", "#2a7ab0"), ("over-provisioned", "#d9822b"), ("under-provisioned", "#6aa84f")];

/// Grouped bars per deadline: plan cost next to the all-largest and
/// all-smallest baselines. Infeasible deadlines get an `NA` label.
pub fn cost_chart(reports: &[PlanReport]) -> String {
    let groups: Vec<(u64, Option<[f64; 3]>)> = reports
        .iter()
        .map(|r| {
            let bars = match (r.total_cost, r.savings) {
                (Some(p), Some(s)) => Some([p, s.over_prov_cost, s.under_prov_cost]),
                _ => None,
            };
            (r.capacity, bars)
        })
        .collect();
    let max = groups
        .iter()
        .filter_map(|(_, b)| *b)
        .flatten()
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let group_w = 3.0 * BAR + GAP;
    let width = LEFT + group_w * groups.len().max(1) as f64 + 20.0;
    let height = TOP + PLOT_H + 60.0;
    let base = TOP + PLOT_H;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<title>Deployment cost per deadline</title>"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{base}" x2="{:.1}" y2="{base}" stroke="black"/>"#, width - 10.0);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{base}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{max:.2}</text>"#, LEFT - 4.0, TOP + 4.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{base}" text-anchor="end">0</text>"#, LEFT - 4.0);

    for (g, (capacity, bars)) in groups.iter().enumerate() {
        let x0 = LEFT + GAP / 2.0 + g as f64 * group_w;
        match bars {
            Some(bars) => {
                for (k, (&v, (name, color))) in bars.iter().zip(SERIES).enumerate() {
                    let h = v / max * PLOT_H;
                    let _ = writeln!(
                        s,
                        r#"<rect x="{:.1}" y="{:.1}" width="{BAR}" height="{h:.1}" fill="{color}"><title>{name}: {v:.2}</title></rect>"#,
                        x0 + k as f64 * BAR,
                        base - h
                    );
                }
            }
            None => {
                let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">NA</text>"#, x0 + 1.5 * BAR, base - 6.0);
            }
        }
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">C={capacity}</text>"#, x0 + 1.5 * BAR, base + 16.0);
    }
    for (k, (name, color)) in SERIES.iter().enumerate() {
        let x = LEFT + k as f64 * 130.0;
        let _ = writeln!(s, r#"<rect x="{x}" y="12" width="10" height="10" fill="{color}"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="21">{name}</text>"#, x + 14.0);
    }
    s.push_str("</svg>\n");
    s
}
