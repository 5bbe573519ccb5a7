//! Self-contained HTML rendering with inline SVG charts.

use std::fmt::Write;

use crate::metrics::Metric;
use crate::profile::{ChatbotProfile, Flag, QuestionStats};
use crate::suggest::Suggestion;

use super::ReportDocument;

const STYLE: &str = "\
body{font-family:system-ui,sans-serif;margin:2rem auto;max-width:60rem;color:#222;line-height:1.4}
h1{margin-bottom:.2rem}
table{border-collapse:collapse;margin:.5rem 0}
td,th{border:1px solid #ccc;padding:.25rem .6rem;text-align:left}
td.num{text-align:right}
.charts{display:flex;flex-wrap:wrap;gap:1rem}
.chart{flex:1 1 26rem}
.chart h3{font-size:1rem;margin:.5rem 0 0}
svg text{font-size:11px;fill:#333}
.bar{fill:#4a7bb7}
.bar.flagged{fill:#d9534f}
.threshold{stroke:#b00;stroke-width:1.5;stroke-dasharray:5 3}
.axis{stroke:#888}
.pos{fill:#5cb85c}.neu{fill:#aaa}.neg{fill:#d9534f}
.flag{border-left:4px solid #d9534f;padding:.2rem .8rem;margin:.8rem 0}
.muted,.notice{color:#666}
.transcript{list-style:none;padding-left:.5rem}
.transcript .role{display:inline-block;width:3rem;font-weight:bold}
.transcript .user .role{color:#4a7bb7}
";

const CHART_W: f64 = 420.0;
const CHART_H: f64 = 200.0;
const LEFT: f64 = 44.0;
const RIGHT: f64 = 12.0;
const TOP: f64 = 16.0;
const BOTTOM: f64 = 26.0;

/// Escapes text content.
fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
    out
}

/// Display rounding: one decimal for durations and lengths, two otherwise.
pub fn format_value(metric: Metric, v: f64) -> String {
    match metric {
        Metric::EngagementDuration | Metric::ResponseLength => format!("{v:.1}"),
        _ => format!("{v:.2}"),
    }
}

fn percent(frac: f64) -> String {
    format!("{:.0}%", frac * 100.0)
}

fn is_flagged(flags: &[Flag], question_id: u32, metric: Metric) -> bool {
    flags
        .iter()
        .any(|f| f.question_id == question_id && f.metric == metric)
}

fn bar_chart(out: &mut String, profile: &ChatbotProfile, metric: Metric) {
    let threshold = profile.thresholds.get(metric).value;
    let values: Vec<(&QuestionStats, Option<f64>)> = profile
        .per_question
        .iter()
        .map(|q| (q, q.value(metric)))
        .collect();
    let max = values
        .iter()
        .filter_map(|(_, v)| *v)
        .fold(threshold, f64::max);
    let max = if max > 0.0 { max * 1.15 } else { 1.0 };
    let plot_w = CHART_W - LEFT - RIGHT;
    let plot_h = CHART_H - TOP - BOTTOM;
    let y = |v: f64| TOP + plot_h * (1.0 - v / max);
    let slot = plot_w / values.len().max(1) as f64;

    let _ = writeln!(out, "<div class=\"chart\" id=\"chart-{}\">", metric.key());
    let _ = writeln!(out, "<h3>{}</h3>", esc(metric.display_name()));
    let _ = writeln!(
        out,
        "<svg viewBox=\"0 0 {CHART_W} {CHART_H}\" width=\"{CHART_W}\" height=\"{CHART_H}\" role=\"img\">"
    );
    let base = TOP + plot_h;
    let _ = writeln!(
        out,
        "<line class=\"axis\" x1=\"{LEFT}\" y1=\"{base:.1}\" x2=\"{:.1}\" y2=\"{base:.1}\"/>",
        CHART_W - RIGHT
    );
    for (i, (q, v)) in values.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let _ = writeln!(
            out,
            "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">Q{}</text>",
            CHART_H - 8.0,
            q.question_id
        );
        let Some(v) = v else {
            let _ = writeln!(
                out,
                "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">n/a</text>",
                base - 4.0
            );
            continue;
        };
        let top = y(*v);
        let class = if is_flagged(&profile.flags, q.question_id, metric) {
            "bar flagged"
        } else {
            "bar"
        };
        let _ = writeln!(
            out,
            "<rect class=\"{class}\" x=\"{:.1}\" y=\"{top:.1}\" width=\"{:.1}\" height=\"{:.1}\"><title>Q{}: {}</title></rect>",
            cx - slot * 0.3,
            slot * 0.6,
            base - top,
            q.question_id,
            format_value(metric, *v)
        );
        let _ = writeln!(
            out,
            "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            top - 3.0,
            format_value(metric, *v)
        );
    }
    let ty = y(threshold);
    let _ = writeln!(
        out,
        "<line class=\"threshold\" x1=\"{LEFT}\" y1=\"{ty:.1}\" x2=\"{:.1}\" y2=\"{ty:.1}\"/>",
        CHART_W - RIGHT
    );
    let _ = writeln!(
        out,
        "<text x=\"4\" y=\"{:.1}\">{}</text>",
        ty + 4.0,
        format_value(metric, threshold)
    );
    out.push_str("</svg>\n</div>\n");
}

fn pie_chart(out: &mut String, profile: &ChatbotProfile) {
    let s = &profile.interview.sentiment;
    out.push_str("<h2>User sentiment</h2>\n");
    if !s.has_feedback {
        out.push_str("<p class=\"muted\">No feedback texts were collected.</p>\n");
        return;
    }
    let slices = [
        ("pos", "Positive", s.positive_frac),
        ("neu", "Neutral", s.neutral_frac),
        ("neg", "Negative", s.negative_frac),
    ];
    let (cx, cy, r) = (100.0_f64, 100.0_f64, 80.0_f64);
    out.push_str("<svg viewBox=\"0 0 340 200\" width=\"340\" height=\"200\" role=\"img\">\n");
    let point = |angle: f64, radius: f64| (cx + radius * angle.cos(), cy + radius * angle.sin());
    let mut start = -std::f64::consts::FRAC_PI_2;
    for (class, name, frac) in slices {
        if frac <= 0.0 {
            continue;
        }
        if frac >= 1.0 {
            let _ = writeln!(out, "<circle class=\"{class}\" cx=\"{cx}\" cy=\"{cy}\" r=\"{r}\"><title>{name}</title></circle>");
        } else {
            let end = start + frac * std::f64::consts::TAU;
            let (x0, y0) = point(start, r);
            let (x1, y1) = point(end, r);
            let large = u8::from(frac > 0.5);
            let _ = writeln!(
                out,
                "<path class=\"{class}\" d=\"M{cx},{cy} L{x0:.2},{y0:.2} A{r},{r} 0 {large} 1 {x1:.2},{y1:.2} Z\"><title>{name}</title></path>"
            );
        }
        if frac >= 0.05 {
            let (lx, ly) = point(start + frac * std::f64::consts::PI, r * 0.6);
            let _ = writeln!(
                out,
                "<text x=\"{lx:.1}\" y=\"{ly:.1}\" text-anchor=\"middle\">{}</text>",
                percent(frac)
            );
        }
        start += frac * std::f64::consts::TAU;
    }
    for (i, (class, name, frac)) in slices.iter().enumerate() {
        let ly = 60.0 + 26.0 * i as f64;
        let _ = writeln!(
            out,
            "<rect class=\"{class}\" x=\"210\" y=\"{:.0}\" width=\"14\" height=\"14\"/>",
            ly - 11.0
        );
        let _ = writeln!(
            out,
            "<text x=\"232\" y=\"{ly:.0}\">{name} {}</text>",
            percent(*frac)
        );
    }
    out.push_str("</svg>\n");
}

fn summary(out: &mut String, doc: &ReportDocument) {
    let i = &doc.profile.interview;
    let rating = |mean: Option<f64>, n: usize| match mean {
        Some(m) => format!("{m:.2} (n = {n})"),
        None => "n/a".into(),
    };
    out.push_str("<h2>Interview</h2>\n<table>\n");
    let _ = writeln!(
        out,
        "<tr><th>Sessions</th><td class=\"num\">{}</td></tr>",
        i.n_sessions
    );
    let _ = writeln!(
        out,
        "<tr><th>Completion rate</th><td class=\"num\">{:.2}</td></tr>",
        i.completion_rate
    );
    let _ = writeln!(
        out,
        "<tr><th>Satisfaction</th><td class=\"num\">{}</td></tr>",
        rating(i.mean_satisfaction, i.n_satisfaction)
    );
    let _ = writeln!(
        out,
        "<tr><th>Trust</th><td class=\"num\">{}</td></tr>",
        rating(i.mean_trust, i.n_trust)
    );
    let _ = writeln!(
        out,
        "<tr><th>Feedback texts</th><td class=\"num\">{}</td></tr>",
        i.n_feedback
    );
    out.push_str("</table>\n");

    out.push_str("<h2>Questions</h2>\n<table>\n<tr><th>Id</th><th>Question</th><th>Segments</th><th>Responded</th><th>Completion rate</th></tr>\n");
    for q in &doc.profile.per_question {
        let _ = writeln!(
            out,
            "<tr><td>Q{}</td><td>{}</td><td class=\"num\">{}</td><td class=\"num\">{}</td><td class=\"num\">{}</td></tr>",
            q.question_id,
            esc(&q.question_text),
            q.n_segments,
            q.n_responded,
            q.completion_rate.map_or("n/a".into(), |c| format_value(Metric::CompletionRate, c))
        );
    }
    out.push_str("</table>\n");
}

fn evidence(out: &mut String, suggestion: Option<&Suggestion>) {
    let Some(bundle) = suggestion.map(|s| &s.evidence) else {
        return;
    };
    if bundle.is_empty() {
        out.push_str(
            "<p class=\"muted\">No single conversation breached the threshold on its own.</p>\n",
        );
        return;
    }
    for (i, c) in bundle.clusters.iter().enumerate() {
        let _ = writeln!(
            out,
            "<details class=\"evidence\"><summary>Evidence {}: {:.1}% of breaching conversations (session {})</summary>",
            i + 1,
            c.coverage_frac * 100.0,
            esc(&c.representative.session_id)
        );
        out.push_str("<ol class=\"transcript\">\n");
        for m in &c.transcript {
            let _ = writeln!(
                out,
                "<li class=\"{}\"><span class=\"role\">{}</span> {}</li>",
                m.role,
                m.role,
                esc(&m.text)
            );
        }
        out.push_str("</ol>\n</details>\n");
    }
    if !bundle.omitted_segment_refs.is_empty() {
        let _ = writeln!(
            out,
            "<details class=\"omitted\"><summary>{} other breaching conversations</summary><p>",
            bundle.omitted_segment_refs.len()
        );
        let ids: Vec<String> = bundle
            .omitted_segment_refs
            .iter()
            .map(|r| esc(&r.session_id))
            .collect();
        out.push_str(&ids.join(", "));
        out.push_str("</p></details>\n");
    }
}

fn suggestions(out: &mut String, doc: &ReportDocument) {
    let profile = &doc.profile;
    let all: &[Suggestion] = doc.suggestions.as_deref().unwrap_or(&[]);
    out.push_str("<section id=\"suggestions\">\n<h2>Design suggestions</h2>\n");
    if profile.flags.is_empty() {
        out.push_str("<p class=\"notice\">Every question is within its thresholds: no design suggestions triggered.</p>\n");
    }
    for q in &profile.per_question {
        let flags: Vec<&Flag> = profile
            .flags
            .iter()
            .filter(|f| f.question_id == q.question_id)
            .collect();
        if flags.is_empty() {
            continue;
        }
        let _ = writeln!(
            out,
            "<article class=\"question\">\n<h3>Q{}. {}</h3>",
            q.question_id,
            esc(&q.question_text)
        );
        for f in flags {
            let mine: Vec<&Suggestion> = all
                .iter()
                .filter(|s| s.question_id == f.question_id && s.metric == f.metric)
                .collect();
            let _ = writeln!(
                out,
                "<div class=\"flag\" id=\"flag-q{}-{}\">",
                f.question_id,
                f.metric.key()
            );
            let _ = writeln!(
                out,
                "<p><strong>{}</strong> is {}: {} against a threshold of {}</p>",
                esc(f.metric.display_name()),
                crate::suggest::DirectionWord::from(f.direction),
                format_value(f.metric, f.observed),
                format_value(f.metric, f.threshold)
            );
            if !mine.is_empty() {
                out.push_str("<ul>\n");
                for s in &mine {
                    let _ = writeln!(out, "<li>{}</li>", esc(&s.sentence));
                }
                out.push_str("</ul>\n");
            }
            evidence(out, mine.first().copied());
            out.push_str("</div>\n");
        }
        out.push_str("</article>\n");
    }
    out.push_str("</section>\n");
}

/// Renders the report as a single HTML page with no external references.
pub fn emit_html(doc: &ReportDocument) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    out.push_str("<title>Chatbot profile</title>\n<style>\n");
    out.push_str(STYLE);
    out.push_str("</style>\n</head>\n<body>\n<h1>Chatbot profile</h1>\n");
    let _ = writeln!(
        out,
        "<p class=\"muted\">{} sessions, {} questions, {} flags.</p>",
        doc.profile.interview.n_sessions,
        doc.profile.per_question.len(),
        doc.profile.flags.len()
    );
    summary(&mut out, doc);

    out.push_str("<h2>Metrics by question</h2>\n<p class=\"muted\">Dashed lines mark thresholds; red bars are flagged.</p>\n<div class=\"charts\">\n");
    for metric in Metric::ALL {
        bar_chart(&mut out, &doc.profile, metric);
    }
    out.push_str("</div>\n");
    pie_chart(&mut out, &doc.profile);
    suggestions(&mut out, doc);

    if !doc.warnings.is_empty() {
        let _ = writeln!(
            out,
            "<details id=\"warnings\"><summary>{} warnings</summary>\n<ul>",
            doc.warnings.len()
        );
        for w in &doc.warnings {
            let _ = writeln!(out, "<li>{}</li>", esc(w));
        }
        out.push_str("</ul>\n</details>\n");
    }
    out.push_str("</body>\n</html>\n");
    out.into_bytes()
}
