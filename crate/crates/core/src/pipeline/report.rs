use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::train::{RateModel, StudyReport};
use super::PipelineError;
use crate::forest::{CorrelationMatrix, Importance};


fn slug(name: &str) -> String {
    name.to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_open(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

/// Horizontal bars, most important on top.
fn importance_svg(title: &str, imp: &Importance) -> String {
    let order = imp.ranking();
    let (left, bar_h, width) = (190.0, 22.0, 620.0);
    let height = 50.0 + bar_h * order.len() as f64 + 20.0;
    let max = imp.mean.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let span = width - left - 80.0;
    let mut s = svg_open(width, height);
    let _ = writeln!(s, "<text x=\"10\" y=\"24\" font-size=\"15\">{}</text>", esc(title));
    for (row, &i) in order.iter().enumerate() {
        let y = 40.0 + bar_h * row as f64;
        let v = imp.mean[i].max(0.0);
        let _ = writeln!(
            s,
            "<text class=\"label\" x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\
             <rect x=\"{left}\" y=\"{}\" width=\"{:.2}\" height=\"{}\" fill=\"#3b6ea5\"/>\
             <text x=\"{:.2}\" y=\"{}\">{:.4}</text>",
            left - 6.0,
            y + 15.0,
            esc(&imp.names[i]),
            y + 3.0,
            span * v / max,
            bar_h - 6.0,
            left + span * v / max + 4.0,
            y + 15.0,
            imp.mean[i]
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Diverging blue-white-red colour for r in [-1, 1].
fn heat(r: f64) -> String {
    let t = r.clamp(-1.0, 1.0);
    let (a, b) = if t >= 0.0 { (255.0, 255.0 * (1.0 - t)) } else { (255.0 * (1.0 + t), 255.0) };
    if t >= 0.0 {
        format!("rgb({:.0},{:.0},{:.0})", a, b, b)
    } else {
        format!("rgb({:.0},{:.0},{:.0})", a, a, b)
    }
}

fn correlation_svg(c: &CorrelationMatrix) -> String {
    let p = c.names.len();
    let (cell, left, top) = (34.0, 170.0, 170.0);
    let size = left + cell * p as f64 + 20.0;
    let mut s = svg_open(size, top + cell * p as f64 + 20.0);
    for (i, name) in c.names.iter().enumerate() {
        let y = top + cell * i as f64;
        let x = left + cell * i as f64;
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\
             <text transform=\"translate({},{}) rotate(-60)\">{}</text>",
            left - 6.0,
            y + cell * 0.65,
            esc(name),
            x + cell * 0.6,
            top - 6.0,
            esc(name)
        );
        for j in 0..p {
            let r = c.values[i][j];
            let _ = writeln!(
                s,
                "<rect x=\"{}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"{}\" stroke=\"#ccc\"/>\
                 <text x=\"{}\" y=\"{}\" font-size=\"9\" text-anchor=\"middle\">{:.2}</text>",
                left + cell * j as f64,
                heat(r),
                left + cell * (j as f64 + 0.5),
                y + cell * 0.6,
                r
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn scatter_panel(s: &mut String, x0: f64, title: &str, pts: &[(f64, f64)], r2: f64) {
    let (size, pad) = (300.0, 40.0);
    let (lo, hi) = pts
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .fold((0.0f64, 1.0f64), |(l, h), v| (l.min(v), h.max(v)));
    let map = |v: f64| (v - lo) / (hi - lo).max(1e-300) * size;
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\">{} (R² = {r2:.4}, n = {})</text>\
         <rect x=\"{}\" y=\"{pad}\" width=\"{size}\" height=\"{size}\" fill=\"none\" stroke=\"black\"/>\
         <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{pad}\" stroke=\"#999\" stroke-dasharray=\"4\"/>",
        x0 + pad,
        esc(title),
        pts.len(),
        x0 + pad,
        x0 + pad,
        pad + size,
        x0 + pad + size
    );
    for &(a, p) in pts {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"1.5\" fill=\"#3b6ea5\" fill-opacity=\"0.4\"/>",
            x0 + pad + map(a),
            pad + size - map(p)
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">actual</text>\
         <text transform=\"translate({},{}) rotate(-90)\" text-anchor=\"middle\">predicted</text>",
        x0 + pad + size / 2.0,
        pad + size + 30.0,
        x0 + 14.0,
        pad + size / 2.0
    );
}

fn scatter_svg(m: &RateModel) -> String {
    let mut s = svg_open(720.0, 390.0);
    scatter_panel(&mut s, 0.0, &format!("k = {:e} train", m.rate_constant), &m.train_points, m.train_r2);
    scatter_panel(&mut s, 360.0, &format!("k = {:e} test", m.rate_constant), &m.test_points, m.test_r2);
    s.push_str("</svg>\n");
    s
}

fn summary_text(r: &StudyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "config hash  {}", r.config_hash);
    let _ = writeln!(s, "seed         {}", r.seed);
    let _ = writeln!(s, "dataset      {} rows from {} networks", r.dataset_rows, r.n_networks);
    if !r.models.is_empty() {
        let _ = writeln!(s, "\n{:<16} {:>9} {:>9} {:>9}", "model", "train R²", "test R²", "OOB");
        for m in &r.models {
            let _ = writeln!(s, "{:<16} {:>9.4} {:>9.4} {:>9.4}", m.name, m.train_r2, m.test_r2, m.oob_score);
        }
        for m in &r.models {
            let top: Vec<&str> = m.importance.ranking().iter().take(3).map(|&i| m.importance.names[i].as_str()).collect();
            let _ = writeln!(s, "top features {:<16} {}", m.name, top.join(", "));
        }
    }
    if !r.per_rate.is_empty() {
        let _ = writeln!(s, "\n{:<10} {:>9} {:>9} {:>9}", "k", "train R²", "test R²", "OOB");
        for m in &r.per_rate {
            let _ = writeln!(s, "{:<10e} {:>9.4} {:>9.4} {:>9.4}", m.rate_constant, m.train_r2, m.test_r2, m.oob_score);
        }
    }
    for (what, why) in &r.skipped {
        let _ = writeln!(s, "skipped {what}: {why}");
    }
    s
}

/// Writes tables, plots and `summary.txt` into `dir`; returns the files.
pub fn write_report(r: &StudyReport, dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    fn put(dir: &Path, files: &mut Vec<PathBuf>, name: &str, body: &str) -> Result<(), PipelineError> {
        let p = dir.join(name);
        std::fs::write(&p, body)?;
        files.push(p);
        Ok(())
    }
    put(dir, &mut files, "summary.txt", &summary_text(r))?;
    put(dir, &mut files, "report.json", &serde_json::to_string(r)?)?;
    if r.models.is_empty() && r.per_rate.is_empty() {
        return Ok(files);
    }
    let mut t2 = String::from("model,features,train_r2,test_r2,oob_score,fit_seconds\n");
    for m in &r.models {
        let _ = writeln!(
            t2,
            "{},{},{},{},{},{}",
            m.name,
            m.features.len(),
            m.train_r2,
            m.test_r2,
            m.oob_score,
            m.fit_seconds
        );
    }
    put(dir, &mut files, "performance.csv", &t2)?;
    for m in &r.models {
        let base = format!("importance_{}", slug(&m.name));
        put(dir, &mut files, &format!("{base}.svg"), &importance_svg(&m.name, &m.importance))?;
        let p = dir.join(format!("{base}.csv"));
        m.importance.write_csv(&p)?;
        files.push(p);
    }
    let mut pr = String::from("rate_constant,train_r2,test_r2,oob_score,n_train,n_test\n");
    for (i, m) in r.per_rate.iter().enumerate() {
        let _ = writeln!(
            pr,
            "{},{},{},{},{},{}",
            m.rate_constant,
            m.train_r2,
            m.test_r2,
            m.oob_score,
            m.train_points.len(),
            m.test_points.len()
        );
        put(dir, &mut files, &format!("scatter_k{i}.svg"), &scatter_svg(m))?;
    }
    put(dir, &mut files, "per_rate.csv", &pr)?;
    if let Some(c) = &r.correlation {
        put(dir, &mut files, "correlation.svg", &correlation_svg(c))?;
        let p = dir.join("correlation.csv");
        c.write_csv(&p)?;
        files.push(p);
    }
    if let Some(g) = &r.grid {
        let p = dir.join("grid_search.csv");
        g.write_csv(&p)?;
        files.push(p);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty() -> StudyReport {
        StudyReport {
            config_hash: "h".into(),
            seed: 1,
            dataset_rows: 0,
            n_networks: 0,
            models: vec![],
            per_rate: vec![],
            correlation: None,
            grid: None,
            skipped: vec![],
            timings: vec![],
        }
    }

    #[test]
    fn empty_report_is_summary_only() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_report(&empty(), dir.path()).unwrap();
        assert!(files.iter().all(|f| f.extension().unwrap() != "svg"));
        assert!(dir.path().join("summary.txt").exists());
    }

    #[test]
    fn bar_order_follows_ranking() {
        let imp = Importance {
            names: vec!["a".into(), "b".into(), "c".into()],
            baseline_oob: 0.9,
            mean: vec![0.1, 0.5, 0.3],
            std: vec![0.0; 3],
            share: vec![1.0 / 9.0, 5.0 / 9.0, 3.0 / 9.0],
        };
        let svg = importance_svg("t", &imp);
        let labels: Vec<&str> = svg
            .split("class=\"label\"")
            .skip(1)
            .map(|s| s.split('>').nth(1).unwrap().split('<').next().unwrap())
            .collect();
        assert_eq!(labels, vec!["b", "c", "a"]);
    }
}
