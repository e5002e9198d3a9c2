//! Verification reports and their table, CSV, JSON and SVG renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub anchor: String,
    /// Acceptance criterion this check belongs to, if any.
    pub criterion: Option<u8>,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub n: Option<usize>,
    pub band_limit: usize,
    pub seed: u64,
    /// Band limits and quadrature orders used by the checks, by name.
    pub grids: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
    pub environment: Environment,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.to_table(),
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["suite", "id", "anchor", "criterion", "error", "tolerance", "pass", "note"])
            .expect("in-memory csv");
        for c in &self.checks {
            w.write_record([
                self.suite.as_str(),
                &c.id,
                &c.anchor,
                &c.criterion.map(|k| k.to_string()).unwrap_or_default(),
                &format!("{:.6e}", c.error),
                &format!("{:.1e}", c.tolerance),
                if c.pass { "true" } else { "false" },
                c.note.as_deref().unwrap_or(""),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
    }

    pub fn to_table(&self) -> String {
        let idw = self.checks.iter().map(|c| c.id.len()).max().unwrap_or(2).max(2);
        let aw = self.checks.iter().map(|c| c.anchor.len()).max().unwrap_or(6).max(6);
        let mut s = String::new();
        let env = &self.environment;
        let _ = writeln!(
            s,
            "suite {}  (band {}, seed {}{})",
            self.suite,
            env.band_limit,
            env.seed,
            env.n.map(|n| format!(", n = {n}")).unwrap_or_default()
        );
        let _ = writeln!(s, "{:<idw$}  {:<aw$}  {:>3}  {:>11}  {:>8}  result", "id", "anchor", "crit", "error", "tol");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<idw$}  {:<aw$}  {:>3}  {:>11.3e}  {:>8.1e}  {}{}",
                c.id,
                c.anchor,
                c.criterion.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
                c.error,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" },
                c.note.as_ref().map(|n| format!("  ({n})")).unwrap_or_default()
            );
        }
        if !env.grids.is_empty() {
            let g: Vec<String> = env.grids.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(s, "grids: {}", g.join(", "));
        }
        let failed = self.failures().count();
        let _ = writeln!(s, "{} checks, {} failed", self.checks.len(), failed);
        s
    }

    /// Bar chart of `log10(error / tolerance)` per check; bars right of the axis fail.
    pub fn to_svg(&self) -> String {
        let row = 16.0;
        let left = 320.0;
        let width = 720.0;
        let axis = left + 240.0;
        let scale = 12.0;
        let h = 40.0 + row * self.checks.len() as f64;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{h}" font-family="monospace" font-size="11">"#
        );
        let _ = writeln!(s, r#"<text x="4" y="14">{} : log10(error / tolerance)</text>"#, xml_escape(&self.suite));
        let _ = writeln!(s, r##"<line x1="{axis}" y1="20" x2="{axis}" y2="{h}" stroke="#444"/>"##);
        for (i, c) in self.checks.iter().enumerate() {
            let y = 24.0 + row * i as f64;
            let ratio = if c.error == 0.0 { -20.0 } else { (c.error / c.tolerance).log10().clamp(-20.0, 12.0) };
            let x0 = if ratio < 0.0 { axis + ratio * scale } else { axis };
            let wbar = (ratio.abs() * scale).max(1.0);
            let color = if c.pass { "#3a7d44" } else { "#c0392b" };
            let _ = writeln!(s, r#"<text x="4" y="{}">{}</text>"#, y + 11.0, xml_escape(&c.id));
            let _ = writeln!(
                s,
                r#"<rect x="{x0:.1}" y="{y:.1}" width="{wbar:.1}" height="{:.1}" fill="{color}"/>"#,
                row - 4.0
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
