use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::branch::{continue_branch, Branch, StepOptions};
use super::pitchfork::{detect_pitchfork, Pitchfork, PitchforkSignature};
use super::switch::{switch_branch, SwitchOptions, SwitchReport};
use crate::error::{Error, Result};
use crate::spectral::GridParams;

pub const CSV_HEADER: &str = "lambda,branch_id,norm_l1,norm_l1_1,leading_eig_real,stable";

/// Diagram rows in branch order. A `# config_digest:` comment line precedes
/// the header when a digest is given.
pub fn diagram_csv(branches: &[Branch], digest: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(d) = digest {
        let _ = writeln!(out, "# config_digest: {d}");
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for b in branches {
        for p in &b.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                p.lambda,
                b.id.as_str(),
                p.norm_l1,
                p.norm_l1_1,
                p.leading_eig_real,
                p.stable
            );
        }
    }
    out
}

/// Polylines of `norm_l1` against lambda: stable runs solid, unstable runs dashed.
pub fn diagram_svg(branches: &[Branch], digest: Option<&str>) -> String {
    let (w, h, pad) = (640.0, 480.0, 40.0);
    let pts = branches.iter().flat_map(|b| &b.points);
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in pts {
        x0 = x0.min(p.lambda);
        x1 = x1.max(p.lambda);
        y0 = y0.min(p.norm_l1);
        y1 = y1.max(p.norm_l1);
    }
    let sx = if x1 > x0 {
        (w - 2.0 * pad) / (x1 - x0)
    } else {
        1.0
    };
    let sy = if y1 > y0 {
        (h - 2.0 * pad) / (y1 - y0)
    } else {
        1.0
    };
    let colors = ["#1f77b4", "#d62728", "#2ca02c"];
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    if let Some(d) = digest {
        let _ = writeln!(out, "<!-- config_digest: {d} -->");
    }
    let _ = writeln!(
        out,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12">lambda [{x0:.4}, {x1:.4}]</text>"#,
        pad,
        h - 10.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12">l1 norm [{y0:.4}, {y1:.4}]</text>"#,
        pad,
        pad - 10.0
    );
    for (bi, b) in branches.iter().enumerate() {
        let color = colors[bi % colors.len()];
        let mut start = 0;
        while start < b.points.len() {
            let stable = b.points[start].stable;
            let mut end = start;
            while end + 1 < b.points.len() && b.points[end + 1].stable == stable {
                end += 1;
            }
            // share the boundary point so the curve stays connected
            let stop = (end + 1).min(b.points.len() - 1);
            let coords: Vec<String> = b.points[start..=stop]
                .iter()
                .map(|p| {
                    format!(
                        "{:.2},{:.2}",
                        pad + (p.lambda - x0) * sx,
                        h - pad - (p.norm_l1 - y0) * sy
                    )
                })
                .collect();
            let dash = if stable {
                ""
            } else {
                r#" stroke-dasharray="6,4""#
            };
            let _ = writeln!(
                out,
                r#"<polyline class="{}" fill="none" stroke="{color}"{dash} points="{}"/>"#,
                b.id.as_str(),
                coords.join(" ")
            );
            start = end + 1;
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Writes the CSV to `path`, and the SVG to `svg` when given.
pub fn emit_diagram(
    branches: &[Branch],
    path: &Path,
    svg: Option<&Path>,
    digest: Option<&str>,
) -> Result<()> {
    if branches.is_empty() || branches.iter().all(|b| b.points.is_empty()) {
        return Err(Error::InvalidInput("no branches to write".into()));
    }
    std::fs::write(path, diagram_csv(branches, digest)).map_err(|e| Error::io(path, e))?;
    if let Some(s) = svg {
        std::fs::write(s, diagram_svg(branches, digest)).map_err(|e| Error::io(s, e))?;
    }
    Ok(())
}

/// Symmetric branch, its first pitchfork and the two bifurcating branches.
#[derive(Clone, Debug)]
pub struct Diagram {
    pub symmetric: Branch,
    pub pitchfork: Pitchfork,
    pub plus: Branch,
    pub minus: Branch,
    pub switch: SwitchReport,
}

impl Diagram {
    pub fn branches(&self) -> Vec<Branch> {
        vec![
            self.symmetric.clone(),
            self.plus.clone(),
            self.minus.clone(),
        ]
    }
}

/// Follows the symmetric branch from `lambda = 0` to `lambda_max`, locates the
/// pitchfork and continues both new branches to `lambda_max`.
pub fn bifurcation_diagram(
    params: &GridParams,
    lambda_max: f64,
    opts: SwitchOptions,
) -> Result<Diagram> {
    let symmetric = continue_branch(params, None, lambda_max, opts.step)?;
    let pitchfork = detect_pitchfork(&symmetric, params, opts.step)?;
    let (plus, minus, switch) = switch_branch(&pitchfork, params, lambda_max, opts)?;
    Ok(Diagram {
        symmetric,
        pitchfork,
        plus,
        minus,
        switch,
    })
}

/// Everything needed to reproduce a bifurcation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub params: GridParams,
    pub lambda_range: [f64; 2],
    pub step_opts: StepOptions,
    pub detected_lambda0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<PitchforkSignature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch: Option<SwitchReport>,
    pub config_digest: String,
}
