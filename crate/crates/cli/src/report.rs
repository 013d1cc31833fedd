use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, RunConfig};

/// Every check the CLI can emit, with the statement it verifies.
pub const CHECK_IDS: &[(&str, &str)] = &[
    ("spectrum.certified_maximum", "the supremum of λ_k over k ≥ 1 is attained inside the horizon"),
    ("spectrum.closed_form_twin", "λ_k by quadrature matches the closed form"),
    ("watson.closed_form_twin", "∫ J_ν² r^{1−τ} dr by quadrature matches the Γ-ratio formula"),
    ("constants.sharp_constant", "C(w)² = λ₀"),
    ("constants.stability_constant", "C′ = λ₀ − λ⋆"),
    ("trace.stability_inequality", "deficit ≥ C′·dist² on random profile sets"),
    ("trace.reverse_inequality", "deficit ≤ λ₀·dist² on random profile sets"),
    ("trace.equality_case", "equality cases attain deficit/dist² = C′"),
    ("duality.cfl3", "three-term convexity inequality"),
    ("duality.cfl1", "one-term duality-map inequality"),
    ("duality.aldaz_ratio", "empirical constant of the Aldaz-type ratio is finite"),
    ("duality.extremiser_transfer", "the duality map of T*G⋆ attains ‖T‖"),
    ("counterexample.square_gap_identity", "‖h1^{r/2} − h2^{r′/2}‖₂² = 2δ"),
    ("counterexample.ratio_decreasing", "ratios decrease strictly as δ ↓ 0 for σ > r"),
    ("counterexample.ratio_bounded", "ratios stay in a fixed band for σ ≤ r"),
    ("transport.sharp_ratio", "R̂ on the grid matches ‖ρf⋆‖_q/‖f⋆‖_p"),
    ("transport.quadratic_deficit", "deficit/ε² is positive and stable within a factor 2"),
];

pub fn statement(id: &str) -> &'static str {
    CHECK_IDS.iter().find(|(k, _)| *k == id).map(|(_, s)| *s).unwrap_or_else(|| panic!("unregistered check id {id}"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: &'static str,
    pub statement: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(id: &'static str, value: f64, tolerance: f64, pass: bool, detail: impl Into<String>) -> Self {
        Check { id, statement: statement(id), value, tolerance, pass, detail: detail.into() }
    }

    /// Passes when value ≤ tolerance.
    pub fn within(id: &'static str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self::new(id, value, tolerance, value <= tolerance, detail)
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} value={:e} tol={:e} {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.value,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config: serde_json::Value,
    pub summary: serde_json::Value,
    pub checks: Vec<Check>,
    /// Plot-data files, relative to the output directory.
    pub data_files: Vec<String>,
    #[serde(skip)]
    pub data: Vec<(String, String)>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn csv(&self) -> String {
        let mut out = String::from("id,value,tolerance,pass,detail\n");
        for c in &self.checks {
            let _ = writeln!(out, "{},{:e},{:e},{},\"{}\"", c.id, c.value, c.tolerance, c.pass, c.detail.replace('"', "'"));
        }
        out
    }

    /// Writes the report and its plot data; returns the paths written.
    pub fn write(&self, config: &RunConfig) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(&config.out)?;
        let stem = config.command.stem();
        let mut written = Vec::new();
        let mut put = |name: &str, body: &str| -> std::io::Result<()> {
            let path = Path::new(&config.out).join(name);
            fs::write(&path, body)?;
            written.push(path);
            Ok(())
        };
        match config.format {
            Format::Json => {
                let body = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
                put(&format!("{stem}_report.json"), &(body + "\n"))?;
            }
            Format::Csv => put(&format!("{stem}_report.csv"), &self.csv())?,
        }
        for (name, body) in &self.data {
            put(name, body)?;
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_ids_are_unique() {
        let mut ids: Vec<&str> = CHECK_IDS.iter().map(|(id, _)| *id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), CHECK_IDS.len());
    }

    #[test]
    fn within_and_line() {
        let c = Check::within("duality.cfl3", 0.5, 1.0, "x");
        assert!(c.pass && c.line().starts_with("PASS duality.cfl3 "));
        assert!(!Check::within("duality.cfl3", 2.0, 1.0, "").pass);
    }

    #[test]
    #[should_panic(expected = "unregistered")]
    fn unregistered_ids_panic() {
        statement("nope");
    }

    #[test]
    fn csv_quotes_details() {
        let r = Report {
            command: "constants",
            config: serde_json::Value::Null,
            summary: serde_json::Value::Null,
            checks: vec![Check::new("constants.sharp_constant", 0.0, 1e-8, true, "a \"b\", c")],
            data_files: Vec::new(),
            data: Vec::new(),
        };
        assert_eq!(r.csv().lines().nth(1), Some("constants.sharp_constant,0e0,1e-8,true,\"a 'b', c\""));
    }
}
