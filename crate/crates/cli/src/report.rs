use serde::Serialize;

/// Process exit status, one per failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    CheckFailed = 1,
    ConfigError = 2,
    Io = 3,
    Degenerate = 4,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub check: String,
    pub pass: bool,
    pub measured: Option<f64>,
    pub tolerance: f64,
}

impl Outcome {
    /// Passes when `measured <= tolerance`; NaN never passes.
    pub fn at_most(check: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Outcome {
            check: check.into(),
            pass: measured <= tolerance,
            measured: measured.is_finite().then_some(measured),
            tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config_digest: Option<String>,
    pub outcomes: Vec<Outcome>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputSummary {
    pub path: String,
    pub rows: usize,
    pub failed_nodes: usize,
    pub peak_modulus: Vec<f64>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            config_digest: None,
            outcomes: Vec::new(),
            exit_code: 0,
            diagnostic: None,
            violations: Vec::new(),
            output: None,
        }
    }

    /// Ends the run with an error class and message.
    pub fn abort(mut self, exit: Exit, diagnostic: impl Into<String>) -> Self {
        self.exit_code = exit as i32;
        self.diagnostic = Some(diagnostic.into());
        self
    }

    /// Sets the exit code from the outcomes.
    pub fn settle(mut self) -> Self {
        self.exit_code = if self.outcomes.iter().all(|o| o.pass) {
            Exit::Pass
        } else {
            Exit::CheckFailed
        } as i32;
        self
    }

    pub fn summary(&self) -> String {
        let mut lines = Vec::new();
        for o in &self.outcomes {
            let measured = o.measured.map_or_else(|| "n/a".to_string(), |m| format!("{m:.3e}"));
            lines.push(format!(
                "{} {} {} (tolerance {:e})",
                if o.pass { "PASS" } else { "FAIL" },
                o.check,
                measured,
                o.tolerance
            ));
        }
        if let Some(d) = &self.diagnostic {
            lines.push(format!("error: {d}"));
        }
        lines.push(format!("{}: exit {}", self.command, self.exit_code));
        lines.join("\n")
    }
}
