//! Self-describing solve records: the resolved config echoed under `config.`,
//! then the solution, the certificate and run metadata.

use heat_impulse::{Certificate, Field, MinTimeSolution, Status};

use crate::config::{scan, ConfigError, RunConfig};
use crate::format::{sig, sig_list};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateOutcome {
    Computed(Certificate),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub config: RunConfig,
    pub solution: MinTimeSolution,
    pub certificate: CertificateOutcome,
    pub wall_seconds: f64,
    pub version: String,
}

impl ResultRecord {
    pub fn emit(&self) -> String {
        let s = &self.solution;
        let mut out = String::from("# heat-impulse solve record\n");
        out.push_str(&format!("record.version={}\n", self.version));
        out.push_str(&self.config.emit_prefixed("config."));
        out.push_str(&format!("solution.status={}\n", s.status.name()));
        out.push_str(&format!("solution.t_star={}\n", sig(s.t_star)));
        out.push_str(&format!("solution.d_at_t_star={}\n", sig(s.d_at_t_star)));
        out.push_str(&format!("solution.bisection_iters={}\n", s.bisection_iters));
        out.push_str(&format!("solution.u_star={}\n", sig_list(s.u_star.as_slice())));
        match &self.certificate {
            CertificateOutcome::Computed(c) => {
                out.push_str("certificate.status=computed\n");
                out.push_str(&format!("certificate.bang_bang_residual={}\n", sig(c.bang_bang_residual)));
                out.push_str(&format!(
                    "certificate.collinearity_residual={}\n",
                    sig(c.collinearity_residual)
                ));
                out.push_str(&format!("certificate.adjoint_at_tau={}\n", sig_list(c.adjoint_at_tau.as_slice())));
                out.push_str(&format!("certificate.terminal_state={}\n", sig_list(c.terminal_state.as_slice())));
            }
            CertificateOutcome::Skipped(why) => {
                out.push_str(&format!("certificate.status=skipped: {why}\n"));
            }
        }
        out.push_str(&format!("run.wall_seconds={}\n", sig(self.wall_seconds)));
        out
    }

    /// Parses the config echo and the solution block. The certificate block
    /// is not read back: verification recomputes it.
    pub fn parse(text: &str) -> Result<(RunConfig, MinTimeSolution), ConfigError> {
        let config = RunConfig::parse_prefixed(text, "config.")?;
        let mut sol = scan(text, "solution.")?;
        let mut take = |key: &str| {
            sol.remove(key)
                .ok_or_else(|| ConfigError { line: None, message: format!("record lacks `solution.{key}`") })
        };
        let bad = |line: usize, key: &str, m: String| ConfigError {
            line: Some(line),
            message: format!("solution.{key}: {m}"),
        };
        let float = |(line, v): (usize, String), key: &str| {
            v.parse::<f64>().map_err(|e| bad(line, key, format!("`{v}`: {e}")))
        };

        let (line, status) = take("status")?;
        let status = Status::parse(&status).ok_or_else(|| bad(line, "status", format!("unknown status `{status}`")))?;
        let t_star = float(take("t_star")?, "t_star")?;
        let d_at_t_star = float(take("d_at_t_star")?, "d_at_t_star")?;
        let (line, iters) = take("bisection_iters")?;
        let bisection_iters = iters.parse::<usize>().map_err(|e| bad(line, "bisection_iters", e.to_string()))?;
        let (line, u) = take("u_star")?;
        let coeffs = u
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(line, "u_star", e.to_string()))?;
        if coeffs.len() != config.modes {
            return Err(bad(
                line,
                "u_star",
                format!("{} coefficients for {} modes", coeffs.len(), config.modes),
            ));
        }
        let solution = MinTimeSolution {
            t_star,
            u_star: Field::from_vec(coeffs),
            d_at_t_star,
            status,
            bisection_iters,
        };
        Ok((config, solution))
    }
}

/// Record text without run metadata; identical for identical configs.
pub fn deterministic_part(record: &str) -> String {
    record.lines().filter(|l| !l.starts_with("run.")).map(|l| format!("{l}\n")).collect()
}
