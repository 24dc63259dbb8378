use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use heat_impulse::{
    check_monotone_in_m, oracle_min_time, run_sweep, run_sweep_with_threads, verify, Error,
    MonotoneReport, Problem, Status, SweepResult,
};

use crate::config::RunConfig;
use crate::format::sig;
use crate::record::{CertificateOutcome, ResultRecord, VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// What a command printed and how the process should exit.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub message: String,
}

impl Outcome {
    fn ok(message: String) -> Self {
        Self { code: EXIT_OK, message }
    }

    fn failure(message: String) -> Self {
        Self { code: EXIT_FAILURE, message }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

/// Writes via a sibling temp file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn output_path(cfg: &RunConfig, out: Option<&Path>) -> Option<PathBuf> {
    out.map(Path::to_path_buf).or_else(|| cfg.output.as_ref().map(PathBuf::from))
}

pub fn solve_record(cfg: &RunConfig) -> Result<ResultRecord, Outcome> {
    let spec = cfg.problem_spec().map_err(Outcome::usage)?;
    let start = Instant::now();
    let problem = Problem::new(&spec).map_err(|e| Outcome::failure(format!("solver error: {e}")))?;
    let solution = problem.solve().map_err(|e| Outcome::failure(format!("solver error: {e}")))?;
    let certificate = match verify(&problem, &solution) {
        Ok(c) => CertificateOutcome::Computed(c),
        Err(Error::NotApplicable(why)) => CertificateOutcome::Skipped(why),
        Err(e) => return Err(Outcome::failure(format!("certificate error: {e}"))),
    };
    Ok(ResultRecord {
        config: cfg.clone(),
        solution,
        certificate,
        wall_seconds: start.elapsed().as_secs_f64(),
        version: VERSION.to_string(),
    })
}

pub fn cmd_solve(cfg: &RunConfig, out: Option<&Path>) -> Outcome {
    let record = match solve_record(cfg) {
        Ok(r) => r,
        Err(o) => return o,
    };
    let text = record.emit();
    let mut msg = format!(
        "status={} t_star={} d_at_t_star={} bisection_iters={}\n",
        record.solution.status.name(),
        sig(record.solution.t_star),
        sig(record.solution.d_at_t_star),
        record.solution.bisection_iters
    );
    match &record.certificate {
        CertificateOutcome::Computed(c) => msg.push_str(&format!(
            "bang_bang_residual={} collinearity_residual={}\n",
            sig(c.bang_bang_residual),
            sig(c.collinearity_residual)
        )),
        CertificateOutcome::Skipped(why) => msg.push_str(&format!("certificate skipped: {why}\n")),
    }
    match output_path(cfg, out) {
        Some(p) => {
            if let Err(e) = write_atomic(&p, &text) {
                return Outcome::failure(format!("cannot write {}: {e}", p.display()));
            }
            msg.push_str(&format!("record written to {}\n", p.display()));
        }
        None => msg.push_str(&text),
    }
    Outcome::ok(msg)
}

pub const CSV_HEADER: &str = "M,tau,t_star,d_at_t_star,bang_bang_residual,collinearity_residual,status";

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for cell in &result.cells {
        let row = match &cell.outcome {
            Ok(c) => {
                let (bb, col) = match c.certificate {
                    Some((bb, col)) => (sig(bb), sig(col)),
                    None => (String::new(), String::new()),
                };
                format!(
                    "{},{},{},{},{},{},{}",
                    sig(cell.m),
                    sig(cell.tau),
                    sig(c.t_star),
                    sig(c.d_at_t_star),
                    bb,
                    col,
                    c.status.name()
                )
            }
            Err(e) => {
                let msg = e.to_string().replace([',', '\n'], ";");
                format!("{},{},,,,,failed: {msg}", sig(cell.m), sig(cell.tau))
            }
        };
        out.push_str(&row);
        out.push('\n');
    }
    out
}

pub fn monotone_report_text(report: &MonotoneReport) -> String {
    let mut out = String::from("# t*(M) strict-decrease check per tau\n");
    for col in &report.columns {
        if col.skipped() {
            out.push_str(&format!("tau={} skipped (fewer than two nontrivial cells)\n", sig(col.tau)));
            continue;
        }
        out.push_str(&format!(
            "tau={} pairs={} min_decrement={} violations={}\n",
            sig(col.tau),
            col.compared_pairs,
            col.min_decrement.map(sig).unwrap_or_default(),
            col.violations.len()
        ));
        for v in &col.violations {
            out.push_str(&format!(
                "  violation: t*({})={} !< t*({})={}\n",
                sig(v.m_hi),
                sig(v.t_hi),
                sig(v.m_lo),
                sig(v.t_lo)
            ));
        }
    }
    out.push_str(&format!("monotone={}\n", if report.passed() { "pass" } else { "fail" }));
    out
}

fn report_path(csv: &Path) -> PathBuf {
    csv.with_extension("monotone.txt")
}

pub fn cmd_sweep(cfg: &RunConfig, out: Option<&Path>, threads: Option<usize>) -> Outcome {
    let grid = match cfg.sweep_grid() {
        Ok(g) => g,
        Err(m) => return Outcome::usage(m),
    };
    let result = match threads {
        Some(n) => run_sweep_with_threads(&grid, n),
        None => run_sweep(&grid),
    };
    let result = match result {
        Ok(r) => r,
        Err(e) => return Outcome::failure(format!("sweep error: {e}")),
    };
    let csv = sweep_csv(&result);
    let report = monotone_report_text(&check_monotone_in_m(&result));
    let mut msg = format!("{} cells, {} failed\n", result.cells.len(), result.failures.len());
    match output_path(cfg, out) {
        Some(p) => {
            let rp = report_path(&p);
            if let Err(e) = write_atomic(&p, &csv).and_then(|_| write_atomic(&rp, &report)) {
                return Outcome::failure(format!("cannot write {}: {e}", p.display()));
            }
            msg.push_str(&format!("csv written to {}\nreport written to {}\n", p.display(), rp.display()));
            msg.push_str(&report);
        }
        None => {
            msg.push_str(&csv);
            msg.push_str(&report);
        }
    }
    if result.failures.is_empty() { Outcome::ok(msg) } else { Outcome::failure(msg) }
}

pub fn cmd_verify(cfg: Option<&RunConfig>, record_path: &Path) -> Outcome {
    let text = match fs::read_to_string(record_path) {
        Ok(t) => t,
        Err(e) => return Outcome::usage(format!("cannot read record {}: {e}", record_path.display())),
    };
    let (echoed, solution) = match ResultRecord::parse(&text) {
        Ok(v) => v,
        Err(e) => return Outcome::usage(format!("corrupt record {}: {e}", record_path.display())),
    };
    let cfg = cfg.unwrap_or(&echoed);
    let spec = match cfg.problem_spec() {
        Ok(s) => s,
        Err(m) => return Outcome::usage(m),
    };
    if solution.status != Status::Nontrivial {
        return Outcome::ok(format!(
            "skipped: record status is {}; no certificate applies\n",
            solution.status.name()
        ));
    }
    let problem = match Problem::new(&spec) {
        Ok(p) => p,
        Err(e) => return Outcome::failure(format!("solver error: {e}")),
    };
    match verify(&problem, &solution) {
        Ok(c) => {
            let tol = spec.tolerances.cert;
            let pass = c.passes(tol);
            let msg = format!(
                "bang_bang_residual={} collinearity_residual={} tol={} {}\n",
                sig(c.bang_bang_residual),
                sig(c.collinearity_residual),
                sig(tol),
                if pass { "pass" } else { "fail" }
            );
            if pass { Outcome::ok(msg) } else { Outcome::failure(msg) }
        }
        Err(Error::NotApplicable(why)) => Outcome::ok(format!("skipped: {why}\n")),
        Err(e) => Outcome::failure(format!("certificate error: {e}\n")),
    }
}

pub fn cmd_oracle(cfg: &RunConfig) -> Outcome {
    let spec = match cfg.problem_spec() {
        Ok(s) => s,
        Err(m) => return Outcome::usage(m),
    };
    if spec.n_modes > heat_impulse::min_time::ORACLE_MAX_MODES {
        return Outcome::usage(format!(
            "oracle supports at most {} modes (config has {})",
            heat_impulse::min_time::ORACLE_MAX_MODES,
            spec.n_modes
        ));
    }
    let oracle = match oracle_min_time(&spec, &cfg.oracle) {
        Ok(o) => o,
        Err(e) => return Outcome::failure(format!("oracle error: {e}")),
    };
    let sol = match heat_impulse::solve_min_time(&spec) {
        Ok(s) => s,
        Err(e) => return Outcome::failure(format!("solver error: {e}")),
    };
    let nu = sol.u_star.norm();
    let no = oracle.u.norm();
    let angle = if nu > 0.0 && no > 0.0 {
        sig((sol.u_star.inner(&oracle.u) / (nu * no)).clamp(-1.0, 1.0).acos())
    } else {
        "n/a".into()
    };
    Outcome::ok(format!(
        "solver_t_star={} oracle_t={} gap={} control_angle={} status={}\n",
        sig(sol.t_star),
        sig(oracle.t),
        sig((sol.t_star - oracle.t).abs()),
        angle,
        sol.status.name()
    ))
}
