//! Runs the shipped configs and prints one pass/fail line per acceptance criterion.
//!
//! Built with `harness = false`; the process exits non-zero when any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mdimlab::harness::{run_suite, ExperimentConfig, Row, RowKind, SuiteReport};

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"));
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn timed(name: &str) -> (SuiteReport, Duration) {
    let cfg = config(name);
    let start = Instant::now();
    let report = run_suite(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
    (report, start.elapsed())
}

/// Outcome over the check rows accepted by `keep`. No matching rows counts as a failure.
struct Tally {
    checks: usize,
    failed: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { checks: 0, failed: Vec::new() }
    }

    fn add(&mut self, report: &SuiteReport, keep: impl Fn(&Row) -> bool) -> &mut Self {
        for row in report.rows.iter().filter(|r| r.kind == RowKind::Check && keep(r)) {
            self.checks += 1;
            if row.pass != Some(true) {
                self.failed.push(format!("{}:{}[{}]", report.suite, row.name, row.subject));
            }
        }
        self
    }

    fn ok(&self) -> bool {
        self.checks > 0 && self.failed.is_empty()
    }

    fn summary(&self) -> String {
        match self.failed.first() {
            None if self.checks == 0 => "no checks ran".into(),
            None => format!("{} checks", self.checks),
            Some(first) => format!("{} of {} checks failed, first {first}", self.failed.len(), self.checks),
        }
    }
}

struct Line {
    id: u32,
    what: &'static str,
    pass: bool,
    detail: String,
}

fn within(t: Duration, limit_s: u64) -> (bool, String) {
    (t <= Duration::from_secs(limit_s), format!("{:.1}s of {limit_s}s", t.as_secs_f64()))
}

fn line(id: u32, what: &'static str, tally: &Tally, time: Option<(Duration, u64)>) -> Line {
    let mut pass = tally.ok();
    let mut detail = tally.summary();
    if let Some((t, limit)) = time {
        let (fast, note) = within(t, limit);
        pass &= fast;
        detail = format!("{detail}, {note}");
    }
    Line { id, what, pass, detail }
}

fn all(_: &Row) -> bool {
    true
}

fn main() -> ExitCode {
    let mut lines = Vec::new();

    let (machine, t_machine) = timed("machine_large");
    let (kraft, t_kraft) = timed("kraft");
    lines.push(line(
        1,
        "prefix-free machine and Kraft sum at max_len 20, budget 10^4",
        Tally::new().add(&machine, all).add(&kraft, all),
        Some((t_machine + t_kraft, 60)),
    ));

    let (geometry, t_geometry) = timed("geometry");
    let is_enum = |r: &Row| r.name.starts_with("enumeration");
    lines.push(line(
        2,
        "ball cover by at most 3^n cubes, tightness, partition",
        Tally::new().add(&geometry, |r| !is_enum(r)),
        Some((t_geometry, 30)),
    ));
    lines.push(line(3, "enumeration of Z^n below (2|m_i|+1)^n", Tally::new().add(&geometry, is_enum), None));

    let (coding, _) = timed("coding_bounds");
    let counting = |r: &Row| {
        ["cube_count", "ball_count", "cube_count_c_regression", "ball_count_c_regression", "ball_cube_c_regression"]
            .contains(&r.name.as_str())
    };
    lines.push(line(4, "cube and ball counting bounds with pinned constants", Tally::new().add(&coding, counting), None));
    let lds = |r: &Row| r.name.starts_with("lds_coding") || r.name.starts_with("levin");
    lines.push(line(5, "LDS coding bound and the singleton form", Tally::new().add(&coding, lds), None));

    let (kprofile, t_kprofile) = timed("kprofile");
    lines.push(line(
        6,
        "compressor calibration at r = 2^16",
        Tally::new().add(&kprofile, all),
        Some((t_kprofile, 120)),
    ));

    let (mdim, _) = timed("mdim");
    lines.push(line(7, "mutual dimension self, independence, symmetry, range", Tally::new().add(&mdim, all), None));

    let (dpi, _) = timed("dpi");
    lines.push(line(8, "data processing inequality", Tally::new().add(&dpi, all), None));

    let (counter, _) = timed("counterexample");
    lines.push(line(
        9,
        "space-filling image with low mutual dimension",
        Tally::new().add(&counter, |r| r.name == "dim_f_x" || r.name == "mdim_x_f_x"),
        None,
    ));

    let (synthesis, t_synthesis) = timed("synthesis");
    lines.push(line(
        10,
        "left-inverse synthesis within 2^-r",
        Tally::new().add(&synthesis, |r| r.name == "synthesis"),
        Some((t_synthesis, 60)),
    ));

    let (reverse, _) = timed("reverse_dpi");
    let (conservation, _) = timed("conservation");
    lines.push(line(
        11,
        "reverse inequality and conservation",
        Tally::new().add(&reverse, all).add(&conservation, all),
        None,
    ));

    let mut failures = 0;
    for l in &lines {
        failures += usize::from(!l.pass);
        println!("criterion {:>2} {}: {} ({})", l.id, if l.pass { "PASS" } else { "FAIL" }, l.what, l.detail);
    }
    println!("acceptance: {} passed, {failures} failed", lines.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
