//! Driver behind the `clusterc` binary: input resolution, compilation, verification, reports
//! and rendering.

use cluster_compiler::bench::{generate_benchmark, BenchError, Benchmark};
use cluster_compiler::circuit::{parse_circuit, CircuitError, GateCircuit};
use cluster_compiler::compiler::{
    baseline_multiround, compile_multiround, CompileConfig, CompileError, CompileStats, Selection,
};
use cluster_compiler::grid::{pad_to_width, MbqcGrid, MeasurementBasis as B};
use cluster_compiler::oracle::{exhaustive_min_depth, OracleError};
use cluster_compiler::verify::{audit, check_equivalence, AuditReport, EquivalenceReport, MetricsReport};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub enum Input {
    Circuit(PathBuf),
    Benchmark { bench: Benchmark, qubits: usize, seed: u64 },
}

/// Cluster width multiples of `2N - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WidthFactor {
    /// 1.25
    C1,
    /// 1.5
    C2,
}

impl WidthFactor {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "1.25" | "C1" | "c1" => Some(WidthFactor::C1),
            "1.5" | "1.50" | "C2" | "c2" => Some(WidthFactor::C2),
            _ => None,
        }
    }

    /// Width for `n` qubits, rounded up.
    pub fn width_for(self, n: usize) -> usize {
        let base = 2 * n - 1;
        match self {
            WidthFactor::C1 => (5 * base).div_ceil(4),
            WidthFactor::C2 => (3 * base).div_ceil(2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WidthMode {
    Absolute(usize),
    Factor(WidthFactor),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Emit {
    Text,
    Json,
    Svg,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub input: Input,
    pub width: WidthMode,
    pub m: usize,
    pub rounds: usize,
    /// Seeded component order; `None` places the lowest ready id first.
    pub seed: Option<u64>,
    pub emit: Emit,
    pub out: Option<PathBuf>,
    pub sweep: Option<Vec<usize>>,
    pub oracle: bool,
    pub oracle_budget: u64,
}

impl RunSpec {
    pub fn new(input: Input, width: WidthMode) -> Self {
        Self {
            input,
            width,
            m: 12,
            rounds: 1,
            seed: None,
            emit: Emit::Text,
            out: None,
            sweep: None,
            oracle: false,
            oracle_budget: 5_000_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] CircuitError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("compile failed: {0}")]
    Compile(#[from] CompileError),
    #[error("oracle failed: {0}")]
    Oracle(#[from] OracleError),
    #[error("invalid arguments: {0}")]
    Usage(String),
}

impl RunError {
    /// Process exit code: 2 for unusable input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse(_) | RunError::Usage(_) | RunError::Bench(_) => 2,
            _ => 1,
        }
    }
}

/// Parses `a..b` (inclusive) or a comma list.
pub fn parse_m_values(s: &str) -> Option<Vec<usize>> {
    let v: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse().ok()?, b.trim().trim_start_matches('=').parse().ok()?);
        (a..=b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse().ok()).collect::<Option<_>>()?
    };
    (!v.is_empty() && v.iter().all(|&m| m > 0)).then_some(v)
}

pub fn load_circuit(input: &Input) -> Result<GateCircuit, RunError> {
    match input {
        Input::Circuit(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| RunError::Read { path: path.clone(), source })?;
            Ok(parse_circuit(&text)?)
        }
        Input::Benchmark { bench, qubits, seed } => Ok(generate_benchmark(*bench, *qubits, *seed)?),
    }
}

pub fn resolve_width(mode: WidthMode, circuit: &GateCircuit) -> usize {
    match mode {
        WidthMode::Absolute(w) => w,
        WidthMode::Factor(f) => f.width_for(circuit.num_qubits),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleCheck {
    pub depth: usize,
    pub states: u64,
    pub matches: bool,
}

/// Everything a single compile produces.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub metrics: MetricsReport,
    pub equivalence: EquivalenceReport,
    pub audit: AuditReport,
    pub stats: CompileStats,
    pub wall_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCheck>,
}

impl RunReport {
    /// Audit-clean, equivalent and, when asked, equal to the oracle.
    pub fn passed(&self) -> bool {
        self.audit.ok() && self.equivalence.equivalent && self.oracle.as_ref().is_none_or(|o| o.matches)
    }
}

pub struct Compiled {
    pub grid: MbqcGrid,
    pub baseline: MbqcGrid,
    pub report: RunReport,
}

/// Compiles `circuit` at `width` with the run settings and verifies the result.
pub fn compile_and_check(circuit: &GateCircuit, width: usize, spec: &RunSpec, m: usize) -> Result<Compiled, RunError> {
    let selection = if spec.seed.is_some() { Selection::Seeded } else { Selection::SmallestId };
    let cfg =
        CompileConfig { m, rounds: spec.rounds, seed: spec.seed.unwrap_or(0), selection, ..CompileConfig::new(width) };
    let t = Instant::now();
    let result = compile_multiround(circuit, &cfg)?;
    let wall_ms = t.elapsed().as_secs_f64() * 1e3;
    let baseline =
        pad_to_width(&baseline_multiround(circuit, spec.rounds), width).map_err(|e| RunError::Usage(e.to_string()))?;
    let oracle = if spec.oracle && spec.rounds == 1 {
        let o = exhaustive_min_depth(circuit, width, spec.oracle_budget)?;
        Some(OracleCheck { depth: o.depth, states: o.states, matches: o.depth == result.grid.depth() })
    } else {
        None
    };
    let report = RunReport {
        metrics: MetricsReport::new(&baseline, &result.grid),
        equivalence: check_equivalence(&baseline, &result.grid),
        audit: audit(&result.grid, width),
        stats: result.stats,
        wall_ms,
        oracle,
    };
    Ok(Compiled { grid: result.grid, baseline, report })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub depth: usize,
    pub reduction: f64,
    pub wall_ms: f64,
    pub verified: bool,
}

/// One compile per `m`, in the given order.
pub fn sweep_m(spec: &RunSpec, ms: &[usize]) -> Result<Vec<SweepRow>, RunError> {
    if ms.is_empty() {
        return Err(RunError::Usage("no m values to sweep".into()));
    }
    let circuit = load_circuit(&spec.input)?;
    let width = resolve_width(spec.width, &circuit);
    ms.iter()
        .map(|&m| {
            let c = compile_and_check(&circuit, width, spec, m)?;
            Ok(SweepRow {
                m,
                depth: c.report.metrics.depth,
                reduction: c.report.metrics.reduction,
                wall_ms: c.report.wall_ms,
                verified: c.report.passed(),
            })
        })
        .collect()
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut s = String::from("m\tdepth\treduction\twall_ms\tverified\n");
    for r in rows {
        let _ = writeln!(s, "{}\t{}\t{:.4}\t{:.1}\t{}", r.m, r.depth, r.reduction, r.wall_ms, r.verified);
    }
    s
}

/// Text raster, one character per cell. θ cells are listed under the raster with their
/// angles; `components` adds a second raster with each cell's component label.
pub fn render_text(grid: &MbqcGrid, components: bool) -> String {
    let mut s = String::new();
    for r in 0..grid.width() {
        s.extend((0..grid.depth()).map(|c| grid.get(r, c).symbol()));
        s.push('\n');
    }
    let thetas: Vec<_> = grid.non_z().filter_map(|(p, b)| b.angle().map(|a| (p, a))).collect();
    if !thetas.is_empty() {
        s.push_str("angles:\n");
        for ((r, c), a) in thetas {
            // -0.0 and round-off noise print as 0
            let a = if a.abs() < 5e-7 { 0.0 } else { a };
            let _ = writeln!(s, "  ({r},{c}) {a:.6}");
        }
    }
    if components {
        s.push_str("components:\n");
        for r in 0..grid.width() {
            let line: Vec<String> = (0..grid.depth())
                .map(|c| match grid.note(r, c).and_then(|n| n.component.as_deref()) {
                    Some(l) if !grid.get(r, c).is_z() => format!("{l:>6}"),
                    _ => format!("{:>6}", "."),
                })
                .collect();
            s.push_str(line.join("").trim_end());
            s.push('\n');
        }
    }
    s
}

const PITCH: usize = 20;

fn colour(b: B) -> (&'static str, &'static str) {
    match b {
        B::X => ("#4878d0", "X"),
        B::Y => ("#6acc64", "Y"),
        B::Theta(_) => ("#ee854a", "θ"),
        B::Readout => ("#222222", "O"),
        B::Z => ("#ffffff", "Z"),
    }
}

/// SVG with one circle per photon; Z photons are drawn hollow.
pub fn render_svg(grid: &MbqcGrid) -> String {
    let (w, h) = (grid.depth() * PITCH + PITCH, grid.width() * PITCH + PITCH);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    for r in 0..grid.width() {
        for c in 0..grid.depth() {
            let b = grid.get(r, c);
            let (fill, name) = colour(b);
            let (x, y) = (PITCH + c * PITCH, PITCH + r * PITCH);
            let mut title = format!("({r},{c}) {name}");
            if let Some(a) = b.angle() {
                let _ = write!(title, " {a:.6}");
            }
            if let Some(l) = grid.note(r, c).and_then(|n| n.component.as_deref()) {
                let _ = write!(title, " {l}");
            }
            let stroke = if b.is_z() { "#bbbbbb" } else { "#333333" };
            let _ = writeln!(
                s,
                r#"  <circle cx="{x}" cy="{y}" r="7" fill="{fill}" stroke="{stroke}"><title>{title}</title></circle>"#
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_grid(grid: &MbqcGrid, emit: Emit) -> String {
    match emit {
        Emit::Text => render_text(grid, false),
        Emit::Json => grid.to_json(),
        Emit::Svg => render_svg(grid),
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|source| RunError::Write { path: path.clone(), source })
}

fn summary(r: &RunReport) -> String {
    let m = &r.metrics;
    let mut s = format!(
        "width {} baseline depth {} compiled depth {} reduction {:.4} utilization {:.4} -> {:.4} audit {} equivalent {} ({:.1} ms)",
        m.width,
        m.baseline_depth,
        m.depth,
        m.reduction,
        m.baseline_utilization,
        m.utilization,
        if r.audit.ok() { "ok" } else { "FAILED" },
        r.equivalence.equivalent,
        r.wall_ms
    );
    if let Some(o) = &r.oracle {
        let _ = write!(s, " oracle {} ({})", o.depth, if o.matches { "match" } else { "MISMATCH" });
    }
    for v in &r.audit.violations {
        let _ = write!(s, "\n  {:?} at {:?}: {}", v.constraint, v.at, v.detail);
    }
    for e in &r.equivalence.mismatches {
        let _ = write!(s, "\n  {e}");
    }
    s
}

/// What `run` produced: the main artifact, a one-line human summary and the exit code.
pub struct RunOutcome {
    pub artifact: String,
    pub summary: String,
    pub exit_code: i32,
}

/// Executes a run. With `out` set, the artifact goes to that file and the report to
/// `<out>.report.json`; otherwise the caller prints the artifact.
pub fn run(spec: &RunSpec) -> Result<RunOutcome, RunError> {
    if let Some(ms) = &spec.sweep {
        let rows = sweep_m(spec, ms)?;
        let ok = rows.iter().all(|r| r.verified);
        let artifact = match spec.emit {
            Emit::Json => serde_json::to_string_pretty(&rows).expect("rows serialize"),
            _ => sweep_table(&rows),
        };
        if let Some(out) = &spec.out {
            write_file(out, &artifact)?;
        }
        let summary = format!("{} sweep rows, all verified: {ok}", rows.len());
        return Ok(RunOutcome { artifact, summary, exit_code: if ok { 0 } else { 3 } });
    }
    let circuit = load_circuit(&spec.input)?;
    let width = resolve_width(spec.width, &circuit);
    let compiled = compile_and_check(&circuit, width, spec, spec.m)?;
    let artifact = render_grid(&compiled.grid, spec.emit);
    if let Some(out) = &spec.out {
        write_file(out, &artifact)?;
        let mut report_path = out.clone().into_os_string();
        report_path.push(".report.json");
        let report = serde_json::to_string_pretty(&compiled.report).expect("report serializes");
        write_file(&PathBuf::from(report_path), &report)?;
    }
    let exit_code = if compiled.report.passed() { 0 } else { 3 };
    Ok(RunOutcome { artifact, summary: summary(&compiled.report), exit_code })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_widths_round_up() {
        assert_eq!(WidthFactor::C1.width_for(5), 12);
        assert_eq!(WidthFactor::C2.width_for(5), 14);
        assert_eq!(WidthFactor::C2.width_for(6), 17);
        assert_eq!(WidthFactor::C1.width_for(15), 37);
    }

    #[test]
    fn m_value_lists() {
        assert_eq!(parse_m_values("2..4"), Some(vec![2, 3, 4]));
        assert_eq!(parse_m_values("1,8, 12"), Some(vec![1, 8, 12]));
        assert_eq!(parse_m_values("0..2"), None);
        assert_eq!(parse_m_values("x"), None);
    }

    #[test]
    fn single_readout_renders_as_o() {
        let mut g = MbqcGrid::new(1);
        g.set(0, 0, B::Readout).unwrap();
        assert_eq!(render_text(&g, false), "O\n");
    }

    #[test]
    fn svg_has_one_circle_per_photon() {
        let mut g = MbqcGrid::new(3);
        g.set(1, 4, B::Readout).unwrap();
        let svg = render_svg(&g);
        assert_eq!(svg.matches("<circle").count(), 15);
    }
}
