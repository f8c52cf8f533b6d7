//! Scenario execution: propagate, derive observables, write datasets, and
//! record a manifest with checksums.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use clgrid::analysis::{
    factorization_audit, linear_entropy, project_energy_basis, uncertainties_from_wigner,
    AuditConfig,
};
use clgrid::oracle::{self, DtPolicy, OracleConfig, StencilOrder};
use clgrid::propagator::propagate;
use clgrid::states::realize;
use clgrid::transforms::{to_position, wigner};
use clgrid::{realize_on, Axis, CharGrid, Error as LibError, PositionGrid, StateSpec, WignerGrid};

use crate::config::{OutputKind, Scenario};
use crate::gridio::{csv_float, encode_grid};

/// Largest tolerated drift of the trace away from one.
const TRACE_TOLERANCE: f64 = 1e-6;
/// Oracle-vs-closed-form gap treated as a contract violation by `--check`.
const CHECK_TOLERANCE: f64 = 1e-4;
/// Factorization-audit thresholds: exact for analytic states, lookup-limited
/// when a gridded state is involved.
const AUDIT_ANALYTIC: f64 = 1e-10;
const AUDIT_GRIDDED: f64 = 1e-6;

#[derive(Debug)]
pub enum RunError {
    /// Exit code 2.
    Config(String),
    /// Exit code 3: a numerical contract was violated.
    Numerical(String),
    /// Exit code 4.
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Numerical(m) => write!(f, "numerical contract violation: {m}"),
            RunError::Io(m) => write!(f, "i/o failure: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

fn numerical(context: &str, e: LibError) -> RunError {
    RunError::Numerical(format!("{context}: {e}"))
}

fn io_err<E: std::fmt::Display>(path: &Path) -> impl FnOnce(E) -> RunError + '_ {
    move |e| RunError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunFlags {
    /// Compare the closed-form propagation against the finite-difference
    /// integrator and fail on disagreement.
    pub check: bool,
    /// Run the initial-state factorization audit against a reference state.
    pub audit: bool,
}

#[derive(Debug, Serialize)]
struct ManifestOutput {
    file: String,
    bytes: u64,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    parameters: ResolvedParams,
    config: &'a crate::config::ConfigFile,
    outputs: Vec<ManifestOutput>,
}

#[derive(Debug, Serialize)]
struct ResolvedParams {
    mass: f64,
    gamma: f64,
    omega: f64,
    hbar: f64,
    diffusion: f64,
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub check_gap: Option<f64>,
    pub audit_discrepancy: Option<f64>,
}

struct OutputSink {
    dir: PathBuf,
    written: BTreeMap<String, (u64, String)>,
}

impl OutputSink {
    fn new(dir: &Path) -> Result<Self, RunError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self {
            dir: dir.to_owned(),
            written: BTreeMap::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, RunError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(io_err(&path))?;
        let digest = Sha256::digest(bytes);
        self.written
            .insert(name.to_owned(), (bytes.len() as u64, format!("{digest:x}")));
        Ok(path)
    }
}

fn dump_char(grid: &CharGrid) -> Vec<u8> {
    encode_grid(
        grid.k.len() as u64,
        grid.r.len() as u64,
        grid.k.step(),
        grid.r.step(),
        grid.values.as_slice().expect("contiguous"),
    )
}

fn dump_position(grid: &PositionGrid) -> Vec<u8> {
    encode_grid(
        grid.center.len() as u64,
        grid.offset.len() as u64,
        grid.center.step(),
        grid.offset.step(),
        grid.values.as_slice().expect("contiguous"),
    )
}

fn dump_wigner(w: &WignerGrid) -> Vec<u8> {
    let values: Vec<num_complex::Complex64> = w
        .values
        .iter()
        .map(|&v| num_complex::Complex64::new(v, 0.0))
        .collect();
    encode_grid(
        w.x.len() as u64,
        w.p.len() as u64,
        w.x.step(),
        w.p.step(),
        &values,
    )
}

pub fn run(scenario: &Scenario, out_dir: &Path, flags: &RunFlags) -> Result<RunSummary, RunError> {
    let mut sink = OutputSink::new(out_dir)?;
    let mut summary = RunSummary::default();
    let p = &scenario.params;

    let state =
        realize_on(&scenario.state, p, scenario.center, scenario.offset).map_err(|e| match e {
            LibError::Aliasing(_) | LibError::Resolution(_) => numerical("state realization", e),
            other => RunError::Config(format!("state: {other}")),
        })?;
    let k_axis = scenario.center.conjugate();

    let want_spectrum = scenario.wants(OutputKind::Spectrum);
    let want_observables = scenario.wants(OutputKind::Observables);
    let n_max = scenario.config.pipeline.spectrum_cutoff;

    let mut observable_rows: Vec<[f64; 8]> = Vec::new();
    let mut spectrum_rows: Vec<(f64, Vec<f64>)> = Vec::new();

    for (idx, &t) in scenario.times.iter().enumerate() {
        let evolved: CharGrid = propagate(&state, t, p, k_axis, scenario.offset)
            .map_err(|e| numerical("propagation", e))?;
        let rho: PositionGrid =
            to_position(&evolved).map_err(|e| numerical("position transform", e))?;
        let trace = rho.trace();
        if (trace - 1.0).abs() > TRACE_TOLERANCE {
            return Err(RunError::Numerical(format!(
                "trace drift at t = {t}: {trace} (tolerance {TRACE_TOLERANCE})"
            )));
        }

        if scenario.wants(OutputKind::Char) {
            let name = format!("char_{idx:04}.bin");
            summary.files.push(sink.write(&name, &dump_char(&evolved))?);
        }
        if scenario.wants(OutputKind::Density) {
            let name = format!("density_{idx:04}.bin");
            summary.files.push(sink.write(&name, &dump_position(&rho))?);
        }

        let needs_wigner = want_observables || scenario.wants(OutputKind::Wigner);
        let wigner_grid = if needs_wigner {
            Some(wigner(&rho, p.hbar()).map_err(|e| numerical("wigner transform", e))?)
        } else {
            None
        };
        if let (true, Some(w)) = (scenario.wants(OutputKind::Wigner), &wigner_grid) {
            let name = format!("wigner_{idx:04}.bin");
            summary.files.push(sink.write(&name, &dump_wigner(w))?);
        }

        let needs_projection = (want_observables || want_spectrum) && !p.is_free_particle();
        let spectrum = if needs_projection {
            Some(
                project_energy_basis(&rho, p, n_max)
                    .map_err(|e| numerical("spectral projection", e))?,
            )
        } else {
            None
        };
        if want_spectrum {
            let eig = spectrum
                .as_ref()
                .map(|s| s.eigenvalues.clone())
                .unwrap_or_else(|| vec![f64::NAN; n_max + 1]);
            spectrum_rows.push((t, eig));
        }
        if want_observables {
            let w = wigner_grid.as_ref().expect("built above");
            let u = uncertainties_from_wigner(w);
            let s = linear_entropy(&rho);
            let offdiag = spectrum
                .as_ref()
                .map(|s| s.offdiag_ratio)
                .unwrap_or(f64::NAN);
            observable_rows.push([t, trace, 1.0 - s, s, u.dx, u.dp, u.product, offdiag]);
        }
    }

    if want_observables {
        let mut csv = String::from("t,trace,purity,S,dx,dp,dxdp,offdiag_ratio\n");
        for row in &observable_rows {
            let cells: Vec<String> = row.iter().map(|&v| csv_float(v)).collect();
            csv.push_str(&cells.join(","));
            csv.push('\n');
        }
        summary
            .files
            .push(sink.write("observables.csv", csv.as_bytes())?);
    }
    if want_spectrum {
        let mut header = String::from("t");
        for n in 0..=n_max {
            header.push_str(&format!(",lambda_{n}"));
        }
        header.push('\n');
        let mut csv = header;
        for (t, eig) in &spectrum_rows {
            let mut cells = vec![csv_float(*t)];
            cells.extend(eig.iter().map(|&v| csv_float(v)));
            csv.push_str(&cells.join(","));
            csv.push('\n');
        }
        summary
            .files
            .push(sink.write("spectrum.csv", csv.as_bytes())?);
    }

    if flags.check || scenario.wants(OutputKind::OracleCompare) {
        let gap = run_check(scenario, &state, &mut sink, &mut summary)?;
        summary.check_gap = Some(gap);
        if gap > CHECK_TOLERANCE {
            return Err(RunError::Numerical(format!(
                "oracle comparison gap {gap:e} exceeds {CHECK_TOLERANCE:e}"
            )));
        }
    }

    if flags.audit || scenario.wants(OutputKind::Audit) {
        let disc = run_audit(scenario, &state, &mut sink, &mut summary)?;
        summary.audit_discrepancy = Some(disc.0);
        if disc.0 > disc.1 {
            return Err(RunError::Numerical(format!(
                "factorization audit discrepancy {:e} exceeds {:e}",
                disc.0, disc.1
            )));
        }
    }

    let manifest = Manifest {
        tool: "clgrid",
        version: env!("CARGO_PKG_VERSION"),
        parameters: ResolvedParams {
            mass: p.mass(),
            gamma: p.gamma(),
            omega: p.omega(),
            hbar: p.hbar(),
            diffusion: p.diffusion(),
        },
        config: &scenario.config,
        outputs: sink
            .written
            .iter()
            .map(|(file, (bytes, sha256))| ManifestOutput {
                file: file.clone(),
                bytes: *bytes,
                sha256: sha256.clone(),
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| RunError::Io(format!("manifest serialization: {e}")))?;
    let path = sink.dir.join("manifest.json");
    std::fs::write(&path, text.as_bytes()).map_err(io_err(&path))?;
    summary.files.push(path);
    Ok(summary)
}

/// Evolve the same scenario with the finite-difference integrator and report
/// the largest pointwise gap against the closed form over all times.
fn run_check(
    scenario: &Scenario,
    state: &clgrid::RealizedState,
    sink: &mut OutputSink,
    summary: &mut RunSummary,
) -> Result<f64, RunError> {
    let p = &scenario.params;
    let o = &scenario.config.oracle;
    let k_axis = Axis::symmetric(
        o.k_points.unwrap_or(scenario.center.len()),
        o.k_halfwidth.unwrap_or(14.0),
    )
    .map_err(|e| RunError::Config(format!("oracle grid: {e}")))?;
    let r_axis = Axis::symmetric(
        o.r_points.unwrap_or(scenario.offset.len()),
        o.r_halfwidth.unwrap_or(scenario.offset.halfwidth()),
    )
    .map_err(|e| RunError::Config(format!("oracle grid: {e}")))?;
    let cfg = OracleConfig {
        stencil: if o.stencil_order == 2 {
            StencilOrder::Second
        } else {
            StencilOrder::Fourth
        },
        dt: match o.dt {
            Some(dt) => DtPolicy::Fixed(dt),
            None => DtPolicy::Auto { safety: o.safety },
        },
    };
    let mut grid = state.char_grid(k_axis, r_axis);
    let mut t = 0.0;
    let mut worst: f64 = 0.0;
    let mut csv = String::from("t,linf_gap\n");
    for &target in &scenario.times {
        grid = oracle::evolve(&grid, target - t, &cfg, p)
            .map_err(|e| numerical("oracle evolution", e))?;
        t = target;
        let exact =
            propagate(state, t, p, k_axis, r_axis).map_err(|e| numerical("propagation", e))?;
        let gap = grid.linf_distance(&exact);
        worst = worst.max(gap);
        csv.push_str(&format!("{},{}\n", csv_float(t), csv_float(gap)));
    }
    summary
        .files
        .push(sink.write("oracle_compare.csv", csv.as_bytes())?);
    Ok(worst)
}

/// Audit the propagator's initial-state factorization: the configured state
/// against a built-in reference Gaussian.
fn run_audit(
    scenario: &Scenario,
    state: &clgrid::RealizedState,
    sink: &mut OutputSink,
    summary: &mut RunSummary,
) -> Result<(f64, f64), RunError> {
    let p = &scenario.params;
    let sigma = if p.is_free_particle() {
        (0.5f64).sqrt()
    } else {
        (p.hbar() / (2.0 * p.mass() * p.omega())).sqrt()
    };
    let reference = realize(
        &StateSpec::Gaussian {
            x0: 0.0,
            p0: 0.0,
            sigma,
        },
        p,
    )
    .map_err(|e| numerical("reference state", e))?;
    let a = &scenario.config.audit;
    let t_max = a
        .t_max
        .max(scenario.times.last().copied().unwrap_or(0.0))
        .max(1e-3);
    let report = factorization_audit(
        state,
        &reference,
        p,
        &AuditConfig {
            samples: a.samples,
            seed: a.seed,
            k_half: a.k_half,
            r_half: a.r_half,
            t_max,
            min_amplitude: 1e-6,
        },
    )
    .map_err(|e| numerical("factorization audit", e))?;
    let threshold = match state.provenance() {
        clgrid::Provenance::Analytic => AUDIT_ANALYTIC,
        clgrid::Provenance::Gridded => AUDIT_GRIDDED,
    };
    let csv = format!(
        "max_discrepancy,samples_used,samples_rejected,threshold\n{},{},{},{}\n",
        csv_float(report.max_discrepancy),
        report.samples_used,
        report.samples_rejected,
        csv_float(threshold),
    );
    summary.files.push(sink.write("audit.csv", csv.as_bytes())?);
    Ok((report.max_discrepancy, threshold))
}
