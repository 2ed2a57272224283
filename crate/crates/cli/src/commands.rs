use std::path::PathBuf;

use clap::{Args, ValueEnum};
use isac_core::allocator::{self, CaseId, Constraint, QosTargets};
use isac_core::detectors::{self, DetectorKind, SensingParams, DEFAULT_GRID_POINTS};
use isac_core::montecarlo::{self, ChannelPhase, CommWaveform, McSetup, UnknownHMode};
use isac_core::parallel::Execution;
use isac_core::rate::CommMode;
use isac_core::scenario::{build_link_budget, dbm_to_watts, watts_to_dbm, PowerSplit, ScenarioConfig};
use serde::Serialize;

use crate::output::{emit, fmt_opt, fmt_sig, RunManifest, Table};
use crate::{Cli, CliError, Command, Common, Outcome, Preset};

fn parse_detector(s: &str) -> Result<DetectorKind, String> {
    DetectorKind::from_name(s).ok_or_else(|| {
        let names: Vec<_> = DetectorKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown detector '{s}', expected one of {}", names.join(", "))
    })
}

fn parse_case(s: &str) -> Result<CaseId, String> {
    s.parse().map_err(|e: isac_core::IsacError| e.to_string())
}

/// Power at which `λ` is evaluated for the default threshold grids, whatever
/// power the curves themselves use.
pub const GRID_REFERENCE_DBM: f64 = 10.0;

/// Threshold grid: the per-detector default, or explicit `lo:hi:n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    Default,
    Explicit { lo: f64, hi: f64, n: usize },
}

fn parse_range(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(format!("expected lo:hi:n, got '{s}'"));
    };
    let lo: f64 = lo.parse().map_err(|_| format!("bad lower bound '{lo}'"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad upper bound '{hi}'"))?;
    let n: usize = n.parse().map_err(|_| format!("bad point count '{n}'"))?;
    if n < 1 || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(format!("need finite lo <= hi and n >= 1, got '{s}'"));
    }
    Ok((lo, hi, n))
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    if s == "default" {
        return Ok(GridSpec::Default);
    }
    let (lo, hi, n) = parse_range(s)?;
    Ok(GridSpec::Explicit { lo, hi, n })
}

impl GridSpec {
    fn kappas(&self, kind: DetectorKind, lambda: f64) -> Vec<f64> {
        match *self {
            GridSpec::Default => detectors::default_kappa_grid(kind, lambda, DEFAULT_GRID_POINTS),
            GridSpec::Explicit { lo, hi, n } => detectors::linspace(lo, hi, n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnknownHArg {
    Bound,
    EstimatedXi,
    TrueXi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommWaveformArg {
    Orthogonal,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhaseArg {
    Zero,
    Uniform,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[arg(long, value_parser = parse_detector)]
    pub detector: DetectorKind,
    /// Comma-separated total powers.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true, allow_negative_numbers = true)]
    pub power_dbm: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub rho_c: f64,
    /// `default` (λ-scaled per detector) or `lo:hi:n` in κ units.
    #[arg(long, default_value = "default", value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: GridSpec,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_parser = parse_detector)]
    pub detector: DetectorKind,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, env = "ISAC_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Total power; defaults to the scenario's.
    #[arg(long, allow_negative_numbers = true)]
    pub power_dbm: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub rho_c: f64,
    #[arg(long, default_value = "default", value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: GridSpec,
    #[arg(long, value_enum, default_value_t = UnknownHArg::Bound)]
    pub unknown_h: UnknownHArg,
    #[arg(long, value_enum, default_value_t = CommWaveformArg::Orthogonal)]
    pub comm_waveform: CommWaveformArg,
    #[arg(long, value_enum, default_value_t = PhaseArg::Zero)]
    pub phase: PhaseArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    #[arg(long, value_parser = parse_case)]
    pub case: CaseId,
    #[arg(long, allow_negative_numbers = true)]
    pub power_dbm: f64,
    /// `lo:hi:n` sweep of `ρ_c`.
    #[arg(long, default_value = "0:1:101", allow_hyphen_values = true)]
    pub rho_grid: String,
    #[arg(long, default_value_t = 0.01)]
    pub pfa: f64,
    /// Append the time-shared radar/communication baseline columns.
    #[arg(long)]
    pub rc_baseline: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AllocateArgs {
    /// `all` or one of I..VIII.
    #[arg(long, default_value = "all")]
    pub case: String,
    #[arg(long, default_value_t = 7.0)]
    pub r_min: f64,
    #[arg(long, default_value_t = 0.6)]
    pub pd_min: f64,
    #[arg(long, default_value_t = 0.01)]
    pub pfa: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn resolve_config(c: &Common) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match (&c.config, c.preset) {
        (Some(path), _) => ScenarioConfig::load(path)?,
        (None, Some(Preset::Calibrated)) => ScenarioConfig::calibrated(),
        (None, _) => ScenarioConfig::default(),
    };
    if let Some(t) = c.t_symbols {
        cfg.t_symbols = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exec(c: &Common) -> Execution {
    if c.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = resolve_config(&cli.common)?;
    match &cli.cmd {
        Command::Roc(a) => cmd_roc(&cfg, a, exec(&cli.common)),
        Command::Validate(a) => cmd_validate(&cfg, a, exec(&cli.common)),
        Command::Tradeoff(a) => cmd_tradeoff(&cfg, a),
        Command::Allocate(a) => cmd_allocate(&cfg, a, exec(&cli.common)),
        Command::Config(a) => {
            let text = cfg.to_toml_string()?;
            match &a.out {
                Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
                None => print!("{text}"),
            }
            Ok(Outcome::Ok)
        }
    }
}

fn cmd_roc(cfg: &ScenarioConfig, a: &RocArgs, exec: Execution) -> Result<Outcome, CliError> {
    if a.power_dbm.is_empty() {
        return Err(CliError::Usage("--power-dbm needs at least one value".into()));
    }
    let base = build_link_budget(cfg)?;
    let t = cfg.t_symbols;
    let grid_lambda = base.with_power_w(dbm_to_watts(GRID_REFERENCE_DBM)).sensing_snr_total(t);
    let grid = a.grid.kappas(a.detector, grid_lambda);
    let mut table = Table::new(&["power_dbm", "snr_total", "kappa", "pfa_theory", "pd_theory"]);
    for &pdbm in &a.power_dbm {
        let snr = base.with_power_w(dbm_to_watts(pdbm)).sensing_snr_total(t);
        let params = SensingParams::new(snr, t, a.rho_c, 0.0)?;
        for op in detectors::roc_curve_with(a.detector, &params, &grid, exec)? {
            table.push(vec![fmt_sig(pdbm), fmt_sig(snr), fmt_sig(op.kappa), fmt_sig(op.pfa), fmt_sig(op.pd)]);
        }
    }
    emit(&table.to_csv(), &RunManifest::new("roc", cfg, None), a.out.as_deref())?;
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    manifest: RunManifest,
    /// `λ` of the default threshold grid.
    lambda: f64,
    rho_c: f64,
    report: &'a montecarlo::ValidationReport,
}

fn cmd_validate(cfg: &ScenarioConfig, a: &ValidateArgs, exec: Execution) -> Result<Outcome, CliError> {
    let pdbm = a.power_dbm.unwrap_or(cfg.p_total_dbm);
    let link = build_link_budget(cfg)?.with_power_w(dbm_to_watts(pdbm));
    let t = cfg.t_symbols;
    let mut setup = McSetup::new(t, link, PowerSplit::new(a.rho_c)?);
    setup.exec = exec;
    setup.unknown_h = match a.unknown_h {
        UnknownHArg::Bound => UnknownHMode::Bound,
        UnknownHArg::EstimatedXi => UnknownHMode::EstimatedXi,
        UnknownHArg::TrueXi => UnknownHMode::TrueXi,
    };
    setup.model = setup.model.with_comm(match a.comm_waveform {
        CommWaveformArg::Orthogonal => CommWaveform::OrthogonalConstantEnergy,
        CommWaveformArg::Gaussian => CommWaveform::Gaussian,
    });
    setup.phase = match a.phase {
        PhaseArg::Zero => ChannelPhase::Zero,
        PhaseArg::Uniform => ChannelPhase::Uniform,
    };
    let lambda = build_link_budget(cfg)?.with_power_w(dbm_to_watts(GRID_REFERENCE_DBM)).sensing_snr_total(t);
    let grid = a.grid.kappas(a.detector, lambda);
    let report = montecarlo::validate(a.detector, &setup, &grid, a.trials, a.seed)?;
    eprintln!(
        "{}: {} trials, max |z| = {:.3}, max dev pfa = {:.3e}, pd = {:.3e}, flagged {}/{}",
        a.detector,
        a.trials,
        report.max_abs_z,
        report.max_abs_dev_pfa,
        report.max_abs_dev_pd,
        report.n_flagged,
        report.points.len()
    );
    let out = ValidateOutput {
        manifest: RunManifest::new("validate", cfg, Some(a.seed)),
        lambda,
        rho_c: a.rho_c,
        report: &report,
    };
    let body = serde_json::to_string_pretty(&out).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    match &a.out {
        Some(p) => std::fs::write(p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => print!("{body}"),
    }
    Ok(if report.passed() { Outcome::Ok } else { Outcome::Failed })
}

fn cmd_tradeoff(cfg: &ScenarioConfig, a: &TradeoffArgs) -> Result<Outcome, CliError> {
    let (lo, hi, n) = parse_range(&a.rho_grid).map_err(CliError::Usage)?;
    if lo < 0.0 || hi > 1.0 {
        return Err(CliError::Usage(format!("rho grid must lie in [0, 1], got {}", a.rho_grid)));
    }
    let grid = detectors::linspace(lo, hi, n);
    let p_w = dbm_to_watts(a.power_dbm);
    let link = build_link_budget(cfg)?.with_power_w(p_w);
    let t = cfg.t_symbols;
    let pts = allocator::tradeoff_curve(a.case, &link, t, p_w, a.pfa, &grid)?;
    let rc = if a.rc_baseline {
        Some(allocator::rc_baseline_curve(&link, t, p_w, a.pfa, &grid)?)
    } else {
        None
    };
    let mut header = vec!["rho_c", "rate", "pd", "skipped"];
    if rc.is_some() {
        header.extend(["rc_rate", "rc_pd"]);
    }
    let mut table = Table::new(&header);
    for (i, p) in pts.iter().enumerate() {
        let mut row = vec![fmt_sig(p.rho_c), fmt_sig(p.rate), fmt_opt(p.pd), p.pd.is_none().to_string()];
        if let Some(rc) = &rc {
            row.push(fmt_sig(rc[i].rate));
            row.push(fmt_opt(rc[i].pd));
        }
        table.push(row);
    }
    emit(&table.to_csv(), &RunManifest::new("tradeoff", cfg, None), a.out.as_deref())?;
    Ok(Outcome::Ok)
}

/// Benchmark values for T = 20, 7 b/s/Hz, PD 0.6 at PFA 0.01.
pub fn reference_p_min_dbm(case: CaseId) -> Option<f64> {
    match case {
        CaseId::I | CaseId::V => Some(13.6),
        CaseId::II | CaseId::VI => Some(14.8),
        CaseId::IV => Some(18.2),
        CaseId::VII => Some(18.5),
        CaseId::III | CaseId::VIII => None,
    }
}

pub fn reference_rho_c(case: CaseId) -> Option<f64> {
    match case {
        CaseId::III => Some(0.55),
        CaseId::IV => Some(0.34),
        CaseId::VII => Some(0.99),
        CaseId::VIII => Some(0.995),
        _ => None,
    }
}

/// Reference for the energy-detector (estimated `s_c`) variant of the assisted cases.
pub const REFERENCE_ENERGY_P_MIN_DBM: f64 = 19.4;

fn binding_str(b: &[Constraint]) -> String {
    let names: Vec<&str> = b
        .iter()
        .map(|c| match c {
            Constraint::Rate => "rate",
            Constraint::Pd => "pd",
        })
        .collect();
    if names.is_empty() {
        "none".into()
    } else {
        names.join("+")
    }
}

fn comm_name(m: CommMode) -> &'static str {
    match m {
        CommMode::Free => "sensing-free",
        CommMode::Interfered => "sensing-interfered",
    }
}

fn cmd_allocate(cfg: &ScenarioConfig, a: &AllocateArgs, exec: Execution) -> Result<Outcome, CliError> {
    let targets = QosTargets::new(a.r_min, a.pd_min, a.pfa)?;
    let cases: Vec<CaseId> = if a.case.eq_ignore_ascii_case("all") {
        CaseId::ALL.to_vec()
    } else {
        vec![parse_case(&a.case).map_err(CliError::Usage)?]
    };
    let link = build_link_budget(cfg)?;
    let t = cfg.t_symbols;
    let results = isac_core::parallel::try_map_indexed(exec, cases.len(), |i| {
        allocator::solve_case(cases[i], &targets, &link, t)
    })?;
    // energy-detector variant, shared by the four assisted cases
    let energy = allocator::solve(CommMode::Free, DetectorKind::EnergyEstimatedSc, &targets, &link, t)?;

    let mut table = Table::new(&[
        "case",
        "comm_mode",
        "sensing",
        "p_min_dbm",
        "p_min_w",
        "rho_c",
        "kappa",
        "feasible",
        "binding",
        "ref_p_min_dbm",
        "ref_rho_c",
        "energy_p_min_dbm",
        "ref_energy_p_min_dbm",
    ]);
    let mut all_feasible = energy.feasible;
    for (c, r) in cases.iter().zip(&results) {
        all_feasible &= r.feasible;
        let assisted = !c.sensing_kind().is_interfered();
        table.push(vec![
            c.name().to_string(),
            comm_name(c.comm_mode()).to_string(),
            c.sensing_kind().name().to_string(),
            fmt_sig(watts_to_dbm(r.p_min_w)),
            fmt_sig(r.p_min_w),
            fmt_sig(r.rho_c),
            fmt_sig(r.kappa),
            r.feasible.to_string(),
            binding_str(&r.binding),
            fmt_opt(reference_p_min_dbm(*c)),
            fmt_opt(reference_rho_c(*c)),
            fmt_opt(assisted.then(|| watts_to_dbm(energy.p_min_w))),
            fmt_opt(assisted.then_some(REFERENCE_ENERGY_P_MIN_DBM)),
        ]);
    }
    emit(&table.to_csv(), &RunManifest::new("allocate", cfg, None), a.out.as_deref())?;
    Ok(if all_feasible { Outcome::Ok } else { Outcome::Failed })
}
