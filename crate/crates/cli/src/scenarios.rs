//! The named scenarios and their CSV schemas.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use biharmonic_core::analysis::{
    default_delta0, flux_identity_check, strichartz_sweep, symbol_check, EnergySymbol,
};
use biharmonic_core::bitree::{cardinality, enumerate_ordered};
use biharmonic_core::dynamics::{evolve, gauge_transform, interaction_rep, mass_drift, mean_mass};
use biharmonic_core::initial::random_state;
use biharmonic_core::normal_form::{diff_energy_check, diff_energy_terms, form_error, identity_residuals};
use biharmonic_core::phase::check_factorization;
use biharmonic_core::spectral::{hs_norm, l2_norm};
use biharmonic_core::{EquationKind, FourierState, InitialData, Trajectory64, Variant};
use num_complex::Complex;
use serde_json::{json, Value};

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Conservation,
    GaugeEquivalence,
    PhaseAudit,
    TreeCensus,
    NfIdentity,
    NfErrorDecay,
    FluxIdentity,
    SymbolAudit,
    StrichartzSweep,
    DiffEnergy,
    Evolve,
}

impl Scenario {
    pub const ALL: [Scenario; 11] = [
        Self::Conservation,
        Self::GaugeEquivalence,
        Self::PhaseAudit,
        Self::TreeCensus,
        Self::NfIdentity,
        Self::NfErrorDecay,
        Self::FluxIdentity,
        Self::SymbolAudit,
        Self::StrichartzSweep,
        Self::DiffEnergy,
        Self::Evolve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Conservation => "conservation",
            Self::GaugeEquivalence => "gauge-equivalence",
            Self::PhaseAudit => "phase-audit",
            Self::TreeCensus => "tree-census",
            Self::NfIdentity => "nf-identity",
            Self::NfErrorDecay => "nf-error-decay",
            Self::FluxIdentity => "flux-identity",
            Self::SymbolAudit => "symbol-audit",
            Self::StrichartzSweep => "strichartz-sweep",
            Self::DiffEnergy => "diff-energy",
            Self::Evolve => "evolve",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::Conservation => "mass drift along one evolution",
            Self::GaugeEquivalence => "gauge-mapped original flow against the chosen variant",
            Self::PhaseAudit => "exhaustive phase factorization check on a box",
            Self::TreeCensus => "ordered bi-tree counts against 2^(J-1) J!",
            Self::NfIdentity => "finite-depth normal-form identity residual per mode",
            Self::NfErrorDecay => "l1 size of the remainder form for several depths",
            Self::FluxIdentity => "modified energy change against the integrated flux",
            Self::SymbolAudit => "derivative, comparability and constancy constants of the energy symbol",
            Self::StrichartzSweep => "sup of the space-time L^p ratio over seeded data",
            Self::DiffEnergy => "difference energy of two nearby solutions",
            Self::Evolve => "plain evolution; writes the trajectory as JSON",
        }
    }

    /// Header row of the scenario's CSV file.
    pub fn csv_header(self) -> &'static [&'static str] {
        match self {
            Self::Conservation => &["t", "mass", "relative_drift"],
            Self::GaugeEquivalence => &["t", "l2_gap"],
            Self::PhaseAudit => &["range", "tuples_checked", "violations"],
            Self::TreeCensus => &["J", "enumerated", "formula"],
            Self::NfIdentity => &["n", "lhs", "rhs", "residual"],
            Self::NfErrorDecay => &["J", "l1_error"],
            Self::FluxIdentity => &["t", "E0", "E1", "flux", "residual", "max_imag"],
            Self::SymbolAudit => &[
                "M",
                "k0",
                "delta0",
                "gamma1",
                "gamma2",
                "comparability",
                "constancy_defect",
                "symmetry_defect",
                "min_value",
            ],
            Self::StrichartzSweep => &["N", "p", "T_w", "samples", "sup", "mean", "argmax_seed"],
            Self::DiffEnergy => &["t", "I_uu", "I_uv", "I_vu", "I_vv", "II", "rate"],
            Self::Evolve => &["t", "mass", "l2_norm"],
        }
    }

    fn needs_simpson(self) -> bool {
        matches!(self, Self::NfIdentity | Self::FluxIdentity | Self::DiffEnergy)
    }

    fn evolves(self) -> bool {
        matches!(
            self,
            Self::Conservation
                | Self::GaugeEquivalence
                | Self::NfIdentity
                | Self::NfErrorDecay
                | Self::FluxIdentity
                | Self::DiffEnergy
                | Self::Evolve
        )
    }

    fn normal_form(self) -> bool {
        matches!(self, Self::NfIdentity | Self::NfErrorDecay)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown scenario {s:?}"))
    }
}

/// Scenario names in their fixed order.
pub fn list_scenarios() -> Vec<&'static str> {
    Scenario::ALL.iter().map(|s| s.name()).collect()
}

/// What `validate` found.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub scenario: Option<Scenario>,
    pub errors: Vec<String>,
    /// `(2N+1)^{2J} c_J` for normal-form scenarios.
    pub cost_estimate: Option<f64>,
    pub budget: f64,
}

impl Diagnostics {
    pub fn over_budget(&self) -> bool {
        self.cost_estimate.is_some_and(|c| c > self.budget)
    }

    pub fn into_result(self) -> Result<Scenario, CliError> {
        if !self.errors.is_empty() {
            return Err(CliError::Config(self.errors));
        }
        if self.over_budget() {
            return Err(CliError::Budget { cost: self.cost_estimate.unwrap_or(f64::NAN), budget: self.budget });
        }
        Ok(self.scenario.expect("no errors means the scenario parsed"))
    }
}

/// Checks every parameter the scenario reads and estimates normal-form cost.
pub fn validate(cfg: &ScenarioConfig) -> Diagnostics {
    let mut errors = Vec::new();
    let mut cost_estimate = None;
    let budget = cfg.normal_form.budget;
    let scenario = match cfg.scenario() {
        Ok(s) => Some(s),
        Err(CliError::Config(e)) => {
            errors.extend(e);
            None
        }
        Err(e) => {
            errors.push(e.to_string());
            None
        }
    };
    let Some(sc) = scenario else {
        return Diagnostics { scenario, errors, cost_estimate, budget };
    };
    let mut check = |r: Result<(), String>| {
        if let Err(e) = r {
            errors.push(e);
        }
    };

    if sc.evolves() {
        let kind = cfg.equation();
        check(kind.map(|_| ()));
        check(cfg.integrator().map(|_| ()));
        if !(cfg.t_final > 0.0 && cfg.t_final.is_finite()) {
            check(Err(format!("t_final must be positive, got {}", cfg.t_final)));
        }
        let cutoff = if sc.normal_form() { cfg.normal_form.box_n } else { cfg.spectral.cutoff };
        check(cfg.spectral().map(|_| ()));
        match cfg.initial_data() {
            Ok(d) => {
                if d.needs_seed() && cfg.seed.is_none() {
                    check(Err(format!("seed is required for random initial data {d}")));
                }
                check(d.build::<f64>(cutoff, cfg.seed()).map(|_| ()).map_err(|e| format!("initial.data: {e}")));
            }
            Err(e) => check(Err(e)),
        }
        let wick_only = matches!(sc, Scenario::NfIdentity | Scenario::NfErrorDecay | Scenario::FluxIdentity | Scenario::DiffEnergy);
        if let Ok(k) = cfg.equation() {
            if wick_only && k.variant != Variant::Wick {
                check(Err(format!("scenario {sc} needs equation.variant = \"wick\"")));
            }
            if sc.normal_form() && k.sign != 1 {
                check(Err(format!("scenario {sc} is defocusing only (equation.sign = 1)")));
            }
        }
        if sc.needs_simpson() {
            if let Ok(ic) = cfg.integrator() {
                let steps = (cfg.t_final / ic.dt).ceil().max(1.0) as usize;
                if steps % ic.store_every != 0 || (steps / ic.store_every) % 2 != 0 {
                    check(Err(format!(
                        "Simpson quadrature needs t_final / (dt * store_every) to be an even integer; got {steps} steps stored every {}",
                        ic.store_every
                    )));
                }
            }
        }
    }

    match sc {
        Scenario::NfIdentity | Scenario::NfErrorDecay => match cfg.nf() {
            Ok(nf) => {
                let depths = cfg.decay_depths();
                if sc == Scenario::NfErrorDecay && depths.iter().any(|&d| d == 0) {
                    check(Err("normal_form.depths entries must be at least 1".into()));
                }
                let deepest = if sc == Scenario::NfErrorDecay { depths.into_iter().max().unwrap_or(1) } else { nf.depth };
                cost_estimate = Some(biharmonic_core::NFConfig { depth: deepest.max(1), ..nf }.cost_estimate());
            }
            Err(e) => check(Err(e)),
        },
        Scenario::FluxIdentity => {
            check(EnergySymbol::from_params(&cfg.symbol.params()).map(|_| ()).map_err(|e| format!("symbol: {e}")));
        }
        Scenario::SymbolAudit => {
            let s = cfg.symbol.s;
            let d0 = cfg.symbol.delta0.unwrap_or_else(|| default_delta0(s));
            for &m in &cfg.symbol.audit_ms {
                for &k0 in &cfg.symbol.audit_k0 {
                    if let Err(e) = EnergySymbol::new(s, d0, k0, m) {
                        check(Err(format!("symbol (M = {m}, k0 = {k0}): {e}")));
                    }
                }
            }
            if cfg.symbol.audit_points < 10 {
                check(Err("symbol.audit_points must be at least 10".into()));
            }
        }
        Scenario::PhaseAudit => {
            if !(0..=64).contains(&cfg.phase.range) {
                check(Err(format!("phase.range must lie in 0..=64, got {}", cfg.phase.range)));
            }
        }
        Scenario::TreeCensus => {
            if !(1..=6).contains(&cfg.census.max_j) {
                check(Err(format!("census.max_J must lie in 1..=6, got {}", cfg.census.max_j)));
            }
        }
        Scenario::StrichartzSweep => {
            let st = &cfg.strichartz;
            if st.cutoffs.is_empty() {
                check(Err("strichartz.cutoffs is empty".into()));
            }
            if st.p < 2 || st.p % 2 != 0 {
                check(Err(format!("strichartz.p must be an even integer >= 2, got {}", st.p)));
            }
            if !(st.t_w > 0.0 && st.t_w.is_finite()) {
                check(Err("strichartz.T_w must be positive".into()));
            }
            if st.samples == 0 {
                check(Err("strichartz.samples must be positive".into()));
            }
        }
        Scenario::DiffEnergy => {
            if !(cfg.difference.perturbation > 0.0 && cfg.difference.perturbation.is_finite()) {
                check(Err("difference.perturbation must be positive".into()));
            }
            if !cfg.difference.s.is_finite() {
                check(Err("difference.s must be finite".into()));
            }
        }
        _ => {}
    }
    if let Some(limit) = cfg.output.max_seconds {
        if !(limit > 0.0) {
            errors.push("output.max_seconds must be positive".into());
        }
    }
    Diagnostics { scenario, errors, cost_estimate, budget }
}

/// Result of one scenario.
#[derive(Debug, Clone)]
pub struct Report {
    pub scenario: Scenario,
    pub table: Table,
    pub summary: Value,
    /// Set when the wall-clock limit cut a loop short.
    pub partial: bool,
    /// Extra JSON files, by name.
    pub attachments: Vec<(String, Value)>,
}

struct Deadline(Option<Instant>);

impl Deadline {
    fn new(limit: Option<f64>) -> Self {
        Self(limit.map(|s| Instant::now() + std::time::Duration::from_secs_f64(s)))
    }

    fn expired(&self) -> bool {
        self.0.is_some_and(|d| Instant::now() >= d)
    }
}

fn row<const K: usize>(cells: [Cell; K]) -> Vec<Cell> {
    cells.into_iter().collect()
}

fn run_evolution(cfg: &ScenarioConfig, kind: EquationKind, u0: &FourierState<f64>) -> Result<Trajectory64, CliError> {
    let ic = cfg.integrator().map_err(|e| CliError::Config(vec![e]))?;
    Ok(evolve(u0, kind, cfg.t_final, ic)?)
}

fn initial_state(cfg: &ScenarioConfig, cutoff: usize) -> Result<(InitialData, FourierState<f64>), CliError> {
    let data = cfg.initial_data().map_err(|e| CliError::Config(vec![e]))?;
    let u0 = data.build(cutoff, cfg.seed())?;
    Ok((data, u0))
}

fn config_err(e: String) -> CliError {
    CliError::Config(vec![e])
}

/// Validates, then runs the scenario.
pub fn run(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let sc = validate(cfg).into_result()?;
    let deadline = Deadline::new(cfg.output.max_seconds);
    let mut table = Table::new(sc.csv_header());
    let mut partial = false;
    let mut attachments = Vec::new();
    let summary = match sc {
        Scenario::Conservation | Scenario::Evolve => {
            let kind = cfg.equation().map_err(config_err)?;
            let (data, u0) = initial_state(cfg, cfg.spectral.cutoff)?;
            let traj = run_evolution(cfg, kind, &u0)?;
            let m0 = mean_mass(traj.first());
            for s in traj.samples() {
                let m = mean_mass(s);
                if sc == Scenario::Conservation {
                    table.push(row([s.time().into(), m.into(), ((m - m0) / m0.max(f64::MIN_POSITIVE)).abs().into()]));
                } else {
                    table.push(row([s.time().into(), m.into(), l2_norm(s).into()]));
                }
            }
            if sc == Scenario::Evolve {
                attachments.push(("trajectory".to_string(), traj.to_json()));
            }
            json!({ "initial_data": data.to_string(), "samples": traj.len(), "max_relative_drift": mass_drift(&traj) })
        }
        Scenario::GaugeEquivalence => {
            let kind = cfg.equation().map_err(config_err)?;
            let (_, u0) = initial_state(cfg, cfg.spectral.cutoff)?;
            let original = EquationKind { variant: Variant::Original, sign: kind.sign };
            let base = run_evolution(cfg, original, &u0)?;
            let target = run_evolution(cfg, kind, &u0)?;
            let mapped = gauge_transform(&base, kind.gamma(), 1)?;
            let mut worst: f64 = 0.0;
            for (a, b) in mapped.samples().iter().zip(target.samples()) {
                let gap = l2_norm(&a.sub(b)?);
                worst = worst.max(gap);
                table.push(row([a.time().into(), gap.into()]));
            }
            json!({ "gamma": kind.gamma(), "max_l2_gap": worst, "final_l2_gap": table.rows.last().map(|r| match r[1] { Cell::F(x) => x, _ => f64::NAN }) })
        }
        Scenario::PhaseAudit => {
            let rep = check_factorization(cfg.phase.range)?;
            table.push(row([cfg.phase.range.into(), rep.tuples_checked.into(), rep.violations.len().into()]));
            let mut j = rep.to_json();
            if let Some(v) = j.get_mut("violations").and_then(Value::as_array_mut) {
                v.truncate(20);
            }
            j
        }
        Scenario::TreeCensus => {
            let mut all_match = true;
            for j in 1..=cfg.census.max_j {
                if deadline.expired() {
                    partial = true;
                    break;
                }
                let got = enumerate_ordered(j)?.len() as u64;
                let formula = cardinality(j as u32);
                all_match &= got == formula;
                table.push(row([j.into(), got.into(), formula.into()]));
            }
            json!({ "all_match": all_match })
        }
        Scenario::NfIdentity => {
            let nf = cfg.nf().map_err(config_err)?;
            let (data, u0) = initial_state(cfg, nf.box_n)?;
            let traj = run_evolution(cfg, EquationKind::wick(), &u0)?;
            let reports = identity_residuals(&traj, &nf)?;
            for r in &reports {
                table.push(row([r.n.into(), r.lhs.into(), r.rhs.into(), r.residual.into()]));
            }
            let worst = reports.iter().map(|r| r.residual).fold(0.0, f64::max);
            json!({
                "initial_data": data.to_string(),
                "dt_sample": reports.first().map(|r| r.dt_sample),
                "max_residual": worst,
                "cost_estimate": nf.cost_estimate(),
            })
        }
        Scenario::NfErrorDecay => {
            let nf = cfg.nf().map_err(config_err)?;
            let (data, u0) = initial_state(cfg, nf.box_n)?;
            let traj = run_evolution(cfg, EquationKind::wick(), &u0)?;
            let w = interaction_rep(&traj);
            let state = w.last();
            let mut values = Vec::new();
            for depth in cfg.decay_depths() {
                if deadline.expired() {
                    partial = true;
                    break;
                }
                let c = biharmonic_core::NFConfig { depth, ..nf };
                let l1 = form_error(state, state.time(), &c)?.l1();
                values.push(l1);
                table.push(row([depth.into(), l1.into()]));
            }
            let nonincreasing = values.windows(2).all(|p| p[1] <= p[0]);
            json!({ "initial_data": data.to_string(), "t": state.time(), "non_increasing": nonincreasing })
        }
        Scenario::FluxIdentity => {
            let kind = cfg.equation().map_err(config_err)?;
            let sym = EnergySymbol::from_params(&cfg.symbol.params())?;
            let (data, u0) = initial_state(cfg, cfg.spectral.cutoff)?;
            let traj = run_evolution(cfg, kind, &u0)?;
            let rep = flux_identity_check(&traj, &sym, cfg.t_final, kind.sign)?;
            table.push(row([
                rep.t.into(),
                rep.e0.into(),
                rep.e1.into(),
                rep.flux.into(),
                rep.residual.into(),
                rep.max_imag.into(),
            ]));
            json!({ "initial_data": data.to_string(), "symbol": sym.params(), "report": rep })
        }
        Scenario::SymbolAudit => {
            let s = cfg.symbol.s;
            let d0 = cfg.symbol.delta0.unwrap_or_else(|| default_delta0(s));
            let (mut g1, mut g2, mut comp, mut constancy) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            'outer: for &m in &cfg.symbol.audit_ms {
                for &k0 in &cfg.symbol.audit_k0 {
                    if deadline.expired() {
                        partial = true;
                        break 'outer;
                    }
                    let sym = EnergySymbol::new(s, d0, k0, m)?;
                    let rep = symbol_check(&sym, 2f64.powi(k0 as i32 + 3), cfg.symbol.audit_points);
                    g1 = g1.max(rep.gamma1);
                    g2 = g2.max(rep.gamma2);
                    comp = comp.max(rep.comparability);
                    constancy = constancy.max(rep.constancy_defect);
                    table.push(row([
                        m.into(),
                        k0.into(),
                        d0.into(),
                        rep.gamma1.into(),
                        rep.gamma2.into(),
                        rep.comparability.into(),
                        rep.constancy_defect.into(),
                        rep.symmetry_defect.into(),
                        rep.min_value.into(),
                    ]));
                }
            }
            json!({ "s": s, "delta0": d0, "max_gamma1": g1, "max_gamma2": g2, "max_comparability": comp, "max_constancy_defect": constancy })
        }
        Scenario::StrichartzSweep => {
            let st = &cfg.strichartz;
            let mut sups = Vec::new();
            for &n in &st.cutoffs {
                if deadline.expired() {
                    partial = true;
                    break;
                }
                let sw = strichartz_sweep(n, st.p, st.t_w, st.samples, cfg.seed())?;
                sups.push(sw.sup);
                table.push(row([
                    n.into(),
                    st.p.into(),
                    st.t_w.into(),
                    st.samples.into(),
                    sw.sup.into(),
                    sw.mean.into(),
                    sw.argmax_seed.into(),
                ]));
            }
            let growth = match (sups.first(), sups.last()) {
                (Some(a), Some(b)) => b / a - 1.0,
                _ => f64::NAN,
            };
            json!({ "relative_growth": growth, "seed0": cfg.seed() })
        }
        Scenario::DiffEnergy => {
            let kind = cfg.equation().map_err(config_err)?;
            let cutoff = cfg.spectral.cutoff;
            let (data, u0) = initial_state(cfg, cutoff)?;
            let w = random_state::<f64>(cutoff, cfg.seed().wrapping_add(1));
            let norm = l2_norm(&w);
            if norm == 0.0 {
                return Err(CliError::Runtime("zero perturbation direction".into()));
            }
            let w = w.scale(Complex::new(cfg.difference.perturbation / norm, 0.0));
            let v0 = FourierState::from_fn(cutoff, |n| u0.get(n) + w.get(n));
            let u = run_evolution(cfg, kind, &u0)?;
            let v = run_evolution(cfg, kind, &v0)?;
            let s = cfg.difference.s;
            for x in diff_energy_terms(&u, &v, s, kind.sign, true)? {
                table.push(row([
                    x.t.into(),
                    x.i_uu.into(),
                    x.i_uv.into(),
                    x.i_vu.into(),
                    x.i_vv.into(),
                    x.ii.into(),
                    x.rate().into(),
                ]));
            }
            let rep = diff_energy_check(&u, &v, s, kind.sign, true)?;
            let d0 = hs_norm(&u0.sub(&v0)?, s, 1.0);
            json!({ "initial_data": data.to_string(), "initial_distance_hs": d0, "report": rep })
        }
    };
    Ok(Report { scenario: sc, table, summary, partial, attachments })
}
