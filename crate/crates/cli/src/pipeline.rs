//! One function per report. Each takes a validated scenario, computes, checks
//! its invariants and hands files to the emitter.

use excite_core::block_encoding::{verify_block_encoding, BlockEncodingCheck};
use excite_core::cost::{compare_routes, direct_route_cost, excitation_route_cost, CostModel, CostReport};
use excite_core::coupling::{check_matrix_element_bounds, reflection_coupling, synthetic_pair, NoiseModel};
use excite_core::evolution::{AmplitudeRecord, ExactDynamics};
use excite_core::perturbation::PerturbationTable;
use excite_core::protocol::{plan_protocol_with, ProtocolPlan, DEFAULT_DOMINANCE};
use excite_core::{CoupledIndex, ElectronicSystem, Exec};
use serde::Serialize;

use crate::error::CliError;
use crate::report::{num, Emitter, Table};
use crate::scenario::{Output, Scenario};

/// Tolerance for norm and completeness checks on exact evolution.
pub const NORM_TOL: f64 = 1e-10;
/// Tolerance for the block-encoding residuals.
pub const BLOCK_TOL: f64 = 1e-10;

struct Context<'a> {
    scenario: &'a Scenario,
    exec: Exec,
    system: Option<ElectronicSystem>,
    plan: Option<ProtocolPlan>,
}

impl<'a> Context<'a> {
    fn new(scenario: &'a Scenario, exec: Exec) -> Self {
        Self { scenario, exec, system: None, plan: None }
    }

    fn system(&mut self) -> Result<&ElectronicSystem, CliError> {
        if self.system.is_none() {
            self.system = Some(self.scenario.build_system()?);
        }
        Ok(self.system.as_ref().expect("just built"))
    }

    fn protocol(&self) -> Result<&crate::scenario::ProtocolConfig, CliError> {
        self.scenario.protocol.as_ref().ok_or_else(|| CliError::Schema("at `protocol`: missing".into()))
    }

    fn times(&self) -> Result<Vec<f64>, CliError> {
        let p = self.scenario.perturbation.as_ref().ok_or_else(|| CliError::Schema("at `perturbation`: missing".into()))?;
        Ok(p.t_grid.points())
    }

    fn plan(&mut self) -> Result<&ProtocolPlan, CliError> {
        if self.plan.is_none() {
            let proto = self.protocol()?.clone();
            let sys = self.system()?;
            let plan = plan_protocol_with(sys, proto.w, proto.lambda, proto.target, proto.dominance.unwrap_or(DEFAULT_DOMINANCE))?;
            self.plan = Some(plan);
        }
        Ok(self.plan.as_ref().expect("just built"))
    }
}

fn prob_columns(prefix: &str, n: usize) -> Vec<String> {
    CoupledIndex::all(n).map(|i| format!("{prefix}_a{}_k{}", i.alpha, i.k)).collect()
}

fn exact_records(ctx: &mut Context) -> Result<Vec<AmplitudeRecord>, CliError> {
    let proto = ctx.protocol()?.clone();
    let ts = ctx.times()?;
    let exec = ctx.exec;
    let dynamics = ExactDynamics::new(ctx.system()?, proto.w, proto.lambda, CoupledIndex::GROUND)?;
    Ok(dynamics.amplitudes_grid(&ts, exec)?)
}

fn perturbative_records(ctx: &mut Context, order: usize) -> Result<(usize, Vec<Vec<AmplitudeRecord>>), CliError> {
    let proto = ctx.protocol()?.clone();
    let ts = ctx.times()?;
    let exec = ctx.exec;
    let table = PerturbationTable::build(ctx.system()?, proto.w, order, CoupledIndex::GROUND)?;
    let per_order = (1..=order)
        .map(|m| exec.map(&ts, |&t| table.truncated_to(m, proto.lambda, t)))
        .collect();
    Ok((order, per_order))
}

fn order(ctx: &Context) -> Result<usize, CliError> {
    Ok(ctx.scenario.perturbation.as_ref().ok_or_else(|| CliError::Schema("at `perturbation`: missing".into()))?.order)
}

fn evolve(ctx: &mut Context, emit: &mut Emitter) -> Result<(), CliError> {
    let ts = ctx.times()?;
    let records = exact_records(ctx)?;
    let n = ctx.system()?.n();
    let mut header = vec!["t".to_string(), "total_probability".to_string()];
    header.extend(prob_columns("p", n));
    let mut table = Table::new(header);
    for (t, rec) in ts.iter().zip(&records) {
        let total = rec.total_probability();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(CliError::Invariant(format!("completeness at t={t}: sum |c|^2 = {total}")));
        }
        let mut row = vec![num(*t), num(total)];
        row.extend(rec.probabilities().into_iter().map(num));
        table.push(row);
    }
    emit.csv("evolve.csv", &table)
}

fn perturb(ctx: &mut Context, emit: &mut Emitter) -> Result<(), CliError> {
    let ts = ctx.times()?;
    let n = ctx.system()?.n();
    let (order, per_order) = perturbative_records(ctx, order(ctx)?)?;
    let mut header = vec!["t".to_string()];
    for m in 1..=order {
        header.push(format!("total_order{m}"));
        header.extend(prob_columns(&format!("p_order{m}"), n));
    }
    let mut table = Table::new(header);
    for (i, t) in ts.iter().enumerate() {
        let mut row = vec![num(*t)];
        for recs in &per_order {
            row.push(num(recs[i].total_probability()));
            row.extend(recs[i].probabilities().into_iter().map(num));
        }
        table.push(row);
    }
    emit.csv("perturb.csv", &table)
}

fn compare(ctx: &mut Context, emit: &mut Emitter) -> Result<(), CliError> {
    let ts = ctx.times()?;
    let n = ctx.system()?.n();
    let exact = exact_records(ctx)?;
    let (order, per_order) = perturbative_records(ctx, order(ctx)?)?;
    let mut header = vec!["t".to_string()];
    header.extend(prob_columns("p_exact", n));
    for m in 1..=order {
        header.extend(prob_columns(&format!("p_order{m}"), n));
    }
    header.extend((1..=order).map(|m| format!("max_amp_err_order{m}")));
    let mut table = Table::new(header);
    for (i, t) in ts.iter().enumerate() {
        let total = exact[i].total_probability();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(CliError::Invariant(format!("completeness at t={t}: sum |c|^2 = {total}")));
        }
        let mut row = vec![num(*t)];
        row.extend(exact[i].probabilities().into_iter().map(num));
        for recs in &per_order {
            row.extend(recs[i].probabilities().into_iter().map(num));
        }
        row.extend(per_order.iter().map(|recs| num(recs[i].max_abs_diff(&exact[i]))));
        table.push(row);
    }
    emit.csv("probabilities.csv", &table)
}

fn plan(ctx: &mut Context, emit: &mut Emitter) -> Result<(), CliError> {
    let plan = ctx.plan()?.clone();
    if let Some(m) = plan.m_denominator {
        if m < 1.0 {
            return Err(CliError::Invariant(format!("m_denominator = {m} < 1")));
        }
    }
    if let Some(p) = plan.p_success {
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::Invariant(format!("p_success = {p} outside [0, 1]")));
        }
    }
    emit.json("plan.json", "plan", &plan)
}

#[derive(Serialize)]
struct BlockEncodingReport {
    n: usize,
    target: usize,
    seed: u64,
    noise: f64,
    noise_model: NoiseModel,
    c_norm: f64,
    /// Weight implied by the stated `+4λ` growth of the one-norm.
    c_norm_stated: f64,
    max_residual: f64,
    unitarity_residual: f64,
    hermiticity_residual: f64,
    bounds_literal_hold: bool,
    bounds_rigorous_hold: bool,
    bound_classes: Vec<excite_core::coupling::ClassSummary>,
}

fn block_encode_check(ctx: &mut Context, emit: &mut Emitter) -> Result<(), CliError> {
    let cfg = ctx.scenario.block_encoding.clone().ok_or_else(|| CliError::Schema("at `block_encoding`: missing".into()))?;
    let (psi0, psik) = synthetic_pair(cfg.n, cfg.target, cfg.noise, cfg.noise, cfg.seed, cfg.noise_model)?;
    let mu = reflection_coupling(&psi0, &psik)?;
    let check = BlockEncodingCheck::from_states(psi0.vector(), psik.vector())?;
    let verdict = verify_block_encoding(&check, &mu)?;
    let bounds = check_matrix_element_bounds(&mu, &psi0, &psik)?;
    let report = BlockEncodingReport {
        n: cfg.n,
        target: cfg.target,
        seed: cfg.seed,
        noise: cfg.noise,
        noise_model: cfg.noise_model,
        c_norm: verdict.c_norm,
        c_norm_stated: 4.0,
        max_residual: verdict.max_residual,
        unitarity_residual: verdict.unitarity_residual,
        hermiticity_residual: verdict.hermiticity_residual,
        bounds_literal_hold: bounds.literal_holds(),
        bounds_rigorous_hold: bounds.rigorous_holds(),
        bound_classes: bounds.classes.clone(),
    };
    emit.json("block_encoding.json", "block_encoding", &report)?;
    for (name, value) in [
        ("select unitarity residual", verdict.unitarity_residual),
        ("encoded block hermiticity residual", verdict.hermiticity_residual),
        ("encoded block proportionality residual", verdict.max_residual),
    ] {
        if !(value < BLOCK_TOL) {
            return Err(CliError::Invariant(format!("{name} = {value:e} >= {BLOCK_TOL:e}")));
        }
    }
    if !bounds.rigorous_holds() {
        return Err(CliError::Invariant("two-term matrix-element bound violated".into()));
    }
    if cfg.noise_model == NoiseModel::Complement && !bounds.literal_holds() {
        return Err(CliError::Invariant("matrix-element bound violated for complement noise".into()));
    }
    Ok(())
}

fn cost_model(ctx: &mut Context) -> Result<CostModel, CliError> {
    let cfg = ctx.scenario.cost.clone().ok_or_else(|| CliError::Schema("at `cost`: missing".into()))?;
    let m = match cfg.m_denominator {
        Some(m) => m,
        None => ctx
            .plan()?
            .m_denominator
            .ok_or_else(|| CliError::Runtime("protocol is resonant; supply cost.m_denominator".into()))?,
    };
    let model = cfg.into_model(m);
    model.validate()?;
    Ok(model)
}

#[derive(Serialize)]
struct CostFile<'a> {
    model: &'a CostModel,
    lambda_exceeds_detuning: bool,
    excitation: &'a CostReport,
    direct: &'a CostReport,
}

fn cost_rows(table: &mut Table, report: &CostReport) {
    let route = &report.route;
    for (term, value) in [
        ("repetitions", report.repetitions),
        ("ground_prep", report.ground_prep),
        ("evolution", report.evolution),
        ("projection", report.projection),
        ("total", report.total),
    ] {
        table.push(vec![route.clone(), term.to_string(), num(value)]);
    }
    for (term, value) in &report.breakdown {
        table.push(vec![route.clone(), term.clone(), num(*value)]);
    }
}

fn cost(ctx: &mut Context, emit: &mut Emitter) -> Result<(), CliError> {
    let model = cost_model(ctx)?;
    let excitation = excitation_route_cost(&model)?;
    let direct = direct_route_cost(&model)?;
    let file = CostFile {
        model: &model,
        lambda_exceeds_detuning: model.lambda_exceeds_detuning(),
        excitation: &excitation,
        direct: &direct,
    };
    emit.json("cost.json", "cost", &file)?;
    let mut table = Table::new(vec!["route".into(), "term".into(), "value".into()]);
    cost_rows(&mut table, &excitation);
    cost_rows(&mut table, &direct);
    emit.csv("cost.csv", &table)
}

fn routes(ctx: &mut Context, emit: &mut Emitter) -> Result<(), CliError> {
    let model = cost_model(ctx)?;
    let cmp = compare_routes(&model)?;
    if let Some(mu) = cmp.breakeven_mu_j0 {
        let at = CostModel { mu_j0: mu, ..model.clone() };
        let (e, d) = (excitation_route_cost(&at)?.total, direct_route_cost(&at)?.total);
        if (e - d).abs() > 1e-3 * d {
            return Err(CliError::Invariant(format!("breakeven mu_j0 = {mu} does not balance the routes ({e} vs {d})")));
        }
    }
    emit.json("routes.json", "compare_routes", &cmp)
}

/// Runs `outputs` in the fixed order of [`Output::ALL`].
pub fn run(scenario: &Scenario, outputs: &[Output], exec: Exec, emit: &mut Emitter) -> Result<(), CliError> {
    let mut ctx = Context::new(scenario, exec);
    for output in Output::ALL.iter().filter(|o| outputs.contains(o)) {
        match output {
            Output::Evolve => evolve(&mut ctx, emit)?,
            Output::Perturb => perturb(&mut ctx, emit)?,
            Output::Compare => compare(&mut ctx, emit)?,
            Output::Plan => plan(&mut ctx, emit)?,
            Output::BlockEncodeCheck => block_encode_check(&mut ctx, emit)?,
            Output::Cost => cost(&mut ctx, emit)?,
            Output::CompareRoutes => routes(&mut ctx, emit)?,
        }
    }
    Ok(())
}
