//! The closed-loop simulation.

use nalgebra::DVector;

use super::config::ScenarioConfig;
use super::log::{LogSchema, RunLog};
use crate::constraints::{assemble, required_friction_or_inf, ConstraintRows, StepContext};
use crate::control::{nominal_control, pose_vector};
use crate::dynamics::{GraspState, HandObjectModel, StepHealth};
use crate::error::{GraspError, Result};
use crate::qp::{solve, QpProblem, QpSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    NominalOnly,
    Filtered,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::NominalOnly => "nominal",
            Mode::Filtered => "filtered",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "nominal" | "nominal_only" => Some(Mode::NominalOnly),
            "filtered" => Some(Mode::Filtered),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    GraspFailure { time: f64, reason: String },
    Infeasible { time: f64, reason: String },
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::GraspFailure { .. } => "grasp_failure",
            Termination::Infeasible { .. } => "infeasible",
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Termination::Completed => None,
            Termination::GraspFailure { reason, .. } | Termination::Infeasible { reason, .. } => Some(reason),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Termination::Completed => 0,
            Termination::GraspFailure { .. } => 2,
            Termination::Infeasible { .. } => 3,
        }
    }

    fn from_error(time: f64, e: &GraspError) -> Self {
        let reason = e.to_string();
        match e {
            GraspError::Infeasible | GraspError::MaxIterations(_) => Termination::Infeasible { time, reason },
            _ => Termination::GraspFailure { time, reason },
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub log: RunLog,
    pub termination: Termination,
}

/// Everything computed for the control decision at one step.
struct StepRecord<'a> {
    state: &'a GraspState<f64>,
    rows: &'a ConstraintRows<f64>,
    u_nom: &'a DVector<f64>,
    u: &'a DVector<f64>,
    f_c: DVector<f64>,
    beta: Vec<f64>,
    solution: Option<&'a QpSolution<f64>>,
    residual: f64,
    health: StepHealth<f64>,
    slip_margin: f64,
}

/// Runs `config` for its full duration, stopping early when the grasp is
/// lost (a fingertip contact leaves its chart or the grasp model becomes
/// singular) or when the filter has no admissible torque.
pub fn run_scenario(config: &ScenarioConfig, mode: Mode) -> Result<RunOutcome> {
    config.validate()?;
    let model = config.build_model();
    let state = config.initial_state(&model)?;
    run_from(config, &model, state, mode)
}

pub fn run_from(config: &ScenarioConfig, model: &HandObjectModel<f64>, mut state: GraspState<f64>, mode: Mode) -> Result<RunOutcome> {
    let settings = config.constraint_settings();
    let gains = config.gains()?;
    let reference = config.reference();
    let qp_settings = config.qp_settings();
    let dt = config.simulation.dt;
    let steps = (config.simulation.duration / dt).round() as usize;
    let schema = LogSchema::new(model, &settings);
    let mut log = RunLog::new(schema, mode.name());
    let mut warm: Vec<usize> = Vec::new();
    let mut health = StepHealth { residual_before: 0.0, position_correction: 0.0, velocity_correction: 0.0 };

    for k in 0..steps {
        let t = k as f64 * dt;
        state.time = t;
        let fail = |e: GraspError| {
            log::info!("run stopped at t = {t:.3}: {e}");
            Termination::from_error(t, &e)
        };
        let ctx = match StepContext::new(model, &state) {
            Ok(c) => c,
            Err(e) => return Ok(finish(log, fail(e))),
        };
        let u_nom = match nominal_control(&ctx, &reference, &gains) {
            Ok(n) => n.u,
            Err(e) => return Ok(finish(log, fail(e))),
        };
        let rows = match assemble(&ctx, &settings) {
            Ok(r) => r,
            Err(e) => return Ok(finish(log, fail(e))),
        };
        let (u, solution) = match mode {
            Mode::NominalOnly => (u_nom.clone(), None),
            Mode::Filtered => {
                let (a, b) = rows.matrices(model.dof());
                match solve(&QpProblem { u_nom: u_nom.clone(), a, b }, Some(&warm), &qp_settings) {
                    Ok(s) => (s.u.clone(), Some(s)),
                    Err(e) => return Ok(finish(log, fail(e))),
                }
            }
        };
        if let Some(s) = &solution {
            warm.clone_from(&s.active);
        }
        let f_c = ctx.response.contact_force(&u);
        let beta = required_friction_or_inf(&f_c, &ctx.kin.r_cp);
        log.push(StepRecord {
            state: &state,
            rows: &rows,
            u_nom: &u_nom,
            u: &u,
            f_c,
            beta,
            solution: solution.as_ref(),
            residual: model.grasp_residual(&state),
            health,
            slip_margin: settings.slip_margin,
        }
        .into_row(&ctx)?);
        drop(ctx);
        match model.step(&state, &u, dt) {
            Ok((next, h)) => {
                state = next;
                health = h;
            }
            Err(e) => return Ok(finish(log, fail(e))),
        }
    }
    Ok(finish(log, Termination::Completed))
}

fn finish(mut log: RunLog, termination: Termination) -> RunOutcome {
    log.termination = termination.name().to_string();
    log.reason = match &termination {
        Termination::Completed => String::new(),
        Termination::GraspFailure { reason, .. } | Termination::Infeasible { reason, .. } => reason.clone(),
    };
    RunOutcome { log, termination }
}

impl StepRecord<'_> {
    fn into_row(self, ctx: &StepContext<'_, f64>) -> Result<Vec<f64>> {
        let s = self.state;
        let mut row = Vec::with_capacity(256);
        row.push(s.time);
        row.extend(s.q.iter());
        row.extend(s.qd.iter());
        let pose = pose_vector(&s.object)?;
        row.extend(pose.iter());
        row.extend(s.twist.to_vector().iter());
        for (i, c) in s.contacts.iter().enumerate() {
            row.extend([c.xi_f.x, c.xi_f.y, c.xi_o.x, c.xi_o.y, c.psi]);
            let local = ctx.kin.r_cp.fixed_view::<3, 3>(3 * i, 3 * i) * self.f_c.fixed_rows::<3>(3 * i);
            row.extend(local.iter());
            row.push(self.beta[i]);
        }
        for r in &self.rows.rows {
            let margin = r.margin(self.u);
            match r.family {
                crate::zcbf::BarrierFamily::Slip => row.push(margin + self.slip_margin),
                crate::zcbf::BarrierFamily::Actuator => row.push(margin),
                _ => {
                    row.push(r.h);
                    row.push(r.b);
                    row.push(margin);
                }
            }
        }
        row.extend(self.u_nom.iter());
        row.extend(self.u.iter());
        match self.solution {
            Some(sol) => row.extend([
                1.0,
                sol.iterations as f64,
                sol.active.len() as f64,
                sol.kkt.primal,
                sol.kkt.stationarity,
                sol.kkt.min_multiplier,
                sol.kkt.complementarity,
            ]),
            None => row.extend([0.0; 7]),
        }
        row.push((self.u - self.u_nom).norm());
        row.push(self.residual);
        row.extend([self.health.residual_before, self.health.position_correction, self.health.velocity_correction]);
        Ok(row)
    }
}
