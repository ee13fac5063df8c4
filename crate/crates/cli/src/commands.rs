use serde::{Deserialize, Serialize};

use pdflow_core::certify::{
    audit_iqc, build_error_system, build_transformed_system, certify_rate, Frame, RateCertificate,
};
use pdflow_core::distgraph::{consensus_error, embed_as_constrained, DistributedProblem};
use pdflow_core::dynamics::{
    distributed_equilibrium, equilibrium_solve, fit_rate, format_sig17, integrate, Flow, FlowKind,
    RateFit, Trajectory,
};
use pdflow_core::problem::{kkt_residual, ProblemInstance, SampleBox, Solution};

use crate::config::Experiment;
use crate::error::{CliError, Result};
use crate::output::{write_json, write_with};

/// Samples used when auditing declared constants.
const AUDIT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub instance: String,
    pub flow: FlowKind,
    pub x_final: Vec<f64>,
    pub lambda_final: Vec<f64>,
    pub kkt_residual: f64,
    pub rho_hat: Option<f64>,
    pub c_hat: Option<f64>,
    pub r_squared: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributedSummary {
    pub n_agents: usize,
    pub agent_dim: usize,
    pub alpha: f64,
    pub x_final: Vec<f64>,
    pub lambda_final: Vec<f64>,
    pub mean_state: Vec<f64>,
    pub consensus_error: f64,
    pub gradient_sum_norm: f64,
    pub rho_hat: Option<f64>,
    pub c_hat: Option<f64>,
    pub r_squared: Option<f64>,
    /// Sampled modulus of the declared global condition.
    pub global_audit: f64,
    pub rho_certified: Option<f64>,
    pub certificate_error: Option<String>,
    /// Whether the embedded nonlinearity passed the sampled co-coercivity check.
    pub iqc_audit_passed: Option<bool>,
}

fn equilibrium(p: &ProblemInstance) -> Result<Solution> {
    match &p.known_solution {
        Some(s) => Ok(s.clone()),
        None => Ok(equilibrium_solve(p)?),
    }
}

fn fit(exp: &Experiment, tr: &Trajectory) -> Option<RateFit> {
    match fit_rate(&tr.times, &tr.error_norms, exp.config.window_fraction) {
        Ok(f) => Some(f),
        Err(e) => {
            log::warn!("rate fit skipped: {e}");
            None
        }
    }
}

fn write_trajectory(exp: &Experiment, name: &str, tr: &Trajectory) -> Result<()> {
    write_with(&exp.config.out_dir(), name, |buf| tr.write_csv(buf))?;
    Ok(())
}

pub fn solve(exp: &Experiment) -> Result<()> {
    let p = exp.problem()?;
    let flow = Flow::new(exp.config.flow, &p)
        .map_err(|e| CliError::config(format!("field `flow`: {e}")))?;
    let star = equilibrium(&p)?;
    let z0 = exp.initial_state(p.n(), p.m())?;
    let tr = integrate(flow, &z0, Some(&star), &exp.config.integrate_options())?;
    let f = fit(exp, &tr);
    let summary = SolveSummary {
        instance: p.name.clone(),
        flow: exp.config.flow,
        x_final: tr.final_x().to_vec(),
        lambda_final: tr.final_lambda().to_vec(),
        kkt_residual: kkt_residual(&p, tr.final_x(), tr.final_lambda()),
        rho_hat: f.map(|f| f.rho_hat),
        c_hat: f.map(|f| f.c_hat),
        r_squared: f.map(|f| f.r_squared),
    };
    write_trajectory(exp, "trajectory.csv", &tr)?;
    write_json(&exp.config.out_dir(), "summary.json", &summary)?;
    println!("kkt_residual={}", format_sig17(summary.kkt_residual));
    Ok(())
}

fn default_frame(p: &ProblemInstance) -> Frame {
    if p.m() == p.n() {
        Frame::Original
    } else {
        Frame::Transformed
    }
}

fn certify_instance(
    exp: &Experiment,
    p: &ProblemInstance,
    frame: Frame,
) -> Result<RateCertificate> {
    let sys = match frame {
        Frame::Original => build_error_system(p)?,
        Frame::Transformed => {
            build_transformed_system(p, exp.config.mu.unwrap_or(p.objective.declared_mu))?
        }
    };
    Ok(certify_rate(&sys, &exp.config.grid, exp.config.tolerance)?)
}

pub fn certify(exp: &Experiment) -> Result<()> {
    let p = exp.problem()?;
    let frame = exp.config.frame.unwrap_or_else(|| default_frame(&p));
    let cert = certify_instance(exp, &p, frame)?;
    write_json(&exp.config.out_dir(), "certificate.json", &cert)?;
    println!("rho_certified={}", cert.rho_certified);
    Ok(())
}

fn is_affine(p: &ProblemInstance) -> bool {
    p.objective
        .function
        .quadratic_form()
        .is_some_and(|(h, _)| h.max_abs() == 0.0)
}

fn verdict_line(label: &str, f: Option<RateFit>) -> String {
    match f {
        Some(f) => format!("{label} rho_hat={}", f.rho_hat),
        None => format!("{label} rho_hat=none"),
    }
}

pub fn compare(exp: &Experiment) -> Result<()> {
    let p = exp.problem()?;
    if p.m() != p.n() {
        return Err(CliError::config(format!(
            "compare needs a square constraint (m = n), got m = {}, n = {}",
            p.m(),
            p.n()
        )));
    }
    if !is_affine(&p) {
        return Err(CliError::config(
            "compare needs an affine or zero objective",
        ));
    }
    let star = equilibrium(&p)?;
    let z0 = exp.initial_state(p.n(), p.m())?;
    let opts = exp.config.integrate_options();
    let standard = integrate(Flow::Standard(&p), &z0, Some(&star), &opts)?;
    let augmented = integrate(Flow::Augmented(&p), &z0, Some(&star), &opts)?;
    write_trajectory(exp, "standard.csv", &standard)?;
    write_trajectory(exp, "augmented.csv", &augmented)?;
    let verdict = format!(
        "{}\n{}\n",
        verdict_line("standard", fit(exp, &standard)),
        verdict_line("augmented", fit(exp, &augmented))
    );
    crate::output::write_atomic(&exp.config.out_dir(), "verdict.txt", verdict.as_bytes())?;
    print!("{verdict}");
    Ok(())
}

fn write_consensus(exp: &Experiment, d: &DistributedProblem, tr: &Trajectory) -> Result<()> {
    write_with(&exp.config.out_dir(), "consensus.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["t", "consensus_error", "gradient_sum_norm"])?;
        for k in 0..tr.len() {
            let x = tr.x(k);
            w.write_record([
                format_sig17(tr.times[k]),
                format_sig17(consensus_error(x, d.agent_dim())),
                format_sig17(d.gradient_sum_norm(x)),
            ])?;
        }
        w.flush()
    })?;
    Ok(())
}

pub fn distributed(exp: &Experiment) -> Result<()> {
    let d = exp.distributed()?;
    let bounds = SampleBox::default();
    let global_audit = d.audit_global(AUDIT_SAMPLES, bounds, exp.config.seed)?;
    let star = distributed_equilibrium(&d)?;
    let nn = d.stacked_dim();
    let z0 = exp.initial_state(nn, nn)?;
    if z0.lambda.iter().any(|&v| v != 0.0) {
        return Err(CliError::config(
            "field `initial.lambda`: the distributed flow starts from lambda = 0",
        ));
    }
    let tr = integrate(
        Flow::DistributedPi(&d),
        &z0,
        Some(&star),
        &exp.config.integrate_options(),
    )?;
    let f = fit(exp, &tr);

    let embedded = embed_as_constrained(&d)?;
    let mu = exp.config.mu.unwrap_or(embedded.objective.declared_mu);
    let (cert, cert_err, iqc) = match build_transformed_system(&embedded, mu) {
        Ok(sys) => {
            let audit = audit_iqc(&sys, AUDIT_SAMPLES, bounds, exp.config.seed);
            if !audit.passed {
                log::warn!(
                    "embedded nonlinearity violates co-coercivity (worst slack {:.3e})",
                    audit.worst_slack
                );
            }
            match certify_rate(&sys, &exp.config.grid, exp.config.tolerance) {
                Ok(c) => (Some(c), None, Some(audit.passed)),
                Err(e) => (None, Some(e.to_string()), Some(audit.passed)),
            }
        }
        Err(e) => (None, Some(e.to_string()), None),
    };

    let x = tr.final_x();
    let summary = DistributedSummary {
        n_agents: d.n_agents(),
        agent_dim: d.agent_dim(),
        alpha: d.alpha,
        x_final: x.to_vec(),
        lambda_final: tr.final_lambda().to_vec(),
        mean_state: d.mean_state(x),
        consensus_error: consensus_error(x, d.agent_dim()),
        gradient_sum_norm: d.gradient_sum_norm(x),
        rho_hat: f.map(|f| f.rho_hat),
        c_hat: f.map(|f| f.c_hat),
        r_squared: f.map(|f| f.r_squared),
        global_audit,
        rho_certified: cert.as_ref().map(|c| c.rho_certified),
        certificate_error: cert_err,
        iqc_audit_passed: iqc,
    };
    let out = exp.config.out_dir();
    write_trajectory(exp, "trajectory.csv", &tr)?;
    write_consensus(exp, &d, &tr)?;
    if let Some(c) = &cert {
        write_json(&out, "certificate.json", c)?;
    }
    write_json(&out, "summary.json", &summary)?;
    println!("consensus_error={}", format_sig17(summary.consensus_error));
    Ok(())
}
