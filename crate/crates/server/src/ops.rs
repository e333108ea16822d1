use wisar_core::cubature::DiscCubatureRule;
use wisar_core::eval::{aggregate, dtf_pf, planner_for, pod_curve, target_seed, Experiment, RunContext};
use wisar_core::pdm::{generate_random_pdm, Pdm};
use wisar_core::protocol::{
    CompareRequest, CompareResponse, DtfRequest, DtfResponse, GenerateRequest, PlanRequest, PlanResponse, PodRequest,
    PodResponse,
};
use wisar_core::{Error, Result};

pub fn generate(req: &GenerateRequest) -> Result<Pdm> {
    let c = &req.config;
    c.validate()?;
    generate_random_pdm(req.seed, c.g, c.bounds, c.cov)
}

/// Plans on the PDM and start position an environment reset with `seed`
/// would produce.
pub fn plan(req: &PlanRequest) -> Result<PlanResponse> {
    let ctx = RunContext::new(&req.config, req.seed)?;
    let path = planner_for(&req.algorithm, &req.settings)?.plan(&ctx)?;
    Ok(PlanResponse { pdm: ctx.pdm, start: ctx.start, path })
}

pub fn pod(req: &PodRequest) -> Result<PodResponse> {
    let c = &req.config;
    c.validate()?;
    let rule = DiscCubatureRule::new(c.rule_degree)?;
    let pod = pod_curve(&req.pdm, &req.path, req.settings.n_pod_steps, c.r_buffer, &rule, c.footprint)?;
    Ok(PodResponse { pod })
}

/// Targets are drawn with the same seed derivation the experiment runner uses,
/// so `seed` is the run seed of the PDM.
pub fn dtf(req: &DtfRequest) -> Result<DtfResponse> {
    let c = &req.config;
    c.validate()?;
    let s = &req.settings;
    dtf_pf(&req.pdm, &req.path, s.n_targets, c.r_buffer, s.n_walk, c.lambda, target_seed(req.seed))
}

pub fn compare(req: &CompareRequest) -> Result<CompareResponse> {
    if req.algorithms.is_empty() {
        return Err(Error::Invalid("no algorithms given".into()));
    }
    let mut planners = req.algorithms.iter().map(|a| planner_for(a, &req.settings)).collect::<Result<Vec<_>>>()?;
    let records = Experiment::new(req.config.clone(), req.settings.clone(), req.runs, req.seed)?.run(&mut planners)?;
    let summary = aggregate(&records);
    Ok(CompareResponse { records, summary })
}
