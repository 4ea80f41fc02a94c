//! One function per suite: run the experiment described by a `Plan` and
//! collect its table and pass/fail checks.

use serde::Serialize;

use crate::distributions::{DistributionSpec, MomentValue};
use crate::error::Result;
use crate::harness::config::{Plan, Suite};
use crate::harness::table::Table;
use crate::rng::experiment_id;
use crate::sk::{
    family_lambda, free_energy_lambda, ground_state_bound, sk_experiment, CouplingLayout, FreeEnergy, GroundStateBoundParams,
    SkFamily, SkKind, SkParams,
};
use crate::smoothmax::{corollary2_bound, optimal_alpha, theorem2_lambda_bounds, theorem3_bound, FunctionFamily, SoftMax};
use crate::swap::bounds::{best_theorem1_bound, c_constants, corollary1_bound, gamma_of, theorem1_bound, truncated_sums_iid};
use crate::swap::fd::FiniteDifferenced;
use crate::swap::function::{MeanFunction, SmoothFunction};
use crate::swap::lambda::{estimate_lambda, LambdaEstimate, LambdaKind};
use crate::swap::monte_carlo::{draw_vector, mc_gap, GapBound, GapReport, Side};
use crate::swap::test_function::TestFunction;
use crate::walks::{erdos_kac_bound, erdos_kac_experiment, WalkFamily};
use crate::wigner::{derivative_bounds, pastur_term_iid, semicircle_experiment, Part, StieltjesPart, WignerLayout};

/// A named pass/fail outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub passed: bool,
}

/// Everything a suite produces.
#[derive(Debug, Clone)]
pub struct SuiteOutput {
    pub table: Table,
    pub reports: Vec<GapReport>,
    pub checks: Vec<Check>,
}

impl SuiteOutput {
    fn new(table: Table) -> Self {
        SuiteOutput { table, reports: Vec::new(), checks: Vec::new() }
    }

    fn report(&mut self, r: &GapReport) {
        self.checks.push(Check { label: r.experiment_id().to_string(), passed: r.passed() });
        self.reports.push(r.clone());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Relative slack on empirical-versus-analytic λ comparisons in the audit.
const AUDIT_SLACK: f64 = 1e-6;

pub fn execute(plan: &Plan) -> Result<SuiteOutput> {
    match plan.suite {
        Suite::Clt => clt(plan),
        Suite::Wigner => wigner(plan),
        Suite::SkFreeEnergy => sk(plan, SkKind::FreeEnergy),
        Suite::SkGroundState => sk(plan, SkKind::GroundState),
        Suite::ErdosKac => erdos_kac(plan),
        Suite::LambdaAudit => lambda_audit(plan),
        Suite::BoundTable => bound_table(plan),
    }
}

fn truncation_grid(scale: f64) -> Vec<f64> {
    let mut levels: Vec<f64> = (1..=200).map(|j| 0.05 * j as f64 * scale).collect();
    levels.push(f64::INFINITY);
    levels
}

/// Main bound for the normalized sum: untruncated when `γ` is finite,
/// otherwise the best level on a grid scaled by `√n`.
fn clt_bound(g: &TestFunction, x: &DistributionSpec, y: &DistributionSpec, n: usize) -> Result<f64> {
    let l = LambdaEstimate::from_order_sups([(n as f64).sqrt().recip(), 0.0, 0.0], LambdaKind::AnalyticBound);
    let levels = match gamma_of(&[x, y]) {
        MomentValue::Finite(_) => vec![f64::INFINITY],
        MomentValue::Infinite => truncation_grid((n as f64).sqrt()),
    };
    Ok(best_theorem1_bound(g, l.lambda2, l.lambda3, x, y, n, &levels)?.bound)
}

fn clt(plan: &Plan) -> Result<SuiteOutput> {
    let n = plan.size;
    let bound = clt_bound(&plan.g, &plan.dist_x, &plan.dist_y, n)?;
    let xs = vec![plan.dist_x.clone(); n];
    let ys = vec![plan.dist_y.clone(); n];
    let f = MeanFunction::new(n);
    let r = mc_gap("clt", &f, &plan.g, &xs, &ys, plan.replicates, plan.seed, GapBound::Supplied(bound))?;
    let mut t = Table::new(&["experiment_id", "n", "replicates", "mc_gap", "std_error", "bound", "passed", "seed"]);
    t.push(vec![
        r.experiment_id().into(),
        r.n().into(),
        r.replicates().into(),
        r.mc_gap().into(),
        r.std_error().into(),
        r.theoretical_bound().into(),
        r.passed().into(),
        r.seed().into(),
    ]);
    let mut out = SuiteOutput::new(t);
    out.report(&r);
    Ok(out)
}

fn wigner(plan: &Plan) -> Result<SuiteOutput> {
    let rep =
        semicircle_experiment(&plan.dist_x, &plan.dist_y, plan.size, plan.z, &plan.g, plan.replicates, plan.seed, plan.epsilon)?;
    let mut t = Table::new(&[
        "N",
        "z_re",
        "z_im",
        "distX",
        "distY",
        "replicates",
        "gap_re",
        "gap_im",
        "bound",
        "mean_m_re",
        "mean_m_im",
        "m_sc_re",
        "m_sc_im",
        "seed",
    ]);
    t.push(vec![
        rep.order.into(),
        rep.z[0].into(),
        rep.z[1].into(),
        rep.dist_x.clone().into(),
        rep.dist_y.clone().into(),
        rep.replicates.into(),
        rep.re.mc_gap().into(),
        rep.im.mc_gap().into(),
        rep.bound.into(),
        rep.mean_m[0].into(),
        rep.mean_m[1].into(),
        rep.m_sc[0].into(),
        rep.m_sc[1].into(),
        rep.seed.into(),
    ]);
    let mut out = SuiteOutput::new(t);
    out.report(&rep.re);
    out.report(&rep.im);
    Ok(out)
}

fn sk(plan: &Plan, kind: SkKind) -> Result<SuiteOutput> {
    let params = SkParams::new(plan.beta, plan.h)?;
    let bp = GroundStateBoundParams::new(plan.a, plan.epsilon)?;
    let rep = sk_experiment(kind, &plan.dist_x, &plan.dist_y, &params, plan.size, plan.replicates, &plan.g, plan.seed, &bp)?;
    let mut t =
        Table::new(&["kind", "N", "beta", "h", "distX", "distY", "replicates", "gap", "std_error", "bound", "passed", "seed"]);
    t.push(vec![
        rep.kind.as_str().into(),
        rep.spins.into(),
        rep.beta.into(),
        rep.h.into(),
        rep.dist_x.clone().into(),
        rep.dist_y.clone().into(),
        rep.gap.replicates().into(),
        rep.gap.mc_gap().into(),
        rep.gap.std_error().into(),
        rep.gap.theoretical_bound().into(),
        rep.gap.passed().into(),
        rep.gap.seed().into(),
    ]);
    let mut out = SuiteOutput::new(t);
    out.report(&rep.gap);
    Ok(out)
}

fn erdos_kac(plan: &Plan) -> Result<SuiteOutput> {
    let rep = erdos_kac_experiment(&plan.dist_x, &plan.dist_y, plan.size, &plan.g, plan.replicates, plan.seed)?;
    let mut t = Table::new(&["n", "distX", "distY", "replicates", "gap", "bound", "ks_distance", "seed"]);
    t.push(vec![
        rep.steps.into(),
        rep.dist_x.clone().into(),
        rep.dist_y.clone().into(),
        rep.gap.replicates().into(),
        rep.gap.mc_gap().into(),
        rep.gap.theoretical_bound().into(),
        rep.ks_distance.into(),
        rep.gap.seed().into(),
    ]);
    let mut out = SuiteOutput::new(t);
    out.report(&rep.gap);
    Ok(out)
}

/// Sample points for the audit, one per replicate, drawn from `spec`.
fn audit_points(label: &str, spec: &DistributionSpec, dimension: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let specs = vec![spec.clone(); dimension];
    let id = experiment_id(label);
    (0..count as u64)
        .map(|r| {
            let mut x = vec![0.0; dimension];
            draw_vector(&specs, seed, id, Side::X, r, &mut x);
            x
        })
        .collect()
}

/// `λ` from per-order suprema of the member partials reported by the family.
fn family_member_lambda<F: FunctionFamily>(family: &F, points: &[Vec<f64>]) -> LambdaEstimate {
    let mut sups = [0.0f64; 3];
    for x in points {
        for i in 0..family.dimension() {
            family.for_each_member(x, i, &mut |m| {
                for (s, d) in sups.iter_mut().zip(m.d) {
                    *s = s.max(d.abs());
                }
            });
        }
    }
    LambdaEstimate::from_order_sups(sups, LambdaKind::EmpiricalSup)
}

struct AuditRow {
    function: &'static str,
    dimension: usize,
    analytic: (f64, f64),
    empirical: LambdaEstimate,
}

fn lambda_audit(plan: &Plan) -> Result<SuiteOutput> {
    let size = plan.size;
    let count = plan.replicates;
    let seed = plan.seed;
    let alpha = size as f64;
    let mut rows = Vec::new();

    let mean = MeanFunction::new(size);
    let analytic = LambdaEstimate::from_order_sups([(size as f64).sqrt().recip(), 0.0, 0.0], LambdaKind::AnalyticBound);
    let pts = audit_points("audit-mean", &plan.dist_x, size, count, seed);
    rows.push(AuditRow {
        function: "mean",
        dimension: size,
        analytic: (analytic.lambda2, analytic.lambda3),
        empirical: estimate_lambda(&mean, &pts)?,
    });

    let walk = WalkFamily::new(size)?;
    let pts = audit_points("audit-walk", &plan.dist_x, size, count, seed);
    let wl = walk.lambda();
    rows.push(AuditRow {
        function: "walk_members",
        dimension: size,
        analytic: (wl.lambda2, wl.lambda3),
        empirical: family_member_lambda(&walk, &pts),
    });
    rows.push(AuditRow {
        function: "walk_softmax",
        dimension: size,
        analytic: theorem2_lambda_bounds(&walk, alpha)?,
        empirical: estimate_lambda(&SoftMax::new(walk, alpha)?, &pts)?,
    });

    let params = SkParams::new(plan.beta, plan.h)?;
    let layout = CouplingLayout::new(size)?;
    let fam = SkFamily::new(layout, params);
    let pts = audit_points("audit-sk", &plan.dist_x, layout.len(), count, seed);
    let fl = family_lambda(&params, size)?;
    rows.push(AuditRow {
        function: "sk_members",
        dimension: layout.len(),
        analytic: (fl.lambda2, fl.lambda3),
        empirical: family_member_lambda(&fam, &pts),
    });
    rows.push(AuditRow {
        function: "sk_free_energy",
        dimension: layout.len(),
        analytic: free_energy_lambda(&params, size)?,
        empirical: estimate_lambda(&FiniteDifferenced(FreeEnergy::new(layout, params)?), &pts)?,
    });

    let wl = WignerLayout::new(size)?;
    let db = derivative_bounds(size, plan.z.im)?;
    let pts: Vec<Vec<f64>> = audit_points("audit-wigner", &plan.dist_x, wl.len(), count, seed);
    for (name, part) in [("stieltjes_re", Part::Re), ("stieltjes_im", Part::Im)] {
        let f = StieltjesPart::new(size, plan.z, part)?;
        rows.push(AuditRow {
            function: name,
            dimension: f.dimension(),
            analytic: (db.lambda2, db.lambda3),
            empirical: estimate_lambda(&f, &pts)?,
        });
    }

    let mut t = Table::new(&[
        "function",
        "dimension",
        "lambda2_analytic",
        "lambda2_empirical",
        "lambda3_analytic",
        "lambda3_empirical",
        "dominated",
        "replicates",
        "seed",
    ]);
    let mut checks = Vec::new();
    for row in rows {
        let dominated = row.empirical.lambda2 <= row.analytic.0 * (1.0 + AUDIT_SLACK)
            && row.empirical.lambda3 <= row.analytic.1 * (1.0 + AUDIT_SLACK);
        t.push(vec![
            row.function.into(),
            row.dimension.into(),
            row.analytic.0.into(),
            row.empirical.lambda2.into(),
            row.analytic.1.into(),
            row.empirical.lambda3.into(),
            dominated.into(),
            count.into(),
            seed.into(),
        ]);
        checks.push(Check { label: format!("lambda_audit/{}", row.function), passed: dominated });
    }
    Ok(SuiteOutput { table: t, reports: Vec::new(), checks })
}

fn bound_table(plan: &Plan) -> Result<SuiteOutput> {
    let (x, y) = (&plan.dist_x, &plan.dist_y);
    let g = &plan.g;
    let (c1, c2) = c_constants(g)?;
    let gamma = gamma_of(&[x, y]);
    let params = SkParams::new(plan.beta, plan.h)?;
    let bp = GroundStateBoundParams::new(plan.a, plan.epsilon)?;
    let mut t = Table::new(&["family", "size", "quantity", "value", "dist_x", "dist_y", "seed", "replicates"]);
    let mut row = |family: &str, size: usize, quantity: &str, value: f64| {
        t.push(vec![
            family.into(),
            size.into(),
            quantity.into(),
            value.into(),
            x.to_string().into(),
            y.to_string().into(),
            plan.seed.into(),
            plan.replicates.into(),
        ]);
    };

    for &n in &plan.grid {
        let nf = n as f64;
        row("clt", n, "theorem1", clt_bound(g, x, y, n)?);
        if gamma.finite().is_some() {
            row("clt", n, "corollary1", corollary1_bound(c2, gamma, n, nf.powf(-1.5))?);
        }
    }

    for &n in &plan.grid {
        if gamma.finite().is_none() {
            break;
        }
        let walk = WalkFamily::new(n)?;
        row("erdos_kac", n, "corollary2", erdos_kac_bound(g, gamma, n)?);
        let sums = truncated_sums_iid(x, y, n, f64::INFINITY)?;
        let q = gamma.as_f64() * n as f64 * walk.lambda().lambda3;
        let alpha = optimal_alpha(q, walk.log_size());
        row("erdos_kac", n, "theorem3_optimal_alpha", theorem3_bound(g, alpha, &walk, sums.t1, sums.t2)?);
    }

    for &spins in &plan.grid {
        let layout = CouplingLayout::new(spins)?;
        let n = layout.len();
        let (l2, l3) = free_energy_lambda(&params, spins)?;
        row("sk", spins, "lambda2_F", l2);
        row("sk", spins, "lambda3_F", l3);
        if gamma.finite().is_some() {
            row("sk", spins, "corollary1", corollary1_bound(c2, gamma, n, l3)?);
            row("sk", spins, "corollary2", corollary2_bound(g, gamma, n, &SkFamily::new(layout, params))?);
        }
        let sums = truncated_sums_iid(x, y, n, bp.epsilon() * (spins as f64).sqrt())?;
        let gs = ground_state_bound(g, spins, &bp, &sums)?;
        row("sk", spins, "ground_state_bound", gs.total);
        row("sk", spins, "ground_state_bound_body_sum", gs.with_body_sum);
    }

    for &order in &plan.grid {
        let layout = WignerLayout::new(order)?;
        let db = derivative_bounds(order, plan.z.im)?;
        let sums = truncated_sums_iid(x, y, layout.len(), plan.epsilon * (order as f64).sqrt())?;
        row("wigner", order, "lambda2", db.lambda2);
        row("wigner", order, "lambda3", db.lambda3);
        row("wigner", order, "theorem1", theorem1_bound(c1, c2, db.lambda2, db.lambda3, sums.t1, sums.t2)?);
        row("wigner", order, "pastur_x", pastur_term_iid(x, order, plan.epsilon)?);
        row("wigner", order, "pastur_y", pastur_term_iid(y, order, plan.epsilon)?);
    }

    Ok(SuiteOutput::new(t))
}
