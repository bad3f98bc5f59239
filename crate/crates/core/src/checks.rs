//! Pass/fail batteries for the limiting behaviour of the exact dynamics.
//!
//! Each check configures its own scenarios, runs the exact recursion and
//! returns a [`CheckVerdict`] with the measured evidence. Verdicts carry a
//! SHA-256 digest of the configurations they ran, so identical digests imply
//! identical evidence.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{Debug, Write as _};

use sha2::{Digest, Sha256};

use crate::diagnostics::{fit_exponential_decay, total_variation, DecayFit, DiagnosticContext};
use crate::exact::{predicted_limit, ExactDynamics, ExactRunConfig, LimitPrediction, Order};
use crate::reward::{RegimeLabel, RewardField};
use crate::scenario::{self, Scenario};
use crate::space::Region;
use crate::{DiscreteDistribution, Error, Result};

/// Decay fits must reach this R².
pub const MIN_R_SQUARED: f64 = 0.98;
/// Largest TV between the final and the predicted distribution.
pub const LIMIT_TV_TOL: f64 = 1e-3;
/// States with less mass than this are outside the final support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;
/// Mode-collapse variant: required mass on the single maximizer.
pub const COLLAPSE_MASS: f64 = 0.999;
/// Coverage proxy threshold at the horizon.
pub const COVERAGE_TOL: f64 = 1e-6;
/// Smallest TV between limits from two initializations.
pub const INIT_DEP_TV: f64 = 0.05;
/// Horizon standing in for the limit in coverage and utility checks.
pub const LIMIT_HORIZON: usize = 500;
pub const UTILITY_TOL: f64 = 1e-9;
/// Smallest TV between OwnerFirst and PublicFirst limits.
pub const ORDER_TV: f64 = 0.5;
/// Largest TV between the two orders when the agents agree.
pub const ORDER_CONTROL_TV: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TheoremId {
    T1,
    C1,
    T2,
    T3,
    T4,
    T5,
    T6,
    R1,
}

impl TheoremId {
    pub const ALL: [TheoremId; 8] = [
        TheoremId::T1,
        TheoremId::C1,
        TheoremId::T2,
        TheoremId::T3,
        TheoremId::T4,
        TheoremId::T5,
        TheoremId::T6,
        TheoremId::R1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TheoremId::T1 => "T1",
            TheoremId::C1 => "C1",
            TheoremId::T2 => "T2",
            TheoremId::T3 => "T3",
            TheoremId::T4 => "T4",
            TheoremId::T5 => "T5",
            TheoremId::T6 => "T6",
            TheoremId::R1 => "R1",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        TheoremId::ALL.into_iter().find(|id| id.name().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckVerdict {
    pub id: TheoremId,
    pub passed: bool,
    pub evidence: BTreeMap<String, f64>,
    /// Hex SHA-256 of the configurations the check ran.
    pub config_digest: String,
}

impl CheckVerdict {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.evidence.get(key).copied()
    }
}

/// Hex SHA-256 of the `Debug` rendering of `value`.
pub fn config_digest<T: Debug + ?Sized>(value: &T) -> String {
    let digest = Sha256::digest(format!("{value:?}").as_bytes());
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Default)]
struct Evidence {
    map: BTreeMap<String, f64>,
    passed: bool,
}

impl Evidence {
    fn new() -> Self {
        Evidence { map: BTreeMap::new(), passed: true }
    }

    fn put(&mut self, key: impl Into<String>, value: f64) {
        self.map.insert(key.into(), value);
    }

    fn flag(&mut self, key: impl Into<String>, ok: bool) {
        self.put(key, if ok { 1.0 } else { 0.0 });
        self.passed &= ok;
    }

    /// Records a decay fit; `min_r2` of `None` only requires a positive rate.
    fn fit(&mut self, prefix: &str, series: &[(usize, f64)], min_r2: Option<f64>) {
        match fit_exponential_decay(series) {
            Ok(f) => {
                self.put(format!("{prefix}.rate"), f.rate);
                self.put(format!("{prefix}.r_squared"), f.r_squared);
                self.put(format!("{prefix}.window_start"), f.window.0 as f64);
                self.put(format!("{prefix}.window_end"), f.window.1 as f64);
                self.flag(format!("{prefix}.ok"), decay_ok(&f, min_r2));
            }
            Err(_) => {
                self.put(format!("{prefix}.window_points"), 0.0);
                self.flag(format!("{prefix}.ok"), false);
            }
        }
    }

    fn finish(self, id: TheoremId, digest: String) -> CheckVerdict {
        CheckVerdict { id, passed: self.passed, evidence: self.map, config_digest: digest }
    }
}

fn decay_ok(f: &DecayFit, min_r2: Option<f64>) -> bool {
    f.rate > 0.0 && min_r2.is_none_or(|m| f.r_squared >= m)
}

/// An exact run with the measurements the checks need.
#[derive(Debug, Clone)]
pub struct ExactOutcome {
    pub prediction: LimitPrediction,
    pub final_dist: DiscreteDistribution,
    /// `p_t(X \ B_eta(target))` for `t = 0..=T`.
    pub outside_target: Vec<(usize, f64)>,
    /// `p_t(X \ B_eta(A_O))`.
    pub outside_owner: Vec<(usize, f64)>,
    /// `p_t(A_O \ B_eta(target))`.
    pub inside_owner_outside_target: Vec<(usize, f64)>,
    pub tv_to_predicted: f64,
    /// Final support (mass above [`SUPPORT_THRESHOLD`]) lies in `B_eta(target)`.
    pub support_contained: bool,
}

impl ExactOutcome {
    pub fn final_mass(&self, region: &Region) -> f64 {
        self.final_dist.mass(region)
    }
}

/// Runs `cfg` and records the masses used by the decay fits. `eta` defaults
/// to one grid cell.
pub fn run_exact_outcome(cfg: &ExactRunConfig, eta: Option<f64>) -> Result<ExactOutcome> {
    let prediction = predicted_limit(cfg)?;
    let eta = eta.unwrap_or_else(|| cfg.space.cell_size());
    let ctx = DiagnosticContext::new(&cfg.space, &cfg.owner, &cfg.public, &prediction, eta)?;
    let owner_core = prediction.owner_set.difference(&ctx.target_nbhd);
    let mut outside_target = Vec::with_capacity(cfg.iterations + 1);
    let mut outside_owner = Vec::with_capacity(cfg.iterations + 1);
    let mut inside_owner = Vec::with_capacity(cfg.iterations + 1);
    let final_dist = ExactDynamics::new(cfg)?.run_with(|t, p| {
        outside_target.push((t, (1.0 - p.mass(&ctx.target_nbhd)).max(0.0)));
        outside_owner.push((t, (1.0 - p.mass(&ctx.owner_nbhd)).max(0.0)));
        inside_owner.push((t, p.mass(&owner_core)));
    })?;
    let tv_to_predicted = total_variation(&final_dist, &prediction.limit)?;
    let support_contained = final_dist.support(SUPPORT_THRESHOLD).is_subset(&ctx.target_nbhd);
    Ok(ExactOutcome {
        prediction,
        final_dist,
        outside_target,
        outside_owner,
        inside_owner_outside_target: inside_owner,
        tv_to_predicted,
        support_contained,
    })
}

fn limit_evidence(ev: &mut Evidence, prefix: &str, out: &ExactOutcome) {
    ev.put(format!("{prefix}.tv_to_predicted"), out.tv_to_predicted);
    ev.flag(format!("{prefix}.tv_ok"), out.tv_to_predicted <= LIMIT_TV_TOL);
    ev.flag(format!("{prefix}.support_contained"), out.support_contained);
}

/// Perfect alignment: the outside-`A_star` mass decays exponentially and the
/// limit is `p_0` renormalized on `A_star`. Runs on the given scenarios plus
/// the unique-maximizer variant.
pub fn consensus_collapse_on(scenarios: &[ExactRunConfig]) -> Result<CheckVerdict> {
    let mut ev = Evidence::new();
    for (k, cfg) in scenarios.iter().enumerate() {
        let prefix = format!("s{k}");
        let out = run_exact_outcome(cfg, None)?;
        if out.prediction.regime != RegimeLabel::Perfect {
            return Err(Error::Precondition(format!("scenario {k} is not perfectly aligned")));
        }
        ev.fit(&format!("{prefix}.decay"), &out.outside_target, Some(MIN_R_SQUARED));
        limit_evidence(&mut ev, &prefix, &out);
    }
    let c1 = check_mode_collapse()?;
    ev.put("collapse.argmax_mass", c1.get("argmax_mass").unwrap_or(0.0));
    ev.flag("collapse.ok", c1.passed);
    let digest = config_digest(&(scenarios, unique_max_config()));
    Ok(ev.finish(TheoremId::T1, digest))
}

/// Perfect words (T = 500) and perfect disks on the 61x61 grid (T = 200).
pub fn check_consensus_collapse() -> Result<CheckVerdict> {
    consensus_collapse_on(&[scenario::perfect_words().exact_config(), scenario::perfect_2d().exact_config()])
}

/// Shared tabular reward with a single maximizer on `{1..8}`.
pub fn unique_max_config() -> ExactRunConfig {
    let values = vec![0.1, 0.3, 0.2, 1.0, 0.4, 0.0, -0.5, 0.25];
    let field = RewardField::tabular(values).expect("static table");
    ExactRunConfig::new(scenario::words_space(), field.clone(), field, LIMIT_HORIZON)
}

/// Unique maximizer: the final mass on it reaches [`COLLAPSE_MASS`].
pub fn check_mode_collapse() -> Result<CheckVerdict> {
    let cfg = unique_max_config();
    let out = run_exact_outcome(&cfg, None)?;
    let mut ev = Evidence::new();
    let argmax_mass = out.final_mass(&out.prediction.target);
    ev.put("argmax_states", out.prediction.target.len() as f64);
    ev.put("argmax_mass", argmax_mass);
    ev.flag("single_maximizer", out.prediction.target.len() == 1);
    ev.flag("mass_ok", argmax_mass >= COLLAPSE_MASS);
    Ok(ev.finish(TheoremId::C1, config_digest(&cfg)))
}

/// Partial alignment: the final support sits in `B_eta(A_shared)` and the
/// limit is `p_0` renormalized on `A_shared`.
pub fn intersection_survival_on(scenarios: &[ExactRunConfig]) -> Result<CheckVerdict> {
    let mut ev = Evidence::new();
    for (k, cfg) in scenarios.iter().enumerate() {
        let prefix = format!("s{k}");
        let out = run_exact_outcome(cfg, None)?;
        if out.prediction.regime == RegimeLabel::Disjoint {
            return Err(Error::Precondition(format!("scenario {k} has no shared maximizer")));
        }
        ev.put(format!("{prefix}.shared_states"), out.prediction.target.len() as f64);
        ev.put(format!("{prefix}.mass_outside_shared"), 1.0 - out.final_mass(&out.prediction.target));
        limit_evidence(&mut ev, &prefix, &out);
    }
    Ok(ev.finish(TheoremId::T2, config_digest(scenarios)))
}

pub fn check_intersection_survival() -> Result<CheckVerdict> {
    intersection_survival_on(&[scenario::partial_words().exact_config(), scenario::partial_2d().exact_config()])
}

/// Disjoint alignment: mass outside `B_eta(A_O)` and mass inside `A_O` but
/// outside `B_eta(A_{P|O})` both decay, and the limit is `p_0` renormalized
/// on `A_{P|O}`.
pub fn owner_dominance_on(scenarios: &[ExactRunConfig]) -> Result<CheckVerdict> {
    let mut ev = Evidence::new();
    for (k, cfg) in scenarios.iter().enumerate() {
        let prefix = format!("s{k}");
        let out = run_exact_outcome(cfg, None)?;
        if out.prediction.regime != RegimeLabel::Disjoint {
            return Err(Error::Precondition(format!("scenario {k} is not disjoint")));
        }
        ev.fit(&format!("{prefix}.stage1"), &out.outside_owner, None);
        ev.fit(&format!("{prefix}.stage2"), &out.inside_owner_outside_target, None);
        limit_evidence(&mut ev, &prefix, &out);
    }
    Ok(ev.finish(TheoremId::T3, config_digest(scenarios)))
}

pub fn check_owner_dominance() -> Result<CheckVerdict> {
    owner_dominance_on(&[scenario::disjoint_words().exact_config(), scenario::disjoint_2d().exact_config()])
}

/// Initial weights proportional to `1, 2, ..., n` in enumeration order.
pub fn ramp_initial(n: usize) -> DiscreteDistribution {
    DiscreteDistribution::new((1..=n).map(|i| i as f64).collect()).expect("positive ramp")
}

/// Words scenario whose shared maximizer set `{2, 3}` has two states, so the
/// limit depends on the start.
pub fn impossibility_scenario() -> Scenario {
    Scenario::words("impossibility-words", (1, 3), (2, 5)).expect("static scenario")
}

/// Misaligned scenario at the horizon: both one-sided coverage masses
/// vanish, and uniform vs ramp starts give limits at least
/// [`INIT_DEP_TV`] apart.
pub fn check_impossibility_demo(scenario: &Scenario) -> Result<CheckVerdict> {
    let base = scenario.exact_config().with_iterations(LIMIT_HORIZON);
    let prediction = predicted_limit(&base)?;
    if prediction.owner_set == prediction.public_set {
        return Err(Error::Precondition(format!("{}: owner and public maximizers coincide", scenario.name)));
    }
    let mut ev = Evidence::new();
    ev.put("horizon", LIMIT_HORIZON as f64);
    ev.put("coverage_threshold", COVERAGE_TOL);
    let uniform = run_exact_outcome(&base, None)?;
    let owner_only = prediction.owner_set.difference(&prediction.public_set);
    let public_only = prediction.public_set.difference(&prediction.owner_set);
    let m_owner = uniform.final_mass(&owner_only);
    let m_public = uniform.final_mass(&public_only);
    ev.put("coverage.owner_only_mass", m_owner);
    ev.put("coverage.public_only_mass", m_public);
    ev.flag("coverage.fails", m_owner <= COVERAGE_TOL && m_public <= COVERAGE_TOL);

    let ramp_cfg = base.clone().with_initial(ramp_initial(base.space.len()));
    let ramp = run_exact_outcome(&ramp_cfg, None)?;
    let tv = total_variation(&uniform.final_dist, &ramp.final_dist)?;
    ev.put("init_dep.tv", tv);
    ev.put("init_dep.predicted_tv", total_variation(&uniform.prediction.limit, &ramp.prediction.limit)?);
    ev.flag("init_dep.fails", tv >= INIT_DEP_TV);
    Ok(ev.finish(TheoremId::T4, config_digest(&(base, ramp_cfg))))
}

/// Candidate reports for one agent; index 0 is the truthful one.
pub type ReportGrid = Vec<RewardField>;

/// Truthful disk plus center shifts of -1, -0.5, +0.5, +1 along x and radius
/// scalings 0.5 and 2.
pub fn default_misreports(truthful: &RewardField) -> Result<ReportGrid> {
    misreports(truthful, &[-1.0, -0.5, 0.5, 1.0], &[0.5, 2.0])
}

pub fn misreports(truthful: &RewardField, shifts: &[f64], scalings: &[f64]) -> Result<ReportGrid> {
    let RewardField::Circular { center, radius, slope } = *truthful else {
        return Err(Error::InvalidParameter("misreport grids need a circular reward".into()));
    };
    let mut out = vec![truthful.clone()];
    for &s in shifts {
        out.push(RewardField::circular_with_slope([center[0] + s, center[1]], radius, slope)?);
    }
    for &k in scalings {
        out.push(RewardField::circular_with_slope(center, radius * k, slope)?);
    }
    Ok(out)
}

/// `U_O[i][j]` and `U_P[i][j]` for Owner report `i` and Public report `j`,
/// evaluated with the true rewards on `p_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityMatrix {
    pub owner_reports: ReportGrid,
    pub public_reports: ReportGrid,
    pub owner_utility: Vec<f64>,
    pub public_utility: Vec<f64>,
}

impl UtilityMatrix {
    pub fn owner(&self, i: usize, j: usize) -> f64 {
        self.owner_utility[i * self.public_reports.len() + j]
    }

    pub fn public(&self, i: usize, j: usize) -> f64 {
        self.public_utility[i * self.public_reports.len() + j]
    }

    /// Worst `max misreport - truthful` over every column, per agent.
    pub fn regrets(&self) -> (f64, f64) {
        let (no, np) = (self.owner_reports.len(), self.public_reports.len());
        let mut owner = f64::NEG_INFINITY;
        for j in 0..np {
            for i in 0..no {
                owner = owner.max(self.owner(i, j) - self.owner(0, j));
            }
        }
        let mut public = f64::NEG_INFINITY;
        for i in 0..no {
            for j in 0..np {
                public = public.max(self.public(i, j) - self.public(i, 0));
            }
        }
        (owner, public)
    }

    /// Regrets against the opponent's truthful report only.
    pub fn equilibrium_regrets(&self) -> (f64, f64) {
        let owner = (0..self.owner_reports.len())
            .map(|i| self.owner(i, 0) - self.owner(0, 0))
            .fold(f64::NEG_INFINITY, f64::max);
        let public = (0..self.public_reports.len())
            .map(|j| self.public(0, j) - self.public(0, 0))
            .fold(f64::NEG_INFINITY, f64::max);
        (owner, public)
    }
}

/// Runs every report pair of `scenario` for `iterations` steps. The first
/// entry of each grid must be the scenario's true reward.
pub fn utility_matrix(
    scenario: &Scenario,
    owner_reports: &[RewardField],
    public_reports: &[RewardField],
    iterations: usize,
) -> Result<UtilityMatrix> {
    if owner_reports.first() != Some(&scenario.owner) || public_reports.first() != Some(&scenario.public) {
        return Err(Error::Precondition("report grids must start with the truthful rewards".into()));
    }
    let true_owner = scenario.owner.values_on(&scenario.space);
    let true_public = scenario.public.values_on(&scenario.space);
    let mut owner_utility = Vec::with_capacity(owner_reports.len() * public_reports.len());
    let mut public_utility = Vec::with_capacity(owner_utility.capacity());
    for ro in owner_reports {
        for rp in public_reports {
            let cfg = ExactRunConfig::new(scenario.space.clone(), ro.clone(), rp.clone(), iterations);
            let p = crate::exact::run_final(&cfg)?;
            owner_utility.push(p.expectation(&true_owner));
            public_utility.push(p.expectation(&true_public));
        }
    }
    Ok(UtilityMatrix {
        owner_reports: owner_reports.to_vec(),
        public_reports: public_reports.to_vec(),
        owner_utility,
        public_utility,
    })
}

/// Truthful reporting attains the column maximum (within [`UTILITY_TOL`])
/// for both agents in every scenario.
pub fn strategyproofness_on(scenarios: &[(Scenario, ReportGrid, ReportGrid)]) -> Result<CheckVerdict> {
    let mut ev = Evidence::new();
    ev.put("horizon", LIMIT_HORIZON as f64);
    for (s, owner_grid, public_grid) in scenarios {
        let m = utility_matrix(s, owner_grid, public_grid, LIMIT_HORIZON)?;
        let (ro, rp) = m.regrets();
        ev.put(format!("{}.owner_truthful_utility", s.name), m.owner(0, 0));
        ev.put(format!("{}.public_truthful_utility", s.name), m.public(0, 0));
        ev.put(format!("{}.owner_max_regret", s.name), ro);
        ev.put(format!("{}.public_max_regret", s.name), rp);
        let (eo, ep) = m.equilibrium_regrets();
        ev.put(format!("{}.owner_equilibrium_regret", s.name), eo);
        ev.put(format!("{}.public_equilibrium_regret", s.name), ep);
        ev.flag(format!("{}.truthful_dominant", s.name), ro <= UTILITY_TOL && rp <= UTILITY_TOL);
    }
    Ok(ev.finish(TheoremId::T5, config_digest(scenarios)))
}

/// Default misreport grids on the three disk scenarios.
pub fn default_strategyproofness_grid() -> Result<Vec<(Scenario, ReportGrid, ReportGrid)>> {
    [scenario::perfect_2d(), scenario::partial_2d(), scenario::disjoint_2d()]
        .into_iter()
        .map(|s| {
            let o = default_misreports(&s.owner)?;
            let p = default_misreports(&s.public)?;
            Ok((s, o, p))
        })
        .collect()
}

pub fn check_strategyproofness() -> Result<CheckVerdict> {
    strategyproofness_on(&default_strategyproofness_grid()?)
}

/// TV between the OwnerFirst and PublicFirst limits at the horizon.
pub fn order_gap(cfg: &ExactRunConfig) -> Result<f64> {
    let of = crate::exact::run_final(&cfg.clone().with_order(Order::OwnerFirst))?;
    let pf = crate::exact::run_final(&cfg.clone().with_order(Order::PublicFirst))?;
    total_variation(&of, &pf)
}

/// Disjoint scenarios give order-dependent limits; a Perfect control does not.
pub fn influence_parity_on(disjoint: &[ExactRunConfig], control: &ExactRunConfig) -> Result<CheckVerdict> {
    let mut ev = Evidence::new();
    for (k, cfg) in disjoint.iter().enumerate() {
        if predicted_limit(cfg)?.regime != RegimeLabel::Disjoint {
            return Err(Error::Precondition(format!("scenario {k} is not disjoint")));
        }
        let tv = order_gap(cfg)?;
        ev.put(format!("s{k}.order_tv"), tv);
        ev.flag(format!("s{k}.order_matters"), tv >= ORDER_TV);
    }
    let tv = order_gap(control)?;
    ev.put("control.order_tv", tv);
    ev.flag("control.order_irrelevant", tv <= ORDER_CONTROL_TV);
    Ok(ev.finish(TheoremId::T6, config_digest(&(disjoint, control))))
}

pub fn check_influence_parity_violation() -> Result<CheckVerdict> {
    let at_horizon = |s: Scenario| s.exact_config().with_iterations(LIMIT_HORIZON);
    influence_parity_on(
        &[at_horizon(scenario::disjoint_words()), at_horizon(scenario::disjoint_2d())],
        &at_horizon(scenario::perfect_words()),
    )
}

/// In every regime the final support lies within `B_eta` of the predicted
/// support.
pub fn support_containment_on(scenarios: &[ExactRunConfig]) -> Result<CheckVerdict> {
    let mut ev = Evidence::new();
    ev.put("support_threshold", SUPPORT_THRESHOLD);
    for (k, cfg) in scenarios.iter().enumerate() {
        let out = run_exact_outcome(cfg, None)?;
        ev.put(format!("s{k}.target_states"), out.prediction.target.len() as f64);
        ev.put(format!("s{k}.support_states"), out.final_dist.support(SUPPORT_THRESHOLD).len() as f64);
        ev.flag(format!("s{k}.contained"), out.support_contained);
    }
    Ok(ev.finish(TheoremId::R1, config_digest(scenarios)))
}

pub fn check_support_containment() -> Result<CheckVerdict> {
    let cfgs: Vec<ExactRunConfig> = ["perfect-words", "partial-words", "disjoint-words"]
        .iter()
        .filter_map(|n| scenario::preset(n))
        .map(|s| s.exact_config())
        .collect();
    support_containment_on(&cfgs)
}

/// Runs one check by id with its default scenarios.
pub fn run_check(id: TheoremId) -> Result<CheckVerdict> {
    match id {
        TheoremId::T1 => check_consensus_collapse(),
        TheoremId::C1 => check_mode_collapse(),
        TheoremId::T2 => check_intersection_survival(),
        TheoremId::T3 => check_owner_dominance(),
        TheoremId::T4 => check_impossibility_demo(&impossibility_scenario()),
        TheoremId::T5 => check_strategyproofness(),
        TheoremId::T6 => check_influence_parity_violation(),
        TheoremId::R1 => check_support_containment(),
    }
}

pub fn run_battery(ids: &[TheoremId]) -> Result<Vec<CheckVerdict>> {
    ids.iter().map(|&id| run_check(id)).collect()
}

/// Short `key=value` list of the evidence, for summaries.
pub fn evidence_summary(v: &CheckVerdict) -> String {
    let mut s = String::new();
    for (k, val) in &v.evidence {
        if !s.is_empty() {
            s.push(' ');
        }
        let _ = write!(s, "{k}={val:.6e}");
    }
    s.to_string()
}
