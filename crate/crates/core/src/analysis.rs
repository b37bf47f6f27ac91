//! Critical and transition squeezing, sudden-death times, and the numeric
//! machinery that checks them.
//!
//! Closed forms assume the single-bath configuration (γ₂ = N₂ = 0) for the
//! local results and a shared bath for the global ones. Numeric boundaries,
//! found by bisection on the Simon expression, are the ground truth; the
//! closed forms are cross-checked against them in [`discrepancy_report`].

use serde::Serialize;

use crate::channels::{
    run_scenario, BathSpec, ChannelVariant, GlobalBathSpec, LocalBathSpec, Scenario, TauTime,
};
use crate::error::{non_negative, Error, Result};
use crate::exec::Execution;
use crate::gaussian::min_quadrature_variance;
use crate::measures::{entanglement_report, separability_tolerance, simon_lhs_unchecked};

/// Points in the uniform τ scan that brackets the separability boundary.
pub const BOUNDARY_SCAN_POINTS: usize = 512;
/// Upper end of the τ search domain.
pub const TAU_SEARCH_MAX: f64 = 1.0 - 1e-9;
/// Bisection stops once the bracket is this narrow.
pub const BISECTION_TOL: f64 = 1e-12;
/// Numeric and closed-form boundaries agree within this.
pub const MATCH_TOL: f64 = 1e-6;

/// r_c^L = ½ ln(1 + N/2): above it the Case 1 state never disentangles
/// under a single local bath.
pub fn r_critical_local(nbar: f64) -> Result<f64> {
    non_negative("nbar", nbar)?;
    Ok(0.5 * (nbar / 2.0).ln_1p())
}

/// Case 1 disentanglement time under a single local bath,
/// 8e^{4|r|}[2 + N − 2cosh 2|r|] sinh 2|r| / [(2 + N)e^{2|r|} − 2]².
/// `None` when |r| > r_c^L (never dies).
pub fn tau_a(r: f64, nbar: f64) -> Result<Option<f64>> {
    if r.abs() > r_critical_local(nbar)? {
        return Ok(None);
    }
    let r = r.abs();
    let num = 8.0 * (4.0 * r).exp() * (2.0 + nbar - 2.0 * (2.0 * r).cosh()) * (2.0 * r).sinh();
    let den = ((2.0 + nbar) * (2.0 * r).exp() - 2.0).powi(2);
    if den == 0.0 {
        // N = 0 and r = 0: nothing to lose.
        return Ok(Some(0.0));
    }
    Ok(Some(num / den))
}

/// TMSV disentanglement time under a single local bath, 8(2 + N)/(4 + N)².
pub fn tau_b(nbar: f64) -> Result<f64> {
    non_negative("nbar", nbar)?;
    Ok(8.0 * (2.0 + nbar) / (4.0 + nbar).powi(2))
}

/// r_t^L = ½ ln[(2 + N + √(2(2 + 4N + N²)))/(4 + N)], where τ_a = τ_b.
pub fn r_transition_local(nbar: f64) -> Result<f64> {
    non_negative("nbar", nbar)?;
    let n = nbar;
    let root = (2.0 * (2.0 + 4.0 * n + n * n)).sqrt();
    Ok(0.5 * ((2.0 + n + root) / (4.0 + n)).ln())
}

/// r_c^G = ½ ln(2N + 1): above it the TMSV never disentangles in a global bath.
pub fn r_critical_global(nbar: f64) -> Result<f64> {
    non_negative("nbar", nbar)?;
    Ok(0.5 * (2.0 * nbar).ln_1p())
}

/// TMSV disentanglement time in a global bath, 2 sinh 2|r| / (1 − e^{−2|r|} + 2N).
/// `None` when |r| > r_c^G.
pub fn tau_c(r: f64, nbar: f64) -> Result<Option<f64>> {
    if r.abs() > r_critical_global(nbar)? {
        return Ok(None);
    }
    let r = r.abs();
    let den = -(-2.0 * r).exp_m1() + 2.0 * nbar;
    if den == 0.0 {
        return Ok(Some(0.0));
    }
    Ok(Some(2.0 * (2.0 * r).sinh() / den))
}

/// Case 1 disentanglement time in a global bath, 1/(1 + N), independent of r.
pub fn tau_d(nbar: f64) -> Result<f64> {
    non_negative("nbar", nbar)?;
    Ok(1.0 / (1.0 + nbar))
}

/// r_t^G = ½ ln[(1 + 2N + √(1 + 8N + 8N²))/(2(1 + N))], where τ_c = τ_d.
pub fn r_transition_global(nbar: f64) -> Result<f64> {
    non_negative("nbar", nbar)?;
    let n = nbar;
    let root = (1.0 + 8.0 * n + 8.0 * n * n).sqrt();
    Ok(0.5 * ((1.0 + 2.0 * n + root) / (2.0 * (1.0 + n))).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Environment {
    /// Two identical local baths.
    IdenticalLocal,
    /// Only one mode coupled to a local bath.
    SingleLocal,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdSet {
    pub r_c: f64,
    pub r_t: f64,
    pub environment: Environment,
}

impl ThresholdSet {
    pub fn local(nbar: f64) -> Result<Self> {
        Ok(ThresholdSet {
            r_c: r_critical_local(nbar)?,
            r_t: r_transition_local(nbar)?,
            environment: Environment::SingleLocal,
        })
    }

    pub fn global(nbar: f64) -> Result<Self> {
        Ok(ThresholdSet {
            r_c: r_critical_global(nbar)?,
            r_t: r_transition_global(nbar)?,
            environment: Environment::Global,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuddenDeathResult {
    /// First τ at which the state becomes separable; `None` if it stays
    /// entangled on the whole search domain.
    pub tau_star: Option<f64>,
    pub method: Method,
    /// Set when the state re-entangles after the first crossing.
    pub non_monotone: bool,
}

/// Simon expression shifted by its roundoff allowance, so that ≥ 0 means
/// separable.
fn simon_at(
    scenario: Scenario,
    r: f64,
    bath: &BathSpec,
    tau: f64,
    variant: ChannelVariant,
) -> Result<f64> {
    let st = run_scenario(scenario, r, bath, TauTime::new(tau)?, variant)?;
    Ok(simon_lhs_unchecked(&st.cov) + separability_tolerance(&st.cov))
}

/// Smallest τ* with Simon expression = 0, by a uniform scan followed by
/// bisection to [`BISECTION_TOL`].
pub fn sudden_death_numeric(
    scenario: Scenario,
    r: f64,
    bath: &BathSpec,
    variant: ChannelVariant,
) -> Result<SuddenDeathResult> {
    let f = |tau: f64| simon_at(scenario, r, bath, tau, variant);
    let last = BOUNDARY_SCAN_POINTS - 1;
    let grid: Vec<f64> = (0..BOUNDARY_SCAN_POINTS)
        .map(|k| TAU_SEARCH_MAX * k as f64 / last as f64)
        .collect();
    let values = grid.iter().map(|&t| f(t)).collect::<Result<Vec<f64>>>()?;

    let Some(first) = values.iter().position(|&v| v >= 0.0) else {
        return Ok(SuddenDeathResult {
            tau_star: None,
            method: Method::Bisection,
            non_monotone: false,
        });
    };
    let non_monotone = values[first..].iter().any(|&v| v < 0.0);
    if first == 0 {
        return Ok(SuddenDeathResult {
            tau_star: Some(0.0),
            method: Method::Bisection,
            non_monotone,
        });
    }
    let (mut lo, mut hi) = (grid[first - 1], grid[first]);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if non_monotone {
        log::warn!("{scenario} r={r}: separability boundary is crossed more than once");
    }
    Ok(SuddenDeathResult {
        tau_star: Some(0.5 * (lo + hi)),
        method: Method::Bisection,
        non_monotone,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resource {
    Equivalent,
    SqueezingBetter,
    EntanglementBetter,
}

impl Resource {
    /// Robustness read as disentanglement-time ordering: the form whose
    /// final state stays entangled longer wins. `None` means never.
    pub fn from_death_times(squeezing: Option<f64>, entanglement: Option<f64>) -> Resource {
        match (squeezing, entanglement) {
            (None, None) => Resource::Equivalent,
            (None, Some(_)) => Resource::SqueezingBetter,
            (Some(_), None) => Resource::EntanglementBetter,
            (Some(s), Some(e)) if (s - e).abs() <= 1e-9 => Resource::Equivalent,
            (Some(s), Some(e)) if s > e => Resource::SqueezingBetter,
            _ => Resource::EntanglementBetter,
        }
    }
}

/// Resource classification by the closed-form transition squeezing.
pub fn classify_resource(env: Environment, r: f64, nbar: f64) -> Result<Resource> {
    classify_resource_with(env, r, nbar, ThresholdSource::ClosedForm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdSource {
    ClosedForm,
    /// Transition squeezing found numerically under the given local variant.
    Numeric(ChannelVariant),
}

pub fn classify_resource_with(
    env: Environment,
    r: f64,
    nbar: f64,
    source: ThresholdSource,
) -> Result<Resource> {
    non_negative("nbar", nbar)?;
    crate::error::finite("r", r)?;
    let r_t = match (env, source) {
        (Environment::IdenticalLocal, _) => return Ok(Resource::Equivalent),
        (Environment::SingleLocal, ThresholdSource::ClosedForm) => Some(r_transition_local(nbar)?),
        (Environment::Global, ThresholdSource::ClosedForm) => Some(r_transition_global(nbar)?),
        (_, ThresholdSource::Numeric(v)) => numeric_transition(env, nbar, v)?,
    };
    let below = r_t.is_none_or(|rt| r.abs() < rt);
    Ok(match (env, below) {
        (Environment::SingleLocal, true) => Resource::EntanglementBetter,
        (Environment::SingleLocal, false) => Resource::SqueezingBetter,
        (_, true) => Resource::SqueezingBetter,
        (_, false) => Resource::EntanglementBetter,
    })
}

fn env_setup(env: Environment, nbar: f64) -> Result<(BathSpec, Scenario, Scenario)> {
    Ok(match env {
        Environment::IdenticalLocal => (
            BathSpec::Local(LocalBathSpec::identical(1.0, nbar)?),
            Scenario::LocalCase1,
            Scenario::LocalCase2,
        ),
        Environment::SingleLocal => (
            BathSpec::Local(LocalBathSpec::single(1.0, nbar)?),
            Scenario::LocalCase1,
            Scenario::LocalCase2,
        ),
        Environment::Global => (
            BathSpec::Global(GlobalBathSpec::new(1.0, nbar)?),
            Scenario::GlobalCase1,
            Scenario::GlobalCase2,
        ),
    })
}

/// Numeric robustness comparison: Case 1 stores the resource as squeezing
/// during dissipation, Case 2 as entanglement.
pub fn classify_resource_numeric(
    env: Environment,
    r: f64,
    nbar: f64,
    variant: ChannelVariant,
) -> Result<Resource> {
    let (bath, squeeze_case, ent_case) = env_setup(env, nbar)?;
    let s = sudden_death_numeric(squeeze_case, r, &bath, variant)?.tau_star;
    let e = sudden_death_numeric(ent_case, r, &bath, variant)?.tau_star;
    Ok(Resource::from_death_times(s, e))
}

/// Smallest r > 0 at which the numeric robustness ordering flips, searched
/// on (0, 3]. `None` if it never flips there.
pub fn numeric_transition(
    env: Environment,
    nbar: f64,
    variant: ChannelVariant,
) -> Result<Option<f64>> {
    const R_MIN: f64 = 1e-3;
    const R_MAX: f64 = 3.0;
    const SCAN: usize = 300;
    let order = |r: f64| classify_resource_numeric(env, r, nbar, variant);
    let start = order(R_MIN)?;
    let mut prev = R_MIN;
    for k in 1..=SCAN {
        let r = R_MIN + (R_MAX - R_MIN) * k as f64 / SCAN as f64;
        if order(r)? != start {
            let (mut lo, mut hi) = (prev, r);
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if order(mid)? == start {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev = r;
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    pub tau: f64,
    pub e_n: f64,
    pub lambda_min: f64,
    pub simon_lhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioCurve {
    pub scenario: Scenario,
    pub r: f64,
    pub bath: BathSpec,
    pub variant: ChannelVariant,
    pub samples: Vec<CurveSample>,
}

/// E_N, smallest quadrature variance and Simon expression on a uniform
/// τ grid over [0, 1] with `steps` points.
pub fn sweep(
    scenario: Scenario,
    r: f64,
    bath: &BathSpec,
    variant: ChannelVariant,
    steps: usize,
) -> Result<ScenarioCurve> {
    sweep_with(scenario, r, bath, variant, steps, Execution::default())
}

pub fn sweep_with(
    scenario: Scenario,
    r: f64,
    bath: &BathSpec,
    variant: ChannelVariant,
    steps: usize,
    exec: Execution,
) -> Result<ScenarioCurve> {
    if steps < 2 {
        return Err(Error::OutOfRange {
            name: "steps",
            value: steps as f64,
            expected: ">= 2",
        });
    }
    let taus: Vec<f64> = (0..steps).map(|k| k as f64 / (steps - 1) as f64).collect();
    let samples = exec
        .map(&taus, |&tau| -> Result<CurveSample> {
            let st = run_scenario(scenario, r, bath, TauTime::new(tau)?, variant)?;
            let rep = entanglement_report(&st.cov)?;
            Ok(CurveSample {
                tau,
                e_n: rep.log_negativity,
                lambda_min: min_quadrature_variance(&st.cov),
                simon_lhs: rep.simon_lhs,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioCurve {
        scenario,
        r,
        bath: *bath,
        variant,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedForm {
    TauA,
    TauB,
    TauC,
    TauD,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyRow {
    /// `None` for global rows, where the variant plays no role.
    pub variant: Option<ChannelVariant>,
    pub scenario: Scenario,
    pub nbar: f64,
    pub r: f64,
    pub closed_form_name: ClosedForm,
    /// `None` means "never disentangles" (τ ≥ 1 is only reached at t = ∞).
    pub numeric: Option<f64>,
    pub closed_form: Option<f64>,
    pub abs_diff: Option<f64>,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub nbar: f64,
    pub r_grid: Vec<f64>,
    pub match_tol: f64,
    pub rows: Vec<DiscrepancyRow>,
    /// Variants whose Case 1 boundary matches τ_a at every r.
    pub tau_a_consistent_variants: Vec<ChannelVariant>,
    /// Variants whose Case 2 boundary matches τ_b at every r.
    pub tau_b_consistent_variants: Vec<ChannelVariant>,
    pub global_all_match: bool,
}

fn finite_time(tau: Option<f64>) -> Option<f64> {
    tau.filter(|&t| t < 1.0)
}

/// Numeric boundary vs every closed-form sudden-death time, per variant
/// for the single local bath and once for the global bath.
pub fn discrepancy_report(nbar: f64, r_grid: &[f64]) -> Result<DiscrepancyReport> {
    discrepancy_report_with(nbar, r_grid, Execution::default())
}

pub fn discrepancy_report_with(
    nbar: f64,
    r_grid: &[f64],
    exec: Execution,
) -> Result<DiscrepancyReport> {
    non_negative("nbar", nbar)?;
    let local = BathSpec::Local(LocalBathSpec::single(1.0, nbar)?);
    let global = BathSpec::Global(GlobalBathSpec::new(1.0, nbar)?);

    let mut jobs: Vec<(Option<ChannelVariant>, Scenario, f64)> = Vec::new();
    for &r in r_grid {
        for v in ChannelVariant::ALL {
            jobs.push((Some(v), Scenario::LocalCase1, r));
            jobs.push((Some(v), Scenario::LocalCase2, r));
        }
        jobs.push((None, Scenario::GlobalCase1, r));
        jobs.push((None, Scenario::GlobalCase2, r));
    }

    let rows = exec
        .map(&jobs, |&(variant, scenario, r)| -> Result<DiscrepancyRow> {
            let (bath, name, closed) = match scenario {
                Scenario::LocalCase1 => (&local, ClosedForm::TauA, tau_a(r, nbar)?),
                Scenario::LocalCase2 => (&local, ClosedForm::TauB, Some(tau_b(nbar)?)),
                Scenario::GlobalCase1 => (&global, ClosedForm::TauD, Some(tau_d(nbar)?)),
                Scenario::GlobalCase2 => (&global, ClosedForm::TauC, tau_c(r, nbar)?),
            };
            let numeric =
                sudden_death_numeric(scenario, r, bath, variant.unwrap_or_default())?.tau_star;
            let closed = finite_time(closed);
            let numeric = finite_time(numeric);
            let abs_diff = match (numeric, closed) {
                (Some(a), Some(b)) => Some((a - b).abs()),
                _ => None,
            };
            let matches = match (numeric, closed) {
                (None, None) => true,
                _ => abs_diff.is_some_and(|d| d <= MATCH_TOL),
            };
            Ok(DiscrepancyRow {
                variant,
                scenario,
                nbar,
                r,
                closed_form_name: name,
                numeric,
                closed_form: closed,
                abs_diff,
                matches,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let consistent = |scenario: Scenario| -> Vec<ChannelVariant> {
        ChannelVariant::ALL
            .into_iter()
            .filter(|&v| {
                rows.iter()
                    .filter(|row| row.scenario == scenario && row.variant == Some(v))
                    .all(|row| row.matches)
            })
            .collect()
    };
    let tau_a_consistent_variants = consistent(Scenario::LocalCase1);
    let tau_b_consistent_variants = consistent(Scenario::LocalCase2);
    let global_all_match = rows
        .iter()
        .filter(|row| row.variant.is_none())
        .all(|row| row.matches);

    Ok(DiscrepancyReport {
        nbar,
        r_grid: r_grid.to_vec(),
        match_tol: MATCH_TOL,
        rows,
        tau_a_consistent_variants,
        tau_b_consistent_variants,
        global_all_match,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LOG2_E;

    #[test]
    fn critical_local() {
        assert_abs_diff_eq!(r_critical_local(4.0).unwrap(), 0.549306, epsilon = 1e-6);
        assert_eq!(r_critical_local(0.0).unwrap(), 0.0);
        assert!(r_critical_local(-1.0).is_err());
        for n in [1.0, 2.0, 4.0, 8.0] {
            let t = tau_a(r_critical_local(n).unwrap(), n).unwrap().unwrap();
            assert_abs_diff_eq!(t, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn tau_a_examples() {
        assert_eq!(tau_a(0.0, 4.0).unwrap(), Some(0.0));
        assert_eq!(tau_a(0.0, 0.0).unwrap(), Some(0.0));
        let t = tau_a(0.2, 4.0).unwrap().unwrap();
        assert!(t > 0.0 && t < 1.0);
        assert_eq!(tau_a(0.6, 4.0).unwrap(), None);
        assert_eq!(tau_a(-0.2, 4.0).unwrap(), tau_a(0.2, 4.0).unwrap());
    }

    #[test]
    fn tau_b_examples() {
        assert_abs_diff_eq!(tau_b(4.0).unwrap(), 0.75, epsilon = 1e-15);
        assert_eq!(tau_b(0.0).unwrap(), 1.0);
    }

    #[test]
    fn transition_local() {
        let n = 4.0;
        let rt = r_transition_local(n).unwrap();
        assert_abs_diff_eq!(rt, 0.288525, epsilon = 1e-6);
        assert!((rt - 0.29).abs() < 5e-3);
        assert_abs_diff_eq!(
            tau_a(rt, n).unwrap().unwrap(),
            tau_b(n).unwrap(),
            epsilon = 1e-9
        );
        assert_eq!(r_transition_local(0.0).unwrap(), 0.0);
    }

    #[test]
    fn global_closed_forms() {
        assert_abs_diff_eq!(r_critical_global(4.0).unwrap(), 1.098612, epsilon = 1e-6);
        assert_eq!(r_critical_global(0.0).unwrap(), 0.0);
        for n in [1.0, 4.0, 10.0] {
            let t = tau_c(r_critical_global(n).unwrap(), n).unwrap().unwrap();
            assert_abs_diff_eq!(t, 1.0, epsilon = 1e-12);
        }
        assert_eq!(tau_c(0.0, 4.0).unwrap(), Some(0.0));
        assert_abs_diff_eq!(tau_c(0.2, 4.0).unwrap().unwrap(), 0.0986238, epsilon = 1e-7);
        assert_abs_diff_eq!(tau_c(1.0986, 4.0).unwrap().unwrap(), 1.0, epsilon = 1e-4);
        assert_eq!(tau_c(1.6, 4.0).unwrap(), None);
        assert_abs_diff_eq!(tau_d(4.0).unwrap(), 0.2, epsilon = 1e-15);
        assert_eq!(tau_d(0.0).unwrap(), 1.0);
        let rt = r_transition_global(4.0).unwrap();
        assert_abs_diff_eq!(rt, 0.387100, epsilon = 1e-6);
        assert!((rt - 0.39).abs() < 5e-3);
        assert_abs_diff_eq!(tau_c(rt, 4.0).unwrap().unwrap(), 0.2, epsilon = 1e-9);
        assert_eq!(r_transition_global(0.0).unwrap(), 0.0);
    }

    #[test]
    fn threshold_ordering() {
        for k in 1..=1000 {
            let n = k as f64 * 0.1;
            let l = ThresholdSet::local(n).unwrap();
            let g = ThresholdSet::global(n).unwrap();
            assert!(0.0 < l.r_t && l.r_t < l.r_c, "N={n}");
            assert!(0.0 < g.r_t && g.r_t < g.r_c, "N={n}");
        }
    }

    #[test]
    fn boundary_identities_on_grid() {
        for k in 1..=40 {
            let n = k as f64 * 0.25;
            let tb = tau_b(n).unwrap();
            let td = tau_d(n).unwrap();
            assert!((tau_a(r_critical_local(n).unwrap(), n).unwrap().unwrap() - 1.0).abs() <= 1e-9);
            assert!(
                (tau_c(r_critical_global(n).unwrap(), n).unwrap().unwrap() - 1.0).abs() <= 1e-9
            );
            assert!(
                (tau_a(r_transition_local(n).unwrap(), n).unwrap().unwrap() - tb).abs() <= 1e-9
            );
            assert!(
                (tau_c(r_transition_global(n).unwrap(), n).unwrap().unwrap() - td).abs() <= 1e-9
            );
        }
    }

    #[test]
    fn classifier_table() {
        use Resource::*;
        assert_eq!(
            classify_resource(Environment::SingleLocal, 0.2, 4.0).unwrap(),
            EntanglementBetter
        );
        assert_eq!(
            classify_resource(Environment::SingleLocal, 0.4, 4.0).unwrap(),
            SqueezingBetter
        );
        assert_eq!(
            classify_resource(Environment::Global, 0.2, 4.0).unwrap(),
            SqueezingBetter
        );
        assert_eq!(
            classify_resource(Environment::Global, 0.6, 4.0).unwrap(),
            EntanglementBetter
        );
        for r in [0.0, 0.3, 5.0] {
            for n in [0.0, 4.0] {
                assert_eq!(
                    classify_resource(Environment::IdenticalLocal, r, n).unwrap(),
                    Equivalent
                );
            }
        }
    }

    #[test]
    fn death_time_ordering() {
        use Resource::*;
        assert_eq!(
            Resource::from_death_times(Some(0.2), Some(0.1)),
            SqueezingBetter
        );
        assert_eq!(
            Resource::from_death_times(Some(0.2), None),
            EntanglementBetter
        );
        assert_eq!(
            Resource::from_death_times(None, Some(0.75)),
            SqueezingBetter
        );
        assert_eq!(Resource::from_death_times(Some(0.3), Some(0.3)), Equivalent);
        assert_eq!(Resource::from_death_times(None, None), Equivalent);
    }

    #[test]
    fn global_case2_numeric_boundary() {
        let bath = BathSpec::Global(GlobalBathSpec::new(1.0, 4.0).unwrap());
        let res =
            sudden_death_numeric(Scenario::GlobalCase2, 0.2, &bath, ChannelVariant::default())
                .unwrap();
        assert_abs_diff_eq!(res.tau_star.unwrap(), 0.098624, epsilon = 1e-6);
        assert!(!res.non_monotone);
        let res =
            sudden_death_numeric(Scenario::GlobalCase2, 1.6, &bath, ChannelVariant::default())
                .unwrap();
        assert_eq!(res.tau_star, None);
        // r = 0 starts on the boundary.
        let res =
            sudden_death_numeric(Scenario::GlobalCase2, 0.0, &bath, ChannelVariant::default())
                .unwrap();
        assert_eq!(res.tau_star, Some(0.0));
    }

    #[test]
    fn sweep_rejects_short_grid() {
        let bath = BathSpec::Global(GlobalBathSpec::new(1.0, 4.0).unwrap());
        assert!(sweep(
            Scenario::GlobalCase2,
            0.2,
            &bath,
            ChannelVariant::default(),
            1
        )
        .is_err());
    }

    #[test]
    fn sweep_global_case2() {
        let bath = BathSpec::Global(GlobalBathSpec::new(1.0, 4.0).unwrap());
        let curve = sweep(
            Scenario::GlobalCase2,
            0.2,
            &bath,
            ChannelVariant::default(),
            201,
        )
        .unwrap();
        assert_eq!(curve.samples.len(), 201);
        assert_abs_diff_eq!(curve.samples[0].e_n, 0.4 * LOG2_E, epsilon = 1e-12);
        assert_abs_diff_eq!(curve.samples[0].e_n, 0.57708, epsilon = 1e-5);
        for s in curve.samples.iter().filter(|s| s.tau >= 0.0987) {
            assert_eq!(s.e_n, 0.0, "tau={}", s.tau);
        }
        assert_eq!(curve.samples.last().unwrap().tau, 1.0);
        let seq = sweep_with(
            Scenario::GlobalCase2,
            0.2,
            &bath,
            ChannelVariant::default(),
            201,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(seq, curve);
    }

    #[test]
    fn report_shape() {
        let rep = discrepancy_report(4.0, &[0.1, 0.4]).unwrap();
        // Per r: 3 variants × 2 local closed forms + 2 global.
        assert_eq!(rep.rows.len(), 2 * 8);
        for &r in &[0.1, 0.4] {
            for name in [ClosedForm::TauC, ClosedForm::TauD] {
                assert_eq!(
                    rep.rows
                        .iter()
                        .filter(|x| x.r == r && x.closed_form_name == name)
                        .count(),
                    1
                );
            }
            for v in ChannelVariant::ALL {
                for name in [ClosedForm::TauA, ClosedForm::TauB] {
                    let n = rep
                        .rows
                        .iter()
                        .filter(|x| x.r == r && x.closed_form_name == name && x.variant == Some(v))
                        .count();
                    assert_eq!(n, 1);
                }
            }
        }
        assert!(rep.global_all_match);
        assert_eq!(
            rep.tau_b_consistent_variants,
            vec![ChannelVariant::ThresholdConsistent]
        );
    }
}
