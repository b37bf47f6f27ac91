//! Closed-form thermal-bath channels on two-mode covariance matrices, and
//! the squeeze → mix/dissipate pipelines built from them.
//!
//! Time enters through the dimensionless τ = 1 − e^{−2γt} ∈ [0, 1].

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{finite, non_negative, Error, Result};
use crate::gaussian::{
    apply_symplectic, balanced_beam_splitter, two_mode_local_squeezer, vacuum_state, CovMatrix,
    GaussianState,
};

/// Dimensionless interaction time in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct TauTime(f64);

impl TauTime {
    pub const ZERO: TauTime = TauTime(0.0);
    pub const ONE: TauTime = TauTime(1.0);

    pub fn new(tau: f64) -> Result<Self> {
        finite("tau", tau)?;
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::OutOfRange {
                name: "tau",
                value: tau,
                expected: "[0, 1]",
            });
        }
        Ok(TauTime(tau))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// e^{−2γt} = 1 − τ.
    pub fn survival(self) -> f64 {
        1.0 - self.0
    }
}

/// τ = 1 − e^{−2γt}.
pub fn time_to_tau(gamma: f64, t: f64) -> Result<TauTime> {
    non_negative("gamma", gamma)?;
    non_negative("t", t)?;
    TauTime::new(-(-2.0 * gamma * t).exp_m1())
}

/// t = −ln(1 − τ)/(2γ); τ = 1 is reached only at t = ∞.
pub fn tau_to_time(gamma: f64, tau: TauTime) -> Result<f64> {
    finite("gamma", gamma)?;
    if gamma <= 0.0 {
        return Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
            expected: "> 0",
        });
    }
    if tau.0 >= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-(-tau.0).ln_1p() / (2.0 * gamma))
}

/// Two independent thermal baths, one per mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalBathSpec {
    pub gamma1: f64,
    pub gamma2: f64,
    pub nbar1: f64,
    pub nbar2: f64,
}

impl LocalBathSpec {
    pub fn new(gamma1: f64, gamma2: f64, nbar1: f64, nbar2: f64) -> Result<Self> {
        Ok(LocalBathSpec {
            gamma1: non_negative("gamma1", gamma1)?,
            gamma2: non_negative("gamma2", gamma2)?,
            nbar1: non_negative("nbar1", nbar1)?,
            nbar2: non_negative("nbar2", nbar2)?,
        })
    }

    /// Both modes see the same bath.
    pub fn identical(gamma: f64, nbar: f64) -> Result<Self> {
        Self::new(gamma, gamma, nbar, nbar)
    }

    /// Only mode 1 is coupled (γ₂ = N₂ = 0).
    pub fn single(gamma: f64, nbar: f64) -> Result<Self> {
        Self::new(gamma, 0.0, nbar, 0.0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.gamma1 == self.gamma2 && self.nbar1 == self.nbar2
    }

    /// Per-mode τᵢ for a common interaction time, with `tau` measured on the
    /// faster of the two rates: τᵢ = 1 − (1 − τ)^{γᵢ/γ_max}.
    pub fn mode_taus(&self, tau: TauTime) -> (TauTime, TauTime) {
        let g = self.gamma1.max(self.gamma2);
        if g == 0.0 {
            return (TauTime::ZERO, TauTime::ZERO);
        }
        let per = |gi: f64| {
            if gi == g {
                tau
            } else {
                TauTime((1.0 - tau.survival().powf(gi / g)).clamp(0.0, 1.0))
            }
        };
        (per(self.gamma1), per(self.gamma2))
    }
}

/// One thermal bath shared by both modes, with correlated dissipation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalBathSpec {
    pub gamma: f64,
    pub nbar: f64,
}

impl GlobalBathSpec {
    pub fn new(gamma: f64, nbar: f64) -> Result<Self> {
        Ok(GlobalBathSpec {
            gamma: non_negative("gamma", gamma)?,
            nbar: non_negative("nbar", nbar)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BathSpec {
    Local(LocalBathSpec),
    Global(GlobalBathSpec),
}

impl BathSpec {
    fn label(&self) -> &'static str {
        match self {
            BathSpec::Local(_) => "local",
            BathSpec::Global(_) => "global",
        }
    }
}

/// Which noise term the local map uses.
///
/// All three share the damping X = (1 − τᵢ)^{1/4}·I₂ per mode and differ in
/// the added noise ½Y:
/// * `PaperLiteral`: Yᵢ = (Nᵢ/2 + 1)τᵢ;
/// * `LindbladDerived`: Yᵢ = (2Nᵢ + 1)(1 − √(1 − τᵢ)), the solution of the
///   local master equation, with fixed point (Nᵢ + ½)·I₂;
/// * `ThresholdConsistent`: Yᵢ = (Nᵢ/4 + 1)τᵢ, the τ-linear noise whose TMSV
///   separability boundary is 8(2 + N)/(4 + N)².
///
/// Only `LindbladDerived` is a Markovian semigroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelVariant {
    #[default]
    PaperLiteral,
    LindbladDerived,
    ThresholdConsistent,
}

impl ChannelVariant {
    pub const ALL: [ChannelVariant; 3] = [
        ChannelVariant::PaperLiteral,
        ChannelVariant::LindbladDerived,
        ChannelVariant::ThresholdConsistent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelVariant::PaperLiteral => "paper-literal",
            ChannelVariant::LindbladDerived => "lindblad-derived",
            ChannelVariant::ThresholdConsistent => "threshold-consistent",
        }
    }

    /// Diagonal entry of Y for one mode.
    pub fn noise(self, tau: TauTime, nbar: f64) -> f64 {
        let t = tau.0;
        match self {
            ChannelVariant::PaperLiteral => (nbar / 2.0 + 1.0) * t,
            ChannelVariant::LindbladDerived => (2.0 * nbar + 1.0) * (1.0 - (1.0 - t).sqrt()),
            ChannelVariant::ThresholdConsistent => (nbar / 4.0 + 1.0) * t,
        }
    }
}

impl fmt::Display for ChannelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ChannelVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant `{s}` (expected paper-literal, lindblad-derived or threshold-consistent)"))
    }
}

/// Case 1 dissipates before the balanced beam splitter, Case 2 after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    LocalCase1,
    LocalCase2,
    GlobalCase1,
    GlobalCase2,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::LocalCase1,
        Scenario::LocalCase2,
        Scenario::GlobalCase1,
        Scenario::GlobalCase2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::LocalCase1 => "local-case1",
            Scenario::LocalCase2 => "local-case2",
            Scenario::GlobalCase1 => "global-case1",
            Scenario::GlobalCase2 => "global-case2",
        }
    }

    pub fn is_local(self) -> bool {
        matches!(self, Scenario::LocalCase1 | Scenario::LocalCase2)
    }

    /// Resource stored as squeezing during the dissipation.
    pub fn mixes_after_bath(self) -> bool {
        matches!(self, Scenario::LocalCase1 | Scenario::GlobalCase1)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}` (expected local-case1, local-case2, global-case1 or global-case2)"))
    }
}

/// V′ = X V Xᵀ + ½Y, mean′ = X·mean, with X and Y diagonal per mode.
pub fn local_bath_map(
    state: &GaussianState,
    tau1: TauTime,
    tau2: TauTime,
    spec: &LocalBathSpec,
    variant: ChannelVariant,
) -> GaussianState {
    let x1 = tau1.survival().powf(0.25);
    let x2 = tau2.survival().powf(0.25);
    let y1 = variant.noise(tau1, spec.nbar1);
    let y2 = variant.noise(tau2, spec.nbar2);
    let x = Vector4::new(x1, x1, x2, x2);
    let y = Vector4::new(y1, y1, y2, y2);

    let v = state.cov.matrix();
    let out = Matrix4::from_fn(|i, j| {
        let noise = if i == j { 0.5 * y[i] } else { 0.0 };
        x[i] * v[(i, j)] * x[j] + noise
    });
    GaussianState::from_parts_unchecked(
        state.mean.component_mul(&x),
        CovMatrix::from_congruence(out),
    )
}

/// Global bath: in the collective basis (B(π/4) rotation) the centre-of-mass
/// mode is a thermal attenuator with transmissivity 1 − τ and the relative
/// mode is untouched.
pub fn global_bath_map(
    state: &GaussianState,
    tau: TauTime,
    spec: &GlobalBathSpec,
) -> GaussianState {
    if tau.0 == 0.0 {
        return *state;
    }
    let to_collective = balanced_beam_splitter();
    let back = to_collective.inverse();
    let coll = apply_symplectic(&to_collective, state);

    let amp = tau.survival().sqrt();
    let scale = Vector4::new(amp, amp, 1.0, 1.0);
    let v = coll.cov.matrix();
    let noise = tau.0 * (spec.nbar + 0.5);
    let damped = Matrix4::from_fn(|i, j| {
        let add = if i == j && i < 2 { noise } else { 0.0 };
        scale[i] * v[(i, j)] * scale[j] + add
    });
    let coll = GaussianState::from_parts_unchecked(
        coll.mean.component_mul(&scale),
        CovMatrix::from_congruence(damped),
    );
    apply_symplectic(&back, &coll)
}

/// Separable squeezed state: vacuum through S₁(r) ⊕ S₂(−r).
pub fn separable_squeezed_state(r: f64) -> Result<GaussianState> {
    Ok(apply_symplectic(
        &two_mode_local_squeezer(r, -r)?,
        &vacuum_state(),
    ))
}

/// Two-mode squeezed vacuum: the separable squeezed state after B(π/4).
pub fn tmsv_state(r: f64) -> Result<GaussianState> {
    Ok(apply_symplectic(
        &balanced_beam_splitter(),
        &separable_squeezed_state(r)?,
    ))
}

/// Runs one pipeline from the vacuum to the final two-mode state.
///
/// For local baths `tau` is measured on the faster rate; see
/// [`LocalBathSpec::mode_taus`]. `variant` only affects local baths.
pub fn run_scenario(
    scenario: Scenario,
    r: f64,
    bath: &BathSpec,
    tau: TauTime,
    variant: ChannelVariant,
) -> Result<GaussianState> {
    let dissipate = |st: &GaussianState| -> Result<GaussianState> {
        match (scenario.is_local(), bath) {
            (true, BathSpec::Local(spec)) => {
                let (t1, t2) = spec.mode_taus(tau);
                Ok(local_bath_map(st, t1, t2, spec, variant))
            }
            (false, BathSpec::Global(spec)) => Ok(global_bath_map(st, tau, spec)),
            _ => Err(Error::BathMismatch {
                scenario: scenario.name(),
                bath: bath.label(),
            }),
        }
    };
    let bs = balanced_beam_splitter();
    let squeezed = separable_squeezed_state(r)?;
    if scenario.mixes_after_bath() {
        Ok(apply_symplectic(&bs, &dissipate(&squeezed)?))
    } else {
        dissipate(&apply_symplectic(&bs, &squeezed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{
        check_uncertainty, phase_rotation, single_mode_squeezer, Mode, PHYSICALITY_TOL,
    };
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tau(t: f64) -> TauTime {
        TauTime::new(t).unwrap()
    }

    fn max_diff(a: &GaussianState, b: &GaussianState) -> f64 {
        a.cov.max_abs_diff(&b.cov).max((a.mean - b.mean).amax())
    }

    fn random_state(rng: &mut ChaCha8Rng) -> GaussianState {
        let n1 = rng.random_range(0.0..2.0);
        let n2 = rng.random_range(0.0..2.0);
        let base = GaussianState::new(
            Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0)),
            CovMatrix::from_diagonal([n1 + 0.5, n1 + 0.5, n2 + 0.5, n2 + 0.5]).unwrap(),
        )
        .unwrap();
        let s = phase_rotation(rng.random_range(-3.0..3.0), Mode::One).unwrap()
            * crate::gaussian::beam_splitter(rng.random_range(-3.0..3.0)).unwrap()
            * single_mode_squeezer(rng.random_range(-1.0..1.0), Mode::Two).unwrap()
            * single_mode_squeezer(rng.random_range(-1.0..1.0), Mode::One).unwrap();
        apply_symplectic(&s, &base)
    }

    #[test]
    fn tau_validation() {
        assert!(TauTime::new(-0.1).is_err());
        assert!(TauTime::new(1.1).is_err());
        assert!(TauTime::new(f64::NAN).is_err());
        assert!(LocalBathSpec::new(1.0, 1.0, -1.0, 0.0).is_err());
        assert!(GlobalBathSpec::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn tau_time_conversions() {
        assert_eq!(time_to_tau(1.0, 0.0).unwrap().value(), 0.0);
        assert_eq!(time_to_tau(0.5, 1e6).unwrap().value(), 1.0);
        let t = tau_to_time(1.3, tau(0.37)).unwrap();
        assert_abs_diff_eq!(time_to_tau(1.3, t).unwrap().value(), 0.37, epsilon = 1e-12);
        assert_eq!(tau_to_time(1.0, TauTime::ONE).unwrap(), f64::INFINITY);
        assert!(tau_to_time(0.0, tau(0.5)).is_err());
    }

    #[test]
    fn mode_taus_follow_rates() {
        let spec = LocalBathSpec::new(2.0, 1.0, 0.0, 0.0).unwrap();
        let (t1, t2) = spec.mode_taus(tau(0.75));
        assert_eq!(t1.value(), 0.75);
        assert_abs_diff_eq!(t2.value(), 0.5, epsilon = 1e-15);
        let single = LocalBathSpec::single(1.0, 4.0).unwrap();
        assert_eq!(
            single.mode_taus(TauTime::ONE),
            (TauTime::ONE, TauTime::ZERO)
        );
    }

    #[test]
    fn local_map_limits() {
        let st = tmsv_state(0.4).unwrap();
        let spec = LocalBathSpec::identical(1.0, 4.0).unwrap();
        for v in ChannelVariant::ALL {
            let out = local_bath_map(&st, TauTime::ZERO, TauTime::ZERO, &spec, v);
            assert!(max_diff(&out, &st) == 0.0, "{v}");
        }
        let out = local_bath_map(
            &st,
            TauTime::ONE,
            TauTime::ONE,
            &spec,
            ChannelVariant::PaperLiteral,
        );
        assert!(
            out.cov
                .max_abs_diff(&CovMatrix::scaled_identity(1.5).unwrap())
                < 1e-15
        );
        let out = local_bath_map(
            &st,
            TauTime::ONE,
            TauTime::ONE,
            &spec,
            ChannelVariant::LindbladDerived,
        );
        assert!(
            out.cov
                .max_abs_diff(&CovMatrix::scaled_identity(4.5).unwrap())
                < 1e-15
        );
    }

    #[test]
    fn lindblad_variant_is_a_semigroup() {
        let spec = LocalBathSpec::new(1.0, 0.5, 4.0, 1.0).unwrap();
        let st = tmsv_state(0.6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let (a, b) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            let (c, d) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            let v = ChannelVariant::LindbladDerived;
            let two = local_bath_map(
                &local_bath_map(&st, tau(a), tau(c), &spec, v),
                tau(b),
                tau(d),
                &spec,
                v,
            );
            let one = local_bath_map(
                &st,
                tau(1.0 - (1.0 - a) * (1.0 - b)),
                tau(1.0 - (1.0 - c) * (1.0 - d)),
                &spec,
                v,
            );
            assert!(max_diff(&two, &one) <= 1e-12);
        }
    }

    #[test]
    fn printed_variants_are_not_semigroups() {
        let spec = LocalBathSpec::identical(1.0, 4.0).unwrap();
        let st = tmsv_state(0.3).unwrap();
        for v in [
            ChannelVariant::PaperLiteral,
            ChannelVariant::ThresholdConsistent,
        ] {
            let h = tau(0.5);
            let two = local_bath_map(&local_bath_map(&st, h, h, &spec, v), h, h, &spec, v);
            let one = local_bath_map(&st, tau(0.75), tau(0.75), &spec, v);
            assert!(max_diff(&two, &one) > 1e-6, "{v}");
        }
    }

    #[test]
    fn outputs_stay_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        for _ in 0..1000 {
            let st = random_state(&mut rng);
            let spec = LocalBathSpec::new(
                rng.random_range(0.0..2.0),
                rng.random_range(0.0..2.0),
                rng.random_range(0.0..5.0),
                rng.random_range(0.0..5.0),
            )
            .unwrap();
            let gspec = GlobalBathSpec::new(1.0, rng.random_range(0.0..5.0)).unwrap();
            for &t in &grid {
                let (t1, t2) = spec.mode_taus(tau(t));
                for v in ChannelVariant::ALL {
                    assert!(check_uncertainty(
                        &local_bath_map(&st, t1, t2, &spec, v).cov,
                        PHYSICALITY_TOL
                    ));
                }
                assert!(check_uncertainty(
                    &global_bath_map(&st, tau(t), &gspec).cov,
                    PHYSICALITY_TOL
                ));
            }
        }
    }

    #[test]
    fn global_map_leaves_relative_mode_alone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bs = balanced_beam_splitter();
        for _ in 0..200 {
            let st = random_state(&mut rng);
            let spec = GlobalBathSpec::new(1.0, rng.random_range(0.0..5.0)).unwrap();
            let out = global_bath_map(&st, tau(rng.random_range(0.0..1.0)), &spec);
            let before = bs.transform_cov(&st.cov);
            let after = bs.transform_cov(&out.cov);
            for i in 2..4 {
                for j in 2..4 {
                    assert!(
                        (before.entry(i, j) - after.entry(i, j)).abs()
                            <= 1e-14 * before.matrix().amax().max(1.0)
                    );
                }
            }
        }
    }

    #[test]
    fn global_vacuum_is_fixed_at_zero_temperature() {
        let spec = GlobalBathSpec::new(1.0, 0.0).unwrap();
        for k in 0..=10 {
            let out = global_bath_map(&vacuum_state(), tau(k as f64 / 10.0), &spec);
            assert!(max_diff(&out, &vacuum_state()) <= 1e-14);
        }
    }

    #[test]
    fn global_vacuum_collective_noise() {
        let spec = GlobalBathSpec::new(1.0, 4.0).unwrap();
        let out = global_bath_map(&vacuum_state(), tau(0.5), &spec);
        let coll = balanced_beam_splitter().transform_cov(&out.cov);
        let expect = CovMatrix::from_diagonal([2.5, 2.5, 0.5, 0.5]).unwrap();
        assert!(coll.max_abs_diff(&expect) < 1e-14);
        assert_eq!(global_bath_map(&out, TauTime::ZERO, &spec), out);
    }

    /// Printed covariance after the global bath and the final beam splitter
    /// for the separable squeezed input (halved entries).
    fn printed_global_case1(r: f64, n: f64, t: f64) -> Matrix4<f64> {
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let s1 = (2.0 * n + 1.0) * t - c * (t - 1.0);
        let s2 = c;
        let s3 = s * (1.0 - t).sqrt();
        Matrix4::new(
            s1, 0.0, s3, 0.0, 0.0, s1, 0.0, -s3, s3, 0.0, s2, 0.0, 0.0, -s3, 0.0, s2,
        ) * 0.5
    }

    /// Printed intermediate covariance (before the beam splitter), quartered entries.
    fn printed_global_case1_intermediate(r: f64, n: f64, t: f64) -> Matrix4<f64> {
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let root = (1.0 - t).sqrt();
        let s1 = (2.0 * n + 1.0) * t - c * (t - 2.0) - 2.0 * s * root;
        let s2 = (2.0 * n + 1.0) * t - c * (t - 2.0) + 2.0 * s * root;
        let s3 = (2.0 * n + 1.0 - c) * t;
        Matrix4::new(
            s1, 0.0, s3, 0.0, 0.0, s2, 0.0, s3, s3, 0.0, s2, 0.0, 0.0, s3, 0.0, s1,
        ) * 0.25
    }

    fn printed_global_case2(r: f64, n: f64, t: f64) -> Matrix4<f64> {
        let (c, s, e) = ((2.0 * r).cosh(), (2.0 * r).sinh(), (2.0 * r).exp());
        let d1 = 0.5 * (2.0 * n + 1.0 - e) * t + c;
        let d2 = 0.5 * (2.0 * n + 1.0 - 1.0 / e) * t + c;
        let d3 = 0.5 * (2.0 * n + 1.0 - e) * t + s;
        let d4 = 0.5 * (2.0 * n + 1.0 - 1.0 / e) * t - s;
        Matrix4::new(
            d1, 0.0, d3, 0.0, 0.0, d2, 0.0, d4, d3, 0.0, d1, 0.0, 0.0, d4, 0.0, d2,
        ) * 0.5
    }

    #[test]
    fn global_map_reproduces_printed_matrices() {
        for &(r, n) in &[(0.2_f64, 4.0_f64), (0.7, 1.0), (1.6, 0.0), (0.05, 10.0)] {
            let bath = BathSpec::Global(GlobalBathSpec::new(1.0, n).unwrap());
            for k in 0..=20 {
                let t = k as f64 / 20.0;
                let scale = (2.0 * r).cosh() + n;
                let c1 = run_scenario(
                    Scenario::GlobalCase1,
                    r,
                    &bath,
                    tau(t),
                    ChannelVariant::default(),
                )
                .unwrap();
                assert!((c1.cov.matrix() - printed_global_case1(r, n, t)).amax() <= 1e-12 * scale);
                let mid = global_bath_map(
                    &separable_squeezed_state(r).unwrap(),
                    tau(t),
                    &GlobalBathSpec::new(1.0, n).unwrap(),
                );
                assert!(
                    (mid.cov.matrix() - printed_global_case1_intermediate(r, n, t)).amax()
                        <= 1e-12 * scale
                );
                let c2 = run_scenario(
                    Scenario::GlobalCase2,
                    r,
                    &bath,
                    tau(t),
                    ChannelVariant::default(),
                )
                .unwrap();
                assert!((c2.cov.matrix() - printed_global_case2(r, n, t)).amax() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn scenario_examples() {
        let local = BathSpec::Local(LocalBathSpec::single(1.0, 4.0).unwrap());
        let out = run_scenario(
            Scenario::LocalCase2,
            0.3,
            &local,
            TauTime::ZERO,
            ChannelVariant::PaperLiteral,
        )
        .unwrap();
        assert!(out.cov.max_abs_diff(&tmsv_state(0.3).unwrap().cov) == 0.0);
        assert_abs_diff_eq!(out.cov.entry(0, 0), 0.6_f64.cosh() / 2.0, epsilon = 1e-15);

        let global = BathSpec::Global(GlobalBathSpec::new(1.0, 4.0).unwrap());
        let c1 = run_scenario(
            Scenario::GlobalCase1,
            0.2,
            &global,
            tau(0.5),
            ChannelVariant::PaperLiteral,
        )
        .unwrap();
        assert!((c1.cov.matrix() - printed_global_case1(0.2, 4.0, 0.5)).amax() <= 1e-12);

        assert!(matches!(
            run_scenario(
                Scenario::GlobalCase1,
                0.2,
                &local,
                tau(0.5),
                ChannelVariant::PaperLiteral
            ),
            Err(Error::BathMismatch { .. })
        ));
        assert!(run_scenario(
            Scenario::LocalCase2,
            0.2,
            &global,
            tau(0.5),
            ChannelVariant::PaperLiteral
        )
        .is_err());
    }

    #[test]
    fn identical_local_baths_make_cases_equal() {
        for &n in &[0.0, 1.0, 4.0, 9.5] {
            let bath = BathSpec::Local(LocalBathSpec::identical(0.7, n).unwrap());
            for v in ChannelVariant::ALL {
                for &r in &[0.0, 0.2, 0.9, 2.0] {
                    for k in 0..=10 {
                        let t = tau(k as f64 / 10.0);
                        let a = run_scenario(Scenario::LocalCase1, r, &bath, t, v).unwrap();
                        let b = run_scenario(Scenario::LocalCase2, r, &bath, t, v).unwrap();
                        assert!(max_diff(&a, &b) <= 1e-13, "{v} r={r} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn mean_follows_the_damping() {
        let mut st = vacuum_state();
        st.mean = Vector4::new(1.0, -2.0, 0.5, 0.0);
        let spec = LocalBathSpec::new(1.0, 0.0, 2.0, 0.0).unwrap();
        let out = local_bath_map(
            &st,
            tau(0.75),
            TauTime::ZERO,
            &spec,
            ChannelVariant::LindbladDerived,
        );
        let a = 0.25_f64.powf(0.25);
        assert!((out.mean - Vector4::new(a, -2.0 * a, 0.5, 0.0)).amax() < 1e-15);
        // Global damping acts on (mean₁ + mean₂)/√2 only.
        let mut st = vacuum_state();
        st.mean = Vector4::new(1.0, 0.0, -1.0, 0.0);
        let out = global_bath_map(&st, tau(0.9), &GlobalBathSpec::new(1.0, 3.0).unwrap());
        assert!((out.mean - st.mean).amax() < 1e-15);
    }

    #[test]
    fn names_round_trip() {
        for v in ChannelVariant::ALL {
            assert_eq!(v.name().parse::<ChannelVariant>().unwrap(), v);
        }
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!("local-case3".parse::<Scenario>().is_err());
    }
}
