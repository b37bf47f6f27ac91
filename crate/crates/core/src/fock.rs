//! Brute-force oracle: two-mode density matrices in a truncated Fock basis,
//! evolved under the local and global thermal master equations with RK4.
//!
//! Basis states |n₁, n₂⟩ with nᵢ < `dim` are indexed n₁·dim + n₂. The
//! superoperator is never materialized; every dissipator is applied through
//! index shifts of the ladder operators.

use nalgebra::{Cholesky, DMatrix, DVector, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::channels::{
    global_bath_map, local_bath_map, time_to_tau, ChannelVariant, GlobalBathSpec, LocalBathSpec,
};
use crate::error::{finite, non_negative, Error, Result};
use crate::exec::Execution;
use crate::gaussian::{CovMatrix, GaussianState};

/// Default bound on population in the top Fock level of either mode.
pub const TAIL_MASS_BOUND: f64 = 1e-8;
/// Largest allowed dt·γ(2N + 1).
pub const MAX_STEP_RATE: f64 = 0.01;
pub const TRACE_DRIFT_TOL: f64 = 1e-8;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const NEGATIVITY_TOL: f64 = 1e-8;
/// Smallest per-mode cutoff accepted by [`build_state`].
pub const MIN_DIM: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Two-mode density operator on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedDensityMatrix {
    dim: usize,
    rho: DMatrix<Complex64>,
}

impl TruncatedDensityMatrix {
    pub fn from_matrix(dim: usize, rho: DMatrix<Complex64>) -> Result<Self> {
        let full = dim * dim;
        if rho.nrows() != full || rho.ncols() != full {
            return Err(Error::DimensionMismatch {
                expected: full,
                actual: rho.nrows(),
            });
        }
        Ok(TruncatedDensityMatrix { dim, rho })
    }

    /// |ψ⟩⟨ψ| for a normalized state vector.
    pub fn from_pure(dim: usize, psi: &DVector<Complex64>) -> Result<Self> {
        Self::from_matrix(dim, psi * psi.adjoint())
    }

    pub fn vacuum(dim: usize) -> Self {
        let mut rho = DMatrix::zeros(dim * dim, dim * dim);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        TruncatedDensityMatrix { dim, rho }
    }

    /// Product of thermal states, renormalized inside the truncation.
    pub fn thermal(dim: usize, nbar1: f64, nbar2: f64) -> Result<Self> {
        non_negative("nbar1", nbar1)?;
        non_negative("nbar2", nbar2)?;
        let pops = |nbar: f64| -> Vec<f64> {
            let ratio = nbar / (nbar + 1.0);
            let raw: Vec<f64> = (0..dim).map(|n| ratio.powi(n as i32)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|p| p / total).collect()
        };
        let (p1, p2) = (pops(nbar1), pops(nbar2));
        let mut rho = DMatrix::zeros(dim * dim, dim * dim);
        for (n1, a) in p1.iter().enumerate() {
            for (n2, b) in p2.iter().enumerate() {
                let k = n1 * dim + n2;
                rho[(k, k)] = Complex64::new(a * b, 0.0);
            }
        }
        Ok(TruncatedDensityMatrix { dim, rho })
    }

    /// Per-mode cutoff d.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// Population with n₁ or n₂ in the top level.
    pub fn tail_mass(&self) -> f64 {
        let d = self.dim;
        let mut mass = 0.0;
        for n1 in 0..d {
            for n2 in 0..d {
                if n1 == d - 1 || n2 == d - 1 {
                    let k = n1 * d + n2;
                    mass += self.rho[(k, k)].re;
                }
            }
        }
        mass
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.rho.nrows();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue, from a full Hermitian eigensolve.
    pub fn min_eigenvalue(&self) -> f64 {
        self.rho.clone().symmetric_eigenvalues().min()
    }

    /// Eigenvalues ≥ −`tol`, checked by a Cholesky factorization of ρ + tol·I.
    pub fn is_positive(&self, tol: f64) -> bool {
        let n = self.rho.nrows();
        let shifted = &self.rho + DMatrix::<Complex64>::identity(n, n) * Complex64::new(tol, 0.0);
        Cholesky::new(shifted).is_some()
    }

    /// ⟨00|ρ|00⟩.
    pub fn vacuum_fidelity(&self) -> f64 {
        self.rho[(0, 0)].re
    }

    /// Partial transpose on mode 2: ⟨m₁m₂|ρ^{T₂}|n₁n₂⟩ = ⟨m₁n₂|ρ|n₁m₂⟩.
    pub fn partial_transpose(&self) -> DMatrix<Complex64> {
        let d = self.dim;
        DMatrix::from_fn(d * d, d * d, |row, col| {
            let (m1, m2) = (row / d, row % d);
            let (n1, n2) = (col / d, col % d);
            self.rho[(m1 * d + n2, n1 * d + m2)]
        })
    }

    fn symmetrize(&mut self) {
        let adj = self.rho.adjoint();
        self.rho = (&self.rho + adj) * Complex64::new(0.5, 0.0);
    }
}

/// Initial state of the two pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialCase {
    /// S₁(r) ⊕ S₂(−r) on the vacuum.
    SeparableSqueezed,
    /// The separable squeezed state after a balanced beam splitter.
    Tmsv,
}

/// Single-mode ladder operator a as a dense d×d matrix.
#[cfg(test)]
fn lowering(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(
        d,
        d,
        |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 },
    )
}

/// Squeezed vacuum exp(½r(a² − a†²))|0⟩, whose Heisenberg action is
/// q → e^{−r}q, p → e^{r}p. Amplitudes on |2k⟩ are
/// (−tanh r)^k √((2k)!)/(2^k k!) / √(cosh r).
fn squeezed_vacuum(r: f64, d: usize) -> DVector<f64> {
    let t = -r.tanh();
    let mut psi = DVector::zeros(d);
    let mut amp = 1.0 / r.cosh().sqrt();
    let mut n = 0;
    while n < d {
        psi[n] = amp;
        // c_{2k+2}/c_{2k} = t·√((2k+1)(2k+2))/(2(k+1))
        let k = (n / 2) as f64;
        amp *= t * ((2.0 * k + 1.0) * (2.0 * k + 2.0)).sqrt() / (2.0 * (k + 1.0));
        n += 2;
    }
    psi
}

/// Applies the balanced beam splitter exp(θ(a₁†a₂ − a₂†a₁)) with θ = π/4.
/// The generator conserves n₁ + n₂, so it is exponentiated one
/// total-photon-number block at a time.
fn beam_splitter_on(psi: &DVector<Complex64>, d: usize) -> DVector<Complex64> {
    let theta = std::f64::consts::FRAC_PI_4;
    let mut out = DVector::zeros(d * d);
    for total in 0..=2 * (d - 1) {
        let lo = total.saturating_sub(d - 1);
        let hi = total.min(d - 1);
        let members: Vec<usize> = (lo..=hi).collect();
        let size = members.len();
        // Block index k ↔ n₁ = members[k], n₂ = total − n₁.
        let mut gen = DMatrix::<f64>::zeros(size, size);
        for (k, &n1) in members.iter().enumerate() {
            let n2 = total - n1;
            // a₁†a₂ |n₁, n₂⟩ = √((n₁+1)n₂) |n₁+1, n₂−1⟩
            if n2 > 0 && k + 1 < size {
                gen[(k + 1, k)] += theta * (((n1 + 1) * n2) as f64).sqrt();
            }
            // −a₂†a₁ |n₁, n₂⟩ = −√(n₁(n₂+1)) |n₁−1, n₂+1⟩
            if n1 > 0 && k > 0 {
                gen[(k - 1, k)] -= theta * ((n1 * (n2 + 1)) as f64).sqrt();
            }
        }
        let u = gen.exp();
        for (i, &m1) in members.iter().enumerate() {
            let mut acc = ZERO;
            for (j, &n1) in members.iter().enumerate() {
                acc += psi[n1 * d + (total - n1)] * u[(i, j)];
            }
            out[m1 * d + (total - m1)] = acc;
        }
    }
    out
}

/// Population of a single-mode squeezed vacuum at or above level `cut`.
fn squeezed_tail(r: f64, cut: usize) -> f64 {
    let t2 = r.tanh().powi(2);
    let mut p = 1.0 / r.cosh();
    let mut inside = 0.0;
    let mut k = 0usize;
    while 2 * k < cut {
        inside += p;
        // P(2k+2)/P(2k) = (2k+1)(2k+2)/(4(k+1)²) · tanh²r
        p *= ((2 * k + 1) * (2 * k + 2)) as f64 / (4.0 * ((k + 1) * (k + 1)) as f64) * t2;
        k += 1;
    }
    (1.0 - inside).max(0.0)
}

/// Population of the ideal (untruncated) state with n₁ or n₂ ≥ d − 1.
pub fn ideal_tail_mass(case: InitialCase, r: f64, dim: usize) -> f64 {
    let cut = dim - 1;
    match case {
        InitialCase::SeparableSqueezed => {
            let inside = 1.0 - squeezed_tail(r, cut);
            (1.0 - inside * inside).max(0.0)
        }
        // n₁ = n₂ with geometric weights tanh^{2n} r.
        InitialCase::Tmsv => r.tanh().powi(2).powi(cut as i32),
    }
}

/// Builds the Case 1 or Case 2 initial state in the truncated Fock basis.
pub fn build_state(case: InitialCase, r: f64, dim: usize) -> Result<TruncatedDensityMatrix> {
    finite("r", r)?;
    if dim < MIN_DIM {
        return Err(Error::OutOfRange {
            name: "dim",
            value: dim as f64,
            expected: ">= 8",
        });
    }
    let tail = ideal_tail_mass(case, r, dim);
    if tail > TAIL_MASS_BOUND {
        let suggested_dim = (dim..)
            .find(|&d| ideal_tail_mass(case, r, d) <= TAIL_MASS_BOUND)
            .unwrap_or(dim);
        return Err(Error::Truncation {
            tail_mass: tail,
            bound: TAIL_MASS_BOUND,
            dim,
            suggested_dim,
        });
    }
    // The beam splitter mixes each total-photon-number block, so blocks at
    // or above the cutoff need the separable amplitudes beyond it. Work on a
    // doubled cutoff and truncate afterwards.
    let work = if case == InitialCase::Tmsv {
        2 * dim
    } else {
        dim
    };
    let s1 = squeezed_vacuum(r, work);
    let s2 = squeezed_vacuum(-r, work);
    let mut psi = DVector::from_fn(work * work, |k, _| {
        Complex64::new(s1[k / work] * s2[k % work], 0.0)
    });
    if case == InitialCase::Tmsv {
        let mixed = beam_splitter_on(&psi, work);
        psi = DVector::from_fn(dim * dim, |k, _| mixed[(k / dim) * work + k % dim]);
    }
    let norm = psi.norm();
    psi.unscale_mut(norm);
    TruncatedDensityMatrix::from_pure(dim, &psi)
}

/// Ladder operator on one mode: lowering (a) or raising (a†).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Lower(usize),
    Raise(usize),
}

/// Matrix whose only nonzeros sit on one diagonal: M[m, m + offset] = weights[m].
#[derive(Debug, Clone)]
struct ShiftedDiagonal {
    offset: isize,
    weights: Vec<f64>,
}

impl ShiftedDiagonal {
    /// Rows m for which column m + offset exists.
    fn rows(&self) -> std::ops::Range<usize> {
        let n = self.weights.len() as isize;
        (-self.offset).max(0) as usize..(n - self.offset.max(0)) as usize
    }
}

impl Ladder {
    /// aᵢ|…nᵢ…⟩ = √nᵢ|…nᵢ−1…⟩ puts row m in column m + strideᵢ; a†ᵢ the reverse.
    fn diagonal(self, d: usize) -> ShiftedDiagonal {
        let stride = |i: usize| if i == 0 { d } else { 1 };
        let level = |m: usize, i: usize| if i == 0 { m / d } else { m % d };
        match self {
            Ladder::Lower(i) => ShiftedDiagonal {
                offset: stride(i) as isize,
                weights: (0..d * d)
                    .map(|m| {
                        let n = level(m, i);
                        if n + 1 < d {
                            ((n + 1) as f64).sqrt()
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            },
            Ladder::Raise(i) => ShiftedDiagonal {
                offset: -(stride(i) as isize),
                weights: (0..d * d).map(|m| (level(m, i) as f64).sqrt()).collect(),
            },
        }
    }
}

/// coef·(2AρB† − B†Aρ − ρB†A).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipatorTerm {
    pub coef: f64,
    pub a: Ladder,
    pub b: Ladder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorKind {
    LocalBaths(LocalBathSpec),
    GlobalBath(GlobalBathSpec),
}

impl GeneratorKind {
    pub fn label(&self) -> &'static str {
        match self {
            GeneratorKind::LocalBaths(_) => "local",
            GeneratorKind::GlobalBath(_) => "global",
        }
    }

    /// Largest γ(2N + 1) over the dissipators.
    pub fn rate_bound(&self) -> f64 {
        match self {
            GeneratorKind::LocalBaths(s) => {
                (s.gamma1 * (2.0 * s.nbar1 + 1.0)).max(s.gamma2 * (2.0 * s.nbar2 + 1.0))
            }
            GeneratorKind::GlobalBath(s) => s.gamma * (2.0 * s.nbar + 1.0),
        }
    }
}

struct PreparedTerm {
    coef2: f64,
    a: ShiftedDiagonal,
    b: ShiftedDiagonal,
}

/// Thermal-bath Lindblad generator on the truncated space.
///
/// All coefficients are real, so real and imaginary parts of ρ evolve
/// independently and each is handled as a real matrix.
pub struct LindbladGenerator {
    kind: GeneratorKind,
    dim: usize,
    terms: Vec<DissipatorTerm>,
    prepared: Vec<PreparedTerm>,
    /// K = Σ coef·B†A as a sum of shifted diagonals, the anticommutator part.
    anti: Vec<ShiftedDiagonal>,
}

impl std::fmt::Debug for LindbladGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LindbladGenerator")
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .field("terms", &self.terms)
            .finish()
    }
}

impl LindbladGenerator {
    pub fn new(kind: GeneratorKind, dim: usize) -> Self {
        let mut terms = Vec::new();
        let mut push = |coef: f64, a, b| {
            if coef != 0.0 {
                terms.push(DissipatorTerm { coef, a, b });
            }
        };
        match kind {
            GeneratorKind::LocalBaths(s) => {
                for (i, gamma, nbar) in [(0, s.gamma1, s.nbar1), (1, s.gamma2, s.nbar2)] {
                    push(
                        gamma / 2.0 * (nbar + 1.0),
                        Ladder::Lower(i),
                        Ladder::Lower(i),
                    );
                    push(gamma / 2.0 * nbar, Ladder::Raise(i), Ladder::Raise(i));
                }
            }
            GeneratorKind::GlobalBath(s) => {
                // Diagonal dissipators first, then the j ≠ i cross terms.
                let pairs = [(0, 0), (1, 1), (0, 1), (1, 0)];
                for (i, j) in pairs {
                    push(
                        s.gamma / 2.0 * (s.nbar + 1.0),
                        Ladder::Lower(i),
                        Ladder::Lower(j),
                    );
                    push(s.gamma / 2.0 * s.nbar, Ladder::Raise(j), Ladder::Raise(i));
                }
            }
        }
        Self::from_terms(kind, dim, terms)
    }

    fn from_terms(kind: GeneratorKind, dim: usize, terms: Vec<DissipatorTerm>) -> Self {
        let n = dim * dim;
        let mut anti: std::collections::BTreeMap<isize, Vec<f64>> = Default::default();
        let mut prepared = Vec::with_capacity(terms.len());
        for t in &terms {
            let a = t.a.diagonal(dim);
            let b = t.b.diagonal(dim);
            // (B†A)[j + s_b, j + s_a] = B[j, j + s_b]·A[j, j + s_a]
            let diag = anti
                .entry(a.offset - b.offset)
                .or_insert_with(|| vec![0.0; n]);
            for j in a.rows().filter(|j| b.rows().contains(j)) {
                let row = (j as isize + b.offset) as usize;
                diag[row] += t.coef * a.weights[j] * b.weights[j];
            }
            prepared.push(PreparedTerm {
                coef2: 2.0 * t.coef,
                a,
                b,
            });
        }
        LindbladGenerator {
            kind,
            dim,
            terms,
            prepared,
            anti: anti
                .into_iter()
                .filter(|(_, w)| w.iter().any(|&x| x != 0.0))
                .map(|(offset, weights)| ShiftedDiagonal { offset, weights })
                .collect(),
        }
    }

    pub fn kind(&self) -> &GeneratorKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[DissipatorTerm] {
        &self.terms
    }

    /// ∂ρ/∂t.
    pub fn apply(&self, rho: &TruncatedDensityMatrix) -> Result<DMatrix<Complex64>> {
        if rho.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: rho.dim,
            });
        }
        let (re, im) = split(&rho.rho);
        let mut d_re = vec![0.0; re.len()];
        let mut d_im = vec![0.0; im.len()];
        self.apply_real(&re, &mut d_re);
        self.apply_real(&im, &mut d_im);
        Ok(join(rho.rho.nrows(), &d_re, &d_im))
    }

    /// Generator on a real column-major (d²)×(d²) matrix.
    fn apply_real(&self, rho: &[f64], out: &mut [f64]) {
        let n = self.dim * self.dim;
        out.fill(0.0);
        // 2·coef·AρB†: (AρB†)[m, c] = A[m, m + s_a]·B[c, c + s_b]·ρ[m + s_a, c + s_b]
        for t in &self.prepared {
            let rows = t.a.rows();
            for c in t.b.rows() {
                let wb = t.b.weights[c];
                if wb == 0.0 {
                    continue;
                }
                let w = t.coef2 * wb;
                let src_col = (c as isize + t.b.offset) as usize;
                let src_start = (src_col * n) as isize + t.a.offset;
                let src = &rho[(src_start + rows.start as isize) as usize
                    ..(src_start + rows.end as isize) as usize];
                let dst = &mut out[c * n + rows.start..c * n + rows.end];
                let wa = &t.a.weights[rows.clone()];
                for ((d, s), a) in dst.iter_mut().zip(src).zip(wa) {
                    *d += w * a * s;
                }
            }
        }
        // −Kρ − ρK
        for c in 0..n {
            let dst = &mut out[c * n..(c + 1) * n];
            for k in &self.anti {
                let rows = k.rows();
                let col = &rho[c * n..(c + 1) * n];
                let src = &col[(rows.start as isize + k.offset) as usize
                    ..(rows.end as isize + k.offset) as usize];
                for ((d, s), w) in dst[rows.clone()]
                    .iter_mut()
                    .zip(src)
                    .zip(&k.weights[rows.clone()])
                {
                    *d -= w * s;
                }
                // (ρK)[:, c] = K[c − offset, c]·ρ[:, c − offset]
                let src_col = c as isize - k.offset;
                if (0..n as isize).contains(&src_col) {
                    let w = k.weights[src_col as usize];
                    if w != 0.0 {
                        let src = &rho[src_col as usize * n..(src_col as usize + 1) * n];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d -= w * s;
                        }
                    }
                }
            }
        }
    }
}

fn split(m: &DMatrix<Complex64>) -> (Vec<f64>, Vec<f64>) {
    (
        m.iter().map(|z| z.re).collect(),
        m.iter().map(|z| z.im).collect(),
    )
}

fn join(side: usize, re: &[f64], im: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_iterator(
        side,
        side,
        re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)),
    )
}

/// Post-integration checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    /// Run the Cholesky positivity check on the final state (O(d⁶)).
    pub check_positivity: bool,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            check_positivity: true,
        }
    }
}

fn rk4_segment(
    gen: &LindbladGenerator,
    rho: &mut [f64],
    duration: f64,
    dt_max: f64,
    scratch: &mut [Vec<f64>; 5],
) {
    if duration <= 0.0 {
        return;
    }
    let steps = (duration / dt_max).ceil().max(1.0) as usize;
    let h = duration / steps as f64;
    let [k1, k2, k3, k4, tmp] = scratch;
    for _ in 0..steps {
        gen.apply_real(rho, k1);
        for ((t, r), k) in tmp.iter_mut().zip(rho.iter()).zip(k1.iter()) {
            *t = r + 0.5 * h * k;
        }
        gen.apply_real(tmp, k2);
        for ((t, r), k) in tmp.iter_mut().zip(rho.iter()).zip(k2.iter()) {
            *t = r + 0.5 * h * k;
        }
        gen.apply_real(tmp, k3);
        for ((t, r), k) in tmp.iter_mut().zip(rho.iter()).zip(k3.iter()) {
            *t = r + h * k;
        }
        gen.apply_real(tmp, k4);
        for (i, r) in rho.iter_mut().enumerate() {
            *r += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }
}

fn finish_state(
    mut state: TruncatedDensityMatrix,
    options: IntegrationOptions,
) -> Result<TruncatedDensityMatrix> {
    let herm = state.hermiticity_error();
    if herm > HERMITICITY_TOL {
        return Err(Error::Drift(format!(
            "hermiticity error {herm:e} exceeds {HERMITICITY_TOL:e}"
        )));
    }
    state.symmetrize();
    let tr = state.trace();
    let drift = (tr - Complex64::new(1.0, 0.0)).norm();
    if drift > TRACE_DRIFT_TOL {
        return Err(Error::Drift(format!(
            "trace drift {drift:e} exceeds {TRACE_DRIFT_TOL:e}; reduce dt"
        )));
    }
    state.rho.unscale_mut(tr.re);
    if options.check_positivity && !state.is_positive(NEGATIVITY_TOL) {
        return Err(Error::Drift(format!(
            "eigenvalue below -{NEGATIVITY_TOL:e}; reduce dt or raise dim"
        )));
    }
    Ok(state)
}

fn check_step(gen: &LindbladGenerator, dt: f64) -> Result<()> {
    finite("dt", dt)?;
    let rate = gen.kind.rate_bound();
    if dt <= 0.0 || dt * rate > MAX_STEP_RATE {
        return Err(Error::StepSize(format!(
            "dt·γ(2N+1) = {:e} must lie in (0, {MAX_STEP_RATE}]",
            dt * rate
        )));
    }
    Ok(())
}

/// Fixed-step RK4 from 0 to `total_t` with step at most `dt`.
pub fn integrate(
    rho0: &TruncatedDensityMatrix,
    gen: &LindbladGenerator,
    total_t: f64,
    dt: f64,
) -> Result<TruncatedDensityMatrix> {
    let mut out = integrate_checkpoints(rho0, gen, &[total_t], dt, IntegrationOptions::default())?;
    Ok(out.pop().expect("one checkpoint"))
}

/// Integrates once through increasing `times`, returning the state at each.
pub fn integrate_checkpoints(
    rho0: &TruncatedDensityMatrix,
    gen: &LindbladGenerator,
    times: &[f64],
    dt: f64,
    options: IntegrationOptions,
) -> Result<Vec<TruncatedDensityMatrix>> {
    if rho0.dim != gen.dim {
        return Err(Error::DimensionMismatch {
            expected: gen.dim,
            actual: rho0.dim,
        });
    }
    check_step(gen, dt)?;
    let mut prev = 0.0;
    for &t in times {
        non_negative("total_t", t)?;
        if t < prev {
            return Err(Error::OutOfRange {
                name: "checkpoint time",
                value: t,
                expected: "non-decreasing",
            });
        }
        prev = t;
    }

    let (mut re, mut im) = split(&rho0.rho);
    // Real initial states stay real; skip the imaginary part entirely.
    let has_im = im.iter().any(|&x| x != 0.0);
    let mut scratch: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; re.len()]);
    let side = gen.dim * gen.dim;
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        rk4_segment(gen, &mut re, t - now, dt, &mut scratch);
        if has_im {
            rk4_segment(gen, &mut im, t - now, dt, &mut scratch);
        }
        now = t;
        let state = TruncatedDensityMatrix {
            dim: gen.dim,
            rho: join(side, &re, &im),
        };
        out.push(if t == 0.0 {
            state
        } else {
            finish_state(state, options)?
        });
    }
    Ok(out)
}

/// Largest step allowed for this generator.
pub fn default_step(kind: &GeneratorKind) -> f64 {
    let rate = kind.rate_bound();
    if rate > 0.0 {
        MAX_STEP_RATE / rate
    } else {
        MAX_STEP_RATE
    }
}

/// First and second moments extracted from a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub cov: CovMatrix,
    pub mean: Vector4<f64>,
    pub tail_mass: f64,
}

impl Moments {
    pub fn trusted(&self) -> bool {
        self.tail_mass <= TAIL_MASS_BOUND
    }

    pub fn as_gaussian(&self) -> Result<GaussianState> {
        GaussianState::new(self.mean, self.cov)
    }
}

/// Quadrature ξ_k as a sparse complex matrix: one entry list per row.
fn quadrature_rows(k: usize, d: usize) -> Vec<Vec<(usize, Complex64)>> {
    let mode = k / 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let lower = Ladder::Lower(mode).diagonal(d);
    let raise = Ladder::Raise(mode).diagonal(d);
    // q = (a + a†)/√2, p = −i(a − a†)/√2
    let (ca, cr) = if k.is_multiple_of(2) {
        (Complex64::new(s, 0.0), Complex64::new(s, 0.0))
    } else {
        (Complex64::new(0.0, -s), Complex64::new(0.0, s))
    };
    (0..d * d)
        .map(|m| {
            let mut row = Vec::with_capacity(2);
            for (op, coef) in [(&lower, ca), (&raise, cr)] {
                let w = op.weights[m];
                if w != 0.0 {
                    row.push(((m as isize + op.offset) as usize, coef * w));
                }
            }
            row
        })
        .collect()
}

/// Means and symmetrized second moments of the truncated quadratures.
pub fn covariance_from_density(state: &TruncatedDensityMatrix) -> Result<Moments> {
    let d = state.dim;
    let n = d * d;
    let rho = &state.rho;
    let quads: Vec<_> = (0..4).map(|k| quadrature_rows(k, d)).collect();

    // ξ_j ρ
    let left: Vec<DMatrix<Complex64>> = quads
        .iter()
        .map(|op| {
            DMatrix::from_fn(n, n, |m, c| {
                op[m].iter().map(|&(k, v)| v * rho[(k, c)]).sum()
            })
        })
        .collect();
    // Tr(ξ_i X) = Σ_m Σ_k ξ_i[m, k] X[k, m]
    let trace_with = |op: &[Vec<(usize, Complex64)>], x: &DMatrix<Complex64>| -> Complex64 {
        op.iter()
            .enumerate()
            .map(|(m, row)| row.iter().map(|&(k, v)| v * x[(k, m)]).sum::<Complex64>())
            .sum()
    };
    let mean = Vector4::from_fn(|i, _| left[i].trace().re);
    let mut cov = nalgebra::Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let sym = 0.5 * (trace_with(&quads[i], &left[j]) + trace_with(&quads[j], &left[i])).re;
            cov[(i, j)] = sym - mean[i] * mean[j];
        }
    }
    let tail_mass = state.tail_mass();
    if tail_mass > TAIL_MASS_BOUND {
        log::warn!("tail mass {tail_mass:e} above {TAIL_MASS_BOUND:e}: moments are untrustworthy at dim {d}");
    }
    Ok(Moments {
        cov: CovMatrix::from_congruence(cov),
        mean,
        tail_mass,
    })
}

/// E_N = log₂(2𝒩 + 1), with 𝒩 the magnitude of the negative part of the
/// partial transpose's spectrum.
pub fn negativity_from_density(state: &TruncatedDensityMatrix) -> Result<f64> {
    let tail = state.tail_mass();
    if tail > TAIL_MASS_BOUND {
        log::warn!("tail mass {tail:e} above {TAIL_MASS_BOUND:e}: negativity is untrustworthy");
    }
    let pt = state.partial_transpose();
    let ev = pt.symmetric_eigenvalues();
    let neg: f64 = ev.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    Ok((2.0 * neg + 1.0).log2())
}

/// Settings for the Fock-vs-closed-form cross check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheckConfig {
    pub r_values: Vec<f64>,
    pub nbar_values: Vec<f64>,
    pub gamma: f64,
    /// Times at which the integrated state is compared.
    pub times: Vec<f64>,
    pub dim: usize,
}

impl OracleCheckConfig {
    /// Checkpoints at the given τ values for rate `gamma`.
    pub fn times_for_taus(gamma: f64, taus: &[f64]) -> Result<Vec<f64>> {
        taus.iter()
            .map(|&t| crate::channels::tau_to_time(gamma, crate::channels::TauTime::new(t)?))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEntry {
    pub generator: &'static str,
    pub input: InitialCase,
    pub r: f64,
    pub nbar: f64,
    pub t: f64,
    pub tau: f64,
    pub max_cov_deviation: f64,
    pub tail_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub dim: usize,
    pub tolerance: f64,
    pub entries: Vec<OracleEntry>,
    pub max_deviation_local: f64,
    pub max_deviation_global: f64,
    pub passed: bool,
}

/// Tolerance of the oracle cross check on every covariance entry.
pub const ORACLE_TOL: f64 = 1e-3;

/// Integrates both master equations for both initial states over the
/// (r, N) grid and compares with the closed-form maps applied to the same
/// initial moments: the local equation against the Lindblad-derived local
/// map with identical baths, the global equation against the global map.
pub fn run_oracle_check(cfg: &OracleCheckConfig, exec: Execution) -> Result<OracleReport> {
    let mut jobs = Vec::new();
    for &r in &cfg.r_values {
        for &nbar in &cfg.nbar_values {
            for input in [InitialCase::SeparableSqueezed, InitialCase::Tmsv] {
                jobs.push((r, nbar, input, true));
                jobs.push((r, nbar, input, false));
            }
        }
    }
    // Build errors (truncation) surface before any integration starts.
    for &(r, _, input, _) in &jobs {
        build_state(input, r, cfg.dim)?;
    }
    let results = exec.map(
        &jobs,
        |&(r, nbar, input, local)| -> Result<Vec<OracleEntry>> {
            let rho0 = build_state(input, r, cfg.dim)?;
            let start = covariance_from_density(&rho0)?;
            let start = GaussianState::new(start.mean, start.cov)?;
            let kind = if local {
                GeneratorKind::LocalBaths(LocalBathSpec::identical(cfg.gamma, nbar)?)
            } else {
                GeneratorKind::GlobalBath(GlobalBathSpec::new(cfg.gamma, nbar)?)
            };
            let gen = LindbladGenerator::new(kind, cfg.dim);
            let states = integrate_checkpoints(
                &rho0,
                &gen,
                &cfg.times,
                default_step(&kind),
                IntegrationOptions::default(),
            )?;
            states
                .iter()
                .zip(&cfg.times)
                .map(|(st, &t)| {
                    let tau = time_to_tau(cfg.gamma, t)?;
                    let closed = match kind {
                        GeneratorKind::LocalBaths(spec) => {
                            local_bath_map(&start, tau, tau, &spec, ChannelVariant::LindbladDerived)
                        }
                        GeneratorKind::GlobalBath(spec) => global_bath_map(&start, tau, &spec),
                    };
                    let m = covariance_from_density(st)?;
                    Ok(OracleEntry {
                        generator: kind.label(),
                        input,
                        r,
                        nbar,
                        t,
                        tau: tau.value(),
                        max_cov_deviation: m.cov.max_abs_diff(&closed.cov),
                        tail_mass: m.tail_mass,
                    })
                })
                .collect()
        },
    );
    let mut entries = Vec::new();
    for r in results {
        entries.extend(r?);
    }
    let worst = |label: &str| {
        entries
            .iter()
            .filter(|e| e.generator == label)
            .map(|e| e.max_cov_deviation)
            .fold(0.0_f64, f64::max)
    };
    let max_deviation_local = worst("local");
    let max_deviation_global = worst("global");
    Ok(OracleReport {
        dim: cfg.dim,
        tolerance: ORACLE_TOL,
        passed: max_deviation_local <= ORACLE_TOL && max_deviation_global <= ORACLE_TOL,
        entries,
        max_deviation_local,
        max_deviation_global,
    })
}
