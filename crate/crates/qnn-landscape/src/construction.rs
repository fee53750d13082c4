//! Hard-dataset constructions with exponentially many spurious minima.
//!
//! The pipeline has two halves. [`build_symmetric`] solves, for each
//! direction η⁽ᵏ⁾ ∈ {−1,0,1}^p, the linear system
//!
//! ```text
//! ⟨D_k, I⟩ = 0,    ⟨D_k, Φ_ξ(M)⟩ = f̂_{ξ,k}   for all ξ ≠ 0
//! ```
//!
//! where `f̂` are the trig-basis coefficients of `sin(2 η⁽ᵏ⁾·(θ − θ⋆))`, and
//! packages the minimum-norm solutions into states `ρ_k = I/d + κ D_k`. The
//! induced loss is `(κ²/m₀) Σ_k sin²(2 η⁽ᵏ⁾·(θ − θ⋆))`: invariant under
//! every shift `θ_l ↦ θ_l + π/2`, vanishing at θ⋆, hence owning `2^p` equal
//! minima per period.
//!
//! [`build_breaking`] builds a second dataset whose loss is, up to an
//! ε-suppressible quadratic part, the linear term `−c Σ_l cos(2(θ_l − θ⋆_l))`;
//! combined with the symmetric half at a small enough amplitude it leaves
//! exactly one basin at the global value and lifts the other `2^p − 1` by a
//! computable gap.
//!
//! The module also houses the canonical example family (closed forms plus
//! matching datasets), the linearly separable classical concept encoded by
//! X/Y rotations, and Gaussian label noise.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::circuit::{loss, CircuitSpec, Dataset, QuantumDatum, TwoLevelGenerator};
use crate::independence::{gram_of_expansion, gram_report};
use crate::numerics::{
    kron_all, min_eigenvalue, pauli, re, C64, ComplexMatrix, DensityOperator, HermitianOperator,
};
use crate::stream::task_rng;
use crate::trig::{expand_observable, MultiIndex, OperatorExpansion, ScalarTrigPoly};
use crate::{Error, Result};

/// Intended global minimum θ⋆ plus the symmetry directions η⁽ᵏ⁾.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricTargetSpec {
    theta_star: Vec<f64>,
    directions: Vec<Vec<i8>>,
}

impl SymmetricTargetSpec {
    /// Directions must be non-zero {−1,0,1} vectors spanning ℝ^p.
    pub fn new(theta_star: Vec<f64>, directions: Vec<Vec<i8>>) -> Result<Self> {
        let p = theta_star.len();
        if p == 0 {
            return Err(Error::InvalidArgument("θ⋆ must be non-empty".into()));
        }
        if directions.len() < p {
            return Err(Error::InvalidArgument(format!(
                "need at least p = {p} directions, got {}",
                directions.len()
            )));
        }
        for eta in &directions {
            if eta.len() != p {
                return Err(Error::ParamCountMismatch {
                    expected: p,
                    got: eta.len(),
                });
            }
            if eta.iter().any(|&e| e.abs() > 1) {
                return Err(Error::InvalidArgument(
                    "direction entries must be in {−1, 0, 1}".into(),
                ));
            }
            if eta.iter().all(|&e| e == 0) {
                return Err(Error::InvalidArgument(
                    "all-zero directions are not allowed".into(),
                ));
            }
        }
        if rank(&directions, p) < p {
            return Err(Error::InvalidArgument(
                "directions do not span ℝ^p".into(),
            ));
        }
        Ok(Self {
            theta_star,
            directions,
        })
    }

    /// The coordinate directions e_1, …, e_p.
    pub fn coordinate_directions(theta_star: Vec<f64>) -> Result<Self> {
        let p = theta_star.len();
        let directions = (0..p)
            .map(|l| {
                let mut eta = vec![0i8; p];
                eta[l] = 1;
                eta
            })
            .collect();
        Self::new(theta_star, directions)
    }

    pub fn p(&self) -> usize {
        self.theta_star.len()
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    pub fn directions(&self) -> &[Vec<i8>] {
        &self.directions
    }
}

fn rank(rows: &[Vec<i8>], p: usize) -> usize {
    let mut m: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|&e| e as f64).collect())
        .collect();
    let mut rank = 0;
    for col in 0..p {
        let pivot = (rank..m.len()).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()));
        match pivot {
            Some(row) if m[row][col].abs() > 1e-9 => {
                m.swap(rank, row);
                for r in (rank + 1)..m.len() {
                    let f = m[r][col] / m[rank][col];
                    for c in col..p {
                        m[r][c] -= f * m[rank][c];
                    }
                }
                rank += 1;
            }
            _ => {}
        }
    }
    rank
}

/// Parameters of the symmetry-breaking dataset.
///
/// `amplitude` is the coefficient `c` of the linear term
/// `−c Σ cos(2(θ_l − θ⋆_l))`; it must stay below `L₀/(2 p r²)`, where `L₀`
/// bounds the symmetric loss from below on the radius-`r` sphere around θ⋆.
/// `epsilon` scales states toward `I/d` to suppress the quadratic term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakingSpec {
    pub amplitude: f64,
    pub radius: f64,
    pub boundary_level: f64,
    pub epsilon: f64,
}

impl BreakingSpec {
    pub const DEFAULT_RADIUS: f64 = 0.4;
    pub const DEFAULT_EPSILON: f64 = 0.1;

    pub fn new(amplitude: f64, radius: f64, boundary_level: f64, epsilon: f64) -> Result<Self> {
        if !(amplitude > 0.0 && radius > 0.0 && boundary_level > 0.0) {
            return Err(Error::InvalidArgument(
                "amplitude, radius and boundary level must be positive".into(),
            ));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        Ok(Self {
            amplitude,
            radius,
            boundary_level,
            epsilon,
        })
    }

    /// The admissible amplitude bound `L₀/(2 p r²)`.
    pub fn amplitude_bound(&self, p: usize) -> f64 {
        self.boundary_level / (2.0 * p as f64 * self.radius * self.radius)
    }
}

/// Output of a dataset construction: the dataset itself, the PSD scaling κ,
/// and the solved coefficient operators.
#[derive(Debug, Clone)]
pub struct ConstructionOutput {
    pub dataset: Dataset,
    pub kappa: f64,
    pub coefficient_ops: Vec<HermitianOperator>,
    pub notes: String,
}

/// Minimum-norm Hermitian `D` with `⟨D, Φ_ξ(M)⟩ = targets[ξ]` for all ξ ≠ 0
/// (and `⟨D, I⟩ = 0`, automatic in the span of the traceless family).
fn solve_coefficient_operator(
    exp: &OperatorExpansion,
    gram: &crate::independence::GramReport,
    targets: &[f64],
) -> Result<HermitianOperator> {
    let order = gram.order;
    assert_eq!(targets.len(), order);
    if !gram.independent {
        return Err(Error::DependentFamily {
            lambda_min: gram.lambda_min,
            tol: gram.tolerance,
        });
    }
    // solve G α = t through the spectral decomposition of G
    let g = HermitianOperator::trusted(ComplexMatrix::from_fn(order, order, |i, j| {
        re(gram.entry(i, j))
    }));
    let (evals, vecs) = crate::numerics::eigh(&g);
    let mut alpha = vec![0.0; order];
    for k in 0..order {
        let mut proj = 0.0;
        for i in 0..order {
            proj += vecs.matrix().get(i, k).re * targets[i];
        }
        let scaled = proj / evals[k];
        for i in 0..order {
            alpha[i] += vecs.matrix().get(i, k).re * scaled;
        }
    }
    let mut d = HermitianOperator::zero(exp.dim());
    for (i, &a) in alpha.iter().enumerate() {
        if a != 0.0 {
            d = d.add(&exp.coefficient_by_code(i + 1).scale_re(a));
        }
    }
    // verify the constraints actually hold
    let scale = targets.iter().fold(1.0f64, |m, t| m.max(t.abs()));
    let mut residual = 0.0f64;
    for i in 0..order {
        residual = residual.max((d.inner(exp.coefficient_by_code(i + 1)) - targets[i]).abs());
    }
    if residual > 1e-8 * scale {
        return Err(Error::SingularSystem { residual });
    }
    Ok(d)
}

/// Largest κ keeping `I/d + κ D` positive semidefinite.
fn psd_scaling(d: &HermitianOperator) -> f64 {
    let lambda_min = min_eigenvalue(d);
    if lambda_min >= -1e-14 {
        f64::INFINITY
    } else {
        1.0 / (d.dim() as f64 * (-lambda_min))
    }
}

/// Trig-basis expansion of `sin(2 Σ_l η_l (θ_l − θ⋆_l))`, built by the
/// angle-addition recursion one axis at a time.
fn sine_expansion(p: usize, theta_star: &[f64], eta: &[i8]) -> ScalarTrigPoly {
    let mut sin_poly = ScalarTrigPoly::zero(p);
    let mut cos_poly = ScalarTrigPoly::zero(p);
    cos_poly.set_coefficient(&MultiIndex::from_code(0, p), 1.0);
    for l in 0..p {
        if eta[l] == 0 {
            continue;
        }
        let sign = eta[l] as f64;
        let c_star = (2.0 * theta_star[l]).cos();
        let s_star = (2.0 * theta_star[l]).sin();
        // sin(2η(θ_l − θ⋆_l)) = η(−s⋆·cos 2θ_l + c⋆·sin 2θ_l)
        let sin_axis = (0.0, -sign * s_star, sign * c_star);
        // cos(2η(θ_l − θ⋆_l)) = c⋆·cos 2θ_l + s⋆·sin 2θ_l
        let cos_axis = (0.0, c_star, s_star);
        let new_sin = sin_poly
            .mul_fresh_axis(l, cos_axis.0, cos_axis.1, cos_axis.2)
            .add(&cos_poly.mul_fresh_axis(l, sin_axis.0, sin_axis.1, sin_axis.2))
            .expect("same p");
        let new_cos = cos_poly
            .mul_fresh_axis(l, cos_axis.0, cos_axis.1, cos_axis.2)
            .add(
                &sin_poly
                    .mul_fresh_axis(l, sin_axis.0, sin_axis.1, sin_axis.2)
                    .scale(-1.0),
            )
            .expect("same p");
        sin_poly = new_sin;
        cos_poly = new_cos;
    }
    debug_assert!(sin_poly.coefficient(&MultiIndex::from_code(0, p)).abs() < 1e-14);
    sin_poly
}

/// Builds the π/2-translation-invariant dataset S₀ (one datum per direction).
///
/// Requires a traceless observable and a linearly independent Φ family. The
/// common κ is the minimum of the per-direction PSD bounds, so every state is
/// a valid density operator and the loss keeps uniform weights.
pub fn build_symmetric(
    circuit: &CircuitSpec,
    spec: &SymmetricTargetSpec,
) -> Result<ConstructionOutput> {
    if spec.p() != circuit.p() {
        return Err(Error::ParamCountMismatch {
            expected: circuit.p(),
            got: spec.p(),
        });
    }
    if !circuit.traceless_observable() {
        return Err(Error::InvalidArgument(
            "symmetric construction needs the traceless-observable path".into(),
        ));
    }
    let p = circuit.p();
    let dim = circuit.dim();
    let exp = expand_observable(circuit)?;
    let gram = gram_of_expansion(&exp);
    let order = gram.order;

    let mut ops = Vec::with_capacity(spec.directions.len());
    for eta in &spec.directions {
        let poly = sine_expansion(p, &spec.theta_star, eta);
        let targets: Vec<f64> = (0..order)
            .map(|i| poly.coefficient(&MultiIndex::from_code(i + 1, p)))
            .collect();
        ops.push(solve_coefficient_operator(&exp, &gram, &targets)?);
    }
    let kappa = ops
        .iter()
        .map(psd_scaling)
        .fold(f64::INFINITY, f64::min)
        .min(1.0_f64.max(0.0));
    let kappa = if kappa.is_finite() { kappa } else { 1.0 };

    let phi_zero = exp.coefficient_by_code(0);
    let mut data = Vec::with_capacity(ops.len());
    for d_k in &ops {
        let rho = DensityOperator::new(
            ComplexMatrix::identity(dim)
                .scale(re(1.0 / dim as f64))
                .add(&d_k.matrix().scale(re(kappa))),
        )?;
        let label = rho.as_hermitian().inner(phi_zero);
        data.push(QuantumDatum::new(rho, label));
    }
    Ok(ConstructionOutput {
        dataset: Dataset::new(data),
        kappa,
        coefficient_ops: ops,
        notes: format!(
            "symmetric dataset: m0 = {}, kappa = {kappa:.6e}, theta_star = {:?}",
            spec.directions.len(),
            spec.theta_star
        ),
    })
}

/// Builds the symmetry-breaking dataset S₁ whose linear loss term is
/// `−c Σ_l cos(2(θ_l − θ⋆_l))` with `c = spec.amplitude`.
///
/// States are ε-scaled toward `I/d` with labels scaled by `1/ε`, which leaves
/// the linear term untouched (the observable is traceless) and suppresses
/// the quadratic one by ε².
pub fn build_breaking(
    circuit: &CircuitSpec,
    theta_star: &[f64],
    spec: &BreakingSpec,
) -> Result<ConstructionOutput> {
    let p = circuit.p();
    if theta_star.len() != p {
        return Err(Error::ParamCountMismatch {
            expected: p,
            got: theta_star.len(),
        });
    }
    if !circuit.traceless_observable() {
        return Err(Error::InvalidArgument(
            "breaking construction needs the traceless-observable path".into(),
        ));
    }
    let bound = spec.amplitude_bound(p);
    if spec.amplitude >= bound {
        return Err(Error::AmplitudeBound {
            amplitude: spec.amplitude,
            bound,
        });
    }
    let dim = circuit.dim();
    let exp = expand_observable(circuit)?;
    let gram = gram_of_expansion(&exp);
    let order = gram.order;

    let mut ops = Vec::with_capacity(p);
    for l in 0..p {
        // cos(2(θ_l − θ⋆_l)) = cos 2θ⋆·cos 2θ_l + sin 2θ⋆·sin 2θ_l
        let mut targets = vec![0.0; order];
        let mut cos_sym = vec![0u8; p];
        cos_sym[l] = 1;
        let mut sin_sym = vec![0u8; p];
        sin_sym[l] = 2;
        targets[MultiIndex::new(cos_sym).unwrap().code() - 1] = (2.0 * theta_star[l]).cos();
        targets[MultiIndex::new(sin_sym).unwrap().code() - 1] = (2.0 * theta_star[l]).sin();
        ops.push(solve_coefficient_operator(&exp, &gram, &targets)?);
    }
    let kappa = ops.iter().map(psd_scaling).fold(f64::INFINITY, f64::min);
    let kappa = if kappa.is_finite() { kappa } else { 1.0 };

    // raw labels give the linear coefficient c; then the joint ε-scaling
    let m1 = p as f64;
    let raw_label = spec.amplitude * m1 / (2.0 * kappa);
    let eps = spec.epsilon;
    let mut data = Vec::with_capacity(p);
    for e_l in &ops {
        let rho = DensityOperator::new(
            ComplexMatrix::identity(dim)
                .scale(re(1.0 / dim as f64))
                .add(&e_l.matrix().scale(re(eps * kappa))),
        )?;
        data.push(QuantumDatum::new(rho, raw_label / eps));
    }
    Ok(ConstructionOutput {
        dataset: Dataset::new(data),
        kappa,
        coefficient_ops: ops,
        notes: format!(
            "breaking dataset: c = {}, epsilon = {eps}, kappa = {kappa:.6e}",
            spec.amplitude
        ),
    })
}

/// Linear part of the square loss, `−(2/W) Σ_k w_k y_k ⟨ρ_k, M(θ)⟩`.
///
/// This is the term the breaking construction controls; it is invariant
/// under the joint ε-scaling when the observable is traceless.
pub fn linear_loss_term(circuit: &CircuitSpec, data: &Dataset, theta: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let total = data.total_weight();
    let mut acc = 0.0;
    for d in data.data() {
        let f = crate::circuit::evaluate(circuit, d.state(), theta)?;
        acc += d.weight() * d.label() * f;
    }
    Ok(-2.0 * acc / total)
}

/// Concatenates two datasets with group weights in the ratio `weight_a :
/// weight_b` (total normalized to 1). A zero-weight side is dropped.
pub fn combine(a: &Dataset, b: &Dataset, weight_a: f64, weight_b: f64) -> Result<Dataset> {
    if weight_a < 0.0 || weight_b < 0.0 || weight_a + weight_b <= 0.0 {
        return Err(Error::InvalidArgument(
            "combine weights must be non-negative with a positive sum".into(),
        ));
    }
    if let (Some(da), Some(db)) = (a.dim(), b.dim()) {
        if da != db && weight_a > 0.0 && weight_b > 0.0 {
            return Err(Error::DimensionMismatch(da, db));
        }
    }
    let total = weight_a + weight_b;
    let mut data = Vec::new();
    for (set, group_weight) in [(a, weight_a), (b, weight_b)] {
        if group_weight == 0.0 || set.is_empty() {
            continue;
        }
        let scale = group_weight / total / set.total_weight();
        for d in set.data() {
            data.push(d.reweighted(d.weight() * scale)?);
        }
    }
    Ok(Dataset::new(data))
}

/// The three canonical example families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CanonicalKind {
    /// Global minimum at 0, separable loss.
    Base,
    /// Global minimum at (π/100, …), separable loss.
    Shifted,
    /// Shifted plus cross terms coupling adjacent coordinates.
    Coupled,
}

impl std::str::FromStr for CanonicalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(Self::Base),
            "shifted" => Ok(Self::Shifted),
            "coupled" => Ok(Self::Coupled),
            other => Err(Error::InvalidArgument(format!(
                "unknown canonical kind '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for CanonicalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Base => "base",
            Self::Shifted => "shifted",
            Self::Coupled => "coupled",
        })
    }
}

/// Closed-form loss of a canonical instance:
///
/// ```text
/// (1/2p) Σ_l [(sin 2θ_l − a_l)² + ¼(cos 2θ_l − b_l)²]
///   + [coupled] Σ_{l<p} ⅛(cos 2θ_l cos 2θ_{l+1} − X)²
/// ```
///
/// Evaluation is O(p), which is what lets sweeps run at p up to 32 without
/// touching 2^p-dimensional matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormLoss {
    kind: CanonicalKind,
    p: usize,
    sin_targets: Vec<f64>,
    cos_targets: Vec<f64>,
    cross_target: f64,
}

impl ClosedFormLoss {
    pub fn new(kind: CanonicalKind, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("closed form needs p ≥ 1".into()));
        }
        let shift = std::f64::consts::PI / 50.0;
        let (a, b) = match kind {
            CanonicalKind::Base => (0.0, 1.0),
            CanonicalKind::Shifted | CanonicalKind::Coupled => (shift.sin(), shift.cos()),
        };
        Ok(Self {
            kind,
            p,
            sin_targets: vec![a; p],
            cos_targets: vec![b; p],
            cross_target: shift.cos() * shift.cos(),
        })
    }

    pub fn kind(&self) -> CanonicalKind {
        self.kind
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// The designed global minimum (0 for base, π/100 per coordinate else).
    pub fn global_minimum(&self) -> Vec<f64> {
        let t = match self.kind {
            CanonicalKind::Base => 0.0,
            _ => std::f64::consts::PI / 100.0,
        };
        vec![t; self.p]
    }

    /// Loss increase per flipped coordinate at the basin centers.
    pub fn spurious_step(&self) -> f64 {
        let (a, b) = (self.sin_targets[0], self.cos_targets[0]);
        // flipping θ ↦ θ + π/2 sends (sin, cos) targets to their negatives
        (4.0 * a * a + b * b) / (2.0 * self.p as f64)
    }

    pub fn loss(&self, theta: &[f64]) -> f64 {
        assert_eq!(theta.len(), self.p);
        let norm = 1.0 / (2.0 * self.p as f64);
        let mut acc = 0.0;
        for l in 0..self.p {
            let s = (2.0 * theta[l]).sin() - self.sin_targets[l];
            let c = (2.0 * theta[l]).cos() - self.cos_targets[l];
            acc += norm * (s * s + 0.25 * c * c);
        }
        if self.kind == CanonicalKind::Coupled {
            for l in 0..self.p - 1 {
                let cross =
                    (2.0 * theta[l]).cos() * (2.0 * theta[l + 1]).cos() - self.cross_target;
                acc += 0.125 * cross * cross;
            }
        }
        acc
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        assert_eq!(theta.len(), self.p);
        let norm = 1.0 / (2.0 * self.p as f64);
        let mut grad = vec![0.0; self.p];
        for l in 0..self.p {
            let sin = (2.0 * theta[l]).sin();
            let cos = (2.0 * theta[l]).cos();
            grad[l] = norm
                * (4.0 * cos * (sin - self.sin_targets[l])
                    - sin * (cos - self.cos_targets[l]));
        }
        if self.kind == CanonicalKind::Coupled {
            for l in 0..self.p - 1 {
                let cos_l = (2.0 * theta[l]).cos();
                let cos_r = (2.0 * theta[l + 1]).cos();
                let cross = cos_l * cos_r - self.cross_target;
                grad[l] += -0.5 * (2.0 * theta[l]).sin() * cos_r * cross;
                grad[l + 1] += -0.5 * (2.0 * theta[l + 1]).sin() * cos_l * cross;
            }
        }
        grad
    }

    /// Applies the closed-form image of Gaussian label noise on the matching
    /// dataset: per-coordinate sin targets shift by g, cos targets by 2g
    /// (the S₁ residuals carry a ½ scale). Draw order matches
    /// [`add_label_noise`] on the canonical dataset.
    pub fn with_label_noise(&self, sigma: f64, rng: &mut impl Rng) -> Result<Self> {
        if self.kind == CanonicalKind::Coupled {
            return Err(Error::InvalidArgument(
                "label noise on the coupled form goes through the dataset path".into(),
            ));
        }
        if sigma < 0.0 {
            return Err(Error::InvalidArgument("sigma must be ≥ 0".into()));
        }
        let mut out = self.clone();
        for a in out.sin_targets.iter_mut() {
            *a += sigma * rng.sample::<f64, _>(StandardNormal);
        }
        for b in out.cos_targets.iter_mut() {
            *b += 2.0 * sigma * rng.sample::<f64, _>(StandardNormal);
        }
        Ok(out)
    }
}

/// A canonical instance: matrices when `p ≤ 10`, the closed form always.
#[derive(Debug, Clone)]
pub struct CanonicalInstance {
    pub kind: CanonicalKind,
    pub p: usize,
    pub circuit: Option<CircuitSpec>,
    pub dataset: Option<Dataset>,
    pub closed_form: ClosedFormLoss,
    /// The dataset's weighted mean loss equals `dataset_scale ×` the closed
    /// form (exactly 1 for base and shifted; < 1 for coupled, where the
    /// extra cross data renormalize the weighted mean).
    pub dataset_scale: f64,
}

/// One-layer circuit: generator Z on each qubit, observable `site^{⊗p}`.
pub fn one_layer_z_circuit(p: usize, site_observable: &HermitianOperator) -> Result<CircuitSpec> {
    if site_observable.dim() != 2 {
        return Err(Error::DimensionMismatch(site_observable.dim(), 2));
    }
    let mut gens = Vec::with_capacity(p);
    for l in 0..p {
        let mut factors = vec![pauli::i2(); p];
        factors[l] = pauli::z();
        let h = HermitianOperator::trusted(kron_all(&factors)?);
        gens.push(TwoLevelGenerator::with_qubit(h, l)?);
    }
    let mut m = site_observable.clone();
    for _ in 1..p {
        m = m.kron(site_observable);
    }
    let traceless = site_observable.trace_re().abs() <= 1e-12;
    CircuitSpec::new(gens, m, traceless)
}

fn site_state(mat: ComplexMatrix) -> DensityOperator {
    DensityOperator::new(mat).expect("canonical site state")
}

fn product_state(factors: &[ComplexMatrix]) -> DensityOperator {
    DensityOperator::new(kron_all(factors).expect("square factors")).expect("product state")
}

const MAX_CANONICAL_MATRIX_P: usize = 10;

/// Builds one of the canonical examples.
///
/// The dataset realizes the closed form with uniform weights by carrying the
/// symmetry-breaking states half-scaled toward `I/d` (labels follow), which
/// is what the 4:1 reweighting of the sin²/cos² terms amounts to for a
/// weight-normalized mean.
pub fn canonical_example(kind: CanonicalKind, p: usize) -> Result<CanonicalInstance> {
    let closed_form = ClosedFormLoss::new(kind, p)?;
    if p > MAX_CANONICAL_MATRIX_P {
        return Ok(CanonicalInstance {
            kind,
            p,
            circuit: None,
            dataset: None,
            closed_form,
            dataset_scale: 1.0,
        });
    }
    let yi = HermitianOperator::new(pauli::y().add(&pauli::i2()))?;
    let circuit = one_layer_z_circuit(p, &yi)?;
    let dim = circuit.dim();
    let theta_star = closed_form.global_minimum();

    let rho0 = pauli::i2().add(&pauli::z()).scale(re(0.5));
    let rho1 = pauli::i2().add(&pauli::x()).scale(re(0.5));
    let rho2 = pauli::i2().add(&pauli::y()).scale(re(0.5));

    let t = 2.0 * theta_star[0];
    let mut data = Vec::new();
    // S₀: X-site states, residual sin 2θ_l − sin 2θ⋆
    for l in 0..p {
        let mut factors = vec![rho0.clone(); p];
        factors[l] = rho1.clone();
        data.push(QuantumDatum::new(product_state(&factors), 1.0 + t.sin()));
    }
    // S₁, half-scaled toward I/d: residual ½(cos 2θ_l − cos 2θ⋆)
    for l in 0..p {
        let mut factors = vec![rho0.clone(); p];
        factors[l] = rho2.clone();
        let full = product_state(&factors);
        let mixed = full
            .matrix()
            .scale(re(0.5))
            .add(&ComplexMatrix::identity(dim).scale(re(0.5 / dim as f64)));
        data.push(QuantumDatum::new(
            DensityOperator::new(mixed)?,
            1.0 + 0.5 * t.cos(),
        ));
    }
    let mut dataset_scale = 1.0;
    if kind == CanonicalKind::Coupled {
        // pure cross-term states ρ = I/d + 2^{-p}·(Y ⊗ Y on the pair):
        // residual cos 2θ_l cos 2θ_{l+1} − cos² 2θ⋆
        let weight = p as f64 / 4.0;
        for l in 0..p - 1 {
            let mut factors = vec![pauli::i2(); p];
            factors[l] = pauli::y();
            factors[l + 1] = pauli::y();
            let yy = kron_all(&factors)?;
            let rho = DensityOperator::new(
                ComplexMatrix::identity(dim)
                    .scale(re(1.0 / dim as f64))
                    .add(&yy.scale(re(1.0 / dim as f64))),
            )?;
            data.push(QuantumDatum::with_weight(
                rho,
                1.0 + t.cos() * t.cos(),
                weight,
            )?);
        }
        let total = 2.0 * p as f64 + (p as f64 - 1.0) * weight;
        dataset_scale = 2.0 * p as f64 / total;
    }
    Ok(CanonicalInstance {
        kind,
        p,
        circuit: Some(circuit),
        dataset: Some(Dataset::new(data)),
        closed_form,
        dataset_scale,
    })
}

/// A linearly separable classical concept and its quantum encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalConceptConfig {
    p: usize,
    normal: Vec<f64>,
    samples: usize,
    seed: u64,
}

impl ClassicalConceptConfig {
    pub fn new(p: usize, normal: Vec<f64>, samples: usize, seed: u64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("concept needs p ≥ 1".into()));
        }
        if normal.len() != 2 * p {
            return Err(Error::InvalidArgument(format!(
                "normal vector must have 2p = {} entries, got {}",
                2 * p,
                normal.len()
            )));
        }
        if normal.iter().all(|&w| w == 0.0) {
            return Err(Error::InvalidArgument("normal vector must be non-zero".into()));
        }
        if samples == 0 {
            return Err(Error::InsufficientSamples { got: 0, min: 1 });
        }
        Ok(Self {
            p,
            normal,
            samples,
            seed,
        })
    }

    /// Random unit normal drawn from the seed.
    pub fn with_random_normal(p: usize, samples: usize, seed: u64) -> Result<Self> {
        let mut rng = task_rng(seed, "concept-normal", 0);
        let mut normal: Vec<f64> = (0..2 * p)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = normal.iter().map(|w| w * w).sum::<f64>().sqrt();
        normal.iter_mut().for_each(|w| *w /= norm);
        Self::new(p, normal, samples, seed)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }
}

/// Encodes a feature vector `x ∈ ℝ^{2p}` as the pure product state
/// `⊗_l exp(−i x_{p+l} Y) exp(−i x_l X) |0⟩`.
pub fn xy_encode(x: &[f64], p: usize) -> Result<DensityOperator> {
    if x.len() != 2 * p {
        return Err(Error::InvalidArgument(format!(
            "feature vector must have 2p = {} entries, got {}",
            2 * p,
            x.len()
        )));
    }
    let mut state = vec![C64::new(1.0, 0.0)];
    for l in 0..p {
        let a = x[l];
        let b = x[p + l];
        // exp(−i a X)|0⟩ = (cos a, −i sin a); then the real Y rotation
        let v0 = C64::new(b.cos() * a.cos(), b.sin() * a.sin());
        let v1 = C64::new(b.sin() * a.cos(), -b.cos() * a.sin());
        let mut next = Vec::with_capacity(state.len() * 2);
        for amp in &state {
            next.push(amp * v0);
        }
        for amp in &state {
            next.push(amp * v1);
        }
        // interleave so qubit l is the fastest-varying axis from the left
        let mut merged = vec![C64::ZERO; next.len()];
        let half = state.len();
        for i in 0..half {
            merged[2 * i] = next[i];
            merged[2 * i + 1] = next[half + i];
        }
        state = merged;
    }
    DensityOperator::from_state_vector(&state)
}

/// Draws the concept dataset: features uniform on `[0, 2π]^{2p}`, labels
/// `1` iff `wᵀx > 0`, pure-state XY encodings, unit weights.
pub fn classical_concept(cfg: &ClassicalConceptConfig) -> Result<Dataset> {
    let mut data = Vec::with_capacity(cfg.samples);
    for i in 0..cfg.samples {
        let mut rng = task_rng(cfg.seed, "concept", i as u64);
        let x: Vec<f64> = (0..2 * cfg.p)
            .map(|_| rng.random::<f64>() * 2.0 * std::f64::consts::PI)
            .collect();
        let dot: f64 = cfg.normal.iter().zip(&x).map(|(w, xi)| w * xi).sum();
        let label = if dot > 0.0 { 1.0 } else { 0.0 };
        data.push(QuantumDatum::new(xy_encode(&x, cfg.p)?, label));
    }
    Ok(Dataset::new(data))
}

/// Adds i.i.d. Gaussian noise `N(0, σ)` to every label; states untouched.
pub fn add_label_noise(data: &Dataset, sigma: f64, rng: &mut impl Rng) -> Result<Dataset> {
    if sigma < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise level must be ≥ 0, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(data.clone());
    }
    Ok(Dataset::new(
        data.data()
            .iter()
            .map(|d| d.relabeled(d.label() + sigma * rng.sample::<f64, _>(StandardNormal)))
            .collect(),
    ))
}

/// Configuration of the combined hard instance (Theorem-1 style dataset).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardInstanceConfig {
    /// Neighbourhood radius r.
    pub radius: f64,
    /// State-mixing scale of the breaking half.
    pub epsilon: f64,
    /// Requested breaking amplitude as a fraction of the admissible bound.
    pub amplitude_fraction: f64,
    /// Group weights (S₀, S₁) of the combined dataset.
    pub ratio: (f64, f64),
    /// Sphere probes used to estimate the boundary level L₀.
    pub sphere_probes: usize,
}

impl Default for HardInstanceConfig {
    fn default() -> Self {
        Self {
            radius: BreakingSpec::DEFAULT_RADIUS,
            epsilon: BreakingSpec::DEFAULT_EPSILON,
            amplitude_fraction: 0.5,
            ratio: (4.0, 1.0),
            sphere_probes: 10_000,
        }
    }
}

/// A combined S₀ + S₁ instance with its landscape bookkeeping.
#[derive(Debug, Clone)]
pub struct HardInstance {
    pub circuit: CircuitSpec,
    pub dataset: Dataset,
    pub theta_star: Vec<f64>,
    pub symmetric: ConstructionOutput,
    pub breaking: ConstructionOutput,
    pub breaking_spec: BreakingSpec,
    /// Coefficient of `−Σ cos(2(θ_l − θ⋆_l))` in the combined loss.
    pub effective_amplitude: f64,
    /// Boundary level of the weighted S₀ part on the radius sphere.
    pub boundary_level: f64,
}

impl HardInstance {
    /// Lower bound on the gap between every spurious basin and the global
    /// one: `c (2 − r²/2)` for the effective amplitude c.
    pub fn gap_bound(&self) -> f64 {
        let r = self.breaking_spec.radius;
        self.effective_amplitude * (2.0 - 0.5 * r * r)
    }
}

/// Builds the combined hard dataset: symmetric S₀, numerically estimated
/// boundary level, breaking S₁ sized so the *combined* loss carries the
/// requested linear amplitude, and the weighted concatenation.
pub fn build_hard_instance(
    circuit: &CircuitSpec,
    sym: &SymmetricTargetSpec,
    cfg: &HardInstanceConfig,
    rng: &mut impl Rng,
) -> Result<HardInstance> {
    if !(cfg.amplitude_fraction > 0.0 && cfg.amplitude_fraction < 1.0) {
        return Err(Error::InvalidArgument(
            "amplitude fraction must lie in (0, 1)".into(),
        ));
    }
    if cfg.ratio.0 <= 0.0 || cfg.ratio.1 <= 0.0 {
        return Err(Error::InvalidArgument(
            "hard instance needs positive group weights".into(),
        ));
    }
    let p = circuit.p();
    let symmetric = build_symmetric(circuit, sym)?;

    // boundary level: minimum of the S₀ loss over the radius-r sphere
    let mut boundary = f64::INFINITY;
    for _ in 0..cfg.sphere_probes.max(1) {
        let mut dir: Vec<f64> = (0..p)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        let theta: Vec<f64> = sym
            .theta_star()
            .iter()
            .zip(&mut dir)
            .map(|(t, d)| t + *d * cfg.radius / norm)
            .collect();
        boundary = boundary.min(loss(circuit, &symmetric.dataset, &theta)?);
    }
    if !(boundary > 0.0) {
        return Err(Error::DegenerateLandscape(format!(
            "symmetric loss vanishes on the radius-{} sphere",
            cfg.radius
        )));
    }

    let w0 = cfg.ratio.0 / (cfg.ratio.0 + cfg.ratio.1);
    let w1 = 1.0 - w0;
    // effective quantities in the combined loss
    let effective_bound = w0 * boundary / (2.0 * p as f64 * cfg.radius * cfg.radius);
    let effective_amplitude = cfg.amplitude_fraction * effective_bound;
    // the S₁ loss enters scaled by w1, so its raw amplitude compensates
    let spec = BreakingSpec::new(
        effective_amplitude / w1,
        cfg.radius,
        boundary * w0 / w1,
        cfg.epsilon,
    )?;
    let breaking = build_breaking(circuit, sym.theta_star(), &spec)?;
    let dataset = combine(&symmetric.dataset, &breaking.dataset, cfg.ratio.0, cfg.ratio.1)?;
    Ok(HardInstance {
        circuit: circuit.clone(),
        dataset,
        theta_star: sym.theta_star().to_vec(),
        symmetric,
        breaking,
        breaking_spec: spec,
        effective_amplitude,
        boundary_level: boundary * w0,
    })
}
