//! Heisenberg-picture trigonometric expansion of observables.
//!
//! For a two-level generator `H`, conjugation splits any Hermitian `A` into
//! a commuting part and two anticommuting parts:
//!
//! ```text
//! Φ⁰(A) = (A + HAH)/2      Φ¹(A) = (A − HAH)/2      Φ²(A) = (i/2)[H, A]
//! e^{iθH} A e^{−iθH} = Φ⁰(A) + Φ¹(A)·cos 2θ + Φ²(A)·sin 2θ
//! ```
//!
//! Composing one map per gate indexes the expansion of `M(θ) = U†(θ) M U(θ)`
//! by ξ ∈ {0,1,2}^p. The composition applies the index-p map to `M` first
//! (the innermost conjugation), matching the gate order `U = V_p ⋯ V_1` of
//! [`crate::circuit`].
//!
//! Scalar projections `tr(ρ Φ_ξ(M))` turn the operator expansion into a
//! trigonometric polynomial in cos 2θ_l / sin 2θ_l; [`fourier_report`]
//! independently certifies the Fourier degree of any π-periodic loss by a
//! multidimensional DFT.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitSpec, TwoLevelGenerator};
use crate::numerics::{re, C64, DensityOperator, HermitianOperator};
use crate::{tol, Error, Result};

/// Expansion index: one symbol from {0, 1, 2} per parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        if symbols.is_empty() || symbols.iter().any(|&s| s > 2) {
            return Err(Error::InvalidArgument(
                "multi-index symbols must be in {0,1,2} and non-empty".into(),
            ));
        }
        Ok(Self(symbols))
    }

    /// Decodes the base-3 code with ξ₁ as the most significant digit.
    pub fn from_code(mut code: usize, p: usize) -> Self {
        let mut symbols = vec![0u8; p];
        for l in (0..p).rev() {
            symbols[l] = (code % 3) as u8;
            code /= 3;
        }
        Self(symbols)
    }

    /// Base-3 code, inverse of [`MultiIndex::from_code`].
    pub fn code(&self) -> usize {
        self.0.iter().fold(0usize, |acc, &s| acc * 3 + s as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    /// Number of non-zero symbols.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&s| s != 0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.weight() == 0
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Applies Φ⁽ʲ⁾ of the given generator to a Hermitian operator.
pub fn phi_map(h: &TwoLevelGenerator, j: u8, a: &HermitianOperator) -> Result<HermitianOperator> {
    if h.dim() != a.dim() {
        return Err(Error::DimensionMismatch(h.dim(), a.dim()));
    }
    let hm = h.hamiltonian().matrix();
    let am = a.matrix();
    let mat = match j {
        0 | 1 => {
            let hah = hm.matmul(am).matmul(hm);
            if j == 0 {
                am.add(&hah).scale(re(0.5))
            } else {
                am.sub(&hah).scale(re(0.5))
            }
        }
        2 => {
            let comm = hm.matmul(am).sub(&am.matmul(hm));
            comm.scale(C64::new(0.0, 0.5))
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "phi_map component must be 0, 1 or 2, got {j}"
            )))
        }
    };
    Ok(HermitianOperator::trusted(mat))
}

/// All `3^p` operator coefficients `Φ_ξ(M)` of one circuit.
#[derive(Debug, Clone)]
pub struct OperatorExpansion {
    p: usize,
    dim: usize,
    coeffs: Vec<HermitianOperator>,
}

impl OperatorExpansion {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficient(&self, xi: &MultiIndex) -> &HermitianOperator {
        assert_eq!(xi.len(), self.p);
        &self.coeffs[xi.code()]
    }

    pub fn coefficient_by_code(&self, code: usize) -> &HermitianOperator {
        &self.coeffs[code]
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, &HermitianOperator)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(code, op)| (MultiIndex::from_code(code, self.p), op))
    }
}

/// Cap on the memory footprint of a full operator expansion.
const EXPANSION_BYTES_CAP: usize = 1 << 30;

/// Expands `M(θ)` into all `3^p` operator coefficients.
///
/// The expansion is built level by level from the innermost gate: processing
/// generator p first and generator 1 last realizes
/// `Φ_ξ = Φ₁^{(ξ₁)} ∘ ⋯ ∘ Φ_p^{(ξ_p)}` applied to `M`.
pub fn expand_observable(circuit: &CircuitSpec) -> Result<OperatorExpansion> {
    let p = circuit.p();
    let dim = circuit.dim();
    if p > 8 {
        return Err(Error::CapacityExceeded {
            context: "expand_observable",
            detail: format!("p = {p} exceeds the 3^p coefficient cap of p ≤ 8"),
        });
    }
    let count = 3usize.pow(p as u32);
    let bytes = count
        .saturating_mul(dim * dim)
        .saturating_mul(std::mem::size_of::<C64>());
    if bytes > EXPANSION_BYTES_CAP {
        return Err(Error::CapacityExceeded {
            context: "expand_observable",
            detail: format!("{count} coefficients of dim {dim} need {bytes} bytes"),
        });
    }
    let mut coeffs = vec![circuit.observable().clone()];
    for l in (0..p).rev() {
        let g = &circuit.generators()[l];
        let mut next = Vec::with_capacity(coeffs.len() * 3);
        for j in 0..3u8 {
            for op in &coeffs {
                next.push(phi_map(g, j, op)?);
            }
        }
        coeffs = next;
    }
    Ok(OperatorExpansion { p, dim, coeffs })
}

/// Real-coefficient trigonometric polynomial over the `{1, cos 2θ_l, sin 2θ_l}`
/// product basis, stored densely by multi-index code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarTrigPoly {
    p: usize,
    coeffs: Vec<f64>,
}

impl ScalarTrigPoly {
    pub fn zero(p: usize) -> Self {
        Self {
            p,
            coeffs: vec![0.0; 3usize.pow(p as u32)],
        }
    }

    pub fn from_coeffs(p: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != 3usize.pow(p as u32) {
            return Err(Error::InvalidArgument(format!(
                "expected 3^{p} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { p, coeffs })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn coefficient(&self, xi: &MultiIndex) -> f64 {
        assert_eq!(xi.len(), self.p);
        self.coeffs[xi.code()]
    }

    pub fn set_coefficient(&mut self, xi: &MultiIndex, value: f64) {
        assert_eq!(xi.len(), self.p);
        self.coeffs[xi.code()] = value;
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::ParamCountMismatch {
                expected: self.p,
                got: other.p,
            });
        }
        Ok(Self {
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Multiplies by `a + b·cos 2θ_axis + c·sin 2θ_axis` for an axis the
    /// polynomial does not touch yet (all coefficients with a non-zero
    /// symbol there must vanish).
    pub(crate) fn mul_fresh_axis(&self, axis: usize, a: f64, b: f64, c: f64) -> Self {
        let mut out = Self::zero(self.p);
        let stride = 3usize.pow((self.p - 1 - axis) as u32);
        for (code, &v) in self.coeffs.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let digit = (code / stride) % 3;
            debug_assert_eq!(digit, 0, "axis {axis} already used");
            out.coeffs[code] += a * v;
            out.coeffs[code + stride] += b * v;
            out.coeffs[code + 2 * stride] += c * v;
        }
        out
    }

    /// Flips the sign of every coefficient with ξ_axis ∈ {1, 2}: the exact
    /// coefficient-level image of the shift θ_axis ↦ θ_axis + π/2.
    pub fn quarter_shift_axis(&self, axis: usize) -> Self {
        let stride = 3usize.pow((self.p - 1 - axis) as u32);
        let mut out = self.clone();
        for (code, v) in out.coeffs.iter_mut().enumerate() {
            if (code / stride) % 3 != 0 {
                *v = -*v;
            }
        }
        out
    }

    /// Evaluates by contracting one axis at a time, innermost first.
    pub fn eval(&self, theta: &[f64]) -> f64 {
        assert_eq!(theta.len(), self.p);
        let mut buf = self.coeffs.clone();
        for l in (0..self.p).rev() {
            let cos = (2.0 * theta[l]).cos();
            let sin = (2.0 * theta[l]).sin();
            let len = buf.len() / 3;
            for idx in 0..len {
                buf[idx] = buf[3 * idx] + cos * buf[3 * idx + 1] + sin * buf[3 * idx + 2];
            }
            buf.truncate(len);
        }
        buf[0]
    }

    /// Value and full gradient.
    pub fn eval_with_grad(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let value = self.eval(theta);
        let mut grad = vec![0.0; self.p];
        for l in 0..self.p {
            let mut buf = self.coeffs.clone();
            for axis in (0..self.p).rev() {
                let (a, b, c) = if axis == l {
                    // d/dθ of (1, cos 2θ, sin 2θ)
                    (
                        0.0,
                        -2.0 * (2.0 * theta[axis]).sin(),
                        2.0 * (2.0 * theta[axis]).cos(),
                    )
                } else {
                    (1.0, (2.0 * theta[axis]).cos(), (2.0 * theta[axis]).sin())
                };
                let len = buf.len() / 3;
                for idx in 0..len {
                    buf[idx] = a * buf[3 * idx] + b * buf[3 * idx + 1] + c * buf[3 * idx + 2];
                }
                buf.truncate(len);
            }
            grad[l] = buf[0];
        }
        (value, grad)
    }
}

/// Projects the operator expansion onto one state: coefficients
/// `tr(ρ Φ_ξ(M))`.
pub fn project_datum(exp: &OperatorExpansion, state: &DensityOperator) -> Result<ScalarTrigPoly> {
    if state.dim() != exp.dim() {
        return Err(Error::DimensionMismatch(state.dim(), exp.dim()));
    }
    let coeffs = exp
        .coeffs
        .iter()
        .map(|op| state.matrix().trace_product(op.matrix()).re)
        .collect();
    Ok(ScalarTrigPoly { p: exp.p, coeffs })
}

/// Evaluates `Σ_ξ c_ξ Π cos 2θ_l Π sin 2θ_{l'}`.
pub fn eval_poly(poly: &ScalarTrigPoly, theta: &[f64]) -> f64 {
    poly.eval(theta)
}

/// One retained frequency line of a DFT support set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyLine {
    /// Signed integer frequency per axis, in units of the fundamental
    /// (period π per axis, so `k = 1` means `e^{i 2θ}`).
    pub k: Vec<i64>,
    pub magnitude: f64,
}

/// DFT support of a loss function with the ℓ1-degree diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierReport {
    pub grid_shape: Vec<usize>,
    pub support: Vec<FrequencyLine>,
    /// ℓ1 Fourier degree `Δ_K = max_{k ∈ K} Σ_l |k_l|`.
    pub delta_k: usize,
    /// Certified band `2p` for two-level generators.
    pub degree_bound: usize,
    pub within_bound: bool,
    pub peak_magnitude: f64,
    /// Largest magnitude among coefficients outside the certified band.
    pub max_out_of_band: f64,
}

/// Cap on the total DFT grid size.
const FOURIER_GRID_CAP: usize = 1 << 22;

/// Samples a π-periodic loss on a uniform grid over `[0, π)^p` and reports
/// its Fourier support, ℓ1 degree and out-of-band mass.
///
/// The support keeps frequencies whose magnitude exceeds `1e−8` of the peak.
/// Fails if a wraparound probe shows the loss is not π-periodic on some axis.
pub fn fourier_report(
    lossfn: impl Fn(&[f64]) -> f64,
    p: usize,
    samples_per_axis: usize,
) -> Result<FourierReport> {
    if p == 0 {
        return Err(Error::InvalidArgument("fourier_report needs p ≥ 1".into()));
    }
    let n = samples_per_axis;
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "samples_per_axis must be a power of two ≥ 8, got {n}"
        )));
    }
    let total = n
        .checked_pow(p as u32)
        .filter(|&t| t <= FOURIER_GRID_CAP)
        .ok_or_else(|| Error::CapacityExceeded {
            context: "fourier_report",
            detail: format!("grid {n}^{p} exceeds the sample cap"),
        })?;

    // wraparound probe at a few fixed points
    let pi = std::f64::consts::PI;
    for probe in 0..3 {
        let theta: Vec<f64> = (0..p)
            .map(|l| 0.23 + 0.61 * probe as f64 + 0.37 * l as f64)
            .collect();
        let base = lossfn(&theta);
        for axis in 0..p {
            let mut shifted = theta.clone();
            shifted[axis] += pi;
            let residual = (lossfn(&shifted) - base).abs();
            if residual > 1e-9 * (1.0 + base.abs()) {
                return Err(Error::NotPeriodic { axis, residual });
            }
        }
    }

    // sample on the grid, row-major over axes
    let mut values: Vec<C64> = Vec::with_capacity(total);
    let mut theta = vec![0.0; p];
    for flat in 0..total {
        let mut rem = flat;
        for l in (0..p).rev() {
            theta[l] = pi * ((rem % n) as f64) / n as f64;
            rem /= n;
        }
        values.push(re(lossfn(&theta)));
    }

    // in-place DFT along every axis
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut line = vec![C64::ZERO; n];
    for axis in 0..p {
        let stride = n.pow((p - 1 - axis) as u32);
        let block = stride * n;
        for base in 0..total / block {
            for offset in 0..stride {
                let start = base * block + offset;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = values[start + j * stride];
                }
                fft.process(&mut line);
                for (j, slot) in line.iter().enumerate() {
                    values[start + j * stride] = *slot;
                }
            }
        }
    }
    let norm = 1.0 / total as f64;

    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max) * norm;
    let threshold = tol::FOURIER_SUPPORT_REL * peak;
    let degree_bound = 2 * p;
    let mut support = Vec::new();
    let mut delta_k = 0usize;
    let mut max_out_of_band = 0.0f64;
    for (flat, v) in values.iter().enumerate() {
        let magnitude = v.norm() * norm;
        let mut rem = flat;
        let mut k = vec![0i64; p];
        for l in (0..p).rev() {
            let j = rem % n;
            rem /= n;
            k[l] = if j <= n / 2 {
                j as i64
            } else {
                j as i64 - n as i64
            };
        }
        let l1: usize = k.iter().map(|x| x.unsigned_abs() as usize).sum();
        if l1 > degree_bound {
            max_out_of_band = max_out_of_band.max(magnitude);
        }
        if magnitude > threshold {
            delta_k = delta_k.max(l1);
            support.push(FrequencyLine { k, magnitude });
        }
    }
    support.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));

    Ok(FourierReport {
        grid_shape: vec![n; p],
        support,
        delta_k,
        degree_bound,
        within_bound: delta_k <= degree_bound,
        peak_magnitude: peak,
        max_out_of_band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{evaluate, CircuitSpec, TwoLevelGenerator};
    use crate::numerics::{kron, kron_all, pauli, ComplexMatrix};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z_gen() -> TwoLevelGenerator {
        TwoLevelGenerator::new(HermitianOperator::new(pauli::z()).unwrap()).unwrap()
    }

    fn yi() -> HermitianOperator {
        HermitianOperator::new(pauli::y().add(&pauli::i2())).unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> HermitianOperator {
        let raw = ComplexMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        HermitianOperator::trusted(raw.add(&raw.adjoint()).scale(re(0.5)))
    }

    fn c_of(poly: &ScalarTrigPoly, s: Vec<u8>) -> f64 {
        poly.coefficient(&MultiIndex::new(s).unwrap())
    }

    #[test]
    fn multi_index_codes_round_trip() {
        let xi = MultiIndex::new(vec![1, 2, 0]).unwrap();
        assert_eq!(xi.code(), 9 + 2 * 3);
        assert_eq!(MultiIndex::from_code(xi.code(), 3), xi);
        assert_eq!(xi.weight(), 2);
        assert_eq!(xi.to_string(), "120");
        assert!(MultiIndex::new(vec![3]).is_err());
    }

    #[test]
    fn phi_map_on_pauli_example() {
        let g = z_gen();
        let a = yi();
        let phi0 = phi_map(&g, 0, &a).unwrap();
        let phi1 = phi_map(&g, 1, &a).unwrap();
        let phi2 = phi_map(&g, 2, &a).unwrap();
        assert!(phi0.matrix().max_abs_diff(&pauli::i2()) < 1e-15);
        assert!(phi1.matrix().max_abs_diff(&pauli::y()) < 1e-15);
        assert!(phi2.matrix().max_abs_diff(&pauli::x()) < 1e-15);
        // integer entries: the split is exact
        assert_eq!(phi0.add(&phi1).matrix(), a.matrix());
        assert!(phi_map(&g, 3, &a).is_err());
    }

    #[test]
    fn phi_outputs_commute_or_anticommute_with_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = z_gen();
        let h = g.hamiltonian().matrix();
        for _ in 0..20 {
            let a = random_hermitian(&mut rng, 2);
            let p0 = phi_map(&g, 0, &a).unwrap();
            let comm = h.matmul(p0.matrix()).sub(&p0.matrix().matmul(h));
            assert!(comm.max_abs() <= 1e-10);
            for j in [1, 2] {
                let pj = phi_map(&g, j, &a).unwrap();
                let anti = h.matmul(pj.matrix()).add(&pj.matrix().matmul(h));
                assert!(anti.max_abs() <= 1e-10);
            }
            let split = phi_map(&g, 0, &a)
                .unwrap()
                .add(&phi_map(&g, 1, &a).unwrap());
            assert!(split.matrix().max_abs_diff(a.matrix()) <= 1e-14);
        }
    }

    #[test]
    fn phi_trace_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = z_gen();
        for _ in 0..20 {
            let a = random_hermitian(&mut rng, 2);
            assert!((phi_map(&g, 0, &a).unwrap().trace_re() - a.trace_re()).abs() <= 1e-10);
            assert!(phi_map(&g, 1, &a).unwrap().trace_re().abs() <= 1e-10);
            assert!(phi_map(&g, 2, &a).unwrap().trace_re().abs() <= 1e-10);
        }
    }

    #[test]
    fn phi_components_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g = z_gen();
        for _ in 0..20 {
            let a = random_hermitian(&mut rng, 2);
            let parts: Vec<HermitianOperator> =
                (0..3).map(|j| phi_map(&g, j, &a).unwrap()).collect();
            for j in 0..3 {
                for k in 0..3 {
                    if j != k {
                        assert!(parts[j].inner(&parts[k]).abs() <= 1e-10);
                    }
                }
            }
        }
    }

    fn two_qubit_example() -> CircuitSpec {
        let z1 = HermitianOperator::new(kron(&pauli::z(), &pauli::i2()).unwrap()).unwrap();
        let z2 = HermitianOperator::new(kron(&pauli::i2(), &pauli::z()).unwrap()).unwrap();
        let m = HermitianOperator::new(
            kron(&pauli::y().add(&pauli::i2()), &pauli::y().add(&pauli::i2())).unwrap(),
        )
        .unwrap();
        CircuitSpec::new(
            vec![
                TwoLevelGenerator::with_qubit(z1, 0).unwrap(),
                TwoLevelGenerator::with_qubit(z2, 1).unwrap(),
            ],
            m,
            false,
        )
        .unwrap()
    }

    #[test]
    fn expansion_single_qubit_example() {
        let circuit = CircuitSpec::new(vec![z_gen()], yi(), false).unwrap();
        let exp = expand_observable(&circuit).unwrap();
        assert_eq!(exp.len(), 3);
        let get = |s: Vec<u8>| exp.coefficient(&MultiIndex::new(s).unwrap()).clone();
        assert!(get(vec![0]).matrix().max_abs_diff(&pauli::i2()) < 1e-15);
        assert!(get(vec![1]).matrix().max_abs_diff(&pauli::y()) < 1e-15);
        assert!(get(vec![2]).matrix().max_abs_diff(&pauli::x()) < 1e-15);
    }

    #[test]
    fn expansion_factorizes_on_product_operators() {
        let exp = expand_observable(&two_qubit_example()).unwrap();
        let xi = MultiIndex::new(vec![1, 2]).unwrap();
        let want = kron(&pauli::y(), &pauli::x()).unwrap();
        assert!(exp.coefficient(&xi).matrix().max_abs_diff(&want) <= 1e-14);
    }

    #[test]
    fn expansion_reassembles_observable_at_zero() {
        // at θ = 0 every cos factor is 1 and every sin factor 0
        let circuit = two_qubit_example();
        let exp = expand_observable(&circuit).unwrap();
        let mut sum = HermitianOperator::zero(4);
        for (xi, op) in exp.iter() {
            if xi.symbols().iter().all(|&s| s != 2) {
                sum = sum.add(op);
            }
        }
        assert!(sum.matrix().max_abs_diff(circuit.observable().matrix()) <= 1e-10);
    }

    #[test]
    fn expansion_rejects_large_p() {
        let g = z_gen();
        let circuit = CircuitSpec::new(vec![g; 9], yi(), false).unwrap();
        assert!(matches!(
            expand_observable(&circuit),
            Err(Error::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn projection_single_qubit_examples() {
        let circuit = CircuitSpec::new(vec![z_gen()], yi(), false).unwrap();
        let exp = expand_observable(&circuit).unwrap();

        let plus = DensityOperator::new(pauli::i2().add(&pauli::x()).scale(re(0.5))).unwrap();
        let poly = project_datum(&exp, &plus).unwrap();
        assert!((c_of(&poly, vec![0]) - 1.0).abs() < 1e-14);
        assert!(c_of(&poly, vec![1]).abs() < 1e-14);
        assert!((c_of(&poly, vec![2]) - 1.0).abs() < 1e-14);

        let mixed = DensityOperator::maximally_mixed(2);
        let poly = project_datum(&exp, &mixed).unwrap();
        assert!((c_of(&poly, vec![0]) - 1.0).abs() < 1e-14);
        assert!(c_of(&poly, vec![1]).abs() < 1e-14);
        assert!(c_of(&poly, vec![2]).abs() < 1e-14);

        let y_state = DensityOperator::new(pauli::i2().add(&pauli::y()).scale(re(0.5))).unwrap();
        let poly = project_datum(&exp, &y_state).unwrap();
        assert!((c_of(&poly, vec![1]) - 1.0).abs() < 1e-14);
        assert!(c_of(&poly, vec![2]).abs() < 1e-14);
    }

    #[test]
    fn eval_poly_basics() {
        let mut poly = ScalarTrigPoly::zero(1);
        poly.set_coefficient(&MultiIndex::new(vec![0]).unwrap(), 1.0);
        poly.set_coefficient(&MultiIndex::new(vec![2]).unwrap(), 1.0);
        let v = eval_poly(&poly, &[std::f64::consts::FRAC_PI_4]);
        assert!((v - 2.0).abs() < 1e-14);

        let zero = ScalarTrigPoly::zero(3);
        for t in [[0.0, 1.0, 2.0], [0.5, 0.5, 0.5]] {
            assert_eq!(eval_poly(&zero, &t), 0.0);
        }
    }

    #[test]
    fn poly_agrees_with_matrix_simulation() {
        // p = 3 product circuit, 100 random parameter points
        let mut gens = Vec::new();
        let mut m = yi();
        for _ in 1..3 {
            m = m.kron(&yi());
        }
        for l in 0..3 {
            let mut factors = vec![pauli::i2(); 3];
            factors[l] = pauli::z();
            let h = HermitianOperator::new(kron_all(&factors).unwrap()).unwrap();
            gens.push(TwoLevelGenerator::with_qubit(h, l).unwrap());
        }
        let circuit = CircuitSpec::new(gens, m, false).unwrap();
        let exp = expand_observable(&circuit).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let w = crate::numerics::haar_unitary(8, &mut rng).unwrap();
        let mut diag = ComplexMatrix::zeros(8, 8);
        let probs: Vec<f64> = (0..8).map(|_| rng.random::<f64>() + 0.05).collect();
        let total: f64 = probs.iter().sum();
        for i in 0..8 {
            diag.set(i, i, re(probs[i] / total));
        }
        let rho = DensityOperator::new(diag.conjugated_by(w.matrix())).unwrap();
        let poly = project_datum(&exp, &rho).unwrap();
        for _ in 0..100 {
            let theta: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 6.3).collect();
            let trig = poly.eval(&theta);
            let sim = evaluate(&circuit, &rho, &theta).unwrap();
            assert!((trig - sim).abs() <= 1e-9, "trig {trig} vs sim {sim}");
        }
    }

    #[test]
    fn poly_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mut poly = ScalarTrigPoly::zero(3);
        for code in 0..poly.coeffs.len() {
            poly.coeffs[code] = rng.random::<f64>() - 0.5;
        }
        let theta: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 6.0).collect();
        let (v, g) = poly.eval_with_grad(&theta);
        assert!((v - poly.eval(&theta)).abs() < 1e-14);
        let h = 1e-6;
        for l in 0..3 {
            let mut tp = theta.clone();
            tp[l] += h;
            let mut tm = theta.clone();
            tm[l] -= h;
            let fd = (poly.eval(&tp) - poly.eval(&tm)) / (2.0 * h);
            assert!((g[l] - fd).abs() <= 1e-7);
        }
    }

    #[test]
    fn quarter_shift_flips_signs_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut poly = ScalarTrigPoly::zero(2);
        for code in 0..poly.coeffs.len() {
            poly.coeffs[code] = rng.random::<f64>() - 0.5;
        }
        for axis in 0..2 {
            let flipped = poly.quarter_shift_axis(axis);
            for _ in 0..20 {
                let theta: Vec<f64> = (0..2).map(|_| rng.random::<f64>() * 6.0).collect();
                let mut shifted = theta.clone();
                shifted[axis] += std::f64::consts::FRAC_PI_2;
                assert!((poly.eval(&shifted) - flipped.eval(&theta)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn fourier_of_base_closed_form() {
        // (1/2)[sin² 2θ + ¼ (cos 2θ − 1)²] has support {0, ±1, ±2}
        let f = |t: &[f64]| {
            let s = (2.0 * t[0]).sin();
            let c = (2.0 * t[0]).cos();
            0.5 * (s * s + 0.25 * (c - 1.0) * (c - 1.0))
        };
        let report = fourier_report(f, 1, 32).unwrap();
        assert_eq!(report.delta_k, 2);
        assert!(report.within_bound);
        let mut ks: Vec<i64> = report.support.iter().map(|l| l.k[0]).collect();
        ks.sort_unstable();
        assert_eq!(ks, vec![-2, -1, 0, 1, 2]);
        assert!(report.max_out_of_band <= 1e-8 * report.peak_magnitude);
    }

    #[test]
    fn fourier_of_separable_p2_form() {
        let f = |t: &[f64]| {
            t.iter()
                .map(|&x| {
                    let s = (2.0 * x).sin();
                    let c = (2.0 * x).cos();
                    (s * s + 0.25 * (c - 1.0) * (c - 1.0)) / 4.0
                })
                .sum::<f64>()
        };
        let report = fourier_report(f, 2, 16).unwrap();
        // separable: no mixed frequencies, so the ℓ1 degree stays 2 ≤ 4
        assert_eq!(report.delta_k, 2);
        assert!(report.within_bound);
        for line in &report.support {
            assert!(line.k.iter().filter(|&&k| k != 0).count() <= 1);
        }
    }

    #[test]
    fn fourier_of_constant_loss() {
        let report = fourier_report(|_| 1.25, 2, 8).unwrap();
        assert_eq!(report.delta_k, 0);
        assert_eq!(report.support.len(), 1);
        assert_eq!(report.support[0].k, vec![0, 0]);
    }

    #[test]
    fn fourier_rejects_aperiodic_loss() {
        let err = fourier_report(|t: &[f64]| t[1], 2, 8).unwrap_err();
        match err {
            Error::NotPeriodic { axis, .. } => assert_eq!(axis, 1),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(fourier_report(|_| 0.0, 1, 12).is_err());
    }

    proptest! {
        #[test]
        fn phi_map_is_linear(
            alpha in -2.0f64..2.0,
            beta in -2.0f64..2.0,
            seed in 0u64..1000,
            j in 0u8..3,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = z_gen();
            let a = random_hermitian(&mut rng, 2);
            let b = random_hermitian(&mut rng, 2);
            let combo = a.scale_re(alpha).add(&b.scale_re(beta));
            let lhs = phi_map(&g, j, &combo).unwrap();
            let rhs = phi_map(&g, j, &a)
                .unwrap()
                .scale_re(alpha)
                .add(&phi_map(&g, j, &b).unwrap().scale_re(beta));
            prop_assert!(lhs.matrix().max_abs_diff(rhs.matrix()) <= 1e-12);
        }
    }
}
