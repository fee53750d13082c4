//! Linear independence of the Φ-coefficient family and the random-QNN model.
//!
//! A circuit is "with linear independence" when the `3^p − 1` operators
//! `Φ_ξ(M)`, ξ ≠ 0, are linearly independent; the hard-dataset construction
//! requires it. The test is spectral: form the Gram matrix of pairwise
//! Hilbert–Schmidt inner products and check its smallest eigenvalue against a
//! relative floor. The Gershgorin row margin is reported as the cheaper
//! sufficient certificate.
//!
//! The random model draws `p` generators `W_l H W_l†` with Haar `W_l` and a
//! fixed traceless two-level base `H`. [`moment_study`] verifies the
//! first-moment predictions for Gram entries by Monte Carlo:
//! `E[tr(Φ_ξ(M)²)] = tr(M²)/2^p (1 + O(p d⁻²))` and zero off-diagonal mean.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitSpec, TwoLevelGenerator};
use crate::numerics::{min_eigenvalue, re, ComplexMatrix, HermitianOperator, UnitaryMatrix};
use crate::stream::task_rng;
use crate::trig::{expand_observable, MultiIndex, OperatorExpansion};
use crate::{tol, Error, Result};

/// Gram matrix of `{Φ_ξ(M)}`, ξ ≠ 0, with spectral diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    /// `3^p − 1`.
    pub order: usize,
    /// Row-major symmetric matrix; row/column `i` corresponds to the
    /// multi-index with code `i + 1`.
    pub gram: Vec<f64>,
    pub lambda_min: f64,
    /// `min_i (G_ii − Σ_{j≠i} |G_ij|)`; positive margin certifies positive
    /// definiteness by the Gershgorin circle theorem.
    pub gershgorin_margin: f64,
    pub independent: bool,
    /// Relative eigenvalue floor actually used: `1e−8 · max_i G_ii`.
    pub tolerance: f64,
}

impl GramReport {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.order + j]
    }
}

/// Gram matrix of the non-zero coefficient family of an existing expansion.
pub(crate) fn gram_of_expansion(exp: &OperatorExpansion) -> GramReport {
    let order = exp.len() - 1;
    let mut gram = vec![0.0; order * order];
    for i in 0..order {
        for j in i..order {
            let v = exp
                .coefficient_by_code(i + 1)
                .inner(exp.coefficient_by_code(j + 1));
            gram[i * order + j] = v;
            gram[j * order + i] = v;
        }
    }
    let max_diag = (0..order)
        .map(|i| gram[i * order + i])
        .fold(0.0f64, f64::max);
    let gershgorin_margin = (0..order)
        .map(|i| {
            let off: f64 = (0..order)
                .filter(|&j| j != i)
                .map(|j| gram[i * order + j].abs())
                .sum();
            gram[i * order + i] - off
        })
        .fold(f64::INFINITY, f64::min);
    let as_matrix = ComplexMatrix::from_fn(order, order, |i, j| re(gram[i * order + j]));
    let lambda_min = min_eigenvalue(&HermitianOperator::trusted(as_matrix));
    let tolerance = tol::GRAM_INDEPENDENCE_REL * max_diag;
    GramReport {
        order,
        gram,
        lambda_min,
        gershgorin_margin,
        independent: lambda_min > tolerance,
        tolerance,
    }
}

/// Builds the Gram report for a circuit (requires `p ≤ 8` for the expansion).
pub fn gram_report(circuit: &CircuitSpec) -> Result<GramReport> {
    let exp = expand_observable(circuit)?;
    Ok(gram_of_expansion(&exp))
}

/// Random-QNN model: `p` generators `W_l H W_l†` with i.i.d. Haar `W_l`.
#[derive(Debug, Clone)]
pub struct RandomModelConfig {
    dim: usize,
    p: usize,
    base: HermitianOperator,
    seed: u64,
}

impl RandomModelConfig {
    /// Uses the balanced base `H = diag(+1, …, +1, −1, …, −1)`, which needs
    /// an even dimension.
    pub fn new(dim: usize, p: usize, seed: u64) -> Result<Self> {
        if dim < 2 || dim % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "balanced base Hamiltonian needs an even dim ≥ 2, got {dim}"
            )));
        }
        if p == 0 {
            return Err(Error::InvalidArgument("random model needs p ≥ 1".into()));
        }
        let mut h = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            h.set(i, i, re(if i < dim / 2 { 1.0 } else { -1.0 }));
        }
        Ok(Self {
            dim,
            p,
            base: HermitianOperator::trusted(h),
            seed,
        })
    }

    /// Same model with a caller-provided base Hamiltonian.
    pub fn with_base(base: HermitianOperator, p: usize, seed: u64) -> Result<Self> {
        TwoLevelGenerator::new(base.clone())?;
        if p == 0 {
            return Err(Error::InvalidArgument("random model needs p ≥ 1".into()));
        }
        Ok(Self {
            dim: base.dim(),
            p,
            base,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn validate_observable(m: &HermitianOperator, dim: usize) -> Result<()> {
    if m.dim() != dim {
        return Err(Error::DimensionMismatch(m.dim(), dim));
    }
    let tr = m.trace_re().abs();
    if tr > tol::TWO_LEVEL {
        return Err(Error::NotTraceless(tr));
    }
    if m.matrix().max_abs() == 0.0 {
        return Err(Error::InvalidArgument(
            "observable must be non-zero".into(),
        ));
    }
    Ok(())
}

fn sample_circuit(
    cfg: &RandomModelConfig,
    m: &HermitianOperator,
    rng: &mut impl Rng,
) -> Result<CircuitSpec> {
    let gens: Result<Vec<TwoLevelGenerator>> = (0..cfg.p)
        .map(|_| {
            let w = crate::numerics::haar_unitary(cfg.dim, rng)?;
            TwoLevelGenerator::new(HermitianOperator::trusted(
                cfg.base.matrix().conjugated_by(w.matrix()),
            ))
        })
        .collect();
    CircuitSpec::new(gens?, m.clone(), true)
}

/// Draws one circuit from the random model. Deterministic given the seed.
pub fn sample_random_qnn(cfg: &RandomModelConfig, m: &HermitianOperator) -> Result<CircuitSpec> {
    validate_observable(m, cfg.dim)?;
    let mut rng = task_rng(cfg.seed, "random-qnn", 0);
    sample_circuit(cfg, m, &mut rng)
}

/// Which multi-indices a moment study covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XiSelection {
    /// All weight-1 indices plus the all-ones index.
    Representative,
    /// Every ξ ≠ 0. Only sensible for very small p.
    Full,
}

/// Monte-Carlo estimates of Gram-entry moments under the random model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub samples: usize,
    pub xi_set: Vec<String>,
    /// Mean over samples of the per-sample average diagonal entry.
    pub diag_mean: f64,
    /// Standard error of `diag_mean`.
    pub diag_se: f64,
    /// Pooled variance of individual diagonal entries.
    pub diag_entry_variance: f64,
    pub offdiag_mean: f64,
    pub offdiag_se: f64,
    pub offdiag_entry_variance: f64,
    /// First-moment prediction `tr(M²)/2^p`.
    pub predicted_diag_mean: f64,
}

fn mean_and_se(per_sample: &[f64]) -> (f64, f64) {
    let n = per_sample.len() as f64;
    let mean = per_sample.iter().sum::<f64>() / n;
    let var = per_sample
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn pooled_variance(entries: &[f64]) -> f64 {
    let n = entries.len() as f64;
    let mean = entries.iter().sum::<f64>() / n;
    entries
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (n - 1.0)
}

/// Estimates the mean and variance of diagonal and off-diagonal Gram entries
/// over `n` draws of the random model.
///
/// Per-sample means are averaged over the ξ set first, so standard errors
/// come from `n` independent replicates.
pub fn moment_study(
    cfg: &RandomModelConfig,
    m: &HermitianOperator,
    n: usize,
) -> Result<MomentReport> {
    moment_study_with(cfg, m, n, XiSelection::Representative)
}

/// [`moment_study`] with an explicit ξ selection.
pub fn moment_study_with(
    cfg: &RandomModelConfig,
    m: &HermitianOperator,
    n: usize,
    selection: XiSelection,
) -> Result<MomentReport> {
    validate_observable(m, cfg.dim)?;
    if n < 30 {
        return Err(Error::InsufficientSamples { got: n, min: 30 });
    }
    if cfg.p > 4 {
        return Err(Error::CapacityExceeded {
            context: "moment_study",
            detail: format!("p = {} exceeds the full-expansion cap of p ≤ 4", cfg.p),
        });
    }
    let p = cfg.p;
    let codes: Vec<usize> = match selection {
        XiSelection::Full => (1..3usize.pow(p as u32)).collect(),
        XiSelection::Representative => {
            let mut codes = Vec::new();
            for l in 0..p {
                for j in [1usize, 2] {
                    codes.push(j * 3usize.pow((p - 1 - l) as u32));
                }
            }
            // the all-ones index
            codes.push((0..p).fold(0usize, |acc, _| acc * 3 + 1));
            codes
        }
    };

    let mut diag_per_sample = Vec::with_capacity(n);
    let mut off_per_sample = Vec::with_capacity(n);
    let mut diag_entries = Vec::new();
    let mut off_entries = Vec::new();
    for i in 0..n {
        let mut rng = task_rng(cfg.seed, "moments", i as u64);
        let circuit = sample_circuit(cfg, m, &mut rng)?;
        let exp = expand_observable(&circuit)?;
        let ops: Vec<&HermitianOperator> =
            codes.iter().map(|&c| exp.coefficient_by_code(c)).collect();
        let mut diag_sum = 0.0;
        for op in &ops {
            let v = op.inner(op);
            diag_sum += v;
            diag_entries.push(v);
        }
        diag_per_sample.push(diag_sum / ops.len() as f64);
        let mut off_sum = 0.0;
        let mut off_count = 0usize;
        for a in 0..ops.len() {
            for b in (a + 1)..ops.len() {
                let v = ops[a].inner(ops[b]);
                off_sum += v;
                off_entries.push(v);
                off_count += 1;
            }
        }
        off_per_sample.push(off_sum / off_count as f64);
    }

    let (diag_mean, diag_se) = mean_and_se(&diag_per_sample);
    let (offdiag_mean, offdiag_se) = mean_and_se(&off_per_sample);
    let m_norm = m.inner(m);
    Ok(MomentReport {
        samples: n,
        xi_set: codes
            .iter()
            .map(|&c| MultiIndex::from_code(c, p).to_string())
            .collect(),
        diag_mean,
        diag_se,
        diag_entry_variance: pooled_variance(&diag_entries),
        offdiag_mean,
        offdiag_se,
        offdiag_entry_variance: pooled_variance(&off_entries),
        predicted_diag_mean: m_norm / 2f64.powi(p as i32),
    })
}

/// Conjugates a circuit and its observable by a fixed unitary. Gram entries
/// are invariant under this basis change.
pub fn conjugate_circuit(circuit: &CircuitSpec, v: &UnitaryMatrix) -> Result<CircuitSpec> {
    if v.dim() != circuit.dim() {
        return Err(Error::DimensionMismatch(v.dim(), circuit.dim()));
    }
    let gens: Result<Vec<TwoLevelGenerator>> = circuit
        .generators()
        .iter()
        .map(|g| {
            TwoLevelGenerator::new(HermitianOperator::trusted(
                g.hamiltonian().matrix().conjugated_by(v.matrix()),
            ))
        })
        .collect();
    CircuitSpec::new(
        gens?,
        HermitianOperator::trusted(circuit.observable().matrix().conjugated_by(v.matrix())),
        circuit.traceless_observable(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{haar_unitary, kron, pauli};

    fn one_layer_p2_yi() -> CircuitSpec {
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
    fn gram_of_product_circuit_is_scaled_identity() {
        let report = gram_report(&one_layer_p2_yi()).unwrap();
        assert_eq!(report.order, 8);
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 4.0 } else { 0.0 };
                assert!(
                    (report.entry(i, j) - want).abs() <= 1e-10,
                    "G[{i}][{j}] = {}",
                    report.entry(i, j)
                );
            }
        }
        assert!(report.independent);
        assert!((report.lambda_min - 4.0).abs() <= 1e-8);
        assert!(report.gershgorin_margin > 3.9);
    }

    #[test]
    fn gram_of_zero_observable_is_dependent() {
        let circuit = CircuitSpec::new(
            vec![TwoLevelGenerator::new(HermitianOperator::new(pauli::z()).unwrap()).unwrap()],
            HermitianOperator::zero(2),
            true,
        )
        .unwrap();
        let report = gram_report(&circuit).unwrap();
        assert!(report.gram.iter().all(|&v| v == 0.0));
        assert!(!report.independent);
    }

    #[test]
    fn gram_of_single_qubit_y_observable() {
        let circuit = CircuitSpec::new(
            vec![TwoLevelGenerator::new(HermitianOperator::new(pauli::z()).unwrap()).unwrap()],
            HermitianOperator::new(pauli::y()).unwrap(),
            true,
        )
        .unwrap();
        let report = gram_report(&circuit).unwrap();
        assert_eq!(report.order, 2);
        assert!((report.entry(0, 0) - 2.0).abs() <= 1e-12);
        assert!((report.entry(1, 1) - 2.0).abs() <= 1e-12);
        assert!(report.entry(0, 1).abs() <= 1e-12);
        assert!(report.independent);
    }

    #[test]
    fn gram_is_basis_independent() {
        use rand::SeedableRng;
        let circuit = one_layer_p2_yi();
        let base = gram_report(&circuit).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let v = haar_unitary(4, &mut rng).unwrap();
        let rotated = conjugate_circuit(&circuit, &v).unwrap();
        let moved = gram_report(&rotated).unwrap();
        for i in 0..base.order {
            for j in 0..base.order {
                assert!((base.entry(i, j) - moved.entry(i, j)).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn random_generators_are_two_level_and_deterministic() {
        let cfg = RandomModelConfig::new(8, 3, 99).unwrap();
        let m = observable_unit_norm(8);
        let c1 = sample_random_qnn(&cfg, &m).unwrap();
        for g in c1.generators() {
            let sq = g.hamiltonian().matrix().matmul(g.hamiltonian().matrix());
            assert!(sq.max_abs_diff(&ComplexMatrix::identity(8)) <= 1e-9);
        }
        let c2 = sample_random_qnn(&cfg, &m).unwrap();
        assert_eq!(c1, c2);

        // traced observable is rejected
        let traced = HermitianOperator::trusted(ComplexMatrix::identity(8));
        assert!(matches!(
            sample_random_qnn(&cfg, &traced),
            Err(Error::NotTraceless(_))
        ));
        assert!(matches!(
            sample_random_qnn(&cfg, &HermitianOperator::zero(8)),
            Err(Error::InvalidArgument(_))
        ));
    }

    fn observable_unit_norm(dim: usize) -> HermitianOperator {
        // balanced ±1/√d diagonal: traceless with tr(M²) = 1
        let mut m = ComplexMatrix::zeros(dim, dim);
        let v = 1.0 / (dim as f64).sqrt();
        for i in 0..dim {
            m.set(i, i, re(if i % 2 == 0 { v } else { -v }));
        }
        HermitianOperator::trusted(m)
    }

    #[test]
    fn most_random_circuits_are_independent() {
        let m = observable_unit_norm(16);
        let mut hits = 0usize;
        let n = 60usize;
        for i in 0..n as u64 {
            let cfg = RandomModelConfig::new(16, 2, 1000 + i).unwrap();
            let circuit = sample_random_qnn(&cfg, &m).unwrap();
            if gram_report(&circuit).unwrap().independent {
                hits += 1;
            }
        }
        assert!(hits * 10 >= n * 9, "only {hits}/{n} independent");
    }

    #[test]
    fn gershgorin_margin_is_sound() {
        let m = observable_unit_norm(8);
        for i in 0..20 {
            let cfg = RandomModelConfig::new(8, 2, 500 + i).unwrap();
            let report = gram_report(&sample_random_qnn(&cfg, &m).unwrap()).unwrap();
            if report.gershgorin_margin > 0.0 {
                assert!(report.lambda_min > 0.0);
            }
            assert!(report.lambda_min >= report.gershgorin_margin - 1e-12);
        }
    }

    #[test]
    fn moment_study_off_diagonal_centers_on_zero() {
        let cfg = RandomModelConfig::new(8, 2, 7).unwrap();
        let m = observable_unit_norm(8);
        let report = moment_study(&cfg, &m, 60).unwrap();
        assert_eq!(report.xi_set.len(), 5);
        assert!(
            report.offdiag_mean.abs() <= 4.0 * report.offdiag_se,
            "offdiag {} ± {}",
            report.offdiag_mean,
            report.offdiag_se
        );
        assert!((report.predicted_diag_mean - 0.25).abs() <= 1e-12);
        assert!(matches!(
            moment_study(&cfg, &m, 10),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn moment_study_full_selection_covers_all_indices() {
        let cfg = RandomModelConfig::new(4, 1, 3).unwrap();
        let m = observable_unit_norm(4);
        let report = moment_study_with(&cfg, &m, 30, XiSelection::Full).unwrap();
        assert_eq!(report.xi_set.len(), 2);
    }
}
