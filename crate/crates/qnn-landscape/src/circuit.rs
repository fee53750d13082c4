//! p-parameter QNNs built from two-level generators.
//!
//! A circuit is the ordered gate product `U(θ) = V_p(θ_p) ⋯ V_1(θ_1)` with
//! `V_l(θ_l) = exp(−i θ_l H_l)`; generator index 1 is applied to the state
//! first. This ordering is load-bearing: the Φ-map composition in [`crate::trig`]
//! applies the index-p map to the observable first, and the two conventions
//! must stay in sync (see the order test there).
//!
//! The observable expectation is `f(ρ, θ) = tr(U(θ) ρ U†(θ) M)` and the
//! training objective is the weighted square loss over a [`Dataset`].

use serde::{Deserialize, Serialize};

use crate::numerics::{re, C64, ComplexMatrix, DensityOperator, HermitianOperator, UnitaryMatrix};
use crate::{tol, Error, Result};

/// Traceless Hermitian generator with `H² = I` (eigenvalues ±1).
///
/// Carries an optional qubit index for single-qubit generators of product
/// circuits; purely informational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeneratorWire", into = "GeneratorWire")]
pub struct TwoLevelGenerator {
    hamiltonian: HermitianOperator,
    qubit: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct GeneratorWire {
    hamiltonian: HermitianOperator,
    qubit: Option<usize>,
}

impl TwoLevelGenerator {
    pub fn new(hamiltonian: HermitianOperator) -> Result<Self> {
        let tr = hamiltonian.trace_re().abs();
        if tr > tol::TWO_LEVEL {
            return Err(Error::NotTraceless(tr));
        }
        let h = hamiltonian.matrix();
        let defect = h
            .matmul(h)
            .max_abs_diff(&ComplexMatrix::identity(hamiltonian.dim()));
        if defect > tol::TWO_LEVEL {
            return Err(Error::NotTwoLevel(defect));
        }
        Ok(Self {
            hamiltonian,
            qubit: None,
        })
    }

    pub fn with_qubit(hamiltonian: HermitianOperator, qubit: usize) -> Result<Self> {
        let mut g = Self::new(hamiltonian)?;
        g.qubit = Some(qubit);
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn qubit(&self) -> Option<usize> {
        self.qubit
    }
}

impl TryFrom<GeneratorWire> for TwoLevelGenerator {
    type Error = Error;
    fn try_from(w: GeneratorWire) -> Result<Self> {
        let mut g = Self::new(w.hamiltonian)?;
        g.qubit = w.qubit;
        Ok(g)
    }
}

impl From<TwoLevelGenerator> for GeneratorWire {
    fn from(g: TwoLevelGenerator) -> Self {
        GeneratorWire {
            hamiltonian: g.hamiltonian,
            qubit: g.qubit,
        }
    }
}

/// Gate matrix `exp(−i θ H) = cos θ · I − i sin θ · H`, exact for two-level
/// generators.
pub fn gate_matrix(g: &TwoLevelGenerator, angle: f64) -> UnitaryMatrix {
    let dim = g.dim();
    let mat = ComplexMatrix::identity(dim)
        .scale(re(angle.cos()))
        .add(&g.hamiltonian().matrix().scale(C64::new(0.0, -angle.sin())));
    UnitaryMatrix::trusted(mat)
}

/// Ordered list of generators plus the measured observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitWire", into = "CircuitWire")]
pub struct CircuitSpec {
    generators: Vec<TwoLevelGenerator>,
    observable: HermitianOperator,
    traceless_observable: bool,
}

#[derive(Serialize, Deserialize)]
struct CircuitWire {
    generators: Vec<TwoLevelGenerator>,
    observable: HermitianOperator,
    traceless_observable: bool,
}

impl CircuitSpec {
    /// `traceless_observable` marks the general construction path, which
    /// requires `tr M = 0`; the canonical example family carries
    /// non-traceless observables with the flag cleared.
    pub fn new(
        generators: Vec<TwoLevelGenerator>,
        observable: HermitianOperator,
        traceless_observable: bool,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidArgument("circuit needs p ≥ 1".into()));
        }
        let dim = observable.dim();
        for g in &generators {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch(g.dim(), dim));
            }
        }
        if traceless_observable {
            let tr = observable.trace_re().abs();
            if tr > tol::TWO_LEVEL {
                return Err(Error::NotTraceless(tr));
            }
        }
        Ok(Self {
            generators,
            observable,
            traceless_observable,
        })
    }

    pub fn p(&self) -> usize {
        self.generators.len()
    }

    pub fn dim(&self) -> usize {
        self.observable.dim()
    }

    pub fn generators(&self) -> &[TwoLevelGenerator] {
        &self.generators
    }

    pub fn observable(&self) -> &HermitianOperator {
        &self.observable
    }

    pub fn traceless_observable(&self) -> bool {
        self.traceless_observable
    }

    fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.p() {
            return Err(Error::ParamCountMismatch {
                expected: self.p(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// Full circuit unitary `U(θ) = V_p ⋯ V_1`.
    pub fn unitary(&self, theta: &[f64]) -> Result<UnitaryMatrix> {
        self.check_params(theta)?;
        let mut u = ComplexMatrix::identity(self.dim());
        for (g, &angle) in self.generators.iter().zip(theta) {
            u = gate_matrix(g, angle).matrix().matmul(&u);
        }
        Ok(UnitaryMatrix::trusted(u))
    }
}

impl TryFrom<CircuitWire> for CircuitSpec {
    type Error = Error;
    fn try_from(w: CircuitWire) -> Result<Self> {
        Self::new(w.generators, w.observable, w.traceless_observable)
    }
}

impl From<CircuitSpec> for CircuitWire {
    fn from(c: CircuitSpec) -> Self {
        CircuitWire {
            generators: c.generators,
            observable: c.observable,
            traceless_observable: c.traceless_observable,
        }
    }
}

/// One training sample: an encoded state, its real label and a positive
/// weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatumWire", into = "DatumWire")]
pub struct QuantumDatum {
    state: DensityOperator,
    label: f64,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct DatumWire {
    state: DensityOperator,
    label: f64,
    weight: f64,
}

impl QuantumDatum {
    pub fn new(state: DensityOperator, label: f64) -> Self {
        Self {
            state,
            label,
            weight: 1.0,
        }
    }

    pub fn with_weight(state: DensityOperator, label: f64, weight: f64) -> Result<Self> {
        if !(weight > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "datum weight must be positive, got {weight}"
            )));
        }
        Ok(Self {
            state,
            label,
            weight,
        })
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn label(&self) -> f64 {
        self.label
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Same state and weight, different label.
    pub fn relabeled(&self, label: f64) -> Self {
        Self {
            state: self.state.clone(),
            label,
            weight: self.weight,
        }
    }

    /// Same state and label, different weight.
    pub fn reweighted(&self, weight: f64) -> Result<Self> {
        Self::with_weight(self.state.clone(), self.label, weight)
    }
}

impl TryFrom<DatumWire> for QuantumDatum {
    type Error = Error;
    fn try_from(w: DatumWire) -> Result<Self> {
        Self::with_weight(w.state, w.label, w.weight)
    }
}

impl From<QuantumDatum> for DatumWire {
    fn from(d: QuantumDatum) -> Self {
        DatumWire {
            state: d.state,
            label: d.label,
            weight: d.weight,
        }
    }
}

/// Weighted list of training samples. May be empty as a container; the loss
/// rejects empty datasets.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    data: Vec<QuantumDatum>,
}

impl Dataset {
    pub fn new(data: Vec<QuantumDatum>) -> Self {
        Self { data }
    }

    pub fn data(&self) -> &[QuantumDatum] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Common state dimension, if the dataset is non-empty.
    pub fn dim(&self) -> Option<usize> {
        self.data.first().map(|d| d.state.dim())
    }

    pub fn total_weight(&self) -> f64 {
        self.data.iter().map(|d| d.weight).sum()
    }
}

/// Expectation `f(ρ, θ) = tr(U(θ) ρ U†(θ) M)`.
///
/// The trace is real for Hermitian `ρ` and `M`; an imaginary residue beyond
/// tolerance is a numerical-integrity error, not something to discard.
pub fn evaluate(circuit: &CircuitSpec, state: &DensityOperator, theta: &[f64]) -> Result<f64> {
    if state.dim() != circuit.dim() {
        return Err(Error::DimensionMismatch(state.dim(), circuit.dim()));
    }
    let u = circuit.unitary(theta)?;
    let evolved = state.matrix().conjugated_by(u.matrix());
    let val = evolved.trace_product(circuit.observable().matrix());
    if val.im.abs() > tol::IMAGINARY_RESIDUE {
        return Err(Error::NumericalIntegrity {
            context: "circuit evaluation",
            residue: val.im.abs(),
        });
    }
    Ok(val.re)
}

/// Weighted mean square loss, weights normalized to sum 1.
pub fn loss(circuit: &CircuitSpec, data: &Dataset, theta: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let total = data.total_weight();
    let mut acc = 0.0;
    for d in data.data() {
        let r = evaluate(circuit, d.state(), theta)? - d.label();
        acc += d.weight() * r * r;
    }
    Ok(acc / total)
}

/// Exact gradient of the square loss via the parameter-shift identity
/// `∂f/∂θ_l = f(θ + (π/4) e_l) − f(θ − (π/4) e_l)`, which holds exactly for
/// the frequency-2 dependence induced by two-level generators.
pub fn gradient(circuit: &CircuitSpec, data: &Dataset, theta: &[f64]) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    circuit.check_params(theta)?;
    let total = data.total_weight();
    let p = circuit.p();
    let mut grad = vec![0.0; p];
    let residuals: Vec<f64> = data
        .data()
        .iter()
        .map(|d| Ok(evaluate(circuit, d.state(), theta)? - d.label()))
        .collect::<Result<_>>()?;
    let mut shifted = theta.to_vec();
    for l in 0..p {
        let base = theta[l];
        let mut acc = 0.0;
        for (d, r) in data.data().iter().zip(&residuals) {
            shifted[l] = base + std::f64::consts::FRAC_PI_4;
            let plus = evaluate(circuit, d.state(), &shifted)?;
            shifted[l] = base - std::f64::consts::FRAC_PI_4;
            let minus = evaluate(circuit, d.state(), &shifted)?;
            acc += d.weight() * 2.0 * r * (plus - minus);
        }
        shifted[l] = base;
        grad[l] = acc / total;
    }
    Ok(grad)
}
