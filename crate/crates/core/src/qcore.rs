//! Quantum states, measurements, detection channels and channel
//! decompositions, with validated constructors and tensor-product composition.
//!
//! All types are immutable after construction.

use crate::error::{MetroqError, Result};
use crate::linalg::{self, cr, CMat, CVec, RMat, ONE};
use crate::tol::Tolerances;

/// Default cap on the number of complex matrix entries created by tensoring.
pub const DEFAULT_TENSOR_CAP: usize = 1 << 24;

/// Normalised pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVec,
}

impl StateVector {
    /// Validates that the squared norm equals one within the default tolerance.
    pub fn new(amps: CVec) -> Result<Self> {
        Self::with_tol(amps, &Tolerances::DEFAULT)
    }

    pub fn with_tol(amps: CVec, tol: &Tolerances) -> Result<Self> {
        if amps.is_empty() {
            return Err(MetroqError::InvalidState("empty state vector".into()));
        }
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > tol.state_norm {
            return Err(MetroqError::InvalidState(format!("squared norm {n2} is not 1")));
        }
        Ok(Self { amps })
    }

    /// Normalises arbitrary nonzero amplitudes.
    pub fn normalized(amps: CVec) -> Result<Self> {
        let n = amps.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(MetroqError::InvalidState("cannot normalise a zero vector".into()));
        }
        Ok(Self { amps: amps.unscale(n) })
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        Self { amps: linalg::basis(dim, k) }
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix { m: linalg::projector(&self.amps) }
    }

    /// Overlap `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> linalg::C64 {
        self.amps.dotc(&other.amps)
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMat,
}

impl DensityMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        Self::with_tol(m, &Tolerances::DEFAULT)
    }

    pub fn with_tol(m: CMat, tol: &Tolerances) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(MetroqError::InvalidState("density matrix must be square and nonempty".into()));
        }
        if !linalg::is_hermitian(&m, tol.density) {
            return Err(MetroqError::NotHermitian("density matrix".into()));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > tol.density {
            return Err(MetroqError::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = linalg::eigvalsh(&m)[0];
        if min < -tol.density_neg_eig {
            return Err(MetroqError::NotPsd { min_eig: min });
        }
        Ok(Self { m })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { m: linalg::identity(d).unscale(d as f64) }
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }
}

impl From<&StateVector> for DensityMatrix {
    fn from(s: &StateVector) -> Self {
        s.density()
    }
}

/// Complete set of orthogonal rank-1 projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    projectors: Vec<CMat>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<CMat>) -> Result<Self> {
        let tol = Tolerances::DEFAULT.measurement;
        let d = projectors.first().map(|p| p.nrows()).unwrap_or(0);
        if d == 0 || projectors.len() != d {
            return Err(MetroqError::InvalidMeasurement(format!(
                "need exactly d rank-1 projectors, got {} for d = {d}",
                projectors.len()
            )));
        }
        let mut sum = CMat::zeros(d, d);
        for (i, p) in projectors.iter().enumerate() {
            if p.shape() != (d, d) {
                return Err(MetroqError::DimensionMismatch("projector shapes differ".into()));
            }
            for (j, q) in projectors.iter().enumerate() {
                let prod = p * q;
                let expect = if i == j { p.clone() } else { CMat::zeros(d, d) };
                if linalg::max_abs_diff(&prod, &expect) > tol {
                    return Err(MetroqError::InvalidMeasurement(format!(
                        "projectors {i} and {j} violate P_i P_j = delta_ij P_i"
                    )));
                }
            }
            sum += p;
        }
        if linalg::max_abs_diff(&sum, &linalg::identity(d)) > tol {
            return Err(MetroqError::InvalidMeasurement("projectors do not sum to identity".into()));
        }
        Ok(Self { projectors })
    }

    /// Projectors onto the columns of a unitary matrix.
    pub fn from_basis(u: &CMat) -> Result<Self> {
        if !linalg::is_unitary(u, Tolerances::DEFAULT.unitary) {
            return Err(MetroqError::NotUnitary("basis matrix".into()));
        }
        Self::new((0..u.ncols()).map(|k| linalg::projector(&u.column(k).into_owned())).collect())
    }

    pub fn computational(d: usize) -> Self {
        Self { projectors: (0..d).map(|k| linalg::projector(&linalg::basis(d, k))).collect() }
    }

    /// `{|+><+|, |-><-|}` for a qubit.
    pub fn plus_minus() -> Self {
        let h = linalg::hadamard();
        Self::from_basis(&h).expect("Hadamard columns form a basis")
    }

    pub fn projectors(&self) -> &[CMat] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors.len()
    }
}

/// Positive operator-valued measure with outcome labels `0..|X|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMat>,
}

impl Povm {
    pub fn new(elements: Vec<CMat>) -> Result<Self> {
        Self::with_tol(elements, &Tolerances::DEFAULT)
    }

    pub fn with_tol(elements: Vec<CMat>, tol: &Tolerances) -> Result<Self> {
        let d = elements.first().map(|e| e.nrows()).unwrap_or(0);
        if d == 0 {
            return Err(MetroqError::InvalidMeasurement("empty POVM".into()));
        }
        let mut sum = CMat::zeros(d, d);
        for (x, e) in elements.iter().enumerate() {
            if e.shape() != (d, d) {
                return Err(MetroqError::DimensionMismatch(format!("POVM element {x} has wrong shape")));
            }
            if !linalg::is_hermitian(e, tol.measurement) {
                return Err(MetroqError::NotHermitian(format!("POVM element {x}")));
            }
            let min = linalg::eigvalsh(e)[0];
            if min < -tol.measurement {
                return Err(MetroqError::NotPsd { min_eig: min });
            }
            sum += e;
        }
        if linalg::max_abs_diff(&sum, &linalg::identity(d)) > tol.measurement {
            return Err(MetroqError::InvalidMeasurement("elements do not sum to identity".into()));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn num_outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    /// `V^dagger M_x V` for every element.
    pub fn conjugated(&self, v: &CMat) -> Result<Povm> {
        check_unitary(v, self.dim())?;
        Ok(Povm { elements: self.elements.iter().map(|m| v.adjoint() * m * v).collect() })
    }

    /// True when all elements commute pairwise within `tol`.
    pub fn is_commuting(&self, tol: f64) -> bool {
        self.elements.iter().enumerate().all(|(i, a)| {
            self.elements[i + 1..]
                .iter()
                .all(|b| linalg::max_abs_diff(&(a * b), &(b * a)) <= tol)
        })
    }
}

impl From<&ProjectiveMeasurement> for Povm {
    fn from(p: &ProjectiveMeasurement) -> Self {
        Povm { elements: p.projectors.clone() }
    }
}

/// Column-stochastic matrix of transition probabilities `p(x|i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionChannel {
    m: RMat,
}

impl DetectionChannel {
    pub fn new(m: RMat) -> Result<Self> {
        Self::with_tol(m, &Tolerances::DEFAULT)
    }

    pub fn with_tol(m: RMat, tol: &Tolerances) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(MetroqError::NotStochastic("empty matrix".into()));
        }
        for (k, v) in m.iter().enumerate() {
            if !v.is_finite() || *v < -tol.stochastic || *v > 1.0 + tol.stochastic {
                return Err(MetroqError::NotStochastic(format!("entry {k} = {v} outside [0, 1]")));
            }
        }
        for j in 0..m.ncols() {
            let s: f64 = m.column(j).sum();
            if (s - 1.0).abs() > tol.stochastic {
                return Err(MetroqError::NotStochastic(format!("column {j} sums to {s}")));
            }
        }
        Ok(Self { m })
    }

    pub fn identity(d: usize) -> Self {
        Self { m: RMat::identity(d, d) }
    }

    /// Asymmetric bit flip `[[p, 1-q], [1-p, q]]`.
    pub fn bit_flip(p: f64, q: f64) -> Result<Self> {
        Self::new(RMat::from_row_slice(2, 2, &[p, 1.0 - q, 1.0 - p, q]))
    }

    pub fn matrix(&self) -> &RMat {
        &self.m
    }

    pub fn num_outcomes(&self) -> usize {
        self.m.nrows()
    }

    pub fn num_inputs(&self) -> usize {
        self.m.ncols()
    }

    pub fn prob(&self, x: usize, i: usize) -> f64 {
        self.m[(x, i)]
    }

    /// Post-processing by `after`: the channel `after ∘ self`.
    pub fn then(&self, after: &DetectionChannel) -> Result<DetectionChannel> {
        if after.num_inputs() != self.num_outcomes() {
            return Err(MetroqError::DimensionMismatch("channel composition".into()));
        }
        DetectionChannel::with_tol(&after.m * &self.m, &Tolerances { stochastic: 1e-10, ..Tolerances::DEFAULT })
    }
}

/// Kraus representation of a CPTP map from dimension `d_in` to `d_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    ops: Vec<CMat>,
}

impl KrausSet {
    pub fn new(ops: Vec<CMat>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| MetroqError::InvalidKraus("no operators".into()))?;
        let (d_out, d_in) = first.shape();
        let mut sum = CMat::zeros(d_in, d_in);
        for k in &ops {
            if k.shape() != (d_out, d_in) {
                return Err(MetroqError::DimensionMismatch("Kraus operator shapes differ".into()));
            }
            sum += k.adjoint() * k;
        }
        if linalg::max_abs_diff(&sum, &linalg::identity(d_in)) > Tolerances::DEFAULT.measurement {
            return Err(MetroqError::InvalidKraus("sum of K^dagger K is not the identity".into()));
        }
        Ok(Self { ops })
    }

    pub fn identity(d: usize) -> Self {
        Self { ops: vec![linalg::identity(d)] }
    }

    /// Qubit dephasing `{sqrt(p) 1, sqrt(1-p) sigma_z}`.
    pub fn dephasing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(MetroqError::InvalidParameter(format!("dephasing probability {p}")));
        }
        Self::new(vec![linalg::identity(2).scale(p.sqrt()), linalg::sigma_z().scale((1.0 - p).sqrt())])
    }

    pub fn operators(&self) -> &[CMat] {
        &self.ops
    }

    pub fn d_in(&self) -> usize {
        self.ops[0].ncols()
    }

    pub fn d_out(&self) -> usize {
        self.ops[0].nrows()
    }

    /// `Λ[ρ] = Σ k ρ k†` for any (not necessarily positive) operator.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d_out(), self.d_out());
        for k in &self.ops {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Conjugate map `Λ†[Y] = Σ k† Y k`.
    pub fn apply_adjoint(&self, y: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d_in(), self.d_in());
        for k in &self.ops {
            out += k.adjoint() * y * k;
        }
        out
    }

    /// Kraus set of `self ⊗ other`.
    pub fn tensor(&self, other: &KrausSet) -> KrausSet {
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for a in &self.ops {
            for b in &other.ops {
                ops.push(linalg::kron(a, b));
            }
        }
        KrausSet { ops }
    }
}

/// Unitary encoding `U_θ = exp(i h θ)` around the reference point `θ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryEncoding {
    h: CMat,
    theta0: f64,
}

impl UnitaryEncoding {
    pub fn new(h: CMat, theta0: f64) -> Result<Self> {
        if !linalg::is_hermitian(&h, Tolerances::DEFAULT.generator) {
            return Err(MetroqError::NotHermitian("encoding generator".into()));
        }
        Ok(Self { h, theta0 })
    }

    /// Qubit phase encoding with `h = σ_z / 2` at `θ₀ = 0`.
    pub fn qubit_phase() -> Self {
        Self { h: linalg::sigma_z().scale(0.5), theta0: 0.0 }
    }

    pub fn generator(&self) -> &CMat {
        &self.h
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn unitary(&self, theta: f64) -> CMat {
        linalg::expm_i_herm(&self.h, theta)
    }
}

pub(crate) fn check_unitary(v: &CMat, d: usize) -> Result<()> {
    if v.shape() != (d, d) {
        return Err(MetroqError::DimensionMismatch(format!("unitary is {:?}, expected {d}x{d}", v.shape())));
    }
    if !linalg::is_unitary(v, Tolerances::DEFAULT.unitary) {
        return Err(MetroqError::NotUnitary("control unitary".into()));
    }
    Ok(())
}

/// Noisy measurement `M_x = Σ_i p(x|i) V† Π_i V`.
pub fn povm_from_detection(p: &DetectionChannel, pi: &ProjectiveMeasurement, v: &CMat) -> Result<Povm> {
    let d = pi.dim();
    if p.num_inputs() != d {
        return Err(MetroqError::DimensionMismatch(format!(
            "detection channel has {} inputs but the measurement has {d} projectors",
            p.num_inputs()
        )));
    }
    check_unitary(v, d)?;
    let rotated: Vec<CMat> = pi.projectors().iter().map(|q| v.adjoint() * q * v).collect();
    let elements = (0..p.num_outcomes())
        .map(|x| {
            let mut m = CMat::zeros(d, d);
            for (i, q) in rotated.iter().enumerate() {
                m += q.scale(p.prob(x, i));
            }
            linalg::hermitian_part(&m)
        })
        .collect();
    Povm::new(elements)
}

/// Born-rule distribution `Tr{ρ M_x}`.
pub fn outcome_distribution(rho: &DensityMatrix, m: &Povm) -> Result<Vec<f64>> {
    if rho.dim() != m.dim() {
        return Err(MetroqError::DimensionMismatch("state and POVM dimensions differ".into()));
    }
    Ok(m.elements()
        .iter()
        .map(|e| linalg::tr_prod_re(rho.matrix(), e).max(0.0))
        .collect())
}

/// Born-rule distribution for a pure state.
pub fn outcome_distribution_pure(psi: &CVec, m: &Povm) -> Result<Vec<f64>> {
    if psi.len() != m.dim() {
        return Err(MetroqError::DimensionMismatch("state and POVM dimensions differ".into()));
    }
    Ok(m.elements().iter().map(|e| psi.dotc(&(e * psi)).re.max(0.0)).collect())
}

fn sqrt_elements(m: &Povm) -> Result<Vec<CMat>> {
    m.elements()
        .iter()
        .map(|e| linalg::sqrt_psd(e, Tolerances::DEFAULT.psd_clamp))
        .collect()
}

/// Quantum-classical channel `{|x><i| sqrt(M_x)}` with `|X|·d` operators,
/// ordered with the flag index `i` running fastest.
pub fn conjugate_map_qc(m: &Povm) -> Result<KrausSet> {
    let roots = sqrt_elements(m)?;
    let (nx, d) = (m.num_outcomes(), m.dim());
    let mut ops = Vec::with_capacity(nx * d);
    for (x, s) in roots.iter().enumerate() {
        for i in 0..d {
            let mut k = CMat::zeros(nx, d);
            k.set_row(x, &s.row(i));
            ops.push(k);
        }
    }
    KrausSet::new(ops)
}

/// Compact decomposition `{Σ_x |x><i| sqrt(M_x)}` with `d` operators.
pub fn conjugate_map_compact(m: &Povm) -> Result<KrausSet> {
    let roots = sqrt_elements(m)?;
    let (nx, d) = (m.num_outcomes(), m.dim());
    let ops = (0..d)
        .map(|i| {
            let mut k = CMat::zeros(nx, d);
            for (x, s) in roots.iter().enumerate() {
                k.set_row(x, &s.row(i));
            }
            k
        })
        .collect();
    KrausSet::new(ops)
}

/// Recovers `Λ†[|x><x|]` for every outcome `x`.
pub fn conjugate_elements(k: &KrausSet) -> Vec<CMat> {
    let nx = k.d_out();
    (0..nx)
        .map(|x| k.apply_adjoint(&linalg::projector(&linalg::basis(nx, x))))
        .collect()
}

/// True iff every pair of inputs `i ≠ i'` shares an outcome with
/// `p(x|i) p(x|i') > 0`.
pub fn is_nontrivial(p: &DetectionChannel) -> bool {
    let d = p.num_inputs();
    for i in 0..d {
        for j in (i + 1)..d {
            let shared = (0..p.num_outcomes()).any(|x| p.prob(x, i) * p.prob(x, j) > 0.0);
            if !shared {
                return false;
            }
        }
    }
    true
}

/// True iff every element is proportional to the identity.
pub fn is_information_erasing(m: &Povm, tol: f64) -> bool {
    let d = m.dim();
    m.elements().iter().all(|e| {
        let c = e.trace() / cr(d as f64);
        linalg::max_abs_diff(e, &linalg::identity(d).map(|z| z * c)) <= tol
    })
}

/// `M^{⊗n}`, outcome `(x₁, …, x_n)` at index `Σ x_k |X|^{n-k}`.
pub fn tensor_povm(m: &Povm, n: usize, cap: usize) -> Result<Povm> {
    if n == 0 {
        return Err(MetroqError::InvalidParameter("tensor power must be at least 1".into()));
    }
    let d = m.dim();
    let nx = m.num_outcomes();
    let required = nx
        .checked_pow(n as u32)
        .and_then(|a| d.checked_pow(2 * n as u32).and_then(|b| a.checked_mul(b)))
        .unwrap_or(usize::MAX);
    if required > cap {
        return Err(MetroqError::CapExceeded { required, cap });
    }
    let mut elems = m.elements().to_vec();
    for _ in 1..n {
        elems = elems
            .iter()
            .flat_map(|a| m.elements().iter().map(move |b| linalg::kron(a, b)))
            .collect();
    }
    Ok(Povm { elements: elems })
}

/// `|ψ⟩^{⊗n}`.
pub fn tensor_state(psi: &StateVector, n: usize, cap: usize) -> Result<StateVector> {
    if n == 0 {
        return Err(MetroqError::InvalidParameter("tensor power must be at least 1".into()));
    }
    let required = psi.dim().checked_pow(n as u32).unwrap_or(usize::MAX);
    if required > cap {
        return Err(MetroqError::CapExceeded { required, cap });
    }
    let mut v = psi.amplitudes().clone();
    for _ in 1..n {
        v = linalg::kron_vec(&v, psi.amplitudes());
    }
    Ok(StateVector { amps: v })
}

/// `M ⊗ 𝟙_k`.
pub fn povm_with_ancilla(m: &Povm, k: usize) -> Povm {
    let id = linalg::identity(k);
    Povm { elements: m.elements().iter().map(|e| linalg::kron(e, &id)).collect() }
}
