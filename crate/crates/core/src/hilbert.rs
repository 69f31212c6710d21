//! Real two-dimensional Hilbert space of a single die.
//!
//! The basis is `|+⟩_z = (1, 0)`, `|−⟩_z = (0, 1)`. The x-eigenstates are
//! `|±⟩_x = (|+⟩_z ± |−⟩_z)/√2`. Every amplitude is real, so the `Re` that
//! normally appears in the interference term is the identity here.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equality tolerance used for every numerical invariant in the model.
pub const TOLERANCE: f64 = 1e-12;

/// Direction along which the die is rolled (and the axis a face points to).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "z")]
    Z,
    #[serde(rename = "x")]
    X,
}

impl Axis {
    pub const ALL: [Axis; 2] = [Axis::Z, Axis::X];

    pub fn token(self) -> &'static str {
        match self {
            Axis::Z => "z",
            Axis::X => "x",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "z" | "Z" => Ok(Axis::Z),
            "x" | "X" => Ok(Axis::X),
            other => Err(format!("unknown direction `{other}` (expected z or x)")),
        }
    }
}

/// An eigenvalue of a face observable, i.e. the symbol read on the upper face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const ALL: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        s.value()
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, Self::Error> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("reading must be +1 or -1, got {other}")),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}1", self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Mat2([[f64; 2]; 2]);

impl Mat2 {
    const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    fn sub(&self, rhs: &Mat2) -> Mat2 {
        let mut out = self.0;
        for (row, r) in out.iter_mut().zip(rhs.0.iter()) {
            for (x, y) in row.iter_mut().zip(r.iter()) {
                *x -= y;
            }
        }
        Mat2(out)
    }

    fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    /// `⟨u|M|v⟩`
    fn sandwich(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        let mv = self.apply(v);
        u[0] * mv[0] + u[1] * mv[1]
    }

    fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }
}

/// A unit vector of the die's state space, written in the z-basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateVector {
    a_plus: f64,
    a_minus: f64,
}

impl StateVector {
    /// Builds a state from its amplitudes on `|+⟩_z` and `|−⟩_z`.
    ///
    /// The squared norm must equal one within [`TOLERANCE`].
    pub fn new(a_plus: f64, a_minus: f64) -> Result<Self> {
        let norm_sq = a_plus * a_plus + a_minus * a_minus;
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > TOLERANCE {
            return Err(Error::NotNormalized { a_plus, a_minus });
        }
        Ok(StateVector { a_plus, a_minus })
    }

    /// `cos θ |+⟩_z + sin θ |−⟩_z`
    pub fn from_angle(theta: f64) -> Self {
        StateVector {
            a_plus: theta.cos(),
            a_minus: theta.sin(),
        }
    }

    /// The eigenvector of the face observable along `axis` with eigenvalue `sign`.
    pub fn eigenstate(axis: Axis, sign: Sign) -> Self {
        match (axis, sign) {
            (Axis::Z, Sign::Plus) => StateVector { a_plus: 1.0, a_minus: 0.0 },
            (Axis::Z, Sign::Minus) => StateVector { a_plus: 0.0, a_minus: 1.0 },
            (Axis::X, Sign::Plus) => StateVector {
                a_plus: FRAC_1_SQRT_2,
                a_minus: FRAC_1_SQRT_2,
            },
            (Axis::X, Sign::Minus) => StateVector {
                a_plus: FRAC_1_SQRT_2,
                a_minus: -FRAC_1_SQRT_2,
            },
        }
    }

    pub fn a_plus(&self) -> f64 {
        self.a_plus
    }

    pub fn a_minus(&self) -> f64 {
        self.a_minus
    }

    pub fn components(&self) -> [f64; 2] {
        [self.a_plus, self.a_minus]
    }

    pub fn inner(&self, other: &StateVector) -> f64 {
        self.a_plus * other.a_plus + self.a_minus * other.a_minus
    }

    pub fn norm(&self) -> f64 {
        self.a_plus.hypot(self.a_minus)
    }
}

/// A real symmetric 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observable(Mat2);

impl Observable {
    pub fn new(m00: f64, m01: f64, m10: f64, m11: f64) -> Result<Self> {
        let m = Mat2([[m00, m01], [m10, m11]]);
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        if m01 != m10 {
            return Err(Error::NotSymmetric { m01, m10 });
        }
        Ok(Observable(m))
    }

    pub fn identity() -> Self {
        Observable(Mat2::IDENTITY)
    }

    /// `F_z` or `F_x`: the upper-face reading after a roll along `axis`.
    pub fn face(axis: Axis) -> Self {
        make_face_observable(axis)
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.0 .0
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let [[a, b], [_, d]] = self.0 .0;
        let mean = 0.5 * (a + d);
        let radius = (0.5 * (a - d)).hypot(b);
        [mean + radius, mean - radius]
    }
}

/// An orthogonal projector on the die's state space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projector(Mat2);

impl Projector {
    /// Validates symmetry (exact) and idempotence (within [`TOLERANCE`]).
    pub fn new(m00: f64, m01: f64, m10: f64, m11: f64) -> Result<Self> {
        let m = Mat2([[m00, m01], [m10, m11]]);
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        if m01 != m10 {
            return Err(Error::NotSymmetric { m01, m10 });
        }
        let residual = m.mul(&m).sub(&m).max_abs();
        if residual > TOLERANCE {
            return Err(Error::NotIdempotent { residual });
        }
        Ok(Projector(m))
    }

    /// `|v⟩⟨v|` for a unit vector `v`.
    pub fn onto(v: &StateVector) -> Self {
        let [p, m] = v.components();
        Projector(Mat2([[p * p, p * m], [m * p, m * m]]))
    }

    pub fn face(axis: Axis, sign: Sign) -> Self {
        projector_for(axis, sign)
    }

    pub fn identity() -> Self {
        Projector(Mat2::IDENTITY)
    }

    /// `I − P`
    pub fn complement(&self) -> Self {
        Projector(Mat2::IDENTITY.sub(&self.0))
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.0 .0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn as_observable(&self) -> Observable {
        Observable(self.0)
    }
}

/// Every term of the quantum total-probability formula
/// `P(B=β) = P(A=α then B=β) + P(A≠α then B=β) + 2⟨ψ|P_α P_β P_ᾱ|ψ⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TotalProbabilityDecomposition {
    pub marginal: f64,
    pub joint_then: f64,
    pub joint_complement_then: f64,
    pub interference: f64,
}

impl TotalProbabilityDecomposition {
    /// `marginal − joint_then − joint_complement_then − interference`
    pub fn closure_residual(&self) -> f64 {
        self.marginal - self.joint_then - self.joint_complement_then - self.interference
    }

    /// What the classical law of total probability would predict.
    pub fn classical_sum(&self) -> f64 {
        self.joint_then + self.joint_complement_then
    }
}

pub fn make_face_observable(axis: Axis) -> Observable {
    match axis {
        Axis::Z => Observable(Mat2([[1.0, 0.0], [0.0, -1.0]])),
        Axis::X => Observable(Mat2([[0.0, 1.0], [1.0, 0.0]])),
    }
}

pub fn projector_for(axis: Axis, sign: Sign) -> Projector {
    match (axis, sign) {
        (Axis::Z, Sign::Plus) => Projector(Mat2([[1.0, 0.0], [0.0, 0.0]])),
        (Axis::Z, Sign::Minus) => Projector(Mat2([[0.0, 0.0], [0.0, 1.0]])),
        (Axis::X, Sign::Plus) => Projector(Mat2([[0.5, 0.5], [0.5, 0.5]])),
        (Axis::X, Sign::Minus) => Projector(Mat2([[0.5, -0.5], [-0.5, 0.5]])),
    }
}

/// `⟨ψ|P|ψ⟩`, clamped to `[0, 1]` against rounding in the `1/√2` amplitudes.
pub fn born_probability(state: &StateVector, p: &Projector) -> f64 {
    let v = state.components();
    p.0.sandwich(v, v).clamp(0.0, 1.0)
}

/// The post-measurement state `P|ψ⟩ / ‖P|ψ⟩‖`.
pub fn collapse(state: &StateVector, p: &Projector) -> Result<StateVector> {
    let probability = born_probability(state, p);
    if probability <= TOLERANCE {
        return Err(Error::ZeroProbabilityCollapse { probability });
    }
    let [x, y] = p.0.apply(state.components());
    // ‖P|ψ⟩‖² = ⟨ψ|P|ψ⟩ for an exact projector; the direct norm keeps the
    // result on the unit circle when P is only idempotent to tolerance.
    let norm = x.hypot(y);
    Ok(StateVector {
        a_plus: x / norm,
        a_minus: y / norm,
    })
}

/// `P(A=α then B=β) = ⟨ψ|P_α P_β P_α|ψ⟩`
pub fn sequential_joint_probability(state: &StateVector, first: &Projector, then: &Projector) -> f64 {
    let v = state.components();
    first.0.mul(&then.0).mul(&first.0).sandwich(v, v)
}

/// `2 Re⟨ψ|P_α P_β P_ᾱ|ψ⟩` with `P_ᾱ = I − P_α`.
pub fn interference_term(state: &StateVector, p_alpha: &Projector, p_beta: &Projector) -> f64 {
    let v = state.components();
    let complement = p_alpha.complement();
    2.0 * p_alpha.0.mul(&p_beta.0).mul(&complement.0).sandwich(v, v)
}

pub fn total_probability_decomposition(
    state: &StateVector,
    p_alpha: &Projector,
    p_beta: &Projector,
) -> TotalProbabilityDecomposition {
    TotalProbabilityDecomposition {
        marginal: born_probability(state, p_beta),
        joint_then: sequential_joint_probability(state, p_alpha, p_beta),
        joint_complement_then: sequential_joint_probability(state, &p_alpha.complement(), p_beta),
        interference: interference_term(state, p_alpha, p_beta),
    }
}

/// Largest entry magnitude of `AB − BA`.
pub fn commutator_norm(a: &Observable, b: &Observable) -> f64 {
    a.0.mul(&b.0).sub(&b.0.mul(&a.0)).max_abs()
}

pub fn commutes(a: &Observable, b: &Observable) -> bool {
    commutator_norm(a, b) < TOLERANCE
}

/// `⟨ψ|F|ψ⟩`
pub fn expectation(state: &StateVector, f: &Observable) -> f64 {
    let v = state.components();
    f.0.sandwich(v, v)
}
