//! Master-equation model of the driven diamond `|1⟩–|2⟩–|3⟩–|4⟩–|1⟩`.
//!
//! All rates and couplings are in units of `γ`. Density matrices are
//! flattened row-major: entry `(r, c)` sits at index `4r + c`, so the
//! populations live at indices 0, 5, 10 and 15.

use nalgebra::{Matrix4, SMatrix, SVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type Generator = Matrix4<C64>;
pub type Liouvillian = SMatrix<C64, 16, 16>;
pub type FlatDensity = SVector<C64, 16>;

/// Elementwise tolerance for density-matrix invariants.
pub const DENSITY_TOLERANCE: f64 = 1e-10;
/// Largest accepted `‖Lρ‖∞` for a steady state.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Required separation between the two smallest singular values of `L`.
pub const KERNEL_GAP: f64 = 1e6;

const POPULATION_INDICES: [usize; 4] = [0, 5, 10, 15];

/// Rabi frequencies of the four loop fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    x: f64,
    per_transition_g: Option<[f64; 4]>,
}

impl DriveParams {
    /// All four couplings equal to `x·γ`.
    pub fn uniform(x: f64) -> Result<Self> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::invalid("drive", format!("x must be positive, got {x}")));
        }
        Ok(Self {
            x,
            per_transition_g: None,
        })
    }

    /// Individual couplings `(g₂₁, g₃₂, g₃₄, g₄₁)`, zero for an undriven leg. `x` is kept as a nominal
    /// strength for the closed-form comparisons.
    pub fn per_transition(x: f64, g: [f64; 4]) -> Result<Self> {
        let mut d = Self::uniform(x)?;
        if g.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("drive", format!("couplings must be >= 0, got {g:?}")));
        }
        d.per_transition_g = Some(g);
        Ok(d)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn is_uniform(&self) -> bool {
        self.per_transition_g.is_none()
    }

    /// `(g₂₁, g₃₂, g₃₄, g₄₁)`.
    pub fn couplings(&self) -> [f64; 4] {
        self.per_transition_g.unwrap_or([self.x; 4])
    }
}

/// Decay channel of the diamond, always directed downward in energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    ThreeToTwo,
    ThreeToFour,
    TwoToOne,
    FourToOne,
}

impl Channel {
    pub const ALL: [Channel; 4] = [
        Channel::ThreeToTwo,
        Channel::ThreeToFour,
        Channel::TwoToOne,
        Channel::FourToOne,
    ];

    /// `(from, to)` as 0-based basis indices.
    pub fn levels(self) -> (usize, usize) {
        match self {
            Channel::ThreeToTwo => (2, 1),
            Channel::ThreeToFour => (2, 3),
            Channel::TwoToOne => (1, 0),
            Channel::FourToOne => (3, 0),
        }
    }
}

/// Spontaneous decay rates `γ_ji` for the four loop channels, ordered as
/// [`Channel::ALL`]. Each channel empties its upper level at `2γ_ji`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayModel {
    rates: [f64; 4],
}

impl DecayModel {
    pub fn new(rates: [f64; 4]) -> Result<Self> {
        if rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::invalid("decay model", format!("rates must be positive, got {rates:?}")));
        }
        Ok(Self { rates })
    }

    /// Every `γ_ji = γ`.
    pub fn unit() -> Self {
        Self { rates: [1.0; 4] }
    }

    pub fn rates(&self) -> [f64; 4] {
        self.rates
    }

    pub fn rate(&self, channel: Channel) -> f64 {
        let i = Channel::ALL.iter().position(|c| *c == channel).unwrap();
        self.rates[i]
    }

    pub fn is_equal_rates(&self) -> bool {
        self.rates.iter().all(|r| *r == self.rates[0])
    }
}

/// A validated 4×4 state in the basis `(|1⟩, |2⟩, |3⟩, |4⟩)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Matrix4<C64>);

impl DensityMatrix {
    pub fn new(m: Matrix4<C64>) -> Result<Self> {
        let tol = DENSITY_TOLERANCE;
        for r in 0..4 {
            for c in 0..4 {
                if (m[(r, c)] - m[(c, r)].conj()).norm() > tol {
                    return Err(Error::invalid("density matrix", format!("not Hermitian at ({r}, {c})")));
                }
            }
            if m[(r, r)].re < -tol {
                return Err(Error::invalid(
                    "density matrix",
                    format!("negative population {} at {r}", m[(r, r)].re),
                ));
            }
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::invalid("density matrix", format!("trace {tr} differs from 1")));
        }
        Ok(Self(m))
    }

    /// `|k⟩⟨k|` for a 0-based level index.
    pub fn pure_level(k: usize) -> Self {
        let mut m = Matrix4::zeros();
        m[(k, k)] = C64::new(1.0, 0.0);
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn flatten(&self) -> FlatDensity {
        flatten(&self.0)
    }

    /// `(ρ₁₁, ρ₂₂, ρ₃₃, ρ₄₄)`, clamped at zero.
    pub fn populations(&self) -> [f64; 4] {
        std::array::from_fn(|k| self.0[(k, k)].re.max(0.0))
    }
}

/// Largest entry modulus, `‖·‖∞` over entries.
pub fn max_norm<'a>(m: impl IntoIterator<Item = &'a C64>) -> f64 {
    m.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn flatten(m: &Matrix4<C64>) -> FlatDensity {
    FlatDensity::from_fn(|i, _| m[(i / 4, i % 4)])
}

pub fn unflatten(v: &FlatDensity) -> Matrix4<C64> {
    Matrix4::from_fn(|r, c| v[4 * r + c])
}

/// Interaction-picture generator `V/ħ` in units of `γ`.
///
/// `detunings` are `(Δ₂₁, Δ₃₂, Δ₄₁)`. The loop phase sits on the `|3⟩⟨2|`
/// coupling only.
pub fn build_generator(phi: f64, drives: &DriveParams, detunings: [f64; 3]) -> Generator {
    let [d21, d32, d41] = detunings;
    let [g21, g32, g34, g41] = drives.couplings();
    let re = |v: f64| C64::new(v, 0.0);
    let mut v = Generator::zeros();
    v[(1, 1)] = re(-d21);
    v[(2, 2)] = re(-(d21 + d32));
    v[(3, 3)] = re(-d41);
    let mut couple = |r: usize, c: usize, g: C64| {
        v[(r, c)] = g;
        v[(c, r)] = g.conj();
    };
    couple(1, 0, re(g21));
    couple(2, 3, re(g34));
    couple(3, 0, re(g41));
    couple(2, 1, C64::from_polar(g32, -phi));
    v
}

/// Right-hand side of the master equation applied to a single matrix.
pub fn master_rhs(v: &Generator, decay: &DecayModel, rho: &Matrix4<C64>) -> Matrix4<C64> {
    let i = C64::new(0.0, 1.0);
    let mut out = (v * rho - rho * v) * (-i);
    for (channel, gamma) in Channel::ALL.iter().zip(decay.rates()) {
        let (from, to) = channel.levels();
        let rate = 2.0 * gamma;
        // A ρ A† with A = |to⟩⟨from|
        out[(to, to)] += rho[(from, from)] * rate;
        // −½{A†A, ρ} with A†A = |from⟩⟨from|
        for k in 0..4 {
            out[(from, k)] -= rho[(from, k)] * (0.5 * rate);
            out[(k, from)] -= rho[(k, from)] * (0.5 * rate);
        }
    }
    out
}

/// Matrix of `ρ ↦ −i[V, ρ] + Σ 2γ_ji (AρA† − ½{A†A, ρ})` on row-major
/// flattened `ρ`.
pub fn build_liouvillian(v: &Generator, decay: &DecayModel) -> Liouvillian {
    let mut l = Liouvillian::zeros();
    for col in 0..16 {
        let mut e = Matrix4::zeros();
        e[(col / 4, col % 4)] = C64::new(1.0, 0.0);
        let image = flatten(&master_rhs(v, decay, &e));
        l.set_column(col, &image);
    }
    l
}

/// Stationary state of `L`: the unique unit-trace `ρ` with `Lρ = 0`.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    for col in 0..16 {
        let s: C64 = POPULATION_INDICES.iter().map(|&r| l[(r, col)]).sum();
        if s.norm() > DENSITY_TOLERANCE {
            return Err(Error::invalid(
                "liouvillian",
                format!("not trace preserving (column {col} sums to {s})"),
            ));
        }
    }

    let mut sv: Vec<f64> = l.singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    if sv[1] <= KERNEL_GAP * sv[0] {
        return Err(Error::DegenerateSteadyState {
            smallest: sv[0],
            second: sv[1],
        });
    }

    // the ρ₁₁ row is redundant under trace preservation; swap in Tr ρ = 1
    let mut a = *l;
    let mut b = FlatDensity::zeros();
    for c in 0..16 {
        a[(0, c)] = C64::new(0.0, 0.0);
    }
    for &k in &POPULATION_INDICES {
        a[(0, k)] = C64::new(1.0, 0.0);
    }
    b[0] = C64::new(1.0, 0.0);
    let x = a.lu().solve(&b).ok_or(Error::DegenerateSteadyState {
        smallest: sv[0],
        second: sv[1],
    })?;

    let residual = max_norm(&(l * x));
    if !(residual <= RESIDUAL_TOLERANCE) {
        return Err(Error::NoConvergence { residual });
    }
    let m = unflatten(&x);
    DensityMatrix::new((m + m.adjoint()) * C64::new(0.5, 0.0))
}

/// Steady state of the diamond at loop phase `phi`.
pub fn diamond_steady_state(
    phi: f64,
    drives: &DriveParams,
    detunings: [f64; 3],
    decay: &DecayModel,
) -> Result<DensityMatrix> {
    let v = build_generator(phi, drives, detunings);
    steady_state(&build_liouvillian(&v, decay))
}
