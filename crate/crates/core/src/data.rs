//! Built-in boundary-data generators, so end-to-end runs need no external
//! files.

use crate::field::TorusField;
use crate::geodesic::{GeodesicError, PotentialPair};
use crate::scalar::{lit, Real};

/// Amplitude of the x-only cosine dataset. An amplitude of 0.2 would violate
/// Kähler admissibility (1 + lap/4 reaches 1 - 0.2 pi^2 < 0), so the dataset
/// uses 0.05, which leaves a margin of about 0.51.
pub const XONLY_COS_AMPLITUDE: f64 = 0.05;

/// Named built-in datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinData {
    /// Both potentials zero; the solved family has a closed form.
    Trivial,
    /// Zero to a constant; the solution is the trivial one plus a ramp.
    ConstantShift,
    /// Zero to a cosine in x only; comparable against the Legendre oracle.
    XonlyCos,
    /// Generic smooth data exercising both torus directions.
    Generic2d,
}

impl BuiltinData {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "trivial" => Some(BuiltinData::Trivial),
            "constant-shift" => Some(BuiltinData::ConstantShift),
            "xonly-cos" => Some(BuiltinData::XonlyCos),
            "generic-2d" => Some(BuiltinData::Generic2d),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BuiltinData::Trivial => "trivial",
            BuiltinData::ConstantShift => "constant-shift",
            BuiltinData::XonlyCos => "xonly-cos",
            BuiltinData::Generic2d => "generic-2d",
        }
    }

    /// Whether the dataset is independent of y (and so has a Legendre
    /// oracle).
    pub fn is_x_only(&self) -> bool {
        !matches!(self, BuiltinData::Generic2d)
    }
}

/// The x-only cosine endpoint as a function of x.
pub fn xonly_cos_potential<F: Real>(x: F) -> F {
    lit::<F>(XONLY_COS_AMPLITUDE) * (F::TAU() * x).cos()
}

/// Samples a builtin dataset on the given torus resolution.
pub fn builtin_pair<F: Real>(
    kind: BuiltinData,
    nx: usize,
    ny: usize,
) -> Result<PotentialPair<F>, GeodesicError> {
    let zero = TorusField::zeros(nx, ny);
    let tau = F::TAU();
    match kind {
        BuiltinData::Trivial => PotentialPair::new(zero.clone(), zero),
        BuiltinData::ConstantShift => {
            PotentialPair::new(zero, TorusField::sample(nx, ny, |_, _| lit::<F>(0.5)))
        }
        BuiltinData::XonlyCos => PotentialPair::new(
            zero,
            TorusField::sample(nx, ny, |x, _| xonly_cos_potential(x)),
        ),
        BuiltinData::Generic2d => {
            let phi0 = TorusField::sample(nx, ny, |x, y| {
                lit::<F>(0.02) * (tau * x).cos() + lit::<F>(0.02) * (tau * y).sin()
            });
            let phi1 = TorusField::sample(nx, ny, |x, y| {
                lit::<F>(0.03) * (tau * x).cos() * (tau * y).cos()
                    - lit::<F>(0.02) * (tau * x).sin()
            });
            PotentialPair::new(phi0, phi1)
        }
    }
}
