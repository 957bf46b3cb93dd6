//! IRS agent: phase-shift vectors and the closed-form single-slot policy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{Result, SimError};
use crate::geometry::{wrap_two_pi, LinkTrig};

/// One phase per reflecting element, each in `[0, 2π)`. Reflection
/// amplitude is fixed at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseShiftVector(Vec<f64>);

impl PhaseShiftVector {
    /// Builds a vector, wrapping every phase into `[0, 2π)`.
    pub fn from_phases(phases: impl IntoIterator<Item = f64>) -> Self {
        Self(phases.into_iter().map(wrap_two_pi).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn phases(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Diagonal of the reflection matrix.
    pub fn diagonal(&self) -> Vec<Complex64> {
        self.0.iter().map(|&w| Complex64::from_polar(1.0, w)).collect()
    }
}

/// Cascaded response `Σ_s incoming_s · e^{j w_s} · outgoing_s`.
pub fn reflection_apply(
    phases: &PhaseShiftVector,
    incoming: &[Complex64],
    outgoing: &[Complex64],
) -> Result<Complex64> {
    let n = phases.len();
    for len in [incoming.len(), outgoing.len()] {
        if len != n {
            return Err(SimError::LengthMismatch {
                expected: n,
                got: len,
            });
        }
    }
    Ok(phases
        .0
        .iter()
        .zip(incoming.iter().zip(outgoing))
        .map(|(&w, (a, b))| a * Complex64::from_polar(1.0, w) * b)
        .sum())
}

/// Closed-form phases that co-phase the cascaded LoS path VAA → IRS → user:
/// each element cancels the sum of the two steering-vector progressions.
pub fn closed_form_phases(
    trig_ar: &LinkTrig,
    trig_ru: &LinkTrig,
    p: &ChannelParams,
) -> PhaseShiftVector {
    PhaseShiftVector::from_phases(
        (0..p.n_elements()).map(|s| p.progression(s, trig_ar) + p.progression(s, trig_ru)),
    )
}
