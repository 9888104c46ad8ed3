//! Smooth radial interaction kernels.
//!
//! Both families are negatives of classical positive-definite radial
//! functions, so every Gram matrix `[w_a · R(|x_a − x_b|) · w_b]` built from
//! distinct points and positive weights is negative definite. That sign
//! guarantee is what makes "all eigenvalues of the discretized operator are
//! negative" a testable property instead of an assumption.

use crate::error::{Error, Result};

/// The two supported closed-form families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    /// `R(r) = −amplitude · exp(−r² / (2·width²))` — width is the Gaussian σ.
    GaussianAttractive,
    /// `R(r) = −amplitude / √(r² + width²)` — width regularizes r = 0.
    InverseMultiquadricAttractive,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::GaussianAttractive => "gaussian",
            KernelFamily::InverseMultiquadricAttractive => "inverse_multiquadric",
        }
    }
}

/// A parametric attractive radial kernel: strictly negative, radially
/// symmetric, smooth, with |R(r)| non-increasing in r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    family: KernelFamily,
    amplitude: f64,
    width: f64,
}

impl Kernel {
    pub fn new(family: KernelFamily, amplitude: f64, width: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::Input(format!(
                "kernel amplitude must be a positive finite number, got {amplitude}"
            )));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::Input(format!(
                "kernel width must be a positive finite number, got {width}"
            )));
        }
        Ok(Kernel { family, amplitude, width })
    }

    pub fn gaussian(amplitude: f64, width: f64) -> Result<Self> {
        Kernel::new(KernelFamily::GaussianAttractive, amplitude, width)
    }

    pub fn inverse_multiquadric(amplitude: f64, width: f64) -> Result<Self> {
        Kernel::new(KernelFamily::InverseMultiquadricAttractive, amplitude, width)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Evaluate R(r) at a distance r ≥ 0. Strictly negative for all valid r.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::Input(format!(
                "kernel distance must be finite and nonnegative, got {r}"
            )));
        }
        Ok(self.value_at(r))
    }

    /// Evaluation without the domain check, for assembly loops where the
    /// distance is a norm and therefore valid by construction.
    pub(crate) fn value_at(&self, r: f64) -> f64 {
        match self.family {
            KernelFamily::GaussianAttractive => {
                let s = r / self.width;
                -self.amplitude * (-0.5 * s * s).exp()
            }
            KernelFamily::InverseMultiquadricAttractive => {
                -self.amplitude / (r * r + self.width * self.width).sqrt()
            }
        }
    }
}
