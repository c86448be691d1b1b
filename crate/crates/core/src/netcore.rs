//! Cyclic-symmetric three-port algebra.
//!
//! A circulant 3×3 matrix is fully described by three complex entries. With the
//! layout
//!
//! ```text
//! [ d  b  f ]
//! [ f  d  b ]
//! [ b  f  d ]
//! ```
//!
//! (`f` at position (2,1), `b` at position (3,1)) every circulant shares the
//! eigenvectors of the cyclic shift, and its eigenvalues are
//! `λ_k = d + f·ω^{-k} + b·ω^{k}` with `ω = exp(j2π/3)`. Conversions and
//! passivity checks work on those eigenvalues directly, so no dense inverse is
//! ever formed.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Condition number above which `U ± S` style conversions are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Default tolerance on Hermitian-part eigenvalues, in siemens.
pub const DEFAULT_PASSIVITY_TOL: f64 = 1e-9;

/// The primitive cube root of unity `exp(j2π/3)`.
pub fn omega() -> Complex {
    Complex::from_polar(1.0, 2.0 * PI / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NetworkKind {
    /// Scattering parameters normalized to the real reference admittance `y0`.
    Scattering { y0: f64 },
    Admittance,
}

/// Circulant three-port stored as its three distinct entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclicThreePort {
    /// Y11 or s11.
    pub diag: Complex,
    /// Y21 or s21, position (2,1).
    pub fwd: Complex,
    /// Y31 or s31, position (3,1).
    pub bwd: Complex,
    pub kind: NetworkKind,
}

impl CyclicThreePort {
    pub fn scattering(diag: Complex, fwd: Complex, bwd: Complex, y0: f64) -> Self {
        Self {
            diag,
            fwd,
            bwd,
            kind: NetworkKind::Scattering { y0 },
        }
    }

    pub fn admittance(diag: Complex, fwd: Complex, bwd: Complex) -> Self {
        Self {
            diag,
            fwd,
            bwd,
            kind: NetworkKind::Admittance,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.diag, self.fwd, self.bwd]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Dense row-major expansion.
    pub fn expand(&self) -> [[Complex; 3]; 3] {
        let (d, f, b) = (self.diag, self.fwd, self.bwd);
        [[d, b, f], [f, d, b], [b, f, d]]
    }

    /// Rebuilds a cyclic port from a dense matrix, or `None` when the matrix
    /// departs from the circulant pattern by more than `rel_tol` (relative to
    /// its largest entry).
    pub fn from_dense(m: &[[Complex; 3]; 3], kind: NetworkKind, rel_tol: f64) -> Option<Self> {
        let d = m[0][0];
        let f = m[1][0];
        let b = m[2][0];
        let candidate = Self {
            diag: d,
            fwd: f,
            bwd: b,
            kind,
        };
        let scale = m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let e = candidate.expand();
        for i in 0..3 {
            for j in 0..3 {
                if (m[i][j] - e[i][j]).norm() > rel_tol * scale {
                    return None;
                }
            }
        }
        Some(candidate)
    }

    /// The three circulant eigenvalues `[λ0, λ1, λ2]`.
    pub fn eigenvalues(&self) -> [Complex; 3] {
        let w = omega();
        let w2 = w * w;
        let (d, f, b) = (self.diag, self.fwd, self.bwd);
        [d + f + b, d + f * w2 + b * w, d + f * w + b * w2]
    }

    /// Inverse of [`eigenvalues`](Self::eigenvalues).
    pub fn from_eigenvalues(lambda: [Complex; 3], kind: NetworkKind) -> Self {
        let w = omega();
        let w2 = w * w;
        let third = 1.0 / 3.0;
        Self {
            diag: (lambda[0] + lambda[1] + lambda[2]) * third,
            fwd: (lambda[0] + lambda[1] * w + lambda[2] * w2) * third,
            bwd: (lambda[0] + lambda[1] * w2 + lambda[2] * w) * third,
            kind,
        }
    }

    /// Singular values of the expanded matrix. Circulants are normal, so these
    /// are the eigenvalue magnitudes.
    pub fn singular_values(&self) -> [f64; 3] {
        self.eigenvalues().map(|l| l.norm())
    }

    /// Same network with the roles of ports 2 and 3 exchanged.
    pub fn reversed(&self) -> Self {
        Self {
            fwd: self.bwd,
            bwd: self.fwd,
            ..*self
        }
    }
}

/// Reciprocal two-port `[[r, m], [m, t]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPortS {
    /// Reflection at port 1.
    pub r: Complex,
    /// Reflection at port 2.
    pub t: Complex,
    /// Transmission (S12 = S21).
    pub m: Complex,
}

impl TwoPortS {
    pub fn through() -> Self {
        Self {
            r: Complex::new(0.0, 0.0),
            t: Complex::new(0.0, 0.0),
            m: Complex::new(1.0, 0.0),
        }
    }
}

fn condition(values: &[Complex; 3]) -> f64 {
    let max = values.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    let min = values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `Y = Y0 (U + S)^{-1} (U - S)`.
pub fn s_to_y(s: &CyclicThreePort) -> Result<CyclicThreePort> {
    let y0 = match s.kind {
        NetworkKind::Scattering { y0 } => y0,
        NetworkKind::Admittance => {
            return Err(Error::InvalidParams("s_to_y expects scattering parameters".into()))
        }
    };
    let one = Complex::new(1.0, 0.0);
    let lambda = s.eigenvalues();
    let plus = lambda.map(|l| one + l);
    let cond = condition(&plus);
    if cond > MAX_CONDITION {
        return Err(Error::SingularConversion { condition: cond });
    }
    let y = [0, 1, 2].map(|k| y0 * (one - lambda[k]) / plus[k]);
    Ok(CyclicThreePort::from_eigenvalues(y, NetworkKind::Admittance))
}

/// `S = (Y0 U + Y)^{-1} (Y0 U - Y)`.
pub fn y_to_s(y: &CyclicThreePort, y0: f64) -> Result<CyclicThreePort> {
    if y.kind != NetworkKind::Admittance {
        return Err(Error::InvalidParams("y_to_s expects admittance parameters".into()));
    }
    let lambda = y.eigenvalues();
    let plus = lambda.map(|l| y0 + l);
    let cond = condition(&plus);
    if cond > MAX_CONDITION {
        return Err(Error::SingularConversion { condition: cond });
    }
    let s = [0, 1, 2].map(|k| (y0 - lambda[k]) / plus[k]);
    Ok(CyclicThreePort::from_eigenvalues(
        s,
        NetworkKind::Scattering { y0 },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PassivityVerdict {
    Lossless,
    Passive,
    /// `margin` is the most negative eigenvalue of the Hermitian part.
    Active { margin: f64 },
}

/// Eigenvalues of `(Y + Y†)/2`, which for a circulant are `Re λ_k`.
pub fn hermitian_part_eigenvalues(y: &CyclicThreePort) -> [f64; 3] {
    y.eigenvalues().map(|l| l.re)
}

/// Residuals `|Y11 + Y11*|` and `|Y21 + Y31*|` of the cyclic lossless conditions.
pub fn lossless_residuals(y: &CyclicThreePort) -> (f64, f64) {
    (
        (y.diag + y.diag.conj()).norm(),
        (y.fwd + y.bwd.conj()).norm(),
    )
}

/// Classifies `Re{V† Y V}` over all port voltages.
pub fn check_passivity(y: &CyclicThreePort, tol: f64) -> PassivityVerdict {
    let eig = hermitian_part_eigenvalues(y);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if eig.iter().all(|e| e.abs() <= tol) {
        PassivityVerdict::Lossless
    } else if min >= -tol {
        PassivityVerdict::Passive
    } else {
        PassivityVerdict::Active { margin: min }
    }
}
