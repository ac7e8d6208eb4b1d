//! Fourth-order exponential integrators for diagonal systems `y' = lambda y + N(y)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Right-hand side `N(y)` of the nonlinear remainder.
pub type Remainder<'a> = dyn Fn(&[Complex64]) -> Result<Vec<Complex64>> + 'a;

pub trait TimeScheme: Send + Sync {
    fn name(&self) -> &'static str;
    fn order(&self) -> u32;
    /// Precomputes the step coefficients for a fixed diagonal `lambda` and `dt`.
    fn prepare(&self, lambda: &[Complex64], dt: f64) -> Box<dyn PreparedScheme>;
}

pub trait PreparedScheme: Send + Sync {
    fn advance(&self, y: &[Complex64], rhs: &Remainder<'_>) -> Result<Vec<Complex64>>;
}

/// Cox-Matthews ETDRK4.
#[derive(Debug, Default, Clone, Copy)]
pub struct Etdrk4;

/// Integrating-factor (Lawson) RK4.
#[derive(Debug, Default, Clone, Copy)]
pub struct Lawson4;

const SERIES_RADIUS: f64 = 1.0;
const SERIES_TERMS: usize = 30;

/// `(phi_1, phi_2, phi_3)(z)` with `phi_k(z) = sum_m z^m / (m + k)!`.
pub fn phi_functions(z: Complex64) -> [Complex64; 3] {
    if z.norm() < SERIES_RADIUS {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            // 1/(m+k+1)! for m = 0, 1, ...
            let mut fact = (1..=k + 1).map(|i| i as f64).product::<f64>();
            let mut zp = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..SERIES_TERMS {
                acc += zp / fact;
                zp *= z;
                fact *= (m + k + 2) as f64;
            }
            *slot = acc;
        }
        out
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (e - 1.0 - z) / (z * z);
        let p3 = (e - 1.0 - z - z * z * 0.5) / (z * z * z);
        [p1, p2, p3]
    }
}

struct Etdrk4Coeffs {
    e: Vec<Complex64>,
    e_half: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

impl TimeScheme for Etdrk4 {
    fn name(&self) -> &'static str {
        "etdrk4"
    }

    fn order(&self) -> u32 {
        4
    }

    fn prepare(&self, lambda: &[Complex64], dt: f64) -> Box<dyn PreparedScheme> {
        let len = lambda.len();
        let mut c = Etdrk4Coeffs {
            e: Vec::with_capacity(len),
            e_half: Vec::with_capacity(len),
            q: Vec::with_capacity(len),
            f1: Vec::with_capacity(len),
            f2: Vec::with_capacity(len),
            f3: Vec::with_capacity(len),
        };
        for &l in lambda {
            let z = l * dt;
            let [p1, p2, p3] = phi_functions(z);
            let [h1, _, _] = phi_functions(z * 0.5);
            c.e.push(z.exp());
            c.e_half.push((z * 0.5).exp());
            c.q.push(h1 * (dt * 0.5));
            c.f1.push((p1 - p2 * 3.0 + p3 * 4.0) * dt);
            c.f2.push((p2 - p3 * 2.0) * dt);
            c.f3.push((p3 * 4.0 - p2) * dt);
        }
        Box::new(c)
    }
}

impl PreparedScheme for Etdrk4Coeffs {
    fn advance(&self, y: &[Complex64], rhs: &Remainder<'_>) -> Result<Vec<Complex64>> {
        let nu = rhs(y)?;
        let a: Vec<_> = (0..y.len()).map(|i| self.e_half[i] * y[i] + self.q[i] * nu[i]).collect();
        let na = rhs(&a)?;
        let b: Vec<_> = (0..y.len()).map(|i| self.e_half[i] * y[i] + self.q[i] * na[i]).collect();
        let nb = rhs(&b)?;
        let c: Vec<_> = (0..y.len()).map(|i| self.e_half[i] * a[i] + self.q[i] * (nb[i] * 2.0 - nu[i])).collect();
        let nc = rhs(&c)?;
        Ok((0..y.len())
            .map(|i| self.e[i] * y[i] + self.f1[i] * nu[i] + self.f2[i] * 2.0 * (na[i] + nb[i]) + self.f3[i] * nc[i])
            .collect())
    }
}

struct LawsonCoeffs {
    e: Vec<Complex64>,
    e_half: Vec<Complex64>,
    dt: f64,
}

impl TimeScheme for Lawson4 {
    fn name(&self) -> &'static str {
        "lawson4"
    }

    fn order(&self) -> u32 {
        4
    }

    fn prepare(&self, lambda: &[Complex64], dt: f64) -> Box<dyn PreparedScheme> {
        Box::new(LawsonCoeffs {
            e: lambda.iter().map(|l| (l * dt).exp()).collect(),
            e_half: lambda.iter().map(|l| (l * dt * 0.5).exp()).collect(),
            dt,
        })
    }
}

impl PreparedScheme for LawsonCoeffs {
    fn advance(&self, y: &[Complex64], rhs: &Remainder<'_>) -> Result<Vec<Complex64>> {
        let h = self.dt;
        let k1 = rhs(y)?;
        let s2: Vec<_> = (0..y.len()).map(|i| self.e_half[i] * (y[i] + k1[i] * (h * 0.5))).collect();
        let k2 = rhs(&s2)?;
        let s3: Vec<_> = (0..y.len()).map(|i| self.e_half[i] * y[i] + k2[i] * (h * 0.5)).collect();
        let k3 = rhs(&s3)?;
        let s4: Vec<_> = (0..y.len()).map(|i| self.e[i] * y[i] + self.e_half[i] * k3[i] * h).collect();
        let k4 = rhs(&s4)?;
        Ok((0..y.len())
            .map(|i| {
                self.e[i] * y[i] + (self.e[i] * k1[i] + self.e_half[i] * (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0)
            })
            .collect())
    }
}

pub fn scheme_names() -> &'static [&'static str] {
    &["etdrk4", "lawson4"]
}

pub fn scheme_by_name(name: &str) -> Result<Arc<dyn TimeScheme>> {
    match name {
        "etdrk4" => Ok(Arc::new(Etdrk4)),
        "lawson4" => Ok(Arc::new(Lawson4)),
        other => Err(Error::Unknown { kind: "time scheme", name: other.to_string() }),
    }
}
