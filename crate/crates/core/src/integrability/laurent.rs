//! Truncated Laurent series in λ with grid-function coefficients.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::discretization::DerivOp;

/// `Σ_k c_k(s) λ^k` for `k ≥ floor`. Products drop every power below
/// `floor`, so all retained coefficients are exact as long as each factor
/// is exact down to `floor − (max power of the other factor)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentField {
    n: usize,
    floor: i32,
    coeffs: BTreeMap<i32, Vec<Complex64>>,
}

impl LaurentField {
    pub fn zero(n: usize, floor: i32) -> Self {
        LaurentField { n, floor, coeffs: BTreeMap::new() }
    }

    /// Single term `c(s) λ^k`.
    pub fn monomial(k: i32, c: Vec<Complex64>, floor: i32) -> Self {
        let mut f = LaurentField::zero(c.len(), floor);
        f.set(k, c);
        f
    }

    pub fn from_real(k: i32, c: &[f64], floor: i32) -> Self {
        LaurentField::monomial(k, c.iter().map(|&x| Complex64::new(x, 0.0)).collect(), floor)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn floor(&self) -> i32 {
        self.floor
    }

    pub fn k_min(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn k_max(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Coefficient of `λ^k`; zeros if absent.
    pub fn coeff(&self, k: i32) -> Vec<Complex64> {
        self.coeffs.get(&k).cloned().unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); self.n])
    }

    pub fn set(&mut self, k: i32, c: Vec<Complex64>) {
        assert_eq!(c.len(), self.n, "coefficient length");
        if k >= self.floor {
            self.coeffs.insert(k, c);
        }
    }

    pub fn add(&self, o: &LaurentField) -> LaurentField {
        let mut out = self.clone();
        out.floor = self.floor.max(o.floor);
        for (&k, c) in &o.coeffs {
            let e = out.coeffs.entry(k).or_insert_with(|| vec![Complex64::new(0.0, 0.0); self.n]);
            for (a, b) in e.iter_mut().zip(c) {
                *a += b;
            }
        }
        out.coeffs.retain(|&k, _| k >= out.floor);
        out
    }

    pub fn scale(&self, s: Complex64) -> LaurentField {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            c.iter_mut().for_each(|x| *x *= s);
        }
        out
    }

    pub fn sub(&self, o: &LaurentField) -> LaurentField {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, o: &LaurentField) -> LaurentField {
        let floor = self.floor.max(o.floor);
        let mut out = LaurentField::zero(self.n, floor);
        for (&i, a) in &self.coeffs {
            for (&j, b) in &o.coeffs {
                if i + j < floor {
                    continue;
                }
                let e = out.coeffs.entry(i + j).or_insert_with(|| vec![Complex64::new(0.0, 0.0); self.n]);
                for ((x, p), q) in e.iter_mut().zip(a).zip(b) {
                    *x += p * q;
                }
            }
        }
        out
    }

    /// Coefficient-wise `∂_s`.
    pub fn deriv_s(&self, d: &DerivOp) -> LaurentField {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = d.apply_complex(c);
        }
        out
    }

    /// Largest coefficient magnitude at power `k`.
    pub fn coeff_max_abs(&self, k: i32) -> f64 {
        self.coeffs.get(&k).map_or(0.0, |c| c.iter().fold(0.0, |m, z| m.max(z.norm())))
    }
}
