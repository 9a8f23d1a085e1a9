//! Truncated Taylor series for exact derivatives of smooth cutoff profiles.

use std::ops::{Add, Mul, Neg, Sub};

/// Number of stored Taylor coefficients (derivatives of order 0..=4).
pub const JET_LEN: usize = 5;

/// `c[k] = f^{(k)}(x₀) / k!`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet(pub [f64; JET_LEN]);

impl Jet {
    pub fn constant(c: f64) -> Self {
        let mut a = [0.0; JET_LEN];
        a[0] = c;
        Jet(a)
    }

    /// The identity function at `x₀`, scaled by `slope`.
    pub fn variable(x0: f64, slope: f64) -> Self {
        let mut a = [0.0; JET_LEN];
        a[0] = x0;
        a[1] = slope;
        Jet(a)
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// `[f, f', f'', f''', f'''']`.
    pub fn derivatives(&self) -> [f64; JET_LEN] {
        let mut out = self.0;
        let mut fact = 1.0;
        for (k, o) in out.iter_mut().enumerate().skip(1) {
            fact *= k as f64;
            *o *= fact;
        }
        out
    }

    pub fn recip(&self) -> Self {
        let a = &self.0;
        let mut b = [0.0; JET_LEN];
        b[0] = 1.0 / a[0];
        for k in 1..JET_LEN {
            let s: f64 = (1..=k).map(|j| a[j] * b[k - j]).sum();
            b[k] = -s * b[0];
        }
        Jet(b)
    }

    pub fn exp(&self) -> Self {
        let a = &self.0;
        let mut b = [0.0; JET_LEN];
        b[0] = a[0].exp();
        for k in 1..JET_LEN {
            let s: f64 = (1..=k).map(|j| j as f64 * a[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Jet(b)
    }

    pub fn div(&self, other: &Jet) -> Self {
        *self * other.recip()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut a = self.0;
        for (x, y) in a.iter_mut().zip(o.0) {
            *x += y;
        }
        Jet(a)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet(self.0.map(|x| -x))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; JET_LEN];
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = (0..=k).map(|j| self.0[j] * o.0[k - j]).sum();
        }
        Jet(c)
    }
}
