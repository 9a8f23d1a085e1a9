//! The functions `φ₀(z) = eᶻ`, `φ_{k+1}(z) = (φ_k(z) - 1/k!) / z` used by exponential integrators.

const SERIES_RADIUS: f64 = 1.0;
const SERIES_TERMS: usize = 30;

/// `[φ₀(z), φ₁(z), φ₂(z), φ₃(z)]`.
pub fn phi(z: f64) -> [f64; 4] {
    if z.abs() < SERIES_RADIUS {
        let mut out = [0.0; 4];
        for (k, o) in out.iter_mut().enumerate() {
            // Σ_j z^j / (j + k)!
            let mut term = 1.0 / factorial(k);
            let mut sum = term;
            for j in 1..SERIES_TERMS {
                term *= z / (j + k) as f64;
                sum += term;
            }
            *o = sum;
        }
        out
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        [e, p1, p2, p3]
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}
