#![allow(dead_code)]

/// Independent reference for the linear problem: Taylor coefficients
/// `c_{n+1} = c_n (a + b q^n) / (n + 1)` summed with compensation until the
/// terms are negligible.
pub fn taylor_reference(a: f64, b: f64, q: f64, x0: f64, t: f64) -> f64 {
    let mut coeff = 1.0f64;
    let mut t_pow = 1.0f64;
    let mut sum = 1.0f64;
    let mut carry = 0.0f64;
    let mut quiet = 0;
    for n in 0..2000usize {
        coeff *= (a + b * q.powi(n as i32)) / (n as f64 + 1.0);
        t_pow *= t;
        let term = coeff * t_pow;
        let y = term - carry;
        let s = sum + y;
        carry = (s - sum) - y;
        sum = s;
        if term.abs() < 1e-17 * sum.abs().max(1.0) {
            quiet += 1;
            if quiet > 5 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    x0 * sum
}

pub fn rel_err(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs()
}
