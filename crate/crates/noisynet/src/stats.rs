//! Small numerical helpers shared across the crate: the normal quantile,
//! deterministic seed derivation and two-pass sample covariance.

// the quantile coefficients are kept at full printed precision
#![allow(clippy::excessive_precision)]

use nalgebra::DMatrix;

/// Inverse of the standard normal CDF (Wichura's algorithm AS 241, PPND16).
///
/// Accurate to about 1e-16 over (0, 1); returns infinities at the endpoints.
pub fn normal_quantile(p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "probability out of range: {p}");
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A_COEF, r) / poly(&B_COEF, r);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C_COEF, r) / poly(&D_COEF, r)
    } else {
        let r = r - 5.0;
        poly(&E_COEF, r) / poly(&F_COEF, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

fn poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

const A_COEF: [f64; 8] = [
    3.3871328727963666080,
    1.3314166789178437745e2,
    1.9715909503065514427e3,
    1.3731693765509461125e4,
    4.5921953931549871457e4,
    6.7265770927008700853e4,
    3.3430575583588128105e4,
    2.5090809287301226727e3,
];
const B_COEF: [f64; 8] = [
    1.0,
    4.2313330701600911252e1,
    6.8718700749205790830e2,
    5.3941960214247511077e3,
    2.1213794301586595867e4,
    3.9307895800092710610e4,
    2.8729085735721942674e4,
    5.2264952788528545610e3,
];
const C_COEF: [f64; 8] = [
    1.42343711074968357734,
    4.63033784615654529590,
    5.76949722146069140550,
    3.64784832476320460504,
    1.27045825245236838258,
    2.41780725177450611770e-1,
    2.27238449892691845833e-2,
    7.74545014278341407640e-4,
];
const D_COEF: [f64; 8] = [
    1.0,
    2.05319162663775882187,
    1.67638483018380384940,
    6.89767334985100004550e-1,
    1.48103976427480074590e-1,
    1.51986665636164571966e-2,
    5.47593808499534494600e-4,
    1.05075007164441684324e-9,
];
const E_COEF: [f64; 8] = [
    6.65790464350110377720,
    5.46378491116411436990,
    1.78482653991729133580,
    2.96560571828504891230e-1,
    2.65321895265761230930e-2,
    1.24266094738807843860e-3,
    2.71155556874348757815e-5,
    2.01033439929228813265e-7,
];
const F_COEF: [f64; 8] = [
    1.0,
    5.99832206555887937690e-1,
    1.36929880922735805310e-1,
    1.48753612908506148525e-2,
    7.86869131145613259100e-4,
    1.84631831751005468180e-5,
    1.42151175831644588870e-7,
    2.04426310338993978564e-15,
];

/// splitmix64 finalizer; used to derive independent RNG streams from one seed.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for stream `stream` of a base seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    splitmix64(base ^ splitmix64(stream))
}

/// Sample covariance (divisor n-1) of the rows of `samples`, computed in two
/// passes so the result does not depend on accumulation order.
pub fn sample_covariance(samples: &DMatrix<f64>) -> DMatrix<f64> {
    let n = samples.nrows();
    let m = samples.ncols();
    assert!(n >= 2, "need at least two samples for a covariance");
    let mut mean = vec![0.0; m];
    for r in 0..n {
        for c in 0..m {
            mean[c] += samples[(r, c)];
        }
    }
    for v in &mut mean {
        *v /= n as f64;
    }
    let mut cov = DMatrix::zeros(m, m);
    for r in 0..n {
        for i in 0..m {
            let di = samples[(r, i)] - mean[i];
            for j in i..m {
                cov[(i, j)] += di * (samples[(r, j)] - mean[j]);
            }
        }
    }
    for i in 0..m {
        for j in i..m {
            let v = cov[(i, j)] / (n as f64 - 1.0);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_reference_values() {
        // Reference values from the standard normal distribution.
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-9);
        assert!((normal_quantile(0.5) - 0.0).abs() < 1e-15);
        assert!((normal_quantile(0.95) - 1.6448536269514722).abs() < 1e-9);
        assert!((normal_quantile(0.025) + 1.959963984540054).abs() < 1e-9);
        assert!((normal_quantile(1e-10) + 6.361340902404056).abs() < 1e-6);
    }

    #[test]
    fn quantile_symmetry() {
        for &p in &[0.01, 0.1, 0.3, 0.45, 0.6, 0.9, 0.999] {
            assert!((normal_quantile(p) + normal_quantile(1.0 - p)).abs() < 1e-12);
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|i| derive_seed(42, i)).collect();
        let mut dedup = s.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), s.len());
    }

    #[test]
    fn covariance_matches_hand_computation() {
        let samples = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0, 4.0, 8.0]);
        let cov = sample_covariance(&samples);
        let var_x = 5.0 / 3.0;
        assert!((cov[(0, 0)] - var_x).abs() < 1e-12);
        assert!((cov[(0, 1)] - 2.0 * var_x).abs() < 1e-12);
        assert!((cov[(1, 1)] - 4.0 * var_x).abs() < 1e-12);
    }
}
