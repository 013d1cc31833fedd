//! Elementary closed forms for half-integer orders. Used as independent
//! cross-checks of the general-order routines (odd n gives half-integer ν).

use std::f64::consts::PI;

/// (J_{l+1/2}(x), Y_{l+1/2}(x)) by upward recurrence from the sin/cos kernels.
/// Accurate while l ≲ x (the recurrence is forward-stable there).
pub fn jy_half(l: usize, x: f64) -> (f64, f64) {
    let (s, c) = x.sin_cos();
    let mut j0 = s / x;
    let mut j1 = s / (x * x) - c / x;
    let mut y0 = -c / x;
    let mut y1 = -c / (x * x) - s / x;
    let (j, y) = match l {
        0 => (j0, y0),
        _ => {
            for m in 1..l {
                let f = (2 * m + 1) as f64 / x;
                let j2 = f * j1 - j0;
                let y2 = f * y1 - y0;
                j0 = j1;
                j1 = j2;
                y0 = y1;
                y1 = y2;
            }
            (j1, y1)
        }
    };
    let scale = (2.0 * x / PI).sqrt();
    (scale * j, scale * y)
}

/// K_{l+1/2}(x) from its terminating expansion.
pub fn k_half(l: usize, x: f64) -> f64 {
    let mut sum = 0.0;
    let mut coef = 1.0; // (l+k)! / (k! (l-k)!) / (2x)^k
    for k in 0..=l {
        if k > 0 {
            let kf = k as f64;
            coef *= (l as f64 + kf) * (l as f64 - kf + 1.0) / (kf * 2.0 * x);
        }
        sum += coef;
    }
    (PI / (2.0 * x)).sqrt() * (-x).exp() * sum
}

/// I_{1/2}(x) and I_{3/2}(x).
pub fn i_half(l: usize, x: f64) -> Option<f64> {
    let scale = (2.0 / (PI * x)).sqrt();
    match l {
        0 => Some(scale * x.sinh()),
        1 => Some(scale * (x.cosh() - x.sinh() / x)),
        _ => None,
    }
}
