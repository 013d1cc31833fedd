//! Bessel functions of real non-negative order and positive real argument.
//!
//! J and Y use the power series for small arguments, Steed's continued
//! fractions with Temme's series (the classical `bessjy` scheme) in the
//! transition region and Hankel's asymptotic expansion once x ≥ max(25, ν²).
//! I and K use the analogous continued-fraction scheme.

use std::f64::consts::PI;

use super::gamma::{ln_gamma_pos, temme_gammas};
use super::Order;
use crate::error::{domain, Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAXIT: usize = 1_000_000;
const XMIN: f64 = 2.0;
const RESCALE: f64 = 1e250;

fn check_arg(x: f64) -> Result<()> {
    if x < 0.0 || !x.is_finite() {
        return Err(domain(format!("Bessel argument must be finite and non-negative, got {x}")));
    }
    Ok(())
}

/// J_ν(x).
pub fn bessel_j(order: Order, x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(j_unchecked(order.nu(), x))
}

/// Y_ν(x), x > 0.
pub fn bessel_y(order: Order, x: f64) -> Result<f64> {
    if x <= 0.0 || !x.is_finite() {
        return Err(domain(format!("Y_nu requires x > 0, got {x}")));
    }
    Ok(jy(order.nu(), x)?.1)
}

/// (J_ν(x), Y_ν(x)) for x > 0.
pub fn bessel_jy(order: Order, x: f64) -> Result<(f64, f64)> {
    if x <= 0.0 || !x.is_finite() {
        return Err(domain(format!("bessel_jy requires x > 0, got {x}")));
    }
    jy(order.nu(), x)
}

pub(crate) fn j_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x * x <= 4.0 * (nu + 1.0) {
        return j_series(nu, x);
    }
    match jy(nu, x) {
        Ok((j, _)) => j,
        Err(_) => f64::NAN,
    }
}

fn j_series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let lead = if nu == 0.0 {
        1.0
    } else {
        (nu * half.ln() - ln_gamma_pos(nu + 1.0)).exp()
    };
    let q = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..500 {
        let mf = m as f64;
        term *= q / (mf * (nu + mf));
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    lead * sum
}

fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (kf * 8.0 * x);
        let mag = term.abs();
        if mag > last {
            break;
        }
        last = mag;
        // a_k / x^k enters P with sign (-1)^{k/2} for even k, Q with (-1)^{(k-1)/2} for odd k
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if mag < 1e-17 * p.abs().max(q.abs()) {
            break;
        }
    }
    (p, q)
}

fn jy_hankel(nu: f64, x: f64) -> (f64, f64) {
    let (p, q) = hankel_pq(nu, x);
    let chi = x - (0.5 * nu + 0.25) * PI;
    let (s, c) = chi.sin_cos();
    let amp = (2.0 / (PI * x)).sqrt();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

fn jy(nu: f64, x: f64) -> Result<(f64, f64)> {
    if x >= 25.0_f64.max(nu * nu) {
        return Ok(jy_hankel(nu, x));
    }
    jy_steed(nu, x)
}

fn jy_steed(xnu: f64, x: f64) -> Result<(f64, f64)> {
    let nl = if x < XMIN {
        (xnu + 0.5) as usize
    } else {
        (xnu - x + 1.5).max(0.0) as usize
    };
    let xmu = xnu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: J'_nu / J_nu
    let mut isign = 1.0;
    let mut h = (xnu * xi).max(FPMIN);
    let mut b = xi2 * xnu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence(format!("CF1 for J_{xnu}({x})")));
    }

    let mut rjl = isign * 1e-30;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let mut rescales = 0i32;
    let mut fact = xnu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
        if rjl.abs() > RESCALE {
            rjl /= RESCALE;
            rjpl /= RESCALE;
            rescales += 1;
        }
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    let (rjmu, rymu, ry1);
    if x < XMIN {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = 2.0 / PI * fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let e = e.exp();
        let mut p = e / (gampl * PI);
        let mut q = 1.0 / (e * PI * gammi);
        let pimu2 = 0.5 * pimu;
        let fact3 = if pimu2.abs() < EPS { 1.0 } else { pimu2.sin() / pimu2 };
        let r = PI * pimu2 * fact3 * fact3;
        let mut c = 1.0;
        let d = -x2 * x2;
        let mut sum = ff + r * q;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= d / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * (ff + r * q);
            sum += del;
            let del1 = c * p - fi * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Convergence(format!("Temme series for Y_{xnu}({x})")));
        }
        let ymu = -sum;
        let y1 = -sum1 * xi2;
        let ymup = xmu * xi * ymu - y1;
        rjmu = w / (ymup - f * ymu);
        rymu = ymu;
        ry1 = y1;
    } else {
        let mut a = 0.25 - xmu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fact = a * xi / (p * p + q * q);
        let mut cr = br + q * fact;
        let mut ci = bi + p * fact;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let mut dlr = cr * dr - ci * di;
        let mut dli = cr * di + ci * dr;
        let mut temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        let mut ok = false;
        for i in 2..MAXIT {
            a += 2.0 * (i as f64 - 1.0);
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < FPMIN {
                dr = FPMIN;
            }
            fact = a / (cr * cr + ci * ci);
            cr = br + cr * fact;
            ci = bi - ci * fact;
            if cr.abs() + ci.abs() < FPMIN {
                cr = FPMIN;
            }
            den = dr * dr + di * di;
            dr /= den;
            di /= -den;
            dlr = cr * dr - ci * di;
            dli = cr * di + ci * dr;
            temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Convergence(format!("CF2 for J_{xnu}({x})")));
        }
        let gam = (p - f) / q;
        let mut jm = (w / ((p - f) * gam + q)).sqrt();
        if rjl < 0.0 {
            jm = -jm;
        }
        rjmu = jm;
        rymu = jm * gam;
        let rymup = rymu * (p + q / gam);
        ry1 = xmu * xi * rymu - rymup;
    }

    let mut rj = rjl1 * (rjmu / rjl);
    for _ in 0..rescales {
        rj /= RESCALE;
    }
    let mut ymu = rymu;
    let mut y1 = ry1;
    for i in 1..=nl {
        let ytemp = (xmu + i as f64) * xi2 * y1 - ymu;
        ymu = y1;
        y1 = ytemp;
    }
    Ok((rj, ymu))
}

/// I_ν(x) for x > 0.
pub fn bessel_i(order: Order, x: f64) -> Result<f64> {
    Ok(bessel_ik(order, x)?.0)
}

/// K_ν(x) for x > 0.
pub fn bessel_k(order: Order, x: f64) -> Result<f64> {
    Ok(bessel_ik(order, x)?.1)
}

/// (I_ν(x), K_ν(x)) for x > 0.
pub fn bessel_ik(order: Order, x: f64) -> Result<(f64, f64)> {
    if x <= 0.0 || !x.is_finite() {
        return Err(domain(format!("modified Bessel functions require x > 0, got {x}")));
    }
    let xnu = order.nu();
    let nl = (xnu + 0.5) as usize;
    let xmu = xnu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;

    let mut h = (xnu * xi).max(FPMIN);
    let mut b = xi2 * xnu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence(format!("CF1 for I_{xnu}({x})")));
    }
    let mut ril = 1e-30;
    let mut ripl = h * ril;
    let ril1 = ril;
    let mut rescales = 0i32;
    let mut fact = xnu * xi;
    for _ in 0..nl {
        let ritemp = fact * ril + ripl;
        fact -= xi;
        ripl = fact * ritemp + ril;
        ril = ritemp;
        if ril.abs() > RESCALE {
            ril /= RESCALE;
            ripl /= RESCALE;
            rescales += 1;
        }
    }
    let f = ripl / ril;

    let (rkmu, rk1);
    if x < XMIN {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let e = e.exp();
        let mut p = 0.5 * e / gampl;
        let mut q = 0.5 / (e * gammi);
        let mut c = 1.0;
        let d = x2 * x2;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= d / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Convergence(format!("Temme series for K_{xnu}({x})")));
        }
        rkmu = sum;
        rk1 = sum1 * xi2;
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - xmu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut ok = false;
        for i in 2..MAXIT {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Convergence(format!("CF2 for K_{xnu}({x})")));
        }
        h *= a1;
        rkmu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        rk1 = rkmu * (xmu + x + 0.5 - h) * xi;
    }
    let rkmup = xmu * xi * rkmu - rk1;
    let rimu = xi / (f * rkmu - rkmup);
    let mut ri = (rimu * ril1) / ril;
    for _ in 0..rescales {
        ri /= RESCALE;
    }
    let mut kmu = rkmu;
    let mut k1 = rk1;
    for i in 1..=nl {
        let ktemp = (xmu + i as f64) * xi2 * k1 + kmu;
        kmu = k1;
        k1 = ktemp;
    }
    Ok((ri, kmu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::halfint;

    fn o(nu: f64) -> Order {
        Order::new(nu).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_order_closed_forms() {
        let v = bessel_j(o(0.5), PI / 2.0).unwrap();
        assert!(rel(v, 2.0 / PI) < 1e-14);
        assert_eq!(bessel_j(o(0.0), 0.0).unwrap(), 1.0);
        assert!((bessel_j(o(0.0), 1e-12).unwrap() - 1.0).abs() < 1e-15);
        for &x in &[0.3, 1.0, 2.5, 7.0, 13.0, 30.0, 99.0, 500.0] {
            for l in (0..6).filter(|&l| l as f64 <= x) {
                let nu = l as f64 + 0.5;
                let (j, y) = bessel_jy(o(nu), x).unwrap();
                let (jc, yc) = halfint::jy_half(l, x);
                let scale = (2.0 / (PI * x)).sqrt();
                assert!((j - jc).abs() < 1e-12 * scale, "J_{nu}({x}): {j} vs {jc}");
                assert!((y - yc).abs() < 1e-12 * scale.max(yc.abs()), "Y_{nu}({x}): {y} vs {yc}");
            }
        }
    }

    #[test]
    fn series_and_continued_fraction_agree_at_switch() {
        for &nu in &[0.0, 0.5, 1.0, 3.5, 10.0, 29.5] {
            let x = 2.0 * (nu + 1.0_f64).sqrt();
            let a = j_series(nu, x * (1.0 + 1e-9));
            let b = jy_steed(nu, x * (1.0 + 1e-9)).unwrap().0;
            assert!((a - b).abs() < 1e-12 * a.abs().max(1e-3), "nu {nu}");
        }
    }

    #[test]
    fn steed_and_hankel_agree() {
        for &nu in &[0.0, 0.5, 1.0, 2.0, 4.5] {
            for &x in &[25.0, 40.0, 80.0] {
                let (j1, y1) = jy_steed(nu, x).unwrap();
                let (j2, y2) = jy_hankel(nu, x);
                assert!((j1 - j2).abs() < 1e-14, "J nu {nu} x {x}");
                assert!((y1 - y2).abs() < 1e-14, "Y nu {nu} x {x}");
            }
        }
    }

    #[test]
    fn modified_half_order() {
        let i = bessel_i(o(0.5), 1.0).unwrap();
        let k = bessel_k(o(0.5), 1.0).unwrap();
        assert!(rel(i, (2.0 / PI).sqrt() * 1.0_f64.sinh()) < 1e-14);
        assert!(rel(k, (PI / 2.0).sqrt() * (-1.0_f64).exp()) < 1e-14);
        for l in 0..30 {
            for &x in &[0.1, 1.0, 3.0, 20.0] {
                let kk = bessel_k(o(l as f64 + 0.5), x).unwrap();
                assert!(rel(kk, halfint::k_half(l, x)) < 1e-13, "K_{l}.5({x})");
            }
        }
    }

    #[test]
    fn negative_argument_rejected() {
        assert!(bessel_j(o(1.0), -1.0).is_err());
        assert!(bessel_i(o(1.0), -1.0).is_err());
        assert!(bessel_k(o(1.0), 0.0).is_err());
    }
}
