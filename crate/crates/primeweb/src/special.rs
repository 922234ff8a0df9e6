//! Series evaluations of the logarithmic integral, the exponential integral
//! and the Riemann prime-counting function.

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `E1(z)` for `z > 0`.
pub fn exp_integral_e1(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    if z <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -z / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        -EULER_GAMMA - z.ln() + sum
    } else {
        // modified Lentz on the continued fraction
        let tiny = 1e-300;
        let mut b = z + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-z).exp()
    }
}

/// Principal-value logarithmic integral `li(x) = PV ∫₀ˣ ds / ln s`.
pub fn li(x: f64) -> Result<f64> {
    if !(x >= 0.0) || x == 1.0 || !x.is_finite() {
        return Err(Error::Domain(format!("li({x})")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < 1.0 {
        return Ok(-exp_integral_e1(-x.ln()));
    }
    // Ramanujan's series
    let lnx = x.ln();
    let mut sum = 0.0;
    let mut inner = 0.0;
    let mut power = 1.0; // (ln x)^n / (n! 2^(n-1))
    for n in 1..400 {
        power *= lnx / n as f64;
        if n > 1 {
            power /= 2.0;
        }
        if (n - 1) % 2 == 0 {
            inner += 1.0 / (n as f64);
        }
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * power * inner;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() && n > 2 {
            break;
        }
    }
    Ok(EULER_GAMMA + lnx.abs().ln() + x.sqrt() * sum)
}

/// `ζ(s)` for integer `s >= 2` via Euler-Maclaurin.
pub fn zeta_int(s: u32) -> f64 {
    assert!(s >= 2);
    if s > 60 {
        return 1.0 + 0.5f64.powi(s as i32);
    }
    let n = 40.0f64;
    let sf = s as f64;
    let mut sum: f64 = (1..40).map(|k| (k as f64).powf(-sf)).sum();
    sum += n.powf(1.0 - sf) / (sf - 1.0) + 0.5 * n.powf(-sf);
    // Bernoulli corrections B2, B4, B6
    let mut rising = sf;
    let mut pow = n.powf(-sf - 1.0);
    let coeffs = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0];
    for (j, c) in coeffs.iter().enumerate() {
        sum += c * rising * pow;
        rising *= (sf + 2.0 * j as f64 + 1.0) * (sf + 2.0 * j as f64 + 2.0);
        pow /= n * n;
    }
    sum
}

/// Riemann's `R(x)` via the Gram series.
pub fn riemann_r_gram(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let lnx = x.ln();
    let mut sum = 1.0;
    let mut power = 1.0; // (ln x)^k / k!
    for k in 1..2000u32 {
        power *= lnx / k as f64;
        let term = power / (k as f64 * zeta_int(k + 1));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() && k as f64 > lnx {
            break;
        }
    }
    sum
}

/// Solves `R(x) = n` for `x` by Newton iteration; accurate to a few units.
pub fn riemann_r_inverse(n: f64) -> f64 {
    if n < 2.0 {
        return 2.0;
    }
    let mut x = n * n.ln().max(1.0);
    for _ in 0..100 {
        let fx = riemann_r_gram(x) - n;
        let step = fx * x.ln();
        x = (x - step).max(2.0);
        if step.abs() < 0.5 {
            break;
        }
    }
    x
}
