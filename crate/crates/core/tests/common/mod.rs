//! Reference computations used as independent oracles in the integration tests.
#![allow(dead_code)]

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance `eps`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), eps, 50)
}

/// Integral of the logistic survival e^(a+bp)/(1+e^(a+bp)) over [0, ∞).
pub fn logistic_survival_integral(a: f64, b: f64) -> f64 {
    let q = |p: f64| {
        let eta = a + b * p;
        if eta >= 0.0 {
            1.0 / (1.0 + (-eta).exp())
        } else {
            let e = eta.exp();
            e / (1.0 + e)
        }
    };
    // beyond this point the remaining mass is below e^-45 / |b|
    let upper = ((a + 45.0) / -b).max(45.0 / -b);
    // split at the midpoint of the demand curve where the integrand bends
    let knee = (a / -b).clamp(0.0, upper);
    adaptive_simpson(&q, 0.0, knee, 1e-11) + adaptive_simpson(&q, knee, upper, 1e-11)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Mass, mean, and survival of a truncated normal by direct integration of its density.
pub struct TruncatedNormalOracle {
    pub mean: f64,
    pub sd: f64,
    pub low: f64,
    pub high: f64,
}

impl TruncatedNormalOracle {
    fn density(&self, x: f64) -> f64 {
        normal_pdf((x - self.mean) / self.sd) / self.sd
    }

    pub fn mass(&self) -> f64 {
        adaptive_simpson(&|x| self.density(x), self.low, self.high, 1e-13)
    }

    pub fn mean_value(&self) -> f64 {
        adaptive_simpson(&|x| x * self.density(x), self.low, self.high, 1e-11) / self.mass()
    }

    pub fn survival(&self, p: f64) -> f64 {
        if p <= self.low {
            return 1.0;
        }
        if p >= self.high {
            return 0.0;
        }
        adaptive_simpson(&|x| self.density(x), p, self.high, 1e-13) / self.mass()
    }
}

/// Brute-force maximizer of `f` over [lo, hi] at a fixed step.
pub fn grid_argmax(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let n = ((hi - lo) / step).floor() as usize;
    let mut best = (lo, f(lo));
    for k in 1..=n {
        let p = lo + k as f64 * step;
        let v = f(p);
        if v > best.1 {
            best = (p, v);
        }
    }
    best
}

/// Log-likelihood of individual Bernoulli answers under logistic demand.
pub fn bernoulli_log_likelihood(obs: &[(f64, bool)], a: f64, b: f64) -> f64 {
    obs.iter()
        .map(|&(p, y)| {
            let eta = a + b * p;
            // log(1 + e^eta) computed stably
            let log1pexp = if eta > 0.0 {
                eta + (-eta).exp().ln_1p()
            } else {
                eta.exp().ln_1p()
            };
            if y {
                eta - log1pexp
            } else {
                -log1pexp
            }
        })
        .sum()
}
