//! Chebyshev interpolation on an interval `[lo, hi]`.

use crate::scalar::Real;

/// First-kind Chebyshev nodes mapped to `[lo, hi]`, in descending order.
pub fn nodes<T: Real>(lo: T, hi: T, d: usize) -> Vec<T> {
    let half = T::of(0.5);
    (0..=d)
        .map(|j| {
            let u = (T::of_usize(2 * j + 1) * T::PI() / T::of_usize(2 * (d + 1))).cos();
            lo + (u + T::one()) * (hi - lo) * half
        })
        .collect()
}

/// Degree-`d` interpolant `Σ c_k T_k(u)` with `u = (2x − lo − hi)/(hi − lo)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries<T> {
    pub lo: T,
    pub hi: T,
    pub coeffs: Vec<T>,
}

impl<T: Real> ChebSeries<T> {
    /// Interpolates `f` at the `d + 1` Chebyshev nodes of `[lo, hi]`.
    pub fn interpolate(lo: T, hi: T, d: usize, f: impl Fn(T) -> T) -> Self {
        let xs = nodes(lo, hi, d);
        let fx: Vec<T> = xs.iter().map(|&x| f(x)).collect();
        let n = T::of_usize(d + 1);
        let coeffs = (0..=d)
            .map(|k| {
                let s = (0..=d).fold(T::zero(), |acc, j| {
                    let ang = T::of_usize(k * (2 * j + 1)) * T::PI() / T::of_usize(2 * (d + 1));
                    acc + fx[j] * ang.cos()
                });
                let w = if k == 0 { T::one() } else { T::of(2.0) };
                w * s / n
            })
            .collect();
        Self { lo, hi, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn to_unit(&self, x: T) -> T {
        (T::of(2.0) * x - self.lo - self.hi) / (self.hi - self.lo)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: T) -> T {
        let u = self.to_unit(x);
        let two_u = T::of(2.0) * u;
        let (mut b1, mut b2) = (T::zero(), T::zero());
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + two_u * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs.first().copied().unwrap_or(T::zero()) + u * b1 - b2
    }

    /// Ascending monomial coefficients in `x`.
    pub fn to_monomial(&self) -> Vec<T> {
        // u = α x + β
        let alpha = T::of(2.0) / (self.hi - self.lo);
        let beta = -(self.lo + self.hi) / (self.hi - self.lo);
        let d = self.degree();
        let mut out = vec![T::zero(); d + 1];
        let mut t_prev = vec![T::one()];
        let mut t_cur = vec![beta, alpha];
        add_scaled(&mut out, &t_prev, self.coeffs[0]);
        if d >= 1 {
            add_scaled(&mut out, &t_cur, self.coeffs[1]);
        }
        for k in 2..=d {
            // T_k = 2u T_{k-1} − T_{k-2}
            let mut next = vec![T::zero(); k + 1];
            for (i, &c) in t_cur.iter().enumerate() {
                next[i] += T::of(2.0) * beta * c;
                next[i + 1] += T::of(2.0) * alpha * c;
            }
            for (i, &c) in t_prev.iter().enumerate() {
                next[i] -= c;
            }
            add_scaled(&mut out, &next, self.coeffs[k]);
            t_prev = std::mem::replace(&mut t_cur, next);
        }
        out
    }
}

fn add_scaled<T: Real>(acc: &mut [T], p: &[T], s: T) {
    for (a, &c) in acc.iter_mut().zip(p) {
        *a += s * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz::eval_poly;

    #[test]
    fn reproduces_polynomials() {
        let p = [1.0f64, -2.0, 0.5, 3.0];
        let s = ChebSeries::interpolate(0.0, 1.0, 3, |x| eval_poly(&p, x));
        let m = s.to_monomial();
        for (a, b) in m.iter().zip(&p) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((s.eval(0.3) - eval_poly(&p, 0.3)).abs() < 1e-13);
    }

    #[test]
    fn exact_at_nodes_on_shifted_interval() {
        let f = |x: f64| (1.0 / x).asin();
        let s = ChebSeries::interpolate(2.0, 10.0, 9, f);
        for x in nodes(2.0, 10.0, 9) {
            assert!((s.eval(x) - f(x)).abs() < 1e-13);
        }
    }
}
