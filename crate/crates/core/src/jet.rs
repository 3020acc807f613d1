//! Second-order forward-mode differentiation.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to `N` seeded variables. Arithmetic and the elementary functions
//! propagate all three by the chain rule, so any closed-form expression
//! evaluated on jets yields exact first and second derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar types that expressions can be evaluated over.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn constant(c: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, e: f64) -> Self;
}

impl Real for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
}

/// Value, gradient and (symmetric) Hessian with respect to `N` variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub val: f64,
    pub grad: [f64; N],
    pub hess: [[f64; N]; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(val: f64) -> Self {
        Self {
            val,
            grad: [0.0; N],
            hess: [[0.0; N]; N],
        }
    }

    /// The `i`-th independent variable, evaluated at `val`.
    pub fn variable(val: f64, i: usize) -> Self {
        let mut j = Self::constant(val);
        j.grad[i] = 1.0;
        j
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.val`.
    fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        let mut out = Self::constant(f);
        for i in 0..N {
            out.grad[i] = df * self.grad[i];
            for j in 0..N {
                out.hess[i][j] = df * self.hess[i][j] + d2f * self.grad[i] * self.grad[j];
            }
        }
        out
    }

    fn recip(self) -> Self {
        let r = 1.0 / self.val;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.val += rhs.val;
        for i in 0..N {
            self.grad[i] += rhs.grad[i];
            for j in 0..N {
                self.hess[i][j] += rhs.hess[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::constant(self.val * rhs.val);
        for i in 0..N {
            out.grad[i] = self.grad[i] * rhs.val + self.val * rhs.grad[i];
            for j in 0..N {
                out.hess[i][j] = self.hess[i][j] * rhs.val
                    + self.val * rhs.hess[i][j]
                    + self.grad[i] * rhs.grad[j]
                    + self.grad[j] * rhs.grad[i];
            }
        }
        out
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.val += rhs;
        self
    }
}

impl<const N: usize> Sub<f64> for Jet<N> {
    type Output = Self;
    fn sub(mut self, rhs: f64) -> Self {
        self.val -= rhs;
        self
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        self.val *= rhs;
        for i in 0..N {
            self.grad[i] *= rhs;
            for j in 0..N {
                self.hess[i][j] *= rhs;
            }
        }
        self
    }
}

impl<const N: usize> Div<f64> for Jet<N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: f64) -> Self {
        self * (1.0 / rhs)
    }
}

impl<const N: usize> Real for Jet<N> {
    fn constant(c: f64) -> Self {
        Jet::constant(c)
    }
    fn value(&self) -> f64 {
        self.val
    }
    fn sin(self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.chain(c, -s, -c)
    }
    fn exp(self) -> Self {
        let e = self.val.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let r = 1.0 / self.val;
        self.chain(self.val.ln(), r, -r * r)
    }
    fn sqrt(self) -> Self {
        let s = self.val.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.val))
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Jet::constant(1.0),
            1 => self,
            _ => {
                let v = self.val;
                let nf = f64::from(n);
                self.chain(
                    v.powi(n),
                    nf * v.powi(n - 1),
                    nf * (nf - 1.0) * v.powi(n - 2),
                )
            }
        }
    }
    fn powf(self, e: f64) -> Self {
        if e.fract() == 0.0 && e.abs() <= f64::from(i32::MAX) {
            return self.powi(e as i32);
        }
        let v = self.val;
        self.chain(v.powf(e), e * v.powf(e - 1.0), e * (e - 1.0) * v.powf(e - 2.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type J2 = Jet<2>;

    #[test]
    fn product_rule_on_polynomial() {
        // f = x^2 y + 3 y at (2, 5)
        let x = J2::variable(2.0, 0);
        let y = J2::variable(5.0, 1);
        let f = x * x * y + y * 3.0;
        assert_eq!(f.val, 35.0);
        assert_eq!(f.grad, [20.0, 7.0]);
        assert_eq!(f.hess, [[10.0, 4.0], [4.0, 0.0]]);
    }

    #[test]
    fn quotient_and_sqrt_match_hand_derivatives() {
        // f = sqrt(x) / y
        let (xv, yv) = (4.0, 2.0);
        let f = J2::variable(xv, 0).sqrt() / J2::variable(yv, 1);
        assert!((f.val - 1.0).abs() < 1e-15);
        assert!((f.grad[0] - 0.5 / (xv.sqrt() * yv)).abs() < 1e-15);
        assert!((f.grad[1] + xv.sqrt() / (yv * yv)).abs() < 1e-15);
        assert!((f.hess[0][0] + 0.25 / (xv.powf(1.5) * yv)).abs() < 1e-15);
        assert!((f.hess[1][1] - 2.0 * xv.sqrt() / yv.powi(3)).abs() < 1e-15);
        assert!((f.hess[0][1] + 0.5 / (xv.sqrt() * yv * yv)).abs() < 1e-15);
    }

    #[test]
    fn trig_and_exp_second_derivatives() {
        let x = J2::variable(0.7, 0);
        let c = x.cos();
        assert!((c.hess[0][0] + 0.7f64.cos()).abs() < 1e-15);
        let e = (x * 2.0).exp();
        assert!((e.hess[0][0] - 4.0 * 1.4f64.exp()).abs() < 1e-12);
        let l = x.ln();
        assert!((l.hess[0][0] + 1.0 / 0.49).abs() < 1e-12);
    }

    #[test]
    fn powf_with_integer_exponent_handles_negative_base() {
        let x = J2::variable(-1.5, 0);
        let p = x.powf(4.0);
        assert_eq!(p.val, 1.5f64.powi(4));
        assert_eq!(p.grad[0], 4.0 * (-1.5f64).powi(3));
        assert_eq!(p.hess[0][0], 12.0 * 1.5f64.powi(2));
    }
}
