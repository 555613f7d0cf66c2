//! Minimal quaternion arithmetic for the sampler: q = a + bi + cj + dk.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64 as C64;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quat(pub [f64; 4]);

impl Quat {
    pub const ZERO: Quat = Quat([0.0; 4]);
    pub const ONE: Quat = Quat([1.0, 0.0, 0.0, 0.0]);

    #[inline]
    pub fn conj(self) -> Quat {
        let [a, b, c, d] = self.0;
        Quat([a, -b, -c, -d])
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    #[inline]
    pub fn scale(self, s: f64) -> Quat {
        let [a, b, c, d] = self.0;
        Quat([a * s, b * s, c * s, d * s])
    }

    #[inline]
    pub fn re(self) -> f64 {
        self.0[0]
    }

    /// Complex pair (α, β) with q = α + βj: the 2×2 block is [[α, β], [−β̄, ᾱ]].
    #[inline]
    pub fn to_complex_pair(self) -> (C64, C64) {
        let [a, b, c, d] = self.0;
        (C64::new(a, b), C64::new(c, d))
    }

    #[inline]
    pub fn from_complex_pair(alpha: C64, beta: C64) -> Quat {
        Quat([alpha.re, alpha.im, beta.re, beta.im])
    }
}

impl Add for Quat {
    type Output = Quat;
    #[inline]
    fn add(self, o: Quat) -> Quat {
        let (x, y) = (self.0, o.0);
        Quat([x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]])
    }
}

impl Sub for Quat {
    type Output = Quat;
    #[inline]
    fn sub(self, o: Quat) -> Quat {
        let (x, y) = (self.0, o.0);
        Quat([x[0] - y[0], x[1] - y[1], x[2] - y[2], x[3] - y[3]])
    }
}

impl AddAssign for Quat {
    #[inline]
    fn add_assign(&mut self, o: Quat) {
        *self = *self + o;
    }
}

impl SubAssign for Quat {
    #[inline]
    fn sub_assign(&mut self, o: Quat) {
        *self = *self - o;
    }
}

impl Neg for Quat {
    type Output = Quat;
    #[inline]
    fn neg(self) -> Quat {
        self.scale(-1.0)
    }
}

impl Mul for Quat {
    type Output = Quat;
    #[inline]
    fn mul(self, o: Quat) -> Quat {
        let [a1, b1, c1, d1] = self.0;
        let [a2, b2, c2, d2] = o.0;
        Quat([
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ])
    }
}

/// Dense N×N quaternion matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct QMat {
    pub n: usize,
    pub data: Vec<Quat>,
}

impl QMat {
    pub fn zeros(n: usize) -> Self {
        QMat { n, data: vec![Quat::ZERO; n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Quat {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, q: Quat) {
        self.data[i * self.n + j] = q;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> QMat {
        let mut m = QMat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(j, i, self.get(i, j).conj());
            }
        }
        m
    }
}
