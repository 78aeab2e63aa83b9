//! 2×2 linear algebra in the ℓ∞ norm.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Vec2<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero())
    }

    /// `max(|x|, |y|)`.
    pub fn norm_inf(&self) -> S {
        self.x.abs().max_of(self.y.abs())
    }

    /// `|x| + |y|`.
    pub fn norm_1(&self) -> S {
        self.x.abs() + self.y.abs()
    }

    pub fn dot(&self, o: &Self) -> S {
        self.x.clone() * o.x.clone() + self.y.clone() * o.y.clone()
    }

    pub fn scale(&self, s: S) -> Self {
        Self::new(self.x.clone() * s.clone(), self.y.clone() * s)
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(&self) -> Self {
        Self::new(-self.y.clone(), self.x.clone())
    }
}

impl<S: Scalar> Add for Vec2<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<S: Scalar> Sub for Vec2<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<S: Scalar> Neg for Vec2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Row-major `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2<S> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
}

impl<S: Scalar> Mat2<S> {
    pub fn new(a: S, b: S, c: S, d: S) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::new(S::one(), S::zero(), S::zero(), S::one())
    }

    pub fn diag(x: S, y: S) -> Self {
        Self::new(x, S::zero(), S::zero(), y)
    }

    /// Matrix with the given columns.
    pub fn from_columns(p: &Vec2<S>, q: &Vec2<S>) -> Self {
        Self::new(p.x.clone(), q.x.clone(), p.y.clone(), q.y.clone())
    }

    pub fn col0(&self) -> Vec2<S> {
        Vec2::new(self.a.clone(), self.c.clone())
    }

    pub fn col1(&self) -> Vec2<S> {
        Vec2::new(self.b.clone(), self.d.clone())
    }

    pub fn det(&self) -> S {
        self.a.clone() * self.d.clone() - self.b.clone() * self.c.clone()
    }

    pub fn trace(&self) -> S {
        self.a.clone() + self.d.clone()
    }

    /// Operator norm induced by ℓ∞: the largest row ℓ¹ sum.
    pub fn norm_inf(&self) -> S {
        let r0 = self.a.abs() + self.b.abs();
        let r1 = self.c.abs() + self.d.abs();
        r0.max_of(r1)
    }

    /// `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.is_zero() {
            return None;
        }
        Some(Self::new(
            self.d.clone() / det.clone(),
            -self.b.clone() / det.clone(),
            -self.c.clone() / det.clone(),
            self.a.clone() / det,
        ))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::identity();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }

    pub fn apply(&self, v: &Vec2<S>) -> Vec2<S> {
        Vec2::new(
            self.a.clone() * v.x.clone() + self.b.clone() * v.y.clone(),
            self.c.clone() * v.x.clone() + self.d.clone() * v.y.clone(),
        )
    }

    /// Largest modulus of an eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        let (t, d) = (self.trace().to_f64(), self.det().to_f64());
        let disc = t * t / 4.0 - d;
        if disc >= 0.0 {
            (t / 2.0).abs() + disc.sqrt()
        } else {
            d.sqrt()
        }
    }
}

impl<S: Scalar> Mul for Mat2<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a.clone() * o.a.clone() + self.b.clone() * o.c.clone(),
            self.a.clone() * o.b.clone() + self.b.clone() * o.d.clone(),
            self.c.clone() * o.a.clone() + self.d.clone() * o.c.clone(),
            self.c * o.b + self.d * o.d,
        )
    }
}

impl<S: Scalar> Sub for Mat2<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl<S: Scalar> Add for Mat2<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}
