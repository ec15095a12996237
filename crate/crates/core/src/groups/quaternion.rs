//! Unit quaternions and the SO(4) action `x -> q1^-1 x q2`.

use std::ops::{Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Tolerance for all geometric comparisons.
pub const QUAT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// `cos(theta) + i sin(theta)`
    pub fn exp_i(theta: f64) -> Self {
        Quaternion::new(theta.cos(), theta.sin(), 0.0, 0.0)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// Inverse of a unit quaternion.
    pub fn inv(self) -> Self {
        self.conj()
    }

    pub fn distance(self, other: Quaternion) -> f64 {
        (self - other).norm()
    }

    pub fn approx_eq(self, other: Quaternion) -> bool {
        self.distance(other) < QUAT_TOL
    }

    /// Hashable key on a 1e-6 grid; distinct elements of the finite groups we
    /// build are separated by far more than that.
    pub(crate) fn grid_key(self) -> [i64; 4] {
        let r = |v: f64| (v * 1e6).round() as i64;
        [r(self.w), r(self.x), r(self.y), r(self.z)]
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;

    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// An element of `S^3 x S^3` acting on `S^3` by `x -> q1^-1 x q2`. The pairs
/// `(q1, q2)` and `(-q1, -q2)` give the same rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuatPair {
    pub left: Quaternion,
    pub right: Quaternion,
}

impl QuatPair {
    pub const IDENTITY: QuatPair = QuatPair { left: Quaternion::ONE, right: Quaternion::ONE };

    pub fn new(left: Quaternion, right: Quaternion) -> Self {
        QuatPair { left, right }
    }

    pub fn act(&self, x: Quaternion) -> Quaternion {
        self.left.inv() * x * self.right
    }

    pub fn compose(&self, other: &QuatPair) -> QuatPair {
        // (self . other)(x) = self(other(x)) = l1^-1 l2^-1 x r2 r1
        QuatPair::new(other.left * self.left, other.right * self.right)
    }

    /// Equality as rotations of S^3, i.e. up to the common sign.
    pub fn same_rotation(&self, other: &QuatPair) -> bool {
        (self.left.approx_eq(other.left) && self.right.approx_eq(other.right))
            || (self.left.approx_eq(-other.left) && self.right.approx_eq(-other.right))
    }

    /// Matrix of the rotation in the basis 1, i, j, k (row-major).
    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let basis = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
        let mut m = [[0.0; 4]; 4];
        for (col, b) in basis.iter().enumerate() {
            let image = self.act(*b).to_array();
            for row in 0..4 {
                m[row][col] = image[row];
            }
        }
        m
    }
}
