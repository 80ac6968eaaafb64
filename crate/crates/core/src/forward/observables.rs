use serde::{Deserialize, Serialize};

use crate::scalar::{cross3, dot3, norm3, scale3, sub3, Point3, Real};

/// Symmetric gravity gradient tensor `T_ij = -d^2 Phi / dx_i dx_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GradientTensor<T> {
    pub xx: T,
    pub yy: T,
    pub zz: T,
    pub xy: T,
    pub xz: T,
    pub yz: T,
}

impl<T: Real> GradientTensor<T> {
    pub fn zero() -> Self {
        Self::from_matrix(&[[T::zero(); 3]; 3])
    }

    /// Symmetric part of `m`.
    pub fn from_matrix(m: &[[T; 3]; 3]) -> Self {
        let half = T::lit(0.5);
        Self {
            xx: m[0][0],
            yy: m[1][1],
            zz: m[2][2],
            xy: half * (m[0][1] + m[1][0]),
            xz: half * (m[0][2] + m[2][0]),
            yz: half * (m[1][2] + m[2][1]),
        }
    }

    pub fn matrix(&self) -> [[T; 3]; 3] {
        [
            [self.xx, self.xy, self.xz],
            [self.xy, self.yy, self.yz],
            [self.xz, self.yz, self.zz],
        ]
    }

    pub fn trace(&self) -> T {
        self.xx + self.yy + self.zz
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        let two = T::lit(2.0);
        (self.xx.sq() + self.yy.sq() + self.zz.sq() + two * (self.xy.sq() + self.xz.sq() + self.yz.sq())).sqrt()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            xx: self.xx + o.xx,
            yy: self.yy + o.yy,
            zz: self.zz + o.zz,
            xy: self.xy + o.xy,
            xz: self.xz + o.xz,
            yz: self.yz + o.yz,
        }
    }

    /// Components in the orthonormal frame whose axes are `frame[0..3]`:
    /// `T'_ab = e_a . T e_b`.
    pub fn in_frame(&self, frame: &[Point3<T>; 3]) -> Self {
        let m = self.matrix();
        let apply = |v: &Point3<T>| -> Point3<T> {
            [dot3(&m[0], v), dot3(&m[1], v), dot3(&m[2], v)]
        };
        let te: Vec<Point3<T>> = frame.iter().map(apply).collect();
        let c = |a: usize, b: usize| dot3(&frame[a], &te[b]);
        Self {
            xx: c(0, 0),
            yy: c(1, 1),
            zz: c(2, 2),
            xy: c(0, 1),
            xz: c(0, 2),
            yz: c(1, 2),
        }
    }

    /// Horizontal-plane observables `(T_xx - T_yy, 2 T_xy)`.
    pub fn inline_crossline(&self) -> InlineCrossline<T> {
        inline_crossline(self)
    }

    /// `Tr(P)^2 - 4 Det(P)` of the horizontal 2x2 block `P`.
    pub fn planar_discriminant(&self) -> T {
        let tr = self.xx + self.yy;
        let det = self.xx * self.yy - self.xy * self.xy;
        tr * tr - T::lit(4.0) * det
    }
}

/// Gradiometer pair: inline `M+ = T_xx - T_yy`, crossline `Mx = 2 T_xy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct InlineCrossline<T> {
    pub m_plus: T,
    pub m_cross: T,
}

impl<T: Real> InlineCrossline<T> {
    /// Rotation invariant `V = M+^2 + Mx^2`.
    pub fn v(&self) -> T {
        self.m_plus * self.m_plus + self.m_cross * self.m_cross
    }
}

pub fn inline_crossline<T: Real>(t: &GradientTensor<T>) -> InlineCrossline<T> {
    InlineCrossline {
        m_plus: t.xx - t.yy,
        m_cross: T::lit(2.0) * t.xy,
    }
}

/// Effect on `(M+, Mx)` of rotating the horizontal axes by `theta`: the pair
/// turns by `2 theta`.
pub fn rotate_observables<T: Real>(obs: &InlineCrossline<T>, theta: T) -> InlineCrossline<T> {
    let (s, c) = (theta + theta).sin_cos();
    InlineCrossline {
        m_plus: c * obs.m_plus - s * obs.m_cross,
        m_cross: s * obs.m_plus + c * obs.m_cross,
    }
}

/// Applies `R T R^t` to the horizontal block, with `R` the planar rotation by
/// `theta`; the vertical components are carried along unchanged in role.
pub fn rotate_horizontal<T: Real>(t: &GradientTensor<T>, theta: T) -> GradientTensor<T> {
    let (s, c) = theta.sin_cos();
    let r = [[c, -s, T::zero()], [s, c, T::zero()], [T::zero(), T::zero(), T::one()]];
    let m = t.matrix();
    let mut rm = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                rm[i][j] += r[i][k] * m[k][j];
            }
        }
    }
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i][j] += rm[i][k] * r[j][k];
            }
        }
    }
    GradientTensor::from_matrix(&out)
}

/// Local frame at `x` with the z-axis along `x / |x|`. The x-axis is the
/// normalized projection of the global x-axis onto the tangent plane, or of
/// the global y-axis when `x` is (nearly) parallel to it.
pub fn local_frame<T: Real>(x: &Point3<T>) -> Option<[Point3<T>; 3]> {
    let r = norm3(x);
    if !(r > T::zero()) {
        return None;
    }
    let ez = scale3(x, T::one() / r);
    let project = |a: Point3<T>| sub3(&a, &scale3(&ez, dot3(&a, &ez)));
    let mut ex = project([T::one(), T::zero(), T::zero()]);
    if norm3(&ex) < T::lit(1e-6) {
        ex = project([T::zero(), T::one(), T::zero()]);
    }
    let ex = scale3(&ex, T::one() / norm3(&ex));
    let ey = cross3(&ez, &ex);
    Some([ex, ey, ez])
}
