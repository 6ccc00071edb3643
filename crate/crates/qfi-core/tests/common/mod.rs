#![allow(dead_code)]

use proptest::prelude::*;
use qfi_core::bloch::{BlochChannel, ChannelFamily, Unitality};
use qfi_core::linalg::{Mat3, Vec3};

pub fn unit_vec() -> impl Strategy<Value = Vec3> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("too short", |(x, y, z)| x * x + y * y + z * z > 1e-2)
        .prop_map(|(x, y, z)| Vec3::new(x, y, z).normalized())
}

pub fn perpendicular_pair() -> impl Strategy<Value = (Vec3, Vec3)> {
    (unit_vec(), unit_vec())
        .prop_filter("parallel", |(a, b)| a.cross(b).norm() > 1e-1)
        .prop_map(|(a, b)| {
            let b = (b - a * a.dot(&b)).normalized();
            (a, b)
        })
}

pub fn quat_rotation(q: [f64; 4]) -> Mat3 {
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    Mat3([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ])
}

pub fn rotation() -> impl Strategy<Value = Mat3> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("degenerate", |q| q.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(quat_rotation)
}

/// `M(λ) = A diag(a + bλ) B` with fixed rotations.
#[derive(Clone, Debug)]
pub struct LinearUnital {
    pub a: Mat3,
    pub b: Mat3,
    pub offset: [f64; 3],
    pub slope: [f64; 3],
}

impl LinearUnital {
    pub fn at(&self, lambda: f64) -> BlochChannel {
        let s = [0, 1, 2].map(|i| self.offset[i] + self.slope[i] * lambda);
        let m = self.a * Mat3::diag(s[0], s[1], s[2]) * self.b;
        let dm = self.a * Mat3::diag(self.slope[0], self.slope[1], self.slope[2]) * self.b;
        BlochChannel::unital(m, dm)
    }

    pub fn family(&self) -> ChannelFamily {
        let me = self.clone();
        ChannelFamily::analytic("linear_unital", (-1.0, 1.0), Unitality::Unital, move |l| me.at(l)).unwrap()
    }
}

pub fn linear_unital() -> impl Strategy<Value = LinearUnital> {
    (
        rotation(),
        rotation(),
        prop::array::uniform3(-0.6f64..0.6),
        prop::array::uniform3(-0.4f64..0.4),
    )
        .prop_map(|(a, b, offset, slope)| LinearUnital { a, b, offset, slope })
}

pub fn mat_close(a: &Mat3, b: &Mat3) -> f64 {
    (*a - *b).max_abs()
}
