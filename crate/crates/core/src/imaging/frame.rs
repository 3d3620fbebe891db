use nalgebra::Matrix3;

use crate::scene::Vec3;

/// Rigid transform from world coordinates into the `U V R` mapping frame:
/// `U` along track, `R` along the top ray of the initial fan, `V = R x U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapFrame {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl MapFrame {
    /// Rotation parameterized by the relative pitch `gamma` and azimuth `beta`:
    ///
    /// ```text
    /// [ -cos b   -cos g sin b   -sin g sin b ]
    /// [    0          sin g         -cos g   ]
    /// [  sin b   -cos g cos b   -sin g cos b ]
    /// ```
    pub fn from_angles(gamma: f64, beta: f64, translation: Vec3) -> Self {
        let (sg, cg) = gamma.sin_cos();
        let (sb, cb) = beta.sin_cos();
        #[rustfmt::skip]
        let rotation = Matrix3::new(
            -cb, -cg * sb, -sg * sb,
            0.0,  sg,      -cg,
            sb,  -cg * cb, -sg * cb,
        );
        MapFrame {
            rotation,
            translation,
        }
    }

    /// Frame whose origin is `origin`, with `U` along `track` and `R` along
    /// `top_ray` (re-orthogonalized against `track`).
    pub fn from_axes(track: Vec3, top_ray: Vec3, origin: Vec3) -> Self {
        let u = track.normalize();
        let r = (top_ray - u * u.dot(&top_ray)).normalize();
        let v = r.cross(&u);
        let rotation = Matrix3::from_rows(&[u.transpose(), v.transpose(), r.transpose()]);
        MapFrame {
            rotation,
            translation: -(rotation * origin),
        }
    }

    /// Coordinate along the `R` axis.
    #[inline]
    pub fn range_coord(&self, p: &Vec3) -> f64 {
        self.rotation.row(2).transpose().dot(p) + self.translation.z
    }
}

/// `p_m = R_m p_w + T`.
pub fn world_to_map(p: &Vec3, frame: &MapFrame) -> Vec3 {
    frame.rotation * p + frame.translation
}
