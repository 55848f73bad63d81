use super::{Plane, Vec3, EPS};
use crate::error::{Error, Result};

/// A directed line in Plücker coordinates: `direction` and
/// `moment = p × direction` for any point `p` on the line.
///
/// A zero direction with nonzero moment encodes a line at infinity; only the
/// four-lines solver uses those.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PluckerLine {
    pub direction: Vec3,
    pub moment: Vec3,
}

impl PluckerLine {
    pub fn new(direction: Vec3, moment: Vec3) -> PluckerLine {
        PluckerLine { direction, moment }
    }

    /// The line through `p` with direction `d`.
    pub fn through(p: &Vec3, d: &Vec3) -> PluckerLine {
        PluckerLine { direction: *d, moment: p.cross(d) }
    }

    /// The line at infinity of a plane with the given normal.
    pub fn at_infinity(normal: &Vec3) -> PluckerLine {
        PluckerLine { direction: Vec3::zeros(), moment: normal.normalize() }
    }

    pub fn is_at_infinity(&self) -> bool {
        self.direction.norm() <= 1e-12 * self.moment.norm()
    }

    /// Point of the line closest to the origin.
    pub fn point(&self) -> Vec3 {
        self.direction.cross(&self.moment) / self.direction.norm_squared()
    }

    pub fn unit_direction(&self) -> Vec3 {
        self.direction.normalize()
    }

    /// Same line scaled so that the direction has unit length.
    pub fn normalized(&self) -> PluckerLine {
        let s = self.direction.norm();
        if (s - 1.0).abs() <= 4.0 * f64::EPSILON {
            return *self;
        }
        PluckerLine { direction: self.direction / s, moment: self.moment / s }
    }

    pub fn reversed(&self) -> PluckerLine {
        PluckerLine { direction: -self.direction, moment: -self.moment }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        let u = self.unit_direction();
        self.point() + u * t
    }

    /// `direction · moment`, zero for every real line.
    pub fn plucker_relation(&self) -> f64 {
        self.direction.dot(&self.moment)
    }

    /// Parameters `(s, t)` of the mutually closest points on `self` and
    /// `other` (measured along unit directions from `point()`), or `None`
    /// when the lines are parallel.
    pub fn closest_params(&self, other: &PluckerLine) -> Option<(f64, f64)> {
        let p = self.point();
        let q = other.point();
        let u = self.unit_direction();
        let v = other.unit_direction();
        let b = u.dot(&v);
        let den = 1.0 - b * b;
        if den < 1e-18 {
            return None;
        }
        let w = p - q;
        let d = u.dot(&w);
        let e = v.dot(&w);
        Some(((b * e - d) / den, (e - b * d) / den))
    }

    /// Euclidean distance between two lines.
    pub fn distance(&self, other: &PluckerLine) -> f64 {
        match self.closest_params(other) {
            Some((s, t)) => (self.at(s) - other.at(t)).norm(),
            None => {
                let u = self.unit_direction();
                let w = other.point() - self.point();
                (w - u * u.dot(&w)).norm()
            }
        }
    }

    /// Intersection with a plane, if the line is not parallel to it.
    pub fn meet_plane(&self, h: &Plane) -> Option<Vec3> {
        let p = self.point();
        let u = self.unit_direction();
        h.intersect_param(&p, &u).map(|t| p + u * t)
    }

    /// Distance from a point to the line.
    pub fn distance_to_point(&self, x: &Vec3) -> f64 {
        let u = self.unit_direction();
        let w = x - self.point();
        (w - u * u.dot(&w)).norm()
    }

    /// Parameter of the orthogonal projection of `x` on the line.
    pub fn param_of(&self, x: &Vec3) -> f64 {
        self.unit_direction().dot(&(x - self.point()))
    }
}

/// The line through `p` and `q`, directed from `p` to `q`.
pub fn plucker_from_points(p: &Vec3, q: &Vec3) -> Result<PluckerLine> {
    let d = q - p;
    let scale = 1.0 + p.norm().max(q.norm());
    if d.norm() <= EPS * scale {
        return Err(Error::CoincidentPoints);
    }
    Ok(PluckerLine::through(p, &d))
}

/// Reciprocal product `d_a · m_b + d_b · m_a`. Zero iff the lines meet
/// (parallel lines meet at infinity). For unit directions it equals the
/// signed distance times the sine of the angle between the lines. Sign
/// convention: the x-axis against the line through `(0,0,1)` along `+y`
/// gives `-1`.
pub fn side_operator(a: &PluckerLine, b: &PluckerLine) -> f64 {
    a.direction.dot(&b.moment) + b.direction.dot(&a.moment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn from_points_axis() {
        let l = plucker_from_points(&Vec3::zeros(), &Vec3::z()).unwrap();
        assert_eq!(l.direction, Vec3::z());
        assert_eq!(l.moment, Vec3::zeros());
    }

    #[test]
    fn from_points_offset_moment() {
        let l = plucker_from_points(&Vec3::x(), &Vec3::new(1.0, 0.0, 1.0)).unwrap();
        assert_eq!(l.direction, Vec3::z());
        assert_eq!(l.moment, Vec3::new(0.0, -1.0, 0.0));
    }

    #[test]
    fn coincident_points_rejected() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(plucker_from_points(&p, &p), Err(Error::CoincidentPoints));
    }

    #[test]
    fn random_lines_self_incident() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = Vec3::from_fn(|_, _| rng.gen_range(-10.0..10.0));
            let q = Vec3::from_fn(|_, _| rng.gen_range(-10.0..10.0));
            let l = plucker_from_points(&p, &q).unwrap();
            assert_abs_diff_eq!(side_operator(&l, &l), 0.0, epsilon = 1e-9);
            assert!(l.distance_to_point(&p) < 1e-9 && l.distance_to_point(&q) < 1e-9);
        }
    }

    #[test]
    fn side_operator_examples() {
        let x = PluckerLine::through(&Vec3::zeros(), &Vec3::x());
        let y = PluckerLine::through(&Vec3::zeros(), &Vec3::y());
        assert_eq!(side_operator(&x, &y), 0.0);
        let par = PluckerLine::through(&Vec3::new(0.0, 1.0, 1.0), &Vec3::x());
        assert_eq!(side_operator(&x, &par), 0.0);
        let skew = PluckerLine::through(&Vec3::new(0.0, 0.0, 1.0), &Vec3::y());
        assert_eq!(side_operator(&x, &skew), -1.0);
        assert_eq!(side_operator(&x, &skew.reversed()), 1.0);
    }

    #[test]
    fn closest_params_skew() {
        let x = PluckerLine::through(&Vec3::new(5.0, 0.0, 0.0), &Vec3::x());
        let skew = PluckerLine::through(&Vec3::new(2.0, 7.0, 1.0), &Vec3::y());
        let (s, t) = x.closest_params(&skew).unwrap();
        assert_abs_diff_eq!(x.at(s), Vec3::new(2.0, 0.0, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(skew.at(t), Vec3::new(2.0, 0.0, 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(x.distance(&skew), 1.0, epsilon = 1e-12);
    }
}
