use super::{PluckerLine, Polyhedron, Vec3, EPS, SNAP};

/// A boundary feature of a polyhedron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureKind {
    Vertex(usize),
    Edge(usize),
}

impl FeatureKind {
    /// Number of independent conditions a line touching this feature meets.
    pub fn weight(&self) -> usize {
        match self {
            FeatureKind::Vertex(_) => 2,
            FeatureKind::Edge(_) => 1,
        }
    }
}

/// A feature tagged with the index of its polyhedron in the scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Feature {
    pub poly: usize,
    pub kind: FeatureKind,
}

/// How a line meets a polyhedron.
#[derive(Debug, Clone, PartialEq)]
pub enum Contact {
    Miss,
    /// Enters the interior; `(t_in, t_out)` along the unit direction from
    /// the line's closest point to the origin.
    Pierce(f64, f64),
    /// Touches the boundary only. The features are where the contact set
    /// starts and ends (one feature for a point contact).
    Touch(Vec<FeatureKind>),
}

/// Classifies how `l` meets `p`. `scale` sets the absolute tolerances.
pub fn contact(l: &PluckerLine, p: &Polyhedron, scale: f64) -> Contact {
    let tol = EPS * scale;
    let snap = SNAP * scale;
    let o = l.point();
    let u = l.unit_direction();
    let Some((t0, t1)) = p.clip(&o, &u, tol) else {
        return Contact::Miss;
    };
    if let Some((a, b)) = p.clip(&o, &u, -tol) {
        return Contact::Pierce(a, b);
    }
    let x0 = o + u * t0;
    let x1 = o + u * t1;
    let mut feats = Vec::new();
    if t1 - t0 <= snap {
        feats.extend(snap_point(p, &((x0 + x1) * 0.5), snap));
    } else {
        feats.extend(snap_point(p, &x0, snap));
        if let Some(f) = snap_point(p, &x1, snap) {
            if !feats.contains(&f) {
                feats.push(f);
            }
        }
    }
    feats.sort();
    Contact::Touch(feats)
}

fn snap_point(p: &Polyhedron, x: &Vec3, snap: f64) -> Option<FeatureKind> {
    let (vi, vd) = p
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (i, (v - x).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    if vd <= snap {
        return Some(FeatureKind::Vertex(vi));
    }
    let (ei, ed) = (0..p.edges.len())
        .map(|i| {
            let (a, b) = p.edge_points(i);
            (i, segment_distance(x, &a, &b))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    (ed <= snap).then_some(FeatureKind::Edge(ei))
}

fn segment_distance(x: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let d = b - a;
    let t = ((x - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
    (a + d * t - x).norm()
}

/// Closed intersection test: true iff `l` meets `p` (tangency counts).
pub fn stabs(l: &PluckerLine, p: &Polyhedron) -> bool {
    stabs_tol(l, p, EPS * p.scale())
}

pub fn stabs_tol(l: &PluckerLine, p: &Polyhedron, tol: f64) -> bool {
    p.clip(&l.point(), &l.unit_direction(), tol).is_some()
}

/// True iff `l` crosses the relative interior of edge `e` of `p` without
/// being parallel to it, and does not enter the interior of `p`.
pub fn tangent_at_edge(l: &PluckerLine, p: &Polyhedron, e: usize) -> bool {
    let scale = p.scale();
    let tol = EPS * scale;
    let snap = SNAP * scale;
    let (a, b) = p.edge_points(e);
    let len = (b - a).norm();
    let w = (b - a) / len;
    let u = l.unit_direction();
    if u.cross(&w).norm() <= 1e-9 {
        return false;
    }
    let edge_line = PluckerLine::through(&a, &w);
    let Some((s, t)) = l.closest_params(&edge_line) else {
        return false;
    };
    if (l.at(s) - edge_line.at(t)).norm() > snap {
        return false;
    }
    let t_edge = edge_line.param_of(&edge_line.at(t)) - edge_line.param_of(&a);
    if t_edge <= snap || t_edge >= len - snap {
        return false;
    }
    p.clip(&l.point(), &u, -tol).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::plucker_from_points;

    fn cube() -> Polyhedron {
        Polyhedron::axis_box(Vec3::repeat(-1.0), Vec3::repeat(1.0))
    }

    fn edge_with(p: &Polyhedron, a: Vec3, b: Vec3) -> usize {
        (0..p.edges.len())
            .find(|&i| {
                let (x, y) = p.edge_points(i);
                (x == a && y == b) || (x == b && y == a)
            })
            .unwrap()
    }

    #[test]
    fn stabs_examples() {
        let c = cube();
        assert!(stabs(&PluckerLine::through(&Vec3::zeros(), &Vec3::z()), &c));
        assert!(!stabs(&PluckerLine::through(&Vec3::new(5.0, 0.0, 0.0), &Vec3::z()), &c));
        let graze = PluckerLine::through(&Vec3::new(1.0, 1.0, 0.0), &Vec3::new(1.0, -1.0, 0.3));
        assert!(stabs(&graze, &c));
    }

    #[test]
    fn tangent_at_edge_examples() {
        let c = cube();
        let e = edge_with(&c, Vec3::new(1.0, 1.0, -1.0), Vec3::new(1.0, 1.0, 1.0));
        let graze = PluckerLine::through(&Vec3::new(1.0, 1.0, 0.2), &Vec3::new(1.0, -1.0, 0.3));
        assert!(tangent_at_edge(&graze, &c, e));
        let collinear = PluckerLine::through(&Vec3::new(1.0, 1.0, 0.0), &Vec3::z());
        assert!(!tangent_at_edge(&collinear, &c, e));
        let endpoint = PluckerLine::through(&Vec3::new(1.0, 1.0, 1.0), &Vec3::new(1.0, -1.0, 0.3));
        assert!(!tangent_at_edge(&endpoint, &c, e));
        let pierce = PluckerLine::through(&Vec3::new(1.0, 1.0, 0.2), &Vec3::new(1.0, 1.0, 0.3));
        assert!(!tangent_at_edge(&pierce, &c, e));
    }

    #[test]
    fn contact_classification() {
        let c = cube();
        let e = edge_with(&c, Vec3::new(1.0, 1.0, -1.0), Vec3::new(1.0, 1.0, 1.0));
        let graze = PluckerLine::through(&Vec3::new(1.0, 1.0, 0.2), &Vec3::new(1.0, -1.0, 0.3));
        assert_eq!(contact(&graze, &c, c.scale()), Contact::Touch(vec![FeatureKind::Edge(e)]));
        let corner = plucker_from_points(&Vec3::repeat(1.0), &Vec3::new(3.0, 0.0, 2.0)).unwrap();
        let v = c.vertices.iter().position(|v| *v == Vec3::repeat(1.0)).unwrap();
        assert_eq!(contact(&corner, &c, c.scale()), Contact::Touch(vec![FeatureKind::Vertex(v)]));
        let in_facet = plucker_from_points(&Vec3::new(1.0, -1.0, 0.0), &Vec3::new(1.0, 1.0, 0.5)).unwrap();
        match contact(&in_facet, &c, c.scale()) {
            Contact::Touch(f) => assert_eq!(f.len(), 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            contact(&PluckerLine::through(&Vec3::zeros(), &Vec3::x()), &c, c.scale()),
            Contact::Pierce(..)
        ));
    }
}
