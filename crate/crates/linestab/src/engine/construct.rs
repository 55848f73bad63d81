use crate::geometry::{plucker_from_points, PluckerLine, Plane, Vec3};

/// The line through vertex `v` that meets both `pivot` and `edge_line`.
/// `None` when `v` lies on the pivot or `edge_line` is parallel to the
/// plane spanned by `v` and the pivot.
pub fn vertex_edge_line(pivot: &PluckerLine, v: &Vec3, edge_line: &PluckerLine) -> Option<PluckerLine> {
    let u = pivot.unit_direction();
    let n = (v - pivot.point()).cross(&u);
    if n.norm() <= 1e-12 * (1.0 + v.norm()) {
        return None;
    }
    if edge_line.is_at_infinity() {
        let d = n.cross(&edge_line.moment);
        if d.norm() <= 1e-12 {
            return None;
        }
        return Some(PluckerLine::through(v, &d));
    }
    let x = edge_line.meet_plane(&Plane::through(v, n))?;
    plucker_from_points(v, &x).ok()
}

/// The line in plane `h` through `pivot ∩ h` and `edge_line ∩ h`.
pub fn facet_edge_line(pivot: &PluckerLine, h: &Plane, edge_line: &PluckerLine) -> Option<PluckerLine> {
    let x = pivot.meet_plane(h)?;
    let y = edge_line.meet_plane(h)?;
    plucker_from_points(&x, &y).ok()
}
