use nalgebra::{DMatrix, DVector, SMatrix, Vector6};

use super::{PluckerLine, Vec3};
use crate::error::{Error, Result};

type V6 = Vector6<f64>;

fn split(x: &V6) -> (Vec3, Vec3) {
    (Vec3::new(x[0], x[1], x[2]), Vec3::new(x[3], x[4], x[5]))
}

fn quad(x: &V6) -> f64 {
    let (d, m) = split(x);
    d.dot(&m)
}

fn bilinear(x: &V6, y: &V6) -> f64 {
    let (dx, mx) = split(x);
    let (dy, my) = split(y);
    dx.dot(&my) + dy.dot(&mx)
}

/// All lines meeting the four given lines (0, 1 or 2 of them).
///
/// Lines at infinity are accepted as inputs (a line at infinity of a plane
/// restricts the answer to lines parallel to that plane) but never returned.
/// Fails with `DegenerateQuadruple` when the solutions form a continuum.
pub fn transversals_to_four_lines(ls: [&PluckerLine; 4]) -> Result<Vec<PluckerLine>> {
    let finite: Vec<&PluckerLine> = ls.iter().copied().filter(|l| !l.is_at_infinity()).collect();
    let center = if finite.is_empty() {
        Vec3::zeros()
    } else {
        finite.iter().map(|l| l.point()).sum::<Vec3>() / finite.len() as f64
    };
    let mut lines = [PluckerLine::new(Vec3::zeros(), Vec3::zeros()); 4];
    for (k, l) in ls.iter().enumerate() {
        let s = if l.is_at_infinity() { l.moment.norm() } else { l.direction.norm() };
        let d = l.direction / s;
        lines[k] = PluckerLine::new(d, l.moment / s - center.cross(&d));
    }
    let scale = lines
        .iter()
        .filter(|l| !l.is_at_infinity())
        .map(|l| l.moment.norm())
        .fold(1e-300, f64::max)
        .max(1.0);
    for l in lines.iter_mut() {
        if !l.is_at_infinity() {
            l.moment /= scale;
        }
    }
    let mut a = SMatrix::<f64, 6, 6>::zeros();
    for (k, l) in lines.iter().enumerate() {
        for j in 0..3 {
            a[(k, j)] = l.moment[j];
            a[(k, 3 + j)] = l.direction[j];
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let smax = svd.singular_values[order[0]];
    if svd.singular_values[order[3]] <= 1e-9 * smax {
        return Err(Error::DegenerateQuadruple);
    }
    let base: V6 = vt.row(order[4]).transpose();
    let dirn: V6 = vt.row(order[5]).transpose();
    let a0 = quad(&base);
    let a1 = bilinear(&base, &dirn);
    let a2 = quad(&dirn);
    let cmax = a0.abs().max(a1.abs()).max(a2.abs());
    if cmax <= 1e-11 {
        return Err(Error::DegenerateQuadruple);
    }
    let mut cands: Vec<V6> = Vec::new();
    let swap = a2.abs() < a0.abs();
    let (c0, c1, c2) = if swap { (a2, a1, a0) } else { (a0, a1, a2) };
    let (p, q) = if swap { (dirn, base) } else { (base, dirn) };
    let disc = c1 * c1 - 4.0 * c2 * c0;
    let disc_tol = 1e-12 * (c1 * c1 + (4.0 * c2 * c0).abs());
    if disc < -disc_tol {
        return Ok(Vec::new());
    }
    if disc.abs() <= disc_tol {
        cands.push(p + q * (-c1 / (2.0 * c2)));
    } else {
        let sq = disc.sqrt();
        let r = -0.5 * (c1 + if c1 >= 0.0 { sq } else { -sq });
        let t1 = r / c2;
        cands.push(p + q * t1);
        if r.abs() > 1e-300 {
            cands.push(p + q * (c0 / r));
        } else {
            cands.push(q);
        }
    }
    let mut out: Vec<PluckerLine> = Vec::new();
    for x in cands {
        let x = refine(&a, x);
        let (d, m) = split(&x);
        if d.norm() <= 1e-9 * x.norm() {
            continue;
        }
        let m = m * scale + center.cross(&d);
        let line = PluckerLine::new(d, m).normalized();
        if out.iter().all(|o| !same_line(o, &line)) {
            out.push(line);
        }
    }
    Ok(out)
}

fn same_line(a: &PluckerLine, b: &PluckerLine) -> bool {
    let s = if a.direction.dot(&b.direction) < 0.0 { -1.0 } else { 1.0 };
    let tol = 1e-9 * (1.0 + a.moment.norm());
    (a.direction - b.direction * s).norm() <= 1e-9 && (a.moment - b.moment * s).norm() <= tol
}

/// Gauss-Newton polish of the five equations (four incidences and the
/// Plücker relation), minimum-norm steps.
fn refine(a: &SMatrix<f64, 6, 6>, x0: V6) -> V6 {
    let mut x = x0 / x0.norm();
    for _ in 0..3 {
        let mut f = DVector::<f64>::zeros(5);
        let mut j = DMatrix::<f64>::zeros(5, 6);
        for r in 0..4 {
            f[r] = a.row(r).dot(&x.transpose());
            for c in 0..6 {
                j[(r, c)] = a[(r, c)];
            }
        }
        let (d, m) = split(&x);
        f[4] = d.dot(&m);
        for c in 0..3 {
            j[(4, c)] = m[c];
            j[(4, 3 + c)] = d[c];
        }
        if f.amax() < 1e-16 {
            break;
        }
        let jjt = &j * j.transpose();
        let Some(inv) = jjt.try_inverse() else { break };
        let step = j.transpose() * (inv * f);
        for c in 0..6 {
            x[c] -= step[c];
        }
        x /= x.norm();
    }
    x
}
