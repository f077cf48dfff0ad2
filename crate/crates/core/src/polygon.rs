//! Closed planar quadrangles `a1 e^{ik1} + a2 e^{ik2} + a3 e^{ik3} + a4 = 0`.
//!
//! The solution set in the torus is sampled by a two-link closure: fixing
//! `k1` leaves `w = a4 + a1 e^{ik1}`, and the remaining two sides must close
//! the gap, which is possible iff `|a2 - a3| <= |w| <= a2 + a3`. Each admissible
//! `k1` carries two solutions (elbow up/down) that merge where `|w|` hits a
//! bound, so branches glue there.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::PolygonError;
use crate::graph::wrap_angle;

const CLASSIFY_TOL: f64 = 1e-12;

/// Side lengths `a1..a4`; `a4` is the side pinned to the positive real axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolygonSpec {
    pub a: [f64; 4],
}

impl PolygonSpec {
    pub fn new(a: [f64; 4]) -> Result<Self, PolygonError> {
        if a.iter().all(|x| *x > 0.0 && x.is_finite()) {
            Ok(PolygonSpec { a })
        } else {
            Err(PolygonError::InvalidSides(a.to_vec()))
        }
    }

    pub fn perimeter(&self) -> f64 {
        self.a.iter().sum()
    }

    /// `|a1 e^{ik1} + a2 e^{ik2} + a3 e^{ik3} + a4|`.
    pub fn residual(&self, k: [f64; 3]) -> f64 {
        closure_sum(&self.a, &k).norm()
    }
}

fn closure_sum(a: &[f64], k: &[f64]) -> Complex64 {
    let mut sum = Complex64::new(a[a.len() - 1], 0.0);
    for (aj, kj) in a.iter().zip(k) {
        sum += Complex64::from_polar(*aj, *kj);
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Empty,
    Point,
    Curve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    OneCircle,
    TwoCircles,
    TwoCirclesOnePoint,
    TwoCirclesTwoPoints,
    ThreeCirclesPairwise,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonCurve {
    pub spec: PolygonSpec,
    pub classification: Classification,
    /// Polylines in `(-pi, pi]^3`.
    pub branches: Vec<Vec<[f64; 3]>>,
    pub smooth: bool,
    pub topology: Topology,
}

impl PolygonCurve {
    pub fn points(&self) -> impl Iterator<Item = &[f64; 3]> {
        self.branches.iter().flatten()
    }

    pub fn max_residual(&self) -> f64 {
        self.points().map(|k| self.spec.residual(*k)).fold(0.0, f64::max)
    }

    /// `branch_id,k1,k2,k3,residual`, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("branch_id,k1,k2,k3,residual\n");
        for (b, branch) in self.branches.iter().enumerate() {
            for k in branch {
                let _ = writeln!(
                    out,
                    "{b},{},{},{},{}",
                    crate::format::sig12(k[0]),
                    crate::format::sig12(k[1]),
                    crate::format::sig12(k[2]),
                    crate::format::sig12(self.spec.residual(*k)),
                );
            }
        }
        out
    }
}

pub fn classify(spec: &PolygonSpec) -> Classification {
    let total = spec.perimeter();
    let tol = CLASSIFY_TOL * total;
    let mut point = false;
    for &am in &spec.a {
        let rest = total - am;
        if am > rest + tol {
            return Classification::Empty;
        }
        if (am - rest).abs() <= tol {
            point = true;
        }
    }
    if point {
        Classification::Point
    } else {
        Classification::Curve
    }
}

/// The unique solution when the classification is `Point`: the longest side
/// points against all the others.
pub fn point_solution(spec: &PolygonSpec) -> Option<[f64; 3]> {
    if classify(spec) != Classification::Point {
        return None;
    }
    let (m, _) = spec
        .a
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("four sides");
    Some(match m {
        3 => [PI, PI, PI],
        _ => {
            let mut k = [0.0; 3];
            k[m] = PI;
            k
        }
    })
}

/// Signs `(e1, e2, e3)` with `e1 a1 + e2 a2 + e3 a3 + a4 = 0`: the collinear
/// configurations, which are the singular points of the solution set.
pub fn collinear_patterns(spec: &PolygonSpec) -> Vec<[f64; 3]> {
    let tol = CLASSIFY_TOL * spec.perimeter();
    let mut out = Vec::new();
    for bits in 0..8u32 {
        let eps = [0, 1, 2].map(|j| if bits >> j & 1 == 1 { -1.0 } else { 1.0 });
        let s = eps[0] * spec.a[0] + eps[1] * spec.a[1] + eps[2] * spec.a[2] + spec.a[3];
        if s.abs() <= tol {
            out.push(eps);
        }
    }
    out
}

pub fn smoothness(spec: &PolygonSpec) -> bool {
    collinear_patterns(spec).is_empty()
}

/// Closes the last two links: `b1 e^{i t1} + b2 e^{i t2} = -w`. Returns the two
/// solutions (equal when the elbow is straight), or `None` when out of reach.
fn two_link(w: Complex64, b1: f64, b2: f64) -> Option<[[f64; 2]; 2]> {
    let target = -w;
    let r = target.norm();
    let tol = 1e-13 * (r + b1 + b2);
    if r > b1 + b2 + tol || r < (b1 - b2).abs() - tol {
        return None;
    }
    let theta = target.arg();
    let alpha = if r == 0.0 {
        PI / 2.0
    } else {
        ((r * r + b1 * b1 - b2 * b2) / (2.0 * r * b1)).clamp(-1.0, 1.0).acos()
    };
    let solve = |t1: f64| {
        let t2 = (target - Complex64::from_polar(b1, t1)).arg();
        [wrap_angle(t1), t2]
    };
    Some([solve(theta + alpha), solve(theta - alpha)])
}

/// Admissible arcs of `k1`, as `(start, end, glued)` with `start < end`;
/// `glued` means the two elbow branches meet at both ends.
fn k1_arcs(a: &[f64; 4]) -> Vec<(f64, f64, bool)> {
    let [a1, a2, a3, a4] = *a;
    let c_lo = ((a2 - a3).powi(2) - a1 * a1 - a4 * a4) / (2.0 * a1 * a4);
    let c_hi = ((a2 + a3).powi(2) - a1 * a1 - a4 * a4) / (2.0 * a1 * a4);
    let lower = c_lo > -1.0;
    let upper = c_hi < 1.0;
    match (lower, upper) {
        (false, false) => vec![(-PI, PI, false)],
        (true, false) => {
            let t = c_lo.acos();
            vec![(-t, t, true)]
        }
        (false, true) => {
            let t = c_hi.acos();
            vec![(t, 2.0 * PI - t, true)]
        }
        (true, true) => {
            let (t_lo, t_hi) = (c_lo.acos(), c_hi.acos());
            vec![(t_hi, t_lo, true), (-t_lo, -t_hi, true)]
        }
    }
}

/// Connected components predicted from which reach bounds bind.
fn structural_components(a: &[f64; 4]) -> usize {
    let arcs = k1_arcs(a);
    match arcs.as_slice() {
        [(_, _, false)] => 2,
        [_] => 1,
        _ => 2,
    }
}

/// Circular distance, maximized over coordinates.
pub fn torus_distance(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    (0..3).map(|j| wrap_angle(x[j] - y[j]).abs()).fold(0.0, f64::max)
}

fn branch_step(branch: &[[f64; 3]]) -> f64 {
    branch.windows(2).map(|w| torus_distance(&w[0], &w[1])).fold(0.0, f64::max)
}

/// Whether the two elbow branches of an arc end at the same point. They do not
/// when the arc ends where `a2` and `a3` cancel and the elbow turns freely.
fn meets(plus: &[[f64; 3]], minus: &[[f64; 3]]) -> bool {
    match (plus.last(), minus.last()) {
        (Some(p), Some(q)) => torus_distance(p, q) <= 4.0 * branch_step(plus).max(branch_step(minus)),
        _ => false,
    }
}

/// Cuts a branch where it passes through a singular point and the sampled
/// elbow switches to the other circle.
fn split_at_jumps(branch: Vec<[f64; 3]>) -> Vec<Vec<[f64; 3]>> {
    let steps: Vec<f64> = branch.windows(2).map(|w| torus_distance(&w[0], &w[1])).collect();
    if steps.is_empty() {
        return vec![branch];
    }
    let mut sorted = steps.clone();
    sorted.sort_by(f64::total_cmp);
    let limit = 10.0 * sorted[sorted.len() / 2];
    let mut out = Vec::new();
    let mut current = vec![branch[0]];
    for (i, step) in steps.iter().enumerate() {
        if *step > limit {
            out.push(std::mem::take(&mut current));
        }
        current.push(branch[i + 1]);
    }
    out.push(current);
    out.retain(|b| b.len() > 1);
    out
}

pub fn curve_samples(spec: &PolygonSpec, m: usize) -> Result<PolygonCurve, PolygonError> {
    let classification = classify(spec);
    if classification != Classification::Curve {
        return Err(PolygonError::NotACurve(classification));
    }
    let m = m.max(8);
    let a = spec.a;
    let mut branches = Vec::new();
    let special = (a[0] - a[3]).abs() <= CLASSIFY_TOL * spec.perimeter()
        && (a[1] - a[2]).abs() <= CLASSIFY_TOL * spec.perimeter();
    for (start, end, glued) in k1_arcs(&a) {
        let nodes: Vec<f64> = if glued {
            // Cluster toward the ends, where the branches turn.
            (0..=m)
                .map(|i| {
                    let t = 0.5 * (1.0 - (PI * i as f64 / m as f64).cos());
                    start + (end - start) * t
                })
                .collect()
        } else {
            (0..=m).map(|i| start + (end - start) * i as f64 / m as f64).collect()
        };
        let mut plus = Vec::with_capacity(nodes.len());
        let mut minus = Vec::with_capacity(nodes.len());
        for &k1 in &nodes {
            let w = Complex64::new(a[3], 0.0) + Complex64::from_polar(a[0], k1);
            if special && w.norm() <= 1e-9 * spec.perimeter() {
                // The elbow direction is free here; the special circle covers it.
                continue;
            }
            if let Some([p, q]) = two_link(w, a[1], a[2]) {
                plus.push([wrap_angle(k1), p[0], p[1]]);
                minus.push([wrap_angle(k1), q[0], q[1]]);
            }
        }
        if glued && meets(&plus, &minus) {
            // One closed loop: out along one elbow, back along the other.
            minus.reverse();
            plus.extend(minus.into_iter().skip(1));
            branches.push(plus);
        } else {
            branches.push(plus);
            branches.push(minus);
        }
    }
    if special {
        // w = 0 at k1 = pi: a1 cancels a4 and a2 cancels a3 for every angle.
        let circle = (0..=m)
            .map(|i| {
                let t = -PI + 2.0 * PI * i as f64 / m as f64;
                [PI, wrap_angle(t), wrap_angle(t + PI)]
            })
            .collect();
        branches.push(circle);
    }
    let smooth = smoothness(spec);
    if !smooth {
        branches = branches.into_iter().flat_map(split_at_jumps).collect();
    }
    let mut curve = PolygonCurve {
        spec: *spec,
        classification,
        branches,
        smooth,
        topology: Topology::Unclassified,
    };
    curve.topology = classify_topology(&curve);
    Ok(curve)
}

pub fn topology(spec: &PolygonSpec) -> Result<Topology, PolygonError> {
    Ok(curve_samples(spec, 400)?.topology)
}

fn max_step(curve: &PolygonCurve) -> f64 {
    curve
        .branches
        .iter()
        .map(|b| branch_step(b))
        .fold(0.0, f64::max)
}

/// Components after chaining branch endpoints closer than `tol`.
fn chained_components(branches: &[Vec<[f64; 3]>], tol: f64) -> usize {
    let n = branches.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    let ends = |b: &Vec<[f64; 3]>| [b[0], b[b.len() - 1]];
    for i in 0..n {
        for j in i + 1..n {
            let touching = ends(&branches[i])
                .iter()
                .any(|x| ends(&branches[j]).iter().any(|y| torus_distance(x, y) <= tol));
            if touching {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

fn classify_topology(curve: &PolygonCurve) -> Topology {
    let branches: Vec<Vec<[f64; 3]>> =
        curve.branches.iter().filter(|b| !b.is_empty()).cloned().collect();
    if branches.is_empty() {
        return Topology::Unclassified;
    }
    let tol = 3.0 * max_step(curve);
    if curve.smooth {
        let expected = structural_components(&curve.spec.a);
        let counted = chained_components(&branches, tol);
        return match (expected, counted) {
            (1, 1) => Topology::OneCircle,
            (2, 2) => Topology::TwoCircles,
            _ => Topology::Unclassified,
        };
    }
    // Every collinear configuration must be visited by the samples.
    let singular: Vec<[f64; 3]> = collinear_patterns(&curve.spec)
        .iter()
        .map(|eps| eps.map(|e| if e > 0.0 { 0.0 } else { PI }))
        .collect();
    let visited = singular
        .iter()
        .all(|s| curve.points().any(|p| torus_distance(p, s) <= tol));
    if !visited {
        return Topology::Unclassified;
    }
    match singular.len() {
        1 => Topology::TwoCirclesOnePoint,
        2 => Topology::TwoCirclesTwoPoints,
        3 => Topology::ThreeCirclesPairwise,
        _ => Topology::Unclassified,
    }
}

/// Random closed `n`-gons with the given sides (the last pinned to angle 0):
/// returns angle tuples `(k1, ..., k_{n-1})`. Sampling only.
pub fn ngon_samples(sides: &[f64], count: usize, seed: u64) -> Result<Vec<Vec<f64>>, PolygonError> {
    let n = sides.len();
    if n < 3 || !sides.iter().all(|x| *x > 0.0 && x.is_finite()) {
        return Err(PolygonError::InvalidSides(sides.to_vec()));
    }
    let total: f64 = sides.iter().sum();
    if sides.iter().any(|&s| s >= total - s) {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free = n - 3;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count && attempts < 1000 * count.max(1) {
        attempts += 1;
        let mut k: Vec<f64> = (0..free).map(|_| rng.gen_range(-PI..PI)).collect();
        let w = closure_sum(&[&sides[..free], &sides[n - 1..]].concat(), &k);
        if let Some(sols) = two_link(w, sides[n - 3], sides[n - 2]) {
            let pick = sols[rng.gen_range(0..2)];
            k.extend_from_slice(&pick);
            out.push(k);
        }
    }
    Ok(out)
}

pub fn ngon_residual(sides: &[f64], k: &[f64]) -> f64 {
    closure_sum(sides, k).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(a: [f64; 4]) -> PolygonSpec {
        PolygonSpec::new(a).unwrap()
    }

    #[test]
    fn classification_table() {
        assert_eq!(classify(&spec([1.0, 1.0, 1.0, 4.0])), Classification::Empty);
        assert_eq!(classify(&spec([1.0, 1.0, 1.0, 3.0])), Classification::Point);
        assert_eq!(classify(&spec([1.1, 0.95, 0.9, 1.0])), Classification::Curve);
        assert_eq!(point_solution(&spec([1.0, 1.0, 1.0, 3.0])), Some([PI, PI, PI]));
        let p = point_solution(&spec([1.0, 3.0, 1.0, 1.0])).unwrap();
        assert!(spec([1.0, 3.0, 1.0, 1.0]).residual(p) < 1e-15);
    }

    #[test]
    fn rejects_bad_sides() {
        assert!(PolygonSpec::new([1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(PolygonSpec::new([1.0, f64::NAN, 1.0, 1.0]).is_err());
    }

    #[test]
    fn smoothness_examples() {
        assert!(!smoothness(&spec([1.0, 1.0, 1.0, 1.0])));
        assert!(smoothness(&spec([1.1, 0.95, 0.9, 1.0])));
        assert!(!smoothness(&spec([2.0, 1.0, 1.0, 2.0])));
    }

    #[test]
    fn reference_quadrangle_is_one_smooth_circle() {
        let c = curve_samples(&spec([1.1, 0.95, 0.9, 1.0]), 200).unwrap();
        assert!(c.smooth);
        assert_eq!(c.topology, Topology::OneCircle);
        assert!(c.max_residual() <= 1e-10 * 3.95);
    }

    #[test]
    fn equal_sides_contain_pairwise_families() {
        let c = curve_samples(&spec([1.0; 4]), 100).unwrap();
        assert_eq!(c.topology, Topology::ThreeCirclesPairwise);
        assert!(c.max_residual() <= 4e-10);
        for t in [-2.0, 0.3, 1.7] {
            for target in [
                [PI, t, wrap_angle(t + PI)],
                [t, wrap_angle(t + PI), PI],
                [t, PI, wrap_angle(t + PI)],
            ] {
                let near = c.points().map(|p| torus_distance(p, &target)).fold(f64::MAX, f64::min);
                assert!(near < 0.1, "{target:?} missed by {near}");
            }
        }
    }

    #[test]
    fn kite_has_two_singular_points() {
        assert_eq!(topology(&spec([2.0, 1.0, 1.0, 2.0])).unwrap(), Topology::TwoCirclesTwoPoints);
        assert_eq!(topology(&spec([1.0, 2.0, 2.5, 1.5])).unwrap(), Topology::TwoCirclesOnePoint);
    }

    #[test]
    fn two_circle_cases() {
        // Neither reach bound binds: k1 runs around the whole circle twice.
        assert_eq!(topology(&spec([0.5, 2.0, 2.2, 1.0])).unwrap(), Topology::TwoCircles);
        // Both bind: two separate arcs of k1.
        assert_eq!(topology(&spec([1.0, 1.3, 0.2, 1.2])).unwrap(), Topology::TwoCircles);
    }

    #[test]
    fn point_is_not_a_curve() {
        let err = curve_samples(&spec([1.0, 1.0, 1.0, 3.0]), 50).unwrap_err();
        assert_eq!(err, PolygonError::NotACurve(Classification::Point));
        assert!(topology(&spec([1.0, 1.0, 1.0, 3.0])).is_err());
    }

    #[test]
    fn nearly_point_curve_is_tiny() {
        let c = curve_samples(&spec([1.0, 1.0, 1.0, 3.0 - 1e-9]), 64).unwrap();
        let far = c.points().map(|p| torus_distance(p, &[PI, PI, PI])).fold(0.0, f64::max);
        assert!(far < 1e-3, "{far}");
        assert!(c.max_residual() <= 6e-10);
    }

    #[test]
    fn triangle_closure() {
        let s = ngon_samples(&[1.0, 1.0, 1.0], 4, 3).unwrap();
        for k in &s {
            assert!(ngon_residual(&[1.0, 1.0, 1.0], k) < 1e-14);
            assert!((k[0].abs() - 2.0 * PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_header() {
        let c = curve_samples(&spec([1.1, 0.95, 0.9, 1.0]), 16).unwrap();
        let csv = c.to_csv();
        assert!(csv.starts_with("branch_id,k1,k2,k3,residual\n"));
        assert_eq!(csv.lines().count(), 1 + c.points().count());
    }
}
