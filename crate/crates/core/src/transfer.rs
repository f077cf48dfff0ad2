//! Solutions of `-u'' + q u = lambda u` on a single edge.
//!
//! Each constant-potential piece is solved exactly with the cosine/sine-type
//! pair `c(0) = 1, c'(0) = 0, s(0) = 0, s'(0) = 1`; the edge transfer matrix
//! is the ordered product over pieces. Both functions are entire in `lambda`,
//! and near `lambda = q` a power series keeps them smooth.

use std::f64::consts::PI;

use crate::graph::Edge;

/// Below this `|omega x^2|` the power series is used.
const SERIES_THRESHOLD: f64 = 1e-2;
const SERIES_TERMS: usize = 10;

/// Values and derivatives of the canonical solution pair at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisEval {
    pub c: f64,
    pub dc: f64,
    pub s: f64,
    pub ds: f64,
}

impl BasisEval {
    pub fn wronskian(&self) -> f64 {
        self.c * self.ds - self.dc * self.s
    }
}

pub fn basis_eval(lambda: f64, x: f64, q: f64) -> BasisEval {
    let omega = lambda - q;
    let z = omega * x * x;
    let (c, s) = if z.abs() < SERIES_THRESHOLD {
        // c = sum (-z)^n / (2n)!,  s = x sum (-z)^n / (2n+1)!
        let mut c = 0.0;
        let mut s = 0.0;
        let mut term = 1.0;
        for n in 0..SERIES_TERMS {
            c += term;
            let odd = term / (2 * n + 1) as f64;
            s += odd;
            term = -odd * z / (2 * n + 2) as f64;
        }
        (c, s * x)
    } else if omega > 0.0 {
        let r = omega.sqrt();
        ((r * x).cos(), (r * x).sin() / r)
    } else {
        let r = (-omega).sqrt();
        ((r * x).cosh(), (r * x).sinh() / r)
    };
    BasisEval { c, dc: -omega * s, s, ds: c }
}

/// Maps `(u(0), u'(0))` to `(u(x), u'(x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix(pub [[f64; 2]; 2]);

impl TransferMatrix {
    pub const IDENTITY: TransferMatrix = TransferMatrix([[1.0, 0.0], [0.0, 1.0]]);

    pub fn from_basis(b: BasisEval) -> Self {
        TransferMatrix([[b.c, b.s], [b.dc, b.ds]])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// `self * rhs`: first apply `rhs`, then `self`.
    pub fn compose(&self, rhs: &TransferMatrix) -> TransferMatrix {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        TransferMatrix(out)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn max_abs_diff(&self, other: &TransferMatrix) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        d
    }
}

pub fn transfer_matrix(lambda: f64, edge: &Edge) -> TransferMatrix {
    partial_transfer(lambda, edge, edge.length)
}

/// Transfer matrix from `x = 0` to `x = t` along the edge (`t` clamped to the edge).
pub fn partial_transfer(lambda: f64, edge: &Edge, t: f64) -> TransferMatrix {
    let mut m = TransferMatrix::IDENTITY;
    let mut start = 0.0;
    for seg in edge.segments() {
        if t <= start {
            break;
        }
        let len = (t - start).min(seg.length);
        m = TransferMatrix::from_basis(basis_eval(lambda, len, seg.q)).compose(&m);
        start += seg.length;
    }
    m
}

/// Number of eigenvalues below `lambda` of the edge with Dirichlet conditions
/// at both ends, i.e. the number of zeros of `s(x; lambda)` in `(0, l)`.
pub fn dirichlet_count_below(lambda: f64, edge: &Edge) -> usize {
    // Pruefer angle: sigma u = r sin(theta), u' = r cos(theta); u vanishes at
    // theta = n pi and theta only crosses those levels upward.
    let mut state = [0.0_f64, 1.0];
    let mut theta = 0.0_f64;
    for seg in edge.segments() {
        let omega = lambda - seg.q;
        let sigma = if omega > 0.0 { omega.sqrt() } else { 1.0 };
        // Re-express the angle in this piece's scale; the quadrant is preserved.
        theta += principal((sigma * state[0]).atan2(state[1]) - theta);
        let m = TransferMatrix::from_basis(basis_eval(lambda, seg.length, seg.q));
        let next = m.apply(state);
        if omega > 0.0 {
            theta += sigma * seg.length;
        } else {
            // Non-oscillatory piece: the angle stays within half a turn of the
            // nearest multiple of pi it started from.
            let m_level = (theta / PI - 0.5).ceil();
            let phi = next[0].atan2(next[1]);
            theta = m_level * PI + principal(phi - m_level * PI);
        }
        let norm = next[0].hypot(next[1]);
        state = [next[0] / norm, next[1] / norm];
    }
    let crossings = (theta / PI).ceil() - 1.0;
    if crossings > 0.0 {
        crossings as usize
    } else {
        0
    }
}

/// Reduces an angle to `(-pi, pi]`.
fn principal(t: f64) -> f64 {
    crate::graph::wrap_angle(t)
}
