//! Compilation of simplicial (Kuhn) grid interpolants to ReLU networks.
//!
//! The uniform grid with resolution `m` splits `[0,1]^d` into cells, each
//! triangulated into `d!` simplices by coordinate orderings (the Kuhn
//! triangulation). The piecewise-linear interpolant of nodal values `g(p/m)`
//! over this triangulation has nodal basis functions with a closed form:
//!
//! ```text
//! phi_p(x) = max(0, 1 - max_t |L_t(x)|)
//! ```
//!
//! where the `L_t` range over the `d(d+1)/2` arrangement directions
//! `m x_i - p_i` (axes) and `m x_i - m x_j - (p_i - p_j)` (pairs, `i < j`).
//! Equivalently `phi_p = relu(min_t min(1 - L_t, 1 + L_t))`, a clipped
//! minimum of affine functions, which a ReLU network can evaluate with a
//! per-hat min-chain:
//!
//! ```text
//! c_0 = 1,    c_t = relu(c_{t-1} - relu(c_{t-1} - (1 - L_t))
//!                              - relu(c_{t-1} - (1 + L_t)))
//! ```
//!
//! One chain step handles both signs of a direction at once: since
//! `c <= 1` throughout and `(1 - L) + (1 + L) = 2`, at most one of the two
//! hinge units can be active, so the step computes the exact three-way
//! minimum `min(c, 1-L, 1+L)` clipped at zero. The carry `c` is nonnegative
//! and rides a single rail; the input coordinates (nonnegative on the
//! domain) ride `d` shared rails.
//!
//! Resulting shape for `H = (m+1)^d` nodes and `D = d(d+1)/2` directions:
//! widths `(d, d + 2H, d + 3H, ..., d + 3H, H, 1)` and depth `D + 2`.
//!
//! Exactness at grid nodes: at `x = q/m` every `L_t` is an exact small
//! integer, the chain arithmetic cancels exactly, and `phi_p(q/m)` is
//! bitwise `1.0` for `p = q` and `0.0` otherwise — the compiled network
//! reproduces nodal values exactly.

use ndarray::{Array1, Array2};

use crate::field::BaseFunction;
use crate::real::{rf, ru, Real};
use crate::relu_net::{AffineLayer, NetworkError, ReluNetwork};

/// One arrangement direction: `L(x) = m * (x[i] - x[j]) - shift(p)` with an
/// optional second axis `j`.
struct Direction {
    i: usize,
    j: Option<usize>,
}

fn directions(d: usize) -> Vec<Direction> {
    let mut dirs = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        dirs.push(Direction { i, j: None });
    }
    for i in 0..d {
        for j in (i + 1)..d {
            dirs.push(Direction { i, j: Some(j) });
        }
    }
    dirs
}

/// Enumerates grid multi-indices in lexicographic order.
fn grid_nodes(d: usize, m: u64) -> Vec<Vec<u64>> {
    let mut nodes = Vec::new();
    let mut current = vec![0u64; d];
    loop {
        nodes.push(current.clone());
        let mut axis = d;
        while axis > 0 {
            axis -= 1;
            if current[axis] < m {
                current[axis] += 1;
                for later in current.iter_mut().skip(axis + 1) {
                    *later = 0;
                }
                break;
            }
            if axis == 0 {
                return nodes;
            }
        }
    }
}

/// Number of nodes `(m+1)^d`, or `None` on overflow.
pub fn node_count(d: usize, m: u64) -> Option<u64> {
    let mut total: u64 = 1;
    for _ in 0..d {
        total = total.checked_mul(m + 1)?;
    }
    Some(total)
}

/// The shift `L` carries for node `p`: `p_i` for axes, `p_i - p_j` for pairs
/// (as a signed integer; exact in floating point for any realistic `m`).
fn shift(dir: &Direction, p: &[u64]) -> i64 {
    match dir.j {
        None => p[dir.i] as i64,
        Some(j) => p[dir.i] as i64 - p[j] as i64,
    }
}

/// Compiles the Kuhn-grid interpolant of `base` at resolution `m` into a
/// ReLU network. Requires `d >= 2` (one dimension has a tighter dedicated
/// construction) and a node count that fits in `u64`.
pub fn compile<F: Real>(
    base: &BaseFunction<F>,
    d: usize,
    m: u64,
) -> Result<ReluNetwork<F>, NetworkError> {
    assert!(d >= 2, "kuhn::compile requires d >= 2");
    assert!(m >= 1, "grid resolution must be at least 1");
    let h = node_count(d, m).expect("node count fits in u64") as usize;
    let nodes = grid_nodes(d, m);
    let dirs = directions(d);
    let big_d = dirs.len();
    let m_f = ru::<F>(m);
    let one = F::one();

    // Nodal values g(p/m).
    let values: Vec<F> = nodes
        .iter()
        .map(|p| {
            let point: Vec<F> = p.iter().map(|&i| rf::<F>(i as f64 / m as f64)).collect();
            base.evaluate(&point)
        })
        .collect();

    let mut layers: Vec<AffineLayer<F>> = Vec::with_capacity(big_d + 2);

    // Layer 1: x rails plus the first direction's hinge pair per hat.
    {
        let rows = d + 2 * h;
        let mut w = Array2::zeros((rows, d));
        let mut b = Array1::zeros(rows);
        for r in 0..d {
            w[(r, r)] = one;
        }
        let dir = &dirs[0];
        for (hat, p) in nodes.iter().enumerate() {
            let s = rf::<F>(shift(dir, p) as f64);
            let plus = d + 2 * hat;
            w[(plus, dir.i)] = m_f;
            if let Some(j) = dir.j {
                w[(plus, j)] = -m_f;
            }
            b[plus] = -s;
            let minus = plus + 1;
            w[(minus, dir.i)] = -m_f;
            if let Some(j) = dir.j {
                w[(minus, j)] = m_f;
            }
            b[minus] = s;
        }
        layers.push(AffineLayer { weights: w, bias: b });
    }

    // Layers 2..=D: one chain step per direction.
    for (t, dir) in dirs.iter().enumerate().skip(1) {
        let prev_stride = if t == 1 { 2 } else { 3 };
        let in_dim = d + prev_stride * h;
        let rows = d + 3 * h;
        let mut w = Array2::zeros((rows, in_dim));
        let mut b = Array1::zeros(rows);
        for r in 0..d {
            w[(r, r)] = one;
        }
        for (hat, p) in nodes.iter().enumerate() {
            let prev = d + prev_stride * hat;
            let row = d + 3 * hat;
            // Carry pre-activation c_{t-1} as a linear form over the
            // previous layer: 1 - u+ - u- after the first step, and
            // carry - u+ - u- afterwards.
            let carry_bias = if t == 1 { one } else { F::zero() };
            let mut carry_cols: Vec<(usize, F)> = Vec::with_capacity(3);
            if t == 1 {
                carry_cols.push((prev, -one));
                carry_cols.push((prev + 1, -one));
            } else {
                carry_cols.push((prev, one));
                carry_cols.push((prev + 1, -one));
                carry_cols.push((prev + 2, -one));
            }
            let s = rf::<F>(shift(dir, p) as f64);
            for target in 0..3 {
                let r = row + target;
                for &(c, v) in &carry_cols {
                    w[(r, c)] = v;
                }
                b[r] = carry_bias;
            }
            // u+ = relu(c - 1 + L), u- = relu(c - 1 - L).
            let plus = row + 1;
            w[(plus, dir.i)] += m_f;
            if let Some(j) = dir.j {
                w[(plus, j)] = w[(plus, j)] - m_f;
            }
            b[plus] = b[plus] - s - one;
            let minus = row + 2;
            w[(minus, dir.i)] = w[(minus, dir.i)] - m_f;
            if let Some(j) = dir.j {
                w[(minus, j)] += m_f;
            }
            b[minus] = b[minus] + s - one;
        }
        layers.push(AffineLayer { weights: w, bias: b });
    }

    // Layer D+1: final carries, phi_p = relu(c_D).
    {
        let in_dim = d + 3 * h;
        let mut w = Array2::zeros((h, in_dim));
        let b = Array1::zeros(h);
        for hat in 0..h {
            let prev = d + 3 * hat;
            w[(hat, prev)] = one;
            w[(hat, prev + 1)] = -one;
            w[(hat, prev + 2)] = -one;
        }
        layers.push(AffineLayer { weights: w, bias: b });
    }

    // Output layer: nodal values.
    {
        let mut w = Array2::zeros((1, h));
        for (hat, &v) in values.iter().enumerate() {
            w[(0, hat)] = v;
        }
        layers.push(AffineLayer {
            weights: w,
            bias: Array1::from(vec![F::zero()]),
        });
    }

    ReluNetwork::new(d, layers)
}
