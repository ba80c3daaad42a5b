//! Axis-wise tensor primitives used by the chain contraction engine.

use ndarray::{Array1, Array2, ArrayD, Axis};

/// `t[.., i, ..] *= v[i]` along `ax`.
pub(crate) fn scale_axis(t: &mut ArrayD<f64>, ax: usize, v: &Array1<f64>) {
    for (i, mut lane) in t.axis_iter_mut(Axis(ax)).enumerate() {
        lane.mapv_inplace(|x| x * v[i]);
    }
}

/// `t[.., i, .., j, ..] *= m[i, j]` over the axis pair `(ax_a, ax_b)`.
pub(crate) fn mul_pair(t: &mut ArrayD<f64>, ax_a: usize, ax_b: usize, m: &Array2<f64>) {
    debug_assert_ne!(ax_a, ax_b);
    let ax_b_inner = if ax_b > ax_a { ax_b - 1 } else { ax_b };
    for (i, mut sl) in t.axis_iter_mut(Axis(ax_a)).enumerate() {
        for (j, mut lane) in sl.axis_iter_mut(Axis(ax_b_inner)).enumerate() {
            lane.mapv_inplace(|x| x * m[(i, j)]);
        }
    }
}

/// `t[.., i, .., j, ..] /= m[i, j]` over the axis pair `(ax_a, ax_b)`.
pub(crate) fn div_pair(t: &mut ArrayD<f64>, ax_a: usize, ax_b: usize, m: &Array2<f64>) {
    debug_assert_ne!(ax_a, ax_b);
    let ax_b_inner = if ax_b > ax_a { ax_b - 1 } else { ax_b };
    for (i, mut sl) in t.axis_iter_mut(Axis(ax_a)).enumerate() {
        for (j, mut lane) in sl.axis_iter_mut(Axis(ax_b_inner)).enumerate() {
            lane.mapv_inplace(|x| x / m[(i, j)]);
        }
    }
}

/// `t[.., i, ..] /= v[i]` along `ax`.
pub(crate) fn div_axis(t: &mut ArrayD<f64>, ax: usize, v: &Array1<f64>) {
    for (i, mut lane) in t.axis_iter_mut(Axis(ax)).enumerate() {
        lane.mapv_inplace(|x| x / v[i]);
    }
}

/// Contracts `sum_ax` against the matrix: `out[.., j, ..] = sum_i t[.., i, .., j, ..] m[i, j]`,
/// where `i` runs over `sum_ax` and `j` over `keep_ax`. The summed axis is removed.
pub(crate) fn contract_pair(
    t: &ArrayD<f64>,
    sum_ax: usize,
    keep_ax: usize,
    m: &Array2<f64>,
) -> ArrayD<f64> {
    debug_assert_ne!(sum_ax, keep_ax);
    let n_sum = t.shape()[sum_ax];
    let keep_inner = if keep_ax > sum_ax { keep_ax - 1 } else { keep_ax };
    let mut shape: Vec<usize> = t.shape().to_vec();
    shape.remove(sum_ax);
    let mut out = ArrayD::<f64>::zeros(ndarray::IxDyn(&shape));
    for i in 0..n_sum {
        let sl = t.index_axis(Axis(sum_ax), i);
        for (j, lane) in sl.axis_iter(Axis(keep_inner)).enumerate() {
            out.index_axis_mut(Axis(keep_inner), j).scaled_add(m[(i, j)], &lane);
        }
    }
    out
}

/// Weighted sum along one axis: `out[..] = sum_i t[.., i, ..] v[i]`.
pub(crate) fn contract_axis(t: &ArrayD<f64>, ax: usize, v: &Array1<f64>) -> ArrayD<f64> {
    let mut shape: Vec<usize> = t.shape().to_vec();
    shape.remove(ax);
    let mut out = ArrayD::<f64>::zeros(ndarray::IxDyn(&shape));
    for (i, sl) in t.axis_iter(Axis(ax)).enumerate() {
        out.scaled_add(v[i], &sl);
    }
    out
}

/// Plain sum along one axis.
pub(crate) fn sum_axis(t: &ArrayD<f64>, ax: usize) -> ArrayD<f64> {
    t.sum_axis(Axis(ax))
}
