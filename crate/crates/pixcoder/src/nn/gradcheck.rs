//! Finite-difference gradient oracle.
//!
//! Perturbs every parameter and re-evaluates the forward-only loss, never
//! touching the backward pass it is checking.

use crate::num::Scalar;

use super::{NnError, TrainItem, VisionModel};

/// Central-difference gradient of the mean batch loss for every parameter,
/// in the same order as [`super::Grads::flat`]. The model is restored
/// exactly afterwards.
pub fn numeric_gradient<F: Scalar>(
    model: &mut VisionModel<F>,
    batch: &[TrainItem],
    step: f64,
) -> Result<Vec<f64>, NnError> {
    let n = model.param_count();
    let mut out = Vec::with_capacity(n);
    let h = F::from_f64_lossy(step);
    for i in 0..n {
        let original = get_param(model, i);
        set_param(model, i, original + h);
        let plus = model.loss(batch)?;
        set_param(model, i, original - h);
        let minus = model.loss(batch)?;
        set_param(model, i, original);
        out.push((plus - minus) / (2.0 * step));
    }
    Ok(out)
}

/// `|a - b| / max(1, |a|, |b|)`, the scale floor making tiny gradients
/// compare absolutely.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &b)| (a - b).abs() / 1f64.max(a.abs()).max(b.abs()))
        .fold(0.0, f64::max)
}

fn get_param<F: Scalar>(model: &VisionModel<F>, index: usize) -> F {
    let mut i = index;
    for slice in model.param_slices() {
        if i < slice.len() {
            return slice[i];
        }
        i -= slice.len();
    }
    panic!("parameter index {index} out of range");
}

fn set_param<F: Scalar>(model: &mut VisionModel<F>, index: usize, value: F) {
    let mut i = index;
    for slice in model.param_slices_mut() {
        if i < slice.len() {
            slice[i] = value;
            return;
        }
        i -= slice.len();
    }
    panic!("parameter index {index} out of range");
}
