use crate::error::{Error, Result};

/// Softmax cross-entropy of `logits` against `label`.
///
/// Returns `(−log p_label, p − onehot(label))`. The loss is evaluated as
/// `(max − z_label) + ln(1 + Σ_{j≠argmax} e^{z_j − max})` so that saturated
/// predictions keep their tiny positive loss instead of rounding to zero.
pub fn softmax_cross_entropy(logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    if label >= logits.len() {
        return Err(Error::invalid(format!(
            "label {label} out of range for {} classes",
            logits.len()
        )));
    }
    let top = super::network::argmax(logits);
    let max = logits[top];
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let rest: f64 = exps
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != top)
        .map(|(_, e)| e)
        .sum();
    let loss = (max - logits[label]) + rest.ln_1p();
    let total = 1.0 + rest;
    let mut grad: Vec<f64> = exps.iter().map(|e| e / total).collect();
    grad[label] -= 1.0;
    Ok((loss, grad))
}
