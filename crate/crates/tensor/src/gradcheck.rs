//! Central-difference verification of reverse-mode gradients.

/// Outcome of comparing analytic gradients against central differences.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_index: usize,
    pub checked: usize,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err < self.tolerance
    }
}

/// Compare the analytic gradient of `f` at `point` against central finite
/// differences with the given step.
///
/// `f` must be a deterministic scalar function; `analytic` is the gradient
/// produced by the tape. Relative error uses `max(|a|, |fd|, 1.0)` as the
/// denominator so near-zero components are judged on absolute error.
pub fn grad_check(
    mut f: impl FnMut(&[f64]) -> f64,
    point: &[f64],
    analytic: &[f64],
    step: f64,
    tolerance: f64,
) -> GradCheckReport {
    assert_eq!(point.len(), analytic.len());
    let mut max_rel_err: f64 = 0.0;
    let mut worst_index = 0;
    let mut x = point.to_vec();
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + step;
        let fp = f(&x);
        x[i] = orig - step;
        let fm = f(&x);
        x[i] = orig;
        let fd = (fp - fm) / (2.0 * step);
        let denom = analytic[i].abs().max(fd.abs()).max(1.0);
        let rel = (analytic[i] - fd).abs() / denom;
        if rel > max_rel_err {
            max_rel_err = rel;
            worst_index = i;
        }
    }
    GradCheckReport { max_rel_err, worst_index, checked: point.len(), tolerance }
}
