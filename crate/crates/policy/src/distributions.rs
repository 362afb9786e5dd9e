//! Categorical and Beta action distributions: f64 sampling plus differentiable
//! log-densities on the tape, including the affine change of variables for
//! scaled supports.

use crysflow_tensor::{Tape, Var};
use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution};

use crate::{PolicyError, Result};

/// Beta concentrations are softplus outputs raised by this floor, keeping
/// densities finite and proper.
pub const BETA_CONCENTRATION_FLOOR: f64 = 1e-4;

/// Unit-interval samples are clamped this far away from {0, 1} before any
/// logarithm is taken.
const UNIT_EPS: f64 = 1e-9;

/// Sample an index from masked logits (f64 path, no gradients). Masked-out
/// entries carry exactly zero probability.
pub fn sample_categorical(
    logits: &[f64],
    allowed: &[bool],
    rng: &mut impl Rng,
) -> Result<usize> {
    assert_eq!(logits.len(), allowed.len());
    let mut max = f64::NEG_INFINITY;
    for (l, &ok) in logits.iter().zip(allowed) {
        if ok && *l > max {
            max = *l;
        }
    }
    if max == f64::NEG_INFINITY {
        return Err(PolicyError::AllElementsMasked);
    }
    let mut total = 0.0;
    let weights: Vec<f64> = logits
        .iter()
        .zip(allowed)
        .map(|(l, &ok)| {
            let w = if ok { (l - max).exp() } else { 0.0 };
            total += w;
            w
        })
        .collect();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 && *w > 0.0 {
            return Ok(i);
        }
    }
    // numerical tail: last allowed index
    Ok(weights
        .iter()
        .rposition(|w| *w > 0.0)
        .expect("some weight is positive"))
}

/// Differentiable log-mass of `chosen` under masked logits: the masked subset
/// is gathered, log-sum-exp normalized, and the chosen entry picked, so
/// masked entries never contribute mass.
pub fn categorical_log_prob(
    tape: &mut Tape,
    logits: Var,
    allowed: &[bool],
    chosen: usize,
) -> Result<Var> {
    let keep: Vec<usize> = (0..allowed.len()).filter(|&i| allowed[i]).collect();
    if keep.is_empty() {
        return Err(PolicyError::AllElementsMasked);
    }
    let pos = keep
        .iter()
        .position(|&i| i == chosen)
        .ok_or(PolicyError::BadElementChoice(chosen))?;
    let subset = tape.gather(logits, &keep);
    let picked = tape.pick(subset, pos);
    let lse = tape.log_sum_exp(subset);
    Ok(tape.sub(picked, lse))
}

/// Sample from Beta(alpha, beta) on the unit interval, clamped away from the
/// endpoints.
pub fn sample_beta(alpha: f64, beta: f64, rng: &mut impl Rng) -> f64 {
    let dist = BetaDist::new(alpha, beta).expect("positive concentrations");
    dist.sample(rng).clamp(UNIT_EPS, 1.0 - UNIT_EPS)
}

/// Differentiable Beta log-density at a unit-interval sample, with the
/// change-of-variables term for a support scaled to width `range_width`:
///   log f = (a-1) ln u + (b-1) ln(1-u) - ln B(a, b) - ln(range_width)
/// The sample is a constant; gradients flow to the concentrations.
pub fn beta_log_prob(
    tape: &mut Tape,
    alpha: Var,
    beta: Var,
    unit_value: f64,
    range_width: f64,
) -> Var {
    let u = unit_value.clamp(UNIT_EPS, 1.0 - UNIT_EPS);
    let a1 = tape.add_const(alpha, -1.0);
    let t1 = tape.scale(a1, u.ln());
    let b1 = tape.add_const(beta, -1.0);
    let t2 = tape.scale(b1, (1.0 - u).ln());
    let ln_ga = tape.ln_gamma(alpha);
    let ln_gb = tape.ln_gamma(beta);
    let apb = tape.add(alpha, beta);
    let ln_gab = tape.ln_gamma(apb);
    let shape_part = tape.add(t1, t2);
    let norm = tape.add(ln_ga, ln_gb);
    let log_b = tape.sub(norm, ln_gab);
    let unit_logp = tape.sub(shape_part, log_b);
    tape.add_const(unit_logp, -range_width.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crysflow_tensor::Tensor;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn uniform_beta_on_unit_interval_has_zero_log_density() {
        let mut tape = Tape::new();
        let a = tape.leaf(Tensor::scalar(1.0));
        let b = tape.leaf(Tensor::scalar(1.0));
        let lp = beta_log_prob(&mut tape, a, b, 0.3, 1.0);
        assert!(tape.value(lp).item().abs() < 1e-12);
    }

    #[test]
    fn uniform_beta_scaled_to_length_range() {
        // Beta(1,1) stretched over [2, 12] has density 1/10 everywhere
        let mut tape = Tape::new();
        let a = tape.leaf(Tensor::scalar(1.0));
        let b = tape.leaf(Tensor::scalar(1.0));
        let lp = beta_log_prob(&mut tape, a, b, 0.3, 10.0);
        assert!((tape.value(lp).item() - (0.1f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn beta_log_density_matches_closed_form() {
        // Beta(2,2): f(u) = 6 u (1-u)
        let mut tape = Tape::new();
        let a = tape.leaf(Tensor::scalar(2.0));
        let b = tape.leaf(Tensor::scalar(2.0));
        let u = 0.5;
        let lp = beta_log_prob(&mut tape, a, b, u, 1.0);
        assert!((tape.value(lp).item() - (6.0f64 * u * (1.0 - u)).ln()).abs() < 1e-10);
    }

    #[test]
    fn equal_logits_over_230_groups() {
        let mut tape = Tape::new();
        let logits = tape.leaf(Tensor::vector(vec![0.2; 230]));
        let allowed = vec![true; 230];
        let lp = categorical_log_prob(&mut tape, logits, &allowed, 57).unwrap();
        assert!((tape.value(lp).item() + 230.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn single_unmasked_element_is_certain() {
        let mut rng = StdRng::seed_from_u64(3);
        let logits = vec![-2.0, 0.5, 3.0];
        let allowed = vec![false, true, false];
        for _ in 0..20 {
            assert_eq!(sample_categorical(&logits, &allowed, &mut rng).unwrap(), 1);
        }
        let mut tape = Tape::new();
        let lv = tape.leaf(Tensor::vector(logits));
        let lp = categorical_log_prob(&mut tape, lv, &allowed, 1).unwrap();
        assert!(tape.value(lp).item().abs() < 1e-12);
    }

    #[test]
    fn masked_probabilities_sum_to_one_and_exclude_masked() {
        let logits = vec![1.0, 2.0, -1.0, 0.3];
        let allowed = vec![true, false, true, true];
        let mut tape = Tape::new();
        let lv = tape.leaf(Tensor::vector(logits.clone()));
        let mut total = 0.0;
        for (i, &ok) in allowed.iter().enumerate() {
            if ok {
                let lp = categorical_log_prob(&mut tape, lv, &allowed, i).unwrap();
                total += tape.value(lp).item().exp();
            } else {
                assert!(matches!(
                    categorical_log_prob(&mut tape, lv, &allowed, i),
                    Err(PolicyError::BadElementChoice(_))
                ));
            }
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_masked_is_an_error() {
        let mut rng = StdRng::seed_from_u64(3);
        assert!(matches!(
            sample_categorical(&[1.0, 2.0], &[false, false], &mut rng),
            Err(PolicyError::AllElementsMasked)
        ));
    }

    #[test]
    fn sampled_frequencies_follow_the_distribution() {
        let mut rng = StdRng::seed_from_u64(11);
        let logits = vec![0.0, (3.0f64).ln()]; // p = (1/4, 3/4)
        let allowed = vec![true, true];
        let n = 40_000;
        let mut count1 = 0;
        for _ in 0..n {
            if sample_categorical(&logits, &allowed, &mut rng).unwrap() == 1 {
                count1 += 1;
            }
        }
        let p1 = count1 as f64 / n as f64;
        assert!((p1 - 0.75).abs() < 0.01, "p1 = {p1}");
    }

    #[test]
    fn beta_sampling_respects_concentrations() {
        let mut rng = StdRng::seed_from_u64(5);
        let n = 20_000;
        let mean: f64 =
            (0..n).map(|_| sample_beta(8.0, 2.0, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.8).abs() < 0.01, "mean {mean}");
    }
}
