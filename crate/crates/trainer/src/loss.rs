use crysflow_tensor::{Tape, Var};

/// Rewards are floored here before the logarithm; the weighted composite is
/// positive with the default weights, this is the safety net.
pub const REWARD_FLOOR: f64 = 1e-8;

/// Trajectory-balance loss of one trajectory:
/// (log Z + log P_F(tau) - log R(x) - log P_B(tau))^2.
/// The reward enters as a constant; gradients flow into log Z and the
/// log-density terms.
pub fn tb_loss(tape: &mut Tape, log_z: Var, log_pf: Var, log_pb: Var, reward: f64) -> Var {
    let log_r = reward.max(REWARD_FLOOR).ln();
    let lhs = tape.add(log_z, log_pf);
    let rhs = tape.add_const(log_pb, log_r);
    let delta = tape.sub(lhs, rhs);
    tape.square(delta)
}
