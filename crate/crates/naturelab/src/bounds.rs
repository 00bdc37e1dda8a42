//! Stage bounds for the explorer strategy and the doubling schedule that
//! stitches explorers with shrinking parameters into a single strategy.
//!
//! The bound K(δ, n) = ⌈max(α₁, α₂) + 2⌉ with
//!
//!   α₁ = (128/δ²)·ln(256/δ³)
//!   α₂ = (n²(8n/δ + 1)·ln(2n²/δ) + 1) / ((3/4)δ)
//!
//! is evaluated in exact rational interval arithmetic: the logarithms are
//! certified intervals, so the integer ceiling is exact rather than a
//! float artifact. Precision is doubled until both interval endpoints
//! agree on the ceiling (the true value is irrational, so this
//! terminates).

use num::traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::rational::{ln_interval, rat, rat_int, Rat};

/// Stage bound K for an explorer with parameter `delta` on a problem of
/// size `n = max(n_A, n_S)`.
pub fn theoretical_k(delta: &Rat, n: u32) -> Result<u64> {
    if !delta.is_positive() || delta >= &Rat::one() {
        return Err(Error::Argument(format!(
            "delta must be in (0, 1), got {delta}"
        )));
    }
    if n == 0 {
        return Err(Error::Argument("n must be >= 1".into()));
    }
    let n_rat = rat_int(n as i64);
    let n_sq = &n_rat * &n_rat;

    // constant factors, all exact
    let a1_coeff = rat_int(128) / (delta * delta);
    let a1_log_arg = rat_int(256) / (delta * delta * delta);
    let a2_coeff = &n_sq * (rat_int(8) * &n_rat / delta + Rat::one());
    let a2_log_arg = rat_int(2) * &n_sq / delta;
    let a2_denom = rat(3, 4) * delta;

    for bits in [128u32, 256, 512, 1024, 2048] {
        let alpha1 = ln_interval(&a1_log_arg, bits)?.scale(&a1_coeff);
        let alpha2 = ln_interval(&a2_log_arg, bits)?
            .scale(&a2_coeff)
            .shift(&Rat::one())
            .scale(&(Rat::one() / &a2_denom));
        let k = alpha1.max(&alpha2).shift(&rat_int(2));
        let lo = k.lo.ceil().to_integer();
        let hi = k.hi.ceil().to_integer();
        if lo == hi {
            return lo.to_u64().ok_or_else(|| {
                Error::Argument(format!(
                    "stage bound for delta={delta}, n={n} exceeds u64"
                ))
            });
        }
    }
    Err(Error::Argument(format!(
        "stage bound for delta={delta}, n={n} did not stabilize; \
         value sits pathologically close to an integer"
    )))
}

/// Doubling schedule: block m (1-based) runs a fresh explorer with
/// parameter δ_m/2 for K_m stages, where δ_m = δ₁·2^(1−m), K₁ is the
/// stage bound for δ₁/2, and each later block is long enough that
/// K_{m+1} ≥ 2·(ΣK_j)/δ_m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposerSchedule {
    n: u32,
    delta_initial: Rat,
    deltas: Vec<Rat>,
    block_lengths: Vec<u64>,
}

impl ComposerSchedule {
    pub fn new(delta_initial: &Rat, horizon_blocks: usize, n: u32) -> Result<Self> {
        if !delta_initial.is_positive() || delta_initial >= &Rat::one() {
            return Err(Error::Argument(format!(
                "delta_initial must be in (0, 1), got {delta_initial}"
            )));
        }
        if horizon_blocks == 0 {
            return Err(Error::Argument("horizon_blocks must be >= 1".into()));
        }
        let mut schedule = ComposerSchedule {
            n,
            delta_initial: delta_initial.clone(),
            deltas: Vec::new(),
            block_lengths: Vec::new(),
        };
        schedule.extend_to_blocks(horizon_blocks)?;
        Ok(schedule)
    }

    /// Grow the schedule to at least `blocks` blocks. The construction
    /// rule is total, so a session can extend on demand when an episode
    /// outlives the blocks requested up front.
    pub fn extend_to_blocks(&mut self, blocks: usize) -> Result<()> {
        use num::bigint::BigInt;
        while self.deltas.len() < blocks {
            let m = self.deltas.len(); // 0-based index of the new block
            let delta_m = &self.delta_initial / Rat::from_integer(BigInt::one() << m);
            let base = theoretical_k(&(&delta_m / rat_int(2)), self.n)?;
            let k_m = if m == 0 {
                base
            } else {
                // smallest integer with K_{m+1} >= 2·(sum of earlier K)/δ_m,
                // where δ_m is the PREVIOUS block's parameter
                let prev_delta = &self.deltas[m - 1];
                let sum: u64 = self.block_lengths.iter().sum();
                let min_len = (Rat::from_integer(BigInt::from(2u64) * sum) / prev_delta)
                    .ceil()
                    .to_integer()
                    .to_u64()
                    .ok_or_else(|| Error::Argument("composer block length exceeds u64".into()))?;
                base.max(min_len)
            };
            self.deltas.push(delta_m);
            self.block_lengths.push(k_m);
        }
        Ok(())
    }

    pub fn deltas(&self) -> &[Rat] {
        &self.deltas
    }

    pub fn block_lengths(&self) -> &[u64] {
        &self.block_lengths
    }

    /// Which block a 1-based stage falls into, extending the schedule if
    /// needed. Returns the 0-based block index.
    pub fn block_of_stage(&mut self, stage: u64) -> Result<usize> {
        let mut boundary = 0u64;
        let mut m = 0usize;
        loop {
            if m >= self.block_lengths.len() {
                self.extend_to_blocks(m + 1)?;
            }
            boundary += self.block_lengths[m];
            if stage <= boundary {
                return Ok(m);
            }
            m += 1;
        }
    }

    /// The explorer parameter for a block: δ_m/2.
    pub fn explorer_delta(&self, block: usize) -> Rat {
        &self.deltas[block] / rat_int(2)
    }
}
