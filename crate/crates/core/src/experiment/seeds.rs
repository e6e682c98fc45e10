use serde::Serialize;

/// One step of the splitmix64 generator.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeds for the independent randomness sources of one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TrialSeeds {
    pub trial: usize,
    pub stream: u64,
    pub adversary: u64,
    pub delays: u64,
}

/// Trial `i` mixes the base seed with a scrambled index, so every trial
/// (and every sweep point sharing a trial index) gets the same streams.
pub fn trial_seeds(base: u64, trial: usize) -> TrialSeeds {
    let mut index = trial as u64;
    let mut state = base ^ splitmix64(&mut index);
    TrialSeeds {
        trial,
        stream: splitmix64(&mut state),
        adversary: splitmix64(&mut state),
        delays: splitmix64(&mut state),
    }
}
