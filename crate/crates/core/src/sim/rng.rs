use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams drawn per Monte-Carlo trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    SensorNoise = 0,
    Parameters = 1,
}

/// Counter-based substream for `(master seed, trial, purpose)`. The result
/// does not depend on which worker runs the trial or in what order.
pub fn substream(master_seed: u64, trial: u64, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial * 2 + purpose as u64);
    rng
}
