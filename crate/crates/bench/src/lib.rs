//! Fixtures shared by the benchmarks.

use quadweil::weil::StateVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Two unit vectors on (Z/qZ)^4 from a fixed seed.
pub fn state_pair(q: u64, seed: u64) -> (StateVector, StateVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        StateVector::random_unit(q, &mut rng),
        StateVector::random_unit(q, &mut rng),
    )
}
