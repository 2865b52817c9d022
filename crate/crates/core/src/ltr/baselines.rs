use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded uniform shuffle.
pub fn baseline_random<T: Clone>(items: &[T], seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = items.to_vec();
    out.shuffle(&mut rng);
    out
}

/// GFI-labeled items in random order, then the rest in random order. With
/// no labeled items this equals [`baseline_random`] under the same seed.
pub fn baseline_gfirandom<T: Clone>(items: &[T], is_gfi: impl Fn(&T) -> bool, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut gfi, mut rest): (Vec<T>, Vec<T>) = items.iter().cloned().partition(|x| is_gfi(x));
    gfi.shuffle(&mut rng);
    rest.shuffle(&mut rng);
    gfi.extend(rest);
    gfi
}
