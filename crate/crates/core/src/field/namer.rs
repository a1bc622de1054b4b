use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::poly::Var;

/// Append-only allocator of fresh indeterminate names. Names carry a short
/// salt derived from the seed, so replays with the same seed agree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Namer {
    salt: String,
    counter: u64,
    taken: BTreeSet<String>,
}

impl Namer {
    pub fn new(seed: u64) -> Namer {
        const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let salt = (0..3).map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char).collect();
        Namer { salt, counter: 0, taken: BTreeSet::new() }
    }

    pub fn reserve(&mut self, name: &str) {
        self.taken.insert(name.to_string());
    }

    pub fn is_taken(&self, name: &str) -> bool {
        self.taken.contains(name)
    }

    /// `prefix` must be a valid name start, e.g. `u`.
    pub fn fresh(&mut self, prefix: &str) -> Var {
        loop {
            self.counter += 1;
            let name = format!("{prefix}{}_{}", self.counter, self.salt);
            if self.taken.insert(name.clone()) {
                return Var::new(&name);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse::is_valid_name;

    #[test]
    fn deterministic_and_fresh() {
        let mut a = Namer::new(7);
        let mut b = Namer::new(7);
        let xs: Vec<Var> = (0..5).map(|_| a.fresh("u")).collect();
        let ys: Vec<Var> = (0..5).map(|_| b.fresh("u")).collect();
        assert_eq!(xs, ys);
        assert_eq!(xs.iter().collect::<BTreeSet<_>>().len(), 5);
        assert!(xs.iter().all(|v| is_valid_name(v.name())));
        let mut c = Namer::new(7);
        c.reserve(xs[0].name());
        assert_ne!(c.fresh("u"), xs[0]);
    }
}
