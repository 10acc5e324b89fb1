//! Seed derivation for reproducible experiments.
//!
//! Every experiment is driven by one master seed. Replica `k` derives two
//! independent substreams from it, one for the known-signal draw and one for
//! the world process (channel, clocks, noise), so a replica's trajectory does
//! not depend on run length, replica count, or execution order.

/// SplitMix64 step; the standard finalizer used to spread seed bits.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive substream `index` from `master`.
pub fn derive(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Seeds for one Monte Carlo replica.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSeeds {
    /// Seed for the known-signal generator.
    pub signal: u64,
    /// Seed for the world process (channel draw, clock walks, noise).
    pub world: u64,
}

/// Substreams for replica `replica` of the experiment seeded by `master`.
pub fn replica_seeds(master: u64, replica: u64) -> RunSeeds {
    let base = derive(master, replica);
    RunSeeds {
        signal: derive(base, 1),
        world: derive(base, 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_differ_and_are_stable() {
        let a = replica_seeds(7, 0);
        let b = replica_seeds(7, 1);
        assert_ne!(a.signal, a.world);
        assert_ne!(a.signal, b.signal);
        assert_ne!(a.world, b.world);
        // Pinned: replica streams must never change between releases.
        assert_eq!(replica_seeds(7, 0), replica_seeds(7, 0));
    }
}
