//! Counter-based random streams.
//!
//! A stream is identified by `(master_seed, replication, role)`. The first two
//! form the ChaCha key and the role selects the ChaCha stream (nonce), so any
//! replication can be regenerated in isolation and in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// What a stream is used for. Distinct roles never share key material.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamRole {
    Innovations = 0,
    Auxiliary = 1,
}

/// Key for one counter-based stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    pub replication: u64,
    /// Extra key word, e.g. the sample size of the replication.
    pub salt: u64,
    pub role: StreamRole,
}

impl StreamKey {
    pub fn new(master_seed: u64, replication: u64, role: StreamRole) -> Self {
        Self {
            master_seed,
            replication,
            salt: 0,
            role,
        }
    }

    pub fn with_salt(mut self, salt: u64) -> Self {
        self.salt = salt;
        self
    }

    /// Builds the generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.replication.to_le_bytes());
        key[16..24].copy_from_slice(&self.salt.to_le_bytes());
        // domain tag so a zero key never occurs
        key[24..32].copy_from_slice(&0x7067_7375_6d5f_7631u64.to_le_bytes());
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream(self.role as u64);
        rng
    }
}
