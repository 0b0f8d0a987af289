//! 16-bit Galois LFSR used to synthesize proximal synapse addresses.
//!
//! Polynomial x^16 + x^14 + x^13 + x^11 + 1, right-shift form (tap mask
//! 0xB400). The sequence visits all 65535 nonzero states before repeating;
//! the all-zero state is absorbing and rejected at construction.

use crate::error::{HtmError, Result};

pub const TAP_MASK: u16 = 0xB400;
pub const PERIOD: u32 = 65535;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lfsr16 {
    state: u16,
}

impl Lfsr16 {
    pub fn new(state: u16) -> Result<Self> {
        if state == 0 {
            return Err(HtmError::Config(
                "LFSR state must be nonzero (all-zero state is absorbing)".into(),
            ));
        }
        Ok(Lfsr16 { state })
    }

    #[inline]
    pub fn state(&self) -> u16 {
        self.state
    }

    /// Advance one step; returns the new state as the output value.
    #[inline]
    pub fn advance(&mut self) -> u16 {
        let lsb = self.state & 1;
        self.state >>= 1;
        if lsb == 1 {
            self.state ^= TAP_MASK;
        }
        self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_from_one() {
        let mut l = Lfsr16::new(0x0001).unwrap();
        assert_eq!(l.advance(), 0xB400);
    }

    #[test]
    fn zero_state_rejected() {
        assert!(Lfsr16::new(0).is_err());
    }

    #[test]
    fn maximal_period_and_distinct_states() {
        let mut l = Lfsr16::new(0xACE1).unwrap();
        let mut seen = vec![false; 65536];
        for _ in 0..PERIOD {
            let s = l.advance();
            assert_ne!(s, 0);
            assert!(!seen[s as usize], "state {s:#06x} repeated early");
            seen[s as usize] = true;
        }
        assert_eq!(l.state(), 0xACE1, "sequence must return to the seed");
    }
}
