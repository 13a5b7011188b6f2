/// Deterministic work counter standing in for wall-clock time.
///
/// One charge unit is one amplified-hash evaluation or one candidate
/// distance evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorkBudget {
    limit: Option<u64>,
    spent: u64,
}

/// Returned when a charge would push `spent` past `limit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exhausted;

impl WorkBudget {
    pub fn limited(limit: u64) -> Self {
        Self {
            limit: Some(limit),
            spent: 0,
        }
    }

    /// A budget that only counts.
    pub fn unlimited() -> Self {
        Self { limit: None, spent: 0 }
    }

    pub fn limit(&self) -> Option<u64> {
        self.limit
    }

    pub fn spent(&self) -> u64 {
        self.spent
    }

    /// Charges `units`. On exhaustion `spent` is pinned to `limit`.
    #[inline]
    pub fn charge(&mut self, units: u64) -> Result<(), Exhausted> {
        let next = self.spent + units;
        match self.limit {
            Some(limit) if next > limit => {
                self.spent = limit;
                Err(Exhausted)
            }
            _ => {
                self.spent = next;
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pins_to_limit() {
        let mut b = WorkBudget::limited(5);
        assert!(b.charge(3).is_ok());
        assert_eq!(b.charge(3), Err(Exhausted));
        assert_eq!(b.spent(), 5);
        let mut u = WorkBudget::unlimited();
        u.charge(1_000_000).unwrap();
        assert_eq!(u.spent(), 1_000_000);
    }
}
